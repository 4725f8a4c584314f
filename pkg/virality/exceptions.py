"""Исключения пайплайна виральности.

Ошибки конфигурации - django.core.exceptions.ImproperlyConfigured,
ошибки схемы входных файлов - django.core.exceptions.ValidationError.
"""


class ViralityError(Exception):
    """Базовое исключение пайплайна"""


class DomainError(ViralityError, ValueError):
    """Аргумент вне области определения (отрицательный счётчик, n_y = 0)"""


class InputError(ViralityError, ValueError):
    """Некорректные входные данные операции"""


class SplitSizeError(InputError):
    """Слишком мало записей для разбиения 80:10:10"""


class SequenceLengthError(InputError):
    """Последовательность токенов длиннее max_sequence_length"""


class FitError(ViralityError):
    """Невозможно обучить скейлер или модель на переданных данных"""


class BaselineFitError(ViralityError):
    """Ошибка обучения бейзлайна, в сообщении указан вид бейзлайна"""


class CheckpointMismatchError(ViralityError):
    """Чекпоинт не совпадает с конфигом (размерности, порядок признаков, бэкбон)"""


class TrainingDivergedError(ViralityError, RuntimeError):
    """Лосс стал не конечным во время обучения"""
