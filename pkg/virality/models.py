from django.db import models


class ExperimentRun(models.Model):
    """Реестр запусков: одна строка на (вид, модель, сид, хэш конфига)"""
    KIND_CHOICES = [
        ('train', 'Обучение ViralBERT'),
        ('evaluate', 'Оценка чекпойнта'),
        ('baseline', 'Бейзлайн'),
        ('ablation', 'Абляция признака'),
    ]

    kind = models.CharField(max_length=20, choices=KIND_CHOICES, verbose_name="Вид запуска")
    name = models.CharField(max_length=50, verbose_name="Модель")
    seed = models.IntegerField(verbose_name="Сид")
    config_hash = models.CharField(max_length=64, verbose_name="Хэш конфига")
    ablated_feature = models.CharField(max_length=20, blank=True, verbose_name="Удалённый признак")
    run_dir = models.CharField(max_length=500, blank=True, verbose_name="Каталог запуска")
    macro_f1 = models.FloatField(verbose_name="Macro-F1")
    macro_precision = models.FloatField(verbose_name="Macro precision")
    macro_recall = models.FloatField(verbose_name="Macro recall")
    accuracy = models.FloatField(verbose_name="Accuracy")
    report = models.JSONField(default=dict, verbose_name="Отчёт")
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        ordering = ['kind', 'name', 'seed']
        verbose_name = "Запуск эксперимента"
        verbose_name_plural = "Запуски экспериментов"
        constraints = [
            models.UniqueConstraint(
                fields=['kind', 'name', 'seed', 'config_hash'],
                name='unique_experiment_run',
            ),
        ]

    def __str__(self):
        return f"{self.get_kind_display()}: {self.name} (seed {self.seed}) - F1 {self.macro_f1:.3f}"

    @classmethod
    def record(cls, kind, report, run_dir=''):
        """Создаёт или обновляет строку по отчёту EvalReport"""
        metadata = report.metadata
        run, _ = cls.objects.update_or_create(
            kind=kind,
            name=metadata.model,
            seed=metadata.seed if metadata.seed is not None else 0,
            config_hash=metadata.config_hash,
            defaults={
                'ablated_feature': metadata.ablated_feature or '',
                'run_dir': str(run_dir),
                'macro_f1': report.macro_f1,
                'macro_precision': report.macro_precision,
                'macro_recall': report.macro_recall,
                'accuracy': report.accuracy,
                'report': report.to_dict(),
            },
        )
        return run
