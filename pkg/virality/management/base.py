from django.core.exceptions import ImproperlyConfigured, ValidationError
from django.core.management.base import BaseCommand, CommandError

from virality.config import default_run_config, load_run_config
from virality.exceptions import ViralityError


class RunCommand(BaseCommand):
    """Общие флаги конвейера и перевод ошибок в CommandError"""

    def add_arguments(self, parser):
        parser.add_argument('--config', help='JSON-конфиг запуска')
        parser.add_argument('--seed', type=int, help='Сид (переопределяет конфиг)')
        parser.add_argument('--run-dir', help='Каталог запуска')
        parser.add_argument('--backbone', help="Бэкбон текстового энкодера, например 'toy-random'")
        parser.add_argument(
            '--feature-order',
            help='Порядок числовых признаков через запятую, например hashtags,mentions,followers',
        )

    def load_config(self, options):
        config = load_run_config(options['config']) if options.get('config') else default_run_config()
        feature_order = options.get('feature_order')
        if feature_order is not None:
            feature_order = [name.strip() for name in feature_order.split(',') if name.strip()]
        return config.with_overrides(
            seed=options.get('seed'),
            run_dir=options.get('run_dir'),
            backbone=options.get('backbone'),
            feature_order=feature_order,
        )

    def handle(self, *args, **options):
        try:
            return self.run(*args, **options)
        except ValidationError as exc:
            raise CommandError('Ошибки схемы:\n' + '\n'.join(exc.messages)) from exc
        except (ViralityError, ImproperlyConfigured, OSError) as exc:
            raise CommandError(str(exc)) from exc

    def run(self, *args, **options):
        raise NotImplementedError
