from virality.evaluation import EvalReport, ablated_config, render_ablation_table
from virality.features import ABLATION_FEATURES
from virality.management.base import RunCommand
from virality.pipeline import read_matching_report
from virality.tasks import run_ablation_task, store_ablation


class Command(RunCommand):
    help = 'Абляция признаков: по модели без каждого из семи признаков, каждая обучается с нуля'

    def add_arguments(self, parser):
        parser.add_argument(
            '--features',
            default=','.join(ABLATION_FEATURES),
            help='Признаки для абляции через запятую',
        )
        parser.add_argument('--async', action='store_true', dest='use_async', help='Раздать прогоны воркерам Celery')
        super().add_arguments(parser)

    def run(self, *args, **options):
        config = self.load_config(options)
        run_dir = config.run_dir
        features = [name.strip() for name in options['features'].split(',') if name.strip()]
        for feature in features:
            ablated_config(config, feature)

        # контрольный прогон - обычный ViralBERT с тем же сидом и конфигом
        base = read_matching_report(run_dir, 'viralbert', config)
        if base is None:
            self.stdout.write('🧪 Контрольный прогон без абляции...')
            base = store_ablation(config, None, run_dir, config.seed)

        if options['use_async']:
            self.stdout.write(f'📤 Отправка {len(features)} задач в Celery...')
            pending = [
                run_ablation_task.delay(config.to_dict(), feature, str(run_dir), config.seed) for feature in features
            ]
            rows = [(feature, EvalReport.from_dict(task.get())) for feature, task in zip(features, pending)]
        else:
            rows = []
            for feature in features:
                self.stdout.write(f'✂️ Удаляем признак: {feature}')
                rows.append((feature, store_ablation(config, feature, run_dir, config.seed)))

        table = render_ablation_table(base, rows)
        (run_dir / 'ablation_table.txt').write_text(table, encoding='utf-8')
        self.stdout.write(table)
        self.stdout.write(self.style.SUCCESS(f'✅ Отчётов абляции: {len(rows)}'))
