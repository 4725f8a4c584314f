from virality.baselines import BASELINE_ORDER, BaselineKind, run_baselines
from virality.evaluation import EvalReport, render_results_table, write_report
from virality.management.base import RunCommand
from virality.models import ExperimentRun
from virality.pipeline import load_prepared, read_matching_report, report_path
from virality.tasks import fit_baseline_task


class Command(RunCommand):
    help = 'Обучает бейзлайны и печатает сводную таблицу сравнения с ViralBERT'

    def add_arguments(self, parser):
        parser.add_argument(
            '--kinds',
            default=','.join(kind.value for kind in BASELINE_ORDER),
            help='Бейзлайны через запятую',
        )
        parser.add_argument('--async', action='store_true', dest='use_async', help='Раздать бейзлайны воркерам Celery')
        super().add_arguments(parser)

    def run(self, *args, **options):
        config = self.load_config(options)
        run_dir = config.run_dir
        kinds = [BaselineKind.parse(name.strip()) for name in options['kinds'].split(',') if name.strip()]

        if options['use_async']:
            self.stdout.write(f'📤 Отправка {len(kinds)} задач в Celery...')
            pending = [
                fit_baseline_task.delay(config.to_dict(), kind.value, str(run_dir), config.seed) for kind in kinds
            ]
            results = [(kind.value, EvalReport.from_dict(task.get())) for kind, task in zip(kinds, pending)]
        else:
            split = load_prepared(run_dir)
            results = run_baselines(split, config.seed, config, kinds=kinds)
            for name, report in results:
                write_report(report, report_path(run_dir, name))
                ExperimentRun.record('baseline', report, run_dir)

        for name, report in results:
            if report.metadata.single_class_training:
                self.stdout.write(self.style.WARNING(f'⚠️ {name}: в train только один класс'))

        viralbert = read_matching_report(run_dir, 'viralbert', config)
        if viralbert is not None:
            results.append(('viralbert', viralbert))
        else:
            self.stdout.write(self.style.WARNING('⚠️ Нет отчёта ViralBERT с этим сидом и конфигом, строка пропущена'))

        table = render_results_table(results)
        (run_dir / 'results_table.txt').write_text(table, encoding='utf-8')
        self.stdout.write(table)
        self.stdout.write(self.style.SUCCESS(f'✅ Отчёты бейзлайнов записаны в {run_dir / "reports"}'))
