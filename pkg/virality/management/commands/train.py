from virality.management.base import RunCommand
from virality.models import ExperimentRun
from virality.pipeline import load_prepared, run_viralbert


class Command(RunCommand):
    help = 'Обучает ViralBERT на подготовленном разбиении и сохраняет чекпойнт, историю и отчёт'

    def run(self, *args, **options):
        config = self.load_config(options)
        run_dir = config.run_dir
        split = load_prepared(run_dir)

        self.stdout.write(
            f'🚀 Обучение ViralBERT: бэкбон {config.encoder.backbone_id}, seed {config.seed}, '
            f'train {len(split.train)} записей'
        )
        result = run_viralbert(config, split, run_dir=run_dir)
        ExperimentRun.record('train', result.report, run_dir)

        history = result.history
        self.stdout.write(
            f'📈 Эпох: {len(history.epochs)}, лучшая: {history.best_epoch} '
            f'(val macro-F1 {history.best_val_macro_f1:.4f})'
        )
        if history.stopped_early:
            self.stdout.write(self.style.WARNING('⏹️ Ранняя остановка'))
        self.stdout.write(self.style.SUCCESS(
            f'✅ Test macro-F1 {result.report.macro_f1:.4f}, accuracy {result.report.accuracy:.4f}'
        ))
