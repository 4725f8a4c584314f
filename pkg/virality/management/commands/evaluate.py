from pathlib import Path

from virality.checkpoints import load_checkpoint
from virality.evaluation import RunMetadata, config_hash, render_results_table, write_report
from virality.management.base import RunCommand
from virality.models import ExperimentRun
from virality.pipeline import CHECKPOINT_DIR, encode_records, evaluate_model, load_prepared, report_path


class Command(RunCommand):
    help = 'Оценивает сохранённый чекпойнт на тестовой части разбиения'

    def add_arguments(self, parser):
        parser.add_argument('--checkpoint', help='Каталог чекпойнта (по умолчанию <run-dir>/checkpoint)')
        parser.add_argument(
            '--split', default='test', choices=['train', 'validation', 'test'], help='Какую часть оценивать'
        )
        super().add_arguments(parser)

    def run(self, *args, **options):
        config = self.load_config(options)
        run_dir = config.run_dir
        checkpoint_dir = Path(options['checkpoint'] or run_dir / CHECKPOINT_DIR)

        # явно заданный конфиг обязан совпасть со снимком в чекпойнте
        explicit = any(options.get(key) for key in ('config', 'backbone', 'feature_order'))
        loaded = load_checkpoint(checkpoint_dir, run_config=config if explicit else None)
        stored = loaded.run_config
        split = load_prepared(run_dir)
        records = getattr(split, options['split'])
        examples = encode_records(records, loaded.encoder, stored)

        metadata = RunMetadata(model='viralbert', seed=stored.seed, config_hash=config_hash(stored.to_dict()))
        report = evaluate_model(loaded.model, examples, metadata, batch_size=stored.training.batch_size)
        out_path = report_path(run_dir, f"evaluation_{options['split']}")
        write_report(report, out_path)
        if options['split'] == 'test':
            ExperimentRun.record('evaluate', report, run_dir)

        for warning in report.warnings:
            self.stdout.write(self.style.WARNING(f'⚠️ {warning}'))
        self.stdout.write(render_results_table([('viralbert', report)]))
        self.stdout.write(self.style.SUCCESS(f'✅ Отчёт записан в {out_path}'))
