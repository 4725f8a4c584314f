from pathlib import Path

from virality.checkpoints import load_checkpoint
from virality.corpus import load_tweet_records
from virality.management.base import RunCommand
from virality.network import predict_from_logits, predict_proba
from virality.pipeline import CHECKPOINT_DIR, encode_records


class Command(RunCommand):
    help = 'Классы виральности и вероятности для записей из JSONL по сохранённому чекпойнту'

    def add_arguments(self, parser):
        parser.add_argument('records', help='JSONL-файл с твитами (счётчики вовлечённости не обязательны)')
        parser.add_argument('--checkpoint', help='Каталог чекпойнта (по умолчанию <run-dir>/checkpoint)')
        parser.add_argument('--out', help='Записать предсказания в файл вместо stdout')
        super().add_arguments(parser)

    def run(self, *args, **options):
        config = self.load_config(options)
        checkpoint_dir = Path(options['checkpoint'] or config.run_dir / CHECKPOINT_DIR)
        explicit = any(options.get(key) for key in ('config', 'backbone', 'feature_order'))
        loaded = load_checkpoint(checkpoint_dir, run_config=config if explicit else None)

        records = load_tweet_records(options['records'], require_engagement=False)
        examples = encode_records(records, loaded.encoder, loaded.run_config, with_labels=False)
        probabilities = predict_proba(loaded.model, examples) if examples else []
        classes = predict_from_logits(probabilities) if examples else []

        lines = []
        for example, class_index, probs in zip(examples, classes, probabilities):
            values = '\t'.join(f'{p:.10f}' for p in probs)
            lines.append(f'{example.record_id}\t{class_index}\t{values}')
        output = '\n'.join(lines) + ('\n' if lines else '')

        if options.get('out'):
            out_path = Path(options['out'])
            out_path.parent.mkdir(parents=True, exist_ok=True)
            out_path.write_text(output, encoding='utf-8')
            self.stdout.write(self.style.SUCCESS(f'✅ Предсказаний: {len(lines)} -> {out_path}'))
        else:
            self.stdout.write(output, ending='')
