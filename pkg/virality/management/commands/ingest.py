from pathlib import Path

from virality.corpus import CLASS_NAMES, corpus_statistics, filter_records, load_tweet_records, write_tweet_records
from virality.management.base import RunCommand
from virality.pipeline import write_json


class Command(RunCommand):
    help = 'Загружает JSONL с твитами: проверка схемы, дедупликация, фильтры, статистика'

    def add_arguments(self, parser):
        parser.add_argument('corpus', help='Исходный JSONL-файл')
        parser.add_argument('--out', required=True, help='Куда записать очищенный JSONL')
        super().add_arguments(parser)

    def run(self, *args, **options):
        config = self.load_config(options)
        out_path = Path(options['out'])

        records = load_tweet_records(options['corpus'])
        self.stdout.write(f'📥 Прочитано уникальных записей: {len(records)}')

        records = filter_records(
            records,
            topics=config.corpus.topics or None,
            english_only=config.corpus.english_only,
            original_only=config.corpus.original_only,
        )
        write_tweet_records(records, out_path)

        statistics = corpus_statistics(records)
        write_json(statistics, out_path.with_suffix('.stats.json'))

        self.stdout.write('\n📊 По классам:')
        for class_index, name in enumerate(CLASS_NAMES):
            self.stdout.write(f'  {class_index} ({name}): {statistics["per_class"][str(class_index)]}')
        self.stdout.write('\n🏷️ По темам:')
        for topic, count in statistics['per_topic'].items():
            self.stdout.write(f'  {topic}: {count}')

        self.stdout.write(self.style.SUCCESS(f'\n✅ Оставлено записей: {len(records)} -> {out_path}'))
        return None
