from virality.config import write_run_config
from virality.corpus import CLASS_NAMES
from virality.management.base import RunCommand
from virality.pipeline import CONFIG_FILE, prepare_corpus, write_prepared


class Command(RunCommand):
    help = 'Готовит корпус: метки классов, ребалансировка класса 0, разбиение 80:10:10'

    def add_arguments(self, parser):
        parser.add_argument('--corpus', help='JSONL-корпус (переопределяет paths.corpus)')
        super().add_arguments(parser)

    def run(self, *args, **options):
        config = self.load_config(options)
        if options.get('corpus'):
            config = config.with_overrides(corpus=options['corpus'])

        split = prepare_corpus(config)
        run_dir = config.run_dir
        statistics = write_prepared(split, run_dir)
        write_run_config(config, run_dir / CONFIG_FILE)

        train, validation, test = split.sizes()
        self.stdout.write(f'🔀 Разбиение (seed {config.seed}): train {train}, validation {validation}, test {test}')
        for class_index, name in enumerate(CLASS_NAMES):
            self.stdout.write(f'  {class_index} ({name}): {statistics["per_class"][str(class_index)]}')

        self.stdout.write(self.style.SUCCESS(f'✅ Подготовленные данные записаны в {run_dir}'))
