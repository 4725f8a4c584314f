# Generated by Django 6.0.2 on 2026-10-19 10:00

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('kind', models.CharField(choices=[('train', 'Обучение ViralBERT'), ('evaluate', 'Оценка чекпойнта'), ('baseline', 'Бейзлайн'), ('ablation', 'Абляция признака')], max_length=20, verbose_name='Вид запуска')),
                ('name', models.CharField(max_length=50, verbose_name='Модель')),
                ('seed', models.IntegerField(verbose_name='Сид')),
                ('config_hash', models.CharField(max_length=64, verbose_name='Хэш конфига')),
                ('ablated_feature', models.CharField(blank=True, max_length=20, verbose_name='Удалённый признак')),
                ('run_dir', models.CharField(blank=True, max_length=500, verbose_name='Каталог запуска')),
                ('macro_f1', models.FloatField(verbose_name='Macro-F1')),
                ('macro_precision', models.FloatField(verbose_name='Macro precision')),
                ('macro_recall', models.FloatField(verbose_name='Macro recall')),
                ('accuracy', models.FloatField(verbose_name='Accuracy')),
                ('report', models.JSONField(default=dict, verbose_name='Отчёт')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
            ],
            options={
                'verbose_name': 'Запуск эксперимента',
                'verbose_name_plural': 'Запуски экспериментов',
                'ordering': ['kind', 'name', 'seed'],
                'constraints': [models.UniqueConstraint(fields=('kind', 'name', 'seed', 'config_hash'), name='unique_experiment_run')],
            },
        ),
    ]
