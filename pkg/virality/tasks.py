import logging
from pathlib import Path

from celery import shared_task

from .baselines import fit_and_evaluate
from .config import RunConfig, write_run_config
from .evaluation import ablated_config, ablation_run, write_report
from .models import ExperimentRun
from .pipeline import ablation_report_path, load_prepared, report_path

logger = logging.getLogger(__name__)


def ablation_config_path(run_dir, feature) -> Path:
    return Path(run_dir) / 'ablation_configs' / f"{feature or 'none'}.json"


def store_ablation(config, feature, run_dir, seed):
    """Абляция одного признака: обучение с нуля, отчёт, снимок конфига и строка в реестре"""
    split = load_prepared(run_dir)
    report = ablation_run(config, feature, split, seed)
    write_report(report, ablation_report_path(run_dir, feature))
    write_run_config(ablated_config(config, feature).with_overrides(seed=seed), ablation_config_path(run_dir, feature))
    ExperimentRun.record('ablation', report, run_dir)
    logger.info("Абляция %s завершена: macro-F1 %.4f", feature, report.macro_f1)
    return report


def store_baseline(config, kind, run_dir, seed):
    split = load_prepared(run_dir)
    report = fit_and_evaluate(kind, split, seed, config)
    write_report(report, report_path(run_dir, report.metadata.model))
    ExperimentRun.record('baseline', report, run_dir)
    return report


@shared_task
def run_ablation_task(config_data, feature, run_dir, seed):
    config = RunConfig.from_dict(config_data)
    return store_ablation(config, feature, run_dir, seed).to_dict()


@shared_task
def fit_baseline_task(config_data, kind, run_dir, seed):
    """Один бейзлайн на подготовленном разбиении"""
    config = RunConfig.from_dict(config_data)
    report = store_baseline(config, kind, run_dir, seed)
    logger.info("Бейзлайн %s завершён: macro-F1 %.4f", kind, report.macro_f1)
    return report.to_dict()
