"""compare: the STL vs MTL grid over every modality subset.

For each seed, every subset in the table column order is trained three
times (stl-sent, stl-emo, mtl) and scored on the dev set (the training set
when no dev set is given). Cells may run in parallel processes; each writes
into its own ``seed_<s>/<mode>_<subset>`` directory and results are gathered
in grid order, so outputs do not depend on the worker count.
"""

from multiprocessing import Pool
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from ..core.config import (
    TABLE_MODALITY_SUBSETS,
    RunConfig,
    TaskMode,
    modality_tag,
    validate_model_config,
)
from ..core.errors import ConfigError
from ..core.logger import get_logger, log_execution
from ..persistence.exports import (
    ComparisonTable,
    direction_summary,
    render_direction_summary,
    write_json,
)
from ..persistence.models import Dataset, Split
from ..processing.training import evaluate
from .common import add_config_flags, load_split, parse_int_list, prepare_out_dir, resolve_run_config
from .train import train_run

logger = get_logger(__name__)

GRID_MODES: Tuple[TaskMode, ...] = (TaskMode.STL_SENTIMENT, TaskMode.STL_EMOTION, TaskMode.MTL)

# Per-process dataset cache so worker processes parse each file once
_DATASETS: Dict[Tuple[str, Split], Dataset] = {}


def register(subparsers):
    parser = subparsers.add_parser('compare', help='Run the STL/MTL x modality comparison grid')
    parser.add_argument('--data', help='Training dataset (JSONL)')
    parser.add_argument('--dev', help='Dev dataset used to score every cell')
    add_config_flags(parser, grid=True)
    parser.add_argument('--seeds', help='Comma-separated seeds (default: the run seed)')
    parser.add_argument('--workers', type=int, default=1, help='Parallel worker processes')
    parser.set_defaults(handler=run)


def _dataset(path: Optional[str], split: Split) -> Optional[Dataset]:
    if path is None:
        return None
    key = (path, split)
    if key not in _DATASETS:
        _DATASETS[key] = load_split(path, split)
    return _DATASETS[key]


def cell_dir_name(mode: TaskMode, modalities) -> str:
    return f"{mode.value}_{modality_tag(modalities).replace('+', '').lower()}"


def run_cell(job: Dict[str, Any]) -> Dict[str, Any]:
    """Train and score one grid cell; ``job`` is plain data so it pickles."""
    base = RunConfig.model_validate(job['run_config'])
    model = validate_model_config({
        **base.model.model_dump(),
        'mode': job['mode'],
        'modalities': job['modalities'],
    })
    training = base.training.model_copy(update={'seed': job['seed']})
    run_config = base.model_copy(update={'model': model, 'training': training})

    train_set = _dataset(base.data.train, Split.TRAIN)
    dev_set = _dataset(base.data.dev, Split.DEV)
    out_dir = prepare_out_dir(job['out_dir'])
    params, model_config = train_run(run_config, train_set, dev_set, Path(out_dir))
    scored = dev_set if dev_set is not None else train_set
    report = evaluate(params, model_config, scored, run_config.thresholds)
    return {
        'mode': job['mode'],
        'column': modality_tag(run_config.model.modalities),
        'seed': job['seed'],
        'report': report.to_dict(),
    }


def _fill_table(table: ComparisonTable, result: Dict[str, Any]):
    report = result['report']
    mode = TaskMode(result['mode'])
    regime = 'MTL' if mode is TaskMode.MTL else 'STL'
    if report['sentiment'] is not None:
        table.set_cell('sentiment', regime, result['column'],
                       report['sentiment']['f1'], report['sentiment']['accuracy'])
    if report['emotion'] is not None:
        table.set_cell('emotion', regime, result['column'],
                       report['emotion']['average_f1'], report['emotion']['average_weighted_accuracy'])


def build_jobs(run_config: RunConfig, seeds: List[int], out_dir: Path) -> List[Dict[str, Any]]:
    jobs = []
    for seed in seeds:
        for modalities in TABLE_MODALITY_SUBSETS:
            for mode in GRID_MODES:
                jobs.append({
                    'run_config': run_config.model_dump(mode='json'),
                    'mode': mode.value,
                    'modalities': [m.value for m in modalities],
                    'seed': seed,
                    'out_dir': str(out_dir / f"seed_{seed}" / cell_dir_name(mode, modalities)),
                })
    return jobs


def run_grid(
    run_config: RunConfig,
    seeds: List[int],
    out_dir: Path,
    workers: int = 1
) -> Tuple[List[ComparisonTable], Dict[str, Any]]:
    """
    Run every cell for every seed and assemble one table per seed.

    Args:
        run_config: Base configuration; mode, modalities and seed vary per cell
        seeds: Seeds to run
        out_dir: Root of the per-cell output directories
        workers: Worker processes (1 runs in-process)

    Returns:
        Tuple of (tables in seed order, direction summary)
    """
    jobs = build_jobs(run_config, seeds, out_dir)
    logger.info('Comparison grid started', details={'cells': len(jobs), 'workers': workers})
    if workers > 1:
        with Pool(processes=workers) as pool:
            results = pool.map(run_cell, jobs)
    else:
        results = [run_cell(job) for job in jobs]

    tables = {seed: ComparisonTable(seed=seed) for seed in seeds}
    for result in results:
        _fill_table(tables[result['seed']], result)
    ordered = [tables[seed] for seed in seeds]
    summary = direction_summary(ordered)
    logger.info(
        'Comparison grid finished: ' + ('MTL >= STL' if summary['mtl_ge_stl'] else 'MTL < STL'),
        details={key: summary[key] for key in ('stl_mean', 'mtl_mean', 'mtl_ge_stl', 'complete')}
    )
    return ordered, summary


@log_execution
def run(args) -> int:
    run_config = resolve_run_config(args)
    if not run_config.data.train:
        raise ConfigError("a training dataset is required (--data or data.train in the config)")
    if args.workers < 1:
        raise ConfigError(f"--workers must be >= 1, got {args.workers}")
    seeds = parse_int_list(args.seeds, '--seeds') if args.seeds else [run_config.training.seed]
    if not seeds:
        raise ConfigError("--seeds must name at least one seed")

    # Fail on unreadable inputs before creating any output
    _dataset(run_config.data.train, Split.TRAIN)
    _dataset(run_config.data.dev, Split.DEV)

    out_dir = prepare_out_dir(run_config.output_dir)
    logger.set_context(command='compare')
    tables, summary = run_grid(run_config, seeds, out_dir, workers=args.workers)

    for table in tables:
        seed_dir = out_dir / f"seed_{table.seed}"
        write_json(table.to_dict(), seed_dir / 'table.json')
        (seed_dir / 'table.txt').write_text(table.to_text(), encoding='utf-8')
        print(table.to_text())
    write_json(summary, out_dir / 'summary.json')
    (out_dir / 'summary.txt').write_text(render_direction_summary(summary), encoding='utf-8')
    print(render_direction_summary(summary), end='')
    return 0
