"""Report, attention and comparison-table writers.

Attention CSVs hold one row per utterance: the u scores of N1 followed by
the u scores of N2 (header ``N1_1..N1_u,N2_1..N2_u``), values printed with
``%.17g``. SVG heatmaps are rendered with matplotlib; the SVG date metadata
is dropped and the hash salt fixed so identical inputs give identical files.
"""

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from ..core.config import TABLE_MODALITY_SUBSETS, modality_tag
from ..core.errors import DimensionError
from ..core.logger import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]

SVG_HASH_SALT = "intermodal-mtl"
TABLE_COLUMNS: Tuple[str, ...] = tuple(modality_tag(subset) for subset in TABLE_MODALITY_SUBSETS)
TABLE_TASKS = ('sentiment', 'emotion')
TABLE_REGIMES = ('STL', 'MTL')


def attention_csv_text(n1: np.ndarray, n2: np.ndarray) -> str:
    """CSV text of ``[N1 | N2]`` with its column header."""
    if n1.shape != n2.shape or n1.ndim != 2 or n1.shape[0] != n1.shape[1]:
        raise DimensionError(f"N1 {n1.shape} and N2 {n2.shape} must both be u x u")
    u = n1.shape[0]
    header = [f"N1_{j}" for j in range(1, u + 1)] + [f"N2_{j}" for j in range(1, u + 1)]
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in np.hstack([n1, n2]):
        writer.writerow([f"{value:.17g}" for value in row])
    return buffer.getvalue()


def read_attention_csv(path: PathLike) -> Tuple[List[str], np.ndarray]:
    """Header and u x 2u value matrix of an exported attention CSV."""
    with Path(path).open('r', encoding='utf-8', newline='') as handle:
        rows = list(csv.reader(handle))
    return rows[0], np.array([[float(v) for v in row] for row in rows[1:]], dtype=np.float64)


def write_attention_csv(n1: np.ndarray, n2: np.ndarray, path: PathLike) -> Path:
    file_path = Path(path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    file_path.write_text(attention_csv_text(n1, n2), encoding='utf-8')
    return file_path


def write_attention_svg(n1: np.ndarray, n2: np.ndarray, title: str, path: PathLike) -> Path:
    """Side-by-side heatmaps of N1 and N2."""
    import matplotlib
    matplotlib.use('Agg')
    import matplotlib.pyplot as plt

    file_path = Path(path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    u = n1.shape[0]
    ticks = np.arange(u)
    labels = [f"u{j}" for j in range(1, u + 1)]

    with matplotlib.rc_context({'svg.hashsalt': SVG_HASH_SALT, 'svg.fonttype': 'none'}):
        fig, axes = plt.subplots(1, 2, figsize=(8, 4))
        for ax, matrix, name in zip(axes, (n1, n2), ('N1', 'N2')):
            image = ax.imshow(matrix, cmap='viridis', vmin=0.0, vmax=1.0)
            ax.set_title(f"{title} {name}")
            ax.set_xticks(ticks)
            ax.set_xticklabels(labels)
            ax.set_yticks(ticks)
            ax.set_yticklabels(labels)
        fig.colorbar(image, ax=list(axes), shrink=0.8)
        fig.savefig(file_path, format='svg', metadata={'Date': None})
        plt.close(fig)
    return file_path


def write_report(report: Any, out_dir: PathLike, stem: str = "report") -> Tuple[Path, Path]:
    """Write ``<stem>.json`` and ``<stem>.txt`` for a MetricsReport-like object."""
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    json_path = directory / f"{stem}.json"
    text_path = directory / f"{stem}.txt"
    json_path.write_text(report.to_json(), encoding='utf-8')
    text_path.write_text(report.to_text(), encoding='utf-8')
    logger.info('Report written', path=str(json_path))
    return json_path, text_path


def write_json(data: Any, path: PathLike) -> Path:
    file_path = Path(path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    file_path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding='utf-8')
    return file_path


def _cell_key(task: str, regime: str) -> str:
    return f"{task}.{regime}"


@dataclass
class ComparisonTable:
    """
    STL vs MTL scores laid out by task, regime and modality subset.

    Each cell holds two numbers: F1 and, for sentiment, accuracy or, for
    emotion, average weighted accuracy (None when undefined).
    """
    seed: Optional[int] = None
    cells: Dict[str, Dict[str, Dict[str, Optional[float]]]] = field(default_factory=dict)

    def set_cell(self, task: str, regime: str, column: str, f1: float, second: Optional[float]):
        if task not in TABLE_TASKS or regime not in TABLE_REGIMES or column not in TABLE_COLUMNS:
            raise ValueError(f"unknown table cell ({task}, {regime}, {column})")
        row = self.cells.setdefault(_cell_key(task, regime), {})
        row[column] = {'f1': f1, 'second': second}

    def get_cell(self, task: str, regime: str, column: str) -> Optional[Dict[str, Optional[float]]]:
        return self.cells.get(_cell_key(task, regime), {}).get(column)

    def filled_cells(self, regime: str) -> int:
        """Filled (task, column, metric) slots of a regime; 28 when complete."""
        count = 0
        for task in TABLE_TASKS:
            for column in TABLE_COLUMNS:
                cell = self.get_cell(task, regime, column)
                if cell is not None:
                    count += 2
        return count

    def is_complete(self) -> bool:
        expected = 2 * len(TABLE_TASKS) * len(TABLE_COLUMNS)
        return all(self.filled_cells(regime) == expected for regime in TABLE_REGIMES)

    def regime_mean(self, regime: str) -> float:
        """Mean of every defined score of a regime."""
        values = []
        for task in TABLE_TASKS:
            for column in TABLE_COLUMNS:
                cell = self.get_cell(task, regime, column)
                if cell is None:
                    continue
                values.extend(v for v in cell.values() if v is not None)
        return float(np.mean(values)) if values else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'seed': self.seed,
            'columns': list(TABLE_COLUMNS),
            'cells': self.cells,
            'mean': {regime: self.regime_mean(regime) for regime in TABLE_REGIMES},
        }

    def to_text(self) -> str:
        """Fixed-width rendering: F1 block, then Acc / W-Acc block."""
        width = 7

        def fmt(value: Optional[float]) -> str:
            return f"{100.0 * value:.1f}".rjust(width) if value is not None else "-".rjust(width)

        header = (
            "Task Regime |"
            + "".join(c.rjust(width) for c in TABLE_COLUMNS)
            + " |"
            + "".join(c.rjust(width) for c in TABLE_COLUMNS)
        )
        lines = []
        if self.seed is not None:
            lines.append(f"seed {self.seed}")
        lines.append(" " * 12 + "|" + "F1".center(width * len(TABLE_COLUMNS))
                     + " |" + "Acc (Sent) / W-Acc (Emo)".center(width * len(TABLE_COLUMNS)))
        lines.append(header)
        lines.append("-" * len(header))
        for task in TABLE_TASKS:
            label = 'Sent' if task == 'sentiment' else 'Emo'
            for regime in TABLE_REGIMES:
                cells = [self.get_cell(task, regime, c) or {} for c in TABLE_COLUMNS]
                lines.append(
                    f"{label:<4} {regime:<6} |"
                    + "".join(fmt(cell.get('f1')) for cell in cells)
                    + " |"
                    + "".join(fmt(cell.get('second')) for cell in cells)
                )
        return "\n".join(lines) + "\n"


def direction_summary(tables: List[ComparisonTable]) -> Dict[str, Any]:
    """Per-seed MTL-vs-STL mean scores; the direction is informative only."""
    per_seed = []
    for table in tables:
        stl = table.regime_mean('STL')
        mtl = table.regime_mean('MTL')
        per_seed.append({
            'seed': table.seed,
            'stl_mean': stl,
            'mtl_mean': mtl,
            'mtl_ge_stl': mtl >= stl,
            'complete': table.is_complete(),
        })
    stl_all = float(np.mean([row['stl_mean'] for row in per_seed])) if per_seed else 0.0
    mtl_all = float(np.mean([row['mtl_mean'] for row in per_seed])) if per_seed else 0.0
    return {
        'per_seed': per_seed,
        'stl_mean': stl_all,
        'mtl_mean': mtl_all,
        'mtl_ge_stl': mtl_all >= stl_all,
        'complete': all(row['complete'] for row in per_seed),
    }


def render_direction_summary(summary: Dict[str, Any]) -> str:
    lines = ["MTL vs STL (mean of all table scores)"]
    for row in summary['per_seed']:
        verdict = 'MTL >= STL' if row['mtl_ge_stl'] else 'MTL < STL'
        lines.append(
            f"  seed {row['seed']}: STL {100 * row['stl_mean']:.2f}  "
            f"MTL {100 * row['mtl_mean']:.2f}  {verdict}"
        )
    verdict = 'MTL >= STL' if summary['mtl_ge_stl'] else 'MTL < STL'
    lines.append(
        f"  overall: STL {100 * summary['stl_mean']:.2f}  "
        f"MTL {100 * summary['mtl_mean']:.2f}  {verdict}"
    )
    return "\n".join(lines) + "\n"
