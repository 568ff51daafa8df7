"""CSV and figure output for benchmark rows."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

AXES = ("w", "d", "occlusion")
METRICS = ("intersections_computed", "states_live_max", "wall_time")


def write_csv(rows: Sequence[Dict[str, object]], path: Path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        if not rows:
            return
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)


def render_figures(rows: Sequence[Dict[str, object]], out: Path) -> List[Path]:
    """One PNG per (swept axis, metric), next to ``out`` and named after it.

    An axis counts as swept when it takes more than one value; the other axes
    are held at their first value. Nothing is drawn when no axis varies.
    """
    out = Path(out)
    written: List[Path] = []
    for axis in AXES:
        values = sorted({r[axis] for r in rows})
        if len(values) < 2:
            continue
        fixed = {a: rows[0][a] for a in AXES if a != axis}
        cells = [r for r in rows if all(r[a] == v for a, v in fixed.items())]
        engines = list(dict.fromkeys(r["engine"] for r in cells))
        for metric in METRICS:
            fig, ax = plt.subplots(figsize=(5, 3.5))
            for engine in engines:
                pts = sorted((r[axis], r[metric]) for r in cells if r["engine"] == engine)
                ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=str(engine).upper())
            ax.set_xlabel(axis)
            ax.set_ylabel(metric.replace("_", " "))
            ax.set_title(", ".join(f"{a}={v}" for a, v in fixed.items()), fontsize=9)
            ax.legend()
            fig.tight_layout()
            path = out.with_name(f"{out.stem}_{metric}_vs_{axis}.png")
            fig.savefig(path, dpi=120)
            plt.close(fig)
            written.append(path)
    return written
