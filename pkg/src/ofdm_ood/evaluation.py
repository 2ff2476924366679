"""ROC curves, AUROC, and per-(modulation, SIR bin) AUROC grids.

OOD examples are the positive class. At threshold tau an example is flagged
when its score is >= tau; the standard TPR = TP/(TP+FN) and
FPR = FP/(FP+TN) are used.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field

import numpy as np

from .signal import ModScheme


class EvaluationError(ValueError):
    pass


@dataclass
class RocCurve:
    thresholds: np.ndarray  # descending; +inf for the (0, 0) endpoint
    tpr: np.ndarray
    fpr: np.ndarray
    n_id: int
    n_ood: int

    def points(self) -> list[tuple[float, float, float]]:
        return list(zip(self.thresholds.tolist(), self.tpr.tolist(), self.fpr.tolist()))


def roc(id_scores, ood_scores) -> RocCurve:
    neg = np.asarray(id_scores, dtype=np.float64).reshape(-1)
    pos = np.asarray(ood_scores, dtype=np.float64).reshape(-1)
    if neg.size == 0 or pos.size == 0:
        raise EvaluationError("ROC needs non-empty ID and OOD score lists")
    if not (np.all(np.isfinite(neg)) and np.all(np.isfinite(pos))):
        raise EvaluationError("scores must be finite")
    thresholds = np.unique(np.concatenate([neg, pos]))[::-1]
    # count of scores >= tau for each tau, via sorted search
    neg_sorted = np.sort(neg)
    pos_sorted = np.sort(pos)
    fp = neg.size - np.searchsorted(neg_sorted, thresholds, side="left")
    tp = pos.size - np.searchsorted(pos_sorted, thresholds, side="left")
    return RocCurve(
        thresholds=np.concatenate([[np.inf], thresholds]),
        tpr=np.concatenate([[0.0], tp / pos.size]),
        fpr=np.concatenate([[0.0], fp / neg.size]),
        n_id=neg.size,
        n_ood=pos.size,
    )


def auroc(curve: RocCurve) -> float:
    """Trapezoidal area under the curve.

    Each threshold step moves TPR and FPR together when scores tie, so the
    trapezoid assigns ties half credit, matching the pairwise statistic.
    """
    return float(np.trapezoid(curve.tpr, curve.fpr))


def auroc_scores(id_scores, ood_scores) -> float:
    return auroc(roc(id_scores, ood_scores))


@dataclass
class AurocGrid:
    values: np.ndarray  # [n_mod, n_sir]
    sir_db: tuple
    metadata: dict = field(default_factory=dict)
    curves: dict | None = None  # (mod, sir_bin) -> RocCurve

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.sir_db = tuple(float(s) for s in self.sir_db)
        if self.values.ndim != 2 or self.values.size == 0:
            raise EvaluationError(f"grid must be a non-empty matrix, got shape {self.values.shape}")
        if self.values.shape[1] != len(self.sir_db):
            raise EvaluationError("grid columns must match the SIR axis")
        if np.any((self.values < 0) | (self.values > 1)):
            raise EvaluationError("AUROC values must lie in [0, 1]")

    @property
    def n_cells(self) -> int:
        return self.values.size

    def weakest_bins_mean(self, n_bins: int = 5) -> float:
        """Mean AUROC over the ``n_bins`` highest-SIR columns."""
        order = np.argsort(self.sir_db)[-n_bins:]
        return float(self.values[:, order].mean())


def evaluate_experiment(din_scores, dout_scores, metadata: dict | None = None,
                        keep_curves: bool = False) -> AurocGrid:
    """One ROC/AUROC per (modulation, SIR bin) from two score tables."""
    from .scores import ScoreTable  # local: scores imports evaluation-free modules only

    if not isinstance(din_scores, ScoreTable) or not isinstance(dout_scores, ScoreTable):
        raise TypeError("evaluate_experiment expects ScoreTable inputs")
    if tuple(din_scores.sir_db) != tuple(dout_scores.sir_db):
        raise EvaluationError(
            f"SIR grids differ: {list(din_scores.sir_db)} vs {list(dout_scores.sir_db)}"
        )
    n_mod = max(din_scores.n_mod, dout_scores.n_mod)
    n_sir = len(din_scores.sir_db)
    values = np.empty((n_mod, n_sir))
    curves = {} if keep_curves else None
    for m in range(n_mod):
        for b in range(n_sir):
            neg = din_scores.cell(m, b)
            pos = dout_scores.cell(m, b)
            if neg is None or pos is None or neg.size == 0 or pos.size == 0:
                which = "ID" if neg is None or neg.size == 0 else "OOD"
                raise EvaluationError(f"missing {which} scores for cell (mod={m}, sir_bin={b})")
            curve = roc(neg, pos)
            values[m, b] = auroc(curve)
            if curves is not None:
                curves[(m, b)] = curve
    meta = dict(metadata or {})
    for key in ("model", "oe", "seed"):
        if key not in meta and key in din_scores.metadata:
            meta[key] = din_scores.metadata[key]
    meta.setdefault("dataset", dout_scores.metadata.get("dataset", "?"))
    return AurocGrid(values, din_scores.sir_db, meta, curves)


def _mod_name(m: int) -> str:
    return ModScheme(m).name if m < len(ModScheme) else f"mod{m}"


def format_grid_csv(grid: AurocGrid) -> str:
    buf = io.StringIO()
    for key in sorted(grid.metadata):
        buf.write(f"# {key}={grid.metadata[key]}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["modulation"] + [f"{s:g}" for s in grid.sir_db])
    for m, row in enumerate(grid.values):
        w.writerow([_mod_name(m)] + [f"{v:.9f}" for v in row])
    return buf.getvalue()


def parse_grid_csv(text: str) -> AurocGrid:
    meta = {}
    rows = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
        elif line.strip():
            rows.append(next(csv.reader([line])))
    if len(rows) < 2:
        raise EvaluationError("grid CSV has no data rows")
    sir = [float(s) for s in rows[0][1:]]
    values = [[float(v) for v in r[1:]] for r in rows[1:]]
    return AurocGrid(np.array(values), tuple(sir), meta)


def report(grid: AurocGrid, out_dir, roc_points: bool = True) -> list[str]:
    """Write ``auroc_grid.csv`` and, if curves are attached, one ROC point file
    per cell. Returns the written paths."""
    if grid.values.size == 0:
        raise EvaluationError("refusing to report an empty grid")
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    grid_path = os.path.join(out_dir, "auroc_grid.csv")
    with open(grid_path, "w") as fh:
        fh.write(format_grid_csv(grid))
    paths.append(grid_path)
    if roc_points and grid.curves:
        for (m, b), curve in sorted(grid.curves.items()):
            p = os.path.join(out_dir, f"roc_{_mod_name(m)}_sir{b:02d}.csv")
            with open(p, "w") as fh:
                fh.write(f"# modulation={_mod_name(m)}\n# sir_db={grid.sir_db[b]:g}\n")
                fh.write(f"# n_id={curve.n_id}\n# n_ood={curve.n_ood}\n")
                fh.write("threshold,tpr,fpr\n")
                for t, tp, f in curve.points():
                    fh.write(f"{t!r},{tp!r},{f!r}\n")
            paths.append(p)
    return paths
