"""Per-example score tables keyed by (modulation, SIR bin, index).

Text layout: ``# key=value`` metadata lines, a ``mod,sir_bin,index,score``
header, then one row per example with scores written as round-trippable
float reprs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

COLUMNS = ("mod", "sir_bin", "index", "score")


class ScoreTableError(ValueError):
    pass


@dataclass
class ScoreTable:
    scores: np.ndarray  # [n_mod, n_sir, n_per_cell] float64
    sir_db: tuple
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        self.sir_db = tuple(float(s) for s in self.sir_db)
        if self.scores.ndim != 3:
            raise ScoreTableError(f"scores must be [mod, sir_bin, index], got {self.scores.shape}")
        if self.scores.shape[1] != len(self.sir_db):
            raise ScoreTableError(
                f"{self.scores.shape[1]} SIR bins in scores but {len(self.sir_db)} SIR values"
            )

    @property
    def n_mod(self) -> int:
        return self.scores.shape[0]

    @property
    def n_rows(self) -> int:
        return self.scores.size

    def cell(self, mod: int, sir_bin: int) -> np.ndarray | None:
        if not (0 <= mod < self.scores.shape[0] and 0 <= sir_bin < self.scores.shape[1]):
            return None
        return self.scores[mod, sir_bin]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScoreTable):
            return NotImplemented
        return (self.sir_db == other.sir_db and self.metadata == other.metadata
                and np.array_equal(self.scores, other.scores))

    def to_text(self) -> str:
        lines = [f"# {k}={self.metadata[k]}" for k in sorted(self.metadata)]
        lines.append("# sir_db=" + ",".join(repr(s) for s in self.sir_db))
        lines.append(",".join(COLUMNS))
        n_mod, n_sir, n = self.scores.shape
        for m in range(n_mod):
            for b in range(n_sir):
                row = self.scores[m, b]
                lines.extend(f"{m},{b},{i},{float(row[i])!r}" for i in range(n))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, source: str = "<text>") -> "ScoreTable":
        meta = {}
        sir = None
        rows = []
        header_seen = False
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                if key == "sir_db":
                    sir = tuple(float(v) for v in value.split(","))
                else:
                    meta[key] = value
                continue
            if not header_seen:
                if tuple(line.strip().split(",")) != COLUMNS:
                    raise ScoreTableError(f"{source}:{lineno}: expected header {','.join(COLUMNS)}")
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ScoreTableError(f"{source}:{lineno}: expected 4 columns, got {len(parts)}")
            try:
                rows.append((int(parts[0]), int(parts[1]), int(parts[2]), float(parts[3])))
            except ValueError as exc:
                raise ScoreTableError(f"{source}:{lineno}: {exc}") from None
        if sir is None or not header_seen:
            raise ScoreTableError(f"{source}: missing sir_db metadata or column header")
        if not rows:
            raise ScoreTableError(f"{source}: no score rows")
        idx = np.array([r[:3] for r in rows])
        shape = tuple(int(v) + 1 for v in idx.max(axis=0))
        if shape[1] != len(sir):
            raise ScoreTableError(f"{source}: rows use {shape[1]} SIR bins, header lists {len(sir)}")
        scores = np.full(shape, np.nan)
        filled = np.zeros(shape, dtype=bool)
        for m, b, i, s in rows:
            if filled[m, b, i]:
                raise ScoreTableError(f"{source}: duplicate row for (mod={m}, sir_bin={b}, index={i})")
            scores[m, b, i] = s
            filled[m, b, i] = True
        if not filled.all():
            m, b, i = np.argwhere(~filled)[0]
            raise ScoreTableError(f"{source}: missing row for (mod={m}, sir_bin={b}, index={i})")
        return cls(scores, sir, meta)


def write_scores(table: ScoreTable, path) -> None:
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "w") as fh:
        fh.write(table.to_text())
    os.replace(tmp, path)


def read_scores(path) -> ScoreTable:
    with open(path) as fh:
        return ScoreTable.from_text(fh.read(), os.fspath(path))


def score_batch(model, dataset, metadata: dict | None = None, batch: int = 256) -> ScoreTable:
    """Score every example of a dataset into a table shaped like its grid."""
    from .detectors.api import score_examples

    spec = dataset.spec
    flat = score_examples(model, dataset.flat_iq(), batch)
    n_mod, n_sir, n_batches, batch_size = spec.dims
    meta = {"model": model.kind, "dataset": dataset.kind.label}
    meta.update(metadata or {})
    return ScoreTable(flat.reshape(n_mod, n_sir, n_batches * batch_size), spec.sir_db, meta)
