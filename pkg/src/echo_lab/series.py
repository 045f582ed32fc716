"""Per-time-step fidelity records shared by the quantum and semiclassical engines."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .params import MapParams


@dataclass
class FidelitySeries:
    """Columns of fidelity-like quantities indexed by integer step t = 0..T.

    `columns` maps names (M, Ma, Msc, Mf, ...) to arrays; `errors` holds the
    standard error of the mean for the columns that have one.  `meta` records
    ensemble counts and seeds so a series is self-describing.
    """

    t: np.ndarray
    columns: dict[str, np.ndarray]
    errors: dict[str, np.ndarray] = field(default_factory=dict)
    params: MapParams | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t)
        n = len(self.t)
        for name, col in self.columns.items():
            if len(col) != n:
                raise ValueError(f"column {name!r} has length {len(col)}, expected {n}")
        for name, err in self.errors.items():
            if name not in self.columns or len(err) != n:
                raise ValueError(f"errors[{name!r}] does not match a column of length {n}")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    @property
    def column_names(self) -> list[str]:
        return list(self.columns)

    def merged(self, other: "FidelitySeries") -> "FidelitySeries":
        """Join columns of two series over the common leading time range."""
        n = min(len(self.t), len(other.t))
        if not np.array_equal(self.t[:n], other.t[:n]):
            raise ValueError("time axes differ")
        cols = {k: v[:n] for k, v in self.columns.items()}
        errs = {k: v[:n] for k, v in self.errors.items()}
        for k, v in other.columns.items():
            cols.setdefault(k, v[:n])
        for k, v in other.errors.items():
            errs.setdefault(k, v[:n])
        meta = dict(self.meta)
        meta.update({k: v for k, v in other.meta.items() if k not in meta})
        return FidelitySeries(t=self.t[:n].copy(), columns=cols, errors=errs,
                              params=self.params or other.params, meta=meta)
