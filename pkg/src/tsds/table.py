"""Time-aligned column carrier flowing through the selection/filter pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class ResultTable:
    """Times plus per-variable (n, k) value arrays, all sharing one row count.

    ``fill_values`` carries each variable's declared fill sentinel so filters
    can recognize missing data; ``count_columns`` appears after a block
    aggregation and holds the per-window contributor counts.
    """

    times: np.ndarray
    columns: dict[str, np.ndarray]
    fill_values: dict[str, float] = field(default_factory=dict)
    count_columns: dict[str, np.ndarray] | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64).reshape(-1)
        n = len(self.times)
        normalized = {}
        for name, col in self.columns.items():
            arr = np.asarray(col, dtype=np.float64)
            if arr.ndim == 1:
                arr = arr.reshape(-1, 1)
            if arr.shape[0] != n:
                raise ValueError(f"column {name!r} has {arr.shape[0]} rows, times has {n}")
            normalized[name] = arr
        self.columns = normalized
        if self.count_columns is not None:
            for name, col in self.count_columns.items():
                if col.shape[0] != n:
                    raise ValueError(f"count column {name!r} row count mismatch")

    @property
    def n_rows(self) -> int:
        return len(self.times)

    def missing_mask(self, name: str) -> np.ndarray:
        """(n, k) boolean mask: NaN or equal to the variable's fill value."""
        col = self.columns[name]
        mask = np.isnan(col)
        fill = self.fill_values.get(name, np.nan)
        if not np.isnan(fill):
            mask = mask | (col == fill)
        return mask

    def take(self, index) -> "ResultTable":
        """Row subset (boolean mask or index array), preserving all columns."""
        counts = None
        if self.count_columns is not None:
            counts = {name: col[index] for name, col in self.count_columns.items()}
        return ResultTable(
            self.times[index],
            {name: col[index] for name, col in self.columns.items()},
            dict(self.fill_values),
            counts,
        )

    def project(self, names: list[str]) -> "ResultTable":
        """Keep only the named columns, in the given order."""
        cols = {name: self.columns[name] for name in names}
        counts = None
        if self.count_columns is not None:
            counts = {name: self.count_columns[name]
                      for name in names if name in self.count_columns}
        fills = {name: self.fill_values[name] for name in names if name in self.fill_values}
        return ResultTable(self.times, cols, fills, counts)
