"""Parameter sweeps: seeded grid execution with an order-preserving merge."""

from __future__ import annotations

import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

RNG_ALGORITHM = "numpy PCG64; run seed = SeedSequence([base_seed, grid_index, replicate]).generate_state(1, uint64)[0]"


def derive_seed(base_seed: int, grid_index: int, replicate: int = 0) -> int:
    """64-bit seed for one run of a sweep.

    The three integers are hashed together by numpy's ``SeedSequence``, so
    adding grid points or replicates never changes the seeds of existing ones.
    """
    ss = np.random.SeedSequence([int(base_seed), int(grid_index), int(replicate)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass
class SweepResult:
    """Rectangular table of sweep rows plus a metadata block.

    ``rows`` are dicts sharing the keys in ``columns`` and stay in grid
    order whatever the execution concurrency.  A failed row keeps its
    parameter columns, has ``None`` in the value columns and its message in
    the ``error`` column (added only when some row failed).
    """

    columns: list[str]
    rows: list[dict[str, Any]]
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def failed(self) -> list[dict[str, Any]]:
        return [r for r in self.rows if r.get("error")]

    def column(self, name: str) -> list[Any]:
        return [r[name] for r in self.rows]

    def __len__(self):
        return len(self.rows)


def _call(worker: Callable[[dict], dict], point: dict) -> tuple[dict | None, str | None]:
    try:
        return worker(point), None
    except Exception as exc:  # reported per row, the sweep keeps going
        last = traceback.format_exception_only(type(exc), exc)[-1].strip()
        return None, last


def run_parallel(
    points: Sequence[dict[str, Any]],
    worker: Callable[[dict], dict],
    value_columns: Sequence[str],
    threads: int = 1,
    metadata: dict[str, Any] | None = None,
) -> SweepResult:
    """Evaluate ``worker`` on every grid point and merge rows in grid order.

    Parameters
    ----------
    points : sequence of dict
        Parameter columns of each row, including any derived seed.  The
        parameter column names are taken from the first point.
    worker : callable
        Pure function of a point returning the value columns.  Must be
        picklable when ``threads > 1`` (worker processes are used).
    value_columns : sequence of str
    threads : int
        Number of worker processes; 1 runs in-process.
    """
    points = [dict(p) for p in points]
    param_columns = list(points[0]) if points else []
    if threads > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_call, [worker] * len(points), points))
    else:
        outcomes = [_call(worker, p) for p in points]

    rows = []
    any_failed = False
    for point, (values, error) in zip(points, outcomes):
        row = dict(point)
        if error is None:
            missing = set(value_columns) - set(values)
            if missing:
                error = f"worker result missing columns {sorted(missing)}"
        if error is None:
            row.update({c: values[c] for c in value_columns})
        else:
            any_failed = True
            row.update({c: None for c in value_columns})
            row["error"] = error
        rows.append(row)

    columns = param_columns + list(value_columns)
    if any_failed:
        columns.append("error")
        for row in rows:
            row.setdefault("error", "")
    return SweepResult(columns=columns, rows=rows, metadata=dict(metadata or {}))
