"""Controller gain sweeps: validity-masked grids, heat maps, region extraction.

A sweep simulates one buffer-tracking session per (gain pair, trace), scores
each with the QoE metric, and flags the cells that land within 10% of the
per-trace best. Heat is the per-cell flag count across traces. A usable
operating region is then grown greedily around the hottest cell.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .control import is_valid_gain_pair
from .engine import SimConfig, simulate_session
from .media import VideoManifest
from .metrics import QoeWeights, qoe_score
from .schemes import ConfigError, Pia, PiaParams


@dataclass(frozen=True)
class GainGrid:
    """Strictly increasing kp/ki axes; validity comes from the damping band."""

    kp_values: tuple[float, ...]
    ki_values: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "kp_values", tuple(float(v) for v in self.kp_values))
        object.__setattr__(self, "ki_values", tuple(float(v) for v in self.ki_values))
        for name, axis in (("kp", self.kp_values), ("ki", self.ki_values)):
            if not axis:
                raise ConfigError(f"{name} axis is empty")
            if any(v <= 0.0 for v in axis):
                raise ConfigError(f"{name} values must be positive")
            if any(b <= a for a, b in zip(axis, axis[1:])):
                raise ConfigError(f"{name} values must be strictly increasing")
        if not any(flag for row in self.validity() for flag in row):
            raise ConfigError("grid has no valid gain pair")

    def validity(self) -> tuple[tuple[bool, ...], ...]:
        return tuple(
            tuple(is_valid_gain_pair(kp, ki) for ki in self.ki_values)
            for kp in self.kp_values
        )


@dataclass(frozen=True)
class HeatMap:
    """Per-cell flag counts; invalid cells are masked, never silently zeroed."""

    kp_values: tuple[float, ...]
    ki_values: tuple[float, ...]
    valid: tuple[tuple[bool, ...], ...]
    heat: tuple[tuple[int, ...], ...]
    trace_count: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "valid", tuple(tuple(bool(v) for v in row) for row in self.valid))
        object.__setattr__(self, "heat", tuple(tuple(int(h) for h in row) for row in self.heat))
        if self.trace_count < 0:
            raise ConfigError("trace count must be >= 0")
        for name, table in (("valid", self.valid), ("heat", self.heat)):
            if len(table) != len(self.kp_values):
                raise ConfigError(f"{name} must have one row per kp value")
            if any(len(row) != len(self.ki_values) for row in table):
                raise ConfigError(f"{name} rows must match the ki axis")
        for row in self.heat:
            for h in row:
                if not 0 <= h <= self.trace_count:
                    raise ConfigError("heat must lie in [0, trace_count]")

    def to_csv(self) -> str:
        lines = ["kp,ki,valid,heat"]
        for i, kp in enumerate(self.kp_values):
            for j, ki in enumerate(self.ki_values):
                lines.append(f"{kp!r},{ki!r},{int(self.valid[i][j])},{self.heat[i][j]}")
        return "\n".join(lines) + "\n"


def _trace_flags(task) -> tuple[int, ...]:
    """Flags for one trace, aligned to the grid's valid cells in scan order."""
    grid, trace, manifest, template, weights, config = task
    mask = grid.validity()
    scores = []
    for i, kp in enumerate(grid.kp_values):
        for j, ki in enumerate(grid.ki_values):
            if not mask[i][j]:
                continue
            params = replace(template, pid=replace(template.pid, kp=kp, ki=ki))
            log = simulate_session(Pia(params), trace, manifest, config)
            scores.append(qoe_score(log, weights))
    best = max(scores)
    cutoff = best - 0.1 * abs(best)
    return tuple(1 if score >= cutoff else 0 for score in scores)


def sweep_gains(
    grid: GainGrid,
    traces,
    manifest: VideoManifest,
    template: PiaParams | None,
    weights: QoeWeights,
    config: SimConfig | None = None,
    *,
    jobs: int = 1,
) -> HeatMap:
    """Heat map over the grid: per trace, flag cells within 10% of that trace's best.

    The template fixes everything about the controller except the swept gains.
    """
    traces = list(traces)
    if template is None:
        template = PiaParams()
    if config is None:
        config = SimConfig()
    if not traces:
        raise ConfigError("sweep needs at least one trace")
    if jobs < 1:
        raise ConfigError("jobs must be >= 1")
    tasks = [(grid, trace, manifest, template, weights, config) for trace in traces]
    if jobs == 1:
        rows = [_trace_flags(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_trace_flags, tasks))
    mask = grid.validity()
    cells = [
        (i, j)
        for i in range(len(grid.kp_values))
        for j in range(len(grid.ki_values))
        if mask[i][j]
    ]
    heat = [[0] * len(grid.ki_values) for _ in grid.kp_values]
    for flags in rows:
        for (i, j), flag in zip(cells, flags):
            heat[i][j] += flag
    return HeatMap(
        kp_values=grid.kp_values,
        ki_values=grid.ki_values,
        valid=mask,
        heat=tuple(tuple(row) for row in heat),
        trace_count=len(traces),
    )


@dataclass(frozen=True)
class Region:
    """Inclusive index bounds plus the gain ranges they span."""

    rows: tuple[int, int]
    cols: tuple[int, int]
    kp_range: tuple[float, float]
    ki_range: tuple[float, float]
    mean_heat: float


def extract_region(heatmap: HeatMap, min_mean_heat: float = 0.9) -> Region | None:
    """Grow an all-valid rectangle around the hottest cell, keeping mean heat high.

    Expansion adds one full row or column per step, picking the candidate with
    the best resulting mean; returns None when no valid cell clears the
    threshold (min_mean_heat is a fraction of trace_count).
    """
    threshold = min_mean_heat * heatmap.trace_count
    n_rows = len(heatmap.kp_values)
    n_cols = len(heatmap.ki_values)
    seed = None
    for i in range(n_rows):
        for j in range(n_cols):
            if heatmap.valid[i][j] and (seed is None or heatmap.heat[i][j] > heatmap.heat[seed[0]][seed[1]]):
                seed = (i, j)
    if seed is None or heatmap.heat[seed[0]][seed[1]] < threshold:
        return None

    def mean_if_valid(r0: int, r1: int, c0: int, c1: int) -> float | None:
        cells = [
            (i, j) for i in range(r0, r1 + 1) for j in range(c0, c1 + 1)
        ]
        if not all(heatmap.valid[i][j] for i, j in cells):
            return None
        return sum(heatmap.heat[i][j] for i, j in cells) / len(cells)

    r0 = r1 = seed[0]
    c0 = c1 = seed[1]
    mean = float(heatmap.heat[r0][c0])
    while True:
        candidates = []
        for dr0, dr1, dc0, dc1 in ((-1, 0, 0, 0), (0, 1, 0, 0), (0, 0, -1, 0), (0, 0, 0, 1)):
            nr0, nr1, nc0, nc1 = r0 + dr0, r1 + dr1, c0 + dc0, c1 + dc1
            if nr0 < 0 or nr1 >= n_rows or nc0 < 0 or nc1 >= n_cols:
                continue
            candidate = mean_if_valid(nr0, nr1, nc0, nc1)
            if candidate is not None and candidate >= threshold:
                candidates.append((candidate, (nr0, nr1, nc0, nc1)))
        if not candidates:
            break
        mean, (r0, r1, c0, c1) = max(candidates, key=lambda item: item[0])
    return Region(
        rows=(r0, r1),
        cols=(c0, c1),
        kp_range=(heatmap.kp_values[r0], heatmap.kp_values[r1]),
        ki_range=(heatmap.ki_values[c0], heatmap.ki_values[c1]),
        mean_heat=mean,
    )
