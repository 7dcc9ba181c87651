"""QoE scoring, per-session metric reports, and an offline-optimal reference solver.

The offline solver shares one idealized request model between the dynamic
program, the brute-force cross-check, and sequence re-scoring: per chunk the
session drains to the resume level if the buffer cap was hit, idles one RTT,
downloads over the zero-order-hold trace, and credits one chunk duration on
completion. Playback consumes buffer once the startup rule enables it, mid-leg
for latency rules, and any deficit is stalled time charged to the pending
chunk. Buffer and clock snap to 0.1 s bins after every chunk so prefixes that
reach the same state merge exactly.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass

from .engine import SessionLog, SimConfig, advance_download
from .media import BandwidthTrace, VideoManifest, track_avg_bitrate
from .schemes import ConfigError

LOW_QUALITY_VMAF = 60.0
_BINS_PER_S = 10.0


# -- QoE ----------------------------------------------------------------------


@dataclass(frozen=True)
class QoeWeights:
    """Penalty weights: mu per Mbps of switching, lam per second stalled."""

    mu: float
    lam: float

    def __post_init__(self) -> None:
        if self.mu < 0.0 or self.lam < 0.0:
            raise ConfigError("qoe weights must be >= 0")


def default_weights(manifest: VideoManifest, mu: float = 1.0) -> QoeWeights:
    """Stall weight pinned to the top ladder rate in Mbps, switch weight 1."""
    top = max(track_avg_bitrate(track) for track in manifest.tracks)
    return QoeWeights(mu=mu, lam=top / 1000.0)


def qoe_score(log: SessionLog, weights: QoeWeights) -> float:
    """Sum of chunk bitrates minus switching and stall penalties, in Mbps."""
    rates = [d.bitrate_kbps / 1000.0 for d in log.decisions]
    if not rates:
        raise ConfigError("session log has no decisions")
    change = sum(abs(b - a) for a, b in zip(rates, rates[1:]))
    stall = sum(d.stall_s for d in log.decisions)
    return sum(rates) - weights.mu * change - weights.lam * stall


# -- session report -----------------------------------------------------------

_CSV_COLUMNS = (
    ("avg_bitrate_kbps", "avg_bitrate_kbps"),
    ("avg_bitrate_change_kbps", "avg_bitrate_change_kbps_per_chunk"),
    ("total_stall_s", "total_stall_s"),
    ("qoe", "qoe_mbps"),
    ("avg_quality_dev", "avg_quality_dev_vmaf"),
    ("pct_low_quality", "pct_low_quality"),
    ("avg_quality_change", "avg_quality_change_vmaf_per_chunk"),
    ("data_usage_mb", "data_usage_mb"),
    ("startup_latency_s", "startup_latency_s"),
)


@dataclass(frozen=True)
class MetricsReport:
    """Session summary; quality fields are None when metadata is missing."""

    avg_bitrate_kbps: float
    avg_bitrate_change_kbps: float
    total_stall_s: float
    qoe: float
    avg_quality_dev: float | None
    pct_low_quality: float | None
    avg_quality_change: float | None
    data_usage_mb: float
    startup_latency_s: float
    qoe_unit: str = "Mbps"

    def to_csv(self) -> str:
        header = ",".join(name for _, name in _CSV_COLUMNS)
        cells = []
        for field_name, _ in _CSV_COLUMNS:
            value = getattr(self, field_name)
            cells.append("" if value is None else repr(float(value)))
        return header + "\n" + ",".join(cells) + "\n"

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


def session_metrics(
    log: SessionLog,
    manifest: VideoManifest,
    *,
    target_quality: float | None = None,
    weights: QoeWeights | None = None,
) -> MetricsReport:
    """Summarize one session log; weights default to `default_weights(manifest)`."""
    n = len(log.decisions)
    if n == 0:
        raise ConfigError("session log has no decisions")
    if weights is None:
        weights = default_weights(manifest)
    rates = [d.bitrate_kbps for d in log.decisions]
    change = sum(abs(b - a) for a, b in zip(rates, rates[1:]))
    vmafs = [d.vmaf for d in log.decisions]
    if all(v is not None for v in vmafs):
        pct_low = sum(1 for v in vmafs if v < LOW_QUALITY_VMAF) / n
        q_change = sum(abs(b - a) for a, b in zip(vmafs, vmafs[1:])) / (n - 1) if n > 1 else 0.0
        dev = None
        if target_quality is not None:
            dev = sum(abs(v - target_quality) for v in vmafs) / n
    else:
        pct_low = q_change = dev = None
    return MetricsReport(
        avg_bitrate_kbps=sum(rates) / n,
        avg_bitrate_change_kbps=change / (n - 1) if n > 1 else 0.0,
        total_stall_s=log.stall_total_s,
        qoe=qoe_score(log, weights),
        avg_quality_dev=dev,
        pct_low_quality=pct_low,
        avg_quality_change=q_change,
        data_usage_mb=log.bytes_downloaded / 1e6,
        startup_latency_s=log.startup_latency_s,
    )


# -- offline-optimal reference ------------------------------------------------


@dataclass(frozen=True)
class OfflineObjective:
    """Quality deviation plus switching cost plus gamma per second stalled."""

    target_quality: float
    gamma: float = 10000.0

    def __post_init__(self) -> None:
        if not 0.0 < self.target_quality <= 100.0:
            raise ConfigError("target quality must lie in (0, 100]")
        if self.gamma < 0.0:
            raise ConfigError("gamma must be >= 0")


def _bin(value: float) -> int:
    return int(round(value * _BINS_PER_S))


def _started(config: SimConfig, clock: float, completed: int) -> bool:
    rule = config.startup
    if rule.kind == "latency":
        return clock >= rule.value
    return completed >= int(rule.value)


def _playback_window(config: SimConfig, t0: float, span: float, completed: int) -> float:
    """Seconds of [t0, t0+span) during which the startup rule permits playback."""
    rule = config.startup
    if rule.kind == "latency":
        play_from = max(t0, rule.value)
    elif completed >= int(rule.value):
        play_from = t0
    else:
        play_from = t0 + span
    return max(0.0, t0 + span - play_from)


def _drain(x: float, play_s: float) -> tuple[float, float]:
    """Consume play_s of buffered content; deficit is stalled time."""
    return max(x - play_s, 0.0), max(play_s - x, 0.0)


def _transition(
    trace: BandwidthTrace,
    manifest: VideoManifest,
    config: SimConfig,
    chunk_index: int,
    level: int,
    x_key: int,
    t_key: int,
) -> tuple[int, int, float]:
    """One chunk request from a binned state; returns (x_key', t_key', stall_s)."""
    delta = manifest.chunk_duration_s
    cap = config.max_buffer_s
    margin = config.resume_margin_s if config.resume_margin_s is not None else delta
    x = x_key / _BINS_PER_S
    t = t_key / _BINS_PER_S
    stall = 0.0
    if x >= cap and _started(config, t, chunk_index):
        # Request gate: drain at play rate down to the resume level.
        resume = max(cap - margin, delta)
        t += x - resume
        x = resume
    if config.rtt_s > 0.0:
        x, s = _drain(x, _playback_window(config, t, config.rtt_s, chunk_index))
        stall += s
        t += config.rtt_s
    end = advance_download(trace, t, manifest.chunk(level, chunk_index).size_bytes)
    x, s = _drain(x, _playback_window(config, t, end - t, chunk_index))
    stall += s
    x = min(x + delta, cap)
    return _bin(x), _bin(end), stall


def _quality(manifest: VideoManifest, level: int, index: int) -> float:
    q = manifest.chunk(level, index).vmaf
    if q is None:
        raise ConfigError(
            f"chunk {index} level {level} has no quality value; "
            "the offline objective needs quality metadata"
        )
    return q


def _step_cost(
    manifest: VideoManifest,
    objective: OfflineObjective,
    chunk_index: int,
    level: int,
    prev_level: int | None,
    stall_s: float,
) -> float:
    q = _quality(manifest, level, chunk_index)
    cost = (objective.target_quality - q) ** 2
    if prev_level is not None:
        cost += (q - _quality(manifest, prev_level, chunk_index - 1)) ** 2
    return cost + objective.gamma * stall_s


def score_sequence(
    trace: BandwidthTrace,
    manifest: VideoManifest,
    objective: OfflineObjective,
    config: SimConfig,
    levels,
) -> float:
    """Objective value of a fixed level sequence under the shared request model."""
    levels = tuple(levels)
    if len(levels) != manifest.n_chunks:
        raise ConfigError("level sequence must cover every chunk")
    for level in levels:
        if level not in manifest.levels:
            raise ConfigError(f"level {level} not in manifest")
    total = 0.0
    prev: int | None = None
    x_key = t_key = 0
    for i, level in enumerate(levels):
        x_key, t_key, stall = _transition(trace, manifest, config, i, level, x_key, t_key)
        total += _step_cost(manifest, objective, i, level, prev, stall)
        prev = level
    return total


def offline_optimal(
    trace: BandwidthTrace,
    manifest: VideoManifest,
    objective: OfflineObjective,
    config: SimConfig,
) -> tuple[tuple[int, ...], float]:
    """Minimize the objective over all level sequences by dynamic programming.

    States are (last level, binned buffer, binned clock), so two prefixes
    reaching the same state merge; the kept cost is the exact running sum.
    """
    for level in manifest.levels:
        for i in range(manifest.n_chunks):
            _quality(manifest, level, i)
    frontier: dict[tuple[int | None, int, int], float] = {(None, 0, 0): 0.0}
    parents: list[dict] = []
    for i in range(manifest.n_chunks):
        nxt: dict[tuple[int | None, int, int], float] = {}
        back: dict = {}
        for (prev, x_key, t_key), cost in frontier.items():
            for level in manifest.levels:
                nx, nt, stall = _transition(trace, manifest, config, i, level, x_key, t_key)
                total = cost + _step_cost(manifest, objective, i, level, prev, stall)
                key = (level, nx, nt)
                if key not in nxt or total < nxt[key]:
                    nxt[key] = total
                    back[key] = (prev, x_key, t_key)
        frontier = nxt
        parents.append(back)
    best = min(frontier, key=lambda key: (frontier[key], key))
    value = frontier[best]
    sequence = []
    key = best
    for back in reversed(parents):
        sequence.append(key[0])
        key = back[key]
    sequence.reverse()
    return tuple(sequence), value


def brute_force_optimal(
    trace: BandwidthTrace,
    manifest: VideoManifest,
    objective: OfflineObjective,
    config: SimConfig,
    limit: int = 2_000_000,
) -> tuple[tuple[int, ...], float]:
    """Exhaustive cross-check; refuses instances over the evaluation budget."""
    n = manifest.n_chunks
    evals = n * manifest.n_levels**n
    if evals > limit:
        raise ConfigError(
            f"brute force would cost {evals} transition evaluations (limit {limit})"
        )
    best_seq: tuple[int, ...] | None = None
    best = 0.0
    for seq in itertools.product(manifest.levels, repeat=n):
        value = score_sequence(trace, manifest, objective, config, seq)
        if best_seq is None or value < best:
            best_seq, best = seq, value
    assert best_seq is not None
    return best_seq, best
