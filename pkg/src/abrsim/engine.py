"""Discrete-event playback simulator: downloads, buffer dynamics, startup, stalls, caps."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from .media import BandwidthTrace, VideoManifest, track_avg_bitrate
from .schemes import AbrScheme, ConfigError, DecisionContext

CSV_HEADER = "chunk,level,bitrate_kbps,vmaf,dl_start_s,dl_end_s,buffer_s,est_kbps,u"
_TINY = 1e-12


class SimulationError(RuntimeError):
    """Session cannot proceed or violated an internal invariant."""


@dataclass(frozen=True)
class EstimatorSpec:
    """Harmonic-mean estimator over per-second samples or per-chunk throughputs."""

    kind: str = "harmonic_seconds"
    window: int = 20

    def __post_init__(self) -> None:
        if self.kind not in ("harmonic_seconds", "harmonic_chunks"):
            raise ConfigError(f"unknown estimator kind {self.kind!r}")
        if self.window < 1:
            raise ConfigError("estimator window must be >= 1")


@dataclass(frozen=True)
class StartupRule:
    """Playback enablement: fixed latency in seconds, or k chunks fully buffered."""

    kind: str = "latency"
    value: float = 5.0

    def __post_init__(self) -> None:
        if self.kind == "latency":
            if self.value < 0:
                raise ConfigError("startup delay must be >= 0")
        elif self.kind == "chunks_buffered":
            if self.value < 1 or self.value != int(self.value):
                raise ConfigError("chunks_buffered needs a whole count >= 1")
        else:
            raise ConfigError(f"unknown startup rule {self.kind!r}")


@dataclass(frozen=True)
class SimConfig:
    """Session-level knobs; resume_margin_s of None means one chunk duration."""

    startup: StartupRule = StartupRule()
    max_buffer_s: float = 120.0
    resume_margin_s: float | None = None
    rtt_s: float = 0.07
    estimator: EstimatorSpec = EstimatorSpec()
    first_chunk_level: int | None = None

    def __post_init__(self) -> None:
        if self.max_buffer_s <= 0:
            raise ConfigError("max buffer must be positive")
        if self.resume_margin_s is not None and not 0 < self.resume_margin_s < self.max_buffer_s:
            raise ConfigError("resume margin must lie in (0, max_buffer)")
        if self.rtt_s < 0:
            raise ConfigError("rtt must be >= 0")


@dataclass
class DownloadHistory:
    """Observed throughput: per-second trace samples plus per-chunk means."""

    second_samples: list[float] = field(default_factory=list)
    chunk_samples: list[float] = field(default_factory=list)
    estimates: list[float] = field(default_factory=list)
    _last_second: int = field(default=-1, repr=False)

    def add_second_sample(self, second: int, kbps: float) -> None:
        if second > self._last_second:
            self.second_samples.append(kbps)
            self._last_second = second

    def add_chunk_sample(self, kbps: float) -> None:
        self.chunk_samples.append(kbps)

    def add_estimate(self, kbps: float) -> None:
        self.estimates.append(kbps)


def estimate_bandwidth(history: DownloadHistory, spec: EstimatorSpec, clock: float = 0.0) -> float:
    """Harmonic mean of the most recent `window` samples; any non-positive sample -> 0."""
    if spec.kind == "harmonic_seconds":
        samples = history.second_samples
    else:
        samples = history.chunk_samples
    if not samples:
        raise SimulationError("no throughput history yet; caller must bootstrap")
    window = samples[-spec.window :]
    if min(window) <= 0.0:
        return 0.0
    return len(window) / sum(1.0 / v for v in window)


def advance_download(
    trace: BandwidthTrace, start_clock: float, size_bytes: int, *, loop: bool = True
) -> float:
    """Earliest clock at which size_bytes have arrived over the zero-order-hold trace."""
    if size_bytes <= 0:
        raise SimulationError("download size must be positive")
    remaining = size_bytes * 8.0 / 1000.0
    t = float(start_clock)
    dry = 0.0
    n = trace.duration_s
    while True:
        # A clock a hair under an integer counts as that second (float dust).
        sec = int(math.floor(t + _TINY))
        if not loop and sec >= n:
            raise SimulationError("trace exhausted with looping disabled")
        c = trace.samples[sec % n]
        span = float(sec + 1) - t
        if c > 0.0:
            dry = 0.0
            if c * span >= remaining:
                return t + remaining / c
            remaining -= c * span
        else:
            dry += span
            if dry > n:
                raise SimulationError("zero bandwidth over a full trace period")
        t = float(sec + 1)


@dataclass
class SessionState:
    """Mutable per-session state; integral mirrors the scheme's PID state when present."""

    clock: float = 0.0
    buffer: float = 0.0
    playing: bool = False
    next_chunk: int = 0
    last_level: int | None = None
    integral: float = 0.0
    stall_accum: float = 0.0
    bytes_downloaded: int = 0


@dataclass(frozen=True)
class Decision:
    chunk: int
    level: int
    bitrate_kbps: float
    vmaf: float | None
    dl_start_s: float
    dl_end_s: float
    buffer_s: float
    est_kbps: float
    u: float | None
    stall_s: float


@dataclass(frozen=True)
class SessionLog:
    """Complete deterministic record of one simulated session."""

    scheme_name: str
    trace_name: str
    manifest_name: str
    chunk_duration_s: float
    decisions: tuple[Decision, ...]
    stalls: tuple[tuple[float, float], ...]
    startup_latency_s: float
    end_clock_s: float
    play_time_s: float
    final_buffer_s: float
    stall_total_s: float
    bytes_downloaded: int

    def to_csv(self) -> str:
        rows = [CSV_HEADER]
        for d in self.decisions:
            rows.append(
                ",".join(
                    (
                        str(d.chunk),
                        str(d.level),
                        repr(float(d.bitrate_kbps)),
                        "" if d.vmaf is None else repr(float(d.vmaf)),
                        repr(float(d.dl_start_s)),
                        repr(float(d.dl_end_s)),
                        repr(float(d.buffer_s)),
                        repr(float(d.est_kbps)),
                        "" if d.u is None else repr(float(d.u)),
                    )
                )
            )
        return "\n".join(rows) + "\n"

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


class _Session:
    """Event walker for one session; all floats advance via explicit events."""

    def __init__(self, scheme, trace, manifest, config, allowed):
        self.scheme = scheme
        self.trace = trace
        self.manifest = manifest
        self.config = config
        self.allowed = allowed
        self.delta = manifest.chunk_duration_s
        self.cap = config.max_buffer_s
        margin = config.resume_margin_s if config.resume_margin_s is not None else self.delta
        # Drain stops at one chunk, so the resume level can never sit below it.
        self.resume_level = max(self.cap - margin, self.delta)
        self.st = SessionState()
        self.history = DownloadHistory()
        self.play_accum = 0.0
        self.chunk_stall = 0.0
        self.stalls: list[tuple[float, float]] = []
        self._stall_start: float | None = None
        self._stall_acc = 0.0
        self.startup_latency: float | None = None
        self.decisions: list[Decision] = []
        self.chunk_class = None
        if config.startup.kind == "latency" and config.startup.value == 0.0:
            self._enable_playback(0.0)

    # -- playback/stall regime ------------------------------------------------

    def _enable_playback(self, clock: float) -> None:
        if not self.st.playing:
            self.st.playing = True
            self.startup_latency = clock

    def _startup_pending_at(self) -> float | None:
        if self.st.playing or self.config.startup.kind != "latency":
            return None
        return self.config.startup.value

    def _regime(self, fill: float) -> tuple[float, float, float]:
        """(buffer slope, play rate, stall rate) for the current state and fill rate."""
        x = self.st.buffer
        if not self.st.playing:
            return fill, 0.0, 0.0
        if x > self.delta + _TINY:
            return fill - 1.0, 1.0, 0.0
        if x >= self.delta - _TINY:
            # At the one-chunk boundary (within float dust of it).
            if fill >= 1.0:
                return fill - 1.0, 1.0, 0.0
            # Sliding regime: drain matches fill, the deficit is stalled time.
            return 0.0, fill, 1.0 - fill
        return fill, 0.0, 1.0

    def _apply(self, h: float, slope: float, play: float, stall: float, snap: float | None) -> None:
        if h < 0:
            raise SimulationError("negative interval")
        start = self.st.clock
        self.scheme.observe_interval(start, h, self.st.buffer)
        self.st.clock = start + h
        self.st.buffer = self.st.buffer + slope * h if snap is None else snap
        self.play_accum += play * h
        if stall > 0.0 and h > 0.0:
            self.st.stall_accum += stall * h
            self.chunk_stall += stall * h
            if self._stall_start is None:
                self._stall_start = start
            self._stall_acc += stall * h
        elif h > 0.0 and self._stall_start is not None:
            self._close_stall()

    def _close_stall(self) -> None:
        if self._stall_start is not None:
            if self._stall_acc >= 1e-9:
                self.stalls.append((self._stall_start, self._stall_acc))
            self._stall_start = None
            self._stall_acc = 0.0

    def _current_second(self) -> int:
        return int(math.floor(self.st.clock + _TINY))

    def _next_boundary_h(self) -> float:
        return self._current_second() + 1.0 - self.st.clock

    def _fire_startup_if_due(self) -> bool:
        due = self._startup_pending_at()
        if due is not None and self.st.clock >= due - _TINY:
            self.st.clock = max(self.st.clock, due)
            self._enable_playback(due)
            return True
        return False

    # -- advancing phases -----------------------------------------------------

    def _advance_idle(self, duration: float) -> None:
        """Time passes with no bytes flowing (request latency)."""
        end = self.st.clock + duration
        while True:
            self._fire_startup_if_due()
            left = end - self.st.clock
            if left <= _TINY:
                self.st.clock = end
                break
            slope, play, stall = self._regime(0.0)
            h, snap = min(left, self._next_boundary_h()), None
            due = self._startup_pending_at()
            if due is not None and due - self.st.clock < h:
                h = due - self.st.clock
            if slope < 0.0 and self.st.buffer > self.delta:
                hd = (self.st.buffer - self.delta) / -slope
                if hd < h:
                    h, snap = hd, self.delta
            self._apply(h, slope, play, stall, snap)

    def _wait_for_gate(self) -> None:
        """Drain until the buffer falls to the resume level before a new request."""
        while self.st.buffer > self.resume_level + _TINY:
            self._fire_startup_if_due()
            slope, play, stall = self._regime(0.0)
            if slope >= 0.0:
                raise SimulationError("buffer cap deadlock: buffer is not draining")
            h, snap = self._next_boundary_h(), None
            hr = (self.st.buffer - self.resume_level) / -slope
            if hr <= h:
                h, snap = hr, self.resume_level
            self._apply(h, slope, play, stall, snap)

    def _download(self, rate_kbps: float, kilobits: float) -> None:
        """Advance until the chunk's bytes have arrived, filling the buffer fluidly."""
        remaining = kilobits
        dry = 0.0
        while remaining > 0.0:
            self._fire_startup_if_due()
            sec = self._current_second()
            c = self.trace.samples[sec % self.trace.duration_s]
            fill = c / rate_kbps if c > 0.0 else 0.0
            slope, play, stall = self._regime(fill)
            h, event, snap = self._next_boundary_h(), "boundary", None
            if c > 0.0:
                hc = remaining / c
                if hc <= h:
                    h, event, snap = hc, "complete", None
            due = self._startup_pending_at()
            if due is not None and due - self.st.clock < h:
                h, event, snap = due - self.st.clock, "startup", None
            if slope < 0.0 and self.st.buffer > self.delta:
                hd = (self.st.buffer - self.delta) / -slope
                if hd < h:
                    h, event, snap = hd, "delta", self.delta
            elif slope > 0.0 and self.st.playing and self.st.buffer < self.delta:
                hd = (self.delta - self.st.buffer) / slope
                if hd < h:
                    h, event, snap = hd, "delta", self.delta
            if h > 0.0:
                if c > 0.0:
                    self.history.add_second_sample(sec, c)
                    dry = 0.0
                else:
                    dry += h
                    if dry > self.trace.duration_s + 1.0:
                        raise SimulationError("zero bandwidth over a full trace period")
            self._apply(h, slope, play, stall, snap)
            if event == "complete":
                remaining = 0.0
            elif c > 0.0:
                remaining -= c * h

    # -- chunk lifecycle --------------------------------------------------

    def _estimate(self) -> float:
        if self.config.estimator.kind == "harmonic_seconds":
            have = bool(self.history.second_samples)
        else:
            have = bool(self.history.chunk_samples)
        if not have:
            return track_avg_bitrate(self.manifest.tracks[0])
        return estimate_bandwidth(self.history, self.config.estimator, self.st.clock)

    def _clamp_to_allowed(self, level: int, allowed: tuple[int, ...]) -> int:
        below = [lvl for lvl in allowed if lvl <= level]
        return max(below) if below else min(allowed)

    def run_chunk(self, i: int) -> None:
        if self.st.buffer >= self.cap:
            self._wait_for_gate()
        est = self._estimate()
        allowed = self.allowed[i]
        ctx = DecisionContext(
            chunk_index=i,
            buffer_s=self.st.buffer,
            clock_s=self.st.clock,
            est_kbps=est,
            last_level=self.st.last_level,
            allowed_levels=allowed,
            manifest=self.manifest,
            chunk_class=self.chunk_class,
            playing_indicator=int(self.st.playing and self.st.buffer >= self.delta),
            history=self.history,
        )
        if i == 0 and self.config.first_chunk_level is not None:
            level = self._clamp_to_allowed(self.config.first_chunk_level, allowed)
            u = None
        else:
            level = self.scheme.decide(ctx)
            if level not in allowed:
                raise SimulationError(
                    f"scheme {self.scheme.name!r} chose level {level} for chunk {i}; "
                    f"allowed levels are {allowed}"
                )
            u = self.scheme.last_u
        buffer_at_decision = self.st.buffer
        chunk = self.manifest.chunk(level, i)
        self.chunk_stall = 0.0
        dl_start = self.st.clock
        if self.config.rtt_s > 0:
            self._advance_idle(self.config.rtt_s)
        data_start = self.st.clock
        kilobits = chunk.size_bytes * 8.0 / 1000.0
        self._download(chunk.bitrate_kbps, kilobits)
        dl_end = self.st.clock
        throughput = kilobits / (dl_end - data_start)
        self.history.add_chunk_sample(throughput)
        self.history.add_estimate(est)
        self.scheme.observe_chunk(i, level, throughput)
        self.st.bytes_downloaded += chunk.size_bytes
        self.st.last_level = level
        self.st.next_chunk = i + 1
        rule = self.config.startup
        if rule.kind == "chunks_buffered" and not self.st.playing and i + 1 >= int(rule.value):
            self._enable_playback(self.st.clock)
        pid_state = getattr(self.scheme, "pid_state", None)
        if pid_state is not None:
            self.st.integral = pid_state.integral
        self.decisions.append(
            Decision(
                chunk=i,
                level=level,
                bitrate_kbps=chunk.bitrate_kbps,
                vmaf=chunk.vmaf,
                dl_start_s=dl_start,
                dl_end_s=dl_end,
                buffer_s=buffer_at_decision,
                est_kbps=est,
                u=u,
                stall_s=self.chunk_stall,
            )
        )


def _normalize_allowed(manifest: VideoManifest, allowed_levels) -> tuple[tuple[int, ...], ...]:
    n = manifest.n_chunks
    all_levels = manifest.levels
    if allowed_levels is None:
        return (all_levels,) * n
    seq = tuple(allowed_levels)
    if seq and isinstance(seq[0], int):
        per_position = (tuple(sorted(seq)),) * n
    else:
        per_position = tuple(tuple(sorted(s)) for s in seq)
    if len(per_position) != n:
        raise ConfigError("allowed_levels must cover every chunk position")
    for pos, levels in enumerate(per_position):
        if not levels:
            raise ConfigError(f"no allowed levels for chunk {pos}")
        for lvl in levels:
            if lvl not in all_levels:
                raise ConfigError(f"allowed level {lvl} not in manifest at chunk {pos}")
    return per_position


def simulate_session(
    scheme: AbrScheme,
    trace: BandwidthTrace,
    manifest: VideoManifest,
    config: SimConfig,
    allowed_levels=None,
    chunk_class=None,
) -> SessionLog:
    """Run one deterministic session; raises SimulationError on invariant breaks."""
    delta = manifest.chunk_duration_s
    if config.max_buffer_s <= delta:
        raise ConfigError("max buffer must exceed one chunk duration")
    if config.startup.kind == "chunks_buffered" and int(config.startup.value) > manifest.n_chunks:
        raise ConfigError("chunks_buffered exceeds the video's chunk count")
    if config.first_chunk_level is not None and not 1 <= config.first_chunk_level <= manifest.n_levels:
        raise ConfigError("first_chunk_level outside manifest levels")
    allowed = _normalize_allowed(manifest, allowed_levels)
    session = _Session(scheme, trace, manifest, config, allowed)
    session.chunk_class = chunk_class
    for i in range(manifest.n_chunks):
        session.run_chunk(i)
    session._close_stall()
    st = session.st
    end = st.clock
    startup = session.startup_latency if session.startup_latency is not None else end
    wall_stall = max(0.0, end - startup - session.play_accum)
    if abs(st.stall_accum - wall_stall) > 1e-9:
        raise SimulationError(
            f"stall accounting mismatch: accumulated {st.stall_accum!r} vs wall {wall_stall!r}"
        )
    delivered = manifest.n_chunks * delta
    tol = max(1e-9, delivered * 1e-12)
    if abs(session.play_accum + st.buffer - delivered) > tol:
        raise SimulationError(
            f"content conservation mismatch: played {session.play_accum!r} + buffered "
            f"{st.buffer!r} != delivered {delivered!r}"
        )
    expected_bytes = sum(
        manifest.chunk(d.level, d.chunk).size_bytes for d in session.decisions
    )
    if st.bytes_downloaded != expected_bytes:
        raise SimulationError("byte conservation mismatch")
    return SessionLog(
        scheme_name=getattr(scheme, "name", type(scheme).__name__),
        trace_name=trace.name,
        manifest_name=manifest.name,
        chunk_duration_s=delta,
        decisions=tuple(session.decisions),
        stalls=tuple(session.stalls),
        startup_latency_s=startup,
        end_clock_s=end,
        play_time_s=session.play_accum,
        final_buffer_s=st.buffer,
        stall_total_s=st.stall_accum,
        bytes_downloaded=st.bytes_downloaded,
    )
