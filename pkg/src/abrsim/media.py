"""Bandwidth traces, video manifests, and derived per-track statistics."""

from __future__ import annotations

import json
from dataclasses import dataclass

TRACE_HEADER = "t_s,bandwidth_kbps"


class MediaError(ValueError):
    """Malformed or inconsistent trace/manifest input."""


@dataclass(frozen=True)
class BandwidthTrace:
    """1 Hz bandwidth samples in kbps; zero-order hold between integer seconds."""

    name: str
    samples: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(float(v) for v in self.samples))
        if not self.samples:
            raise MediaError("trace has no samples")
        for t, value in enumerate(self.samples):
            if not value >= 0.0:
                raise MediaError(f"bandwidth at t={t} must be >= 0")

    @property
    def duration_s(self) -> int:
        return len(self.samples)

    def bandwidth_at(self, t_s: float) -> float:
        """Sample holding at time t_s; the trace repeats past its end."""
        if t_s < 0:
            raise MediaError("time before trace start")
        return self.samples[int(t_s) % len(self.samples)]

    def to_csv(self) -> str:
        rows = [TRACE_HEADER]
        rows.extend(f"{t},{value!r}" for t, value in enumerate(self.samples))
        return "\n".join(rows) + "\n"


def parse_trace(text: str, name: str = "trace") -> BandwidthTrace:
    """Parse trace CSV: header t_s,bandwidth_kbps, one row per second from t=0."""
    lines = [line.rstrip("\r") for line in text.splitlines()]
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines or lines[0].strip() != TRACE_HEADER:
        raise MediaError(f"line 1: expected header '{TRACE_HEADER}'")
    samples: list[float] = []
    for row, line in enumerate(lines[1:]):
        lineno = row + 2
        parts = line.strip().split(",")
        if len(parts) != 2:
            raise MediaError(f"line {lineno}: expected 't,bandwidth'")
        try:
            t = int(parts[0])
            value = float(parts[1])
        except ValueError:
            raise MediaError(f"line {lineno}: malformed row {line!r}") from None
        if t > row:
            raise MediaError(f"line {lineno}: timestamp gap, expected t={row}")
        if t < row:
            raise MediaError(f"line {lineno}: non-monotone timestamp, expected t={row}")
        if not value >= 0.0:
            raise MediaError(f"line {lineno}: bandwidth must be >= 0")
        samples.append(value)
    if not samples:
        raise MediaError("trace has no samples")
    return BandwidthTrace(name, tuple(samples))


@dataclass(frozen=True)
class ChunkMeta:
    """One encoded chunk: payload size, playback duration, optional VMAF quality."""

    size_bytes: int
    duration_s: float
    vmaf: float | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.size_bytes, int) or self.size_bytes <= 0:
            raise MediaError("chunk size must be a positive integer byte count")
        if self.duration_s <= 0:
            raise MediaError("chunk duration must be positive")
        if self.vmaf is not None and not 0.0 <= self.vmaf <= 100.0:
            raise MediaError("vmaf must lie in [0, 100]")

    @property
    def bitrate_kbps(self) -> float:
        return self.size_bytes * 8.0 / 1000.0 / self.duration_s


@dataclass(frozen=True)
class Track:
    """One bitrate level: 1-based level id, declared rate, per-position chunks."""

    level: int
    declared_bitrate_kbps: float
    chunks: tuple[ChunkMeta, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "chunks", tuple(self.chunks))
        if self.level < 1:
            raise MediaError("track levels are 1-based")
        if self.declared_bitrate_kbps <= 0:
            raise MediaError("declared bitrate must be positive")
        if not self.chunks:
            raise MediaError("track has no chunks")


def track_avg_bitrate(track: Track) -> float:
    """Whole-track average bitrate in kbps: total bits over total playback time."""
    total_kilobits = sum(c.size_bytes * 8.0 / 1000.0 for c in track.chunks)
    total_seconds = sum(c.duration_s for c in track.chunks)
    return total_kilobits / total_seconds


def windowed_avg_bitrate(track: Track, start: int, window: int) -> float:
    """Mean per-chunk bitrate over chunks [start, start+window), truncated at video end."""
    if not 0 <= start < len(track.chunks):
        raise MediaError("window start outside track")
    if window < 1:
        raise MediaError("window must be >= 1")
    span = track.chunks[start : start + window]
    return sum(c.bitrate_kbps for c in span) / len(span)


@dataclass(frozen=True)
class VideoManifest:
    """A video's bitrate ladder plus the global chunk duration."""

    name: str
    chunk_duration_s: float
    is_vbr: bool
    tracks: tuple[Track, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tracks", tuple(self.tracks))
        if self.chunk_duration_s <= 0:
            raise MediaError("chunk duration must be positive")
        if len(self.tracks) < 2:
            raise MediaError("manifest needs at least 2 tracks")
        if len({len(t.chunks) for t in self.tracks}) != 1:
            raise MediaError("ragged chunk counts across tracks")
        for idx, track in enumerate(self.tracks):
            if track.level != idx + 1:
                raise MediaError("track levels must be contiguous 1..L in order")
            for chunk in track.chunks:
                if chunk.duration_s != self.chunk_duration_s:
                    raise MediaError("chunk duration differs from manifest duration")
        averages = [track_avg_bitrate(t) for t in self.tracks]
        for lower, upper in zip(averages, averages[1:]):
            if upper < lower - 1e-9:
                raise MediaError("tracks must be ordered by increasing average bitrate")
        if not self.is_vbr:
            for track in self.tracks:
                expected = track.declared_bitrate_kbps * 125.0 * self.chunk_duration_s
                for i, chunk in enumerate(track.chunks):
                    if abs(chunk.size_bytes - expected) > 1.0 + 1e-9:
                        raise MediaError(
                            f"CBR size mismatch at level {track.level} chunk {i}: "
                            f"{chunk.size_bytes} vs {expected:.1f} bytes"
                        )

    @property
    def n_levels(self) -> int:
        return len(self.tracks)

    @property
    def n_chunks(self) -> int:
        return len(self.tracks[0].chunks)

    @property
    def levels(self) -> tuple[int, ...]:
        return tuple(range(1, self.n_levels + 1))

    def track(self, level: int) -> Track:
        if not 1 <= level <= self.n_levels:
            raise MediaError(f"level {level} outside 1..{self.n_levels}")
        return self.tracks[level - 1]

    def chunk(self, level: int, index: int) -> ChunkMeta:
        return self.track(level).chunks[index]

    def bitrate_kbps(self, level: int, index: int) -> float:
        """Instantaneous bitrate of one chunk in kbps."""
        return self.chunk(level, index).bitrate_kbps


@dataclass(frozen=True)
class ChunkClass:
    """Per-position complexity quartile (1..4) from reference-track chunk sizes."""

    classes: tuple[int, ...]
    reference_level: int

    def quartile(self, index: int) -> int:
        return self.classes[index]


def classify_chunks(manifest: VideoManifest, reference_level: int) -> ChunkClass:
    """Assign each position a quartile by stable rank of reference-track size."""
    ref = manifest.track(reference_level)
    n = len(ref.chunks)
    if n < 4:
        raise MediaError("classification needs at least 4 chunks")
    order = sorted(range(n), key=lambda i: (ref.chunks[i].size_bytes, i))
    classes = [0] * n
    for rank, position in enumerate(order):
        classes[position] = 4 * rank // n + 1
    return ChunkClass(tuple(classes), reference_level)


def parse_manifest(text: str) -> VideoManifest:
    """Parse manifest JSON into a validated VideoManifest."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MediaError(f"manifest is not valid JSON: {exc}") from None
    try:
        duration = float(raw["chunk_duration_s"])
        tracks = tuple(
            Track(
                level=int(t["level"]),
                declared_bitrate_kbps=float(t["declared_bitrate_kbps"]),
                chunks=tuple(
                    ChunkMeta(
                        size_bytes=int(c["size_bytes"]),
                        duration_s=duration,
                        vmaf=None if c.get("vmaf") is None else float(c["vmaf"]),
                    )
                    for c in t["chunks"]
                ),
            )
            for t in raw["tracks"]
        )
        return VideoManifest(
            name=str(raw.get("name", "video")),
            chunk_duration_s=duration,
            is_vbr=bool(raw["is_vbr"]),
            tracks=tracks,
        )
    except KeyError as exc:
        raise MediaError(f"manifest missing field {exc}") from None
    except TypeError as exc:
        raise MediaError(f"malformed manifest: {exc}") from None
