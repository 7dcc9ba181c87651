"""Command-line front end: run sessions, compare schemes, sweep gains, solve oracles.

One JSON config file describes a job; flags override the common fields. All
outputs are plain CSV/JSON files under the configured output directory, and
every run is deterministic for a fixed config.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .control import ControlError, PidParams, RampSchedule
from .engine import (
    EstimatorSpec,
    SessionLog,
    SimConfig,
    SimulationError,
    StartupRule,
    simulate_session,
)
from .media import (
    BandwidthTrace,
    MediaError,
    VideoManifest,
    classify_chunks,
    parse_manifest,
    parse_trace,
)
from .metrics import (
    OfflineObjective,
    QoeWeights,
    default_weights,
    offline_optimal,
    session_metrics,
)
from .schemes import (
    SCHEMES,
    AbrScheme,
    Cava,
    CavaParams,
    ConfigError,
    FilterSpec,
    Pia,
    PiaParams,
    PiaStartup,
    Quad,
    QuadParams,
    allowed_from_filter,
    make_scheme,
)
from .tuning import GainGrid, extract_region, sweep_gains

_MIN_NOISY_KBPS = 50.0


# ------------------------------------------------------------ synthetic traces


def constant_bandwidth(kbps: float, seconds: int, name: str | None = None) -> BandwidthTrace:
    """Flat link at `kbps` for `seconds` seconds."""
    if kbps <= 0:
        raise ConfigError("bandwidth must be positive")
    if seconds < 1:
        raise ConfigError("trace needs at least one second")
    return BandwidthTrace(name or f"const-{kbps:g}", (float(kbps),) * int(seconds))


def step_bandwidth(
    low_kbps: float, high_kbps: float, switch_at_s: float, seconds: int, name: str | None = None
) -> BandwidthTrace:
    """Single step from `low_kbps` to `high_kbps` at `switch_at_s`."""
    if low_kbps <= 0 or high_kbps <= 0:
        raise ConfigError("bandwidth must be positive")
    if seconds < 1:
        raise ConfigError("trace needs at least one second")
    if not 0 <= switch_at_s <= seconds:
        raise ConfigError("switch time must fall inside the trace")
    samples = tuple(
        float(low_kbps) if t < switch_at_s else float(high_kbps) for t in range(int(seconds))
    )
    return BandwidthTrace(name or f"step-{low_kbps:g}-{high_kbps:g}", samples)


def square_wave(
    low_kbps: float,
    high_kbps: float,
    period_s: float,
    seconds: int,
    seed: int | None = None,
    name: str | None = None,
) -> BandwidthTrace:
    """Alternating high/low link; a seed adds phase offset and per-cycle jitter."""
    if not 0 < low_kbps <= high_kbps:
        raise ConfigError("need 0 < low <= high")
    if period_s < 2:
        raise ConfigError("period must be at least 2 s")
    if seconds < 1:
        raise ConfigError("trace needs at least one second")
    rng = random.Random(seed)
    phase = rng.uniform(0.0, period_s) if seed is not None else 0.0
    half = period_s / 2.0
    levels: dict[int, tuple[float, float]] = {}
    samples = []
    for t in range(int(seconds)):
        cycle = int((t + phase) // period_s)
        if cycle not in levels:
            if seed is not None:
                levels[cycle] = (
                    high_kbps * rng.uniform(0.9, 1.1),
                    low_kbps * rng.uniform(0.9, 1.1),
                )
            else:
                levels[cycle] = (float(high_kbps), float(low_kbps))
        hi, lo = levels[cycle]
        samples.append(hi if (t + phase) % period_s < half else lo)
    suffix = "" if seed is None else f"-s{seed}"
    return BandwidthTrace(name or f"square-{low_kbps:g}-{high_kbps:g}{suffix}", tuple(samples))


def noisy_bandwidth(
    mean_kbps: float, spread_kbps: float, seconds: int, seed: int, name: str | None = None
) -> BandwidthTrace:
    """Uniform noise in [mean - spread, mean + spread], floored away from zero."""
    if mean_kbps <= 0:
        raise ConfigError("mean bandwidth must be positive")
    if spread_kbps < 0:
        raise ConfigError("spread must be >= 0")
    if seconds < 1:
        raise ConfigError("trace needs at least one second")
    if seed is None:
        raise ConfigError("noisy traces need a seed")
    rng = random.Random(seed)
    samples = tuple(
        max(_MIN_NOISY_KBPS, rng.uniform(mean_kbps - spread_kbps, mean_kbps + spread_kbps))
        for _ in range(int(seconds))
    )
    return BandwidthTrace(name or f"noisy-{seed}", samples)


# ------------------------------------------------------------------ job config

_TOP_KEYS = {
    "manifest",
    "traces",
    "trace_dir",
    "scheme",
    "scheme_params",
    "schemes",
    "filter",
    "target_quality",
    "weights",
    "sim",
    "gamma",
    "reference_level",
    "include_oracle",
    "grid",
    "out_dir",
    "jobs",
    "deterministic",
}
_SIM_KEYS = {
    "startup_kind",
    "startup_value",
    "max_buffer_s",
    "resume_margin_s",
    "rtt_s",
    "estimator_kind",
    "estimator_window",
    "first_chunk_level",
}


def _reject_unknown(raw: dict, known: set, where: str) -> None:
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(
            f"unknown {where} keys: {', '.join(unknown)} "
            f"(expected any of: {', '.join(sorted(known))})"
        )


@dataclass(frozen=True)
class RunConfig:
    """One CLI job: media, traces, scheme choice, and output layout."""

    manifest_path: str | None = None
    trace_paths: tuple[str, ...] = ()
    trace_dir: str | None = None
    scheme: str = "pia"
    scheme_params: dict = field(default_factory=dict)
    schemes: tuple[str, ...] = ()
    filter_kind: str = "none"
    target_quality: float | None = None
    weights: QoeWeights | None = None
    sim: SimConfig = field(default_factory=SimConfig)
    gamma: float = 10000.0
    reference_level: int | None = None
    include_oracle: bool = False
    grid: GainGrid | None = None
    out_dir: str = "out"
    jobs: int = 1
    deterministic: bool = True

    def __post_init__(self) -> None:
        if self.deterministic is not True:
            raise ConfigError("runs are always deterministic; the flag cannot be disabled")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        object.__setattr__(self, "trace_paths", tuple(self.trace_paths))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        object.__setattr__(self, "scheme_params", dict(self.scheme_params))

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        _reject_unknown(raw, _TOP_KEYS, "config")
        try:
            return cls(
                manifest_path=raw.get("manifest"),
                trace_paths=tuple(raw.get("traces") or ()),
                trace_dir=raw.get("trace_dir"),
                scheme=raw.get("scheme", "pia"),
                scheme_params=dict(raw.get("scheme_params") or {}),
                schemes=tuple(raw.get("schemes") or ()),
                filter_kind=raw.get("filter", "none"),
                target_quality=_opt_float(raw.get("target_quality")),
                weights=_parse_weights(raw.get("weights")),
                sim=_parse_sim(raw.get("sim")),
                gamma=float(raw.get("gamma", 10000.0)),
                reference_level=_opt_int(raw.get("reference_level")),
                include_oracle=bool(raw.get("include_oracle", False)),
                grid=_parse_grid(raw.get("grid")),
                out_dir=raw.get("out_dir", "out"),
                jobs=int(raw.get("jobs", 1)),
                deterministic=raw.get("deterministic", True),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"bad config value: {exc}") from None

    def to_json(self) -> str:
        sim = {
            "startup_kind": self.sim.startup.kind,
            "startup_value": self.sim.startup.value,
            "max_buffer_s": self.sim.max_buffer_s,
            "resume_margin_s": self.sim.resume_margin_s,
            "rtt_s": self.sim.rtt_s,
            "estimator_kind": self.sim.estimator.kind,
            "estimator_window": self.sim.estimator.window,
            "first_chunk_level": self.sim.first_chunk_level,
        }
        data = {
            "manifest": self.manifest_path,
            "traces": list(self.trace_paths),
            "trace_dir": self.trace_dir,
            "scheme": self.scheme,
            "scheme_params": self.scheme_params,
            "schemes": list(self.schemes),
            "filter": self.filter_kind,
            "target_quality": self.target_quality,
            "weights": None
            if self.weights is None
            else {"mu": self.weights.mu, "lam": self.weights.lam},
            "sim": sim,
            "gamma": self.gamma,
            "reference_level": self.reference_level,
            "include_oracle": self.include_oracle,
            "grid": None
            if self.grid is None
            else {"kp_values": list(self.grid.kp_values), "ki_values": list(self.grid.ki_values)},
            "out_dir": self.out_dir,
            "jobs": self.jobs,
            "deterministic": True,
        }
        return json.dumps(data, sort_keys=True, indent=2)


def _opt_float(value) -> float | None:
    return None if value is None else float(value)


def _opt_int(value) -> int | None:
    return None if value is None else int(value)


def _parse_weights(raw) -> QoeWeights | None:
    if raw is None:
        return None
    _reject_unknown(raw, {"mu", "lam"}, "weights")
    if "mu" not in raw or "lam" not in raw:
        raise ConfigError("weights need both mu and lam")
    return QoeWeights(mu=float(raw["mu"]), lam=float(raw["lam"]))


def _parse_sim(raw) -> SimConfig:
    raw = raw or {}
    _reject_unknown(raw, _SIM_KEYS, "sim")
    return SimConfig(
        startup=StartupRule(
            kind=raw.get("startup_kind", "latency"),
            value=float(raw.get("startup_value", 5.0)),
        ),
        max_buffer_s=float(raw.get("max_buffer_s", 120.0)),
        resume_margin_s=_opt_float(raw.get("resume_margin_s")),
        rtt_s=float(raw.get("rtt_s", 0.07)),
        estimator=EstimatorSpec(
            kind=raw.get("estimator_kind", "harmonic_seconds"),
            window=int(raw.get("estimator_window", 20)),
        ),
        first_chunk_level=_opt_int(raw.get("first_chunk_level")),
    )


def _parse_grid(raw) -> GainGrid | None:
    if raw is None:
        return None
    _reject_unknown(raw, {"kp_values", "ki_values"}, "grid")
    if "kp_values" not in raw or "ki_values" not in raw:
        raise ConfigError("grid needs kp_values and ki_values")
    return GainGrid(tuple(raw["kp_values"]), tuple(raw["ki_values"]))


# ------------------------------------------------------------- scheme assembly

_PID_KEYS = ("kp", "ki", "kd", "beta", "epsilon", "target_buffer")


def _pid_from(params: dict, default_beta: float) -> PidParams:
    kwargs = {key: params.pop(key) for key in _PID_KEYS if key in params}
    kwargs.setdefault("beta", default_beta)
    return PidParams(**kwargs)


def _build_scheme(
    name: str, raw_params: dict, manifest: VideoManifest, target_quality: float | None
) -> AbrScheme:
    if name not in SCHEMES:
        raise ConfigError(f"unknown scheme {name!r}; choose from {', '.join(sorted(SCHEMES))}")
    params = dict(raw_params)
    try:
        if name == "pia":
            pid = _pid_from(params, 0.2)
            return Pia(PiaParams(pid=pid, **params))
        if name == "piae":
            alpha = float(params.pop("alpha", 4.0))
            tau = float(params.pop("tau", 300.0))
            pid = _pid_from(params, 1.0)
            schedule = RampSchedule(
                alpha=alpha,
                tau=tau,
                base_kp=pid.kp,
                base_xr=pid.target_buffer,
                delta=manifest.chunk_duration_s,
            )
            return PiaStartup(PiaParams(pid=pid, **params), schedule)
        if name == "cava":
            pid = _pid_from(params, 1.0)
            return Cava(CavaParams(pid=pid, **params))
        if name == "quad":
            pid = _pid_from(params, 1.0)
            if target_quality is not None:
                params.setdefault("target_quality", target_quality)
            return Quad(QuadParams(pid=pid, **params))
        return make_scheme(name, **params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for scheme {name!r}: {exc}") from None


def _classes_for(config: RunConfig, manifest: VideoManifest, scheme_name: str):
    if scheme_name != "cava" and config.reference_level is None:
        return None
    reference = config.reference_level or (manifest.n_levels + 1) // 2
    return classify_chunks(manifest, reference)


class _FixedSequence(AbrScheme):
    """Clairvoyant playback of a precomputed level sequence."""

    name = "offline-optimal"

    def __init__(self, levels):
        self.levels = tuple(levels)

    def decide(self, ctx) -> int:
        return self.levels[ctx.chunk_index]


# ------------------------------------------------------------------- commands


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


def _load_manifest(config: RunConfig) -> VideoManifest:
    if not config.manifest_path:
        raise ConfigError("config needs a manifest path")
    return parse_manifest(_read_text(config.manifest_path))


def _load_traces(config: RunConfig) -> list[BandwidthTrace]:
    paths = list(config.trace_paths)
    if config.trace_dir:
        paths.extend(sorted(str(p) for p in Path(config.trace_dir).glob("*.csv")))
    if not paths:
        raise ConfigError("config needs at least one trace")
    return [parse_trace(_read_text(p), name=Path(p).stem) for p in paths]


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config_for(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.from_json(_read_text(args.config)) if args.config else RunConfig()
    overrides = {}
    if getattr(args, "scheme", None):
        overrides["scheme"] = args.scheme
    if getattr(args, "filter", None):
        overrides["filter_kind"] = args.filter
    if getattr(args, "target_quality", None) is not None:
        overrides["target_quality"] = args.target_quality
    if getattr(args, "out", None):
        overrides["out_dir"] = args.out
    if getattr(args, "jobs", None):
        overrides["jobs"] = args.jobs
    return replace(config, **overrides) if overrides else config


def _decisions_csv(log: SessionLog, allowed) -> str:
    lines = log.to_csv().strip().split("\n")
    rows = [lines[0] + ",allowed_levels"]
    for row, levels in zip(lines[1:], allowed):
        rows.append(row + "," + "|".join(str(level) for level in levels))
    return "\n".join(rows) + "\n"


def cmd_run(args: argparse.Namespace) -> int:
    config = _config_for(args)
    manifest = _load_manifest(config)
    traces = _load_traces(config)
    if len(traces) != 1:
        raise ConfigError("run takes exactly one trace")
    trace = traces[0]
    spec = FilterSpec(kind=config.filter_kind, target_quality=config.target_quality)
    allowed = allowed_from_filter(spec, manifest)
    scheme = _build_scheme(config.scheme, config.scheme_params, manifest, config.target_quality)
    log = simulate_session(
        scheme,
        trace,
        manifest,
        config.sim,
        allowed_levels=allowed,
        chunk_class=_classes_for(config, manifest, config.scheme),
    )
    report = session_metrics(
        log, manifest, target_quality=config.target_quality, weights=config.weights
    )
    out = _out_dir(config)
    echo = allowed if allowed is not None else (manifest.levels,) * manifest.n_chunks
    (out / "decisions.csv").write_text(_decisions_csv(log, echo))
    (out / "metrics.json").write_text(report.to_json() + "\n")
    print(
        f"{log.scheme_name} on {trace.name}: qoe={report.qoe:.4f} Mbps, "
        f"stall={report.total_stall_s:.2f} s -> {out / 'decisions.csv'}"
    )
    return 0


def _compare_cell(task):
    index, name, trace, manifest, config = task
    scheme = _build_scheme(name, {}, manifest, config.target_quality)
    spec = FilterSpec(kind=config.filter_kind, target_quality=config.target_quality)
    log = simulate_session(
        scheme,
        trace,
        manifest,
        config.sim,
        allowed_levels=allowed_from_filter(spec, manifest),
        chunk_class=_classes_for(config, manifest, name),
    )
    report = session_metrics(
        log, manifest, target_quality=config.target_quality, weights=config.weights
    )
    header, values = report.to_csv().strip().split("\n")
    return index, name, trace.name, header, values


# The exact solver's state frontier grows steeply with chunk count; past this
# point a single solve takes minutes, so refuse instead of hanging silently.
ORACLE_MAX_CHUNKS = 24


def _check_oracle_size(manifest: VideoManifest) -> None:
    if manifest.n_chunks > ORACLE_MAX_CHUNKS:
        raise ConfigError(
            f"oracle supports manifests up to {ORACLE_MAX_CHUNKS} chunks; "
            f"this one has {manifest.n_chunks}"
        )


def _oracle_line(config: RunConfig, manifest: VideoManifest, trace: BandwidthTrace):
    if config.target_quality is None:
        raise ConfigError("offline-optimal rows need target_quality")
    _check_oracle_size(manifest)
    objective = OfflineObjective(config.target_quality, config.gamma)
    levels, _ = offline_optimal(trace, manifest, objective, config.sim)
    log = simulate_session(_FixedSequence(levels), trace, manifest, config.sim)
    report = session_metrics(
        log, manifest, target_quality=config.target_quality, weights=config.weights
    )
    _, values = report.to_csv().strip().split("\n")
    return f"offline-optimal,{trace.name},{values}"


def cmd_compare(args: argparse.Namespace) -> int:
    config = _config_for(args)
    manifest = _load_manifest(config)
    traces = _load_traces(config)
    names = config.schemes or (config.scheme,)
    tasks = []
    for si, name in enumerate(names):
        if name not in SCHEMES:
            raise ConfigError(
                f"unknown scheme {name!r}; choose from {', '.join(sorted(SCHEMES))}"
            )
        for ti, trace in enumerate(traces):
            tasks.append(((si, ti), name, trace, manifest, config))
    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            cells = list(pool.map(_compare_cell, tasks))
    else:
        cells = [_compare_cell(task) for task in tasks]
    cells.sort(key=lambda cell: cell[0])
    header = f"scheme,trace,{cells[0][3]}"
    rows = [f"{name},{trace_name},{values}" for _, name, trace_name, _, values in cells]
    if config.include_oracle:
        rows.extend(_oracle_line(config, manifest, trace) for trace in traces)
    out = _out_dir(config)
    path = out / "compare.csv"
    path.write_text("\n".join([header] + rows) + "\n")
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _config_for(args)
    manifest = _load_manifest(config)
    traces = _load_traces(config)
    if config.grid is None:
        raise ConfigError("sweep needs a gain grid in the config")
    params = dict(config.scheme_params)
    try:
        template = PiaParams(pid=_pid_from(params, 0.2), **params)
    except TypeError as exc:
        raise ConfigError(f"bad sweep parameters: {exc}") from None
    weights = config.weights if config.weights is not None else default_weights(manifest)
    heatmap = sweep_gains(
        config.grid, traces, manifest, template, weights, config.sim, jobs=config.jobs
    )
    out = _out_dir(config)
    path = out / "heatmap.csv"
    path.write_text(heatmap.to_csv())
    region = extract_region(heatmap)
    if region is None:
        print(f"wrote {path}; no region met the heat threshold")
    else:
        print(
            f"wrote {path}; robust region kp in [{region.kp_range[0]!r}, {region.kp_range[1]!r}], "
            f"ki in [{region.ki_range[0]!r}, {region.ki_range[1]!r}], "
            f"mean heat {region.mean_heat:.2f}/{heatmap.trace_count}"
        )
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    config = _config_for(args)
    manifest = _load_manifest(config)
    traces = _load_traces(config)
    if len(traces) != 1:
        raise ConfigError("oracle takes exactly one trace")
    if config.target_quality is None:
        raise ConfigError("oracle needs target_quality")
    _check_oracle_size(manifest)
    trace = traces[0]
    objective = OfflineObjective(config.target_quality, config.gamma)
    levels, value = offline_optimal(trace, manifest, objective, config.sim)
    payload = {
        "trace": trace.name,
        "manifest": manifest.name,
        "target_quality": config.target_quality,
        "gamma": config.gamma,
        "sequence": list(levels),
        "objective": value,
    }
    out = _out_dir(config)
    path = out / "oracle.json"
    path.write_text(json.dumps(payload, indent=2) + "\n")
    print(f"offline optimal objective {value!r} over {len(levels)} chunks -> {path}")
    return 0


def cmd_gen_trace(args: argparse.Namespace) -> int:
    seconds = args.seconds
    if args.kind == "constant":
        trace = constant_bandwidth(args.kbps, seconds, name=args.name)
    elif args.kind == "step":
        switch = args.switch_at if args.switch_at is not None else seconds / 2
        trace = step_bandwidth(args.low, args.high, switch, seconds, name=args.name)
    elif args.kind == "square-wave":
        trace = square_wave(args.low, args.high, args.period, seconds, seed=args.seed, name=args.name)
    else:
        trace = noisy_bandwidth(args.mean, args.spread, seconds, seed=args.seed, name=args.name)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{trace.name}.csv"
    path.write_text(trace.to_csv())
    print(f"wrote {path}")
    return 0


# ----------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abrsim", description="Trace-driven adaptive-bitrate simulator."
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON job config")
    common.add_argument("--out", help="output directory (overrides config)")
    common.add_argument("--jobs", type=int, help="worker processes (overrides config)")
    common.add_argument("--scheme", help="scheme name (overrides config)")
    common.add_argument(
        "--filter", choices=("none", "cbf", "tbf-", "tbf+"), help="quality prefilter"
    )
    common.add_argument("--target-quality", type=float, help="quality target in [0, 100]")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="simulate one scheme on one trace").set_defaults(
        func=cmd_run
    )
    sub.add_parser(
        "compare", parents=[common], help="score several schemes across traces"
    ).set_defaults(func=cmd_compare)
    sub.add_parser("sweep", parents=[common], help="heat-map a PID gain grid").set_defaults(
        func=cmd_sweep
    )
    sub.add_parser(
        "oracle", parents=[common], help="solve the offline-optimal level sequence"
    ).set_defaults(func=cmd_oracle)
    gen = sub.add_parser("gen-trace", help="write a synthetic bandwidth trace")
    gen.add_argument(
        "--kind", choices=("constant", "step", "square-wave", "noisy"), required=True
    )
    gen.add_argument("--seconds", type=int, default=600)
    gen.add_argument("--kbps", type=float, default=2500.0)
    gen.add_argument("--low", type=float, default=500.0)
    gen.add_argument("--high", type=float, default=3000.0)
    gen.add_argument("--period", type=float, default=20.0)
    gen.add_argument("--switch-at", type=float, default=None)
    gen.add_argument("--mean", type=float, default=1500.0)
    gen.add_argument("--spread", type=float, default=500.0)
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--name", default=None)
    gen.add_argument("--out", default="traces")
    gen.set_defaults(func=cmd_gen_trace)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, MediaError, ControlError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SimulationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    raise SystemExit(main())
