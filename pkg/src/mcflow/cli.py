"""Command line runner: figure-style presets and direct access to the
library operations, with flat config files, deterministic seeds, CSV output
at full double precision, and a JSON metadata sidecar per run.

Exit codes: 0 success, 2 validation failure (bad config, bad preset, or a
particle-validation miss), 3 integration accuracy not reached, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import __version__
from .hitting_time import arrival_probability, fht_pdf
from .link import (
    LinkParams,
    hypothesis_stats,
    link_params_from_config,
    capacity,
    error_probability,
    detection_probs,
    optimal_threshold,
    optimal_thresholds,
    roc_sweep,
    slot_error_sweep,
    simulate_link,
    validity_advisories,
)
from .numerics import AccuracyError, RandomStream
from .particle_sim import SimSpec, default_sim_spec, empirical_pdf, simulate_hits, EmptySampleError
from .presets import (
    PlotHint,
    PresetContext,
    TableSpec,
    get_preset,
    make_config,
    PRESET_NAMES,
)
from .scenario import ChannelConfig, MobilityCase

__all__ = [
    "main",
    "parse_config_file",
    "build_channel_config",
    "build_link_params",
    "ValidationReport",
    "validate_case",
    "write_table",
]

SCENARIO_DEFAULTS: Dict[str, float] = {
    "x0_tx": 0.0,
    "x0_rx": 1e-6,
    "D_m": 0.5e-9,
    "D_tx": 1e-10,
    "D_rx": 0.5e-12,
    "v": 1e-3,
    "T": 0.3e-3,
}

LINK_DEFAULTS: Dict[str, float] = {
    "Q": 30.0,
    "beta": 0.5,
    "i": 10,
    "mu_o": 10.0,
    "sigma2_o": 10.0,
}

KS_TOLERANCE = 0.01


# ----------------------------------------------------------- config files

def _parse_value(text: str):
    if "," in text:
        return [float(part) for part in text.split(",") if part.strip()]
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_config_file(path) -> dict:
    """Flat key = value lines; '#' starts a comment; values are numbers,
    comma-separated number lists, or bare strings (e.g. kind = roc)."""
    data: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip() or not value.strip():
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        data[key.strip()] = _parse_value(value.strip())
    return data


def build_channel_config(cfg: dict) -> ChannelConfig:
    def num(key: str) -> float:
        return float(cfg.get(key, SCENARIO_DEFAULTS[key]))

    d_tx = num("D_tx")
    d_rx = num("D_rx")
    v = num("v")
    v_tx = float(cfg["v_tx"]) if "v_tx" in cfg else (v if d_tx > 0.0 else 0.0)
    v_rx = float(cfg["v_rx"]) if "v_rx" in cfg else (v if d_rx > 0.0 else 0.0)
    return ChannelConfig(
        x0_tx=num("x0_tx"),
        x0_rx=num("x0_rx"),
        D_m=num("D_m"),
        D_tx=d_tx,
        D_rx=d_rx,
        v=v,
        v_tx=v_tx,
        v_rx=v_rx,
        T=num("T"),
    )


def build_link_params(cfg: dict, config: ChannelConfig) -> LinkParams:
    q = cfg.get("Q", LINK_DEFAULTS["Q"])
    return link_params_from_config(
        config,
        i=int(cfg.get("i", LINK_DEFAULTS["i"])),
        Q=q,
        beta=float(cfg.get("beta", LINK_DEFAULTS["beta"])),
        mu_o=float(cfg.get("mu_o", LINK_DEFAULTS["mu_o"])),
        sigma2_o=float(cfg.get("sigma2_o", LINK_DEFAULTS["sigma2_o"])),
    )


def _resolved_config(cfg: dict, config: ChannelConfig) -> dict:
    out = dict(cfg)
    out.update(
        x0_tx=config.x0_tx, x0_rx=config.x0_rx, D_m=config.D_m,
        D_tx=config.D_tx, D_rx=config.D_rx, v=config.v,
        v_tx=config.v_tx, v_rx=config.v_rx, T=config.T,
    )
    for key, default in LINK_DEFAULTS.items():
        out.setdefault(key, default)
    return out


# ------------------------------------------------------------- csv output

def _fmt_cell(value) -> str:
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def write_table(table: TableSpec, outdir: Path) -> Path:
    path = outdir / f"{table.name}.csv"
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_fmt_cell(cell) for cell in row])
    return path


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_outputs(tables: List[TableSpec], outdir: Path, meta: dict,
                   runtime_s: float, no_plot: bool) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    files = {}
    for table in tables:
        path = write_table(table, outdir)
        files[path.name] = _sha256(path)
    if not no_plot:
        from . import plots

        for table in tables:
            plots.render_table(table, outdir / f"{table.name}.png")
    meta = dict(meta)
    meta["version"] = __version__
    meta["runtime_s"] = runtime_s
    meta["files"] = files
    with open(outdir / "meta.json", "w") as handle:
        json.dump(meta, handle, indent=2, sort_keys=True)
        handle.write("\n")


# ------------------------------------------------------ subcommand cores

@dataclass(frozen=True)
class RunSettings:
    seed: int = 1234
    grid: Optional[int] = None
    trials: int = 100_000
    particles: int = 100_000
    dt: Optional[float] = None
    t_max: Optional[float] = None
    mode: str = "analytic"
    sampling: str = "gaussian-matched"


def _parse_k_list(cfg: dict, default=(0, 2, 4, 6, 8, 10)) -> List[int]:
    raw = cfg.get("k", list(default))
    if isinstance(raw, (int, float)):
        raw = [raw]
    ks = [int(x) for x in raw]
    if any(k < 0 for k in ks):
        raise ValueError("slot indices k must be nonnegative")
    return ks


def core_fht_pdf(cfg: dict, settings: RunSettings) -> List[TableSpec]:
    config = build_channel_config(cfg)
    ks = _parse_k_list(cfg)
    t_max = float(cfg.get("t_max", settings.t_max or 20.0 * config.T))
    n = settings.grid or 1000
    t = np.linspace(t_max / n, t_max, n)
    columns = ["t_s"] + [f"pdf_k{k}" for k in ks]
    data = [t] + [np.asarray(fht_pdf(config, k, t)) for k in ks]
    rows = tuple(zip(*(np.asarray(c, dtype=float) for c in data)))
    hint = PlotHint(kind="line", xlabel="t (s)", ylabel="first hitting time pdf (1/s)")
    tables = [TableSpec(name="fht_pdf", columns=tuple(columns), rows=rows, plot=hint)]

    if settings.mode in ("sim", "both"):
        edges = np.linspace(0.0, t_max, 61)
        centers = 0.5 * (edges[:-1] + edges[1:])
        sim_cols = ["t_s"]
        sim_data = [centers]
        for k in ks:
            spec = default_sim_spec(config, settings.particles, settings.seed + k)
            if settings.dt is not None or settings.t_max is not None:
                spec = SimSpec(
                    n_particles=spec.n_particles,
                    dt=settings.dt if settings.dt is not None else spec.dt,
                    t_max=settings.t_max if settings.t_max is not None else spec.t_max,
                    seed=spec.seed,
                    bridge_correction=spec.bridge_correction,
                )
            sample = simulate_hits(config, k, spec)
            try:
                density = empirical_pdf(sample, edges)
            except EmptySampleError:
                density = np.zeros(centers.size)
            sim_cols.append(f"pdf_sim_k{k}")
            sim_data.append(density)
        sim_rows = tuple(zip(*(np.asarray(c, dtype=float) for c in sim_data)))
        tables.append(TableSpec(name="fht_pdf_sim", columns=tuple(sim_cols), rows=sim_rows, plot=hint))
    return tables


def core_arrival(cfg: dict, settings: RunSettings) -> List[TableSpec]:
    config = build_channel_config(cfg)
    release_slot = int(cfg.get("release_slot", 1))
    horizon = int(cfg.get("horizon", cfg.get("i", LINK_DEFAULTS["i"])))
    rows = tuple(
        (float(m), arrival_probability(config, release_slot, m)) for m in range(horizon)
    )
    hint = PlotHint(kind="line", xlabel="delay (slots)", ylabel="arrival probability", logy=True)
    return [TableSpec(name="arrival", columns=("m", "q"), rows=rows, plot=hint)]


def core_roc(cfg: dict, settings: RunSettings) -> List[TableSpec]:
    config = build_channel_config(cfg)
    params = build_link_params(cfg, config)
    lo = float(cfg.get("gamma_min", 1.0))
    hi = float(cfg.get("gamma_max", 80.0))
    if not hi > lo:
        raise ValueError("gamma_max must exceed gamma_min")
    n = settings.grid or 791
    grid = np.linspace(lo, hi, n)
    pfa, pd = roc_sweep(params, grid)
    rows = tuple(zip(grid, pfa, pd))
    hint = PlotHint(kind="roc", xlabel="probability of false alarm",
                    ylabel="probability of detection", logx=True)
    return [TableSpec(name="roc", columns=("gamma_prime", "pfa", "pd"), rows=rows, plot=hint)]


def core_error(cfg: dict, settings: RunSettings) -> List[TableSpec]:
    config = build_channel_config(cfg)
    params = build_link_params(cfg, config)
    thresholds = optimal_thresholds(params)
    slot_rows = []
    for j in range(1, params.i + 1):
        stats = hypothesis_stats(params, j)
        thr = thresholds[j - 1]
        p_d, p_fa = detection_probs(stats, thr.gamma_prime)
        pe = params.beta * (1.0 - p_d) + (1.0 - params.beta) * p_fa
        slot_rows.append((float(j), thr.gamma_prime, p_d, p_fa, pe))
    hint = PlotHint(kind="line", xlabel="slot j", ylabel="probability", logy=False)
    tables = [TableSpec(name="error_slots",
                        columns=("j", "gamma_prime", "pd", "pfa", "pe"),
                        rows=tuple(slot_rows), plot=hint)]

    p_d_avg = float(np.mean([r[2] for r in slot_rows]))
    p_fa_avg = float(np.mean([r[3] for r in slot_rows]))
    p_e = error_probability(params, thresholds)
    columns = ["pd", "pfa", "pe"]
    values = [p_d_avg, p_fa_avg, p_e]
    if settings.mode in ("sim", "both"):
        stream = RandomStream(seed=settings.seed, stream_id=0)
        result = simulate_link(params, thresholds, settings.trials, stream, settings.sampling)
        columns += ["pe_sim", "se_pe_sim", "n_trials"]
        values += [result.p_e, result.se_p_e, float(result.n_trials)]
    tables.append(TableSpec(name="error_summary", columns=tuple(columns),
                            rows=(tuple(values),), plot=None))
    return tables


def core_threshold_sweep(cfg: dict, settings: RunSettings) -> List[TableSpec]:
    config = build_channel_config(cfg)
    params = build_link_params(cfg, config)
    j = int(cfg.get("slot", params.i))
    stats = hypothesis_stats(params, j)
    thr = optimal_threshold(stats, params.beta)
    lo = stats.mu0 - 4.0 * math.sqrt(stats.sigma2_0)
    hi = stats.mu1 + 4.0 * math.sqrt(stats.sigma2_1)
    n = settings.grid or 1000
    grid = np.linspace(lo, hi, n)
    pe = slot_error_sweep(params, j, grid)
    hint = PlotHint(kind="line", xlabel="decision threshold gamma_prime",
                    ylabel="probability of error", logy=True)
    sweep = TableSpec(name="threshold_sweep", columns=("gamma_prime", "pe"),
                      rows=tuple(zip(grid, pe)), plot=hint)
    pe_opt = float(slot_error_sweep(params, j, np.array([thr.gamma_prime]))[0])
    markers = TableSpec(
        name="threshold_markers",
        columns=("setting", "gamma_prime", "pe"),
        rows=((f"slot{j}", thr.gamma_prime, pe_opt),),
        plot=None,
    )
    return [sweep, markers]


def core_capacity(cfg: dict, settings: RunSettings) -> List[TableSpec]:
    config = build_channel_config(cfg)
    i_max = int(cfg.get("i", LINK_DEFAULTS["i"]))
    rows = []
    for i in range(1, i_max + 1):
        sub = dict(cfg)
        sub["i"] = i
        params = build_link_params(sub, config)
        c, beta_star = capacity(params)
        rows.append((float(i), c, beta_star))
    hint = PlotHint(kind="line", xlabel="slots i", ylabel="capacity (bits/slot)")
    return [TableSpec(name="capacity", columns=("i", "capacity_bits", "beta"),
                      rows=tuple(rows), plot=hint)]


_CUSTOM_KINDS = {
    "fht-pdf": core_fht_pdf,
    "arrival": core_arrival,
    "roc": core_roc,
    "error": core_error,
    "threshold-sweep": core_threshold_sweep,
    "capacity": core_capacity,
}


# ------------------------------------------------------ particle validate

@dataclass(frozen=True)
class ValidationReport:
    case: str
    k: int
    n_particles: int
    ks_stat: float
    l1: float
    absorbed_sim: float
    absorbed_analytic: float
    ks_tol: float
    passed: bool


def _analytic_cdf_grid(config: ChannelConfig, k: int, t_max: float):
    grid = np.geomspace(1e-12, t_max, 4000)
    pdf = np.asarray(fht_pdf(config, k, grid))
    cdf = np.concatenate(([0.0], cumulative_trapezoid(pdf, grid)))
    return grid, np.clip(cdf, 0.0, 1.0)


def validate_case(config: ChannelConfig, k: int, spec: SimSpec,
                  ks_tol: float = KS_TOLERANCE) -> ValidationReport:
    """Compare an empirical hitting-time sample against the analytic law.

    The comparison uses unconditional sub-distributions on [0, t_max]: both
    sides carry the never-absorbed mass, so heavy tails are not renormalized
    away. KS decides pass/fail; L1 over log-spaced bins and the absorbed
    fractions are reported as diagnostics.
    """
    sample = simulate_hits(config, k, spec)
    n = sample.n_particles
    hits = np.sort(sample.hit_times)
    grid, cdf = _analytic_cdf_grid(config, k, spec.t_max)

    f_at_hits = np.interp(hits, grid, cdf)
    idx = np.arange(1, hits.size + 1)
    if hits.size:
        ks_stat = float(
            np.max(np.maximum(np.abs(f_at_hits - idx / n), np.abs(f_at_hits - (idx - 1) / n)))
        )
    else:
        ks_stat = 0.0
    absorbed_analytic = float(cdf[-1])
    absorbed_sim = hits.size / n
    ks_stat = max(ks_stat, abs(absorbed_sim - absorbed_analytic))

    edges = np.geomspace(max(spec.dt * 1e-3, 1e-12), spec.t_max, 33)
    hist, _ = np.histogram(np.clip(hits, edges[0], edges[-1]), bins=edges)
    p_sim = hist / n
    p_ana = np.diff(np.interp(edges, grid, cdf))
    l1 = float(np.sum(np.abs(p_sim - p_ana)) + abs(absorbed_sim - absorbed_analytic))

    return ValidationReport(
        case=config.mobility_case.value,
        k=k,
        n_particles=n,
        ks_stat=ks_stat,
        l1=l1,
        absorbed_sim=absorbed_sim,
        absorbed_analytic=absorbed_analytic,
        ks_tol=ks_tol,
        passed=bool(ks_stat < ks_tol),
    )


def core_particle_validate(cfg: dict, settings: RunSettings) -> Tuple[List[TableSpec], ValidationReport]:
    case = cfg.get("case")
    if case is not None:
        config = make_config(
            str(case),
            v=float(cfg.get("v", SCENARIO_DEFAULTS["v"])),
            T=float(cfg.get("T", SCENARIO_DEFAULTS["T"])),
            D_m=float(cfg.get("D_m", SCENARIO_DEFAULTS["D_m"])),
        )
    else:
        config = build_channel_config(cfg)
    k = int(cfg.get("k", 0))
    spec = default_sim_spec(config, settings.particles, settings.seed)
    if settings.dt is not None or settings.t_max is not None:
        spec = SimSpec(
            n_particles=spec.n_particles,
            dt=settings.dt if settings.dt is not None else spec.dt,
            t_max=settings.t_max if settings.t_max is not None else spec.t_max,
            seed=spec.seed,
            bridge_correction=spec.bridge_correction,
        )
    report = validate_case(config, k, spec)
    rows = (
        ("case", report.case, ""),
        ("k", float(report.k), ""),
        ("n_particles", float(report.n_particles), ""),
        ("ks_stat", report.ks_stat, f"< {report.ks_tol}"),
        ("l1", report.l1, ""),
        ("absorbed_sim", report.absorbed_sim, ""),
        ("absorbed_analytic", report.absorbed_analytic, ""),
        ("passed", float(report.passed), ""),
    )
    table = TableSpec(name="validate", columns=("metric", "value", "target"), rows=rows, plot=None)
    return [table], report


# -------------------------------------------------------------- argparse

def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", type=str, default=None, help="flat key = value config file")
    sub.add_argument("--out", type=str, default="mcflow-out", help="output directory root")
    sub.add_argument("--seed", type=int, default=1234, help="base RNG seed (u64)")
    sub.add_argument("--grid", type=int, default=None, help="sweep resolution override")
    sub.add_argument("--no-plot", action="store_true", help="skip PNG rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcflow",
        description="Flow-driven molecular communication analysis toolkit",
    )
    parser.add_argument("--version", action="version", version=f"mcflow {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("fht-pdf", help="first hitting time pdf curves")
    _add_common(p)
    p.add_argument("--k", type=str, default=None, help="comma list of release slots")
    p.add_argument("--t-max", type=float, default=None, help="time axis end (s)")
    p.add_argument("--mode", choices=("analytic", "sim", "both"), default="analytic")
    p.add_argument("--particles", type=int, default=20_000)
    p.add_argument("--dt", type=float, default=None, help="simulation step (s)")

    p = commands.add_parser("arrival", help="arrival probability table")
    _add_common(p)
    p.add_argument("--release-slot", type=int, default=None)
    p.add_argument("--horizon", type=int, default=None)

    p = commands.add_parser("roc", help="common-threshold detection sweep")
    _add_common(p)
    p.add_argument("--gamma-min", type=float, default=None)
    p.add_argument("--gamma-max", type=float, default=None)

    p = commands.add_parser("error", help="per-slot and average error probability")
    _add_common(p)
    p.add_argument("--mode", choices=("analytic", "sim", "both"), default="analytic")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--sampling", choices=("gaussian-matched", "binomial-exact"),
                   default="gaussian-matched")

    p = commands.add_parser("threshold-sweep", help="slot error rate vs threshold")
    _add_common(p)
    p.add_argument("--slot", type=int, default=None)

    p = commands.add_parser("capacity", help="capacity vs number of slots")
    _add_common(p)

    p = commands.add_parser("particle-validate", help="random-walk check of the analytic pdf")
    _add_common(p)
    p.add_argument("--case", type=str, default=None,
                   choices=("fixedBoth", "fixedTx_mobileRx", "mobileTx_fixedRx", "mobileBoth"))
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--particles", type=int, default=100_000)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)

    p = commands.add_parser("preset", help="run a canned experiment")
    _add_common(p)
    p.add_argument("name", type=str, help=f"one of: {', '.join(PRESET_NAMES)}")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--mode", choices=("analytic", "sim", "both"), default="analytic")

    return parser


def _load_cfg(args) -> dict:
    cfg = {}
    if args.config:
        cfg = parse_config_file(args.config)
    return cfg


def _settings_from(args, cfg: dict) -> RunSettings:
    return RunSettings(
        seed=int(cfg.get("seed", args.seed)),
        grid=args.grid,
        trials=int(getattr(args, "trials", 100_000)),
        particles=int(getattr(args, "particles", 100_000)),
        dt=getattr(args, "dt", None),
        t_max=getattr(args, "t_max", None),
        mode=getattr(args, "mode", "analytic"),
        sampling=getattr(args, "sampling", "gaussian-matched"),
    )


def _meta_base(args, cfg: dict, config: Optional[ChannelConfig], settings: RunSettings) -> dict:
    meta = {
        "command": args.command,
        "seed": settings.seed,
        "grid": settings.grid,
        "mode": settings.mode,
    }
    if config is not None:
        meta["config"] = _resolved_config(cfg, config)
    else:
        meta["config"] = dict(cfg)
    return meta


def _run_core(args, kind: str) -> int:
    cfg = _load_cfg(args)
    for flag in ("k", "t_max", "release_slot", "horizon", "gamma_min", "gamma_max", "slot"):
        value = getattr(args, flag, None)
        if value is not None:
            cfg[flag] = [int(x) for x in value.split(",")] if flag == "k" and isinstance(value, str) else value
    settings = _settings_from(args, cfg)
    t0 = time.perf_counter()
    tables = _CUSTOM_KINDS[kind](cfg, settings)
    runtime = time.perf_counter() - t0
    config = build_channel_config(cfg)
    meta = _meta_base(args, cfg, config, settings)
    meta["kind"] = kind
    outdir = Path(args.out) / kind.replace("-", "_")
    _write_outputs(tables, outdir, meta, runtime, args.no_plot)
    print(f"{kind}: wrote {len(tables)} table(s) to {outdir} in {runtime:.2f} s")
    params_advisories = ()
    if kind in ("roc", "error", "threshold-sweep", "capacity"):
        params_advisories = validity_advisories(build_link_params(cfg, config))
    for note in params_advisories:
        print(f"advisory: {note}", file=sys.stderr)
    return 0


def _cmd_particle_validate(args) -> int:
    cfg = _load_cfg(args)
    if args.case is not None:
        cfg["case"] = args.case
    if args.k is not None:
        cfg["k"] = args.k
    settings = _settings_from(args, cfg)
    t0 = time.perf_counter()
    tables, report = core_particle_validate(cfg, settings)
    runtime = time.perf_counter() - t0
    meta = {
        "command": "particle-validate",
        "seed": settings.seed,
        "config": dict(cfg),
        "case": report.case,
        "k": report.k,
        "particles": report.n_particles,
    }
    outdir = Path(args.out) / "particle_validate"
    _write_outputs(tables, outdir, meta, runtime, args.no_plot)
    status = "PASS" if report.passed else "FAIL"
    print(
        f"particle-validate {report.case} k={report.k}: "
        f"KS={report.ks_stat:.5f} (tol {report.ks_tol}), L1={report.l1:.5f}, "
        f"absorbed sim/analytic = {report.absorbed_sim:.5f}/{report.absorbed_analytic:.5f} "
        f"[{status}] ({runtime:.1f} s)"
    )
    return 0 if report.passed else 2


def _cmd_preset(args) -> int:
    cfg = _load_cfg(args)
    settings = _settings_from(args, cfg)
    ctx = PresetContext(seed=settings.seed, grid=settings.grid,
                        trials=settings.trials, mode=settings.mode)

    if args.name == "custom":
        if not args.config:
            raise ValueError("preset custom requires --config with a kind = ... entry")
        kind = str(cfg.get("kind", ""))
        if kind not in _CUSTOM_KINDS:
            raise ValueError(
                f"custom config needs kind = one of {', '.join(sorted(_CUSTOM_KINDS))}"
            )
        t0 = time.perf_counter()
        tables = _CUSTOM_KINDS[kind](cfg, settings)
        runtime = time.perf_counter() - t0
        config = build_channel_config(cfg)
        meta = _meta_base(args, cfg, config, settings)
        meta["preset"] = "custom"
        meta["kind"] = kind
        outdir = Path(args.out) / "custom"
        _write_outputs(tables, outdir, meta, runtime, args.no_plot)
        print(f"custom ({kind}): wrote {len(tables)} table(s) to {outdir} in {runtime:.2f} s")
        return 0

    preset = get_preset(args.name)
    t0 = time.perf_counter()
    tables = preset.build(ctx)
    runtime = time.perf_counter() - t0
    meta = {
        "command": "preset",
        "preset": preset.name,
        "description": preset.description,
        "budget_s": preset.budget_s,
        "seed": ctx.seed,
        "grid": ctx.grid,
        "trials": ctx.trials,
        "config": dict(cfg),
    }
    outdir = Path(args.out) / preset.name
    _write_outputs(tables, outdir, meta, runtime, args.no_plot)
    within = "within" if runtime <= preset.budget_s else "OVER"
    print(
        f"{preset.name}: wrote {len(tables)} table(s) to {outdir} "
        f"in {runtime:.2f} s ({within} budget {preset.budget_s:.0f} s)"
    )
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "preset":
            return _cmd_preset(args)
        if args.command == "particle-validate":
            return _cmd_particle_validate(args)
        return _run_core(args, args.command)
    except AccuracyError as exc:
        print(f"error: integration accuracy not reached: {exc}", file=sys.stderr)
        return 3
    except (OSError, IOError) as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
