"""Canned experiment presets: each preset builds the dataset(s) behind one
figure-style study as plain tables, parameterized exactly as documented in
the module-level constants below.

Scenario constants for the hitting-time studies (figs 3-6):
x0_tx = 0, x0_rx = 1 um, D_m = 0.5e-9 m^2/s, D_tx = 1e-10 m^2/s,
D_rx = 0.5e-12 m^2/s, v = 1e-3 m/s, T = 0.3 ms.

Link studies (figs 7-12) use D_m = 5e-10 m^2/s, beta = 0.5, i = 10 slots,
MSI mean 10 and variance 10 unless a preset overrides them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .hitting_time import arrival_probability, fht_pdf
from .link import (
    LinkParams,
    hypothesis_stats,
    link_params_from_config,
    error_probability,
    optimal_threshold,
    optimal_thresholds,
    capacity,
    roc_sweep,
    slot_error_sweep,
    simulate_link,
)
from .numerics import RandomStream
from .scenario import ChannelConfig

__all__ = [
    "PlotHint",
    "TableSpec",
    "PresetContext",
    "ExperimentPreset",
    "PRESET_NAMES",
    "get_preset",
    "make_config",
    "default_link_overrides",
]

X0_TX = 0.0
X0_RX = 1e-6
D_M = 0.5e-9      # m^2/s, same value both parameter sets quote
D_TX_MOBILE = 1e-10
D_RX_MOBILE = 0.5e-12
V_FLOW = 1e-3     # m/s
T_PDF = 0.3e-3    # s, hitting-time studies
PDF_KS = (0, 2, 4, 6, 8, 10)

LINK_BETA = 0.5
LINK_SLOTS = 10
LINK_MU_O = 10.0
LINK_SIGMA2_O = 10.0


@dataclass(frozen=True)
class PlotHint:
    """Rendering hint for a table: simple line chart or paired ROC columns."""

    kind: str = "line"           # line | roc | none
    xlabel: str = ""
    ylabel: str = ""
    logx: bool = False
    logy: bool = False


@dataclass(frozen=True)
class TableSpec:
    name: str
    columns: Tuple[str, ...]
    rows: Tuple[tuple, ...]
    plot: Optional[PlotHint] = None

    def __post_init__(self) -> None:
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"table {self.name}: ragged row")


@dataclass(frozen=True)
class PresetContext:
    """Runtime knobs shared by all presets; seeds only matter for presets
    that run Monte Carlo columns."""

    seed: int = 1234
    grid: Optional[int] = None
    trials: int = 100_000
    mode: str = "analytic"


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    description: str
    budget_s: float
    build: Callable[[PresetContext], List[TableSpec]]


def make_config(
    case: str,
    *,
    v: float,
    T: float,
    D_m: float = D_M,
    D_tx: Optional[float] = None,
    D_rx: Optional[float] = None,
    x0_tx: float = X0_TX,
    x0_rx: float = X0_RX,
) -> ChannelConfig:
    """Build a scenario for one of the four mobility cases with the canonical
    diffusion coefficients; a unit's drift is v when it diffuses, else 0."""
    mobile_tx = case in ("mobileTx_fixedRx", "mobileBoth")
    mobile_rx = case in ("fixedTx_mobileRx", "mobileBoth")
    if case not in ("fixedBoth", "fixedTx_mobileRx", "mobileTx_fixedRx", "mobileBoth"):
        raise ValueError(f"unknown mobility case {case!r}")
    d_tx = (D_TX_MOBILE if mobile_tx else 0.0) if D_tx is None else D_tx
    d_rx = (D_RX_MOBILE if mobile_rx else 0.0) if D_rx is None else D_rx
    return ChannelConfig(
        x0_tx=x0_tx,
        x0_rx=x0_rx,
        D_m=D_m,
        D_tx=d_tx,
        D_rx=d_rx,
        v=v,
        v_tx=v if d_tx > 0.0 else 0.0,
        v_rx=v if d_rx > 0.0 else 0.0,
        T=T,
    )


def default_link_overrides() -> Dict[str, float]:
    return {
        "Q": 30.0,
        "beta": LINK_BETA,
        "i": LINK_SLOTS,
        "mu_o": LINK_MU_O,
        "sigma2_o": LINK_SIGMA2_O,
    }


def _vtag(v: float) -> str:
    return f"v{v:g}"


# ---------------------------------------------------------------- figs 3-5

def _pdf_family(case: str, ctx: PresetContext) -> List[TableSpec]:
    config = make_config(case, v=V_FLOW, T=T_PDF)
    n = ctx.grid or 1200
    t_max = 20.0 * T_PDF
    t = np.linspace(t_max / n, t_max, n)
    columns = ["t_s"] + [f"pdf_k{k}" for k in PDF_KS]
    data = [t] + [fht_pdf(config, k, t) for k in PDF_KS]
    rows = tuple(zip(*(np.asarray(c, dtype=float) for c in data)))
    name = {"fixedTx_mobileRx": "fig3", "mobileTx_fixedRx": "fig4", "mobileBoth": "fig5"}[case]
    hint = PlotHint(kind="line", xlabel="t (s)", ylabel="first hitting time pdf (1/s)")
    return [TableSpec(name=name, columns=tuple(columns), rows=rows, plot=hint)]


def _build_fig3(ctx: PresetContext) -> List[TableSpec]:
    return _pdf_family("fixedTx_mobileRx", ctx)


def _build_fig4(ctx: PresetContext) -> List[TableSpec]:
    return _pdf_family("mobileTx_fixedRx", ctx)


def _build_fig5(ctx: PresetContext) -> List[TableSpec]:
    return _pdf_family("mobileBoth", ctx)


# ------------------------------------------------------------------- fig 6

def _build_fig6(ctx: PresetContext) -> List[TableSpec]:
    cases = ("fixedTx_mobileRx", "mobileTx_fixedRx", "mobileBoth", "fixedBoth")
    speeds = (1e-3, 0.5e-3)
    ks = list(range(0, 11))
    columns = ["k"]
    series = []
    for v in speeds:
        for case in cases:
            config = make_config(case, v=v, T=T_PDF)
            series.append([arrival_probability(config, k + 1, 0) for k in ks])
            columns.append(f"q0_{case}_{_vtag(v)}")
    rows = tuple((float(k), *(s[idx] for s in series)) for idx, k in enumerate(ks))
    hint = PlotHint(kind="line", xlabel="release slot k", ylabel="arrival probability q0", logy=True)
    return [TableSpec(name="fig6", columns=tuple(columns), rows=rows, plot=hint)]


# ------------------------------------------------------------- ROC helpers

def _link_for(config: ChannelConfig, Q: float, *, mu_o: float = LINK_MU_O,
              sigma2_o: float = LINK_SIGMA2_O, beta: float = LINK_BETA,
              i: int = LINK_SLOTS) -> LinkParams:
    return link_params_from_config(config, i=i, Q=Q, beta=beta, mu_o=mu_o, sigma2_o=sigma2_o)


def _roc_columns(tag: str, params: LinkParams, grid: np.ndarray):
    pfa, pd = roc_sweep(params, grid)
    return [(f"pfa_{tag}", pfa), (f"pd_{tag}", pd)]


def _roc_table(name: str, curve_specs, ctx: PresetContext) -> TableSpec:
    """curve_specs: iterable of (tag, LinkParams); one shared threshold axis,
    range 1..80 per the survey convention."""
    n = ctx.grid or 791
    grid = np.linspace(1.0, 80.0, n)
    columns = ["gamma_prime"]
    data = [grid]
    for tag, params in curve_specs:
        for col, values in _roc_columns(tag, params, grid):
            columns.append(col)
            data.append(values)
    rows = tuple(zip(*(np.asarray(c, dtype=float) for c in data)))
    hint = PlotHint(kind="roc", xlabel="probability of false alarm", ylabel="probability of detection", logx=True)
    return TableSpec(name=name, columns=tuple(columns), rows=rows, plot=hint)


def _build_fig7(ctx: PresetContext) -> List[TableSpec]:
    pairs = ((1e-10, 0.5e-12, "Dtx1e-10"), (1e-11, 0.5e-13, "Dtx1e-11"))
    curves = []
    for d_tx, d_rx, dtag in pairs:
        config = make_config("mobileBoth", v=V_FLOW, T=2e-3, D_tx=d_tx, D_rx=d_rx)
        for Q in (30.0, 60.0, 90.0):
            curves.append((f"Q{Q:g}_{dtag}", _link_for(config, Q)))
    return [_roc_table("fig7", curves, ctx)]


def _build_fig8(T: float, ctx: PresetContext, name: str) -> List[TableSpec]:
    curves = []
    for case in ("mobileBoth", "fixedBoth"):
        for v in (1e-3, 0.0):
            config = make_config(case, v=v, T=T)
            curves.append((f"{case}_{_vtag(v)}", _link_for(config, 30.0)))
    return [_roc_table(name, curves, ctx)]


def _build_fig9a(ctx: PresetContext) -> List[TableSpec]:
    curves = []
    for v in (0.0, 5e-5, 2e-4):
        config = make_config("fixedTx_mobileRx", v=v, T=2e-3)
        curves.append((_vtag(v), _link_for(config, 30.0)))
    return [_roc_table("fig9a", curves, ctx)]


def _build_fig9b(ctx: PresetContext) -> List[TableSpec]:
    curves = []
    for v in (0.0, 1e-4, 3e-4, 1e-3):
        config = make_config("mobileTx_fixedRx", v=v, T=2e-3)
        curves.append((_vtag(v), _link_for(config, 30.0)))
    return [_roc_table("fig9b", curves, ctx)]


# ------------------------------------------------------------------ fig 10

_FIG10_T = 10e-3
_FIG10_SIGMAS = tuple(float(s) for s in range(1, 41))
_FIG10_SIM_SIGMAS = (1.0, 10.0, 20.0, 30.0, 40.0)


def _fig10_scenarios(panel: str):
    if panel == "a":
        return (
            ("mobileBoth_v0.001", make_config("mobileBoth", v=1e-3, T=_FIG10_T)),
            ("fixedBoth_v0.001", make_config("fixedBoth", v=1e-3, T=_FIG10_T)),
            ("fixedBoth_v0", make_config("fixedBoth", v=0.0, T=_FIG10_T)),
            ("mobileTx_fixedRx_v0.0001", make_config("mobileTx_fixedRx", v=1e-4, T=_FIG10_T)),
            ("mobileTx_fixedRx_v0", make_config("mobileTx_fixedRx", v=0.0, T=_FIG10_T)),
        )
    return (
        ("fixedTx_mobileRx_v0", make_config("fixedTx_mobileRx", v=0.0, T=_FIG10_T)),
        ("fixedTx_mobileRx_v5e-05", make_config("fixedTx_mobileRx", v=5e-5, T=_FIG10_T)),
        ("fixedTx_mobileRx_v0.0002", make_config("fixedTx_mobileRx", v=2e-4, T=_FIG10_T)),
    )


def _build_fig10(panel: str, ctx: PresetContext) -> List[TableSpec]:
    scenarios = _fig10_scenarios(panel)
    name = f"fig10{panel}"

    columns = ["sigma2_o"]
    data = [np.asarray(_FIG10_SIGMAS)]
    for tag, config in scenarios:
        pes = []
        for s2 in _FIG10_SIGMAS:
            params = _link_for(config, 30.0, mu_o=0.0, sigma2_o=s2)
            pes.append(error_probability(params, optimal_thresholds(params)))
        columns.append(f"pe_{tag}")
        data.append(np.asarray(pes))
    rows = tuple(zip(*(np.asarray(c, dtype=float) for c in data)))
    hint = PlotHint(kind="line", xlabel="MSI variance sigma2_o", ylabel="probability of error", logy=True)
    analytic = TableSpec(name=name, columns=tuple(columns), rows=rows, plot=hint)

    sim_columns = ["sigma2_o"]
    sim_data = [np.asarray(_FIG10_SIM_SIGMAS)]
    stream_counter = 0 if panel == "a" else 1000
    for tag, config in scenarios:
        pes, ses = [], []
        for s2 in _FIG10_SIM_SIGMAS:
            params = _link_for(config, 30.0, mu_o=0.0, sigma2_o=s2)
            thresholds = optimal_thresholds(params)
            stream = RandomStream(seed=ctx.seed, stream_id=stream_counter)
            stream_counter += 1
            result = simulate_link(params, thresholds, ctx.trials, stream, "gaussian-matched")
            pes.append(result.p_e)
            ses.append(result.se_p_e)
        sim_columns.extend([f"pe_sim_{tag}", f"se_pe_sim_{tag}"])
        sim_data.extend([np.asarray(pes), np.asarray(ses)])
    sim_rows = tuple(zip(*(np.asarray(c, dtype=float) for c in sim_data)))
    sim = TableSpec(name=f"{name}_sim", columns=tuple(sim_columns), rows=sim_rows, plot=None)
    return [analytic, sim]


# ------------------------------------------------------------------ fig 11

def _build_fig11(ctx: PresetContext) -> List[TableSpec]:
    config = make_config("mobileBoth", v=V_FLOW, T=10e-3)
    j = 10
    n = ctx.grid or 1000
    settings = []
    for msi in (1.0, 40.0):
        params = _link_for(config, 120.0, mu_o=msi, sigma2_o=msi)
        stats = hypothesis_stats(params, j)
        thr = optimal_threshold(stats, params.beta)
        lo = stats.mu0 - 4.0 * math.sqrt(stats.sigma2_0)
        hi = stats.mu1 + 4.0 * math.sqrt(stats.sigma2_1)
        settings.append((msi, params, stats, thr, lo, hi))

    grid = np.linspace(min(s[4] for s in settings), max(s[5] for s in settings), n)
    columns = ["gamma_prime"]
    data = [grid]
    markers = []
    for msi, params, stats, thr, _, _ in settings:
        columns.append(f"pe_msi{msi:g}")
        data.append(slot_error_sweep(params, j, grid))
        pe_opt = float(slot_error_sweep(params, j, np.array([thr.gamma_prime]))[0])
        markers.append((f"msi{msi:g}", thr.gamma_prime, pe_opt))
    rows = tuple(zip(*(np.asarray(c, dtype=float) for c in data)))
    hint = PlotHint(kind="line", xlabel="decision threshold gamma_prime", ylabel="probability of error", logy=True)
    sweep = TableSpec(name="fig11", columns=tuple(columns), rows=rows, plot=hint)
    marker_table = TableSpec(
        name="fig11_markers",
        columns=("setting", "gamma_prime", "pe"),
        rows=tuple(markers),
        plot=None,
    )
    return [sweep, marker_table]


# ------------------------------------------------------------------ fig 12

_FIG12_T = 10e-3


def _fig12_scenarios(panel: str):
    if panel == "a":
        return (
            ("mobileBoth_v0.001", make_config("mobileBoth", v=1e-3, T=_FIG12_T)),
            ("fixedBoth_v0.001", make_config("fixedBoth", v=1e-3, T=_FIG12_T)),
            ("fixedBoth_v0", make_config("fixedBoth", v=0.0, T=_FIG12_T)),
        )
    return (
        ("mobileTx_fixedRx_v0.0001", make_config("mobileTx_fixedRx", v=1e-4, T=_FIG12_T)),
        ("mobileTx_fixedRx_v0", make_config("mobileTx_fixedRx", v=0.0, T=_FIG12_T)),
    )


def _build_fig12(panel: str, ctx: PresetContext) -> List[TableSpec]:
    sigmas = _FIG10_SIGMAS
    columns = ["sigma2_o"]
    data = [np.asarray(sigmas)]
    for tag, config in _fig12_scenarios(panel):
        caps, betas = [], []
        for s2 in sigmas:
            params = _link_for(config, 60.0, sigma2_o=s2)
            c, b = capacity(params)
            caps.append(c)
            betas.append(b)
        columns.extend([f"capacity_bits_{tag}", f"beta_{tag}"])
        data.extend([np.asarray(caps), np.asarray(betas)])
    rows = tuple(zip(*(np.asarray(c, dtype=float) for c in data)))
    hint = PlotHint(kind="line", xlabel="MSI variance sigma2_o", ylabel="capacity (bits/slot)")
    return [TableSpec(name=f"fig12{panel}", columns=tuple(columns), rows=rows, plot=hint)]


def _registry() -> Dict[str, ExperimentPreset]:
    entries = [
        ExperimentPreset("fig3", "hitting-time pdf family, fixed TX / mobile RX", 60.0, _build_fig3),
        ExperimentPreset("fig4", "hitting-time pdf family, mobile TX / fixed RX", 60.0, _build_fig4),
        ExperimentPreset("fig5", "hitting-time pdf family, mobile TX and RX", 60.0, _build_fig5),
        ExperimentPreset("fig6", "arrival probability vs release slot, all cases, two flow speeds", 120.0, _build_fig6),
        ExperimentPreset("fig7", "ROC sweep, mobile TX and RX, budgets 30/60/90, two diffusion pairs", 120.0, _build_fig7),
        ExperimentPreset("fig8a", "ROC sweep at T = 1 ms, mobile-vs-fixed with and without flow", 120.0,
                         lambda ctx: _build_fig8(1e-3, ctx, "fig8a")),
        ExperimentPreset("fig8b", "ROC sweep at T = 2 ms, mobile-vs-fixed with and without flow", 120.0,
                         lambda ctx: _build_fig8(2e-3, ctx, "fig8b")),
        ExperimentPreset("fig8c", "ROC sweep at T = 10 ms, mobile-vs-fixed with and without flow", 120.0,
                         lambda ctx: _build_fig8(10e-3, ctx, "fig8c")),
        ExperimentPreset("fig9a", "ROC sweep, fixed TX / mobile RX, flow 0 / 5e-5 / 2e-4", 120.0, _build_fig9a),
        ExperimentPreset("fig9b", "ROC sweep, mobile TX / fixed RX, flow 0 / 1e-4 / 3e-4 / 1e-3", 120.0, _build_fig9b),
        ExperimentPreset("fig10a", "error rate vs MSI variance, mobile and fixed scenarios, with Monte Carlo check", 240.0,
                         lambda ctx: _build_fig10("a", ctx)),
        ExperimentPreset("fig10b", "error rate vs MSI variance, fixed TX / mobile RX flows, with Monte Carlo check", 240.0,
                         lambda ctx: _build_fig10("b", ctx)),
        ExperimentPreset("fig11", "slot-10 error rate vs decision threshold with optimal-threshold markers", 60.0, _build_fig11),
        ExperimentPreset("fig12a", "capacity vs MSI variance, mobile TX and RX vs fixed", 240.0,
                         lambda ctx: _build_fig12("a", ctx)),
        ExperimentPreset("fig12b", "capacity vs MSI variance, mobile TX / fixed RX flows", 240.0,
                         lambda ctx: _build_fig12("b", ctx)),
    ]
    return {p.name: p for p in entries}


_PRESETS = _registry()
PRESET_NAMES = tuple(_PRESETS) + ("custom",)


def get_preset(name: str) -> ExperimentPreset:
    try:
        return _PRESETS[name]
    except KeyError:
        raise ValueError(
            f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}"
        ) from None
