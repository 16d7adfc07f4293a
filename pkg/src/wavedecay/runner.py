"""Turn a RunConfig into a simulation, a certificate and a report."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .analysis import DecayReport, check_bound
from .certificate import DampingBounds, DecayCertificate, Provenance, SpectralGap, initial_energy_bound, maximize_F
from .config import Profile, RunConfig
from .errors import ConfigError
from .spectral import DomainSpec, Grid, lambda1_box, lambda1_discrete
from .wavesim import DampingSpec, EnergyTrace, WaveProblem, simulate, simulate_counterexample, sine_mode

TRACE_HEADER = ("t", "energy_total", "energy_grad", "energy_v")


@dataclass
class RunResult:
    trace: EnergyTrace
    report: DecayReport
    certificate: DecayCertificate | None
    summary: dict


def build_grid(cfg: RunConfig) -> Grid:
    return Grid(DomainSpec(cfg.lengths, cfg.offset), cfg.points)


def build_damping(cfg: RunConfig, grid: Grid) -> DampingSpec:
    bounds = DampingBounds(*cfg.declared_bounds) if cfg.declared_bounds else None
    p = cfg.damping
    if cfg.damping_kind == "constant":
        if bounds is None and p["a"] <= 0:
            raise ConfigError("constant damping must be positive to be certified")
        return DampingSpec.constant(p["a"], bounds)
    if cfg.damping_kind == "sinusoidal":
        if bounds is None and not p["c0"] - abs(p["c1"]) > 0:
            raise ConfigError("sinusoidal damping must stay positive (c0 > |c1|)")
        return DampingSpec.sinusoidal(p["c0"], p["c1"], p["omega"], p["spatial"], bounds)
    if cfg.damping_kind == "tabulated":
        try:
            table = np.loadtxt(p["table"], delimiter=",", comments="#", ndmin=2)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read damping table {p['table']}: {exc}") from None
        n_nodes = math.prod(grid.points)
        if table.shape[1] - 1 not in (n_nodes, math.prod(grid.full_shape)):
            raise ConfigError(
                f"damping table rows need 1 + {n_nodes} (or 1 + {math.prod(grid.full_shape)}) columns, "
                f"got {table.shape[1]}"
            )
        if bounds is None and not table[:, 1:].min() > 0:
            raise ConfigError("tabulated damping must be positive to be certified")
        return DampingSpec.tabulated(table[:, 0], table[:, 1:], bounds)
    spec = DampingSpec.nonlinear(p["m_kind"], p.get("m0"), p.get("m1"))
    if bounds is not None:
        spec = DampingSpec(spec.kind, spec.params, bounds)
    return spec


def _profile(grid: Grid, prof: Profile) -> np.ndarray:
    if prof.kind == "zero":
        return np.zeros(grid.full_shape)
    return sine_mode(grid, prof.amplitude, prof.mode)


def analytic_initial_energy(cfg: RunConfig, eps: float) -> float | None:
    """E(0) from closed-form integrals of the sine/zero initial profiles."""
    norm = math.prod(L / 2.0 for L in cfg.lengths)

    def coef(p: Profile) -> float:
        return 0.0 if p.kind == "zero" else p.amplitude

    a0, a1 = coef(cfg.u0), coef(cfg.u1)
    grad = a0 * a0 * norm * sum((cfg.u0.mode * math.pi / L) ** 2 for L in cfg.lengths)
    if cfg.u0.mode == cfg.u1.mode:
        vel = (a1 + eps * a0) ** 2 * norm
    else:
        vel = (a1 * a1 + eps * eps * a0 * a0) * norm
    return initial_energy_bound(grad, vel)


def resolve_gap(cfg: RunConfig, grid: Grid) -> SpectralGap:
    if cfg.spectral_source == "value":
        return SpectralGap(cfg.lambda1, Provenance.USER_SUPPLIED)
    if cfg.spectral_source == "discrete":
        return SpectralGap(lambda1_discrete(grid), Provenance.DISCRETE)
    return SpectralGap(lambda1_box(cfg.lengths), Provenance.ANALYTIC)


def run(cfg: RunConfig) -> RunResult:
    if cfg.problem == "counterexample":
        return _run_counterexample(cfg)

    grid = build_grid(cfg)
    damping = build_damping(cfg, grid)
    if damping.declared_bounds is None:
        raise ConfigError("damping bounds are required to build a certificate")
    problem = WaveProblem(grid, damping, _profile(grid, cfg.u0), _profile(grid, cfg.u1),
                          cfg.t_end, cfg.cfl_factor, cfg.dt)
    gap = resolve_gap(cfg, grid)
    cert = maximize_F(damping.declared_bounds, gap)
    eps = cert.eps_star if cfg.eps_policy == "certificate" else cfg.eps_value
    if eps > damping.declared_bounds.sigma0:
        raise ConfigError(f"eps.value={eps!r} exceeds sigma0={damping.declared_bounds.sigma0!r}")

    trace = simulate(problem, eps, cfg.sample_every)
    report = check_bound(trace, cert.alpha_star, cfg.bound_tol, cfg.fit_window)

    e0_analytic = analytic_initial_energy(cfg, eps)
    analytic_ratio = None
    if e0_analytic:
        ratios = trace.energy_total / (e0_analytic * np.exp(-2.0 * cert.alpha_star * trace.t))
        analytic_ratio = float(ratios.max())

    summary = {
        "problem": "standard",
        "certificate": cert.to_dict(),
        "decay": report.to_dict(),
        "eps_used": eps,
        "initial_energy_trace": float(trace.energy_total[0]),
        "initial_energy_analytic": e0_analytic,
        "max_bound_ratio_analytic": analytic_ratio,
        "run": _run_info(trace, grid.points, cfg),
    }
    return RunResult(trace, report, cert, summary)


def _run_counterexample(cfg: RunConfig) -> RunResult:
    eps = cfg.eps_value if cfg.eps_policy == "value" else 0.0
    trace = simulate_counterexample(cfg.points[0], str(cfg.t_end), cfg.counterexample_delta,
                                    str(cfg.cfl_factor), cfg.sample_every, str(eps))
    report = check_bound(trace, 0.0, cfg.bound_tol, cfg.fit_window)
    t = trace.t
    late = t >= 1.0
    fit_err = None
    if np.any(late):
        fit_err = float(np.max(np.abs(trace.energy_grad[late] / (t[late] ** 2 / 3.0) - 1.0)))
    summary = {
        "problem": "counterexample",
        "certificate": None,
        "decay": report.to_dict(),
        "eps_used": eps,
        "energy_grad_vs_t2_over_3_max_rel_dev": fit_err,
        "initial_energy_trace": float(trace.energy_total[0]),
        "run": _run_info(trace, cfg.points[:1], cfg),
    }
    return RunResult(trace, report, None, summary)


def _run_info(trace: EnergyTrace, points, cfg: RunConfig) -> dict:
    return {
        "t_end": cfg.t_end,
        "dt": trace.dt,
        "steps": trace.steps,
        "points": list(points),
        "samples": len(trace),
        "cfl_factor": cfg.cfl_factor,
    }


def trace_csv(trace: EnergyTrace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for row in trace.samples:
        writer.writerow([format(v, ".17g") for v in row])
    return buf.getvalue()


def read_trace_csv(text: str, eps_used: float = float("nan")) -> EnergyTrace:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != TRACE_HEADER:
        raise ValueError("not an energy trace CSV")
    arr = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, 4)
    return EnergyTrace(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], eps_used)


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"
