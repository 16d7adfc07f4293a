"""Finite-difference integration of u_tt - Δu + σ u_t = 0 with energy sampling.

The update is the leapfrog scheme with the damping term centred in time,

    (u⁺ - 2u + u⁻)/dt² - Δ_h u + σ (u⁺ - u⁻)/(2 dt) = 0,

which is solved nodewise for u⁺.  Arrays always carry the boundary layer,
so the full-grid shape is (n + 2,) or (nx + 2, ny + 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .certificate import DampingBounds
from .errors import CFLError, DampingBoundsError, InvalidParameterError
from .spectral import DomainSpec, Grid

# relative slack when testing σ against its declared bounds
BOUNDS_SLACK = 1e-12


def _two_plus_sin(u):
    return 2.0 + np.sin(u)


@dataclass(frozen=True)
class DampingSpec:
    """Damping coefficient σ(x, t), or m(u) for the nonlinear variant.

    Use the classmethod constructors.  ``declared_bounds`` is checked at every
    step; ``None`` switches the check off (undamped runs, the growth example).
    """

    kind: str
    params: dict = field(default_factory=dict)
    declared_bounds: DampingBounds | None = None

    @classmethod
    def constant(cls, a: float, bounds: DampingBounds | None = None) -> "DampingSpec":
        a = float(a)
        if bounds is None and a > 0:
            bounds = DampingBounds(a, a)
        return cls("constant", {"a": a}, bounds)

    @classmethod
    def sinusoidal(cls, c0: float, c1: float, omega: float, spatial: bool = False,
                   bounds: DampingBounds | None = None) -> "DampingSpec":
        """σ = c0 + c1 sin(ωt) [Π_k cos(π x_k / L_k) if spatial]."""
        if bounds is None:
            bounds = DampingBounds(c0 - abs(c1), c0 + abs(c1))
        return cls("sinusoidal", {"c0": float(c0), "c1": float(c1), "omega": float(omega),
                                  "spatial": bool(spatial)}, bounds)

    @classmethod
    def tabulated(cls, times, values, bounds: DampingBounds | None = None) -> "DampingSpec":
        """Frame k holds nodal values used on [times[k], times[k+1])."""
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.size == 0 or values.shape[0] != times.size:
            raise InvalidParameterError("tabulated damping needs one value frame per time")
        if np.any(np.diff(times) <= 0):
            raise InvalidParameterError("tabulated frame times must be strictly increasing")
        if bounds is None:
            bounds = DampingBounds(float(values.min()), float(values.max()))
        return cls("tabulated", {"times": times, "values": values}, bounds)

    @classmethod
    def nonlinear(cls, m_kind: str = "two_plus_sin", m0: float | None = None,
                  m1: float | None = None) -> "DampingSpec":
        """Nodewise m(u): ``two_plus_sin`` is 2 + sin u, ``rational`` is m0 + (m1-m0) u²/(1+u²)."""
        if m_kind == "two_plus_sin":
            return cls("nonlinear_m", {"m_kind": m_kind}, DampingBounds(1.0, 3.0))
        if m_kind == "rational":
            if m0 is None or m1 is None:
                raise InvalidParameterError("rational m(u) needs m0 and m1")
            return cls("nonlinear_m", {"m_kind": m_kind, "m0": float(m0), "m1": float(m1)},
                       DampingBounds(m0, m1))
        raise InvalidParameterError(f"unknown nonlinear damping kind {m_kind!r}")

    @classmethod
    def function(cls, fn: Callable, bounds: DampingBounds | None = None) -> "DampingSpec":
        """Arbitrary σ(coords, t) evaluated on the full grid."""
        return cls("function", {"fn": fn}, bounds)

    @property
    def is_nonlinear(self) -> bool:
        return self.kind == "nonlinear_m"

    def evaluate(self, grid: Grid, coords: tuple[np.ndarray, ...], t: float, u: np.ndarray) -> np.ndarray:
        p = self.params
        shape = grid.full_shape
        if self.kind == "constant":
            return np.full(shape, p["a"])
        if self.kind == "sinusoidal":
            sigma = p["c1"] * math.sin(p["omega"] * t)
            if p["spatial"]:
                profile = np.ones(shape)
                for x, off, L in zip(coords, grid.domain.offset, grid.domain.lengths):
                    profile = profile * np.cos(math.pi * (x - off) / L)
                return p["c0"] + sigma * profile
            return np.full(shape, p["c0"] + sigma)
        if self.kind == "tabulated":
            k = max(int(np.searchsorted(p["times"], t, side="right")) - 1, 0)
            frame = p["values"][k]
            if frame.size == math.prod(shape):
                return frame.reshape(shape)
            out = np.zeros(shape)
            out[_interior(grid)] = frame.reshape(grid.points)
            return out
        if self.kind == "nonlinear_m":
            if p["m_kind"] == "two_plus_sin":
                return _two_plus_sin(u)
            u2 = u * u
            return p["m0"] + (p["m1"] - p["m0"]) * u2 / (1.0 + u2)
        if self.kind == "function":
            return np.asarray(p["fn"](coords, t), dtype=float) * np.ones(shape)
        raise InvalidParameterError(f"unknown damping kind {self.kind!r}")


def _interior(grid: Grid) -> tuple[slice, ...]:
    return tuple(slice(1, -1) for _ in grid.points)


def _boundary_mask(grid: Grid) -> np.ndarray:
    mask = np.ones(grid.full_shape, dtype=bool)
    mask[_interior(grid)] = False
    return mask


@dataclass
class WaveProblem:
    """Initial-boundary value problem on a uniform grid.

    ``u0`` and ``u1`` are sampled on the full grid.  With ``boundary=None``
    the boundary values are zero and the initial data must vanish there;
    otherwise ``boundary(t)`` returns a full-grid array whose boundary
    entries are imposed at time t.
    """

    grid: Grid
    damping: DampingSpec
    u0: np.ndarray
    u1: np.ndarray
    t_end: float
    cfl_factor: float = 0.9
    dt: float | None = None
    boundary: Callable[[float], np.ndarray] | None = None

    def __post_init__(self):
        shape = self.grid.full_shape
        self.u0 = np.array(self.u0, dtype=float).reshape(shape)
        self.u1 = np.array(self.u1, dtype=float).reshape(shape)
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise InvalidParameterError(f"t_end must be positive, got {self.t_end!r}")
        if not self.cfl_factor > 0:
            raise InvalidParameterError(f"cfl_factor must be positive, got {self.cfl_factor!r}")
        if self.dt is not None and not self.dt > 0:
            raise InvalidParameterError(f"dt must be positive, got {self.dt!r}")
        if self.boundary is None:
            mask = _boundary_mask(self.grid)
            if np.any(self.u0[mask] != 0.0) or np.any(self.u1[mask] != 0.0):
                raise InvalidParameterError("initial data must vanish on the boundary")

    @property
    def domain(self) -> DomainSpec:
        return self.grid.domain

    def stability_limit(self) -> float:
        return min(self.grid.spacing) / math.sqrt(self.grid.dimension)

    def time_step(self) -> tuple[float, int]:
        """(dt, steps) with steps * dt = t_end and dt at most the requested step."""
        target = self.dt if self.dt is not None else self.cfl_factor * self.stability_limit()
        steps = max(1, math.ceil(self.t_end / target * (1.0 - 1e-12)))
        return self.t_end / steps, steps


@dataclass
class WaveState:
    u_prev: np.ndarray
    u_curr: np.ndarray
    t: float
    dt: float


@dataclass
class EnergyTrace:
    """Sampled energies; E_total = ∫|∇u|² + ∫(u_t + εu)²."""

    t: np.ndarray
    energy_total: np.ndarray
    energy_grad: np.ndarray
    energy_v: np.ndarray
    eps_used: float
    dt: float = float("nan")
    steps: int = 0

    @property
    def samples(self) -> list[tuple[float, float, float, float]]:
        return list(zip(self.t.tolist(), self.energy_total.tolist(),
                        self.energy_grad.tolist(), self.energy_v.tolist()))

    def __len__(self) -> int:
        return int(self.t.size)


def discrete_laplacian(u: np.ndarray, grid: Grid) -> np.ndarray:
    """Δ_h u on interior nodes (3-point / 5-point); zero on the boundary layer."""
    out = np.zeros_like(u)
    inner = _interior(grid)
    for axis, h in enumerate(grid.spacing):
        lo = list(inner)
        hi = list(inner)
        lo[axis] = slice(0, -2)
        hi[axis] = slice(2, None)
        out[inner] += (u[tuple(lo)] - 2.0 * u[inner] + u[tuple(hi)]) / (h * h)
    return out


def grad_energy(u: np.ndarray, grid: Grid) -> float:
    """∫|∇u|² from squared forward differences times the cell volume."""
    vol = grid.cell_volume
    return sum(float(np.sum(np.diff(u, axis=k) ** 2)) / (h * h) for k, h in enumerate(grid.spacing)) * vol


def l2_energy(w: np.ndarray, grid: Grid) -> float:
    """∫w² by the nodal rule over interior nodes."""
    return float(np.sum(w[_interior(grid)] ** 2)) * grid.cell_volume


def _coords(problem: WaveProblem) -> tuple[np.ndarray, ...]:
    return problem.grid.coordinates()


def _damping(problem: WaveProblem, coords, t: float, u: np.ndarray) -> np.ndarray:
    sigma = problem.damping.evaluate(problem.grid, coords, t, u)
    bounds = problem.damping.declared_bounds
    if bounds is not None:
        inner = sigma[_interior(problem.grid)]
        slack = BOUNDS_SLACK * max(1.0, bounds.sigma1)
        if not bounds.contains(inner, slack):
            raise DampingBoundsError(
                f"damping range [{inner.min()!r}, {inner.max()!r}] at t={t!r} "
                f"leaves declared bounds [{bounds.sigma0!r}, {bounds.sigma1!r}]"
            )
    return sigma


def _check_cfl(problem: WaveProblem, dt: float) -> None:
    limit = min(problem.cfl_factor, 1.0) * problem.stability_limit()
    if dt > limit * (1.0 + 1e-12):
        raise CFLError(
            f"dt={dt!r} exceeds CFL limit {limit!r} "
            f"(cfl_factor={problem.cfl_factor!r}, h={min(problem.grid.spacing)!r}, d={problem.grid.dimension})"
        )


def _impose_boundary(u: np.ndarray, problem: WaveProblem, t: float) -> np.ndarray:
    mask = _boundary_mask(problem.grid)
    if problem.boundary is None:
        u[mask] = 0.0
    else:
        u[mask] = np.asarray(problem.boundary(t), dtype=float).reshape(u.shape)[mask]
    return u


def _advance(state: WaveState, problem: WaveProblem, coords) -> WaveState:
    dt = state.dt
    sigma = _damping(problem, coords, state.t, state.u_curr)
    half = 0.5 * dt * sigma
    lap = discrete_laplacian(state.u_curr, problem.grid)
    u_next = (2.0 * state.u_curr - state.u_prev + dt * dt * lap + half * state.u_prev) / (1.0 + half)
    t_next = state.t + dt
    _impose_boundary(u_next, problem, t_next)
    return WaveState(state.u_curr, u_next, t_next, dt)


def step(state: WaveState, problem: WaveProblem) -> WaveState:
    """One semi-implicit leapfrog step; raises on CFL or damping-bounds violations."""
    _check_cfl(problem, state.dt)
    return _advance(state, problem, _coords(problem))


def initial_state(problem: WaveProblem) -> WaveState:
    """State (u⁰, u¹) at t = dt from a second-order Taylor start."""
    dt, _ = problem.time_step()
    _check_cfl(problem, dt)
    coords = _coords(problem)
    u0, u1 = problem.u0, problem.u1
    sigma = _damping(problem, coords, 0.0, u0)
    u_first = u0 + dt * u1 + 0.5 * dt * dt * (discrete_laplacian(u0, problem.grid) - sigma * u1)
    _impose_boundary(u_first, problem, dt)
    return WaveState(u0.copy(), u_first, dt, dt)


def simulate(problem: WaveProblem, eps_for_v: float, sample_every: int = 1) -> EnergyTrace:
    """Run to t_end, recording (t, E_total, E_grad, E_v) every ``sample_every`` steps.

    u_t at a sample uses the centred difference across it; t = 0 uses the
    initial velocity and the final sample a second-order backward difference.
    The final time is always sampled.
    """
    if sample_every < 1:
        raise InvalidParameterError("sample_every must be a positive integer")
    if not eps_for_v >= 0:
        raise InvalidParameterError(f"eps_for_v must be nonnegative, got {eps_for_v!r}")
    bounds = problem.damping.declared_bounds
    if bounds is not None and eps_for_v > bounds.sigma0:
        raise InvalidParameterError(f"eps_for_v={eps_for_v!r} exceeds sigma0={bounds.sigma0!r}")

    grid = problem.grid
    coords = _coords(problem)
    dt, steps = problem.time_step()
    eps = float(eps_for_v)
    rows: list[tuple[float, float, float, float]] = []

    def record(t, u, ut):
        eg = grad_energy(u, grid)
        ev = l2_energy(ut + eps * u, grid)
        rows.append((t, eg + ev, eg, ev))

    record(0.0, problem.u0, problem.u1)
    state = initial_state(problem)
    older = problem.u0
    for k in range(1, steps):
        nxt = _advance(state, problem, coords)
        if k % sample_every == 0:
            record(k * dt, state.u_curr, (nxt.u_curr - state.u_prev) / (2.0 * dt))
        older = state.u_prev
        state = nxt
    ut_end = (3.0 * state.u_curr - 4.0 * state.u_prev + older) / (2.0 * dt)
    if steps == 1:
        ut_end = (state.u_curr - state.u_prev) / dt
    record(steps * dt, state.u_curr, ut_end)

    arr = np.array(rows)
    return EnergyTrace(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], eps, dt, steps)


def run_to(problem: WaveProblem, t_stop: float | None = None) -> WaveState:
    """Advance to t_stop (default t_end) and return the final state."""
    dt, steps = problem.time_step()
    if t_stop is not None:
        steps = min(steps, int(round(t_stop / dt)))
    coords = _coords(problem)
    state = initial_state(problem)
    for _ in range(1, steps):
        state = _advance(state, problem, coords)
    return state


# ---------------------------------------------------------------------------
# sample problems


def sine_mode(grid: Grid, amplitude: float = 1.0, mode: int = 1) -> np.ndarray:
    """amplitude · Π_k sin(mode π (x_k - offset_k) / L_k) on the full grid."""
    out = np.full(grid.full_shape, float(amplitude))
    for x, off, L in zip(grid.coordinates(), grid.domain.offset, grid.domain.lengths):
        out = out * np.sin(mode * math.pi * (x - off) / L)
    out[_boundary_mask(grid)] = 0.0
    return out


def damped_mode_exact(x: np.ndarray, t: float, a: float) -> np.ndarray:
    """Exact solution for σ ≡ a < 2π on (0,1), u0 = sin πx, u1 = 0."""
    omega = math.sqrt(math.pi**2 - a * a / 4.0)
    c = a / (2.0 * omega)
    return math.exp(-0.5 * a * t) * (math.cos(omega * t) + c * math.sin(omega * t)) * np.sin(math.pi * x)


def _growth_profile(x):
    return x * x - 3.0 * x + 2.0


def counterexample_residual(x, t):
    """u_tt - u_xx + σ u_t for u = t(x²-3x+2), σ = 2t/(x²-3x+2), term by term.

    Defined for 1 < x < 2 only, where σ is finite.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(x <= 1.0) or np.any(x >= 2.0):
        raise InvalidParameterError("counterexample residual needs 1 < x < 2")
    p = _growth_profile(x)
    u_tt = np.zeros_like(t * p)
    u_xx = 2.0 * t
    sigma = 2.0 * t / p
    u_t = p
    out = u_tt - u_xx + sigma * u_t
    return float(out) if out.ndim == 0 else out


def _exact(value) -> Fraction:
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    return Fraction(str(value))


def simulate_counterexample(points: int = 50, t_end=10, delta=Fraction(1, 1000),
                            cfl_factor=Fraction(9, 10), sample_every: int = 10,
                            eps_for_v=0) -> EnergyTrace:
    """Growth example on [1+δ, 2-δ] with the exact solution imposed at both ends.

    σ = 2t/(x²-3x+2) is negative here, so the scheme amplifies perturbations
    roughly like exp(2t²) and float64 rounding swamps the solution by t ≈ 1.
    The leapfrog update is therefore carried out in exact rational arithmetic
    (same formula as ``step``); energies are converted to float per sample.
    """
    if points < 3:
        raise InvalidParameterError("need at least 3 interior points")
    if sample_every < 1:
        raise InvalidParameterError("sample_every must be a positive integer")
    t_end, delta, cfl, eps = (_exact(v) for v in (t_end, delta, cfl_factor, eps_for_v))
    if not (t_end > 0 and 0 < delta < Fraction(1, 2) and 0 < cfl <= 1 and eps >= 0):
        raise InvalidParameterError("invalid counterexample run parameters")

    h = (1 - 2 * delta) / (points + 1)
    x = [1 + delta + i * h for i in range(points + 2)]
    prof = [xi * xi - 3 * xi + 2 for xi in x]
    steps = math.ceil(t_end / (cfl * h))
    dt = t_end / steps
    inner = range(1, points + 1)

    rows: list[tuple[float, float, float, float]] = []

    def record(t, u, ut):
        eg = sum((b - a) ** 2 for a, b in zip(u, u[1:])) / h
        ev = sum((ut[i] + eps * u[i]) ** 2 for i in inner) * h
        rows.append((float(t), float(eg + ev), float(eg), float(ev)))

    u_prev = [Fraction(0)] * (points + 2)
    u_curr = [dt * pi for pi in prof]
    record(0, u_prev, prof)
    t = dt
    older = u_prev
    for k in range(1, steps):
        nxt = [Fraction(0)] * (points + 2)
        for i in inner:
            half = dt * t / prof[i]
            lap = (u_curr[i - 1] - 2 * u_curr[i] + u_curr[i + 1]) / (h * h)
            nxt[i] = (2 * u_curr[i] - u_prev[i] + dt * dt * lap + half * u_prev[i]) / (1 + half)
        nxt[0], nxt[-1] = (t + dt) * prof[0], (t + dt) * prof[-1]
        if k % sample_every == 0:
            record(t, u_curr, [(a - b) / (2 * dt) for a, b in zip(nxt, u_prev)])
        older, u_prev, u_curr = u_prev, u_curr, nxt
        t += dt
    record(t, u_curr, [(3 * a - 4 * b + c) / (2 * dt) for a, b, c in zip(u_curr, u_prev, older)])

    arr = np.array(rows)
    return EnergyTrace(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], float(eps), float(dt), steps)
