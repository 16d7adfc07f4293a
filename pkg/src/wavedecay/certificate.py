"""Decay certificate for u_tt - Δu + σ u_t = 0 under σ0 <= σ <= σ1.

With v = u_t + ε u the energy ∫(|∇u|² + v²) obeys a Gronwall inequality
whose rate is the common value of two coefficients f and g.  Balancing them
through η leaves a one-variable rate function

    F(ε) = σ0/2 - sqrt((σ0 - 2ε)² λ1² + ε² (σ1 - ε)² λ1) / (2 λ1)

whose maximiser over (0, σ0] gives the certified exponent α*.  The sign of
F' equals the sign of a cubic in ε, so the maximiser is one of the cubic's
real roots; these are found by bracketed bisection and Newton polishing.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConsistencyError, InvalidParameterError

# certificate identities are checked to this relative accuracy
IDENTITY_RTOL = 1e-10
# root residuals, relative to the cubic's coefficient scale
ROOT_RTOL = 1e-12
# D within this fraction of 3σ1² + 24λ1 counts as the bifurcation point
BIFURCATION_RTOL = 1e-12
# two maxima whose F values agree to this relative accuracy are a tie
TIE_RTOL = 1e-12


class Regime(str, enum.Enum):
    UNIQUE_MAX = "unique_max"
    BIFURCATION = "bifurcation"
    TWO_MAXIMA = "two_maxima"


class Provenance(str, enum.Enum):
    ANALYTIC = "analytic"
    DISCRETE = "discrete"
    USER_SUPPLIED = "user-supplied"


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be finite, got {value!r}")
    return value


def _require_positive(name: str, value: float) -> float:
    value = _require_finite(name, value)
    if value <= 0.0:
        raise InvalidParameterError(f"{name} must be positive, got {value!r}")
    return value


@dataclass(frozen=True)
class DampingBounds:
    """Lower and upper bounds on the damping coefficient."""

    sigma0: float
    sigma1: float

    def __post_init__(self):
        s0 = _require_positive("sigma0", self.sigma0)
        s1 = _require_positive("sigma1", self.sigma1)
        if s1 < s0:
            raise InvalidParameterError("sigma1 < sigma0")
        object.__setattr__(self, "sigma0", s0)
        object.__setattr__(self, "sigma1", s1)

    def contains(self, values, slack: float = 0.0) -> bool:
        """True when every value lies in [sigma0 - slack, sigma1 + slack]."""
        arr = np.asarray(values, dtype=float)
        return bool(np.all(arr >= self.sigma0 - slack) and np.all(arr <= self.sigma1 + slack))


@dataclass(frozen=True)
class SpectralGap:
    """First Dirichlet eigenvalue of -Δ and where it came from."""

    lambda1: float
    provenance: Provenance = Provenance.USER_SUPPLIED

    def __post_init__(self):
        object.__setattr__(self, "lambda1", _require_positive("lambda1", self.lambda1))
        object.__setattr__(self, "provenance", Provenance(self.provenance))


@dataclass(frozen=True)
class DecayCertificate:
    eps_star: float
    eta_star: float
    alpha_star: float
    discriminant: float
    regime: Regime
    critical_points: tuple[float, ...]
    f_at_star: float
    g_at_star: float
    bounds: DampingBounds
    gap: SpectralGap
    # (ε, F(ε)) for every local maximum of F inside (0, σ0]
    local_maxima: tuple[tuple[float, float], ...] = field(default=())
    tie_broken: bool = False

    def to_dict(self) -> dict:
        return {
            "sigma0": self.bounds.sigma0,
            "sigma1": self.bounds.sigma1,
            "lambda1": self.gap.lambda1,
            "lambda1_provenance": self.gap.provenance.value,
            "eps_star": self.eps_star,
            "eta_star": self.eta_star,
            "alpha_star": self.alpha_star,
            "discriminant": self.discriminant,
            "regime": self.regime.value,
            "critical_points": list(self.critical_points),
            "f_at_star": self.f_at_star,
            "g_at_star": self.g_at_star,
            "local_maxima": [list(m) for m in self.local_maxima],
            "tie_broken": self.tie_broken,
        }


# ---------------------------------------------------------------------------
# closed forms


def f_value(eps: float, eta: float, sigma1: float, lambda1: float) -> float:
    """Coefficient of ∫|∇u|² in the energy inequality."""
    if eta <= 0:
        raise InvalidParameterError(f"eta must be positive, got {eta!r}")
    if lambda1 <= 0:
        raise InvalidParameterError(f"lambda1 must be positive, got {lambda1!r}")
    return eps + eps * (eps - sigma1) * eta / (2.0 * lambda1)


def g_value(eps: float, eta: float, sigma0: float, sigma1: float) -> float:
    """Coefficient of ∫v² in the energy inequality."""
    if eta <= 0:
        raise InvalidParameterError(f"eta must be positive, got {eta!r}")
    return sigma0 - eps + eps * (eps - sigma1) / (2.0 * eta)


def _radicand(eps, sigma0, sigma1, lambda1):
    return (sigma0 - 2.0 * eps) ** 2 * lambda1**2 + eps**2 * (sigma1 - eps) ** 2 * lambda1


def eta_branch(eps: float, sigma0: float, sigma1: float, lambda1: float) -> float:
    """Positive root η of the balance quadratic f - g = 0.

    Only defined for 0 < eps < sigma1, where ε(σ1 - ε) > 0.  When
    σ0 - 2ε > 0 the textbook form cancels badly, so the rationalised form
    ε(σ1-ε)λ1 / (sqrt(R) + (σ0-2ε)λ1) is used instead.
    """
    if lambda1 <= 0:
        raise InvalidParameterError(f"lambda1 must be positive, got {lambda1!r}")
    if not 0.0 < eps < sigma1:
        raise InvalidParameterError(f"eta branch needs 0 < eps < sigma1, got eps={eps!r}")
    root = math.sqrt(_radicand(eps, sigma0, sigma1, lambda1))
    shift = (sigma0 - 2.0 * eps) * lambda1
    width = eps * (sigma1 - eps)
    if shift > 0.0:
        return width * lambda1 / (root + shift)
    return (root - shift) / width


def balance_quadratic_residual(eta: float, eps: float, sigma0: float, sigma1: float, lambda1: float) -> float:
    """Residual of ε(ε-σ1)η² + 2λ1(2ε-σ0)η + λ1ε(σ1-ε), relative to its largest term."""
    terms = (
        eps * (eps - sigma1) * eta * eta,
        2.0 * lambda1 * (2.0 * eps - sigma0) * eta,
        lambda1 * eps * (sigma1 - eps),
    )
    scale = max(abs(t) for t in terms)
    return abs(math.fsum(terms)) / scale if scale > 0 else 0.0


def big_F(eps, sigma0: float, sigma1: float, lambda1: float):
    """Balanced decay rate as a function of ε.  Accepts scalars or arrays.

    Evaluated as ε[4λ1(σ0-ε) - ε(σ1-ε)²] / (2(σ0λ1 + sqrt(R))), the
    rationalised form of σ0/2 - sqrt(R)/(2λ1): exact zero at ε = 0 and no
    cancellation for small F.
    """
    if lambda1 <= 0:
        raise InvalidParameterError(f"lambda1 must be positive, got {lambda1!r}")
    eps = np.asarray(eps, dtype=float)
    root = np.sqrt(_radicand(eps, sigma0, sigma1, lambda1))
    numer = eps * (4.0 * lambda1 * (sigma0 - eps) - eps * (sigma1 - eps) ** 2)
    out = numer / (2.0 * (sigma0 * lambda1 + root))
    return float(out) if np.ndim(out) == 0 else out


def sign_cubic(eps, sigma0: float, sigma1: float, lambda1: float):
    """Cubic whose sign matches the sign of dF/dε."""
    return ((-2.0 * eps + 3.0 * sigma1) * eps - (4.0 * lambda1 + sigma1 * sigma1)) * eps + 2.0 * lambda1 * sigma0


def _sign_cubic_derivative(eps, sigma1, lambda1):
    return (-6.0 * eps + 6.0 * sigma1) * eps - (4.0 * lambda1 + sigma1 * sigma1)


def discriminant(sigma1: float, lambda1: float) -> float:
    """D = 3σ1² - 24λ1; the sign classifies the critical structure of F."""
    return 3.0 * sigma1 * sigma1 - 24.0 * lambda1


def classify_regime(sigma1: float, lambda1: float) -> Regime:
    d = discriminant(sigma1, lambda1)
    if abs(d) <= BIFURCATION_RTOL * (3.0 * sigma1 * sigma1 + 24.0 * lambda1):
        return Regime.BIFURCATION
    return Regime.TWO_MAXIMA if d > 0 else Regime.UNIQUE_MAX


# ---------------------------------------------------------------------------
# root finding


def _bisect(fn: Callable[[float], float], lo: float, hi: float, f_lo: float, max_iter: int = 200) -> float:
    """Bisect a sign change of fn on [lo, hi] down to adjacent floats."""
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = fn(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return lo if abs(fn(lo)) <= abs(fn(hi)) else hi


def _newton_polish(fn, dfn, x: float, lo: float, hi: float, steps: int = 4) -> float:
    best, f_best = x, abs(fn(x))
    for _ in range(steps):
        d = dfn(best)
        if d == 0.0 or f_best == 0.0:
            break
        cand = best - fn(best) / d
        if not lo <= cand <= hi:
            break
        f_cand = abs(fn(cand))
        if f_cand >= f_best:
            break
        best, f_best = cand, f_cand
    return best


def cubic_scale(sigma0: float, sigma1: float, lambda1: float) -> float:
    return max(abs(2.0 * lambda1 * sigma0), abs(4.0 * lambda1 + sigma1 * sigma1))


def cubic_critical_points(sigma0: float, sigma1: float, lambda1: float) -> list[float]:
    """All real roots of the sign cubic, ascending.

    The cubic is positive on (-inf, 0] and negative at σ0 + σ1 + sqrt(λ1), so
    every real root lies in between.  Bracket points are 0, the roots of the
    cubic's derivative (when real) and that upper end; each sign change is
    bisected, and a derivative root where the cubic vanishes is a double root.
    """
    _require_positive("sigma0", sigma0)
    _require_positive("sigma1", sigma1)
    _require_positive("lambda1", lambda1)

    def p(x):
        return sign_cubic(x, sigma0, sigma1, lambda1)

    def dp(x):
        return _sign_cubic_derivative(x, sigma1, lambda1)

    scale = cubic_scale(sigma0, sigma1, lambda1)
    tol = ROOT_RTOL * scale
    upper = sigma0 + sigma1 + math.sqrt(lambda1)

    turning: list[float] = []
    d = discriminant(sigma1, lambda1)
    if d >= 0.0:
        half_gap = math.sqrt(d) / 6.0
        turning = sorted({0.5 * sigma1 - half_gap, 0.5 * sigma1 + half_gap})

    nodes = [0.0, *turning, upper]
    values = [p(x) for x in nodes]
    roots: list[float] = []
    for x, v in zip(turning, values[1:-1]):
        if abs(v) <= tol:
            roots.append(x)
    for (a, fa), (b, fb) in zip(zip(nodes, values), zip(nodes[1:], values[1:])):
        if fa == 0.0 or fb == 0.0 or (fa > 0.0) == (fb > 0.0):
            continue
        r = _bisect(p, a, b, fa)
        roots.append(_newton_polish(p, dp, r, a, b))

    roots.sort()
    merged: list[float] = []
    for r in roots:
        if merged and abs(r - merged[-1]) <= 1e-9 * max(1.0, abs(r)):
            if abs(p(r)) < abs(p(merged[-1])):
                merged[-1] = r
            continue
        merged.append(r)

    for r in merged:
        if abs(p(r)) > tol:
            raise ConsistencyError(f"cubic root {r!r} has residual {p(r)!r} above {tol!r}")
    return merged


def find_F_zeros(sigma0: float, sigma1: float, lambda1: float, search_limit: float) -> list[float]:
    """Zeros of F in (0, search_limit].

    F is monotone between consecutive critical points, so each such piece
    (and the piece beyond the last one) holds at most one zero.  F(0) = 0
    with F'(0) = 1, so the left end of the first piece counts as positive.
    """
    if search_limit < sigma1:
        raise InvalidParameterError("search_limit must be at least sigma1")

    def fn(x):
        return big_F(x, sigma0, sigma1, lambda1)

    crit = [c for c in cubic_critical_points(sigma0, sigma1, lambda1) if 0.0 < c < search_limit]
    nodes = [0.0, *crit, float(search_limit)]
    values = [fn(x) for x in nodes]
    values[0] = 1.0  # sign just right of the origin

    zeros: list[float] = []
    for x, v in zip(nodes[1:], values[1:]):
        if v == 0.0:
            zeros.append(x)
    for (a, fa), (b, fb) in zip(zip(nodes, values), zip(nodes[1:], values[1:])):
        if fa == 0.0 or fb == 0.0 or (fa > 0.0) == (fb > 0.0):
            continue
        zeros.append(_bisect(fn, a, b, fa))
    zeros = sorted(set(zeros))

    tol = ROOT_RTOL * sigma0
    for z in zeros:
        if abs(fn(z)) > tol:
            raise ConsistencyError(f"F zero {z!r} has residual {fn(z)!r} above {tol!r}")
    return zeros


# ---------------------------------------------------------------------------
# optimisation


def maximize_F(bounds: DampingBounds, gap: SpectralGap) -> DecayCertificate:
    """Best certified exponent for the given damping bounds and spectral gap.

    Candidates are the cubic's roots inside (0, σ0]; the one with the largest
    F wins, and exact ties (the symmetric two-maxima case) go to the smaller ε.
    """
    s0, s1, lam = bounds.sigma0, bounds.sigma1, gap.lambda1
    crit = cubic_critical_points(s0, s1, lam)
    candidates = [c for c in crit if 0.0 < c <= s0]
    if not candidates:
        raise ConsistencyError(f"no critical point of F in (0, sigma0] for {bounds}, {gap}")

    scored = [(c, big_F(c, s0, s1, lam)) for c in candidates]
    best_val = max(v for _, v in scored)
    tied = [c for c, v in scored if best_val - v <= TIE_RTOL * max(1.0, abs(best_val))]
    eps_star = min(tied)
    alpha = big_F(eps_star, s0, s1, lam)
    if not alpha > 0.0:
        raise ConsistencyError(f"maximum of F is not positive: alpha*={alpha!r}")

    # local maxima: F' changes from + to -, i.e. the cubic decreases through zero
    local_maxima = tuple(
        (c, v) for c, v in scored
        if _sign_cubic_derivative(c, s1, lam) < 0.0
    )

    eta = eta_branch(eps_star, s0, s1, lam)
    f_star = f_value(eps_star, eta, s1, lam)
    g_star = g_value(eps_star, eta, s0, s1)
    tol = IDENTITY_RTOL * max(1.0, alpha)
    if abs(f_star - g_star) > tol or abs(f_star - alpha) > tol:
        raise ConsistencyError(f"f/g cross-check failed: f={f_star!r}, g={g_star!r}, F={alpha!r}")
    if balance_quadratic_residual(eta, eps_star, s0, s1, lam) > IDENTITY_RTOL:
        raise ConsistencyError(f"eta*={eta!r} does not solve the balance quadratic")

    return DecayCertificate(
        eps_star=eps_star,
        eta_star=eta,
        alpha_star=alpha,
        discriminant=discriminant(s1, lam),
        regime=classify_regime(s1, lam),
        critical_points=tuple(crit),
        f_at_star=f_star,
        g_at_star=g_star,
        bounds=bounds,
        gap=gap,
        local_maxima=local_maxima,
        tie_broken=len(tied) > 1,
    )


def certify(sigma0: float, sigma1: float, lambda1: float,
            provenance: Provenance | str = Provenance.USER_SUPPLIED) -> DecayCertificate:
    """Shorthand for maximize_F from plain numbers."""
    return maximize_F(DampingBounds(sigma0, sigma1), SpectralGap(lambda1, Provenance(provenance)))


def initial_energy_bound(u0_grad_sq_integral: float, u1_plus_eps_u0_sq_integral: float) -> float:
    """E(0) = ∫|∇u0|² + ∫|u1 + ε* u0|², the prefactor of the decay bound."""
    if u0_grad_sq_integral < 0 or u1_plus_eps_u0_sq_integral < 0:
        raise InvalidParameterError("energy integrals must be nonnegative")
    return float(u0_grad_sq_integral) + float(u1_plus_eps_u0_sq_integral)


__all__: Sequence[str] = [
    "DampingBounds", "SpectralGap", "DecayCertificate", "Regime", "Provenance",
    "f_value", "g_value", "eta_branch", "balance_quadratic_residual", "big_F",
    "sign_cubic", "discriminant", "classify_regime", "cubic_critical_points",
    "find_F_zeros", "maximize_F", "certify", "initial_energy_bound",
]
