"""Flat ``key = value`` run configuration.

Example::

    # constant damping on the unit interval
    domain.length = 1
    grid.points = 400
    damping.kind = constant
    damping.a = 2
    initial.u0 = sine
    run.t_end = 10
    output.trace = trace.csv
    output.report = report.json

Blank lines and ``#`` comments are ignored.  Unknown keys are errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

# key -> default (None means "no default")
KEYS: dict[str, str | None] = {
    "problem": "standard",
    "domain.length": None,
    "domain.lengths": None,
    "domain.offset": None,
    "grid.points": None,
    "damping.kind": "constant",
    "damping.a": None,
    "damping.c0": None,
    "damping.c1": None,
    "damping.omega": None,
    "damping.spatial": "false",
    "damping.table": None,
    "damping.m_kind": "two_plus_sin",
    "damping.m0": None,
    "damping.m1": None,
    "damping.sigma0": None,
    "damping.sigma1": None,
    "initial.u0": "sine",
    "initial.u0_amplitude": "1",
    "initial.u0_mode": "1",
    "initial.u1": "zero",
    "initial.u1_amplitude": "1",
    "initial.u1_mode": "1",
    "spectral.source": "analytic",
    "spectral.lambda1": None,
    "eps.policy": "certificate",
    "eps.value": None,
    "run.t_end": None,
    "run.cfl_factor": "0.9",
    "run.dt": None,
    "run.sample_every": "10",
    "tolerances.bound": "0.02",
    "analysis.fit_t_lo": "1",
    "analysis.fit_t_hi": None,
    "counterexample.delta": "0.001",
    "output.trace": None,
    "output.report": None,
}

PROBLEMS = ("standard", "counterexample")
DAMPING_KINDS = ("constant", "sinusoidal", "tabulated", "nonlinear_m")
PROFILES = ("sine", "zero")
SPECTRAL_SOURCES = ("analytic", "discrete", "value")
EPS_POLICIES = ("certificate", "value")


def parse_text(text: str) -> dict[str, str]:
    """Raw key/value pairs; duplicate and unknown keys are rejected."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _float(raw: dict, key: str, positive: bool = False, required: bool = False) -> float | None:
    value = raw.get(key, KEYS[key])
    if value is None:
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return None
    try:
        x = float(value)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {value!r}") from None
    if not math.isfinite(x):
        raise ConfigError(f"{key}: must be finite, got {value!r}")
    if positive and x <= 0:
        raise ConfigError(f"{key}: must be positive, got {value!r}")
    return x


def _nonnegative(raw: dict, key: str) -> float:
    x = _float(raw, key, required=True)
    if x < 0:
        raise ConfigError(f"{key}: must be nonnegative, got {x!r}")
    return x


def _int(raw: dict, key: str) -> int:
    value = raw.get(key, KEYS[key])
    try:
        n = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: not an integer: {value!r}") from None
    if n < 1:
        raise ConfigError(f"{key}: must be at least 1, got {value!r}")
    return n


def _floats(value: str, key: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in value.split(","))
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {value!r}") from None


def _choice(raw: dict, key: str, choices) -> str:
    value = raw.get(key, KEYS[key])
    if value not in choices:
        raise ConfigError(f"{key}: expected one of {', '.join(choices)}, got {value!r}")
    return value


def _bool(raw: dict, key: str) -> bool:
    value = str(raw.get(key, KEYS[key])).lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {value!r}")


@dataclass
class Profile:
    kind: str
    amplitude: float
    mode: int


@dataclass
class RunConfig:
    problem: str
    lengths: tuple[float, ...]
    offset: tuple[float, ...]
    points: tuple[int, ...]
    damping_kind: str
    damping: dict
    declared_bounds: tuple[float, float] | None
    u0: Profile
    u1: Profile
    spectral_source: str
    lambda1: float | None
    eps_policy: str
    eps_value: float | None
    t_end: float
    cfl_factor: float
    dt: float | None
    sample_every: int
    bound_tol: float
    fit_window: tuple[float, float]
    counterexample_delta: str
    trace_path: Path | None
    report_path: Path | None
    raw: dict = field(default_factory=dict)


def build_config(raw: dict[str, str], base_dir: Path | None = None) -> RunConfig:
    """Validate raw pairs into a RunConfig.  Raises ConfigError."""
    problem = _choice(raw, "problem", PROBLEMS)

    if "domain.lengths" in raw:
        lengths = _floats(raw["domain.lengths"], "domain.lengths")
    elif "domain.length" in raw:
        lengths = (_float(raw, "domain.length", positive=True),)
    else:
        lengths = (1.0,)
    if problem == "standard" and (len(lengths) not in (1, 2) or any(L <= 0 for L in lengths)):
        raise ConfigError(f"domain lengths must be 1 or 2 positive numbers, got {lengths}")
    offset = _floats(raw["domain.offset"], "domain.offset") if "domain.offset" in raw else (0.0,) * len(lengths)
    if len(offset) != len(lengths):
        raise ConfigError("domain.offset and domain lengths differ in dimension")

    if "grid.points" not in raw:
        raise ConfigError("missing required key 'grid.points'")
    try:
        points = tuple(int(v) for v in raw["grid.points"].split(","))
    except ValueError:
        raise ConfigError(f"grid.points: expected integers, got {raw['grid.points']!r}") from None
    if len(points) == 1:
        points = points * len(lengths)
    if len(points) != len(lengths) or any(n < 3 for n in points):
        raise ConfigError(f"grid.points must give >= 3 interior points per axis, got {raw['grid.points']!r}")

    kind = _choice(raw, "damping.kind", DAMPING_KINDS)
    damping: dict = {}
    if problem == "counterexample":
        pass  # damping is fixed by the example
    elif kind == "constant":
        damping["a"] = _float(raw, "damping.a", required=True)
    elif kind == "sinusoidal":
        damping["c0"] = _float(raw, "damping.c0", required=True)
        damping["c1"] = _float(raw, "damping.c1", required=True)
        damping["omega"] = _float(raw, "damping.omega", required=True)
        damping["spatial"] = _bool(raw, "damping.spatial")
    elif kind == "tabulated":
        table = raw.get("damping.table")
        if not table:
            raise ConfigError("damping.kind = tabulated needs damping.table")
        path = Path(table)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        damping["table"] = path
    else:
        damping["m_kind"] = _choice(raw, "damping.m_kind", ("two_plus_sin", "rational"))
        if damping["m_kind"] == "rational":
            damping["m0"] = _float(raw, "damping.m0", positive=True, required=True)
            damping["m1"] = _float(raw, "damping.m1", positive=True, required=True)

    s0 = _float(raw, "damping.sigma0")
    s1 = _float(raw, "damping.sigma1")
    if (s0 is None) != (s1 is None):
        raise ConfigError("damping.sigma0 and damping.sigma1 must be given together")
    bounds = None if s0 is None else (s0, s1)
    if bounds is not None and not 0 < s0 <= s1:
        raise ConfigError("declared damping bounds need 0 < sigma0 <= sigma1" if s1 >= s0 else "sigma1 < sigma0")

    def profile(name: str) -> Profile:
        return Profile(
            _choice(raw, f"initial.{name}", PROFILES),
            _float(raw, f"initial.{name}_amplitude"),
            _int(raw, f"initial.{name}_mode"),
        )

    source = _choice(raw, "spectral.source", SPECTRAL_SOURCES)
    lam = _float(raw, "spectral.lambda1", positive=True, required=source == "value")
    policy = _choice(raw, "eps.policy", EPS_POLICIES)
    eps = _float(raw, "eps.value", required=policy == "value")
    if eps is not None and eps < 0:
        raise ConfigError(f"eps.value must be nonnegative, got {eps!r}")

    t_end = _float(raw, "run.t_end", positive=True, required=True)
    lo = _float(raw, "analysis.fit_t_lo")
    if "analysis.fit_t_lo" not in raw and lo >= t_end:
        lo = 0.0
    hi = _float(raw, "analysis.fit_t_hi")
    window = (lo, t_end if hi is None else hi)
    if window[1] <= window[0]:
        raise ConfigError(f"empty fit window {window}")

    delta = raw.get("counterexample.delta", KEYS["counterexample.delta"])
    d = _float(raw, "counterexample.delta", positive=True)
    if not d < 0.5:
        raise ConfigError("counterexample.delta must lie in (0, 0.5)")

    def out_path(key: str) -> Path | None:
        value = raw.get(key)
        return Path(value) if value else None

    return RunConfig(
        problem=problem,
        lengths=lengths,
        offset=offset,
        points=points,
        damping_kind=kind,
        damping=damping,
        declared_bounds=bounds,
        u0=profile("u0"),
        u1=profile("u1"),
        spectral_source=source,
        lambda1=lam,
        eps_policy=policy,
        eps_value=eps,
        t_end=t_end,
        cfl_factor=_float(raw, "run.cfl_factor", positive=True),
        dt=_float(raw, "run.dt", positive=True),
        sample_every=_int(raw, "run.sample_every"),
        bound_tol=_nonnegative(raw, "tolerances.bound"),
        fit_window=window,
        counterexample_delta=delta,
        trace_path=out_path("output.trace"),
        report_path=out_path("output.report"),
        raw=dict(raw),
    )


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return build_config(parse_text(text), base_dir=path.parent)
