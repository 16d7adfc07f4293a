"""Independent oracles shared by the test modules.

Nothing here calls into the certificate's critical-point machinery: the rate
function is re-typed from its closed form and maximised by brute force.
"""

import math

import numpy as np
import pytest

PI2 = math.pi**2


def rate_oracle(eps, s0, s1, lam):
    eps = np.asarray(eps, dtype=float)
    return s0 / 2 - np.sqrt((s0 - 2 * eps) ** 2 * lam**2 + eps**2 * (s1 - eps) ** 2 * lam) / (2 * lam)


def grid_max(s0, s1, lam, step=1e-6, chunk=1_000_000):
    """(eps, F) of the largest F on the grid step, 2 step, ... below s0."""
    n = int(math.ceil(s0 / step))
    best = (0.0, -math.inf)
    for start in range(1, n, chunk):
        eps = np.arange(start, min(start + chunk, n), dtype=float) * step
        eps = eps[eps < s0]
        if eps.size == 0:
            break
        vals = rate_oracle(eps, s0, s1, lam)
        i = int(np.argmax(vals))
        if vals[i] > best[1]:
            best = (float(eps[i]), float(vals[i]))
    return best


def bisect_oracle(fn, a, b, iters=200):
    fa = fn(a)
    assert fa * fn(b) < 0
    for _ in range(iters):
        m = 0.5 * (a + b)
        fm = fn(m)
        if fm == 0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def random_tuples(n, seed, s0=(0.1, 5.0), ratio=(1.0, 4.0), lam=(0.05, 50.0)):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        a = rng.uniform(*s0)
        out.append((float(a), float(a * rng.uniform(*ratio)), float(rng.uniform(*lam))))
    return out


@pytest.fixture
def pi2():
    return PI2


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
