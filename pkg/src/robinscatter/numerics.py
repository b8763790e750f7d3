"""Special functions, the radiating branch of sqrt(xi^2 - k^2), and quadrature.

The Bessel and Hankel functions are thin wrappers over ``scipy.special``
(Cephes/AMOS); they add domain checks and a consistent scalar/array API.
"""
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import integrate, special

from .exceptions import ConvergenceError, PreconditionError

BRANCH_RULE = "decaying_outgoing"


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and panel layout shared by the quadrature engines."""

    panel_count: int = 1
    nodes_per_panel: int = 21
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_refinements: int = 2000

    def __post_init__(self):
        if int(self.panel_count) < 1:
            raise PreconditionError("panel_count must be at least 1")
        if int(self.nodes_per_panel) < 1:
            raise PreconditionError("nodes_per_panel must be positive")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise PreconditionError("abs_tol and rel_tol must be positive")
        if int(self.max_refinements) < 0:
            raise PreconditionError("max_refinements must be non-negative")

    def tolerance(self, value):
        return max(self.abs_tol, self.rel_tol * abs(value))


class QuadResult(NamedTuple):
    value: complex
    error: float


def branch_sqrt(xi, k):
    """gamma(xi) = sqrt(xi^2 - k^2) on the decaying / outgoing branch.

    Real and non-negative for |xi| >= k, equal to -i*sqrt(k^2 - xi^2) for
    |xi| < k. Works elementwise on arrays.
    """
    if not k > 0:
        raise PreconditionError("k must be positive")
    xi = np.asarray(xi, dtype=float)
    d = xi * xi - k * k
    out = np.where(d >= 0, np.sqrt(np.abs(d)) + 0j, -1j * np.sqrt(np.abs(d)))
    return out[()] if out.ndim == 0 else out


def _check_nonneg(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise PreconditionError("argument must be finite and non-negative")
    return x


def bessel_j0(x):
    x = _check_nonneg(x)
    out = special.j0(x)
    return out[()] if np.ndim(out) == 0 else out


def bessel_j1(x):
    x = _check_nonneg(x)
    out = special.j1(x)
    return out[()] if np.ndim(out) == 0 else out


def bessel_y0(x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise PreconditionError("Y0 needs a positive argument")
    out = special.y0(x)
    return out[()] if np.ndim(out) == 0 else out


def hankel0_first(x):
    """H0^(1)(x) = J0(x) + i Y0(x) for real x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0) or not np.all(np.isfinite(x)):
        raise PreconditionError("H0^(1) is singular at x <= 0")
    out = special.j0(x) + 1j * special.y0(x)
    return out[()] if out.ndim == 0 else out


def hankel1_first(x):
    """H1^(1)(x) for real x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0) or not np.all(np.isfinite(x)):
        raise PreconditionError("H1^(1) is singular at x <= 0")
    out = special.j1(x) + 1j * special.y1(x)
    return out[()] if out.ndim == 0 else out


def integrate_adaptive(f: Callable, a: float, b: float,
                       spec: Optional[QuadratureSpec] = None, points=None) -> QuadResult:
    """Adaptive Gauss-Kronrod integral of a (possibly complex) scalar integrand.

    ``b`` may be ``np.inf``. Endpoint singularities of integrable type are
    tolerated; interior trouble spots can be declared through ``points``.
    Raises ConvergenceError, carrying the last estimate, if the requested
    accuracy is not reached.
    """
    spec = spec or QuadratureSpec()
    brk = list(points) if points is not None else []
    if np.isfinite(b) and spec.panel_count > 1:
        brk += list(np.linspace(a, b, spec.panel_count + 1)[1:-1])
    brk = sorted(set(p for p in brk if a < p < b)) or None
    rule = "gk21" if spec.nodes_per_panel >= 21 else "gk15"
    limit = max(spec.max_refinements, 1)
    val, err, info = integrate.quad_vec(
        lambda t: complex(f(t)), a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
        limit=limit, quadrature=rule, points=brk, full_output=True)
    val = complex(val)
    if info.status == 1 or err > 10 * spec.tolerance(val):
        raise ConvergenceError(
            f"adaptive quadrature did not converge (error estimate {err:.3e})",
            estimate=val, error=err)
    return QuadResult(val, float(err))


def _wynn_epsilon(seq):
    """Wynn's epsilon extrapolation of a sequence of partial sums.

    Returns the best estimate and the difference to the previous one.
    """
    n = len(seq)
    e_prev = np.zeros(n + 1, dtype=complex)
    e_cur = np.array(seq, dtype=complex)
    best, prev_best = e_cur[-1], e_cur[-2] if n > 1 else e_cur[-1]
    col = 0
    while len(e_cur) > 1:
        diff = e_cur[1:] - e_cur[:-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            nxt = e_prev[1:len(e_cur)] + 1.0 / diff
        if not np.all(np.isfinite(nxt)):
            break
        e_prev, e_cur = e_cur, nxt
        col += 1
        if col % 2 == 0:
            prev_best = e_cur[-2] if len(e_cur) > 1 else best
            best = e_cur[-1]
    return best, abs(best - prev_best)


def integrate_oscillatory_tail(f: Callable, phase_rate: float, start: float,
                               spec: Optional[QuadratureSpec] = None) -> QuadResult:
    """Integral of f over [start, inf) for an oscillating, decaying integrand.

    The half-line is cut into half-period panels of length pi/phase_rate,
    each panel is integrated with Gauss-Legendre, and the partial sums are
    accelerated with Wynn's epsilon algorithm. ``f`` must accept arrays.
    """
    spec = spec or QuadratureSpec()
    if not phase_rate > 0:
        raise PreconditionError("phase_rate must be positive")
    x, w = np.polynomial.legendre.leggauss(max(spec.nodes_per_panel, 8))
    half = np.pi / phase_rate
    max_panels = max(60, min(spec.max_refinements, 4000))
    sums = []
    total = 0.0 + 0.0j
    hits = 0
    est, err = 0j, np.inf
    for j in range(max_panels):
        a = start + j * half
        t = a + 0.5 * half * (x + 1.0)
        vals = np.asarray(f(t), dtype=complex)
        total += 0.5 * half * np.dot(w, vals)
        sums.append(total)
        if len(sums) < 6:
            continue
        est, err = _wynn_epsilon(sums[-min(len(sums), 40):])
        if err <= spec.tolerance(est):
            hits += 1
            if hits >= 2:
                return QuadResult(complex(est), float(err))
        else:
            hits = 0
        if abs(sums[-1] - sums[-2]) <= 0.1 * spec.tolerance(total):
            return QuadResult(complex(total), float(abs(sums[-1] - sums[-2])))
    raise ConvergenceError("tail acceleration did not converge", estimate=complex(est), error=err)
