"""Complex geometrical optics solutions in the plane.

With z = x_1 + i x_2, Phi(z) = (z - c)^2 and Delta = 4 d_z d_zbar,

    v_1 = e^{tau Phi} w_1,        4 d_zbar (d_z + tau Phi') w_1 + q_1 w_1 = 0,
    v_2 = e^{-tau conj(Phi)} w_2, 4 d_z (d_zbar - tau conj(Phi')) w_2 + q_2 w_2 = 0,

solve (Delta + q) v = 0.  The amplitudes are Neumann series

    w_1 = sum (-1)^j U_j,  U_0 = 1,  U_j = Rt(1/2 dzbar^{-1}(q_1 U_{j-1}) - beta_1/2 [j=1])
    w_2 = sum (-1)^j V_j,  V_0 = 1,  V_j = R_{-tau}(1/2 dz^{-1}(q_2 V_{j-1}) - beta_2/2 [j=1])

where Rt g = 1/2 e^{tau(conj Phi - Phi)} dz^{-1}(g e^{tau(Phi - conj Phi)}) and
R_tau g = 1/2 e^{tau(Phi - conj Phi)} dzbar^{-1}(g e^{tau(conj Phi - Phi)}).
The conjugators are unimodular, so everything is computed on the amplitudes
and the growing factor only enters products such as v_1 v_2.
"""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import signal
from sklearn.base import BaseEstimator

from .exceptions import ConvergenceError, PreconditionError
from .forward import PotentialGrid


@dataclass(frozen=True)
class ComplexPlaneGrid:
    """Uniform cell-centred grid on the box lo + [0, n h], read as z = x_1 + i x_2."""
    lo: tuple
    h: float
    n: tuple

    def __post_init__(self):
        if self.h <= 0 or min(self.n) < 3:
            raise PreconditionError("grid needs h > 0 and at least 3 cells per axis")

    @classmethod
    def from_potential(cls, grid: PotentialGrid):
        if grid.d != 2:
            raise PreconditionError("CGO solutions are planar")
        return cls(tuple(float(v) for v in grid.lo), float(grid.h), tuple(grid.shape))

    @property
    def centers(self):
        x = self.lo[0] + self.h * (np.arange(self.n[0]) + 0.5)
        y = self.lo[1] + self.h * (np.arange(self.n[1]) + 0.5)
        return x[:, None] + 1j * y[None, :]

    @property
    def cell_area(self):
        return self.h * self.h

    def contains(self, z, margin=0.0):
        x, y = z.real, z.imag
        return (self.lo[0] + margin < x < self.lo[0] + self.n[0] * self.h - margin
                and self.lo[1] + margin < y < self.lo[1] + self.n[1] * self.h - margin)


@dataclass(frozen=True)
class CGOConfig:
    tau: float
    center: complex
    beta1: complex = 0.0
    beta2: complex = 0.0
    j_max: int = 16
    term_tol: float = 1e-8

    def __post_init__(self):
        if not self.tau > 0:
            raise PreconditionError("tau must be positive")
        if self.j_max < 1:
            raise PreconditionError("j_max must be at least 1")
        if not self.term_tol > 0:
            raise PreconditionError("term_tol must be positive")

    def with_tau(self, tau):
        return CGOConfig(tau, self.center, self.beta1, self.beta2, self.j_max, self.term_tol)


@dataclass
class CGOSeries:
    """Amplitude series; the solution is ``exp(exponent) * partial_sums``."""
    terms: List[np.ndarray]
    partial_sums: np.ndarray
    contraction_ratios: np.ndarray
    exponent: np.ndarray = field(repr=False)
    truncation_bound: float = 0.0

    def field(self):
        return np.exp(self.exponent) * self.partial_sums


# ---------------------------------------------------------------------------
# solid Cauchy transforms
_KERNEL_CACHE = {}


def _cauchy_kernel(n, h):
    """Cell weights of (1/pi)/w on offsets m h, |m_i| < n_i.

    Self cell 0 (odd kernel); the eight neighbours by 4 x 4 sub-cell midpoints.
    """
    key = (tuple(n), float(h))
    hit = _KERNEL_CACHE.get(key)
    if hit is not None:
        return hit
    m1 = np.arange(-(n[0] - 1), n[0])
    m2 = np.arange(-(n[1] - 1), n[1])
    W = h * (m1[:, None] + 1j * m2[None, :])
    c0, c1 = n[0] - 1, n[1] - 1
    W[c0, c1] = 1.0
    K = h * h / (np.pi * W)
    K[c0, c1] = 0.0
    sub = (np.arange(4) + 0.5) / 4 - 0.5
    sw = h * (sub[:, None] + 1j * sub[None, :]).ravel()
    for a in (-1, 0, 1):
        for b in (-1, 0, 1):
            if a == 0 and b == 0:
                continue
            K[c0 + a, c1 + b] = (h * h / 16) * np.sum(1 / (np.pi * (h * (a + 1j * b) + sw)))
    if len(_KERNEL_CACHE) > 4:
        _KERNEL_CACHE.clear()
    _KERNEL_CACHE[key] = K
    return K


def _check_field(g, grid):
    g = np.asarray(g, complex)
    if g.shape != tuple(grid.n):
        raise PreconditionError(f"field shape {g.shape} does not match grid {tuple(grid.n)}")
    if not np.all(np.isfinite(g)):
        raise PreconditionError("field must be finite")
    return g


def cauchy_transform_zbar(g, grid: ComplexPlaneGrid):
    """-(1/pi) int_B g(zeta)/(zeta - z) dA, a right inverse of d/dzbar."""
    g = _check_field(g, grid)
    if not np.any(g):
        return np.zeros_like(g)
    return signal.fftconvolve(g, _cauchy_kernel(grid.n, grid.h), mode="valid")


def cauchy_transform_z(g, grid: ComplexPlaneGrid):
    """-(1/pi) int_B g(zeta)/(conj zeta - conj z) dA, a right inverse of d/dz."""
    g = _check_field(g, grid)
    if not np.any(g):
        return np.zeros_like(g)
    return signal.fftconvolve(g, np.conj(_cauchy_kernel(grid.n, grid.h)), mode="valid")


def phase(grid: ComplexPlaneGrid, center):
    return (grid.centers - complex(center)) ** 2


def conjugator(grid, tau, center):
    """e^{tau (Phi - conj Phi)}, unimodular."""
    P = phase(grid, center)
    return np.exp(2j * tau * P.imag)


def conjugated_smoother(g, tau, config: CGOConfig, grid: ComplexPlaneGrid, variant="R_tilde"):
    """R_tilde_tau g or R_tau g (see module docstring); use tau < 0 for R_{-tau}."""
    g = _check_field(g, grid)
    E = conjugator(grid, tau, config.center)
    if variant == "R_tilde":
        return 0.5 * np.conj(E) * cauchy_transform_z(g * E, grid)
    if variant == "R":
        return 0.5 * E * cauchy_transform_zbar(g * np.conj(E), grid)
    raise PreconditionError(f"unknown variant {variant!r}")


def _series(q, grid, config, which):
    tau = config.tau
    if which == 1:
        inverse, smooth, tau_s, beta = cauchy_transform_zbar, "R_tilde", tau, config.beta1
    else:
        inverse, smooth, tau_s, beta = cauchy_transform_z, "R", -tau, config.beta2
    terms = [np.ones(grid.n, complex)]
    w = terms[0].copy()
    norms = [1.0]
    for j in range(1, config.j_max + 1):
        inner = 0.5 * inverse(q * terms[-1], grid)
        if j == 1:
            inner = inner - 0.5 * beta
        U = conjugated_smoother(inner, tau_s, config, grid, smooth)
        nrm = float(np.max(np.abs(U)))
        terms.append(U)
        norms.append(nrm)
        w += (-1) ** j * U
        if nrm == 0 or nrm < config.term_tol * norms[1]:
            break
    ratios = np.array([norms[j + 1] / norms[j] for j in range(1, len(norms) - 1) if norms[j] > 0])
    bad = np.nonzero(ratios[1:] >= 1)[0] if ratios.size > 1 else []
    if len(bad):
        raise ConvergenceError(
            f"CGO series does not contract at tau = {tau} (ratio {ratios[1 + bad[0]]:.3f} at j = {bad[0] + 2});"
            " increase tau", estimate=float(ratios[1 + bad[0]]))
    last_ratio = ratios[-1] if ratios.size else 0.0
    bound = norms[-1] * last_ratio / (1 - last_ratio) if last_ratio < 1 else np.inf
    P = phase(grid, config.center)
    exponent = tau * P if which == 1 else -tau * np.conj(P)
    return CGOSeries(terms, w, ratios, exponent, float(bound))


def _potential_field(q, grid):
    if isinstance(q, PotentialGrid):
        if (q.shape != tuple(grid.n) or abs(q.h - grid.h) > 1e-12 * grid.h
                or np.any(np.abs(np.asarray(q.lo) - np.asarray(grid.lo)) > 1e-12)):
            raise PreconditionError("potentials must live on the CGO grid")
        return np.asarray(q.q, complex)
    return _check_field(q, grid)


def build_cgo_pair(q1, q2, config: CGOConfig, grid: Optional[ComplexPlaneGrid] = None):
    """CGO series v_1 for q_1 (growth e^{tau Phi}) and v_2 for q_2 (e^{-tau conj Phi})."""
    if grid is None:
        if not isinstance(q1, PotentialGrid):
            raise PreconditionError("pass a grid or PotentialGrid potentials")
        grid = ComplexPlaneGrid.from_potential(q1)
    if not grid.contains(complex(config.center)):
        raise PreconditionError("the phase centre must lie inside B")
    a, b = _potential_field(q1, grid), _potential_field(q2, grid)
    return _series(a, grid, config, 1), _series(b, grid, config, 2)


def orthogonality_probe(q1, q2, v1: CGOSeries, v2: CGOSeries, grid: ComplexPlaneGrid):
    """Cell quadrature of int_B (q_1 - q_2) v_1 v_2."""
    dq = _potential_field(q1, grid) - _potential_field(q2, grid)
    prod = np.exp(v1.exponent + v2.exponent) * v1.partial_sums * v2.partial_sums
    return complex(np.sum(dq * prod) * grid.cell_area)


def leading_term(q1, q2, tau, center, grid):
    """int_B (q_1 - q_2) e^{tau(conj Phi - Phi)}."""
    dq = _potential_field(q1, grid) - _potential_field(q2, grid)
    return complex(np.sum(dq * np.conj(conjugator(grid, tau, center))) * grid.cell_area)


# ---------------------------------------------------------------------------
# residual checks
_D1 = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])


def _diff(f, h, axis):
    """Eighth-order central difference; loses four layers on each side of ``axis``."""
    n = f.shape[axis]
    out = 0
    for i, c in enumerate(_D1):
        if c:
            out = out + c * np.take(f, range(i, n - 8 + i), axis=axis)
    return out / h


def _crop(f, axis, k=4):
    return np.take(f, range(k, f.shape[axis] - k), axis=axis)


def _dz(f, h, conj=False):
    fx = _crop(_diff(f, h, 0), 1)
    fy = _crop(_diff(f, h, 1), 0)
    return 0.5 * (fx + 1j * fy) if conj else 0.5 * (fx - 1j * fy)


def pde_residual(q, series: CGOSeries, config: CGOConfig, grid: ComplexPlaneGrid, which=1,
                 margin=0.1):
    """Relative residual of (Delta + q) v on interior nodes.

    Evaluated in conjugated form, e^{-tau Phi}(Delta + q) v_1 =
    4 d_zbar (d_z + tau Phi') w_1 + q w_1 (and its mirror for v_2), normalized by
    ||q||_inf ||w||_inf.  Nodes within ``margin`` (fraction of the box) of the
    edge are excluded.
    """
    q = _potential_field(q, grid)
    w = series.partial_sums
    h, tau = grid.h, config.tau
    dP = 2 * (grid.centers - complex(config.center))
    if which == 1:
        inner = _dz(w, h) + tau * _crop(_crop(dP, 0), 1) * _crop(_crop(w, 0), 1)
        op = 4 * _dz(inner, h, conj=True)
    else:
        inner = _dz(w, h, conj=True) - tau * np.conj(_crop(_crop(dP, 0), 1)) * _crop(_crop(w, 0), 1)
        op = 4 * _dz(inner, h)
    core = lambda f: f[8:-8, 8:-8]
    res = op + core(q) * core(w)
    n1, n2 = res.shape
    c1, c2 = int(margin * grid.n[0]), int(margin * grid.n[1])
    res = res[max(c1 - 8, 0): n1 - max(c1 - 8, 0), max(c2 - 8, 0): n2 - max(c2 - 8, 0)]
    scale = float(np.max(np.abs(q))) * float(np.max(np.abs(w)))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(res)) / scale)


@dataclass
class StationaryPhaseReport:
    taus: np.ndarray
    probes: np.ndarray
    leading: np.ndarray
    differences: np.ndarray
    slope: float
    leading_ratios: np.ndarray
    contraction: list


def stationary_phase_scan(q1, q2, config_base: CGOConfig, taus, grid=None):
    """D(tau) = |probe - leading term| over increasing taus, with its log-log slope."""
    taus = np.asarray(taus, float)
    if taus.size < 2 or np.any(np.diff(taus) <= 0):
        raise PreconditionError("taus must be increasing, at least two values")
    if grid is None:
        grid = ComplexPlaneGrid.from_potential(q1)
    probes, leads, contr = [], [], []
    for tau in taus:
        cfg = config_base.with_tau(float(tau))
        v1, v2 = build_cgo_pair(q1, q2, cfg, grid)
        probes.append(orthogonality_probe(q1, q2, v1, v2, grid))
        leads.append(leading_term(q1, q2, tau, cfg.center, grid))
        contr.append(v1.contraction_ratios.tolist())
    probes, leads = np.array(probes), np.array(leads)
    D = np.abs(probes - leads)
    if np.all(D > 0):
        slope = float(np.polyfit(np.log(taus), np.log(D), 1)[0])
    else:
        slope = -np.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.abs(leads[1:]) / np.abs(leads[:-1])
    return StationaryPhaseReport(taus, probes, leads, D, slope, ratios, contr)


def bump(grid_or_centers, center, radius=1.0, height=1.0):
    """C-infinity bump height * exp(1 - 1/(1 - r^2)) for r < 1 (r scaled by radius)."""
    z = grid_or_centers.centers if isinstance(grid_or_centers, ComplexPlaneGrid) else grid_or_centers
    r2 = np.abs(z - complex(center)) ** 2 / radius ** 2
    out = np.zeros(r2.shape)
    inside = r2 < 1
    out[inside] = height * np.exp(1 - 1 / (1 - r2[inside]))
    return out


class CGOSolution(BaseEstimator):
    """Estimator wrapper: ``fit(q1, q2)`` builds the pair, ``score`` returns the
    orthogonality probe and ``predict`` the solution fields."""

    def __init__(self, tau=32.0, center=0j, beta1=0.0, beta2=0.0, j_max=16, term_tol=1e-8):
        self.tau = tau
        self.center = center
        self.beta1 = beta1
        self.beta2 = beta2
        self.j_max = j_max
        self.term_tol = term_tol

    def _config(self):
        return CGOConfig(self.tau, self.center, self.beta1, self.beta2, self.j_max, self.term_tol)

    def fit(self, q1: PotentialGrid, q2: PotentialGrid):
        self.grid_ = ComplexPlaneGrid.from_potential(q1)
        self.config_ = self._config()
        self.v1_, self.v2_ = build_cgo_pair(q1, q2, self.config_, self.grid_)
        self.q1_, self.q2_ = q1, q2
        return self

    def predict(self):
        return self.v1_.field(), self.v2_.field()

    def score(self):
        return orthogonality_probe(self.q1_, self.q2_, self.v1_, self.v2_, self.grid_)

    def residuals(self):
        return (pde_residual(self.q1_, self.v1_, self.config_, self.grid_, 1),
                pde_residual(self.q2_, self.v2_, self.config_, self.grid_, 2))
