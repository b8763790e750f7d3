"""Lippmann-Schwinger solver for (Delta + q) u = 0 in the half-space with
Robin data du/dx_d + theta u = f on the boundary.

The solution is written as u = u_inc + G_theta V u with V = q - k^2 and
u_inc = -int G_theta(x, y') f(y') dy', the field radiated by the boundary
data.  The volume equation is discretized with a midpoint Nystrom rule on a
uniform cell grid; the diagonal integrates the free-space singularity over
the cell and adds the smooth remainder pointwise.
"""
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import linalg, special
from sklearn.base import BaseEstimator

from ._spectral import RadialIntegrator
from ._validation import check_finite_array, check_points
from .exceptions import ConvergenceError, PreconditionError
from .green import (MediumSpec, correction_values, free_kernel, free_kernel_dR,
                    robin_gradient_values, robin_values)


# ---------------------------------------------------------------------------
# data containers
@dataclass(frozen=True)
class PotentialGrid:
    """Complex potential q sampled at the centers of a uniform cell grid."""

    lo: np.ndarray
    h: float
    q: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        q = np.asarray(self.q, dtype=complex)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "q", q)
        if q.ndim != lo.size or lo.size not in (2, 3):
            raise PreconditionError("q must have one axis per coordinate (d = 2 or 3)")
        if not self.h > 0:
            raise PreconditionError("cell size must be positive")
        if lo[-1] < self.h * (1 - 1e-12):
            raise PreconditionError("the potential box must stay at least one cell above the boundary")
        check_finite_array(q, "q")

    @classmethod
    def from_function(cls, func: Callable, lo, hi, n):
        """Sample ``func(X)`` (X of shape (N, d)) on an n_1 x ... x n_d grid."""
        lo, hi = np.asarray(lo, float), np.asarray(hi, float)
        n = np.broadcast_to(np.asarray(n, int), lo.shape)
        hs = (hi - lo) / n
        if not np.allclose(hs, hs[0], rtol=1e-10):
            raise PreconditionError("cells must be cubes: (hi - lo)/n must agree on all axes")
        grid = cls(lo, float(hs[0]), np.zeros(tuple(n), complex))
        q = np.asarray(func(grid.centers), dtype=complex).reshape(tuple(n))
        return cls(lo, float(hs[0]), q)

    @property
    def d(self):
        return self.lo.size

    @property
    def shape(self):
        return self.q.shape

    @property
    def size(self):
        return self.q.size

    @property
    def cell_volume(self):
        return self.h ** self.d

    @property
    def hi(self):
        return self.lo + self.h * np.asarray(self.shape)

    @property
    def axes(self):
        return [self.lo[i] + self.h * (np.arange(n) + 0.5) for i, n in enumerate(self.shape)]

    @property
    def centers(self):
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    @property
    def omega_mask(self):
        return self.q.imag > 0

    def contrast(self, k):
        """V = q - k^2, flattened."""
        return (self.q - k * k).ravel()

    def scaled(self, s, k):
        """Potential with contrast V scaled by s."""
        return replace(self, q=k * k + s * (self.q - k * k))


@dataclass(frozen=True)
class BoundarySamples:
    """Complex data on a uniform node set of the boundary {x_d = 0}."""

    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    spacing: float
    delta_exponent: float = 1.0

    def __post_init__(self):
        nodes = np.atleast_2d(np.asarray(self.nodes, float))
        w = np.asarray(self.weights, float)
        v = np.asarray(self.values, complex)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "values", v)
        if np.any(nodes[:, -1] != 0):
            raise PreconditionError("boundary nodes must have x_d = 0")
        if w.shape != (len(nodes),) or v.shape != (len(nodes),):
            raise PreconditionError("weights and values must match the node count")
        if np.any(w <= 0):
            raise PreconditionError("quadrature weights must be positive")
        if not self.delta_exponent > 0.5:
            raise PreconditionError("the weight exponent delta must exceed 1/2")

    @classmethod
    def uniform(cls, d, half_width, spacing, func: Optional[Callable] = None, delta_exponent=1.0):
        """Nodes j*spacing covering [-half_width, half_width]^{d-1}."""
        m = int(np.ceil(half_width / spacing - 1e-9))
        t = spacing * np.arange(-m, m + 1)
        if d == 2:
            nodes = np.column_stack([t, np.zeros_like(t)])
        else:
            T1, T2 = np.meshgrid(t, t, indexing="ij")
            nodes = np.column_stack([T1.ravel(), T2.ravel(), np.zeros(T1.size)])
        w = np.full(len(nodes), spacing ** (d - 1))
        vals = np.zeros(len(nodes), complex) if func is None else func(nodes[:, :-1])
        return cls(nodes, w, vals, float(spacing), delta_exponent)

    @property
    def d(self):
        return self.nodes.shape[1]

    def with_values(self, values):
        return replace(self, values=np.asarray(values, complex))

    def weighted_norm(self):
        """Discrete L2 norm with weight (1 + |x'|^2)^(-delta)."""
        r2 = np.sum(self.nodes[:, :-1] ** 2, axis=1)
        return float(np.sqrt(np.sum(self.weights * np.abs(self.values) ** 2
                                    * (1 + r2) ** (-self.delta_exponent))))


def gaussian_data(samples: BoundarySamples, center=0.0, width=0.5, amplitude=1.0):
    """Gaussian boundary datum amplitude * exp(-|x'-c|^2 / (2 width^2))."""
    c = np.broadcast_to(np.asarray(center, float), (samples.d - 1,))
    r2 = np.sum((samples.nodes[:, :-1] - c) ** 2, axis=1)
    return samples.with_values(amplitude * np.exp(-r2 / (2 * width ** 2)))


@dataclass(frozen=True)
class VolumeField:
    grid: PotentialGrid
    values: np.ndarray
    residual: float = 0.0
    condition: float = 1.0
    incident: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if np.asarray(self.values).shape != (self.grid.size,):
            raise PreconditionError("field shape does not match the grid")


# ---------------------------------------------------------------------------
# singular cell integrals
def selfcell_free_integral(h, d, k):
    """Integral of G_free(x_c - y) over the cube of side h centred at x_c."""
    x, w = np.polynomial.legendre.leggauss(32)
    if d == 2:
        phi = np.pi / 8 * (x + 1)           # [0, pi/4]
        wphi = np.pi / 8 * w
        R = 0.5 * h / np.cos(phi)
        inner = R * (special.j1(k * R) + 1j * special.y1(k * R)) / k + 2j / (np.pi * k * k)
        return complex(0.25j * 8 * np.sum(wphi * inner))
    a = 0.5 * h
    u = a * x
    U, W = np.meshgrid(u, u, indexing="ij")
    WW = np.outer(w, w) * a * a
    rho = np.sqrt(U ** 2 + W ** 2 + a * a)
    F = np.exp(1j * k * rho) * (rho / (1j * k) + 1 / k ** 2) - 1 / k ** 2
    return complex(6 * np.sum(WW * a / rho ** 3 * F) / (4 * np.pi))


# ---------------------------------------------------------------------------
# kernel providers: split G = direct(x - y) + reflected(x' - y', x_d + y_d)
class HalfSpaceKernel:
    """Robin (default) or Dirichlet half-space kernel in table form."""

    def __init__(self, medium: MediumSpec, kind="robin"):
        if kind not in ("robin", "dirichlet"):
            raise PreconditionError(f"unknown kernel kind {kind!r}")
        self.medium = medium
        self.kind = kind

    def direct(self, dx):
        """Direct part at offsets dx (..., d); returns the smooth remainder
        direct - G_free at dx = 0."""
        R = np.linalg.norm(dx, axis=-1)
        out = np.zeros(R.shape, complex)
        nz = R > 0
        out[nz] = free_kernel(R[nz], self.medium.d, self.medium.k)
        return out

    def reflected(self, rho, s):
        m = self.medium
        R = np.sqrt(rho ** 2 + s ** 2)
        g = free_kernel(R, m.d, m.k)
        if self.kind == "dirichlet":
            return -g
        if m.theta != 0:
            g = g + correction_values(m, rho, s)
        return g

    def values(self, X, Y):
        """G(X[i], Y[j]) as an (n, m) matrix, X and Y off the diagonal."""
        m = self.medium
        dx = X[:, None, :] - Y[None, :, :]
        R1 = np.linalg.norm(dx, axis=-1)
        rho = np.linalg.norm(dx[..., :-1], axis=-1)
        s = X[:, None, -1] + Y[None, :, -1]
        return free_kernel(R1, m.d, m.k) + self.reflected(rho, s)

    def normal_derivative(self, X, Y):
        """d/dx_d G(X[i], Y[j]) (matrix)."""
        m = self.medium
        dx = X[:, None, :] - Y[None, :, :]
        R1 = np.linalg.norm(dx, axis=-1)
        rho = np.linalg.norm(dx[..., :-1], axis=-1)
        s = X[:, None, -1] + Y[None, :, -1]
        R2 = np.sqrt(rho ** 2 + s ** 2)
        sign = -1.0 if self.kind == "dirichlet" else 1.0
        out = free_kernel_dR(R1, m.d, m.k) * dx[..., -1] / R1
        out = out + sign * free_kernel_dR(R2, m.d, m.k) * s / R2
        if self.kind == "robin" and m.theta != 0:
            out = out + correction_values(m, rho, s, "ds")
        return out


# ---------------------------------------------------------------------------
# boundary -> volume and boundary -> boundary operators
def _incident_matrix(kernel, X, f: BoundarySamples):
    """Matrix M with u_inc(X) = M @ f.values, M_ij = -w_j G(X_i, y_j)."""
    if kernel.kind == "dirichlet":
        raise PreconditionError("the Dirichlet kernel has no Robin source term")
    return -kernel.values(X, f.nodes) * f.weights[None, :]


def incident_field(f: BoundarySamples, x, medium: MediumSpec, params=None):
    """Field radiated by Robin data f: -sum_j w_j G_theta(x, y_j) f_j."""
    X = np.atleast_2d(np.asarray(x, float))
    if X.shape[1] != medium.d or f.d != medium.d:
        raise PreconditionError("dimension mismatch between data, point and medium")
    if not np.any(f.values):
        out = np.zeros(len(X), complex)
    else:
        out = _incident_matrix(HalfSpaceKernel(medium), X, f) @ f.values
    return complex(out[0]) if np.ndim(x) == 1 else out


def band_limited_kernel(medium: MediumSpec, multiplier: str, spacing, r):
    """Radial kernel (1/pi) int_0^Xi m(xi) cos(xi r) dxi in 2D, or the
    J0 analogue in 3D, with Xi = pi / spacing.

    multiplier "trace": m = 1/(theta - gamma) (boundary value of the field
    radiated by unit Robin data); "flux": m = -gamma/(theta - gamma).
    """
    th = medium.theta
    pref = 1 / np.pi if medium.d == 2 else 1 / (2 * np.pi)
    if multiplier == "trace":
        integ = RadialIntegrator(lambda xi, g: -np.ones_like(g), medium.d, medium.k, theta=th)
    elif multiplier == "flux":
        integ = RadialIntegrator(lambda xi, g: g, medium.d, medium.k, theta=th)
    else:
        raise PreconditionError(f"unknown multiplier {multiplier!r}")
    return pref * integ(np.asarray(r, float), 0.0, xi_max=np.pi / spacing)


def _boundary_operator(medium, f: BoundarySamples, multiplier):
    nodes = f.nodes[:, :-1]
    dist = np.linalg.norm(nodes[:, None, :] - nodes[None, :, :], axis=-1)
    idx = np.round(dist / f.spacing * 1e6).astype(np.int64)
    uniq, inv = np.unique(idx, return_inverse=True)
    vals = band_limited_kernel(medium, multiplier, f.spacing, uniq * f.spacing / 1e6)
    return vals[inv.reshape(dist.shape)] * f.weights[None, :]


# ---------------------------------------------------------------------------
# volume system
def _offset_tables(grid: PotentialGrid, kernel):
    """Direct and reflected kernel tables indexed by integer offsets."""
    h, d = grid.h, grid.d
    n = np.asarray(grid.shape)
    # direct part depends on |i - j| per axis
    offs = np.meshgrid(*[np.arange(m) for m in n], indexing="ij")
    dx = np.stack(offs, axis=-1) * h
    t_dir = kernel.direct(dx)
    # reflected part: horizontal |offsets| and the index sum along x_d
    hor = np.meshgrid(*[np.arange(m) for m in n[:-1]], indexing="ij")
    rho = np.sqrt(sum((o * h) ** 2 for o in hor))
    ssum = np.arange(2 * n[-1] - 1)
    s = 2 * grid.lo[-1] + (ssum + 1) * h
    R, S = np.broadcast_arrays(rho[..., None], s.reshape((1,) * (d - 1) + (-1,)))
    t_ref = kernel.reflected(R, S)
    return t_dir, t_ref


def _system_blocks(grid, tables, rows):
    """Kernel matrix rows G(x_i, y_j) for i in ``rows`` (diagonal excluded)."""
    t_dir, t_ref = tables
    idx = np.array(np.unravel_index(np.arange(grid.size), grid.shape))
    ri = idx[:, rows]
    dif = [np.abs(ri[a][:, None] - idx[a][None, :]) for a in range(grid.d)]
    ssum = ri[-1][:, None] + idx[-1][None, :]
    G = t_dir[tuple(dif)] + t_ref[tuple(dif[:-1]) + (ssum,)]
    return G


def assemble_ls_system(potential: PotentialGrid, medium: MediumSpec, params=None,
                       kernel=None, max_bytes=2.5e9):
    """Dense Nystrom matrix A = I - Q with Q_ij = w_j G(x_i, y_j) V_j."""
    if potential.d != medium.d:
        raise PreconditionError("potential grid and medium dimensions differ")
    kernel = kernel or HalfSpaceKernel(medium)
    N = potential.size
    need = 16.0 * N * N * 2
    if need > max_bytes:
        raise PreconditionError(
            f"system with {N} cells needs about {need / 1e9:.1f} GB, above the {max_bytes / 1e9:.1f} GB limit")
    V = potential.contrast(medium.k)
    w = potential.cell_volume
    if not np.any(V):
        return np.eye(N, dtype=complex)
    tables = _offset_tables(potential, kernel)
    A = np.empty((N, N), dtype=complex)
    block = max(1, int(4e6 // N))
    for r0 in range(0, N, block):
        rows = np.arange(r0, min(N, r0 + block))
        A[rows] = _system_blocks(potential, tables, rows)
    diag = selfcell_kernel(potential, kernel, tables)
    A[np.diag_indices(N)] = diag / w
    A *= -w * V[None, :]
    A[np.diag_indices(N)] += 1.0
    return A


def selfcell_kernel(grid: PotentialGrid, kernel, tables=None):
    """Integral of G(x_i, .) over cell i, for every cell."""
    t_dir, t_ref = tables if tables is not None else _offset_tables(grid, kernel)
    idx = np.unravel_index(np.arange(grid.size), grid.shape)
    zero = (0,) * grid.d
    smooth = t_dir[zero] + t_ref[(0,) * (grid.d - 1) + (2 * idx[-1],)]
    return selfcell_free_integral(grid.h, grid.d, kernel.medium.k) + grid.cell_volume * smooth


def _check_potential(potential: PotentialGrid):
    if np.any(potential.q.imag < 0):
        raise PreconditionError("Im q < 0 somewhere: the scattering problem may lose uniqueness")


class LippmannSchwingerSolver(BaseEstimator):
    """Factor the Nystrom system once and solve for many boundary data.

    Parameters
    ----------
    d, k, theta : medium description.
    kernel : "robin" or "dirichlet" background kernel.
    cond_max : largest acceptable 1-norm condition estimate.
    max_bytes : memory ceiling for the dense system.
    """

    def __init__(self, d=2, k=1.0, theta=0.0, kernel="robin", cond_max=1e12, max_bytes=2.5e9):
        self.d = d
        self.k = k
        self.theta = theta
        self.kernel = kernel
        self.cond_max = cond_max
        self.max_bytes = max_bytes

    @property
    def medium_(self):
        return MediumSpec(self.d, self.k, self.theta)

    def fit(self, potential: PotentialGrid, y=None):
        _check_potential(potential)
        medium = self.medium_
        self.kernel_ = HalfSpaceKernel(medium, self.kernel)
        self.potential_ = potential
        self.contrast_ = potential.contrast(medium.k)
        A = assemble_ls_system(potential, medium, kernel=self.kernel_, max_bytes=self.max_bytes)
        self.identity_ = not np.any(self.contrast_)
        anorm = np.linalg.norm(A, 1)
        if self.identity_:
            self.lu_ = None
            self.condition_ = 1.0
        else:
            self.lu_ = linalg.lu_factor(A, overwrite_a=False, check_finite=False)
            rcond, info = linalg.lapack.zgecon(self.lu_[0], anorm, norm="1")
            self.condition_ = np.inf if rcond == 0 else 1.0 / rcond
            if self.condition_ > self.cond_max:
                raise ConvergenceError(
                    f"Lippmann-Schwinger system is numerically singular (condition ~ {self.condition_:.2e})",
                    estimate=self.condition_)
        self.matrix_ = A
        return self

    def incident(self, f: BoundarySamples):
        return _incident_matrix(self.kernel_, self.potential_.centers, f) @ f.values

    def solve_rhs(self, b):
        """Solve A u = b for one or several right-hand sides."""
        b = np.asarray(b, complex)
        if self.identity_:
            return b.copy(), 0.0
        u = linalg.lu_solve(self.lu_, b, check_finite=False)
        res = np.linalg.norm(self.matrix_ @ u - b) / max(np.linalg.norm(b), 1e-300)
        return u, float(res)

    def solve(self, f: BoundarySamples):
        b = self.incident(f)
        u, res = self.solve_rhs(b)
        return VolumeField(self.potential_, u, res, self.condition_, b)

    def apply_volume_operator(self, u):
        """(G V u) at the cell centers, i.e. (I - A) u."""
        return u - self.matrix_ @ u

    def volume_kernel(self, X):
        """Matrix of w_j G(X_i, y_j) V_j for off-grid points X."""
        C = self.potential_.centers
        return self.kernel_.values(X, C) * (self.potential_.cell_volume * self.contrast_)[None, :]

    def predict(self, X, f: BoundarySamples, u: Optional[VolumeField] = None):
        u = u if u is not None else self.solve(f)
        return evaluate_field(u, f, X, self.medium_, solver=self)

    def trace_and_flux(self, f: BoundarySamples, u: Optional[VolumeField] = None):
        u = u if u is not None else self.solve(f)
        return boundary_trace_and_flux(u, f, self.medium_, solver=self)


def solve_scattering(f: BoundarySamples, potential: PotentialGrid, medium: MediumSpec,
                     params=None, solver: Optional[LippmannSchwingerSolver] = None):
    """Solve the Lippmann-Schwinger equation for Robin data f."""
    if solver is None:
        solver = LippmannSchwingerSolver(medium.d, medium.k, medium.theta).fit(potential)
    return solver.solve(f)


def evaluate_field(u: VolumeField, f: BoundarySamples, x, medium: MediumSpec, params=None,
                   solver: Optional[LippmannSchwingerSolver] = None):
    """u(x) = u_inc(x) + sum_j w_j G(x, y_j) V_j u_j at arbitrary points.

    Points that coincide with a cell centre reuse the self-cell corrected
    row; other points must keep one cell away from the grid.
    """
    X = check_points(x, medium.d)
    grid = u.grid
    if solver is None:
        solver = LippmannSchwingerSolver(medium.d, medium.k, medium.theta).fit(grid)
    centers = grid.centers
    out = np.asarray(incident_field(f, X, medium), complex).reshape(len(X))
    pos = (X - grid.lo) / grid.h - 0.5
    near = np.round(pos)
    on_grid = np.all(np.abs(pos - near) < 1e-9, axis=1) & np.all(
        (near >= 0) & (near < np.asarray(grid.shape)), axis=1)
    inside = np.all((X > grid.lo - grid.h) & (X < grid.hi + grid.h), axis=1) & ~on_grid
    if np.any(inside):
        raise PreconditionError("evaluation point within one cell of the grid; use the on-grid values")
    if np.any(~on_grid):
        off = ~on_grid
        out[off] += solver.volume_kernel(X[off]) @ u.values
    if np.any(on_grid):
        flat = np.ravel_multi_index(near[on_grid].astype(int).T, grid.shape)
        Q = np.eye(grid.size)[flat] - solver.matrix_[flat]
        out[on_grid] += Q @ u.values
    return out


def boundary_trace_and_flux(u: VolumeField, f: BoundarySamples, medium: MediumSpec, params=None,
                            solver: Optional[LippmannSchwingerSolver] = None):
    """Boundary trace and normal derivative of u on the nodes of f.

    The part radiated by f uses band-limited spectral kernels on the node
    grid; the volume part differentiates the kernel in closed form.
    """
    grid = u.grid
    if solver is None:
        solver = LippmannSchwingerSolver(medium.d, medium.k, medium.theta).fit(grid)
    Kt = _boundary_operator(medium, f, "trace")
    Kf = _boundary_operator(medium, f, "flux")
    trace = Kt @ f.values
    flux = Kf @ f.values
    if not solver.identity_:
        src = grid.cell_volume * solver.contrast_ * u.values
        C = grid.centers
        trace = trace + solver.kernel_.values(f.nodes, C) @ src
        flux = flux + solver.kernel_.normal_derivative(f.nodes, C) @ src
    return f.with_values(trace), f.with_values(flux)
