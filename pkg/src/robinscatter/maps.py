"""Discrete Dirichlet-to-Neumann, Neumann-to-Dirichlet and Robin-to-Robin
maps on a periodic boundary grid, and the identities linking them.

Each map is assembled column by column: a basis of periodized Gaussians is
fed to the forward problem (Robin with impedance theta, or Dirichlet), the
boundary trace and flux are sampled at the nodes, and the node-to-node
matrix is Out @ inv(B) with B the basis samples.  With V = 0 the maps are
Fourier multipliers,

    DtN  -gamma,   NtD  -1/gamma,   RtR  (theta_2 - gamma)/(theta_1 - gamma),

and S = R - I satisfies S (Lambda + theta_1) = (theta_2 - theta_1) I.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import ConvergenceError, PreconditionError, SingularityError
from .forward import HalfSpaceKernel, PotentialGrid, assemble_ls_system
from .green import MediumSpec, free_kernel_dR
from .numerics import branch_sqrt, hankel1_first
from .periodic import GaussianBasis, PeriodicKernel

# scale c in S (Lambda + theta_1) = c I, written as c = LEMMA_SIGN * (theta_2 - theta_1);
# fixed by the least-squares fit in tests/test_maps.py::test_lemma_scale_sign
LEMMA_SIGN = +1


@dataclass(frozen=True)
class BoundaryOperator:
    kind: str
    nodes: np.ndarray
    entries: np.ndarray
    theta_pair: Optional[tuple] = None

    def __post_init__(self):
        e = np.asarray(self.entries, complex)
        object.__setattr__(self, "entries", e)
        if e.ndim != 2 or e.shape[0] != e.shape[1] or e.shape[0] != len(self.nodes):
            raise PreconditionError("boundary operators are square on their node grid")
        if self.kind in ("RtR", "S", "T"):
            if self.theta_pair is None or self.theta_pair[0] == self.theta_pair[1]:
                raise PreconditionError("Robin-to-Robin operators need theta_1 != theta_2")

    def __matmul__(self, other):
        other = other.entries if isinstance(other, BoundaryOperator) else other
        return self.entries @ other

    @property
    def n(self):
        return self.entries.shape[0]

    @classmethod
    def identity(cls, nodes):
        return cls("Identity", nodes, np.eye(len(nodes)))


def _default_basis(basis):
    return basis if basis is not None else GaussianBasis()


def _check_cells_in_period(potential, basis):
    if potential is None:
        return
    if potential.d != 2:
        raise PreconditionError("boundary maps are implemented in 2D")
    width = potential.hi[0] - potential.lo[0]
    if width > basis.L:
        raise PreconditionError("the potential box is wider than the boundary period")


def _volume_solver(potential, medium, kind, basis):
    """Periodic kernel and LU of the Nystrom system (None when V = 0)."""
    kern = PeriodicKernel(medium, basis.L, kind)
    if potential is None or not np.any(potential.contrast(medium.k)):
        return kern, None
    if np.any(potential.q.imag < 0):
        raise PreconditionError("Im q < 0 somewhere")
    A = assemble_ls_system(potential, medium, kernel=kern)
    return kern, (A, linalg.lu_factor(A))


def _responses(potential, medium, basis, kind, theta=None):
    """Node values of (trace, flux) for every basis column.

    kind "robin": data are Robin data with impedance theta.
    kind "dirichlet": data are Dirichlet data; only the flux is new.
    """
    k = medium.k
    th = medium.theta if theta is None else theta
    med = MediumSpec(2, k, th if kind == "robin" else 0.0)
    kern, lu = _volume_solver(potential, med, kind, basis)
    xi, coeff = basis.coefficients()
    gam = branch_sqrt(xi, k)
    data = basis.synthesize(xi, coeff)
    if kind == "robin":
        trace = basis.synthesize(xi, coeff / (th - gam)[:, None])
    else:
        trace = data
        flux = basis.synthesize(xi, -gam[:, None] * coeff)
    if lu is not None:
        A, fac = lu
        C = potential.centers
        src_w = potential.cell_volume * potential.contrast(k)
        u_inc = kern.volume_from_coefficients(C, xi, coeff)
        u = linalg.lu_solve(fac, u_inc)
        res = np.linalg.norm(A @ u - u_inc) / max(np.linalg.norm(u_inc), 1e-300)
        if not res < 1e-8:
            raise ConvergenceError(f"volume solve residual {res:.2e}", estimate=res)
        Bv = kern.boundary_from_volume(basis.nodes, C) * src_w[None, :]
        if kind == "robin":
            trace = trace + Bv @ u
        else:
            flux = flux + Bv @ u
    if kind == "robin":
        flux = data - th * trace
    return data, trace, flux


def _solve_map(out, data):
    return linalg.solve(data.T, out.T).T


def build_rtr(theta1, theta2, potential: Optional[PotentialGrid], medium: MediumSpec,
              params=None, basis: Optional[GaussianBasis] = None):
    """Robin-to-Robin map f = u_n + theta1 u  ->  u_n + theta2 u."""
    theta1, theta2 = complex(theta1), complex(theta2)
    if theta1 == theta2:
        raise PreconditionError("the Robin-to-Robin map needs theta_1 != theta_2")
    MediumSpec(2, medium.k, theta1)
    basis = _default_basis(basis)
    _check_cells_in_period(potential, basis)
    data, trace, flux = _responses(potential, medium, basis, "robin", theta1)
    R = _solve_map(flux + theta2 * trace, data)
    return BoundaryOperator("RtR", basis.nodes, R, (theta1, theta2))


def build_dtn(potential: Optional[PotentialGrid], medium: MediumSpec, params=None,
              basis: Optional[GaussianBasis] = None, method="dirichlet", theta=50j):
    """Dirichlet-to-Neumann map u|_{x_2=0} -> du/dx_2|_{x_2=0}.

    method="dirichlet" solves Dirichlet problems with the image kernel;
    method="robin" builds it from one Robin solve as T^{-1} - theta, T the
    Robin-to-trace map (cross-check).
    """
    basis = _default_basis(basis)
    _check_cells_in_period(potential, basis)
    if method == "dirichlet":
        data, trace, flux = _responses(potential, medium, basis, "dirichlet")
        L = _solve_map(flux, data)
    elif method == "robin":
        data, trace, flux = _responses(potential, medium, basis, "robin", complex(theta))
        T = _solve_map(trace, data)
        L = np.linalg.inv(T) - complex(theta) * np.eye(basis.n)
    else:
        raise PreconditionError(f"unknown method {method!r}")
    return BoundaryOperator("DtN", basis.nodes, L)


def build_ntd(potential: Optional[PotentialGrid], medium: MediumSpec, params=None,
              basis: Optional[GaussianBasis] = None):
    """Neumann-to-Dirichlet map du/dx_2 -> u on the boundary (theta = 0 solves)."""
    basis = _default_basis(basis)
    _check_cells_in_period(potential, basis)
    data, trace, flux = _responses(potential, medium, basis, "robin", 0.0)
    return BoundaryOperator("NtD", basis.nodes, _solve_map(trace, data))


def lemma_scale(theta1, theta2):
    return LEMMA_SIGN * (complex(theta2) - complex(theta1))


def reduce_rtr_to_dtn(R: BoundaryOperator, theta1, theta2, cond_max=1e10):
    """Recover Lambda = c S^{-1} - theta1 I from R, with S = R - I."""
    theta1, theta2 = complex(theta1), complex(theta2)
    if theta1 == theta2:
        raise PreconditionError("theta_1 must differ from theta_2")
    S = R.entries - np.eye(R.n)
    sv = linalg.svdvals(S)
    if sv[-1] == 0 or sv[0] / sv[-1] > cond_max:
        raise SingularityError(
            f"S = R - I is not injective on this grid (condition {sv[0] / max(sv[-1], 1e-300):.2e});"
            " the boundary grid under-resolves the data")
    L = lemma_scale(theta1, theta2) * np.linalg.inv(S) - theta1 * np.eye(R.n)
    return BoundaryOperator("DtN", R.nodes, L)


def band_norm(M, P):
    """Spectral norm of M restricted to the range of the projector P."""
    return float(np.linalg.norm(M @ P, 2))


def fit_scale(M, P, n_samples=10, seed=0):
    """Least-squares scalar c with M f ~ c f over random band-limited f."""
    rng = np.random.default_rng(seed)
    F = P @ (rng.standard_normal((P.shape[0], n_samples)) + 1j * rng.standard_normal((P.shape[0], n_samples)))
    MF = M @ F
    return complex(np.vdot(F.ravel(), MF.ravel()) / np.vdot(F.ravel(), F.ravel()))


def check_identities(potential: Optional[PotentialGrid], medium: MediumSpec, params=None,
                     basis: Optional[GaussianBasis] = None, theta1=0.0, theta2=1.0, seed=0):
    """Residual norms of the operator identities on the band-limited subspace."""
    basis = _default_basis(basis)
    P = basis.band_projector()
    I = np.eye(basis.n)
    Lam = build_dtn(potential, medium, basis=basis).entries
    N = build_ntd(potential, medium, basis=basis).entries
    R = build_rtr(theta1, theta2, potential, medium, basis=basis)
    S = R.entries - I
    t1, t2 = complex(theta1), complex(theta2)
    c = fit_scale(S @ (Lam + t1 * I), P, seed=seed)
    c_lemma = lemma_scale(t1, t2)
    Lrec = reduce_rtr_to_dtn(R, t1, t2).entries
    # propagation: a second, independent assembly for the same potential
    R2 = build_rtr(theta1, theta2, potential, medium, basis=basis)
    Lrec2 = reduce_rtr_to_dtn(R2, t1, t2).entries
    report = {
        "LN-I": band_norm(Lam @ N - I, P),
        "NL-I": band_norm(N @ Lam - I, P),
        "R(L+t1)-(L+t2)": band_norm(R.entries @ (Lam + t1 * I) - (Lam + t2 * I), P),
        "S(L+t1)-cI": band_norm(S @ (Lam + t1 * I) - c * I, P),
        "(L+t1)S-cI": band_norm((Lam + t1 * I) @ S - c * I, P),
        "reduced-direct": band_norm(Lrec - Lam, P),
        "propagation": float(np.max(np.abs(Lrec - Lrec2))) if np.array_equal(R.entries, R2.entries) else np.inf,
        "c_fit": [c.real, c.imag],
        "c_theta2_minus_theta1": abs(c - (t2 - t1)) <= abs(c - (t1 - t2)),
        "c_lemma_residual": band_norm(S @ (Lam + t1 * I) - c_lemma * I, P),
        "sigma_min_S": float(linalg.svdvals(S)[-1]),
    }
    return report


# ---------------------------------------------------------------------------
# kernel of the DtN map on the infinite boundary line
def _dG0_dR(R, k):
    return -0.25j * k * hankel1_first(k * R)


def dtn_kernel(x_prime, y_prime, potential: Optional[PotentialGrid], medium: MediumSpec,
               params=None):
    """Mixed normal derivative d^2 G^D_q / dx_2 dy_2 at x_2 = y_2 = 0.

    With V = 0 this is (i k / 2) H1(k rho) / rho.  Otherwise the perturbed
    Dirichlet Green's function is obtained from a Lippmann-Schwinger solve
    with the image kernel as background.
    """
    if medium.d != 2:
        raise PreconditionError("dtn_kernel is implemented in 2D")
    x1, y1 = float(np.ravel(x_prime)[0]), float(np.ravel(y_prime)[0])
    rho = abs(x1 - y1)
    if rho == 0:
        raise SingularityError("the DtN kernel is hypersingular at coincident points")
    k = medium.k
    base = complex(-2 * _dG0_dR(rho, k) / rho)
    if potential is None or not np.any(potential.contrast(k)):
        return base
    med = MediumSpec(2, k, 0.0)
    solver = _dirichlet_solver(potential, med)
    C = potential.centers
    # d/dy_2 G^D(z, (y_1, 0)) = -2 z_2 G0'(R)/R, and the same form for d/dx_2 at the boundary
    Ry = np.hypot(C[:, 0] - y1, C[:, 1])
    phi_inc = -2 * C[:, 1] * free_kernel_dR(Ry, 2, k) / Ry
    phi = linalg.lu_solve(solver, phi_inc)
    Rx = np.hypot(C[:, 0] - x1, C[:, 1])
    dx = -2 * C[:, 1] * free_kernel_dR(Rx, 2, k) / Rx
    w = potential.cell_volume * potential.contrast(k)
    return base + complex(np.sum(dx * w * phi))


_DIRICHLET_CACHE = {}


def _dirichlet_solver(potential, medium):
    key = (id(potential), medium.k)
    hit = _DIRICHLET_CACHE.get(key)
    if hit is not None and hit[0] is potential:
        return hit[1]
    A = assemble_ls_system(potential, medium, kernel=HalfSpaceKernel(medium, "dirichlet"))
    fac = linalg.lu_factor(A)
    _DIRICHLET_CACHE.clear()
    _DIRICHLET_CACHE[key] = (potential, fac)
    return fac


class RobinToRobinMap(BaseEstimator, TransformerMixin):
    """Estimator wrapper: ``fit(potential)`` assembles R and the recovered DtN
    map; ``transform(F)`` applies R to node data (rows are data vectors)."""

    def __init__(self, k=1.0, theta1=0.0, theta2=1.0, n_nodes=64, spacing=0.25, width=None):
        self.k = k
        self.theta1 = theta1
        self.theta2 = theta2
        self.n_nodes = n_nodes
        self.spacing = spacing
        self.width = width

    def fit(self, potential: Optional[PotentialGrid] = None, y=None):
        self.basis_ = GaussianBasis(self.n_nodes, self.spacing, self.width)
        medium = MediumSpec(2, self.k, 0.0)
        self.operator_ = build_rtr(self.theta1, self.theta2, potential, medium, basis=self.basis_)
        self.dtn_ = reduce_rtr_to_dtn(self.operator_, self.theta1, self.theta2)
        return self

    def transform(self, F):
        F = np.atleast_2d(np.asarray(F, complex))
        if F.shape[1] != self.n_nodes:
            raise PreconditionError(f"data rows must have {self.n_nodes} node values")
        return F @ self.operator_.entries.T
