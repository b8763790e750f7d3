"""Kernels of the half-plane problem made L-periodic in x_1.

Boundary maps are assembled on a periodic supercell: every object is a
Fourier series in xi_m = 2 pi m / L, so the maps become exact multipliers
(up to quadrature of the volume part) and the operator identities can be
checked at the discrete level without truncation artefacts.

    G_per(x, y) = (1/L) sum_m g_m(x_2, y_2) e^{i xi_m (x_1 - y_1)}
    g_m = [e^{-gamma |x_2 - y_2|} + R_m e^{-gamma (x_2 + y_2)}] / (2 gamma)

with R_m = (gamma + theta)/(gamma - theta) for the Robin problem and -1 for
the Dirichlet problem.  The same-row direct sum has a logarithmic
singularity which is split off in closed form.
"""
import numpy as np

from .exceptions import PreconditionError
from .green import MediumSpec
from .numerics import branch_sqrt

_EULER = 0.5772156649015329
_TAIL = 37.0
_LOG_MODES = 20000


def _modes(M, L, k):
    m = np.arange(0, M + 1)
    xi = 2 * np.pi * m / L
    return m, xi, branch_sqrt(xi, k)


def check_resonance(medium: MediumSpec, L, tol=1e-3):
    """Reject periods with a mode sitting on gamma = 0 or on the surface pole."""
    k = medium.k
    M = int(np.ceil((abs(medium.surface_wavenumber) + 2 * k) * L / (2 * np.pi))) + 2
    _, xi, gam = _modes(M, L, k)
    if np.min(np.abs(gam)) < tol * k:
        raise PreconditionError(f"period L = {L} is resonant: k L / 2 pi is (nearly) an integer")
    th = medium.theta
    if th != 0 and np.min(np.abs(gam - th)) < tol * max(k, abs(th)):
        raise PreconditionError(f"period L = {L} puts a mode on the surface-wave pole")


class PeriodicKernel:
    """Periodic Robin / Dirichlet kernel with the table interface used by
    ``forward.assemble_ls_system``."""

    def __init__(self, medium: MediumSpec, L, kind="robin"):
        if medium.d != 2:
            raise PreconditionError("periodic boundary maps are implemented in 2D only")
        if kind not in ("robin", "dirichlet"):
            raise PreconditionError(f"unknown kernel kind {kind!r}")
        check_resonance(medium, L)
        self.medium = medium
        self.L = float(L)
        self.kind = kind

    def _refl_coeff(self, gam):
        th = self.medium.theta
        if self.kind == "dirichlet":
            return -np.ones_like(gam)
        return (gam + th) / (gam - th)

    def _count(self, depth):
        return int(np.ceil(_TAIL / depth * self.L / (2 * np.pi))) + 2

    # -- volume tables -----------------------------------------------------
    def _same_row(self, dx1):
        """Direct part on the same row, minus G_free at dx1 = 0."""
        k, L = self.medium.k, self.L
        m, xi, gam = _modes(_LOG_MODES, L, k)
        corr = (1 / gam[1:] - 1 / xi[1:])
        out = np.empty(dx1.shape, complex)
        flat = dx1.ravel()
        res = np.empty(flat.size, complex)
        for i, x in enumerate(flat):
            ser = 1 / gam[0] + 2 * np.sum(corr * np.cos(xi[1:] * x))
            res[i] = ser / (2 * L)
            if x > 0:
                res[i] -= np.log(abs(2 * np.sin(np.pi * x / L))) / (2 * np.pi)
            else:
                res[i] += (-np.log(2 * np.pi / L) + np.log(k / 2) + _EULER) / (2 * np.pi) - 0.25j
        out[:] = res.reshape(dx1.shape)
        return out

    def direct(self, dx):
        """Direct periodic sum at non-negative offsets dx (..., 2)."""
        dx1, dz = dx[..., 0], dx[..., 1]
        out = np.empty(dx1.shape, complex)
        zero = dz == 0
        if np.any(zero):
            out[zero] = self._same_row(dx1[zero])
        for z in np.unique(dz[~zero]):
            sel = dz == z
            m, xi, gam = _modes(self._count(z), self.L, self.medium.k)
            w = np.where(m == 0, 1.0, 2.0)
            a = w * np.exp(-gam * z) / (2 * gam) / self.L
            out[sel] = np.cos(np.outer(dx1[sel], xi)) @ a
        return out

    def reflected(self, rho, s):
        rho = np.asarray(rho, float)
        s = np.broadcast_to(np.asarray(s, float), rho.shape)
        m, xi, gam = _modes(self._count(float(np.min(s))), self.L, self.medium.k)
        w = np.where(m == 0, 1.0, 2.0)
        a = w * self._refl_coeff(gam) / (2 * gam) / self.L
        out = np.empty(rho.shape, complex)
        for sv in np.unique(s):
            sel = s == sv
            out[sel] = np.cos(np.outer(rho[sel], xi)) @ (a * np.exp(-gam * sv))
        return out

    # -- boundary couplings ------------------------------------------------
    def _full_modes(self, M):
        m = np.arange(-M, M + 1)
        xi = 2 * np.pi * m / self.L
        return xi, branch_sqrt(xi, self.medium.k)

    def boundary_from_volume(self, nodes_x1, Y):
        """Matrix B[j, c]: value at (x_j, 0) of the field of a unit source at Y[c]
        (Robin), or its x_2-derivative (Dirichlet)."""
        xi, gam = self._full_modes(self._count(float(Y[:, 1].min())))
        if self.kind == "robin":
            amp = np.exp(-np.outer(gam, Y[:, 1])) / (gam - self.medium.theta)[:, None]
        else:
            amp = np.exp(-np.outer(gam, Y[:, 1]))
        phase = np.exp(1j * np.outer(nodes_x1, xi))
        return phase @ (amp * np.exp(-1j * np.outer(xi, Y[:, 0]))) / self.L

    def volume_from_coefficients(self, X, xi, coeff, theta=None):
        """Field at X radiated by boundary data with Fourier coefficients
        ``coeff`` (modes xi, one column per datum).

        Robin: u = -sum c_m e^{-gamma x_2}/(gamma - theta) e^{i xi x_1}.
        Dirichlet: u = sum c_m e^{-gamma x_2} e^{i xi x_1} (the Dirichlet lift).
        """
        gam = branch_sqrt(xi, self.medium.k)
        E = np.exp(1j * np.outer(X[:, 0], xi) - np.outer(X[:, 1], gam))
        if self.kind == "robin":
            th = self.medium.theta if theta is None else theta
            return -E @ (coeff / (gam - th)[:, None])
        return E @ coeff


class GaussianBasis:
    """Periodized Gaussians centred at the N boundary nodes of a period L."""

    def __init__(self, n_nodes=64, spacing=0.25, width=None):
        self.n = int(n_nodes)
        self.spacing = float(spacing)
        self.width = 2 * self.spacing if width is None else float(width)
        self.L = self.n * self.spacing

    @property
    def nodes(self):
        return self.spacing * (np.arange(self.n) - self.n // 2)

    def modes(self):
        M = int(np.ceil(9.0 / self.width * self.L / (2 * np.pi))) + 1
        m = np.arange(-M, M + 1)
        return 2 * np.pi * m / self.L

    def coefficients(self):
        """Fourier coefficients (modes x basis) of the periodized Gaussians."""
        xi = self.modes()
        s = self.width
        amp = np.sqrt(2 * np.pi) * s / self.L * np.exp(-0.5 * (xi * s) ** 2)
        return xi, amp[:, None] * np.exp(-1j * np.outer(xi, self.nodes))

    def synthesize(self, xi, coeff):
        """Node values of sum_m coeff_m e^{i xi_m x}."""
        return np.exp(1j * np.outer(self.nodes, xi)) @ coeff

    def samples(self):
        xi, c = self.coefficients()
        return self.synthesize(xi, c)

    def band_projector(self, fraction=0.25):
        """Projector onto DFT modes |p| < fraction * N of node data."""
        n = self.n
        p = np.fft.fftfreq(n, 1.0 / n)
        mask = np.abs(p) < fraction * n
        F = np.fft.fft(np.eye(n), axis=0)
        return np.fft.ifft(mask[:, None] * F, axis=0)
