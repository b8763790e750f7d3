"""Radial spectral integrals for the half-space kernels.

Every kernel in the package reduces to

    I(rho, s) = int_0^Xi  A(xi, gamma) e^{-gamma s} W(xi rho) dxi,

with W(t) = cos(t) in 2D and xi J0(t) in 3D (or their rho-derivatives),
gamma = sqrt(xi^2 - k^2) on the radiating branch, and A possibly carrying a
simple pole 1/(gamma - theta).  The integral is split at the branch point:

    [0, k]    xi = k sin(phi),  dxi = i gamma dphi
    [k, Xi]   xi = k cosh(t),   dxi = gamma dt

which removes the 1/gamma endpoint behaviour.  A pole at t_c = asinh(theta/k)
is subtracted analytically; for real theta the outgoing limit theta + i0 is
taken.  Panels are Gauss-Legendre with at most a few radians of phase each.
"""
import numpy as np
from scipy import special

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(24)
_MAX_PHASE = 6.0
_DECAY_CUT = 40.0
_CHUNK = 2_000_000


def _gauss(breaks):
    breaks = np.asarray(breaks, dtype=float)
    a, b = breaks[:-1, None], breaks[1:, None]
    x = 0.5 * (b - a) * _NODES[None, :] + 0.5 * (a + b)
    w = 0.5 * (b - a) * _WEIGHTS[None, :]
    return x.ravel(), w.ravel()


def _graded(center, scale, lo, hi, top=0.5):
    """Geometric breakpoints around ``center`` from ``scale`` up to ``top``."""
    pts = []
    h = scale
    while h < top:
        pts += [center - h, center + h]
        h *= 2.0
    return [p for p in pts if lo < p < hi]


def _weight(kind, d, xi, rho):
    """Radial weight W(xi rho) or its rho-derivative, shape (points, nodes)."""
    arg = rho[:, None] * xi[None, :]
    if d == 2:
        if kind == "value":
            return np.cos(arg)
        return -xi[None, :] * np.sin(arg)
    if kind == "value":
        return xi[None, :] * special.jv(0, arg)
    return -(xi * xi)[None, :] * special.jv(1, arg)


def _quantize(v):
    """Snap values to a relative grid of 1e-14 so float noise does not
    defeat de-duplication."""
    q = 1e-14 * max(float(np.max(np.abs(v))), 1e-300)
    return np.round(v / q) * q


class RadialIntegrator:
    """Evaluates I(rho, s) for many (rho, s) pairs sharing one node set.

    Parameters
    ----------
    amp : callable (xi, gamma) -> complex array
        Amplitude. When ``theta`` is given it is divided by (gamma - theta)
        inside the integrator, so ``amp`` must be regular at gamma = theta.
    d, k : dimension and wavenumber.
    theta : complex or None
        Pole location in gamma; ``None`` means no pole factor.
    kind : "value" or "drho".
    """

    def __init__(self, amp, d, k, theta=None, kind="value"):
        self.amp = amp
        self.d = d
        self.k = float(k)
        self.theta = None if theta is None else complex(theta)
        self.kind = kind

    # node construction -------------------------------------------------
    def _breaks(self, rho_max, s_min, s_max, xi_max):
        k = self.k
        th = self.theta
        # phi segment: phases k*rho*sin(phi) and k*s*cos(phi)
        n_a = max(2, int(np.ceil(k * (rho_max + s_max) * (np.pi / 2) / _MAX_PHASE)))
        ba = list(np.linspace(0.0, np.pi / 2, n_a + 1))
        if th is not None and 0 < abs(th) < k:
            ba += [np.pi / 2 - p for p in _graded(0.0, abs(th) / (8 * k), -1, np.pi / 2)]
        ba = np.unique(np.clip(ba, 0.0, np.pi / 2))
        # t segment, uniform in xi then mapped to t
        if xi_max is None:
            if s_min <= 0:
                raise ValueError("unbounded spectral integral needs s > 0 or a cutoff")
            xi_end = np.hypot(k, _DECAY_CUT / s_min)
        else:
            xi_end = float(xi_max)
        t_end = np.arccosh(max(xi_end / k, 1.0))
        dxi = _MAX_PHASE / max(rho_max, 1e-300)
        if s_min > 0:
            dxi = min(dxi, 2 * _MAX_PHASE / s_min)
        n_b = max(2, int(np.ceil((xi_end - k) / dxi)))
        bb = list(np.arccosh(np.linspace(k, xi_end, n_b + 1) / k))
        # bound panel length in t as well, so exponential growth of xi stays resolved
        bb += list(np.arange(0.0, t_end, 0.25))
        if th is not None and 0 < abs(th) < k:
            bb += _graded(0.0, abs(th) / (8 * k), -1, t_end)
        pole = self._pole(t_end)
        if pole is not None:
            tp = pole.real
            half = min(0.05, 0.5 * tp, 0.5 * (t_end - tp),
                       0.5 * _MAX_PHASE / (max(rho_max, 1e-300) * self.k * np.cosh(tp)))
            bb = [p for p in bb if abs(p - tp) > half * 0.999]
            bb += [tp - half, tp + half]
            bb += _graded(tp, 2 * half, 0.0, t_end, top=0.25)
        elif th is not None and th.real > 0 and th.imag > 0:
            tc = np.arcsinh(th / k)
            if 0 < tc.real < t_end:
                scale = max(abs(tc.imag), 1e-14) / 4
                bb += _graded(tc.real, scale, 0.0, t_end)
        bb = np.unique(np.clip(bb, 0.0, t_end))
        return ba, bb, t_end, pole

    def _pole(self, t_end):
        """Complex pole position in t when it should be subtracted, else None."""
        th = self.theta
        if th is None or th == 0 or th.real <= 0:
            return None
        tc = complex(np.arcsinh(th / self.k))
        if tc.real >= t_end or abs(tc.imag) > 0.5 or tc.real < 1e-6:
            return None
        return tc

    # evaluation ----------------------------------------------------------
    def _node_amplitudes(self, ba, bb):
        k = self.k
        phi, wphi = _gauss(ba)
        t, wt = _gauss(bb)
        xi = np.concatenate([k * np.sin(phi), k * np.cosh(t)])
        gam = np.concatenate([-1j * k * np.cos(phi), k * np.sinh(t) + 0j])
        jac = np.concatenate([1j * gam[: phi.size] * wphi, gam[phi.size:] * wt])
        a = np.asarray(self.amp(xi, gam), dtype=complex) * jac
        if self.theta is not None:
            a = a / (gam - self.theta)
        return xi, gam, a, t, wt, phi.size

    def __call__(self, rho, s, xi_max=None):
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        s = np.broadcast_to(np.atleast_1d(np.asarray(s, dtype=float)), rho.shape)
        shape = rho.shape
        rho, s = rho.ravel(), s.ravel()
        ba, bb, t_end, pole = self._breaks(rho.max(), s.min(), s.max(), xi_max)
        nodes = self._node_amplitudes(ba, bb)
        ru, ri = np.unique(_quantize(rho), return_inverse=True)
        su, si = np.unique(_quantize(s), return_inverse=True)
        if ru.size * su.size <= 4 * rho.size + 64:
            table = self._tensor(nodes, ru, su, pole, t_end)
            return table[ri.ravel(), si.ravel()].reshape(shape)
        xi, gam, a, t, wt, na = nodes
        out = np.empty(rho.size, dtype=complex)
        step = max(1, _CHUNK // xi.size)
        for i0 in range(0, rho.size, step):
            sl = slice(i0, i0 + step)
            r, ss = rho[sl], s[sl]
            kern = np.exp(-np.outer(ss, gam)) * _weight(self.kind, self.d, xi, r)
            val = kern @ a
            if pole is not None:
                val += self._pole_correction(pole, r, ss, t, wt, na, t_end)
            out[sl] = val
        return out.reshape(shape)

    def _tensor(self, nodes, ru, su, pole, t_end):
        """Values on the tensor grid ru x su."""
        xi, gam, a, t, wt, na = nodes
        amp = a[:, None] * np.exp(-np.outer(gam, su))
        out = np.empty((ru.size, su.size), dtype=complex)
        step = max(1, _CHUNK // xi.size)
        for i0 in range(0, ru.size, step):
            sl = slice(i0, i0 + step)
            out[sl] = _weight(self.kind, self.d, xi, ru[sl]) @ amp
        if pole is not None:
            R, S = np.meshgrid(ru, su, indexing="ij")
            out += self._pole_correction(pole, R.ravel(), S.ravel(), t, wt, na,
                                         t_end).reshape(R.shape)
        return out

    def _pole_correction(self, tc, r, s, t, wt, na, t_end):
        """Add back the subtracted pole: -sum c/(t-tc) w + exact integral."""
        k, th = self.k, self.theta
        xic = k * np.cosh(tc)
        g = complex(np.asarray(self.amp(np.array([xic]), np.array([th])), dtype=complex)[0])
        # residue of A e^{-gamma s} W gamma/(gamma - theta) in t
        if self.d == 2:
            w_c = np.cos(xic * r) if self.kind == "value" else -xic * np.sin(xic * r)
        else:
            w_c = (xic * special.jv(0, xic * r) if self.kind == "value"
                   else -xic ** 2 * special.jv(1, xic * r))
        c = g * np.exp(-th * s) * w_c * th / xic
        discrete = np.sum(wt / (t - tc))
        if th.imag == 0:
            exact = np.log((t_end - tc.real) / tc.real) + 1j * np.pi
        else:
            exact = np.log(t_end - tc) - np.log(-tc)
        return c * (exact - discrete)
