"""Green's function of the Helmholtz operator in a half-space with an
impedance (Robin) condition du/dx_d + theta*u = 0 on {x_d = 0}.

All kernels are normalized so that (Laplace + k^2) G = -delta, with
G_free = (i/4) H0^(1)(kR) in the plane and e^{ikR}/(4 pi R) in space.  The
Robin kernel is computed as

    G_theta = G_free(x - y) + G_free(x - y*) + P_theta(rho, x_d + y_d),

where y* is the mirror image of y, rho = |x' - y'| and P_theta is a smooth
radial spectral integral (see ``_spectral``).  A second, purely spectral
route integrates the raw two-term spectral kernel directly; it is kept for
validation and carries its own normalization constants.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special

from ._spectral import RadialIntegrator
from ._validation import check_dimension, check_impedance, check_point, check_positive
from .exceptions import PoleProximityError, PreconditionError, SingularityError
from .numerics import (QuadratureSpec, branch_sqrt, hankel0_first, hankel1_first,
                       integrate_oscillatory_tail)

# normalization constants used by the raw spectral kernel
PAPER_CONSTANTS = {2: (1.0 / np.sqrt(8 * np.pi), 1.0 / (4 * np.pi)),
                   3: (1.0 / (4 * np.pi), 1.0 / (2 * np.pi))}
# factor turning the raw spectral integral into the (Delta + k^2)G = -delta kernel;
# fixed by a least-squares fit against the Neumann image formula (tests/test_green.py)
RAW_TO_NORMALIZED = {2: -np.sqrt(8 * np.pi), 3: -1.0}
CONVENTION_VERSION = 1

_RADIAL_MEASURE = {2: 2.0, 3: 2 * np.pi}   # int over R^{d-1} of a radial function
_RADIAL_PREFACTOR = {2: 1.0 / np.pi, 3: 1.0 / (2 * np.pi)}


@dataclass(frozen=True)
class MediumSpec:
    """Dimension, wavenumber and boundary impedance of the background."""

    d: int
    k: float
    theta: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "d", check_dimension(self.d))
        object.__setattr__(self, "k", check_positive(self.k, "k"))
        object.__setattr__(self, "theta", check_impedance(self.theta))

    @property
    def regime(self):
        if self.theta == 0:
            return "rigid"
        if self.theta.imag > 0:
            return "absorbing"
        return "nonabsorbing"

    @property
    def surface_wavenumber(self):
        return np.sqrt(self.k ** 2 + self.theta ** 2)

    def with_theta(self, theta):
        return MediumSpec(self.d, self.k, theta)


@dataclass(frozen=True)
class SpectralKernelParams:
    c_pi: float
    c_pi_prime: float
    pole_mode: str = "residue_extraction"
    epsilon: float = 1e-3
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self):
        if self.pole_mode not in ("residue_extraction", "limiting_absorption"):
            raise PreconditionError(f"unknown pole_mode {self.pole_mode!r}")
        if not self.epsilon > 0:
            raise PreconditionError("epsilon must be positive")

    @classmethod
    def for_dimension(cls, d, **kw):
        c, cp = PAPER_CONSTANTS[check_dimension(d)]
        return cls(c, cp, **kw)


@dataclass(frozen=True)
class FarFieldFrame:
    """Polar description of x - y and the region split x_d <> c r^alpha."""

    r: float
    gamma_angle: float
    rho: float
    alpha: float = 0.3
    c: float = 1.0

    @classmethod
    def from_points(cls, x, y, alpha=0.3, c=1.0):
        x, y = np.asarray(x, float), np.asarray(y, float)
        v = x - y
        r = float(np.linalg.norm(v))
        if r == 0:
            raise SingularityError("far-field frame needs x != y")
        rho = float(np.linalg.norm(v[:-1]))
        if len(x) == 2:
            ang = float(np.arctan2(v[1], v[0]))      # angle from the boundary
        else:
            ang = float(np.arccos(np.clip(v[2] / r, -1, 1)))   # angle from the normal
        return cls(r, ang, rho, alpha, c)


def _params(params, d):
    return params if params is not None else SpectralKernelParams.for_dimension(d)


# ---------------------------------------------------------------------------
# free-space kernel
def free_kernel(R, d, k):
    """Vectorized G_free as a function of distance R > 0."""
    R = np.asarray(R, dtype=float)
    if d == 2:
        return 0.25j * (special.j0(k * R) + 1j * special.y0(k * R))
    return np.exp(1j * k * R) / (4 * np.pi * R)


def free_kernel_dR(R, d, k):
    """Vectorized dG_free/dR."""
    R = np.asarray(R, dtype=float)
    if d == 2:
        return -0.25j * k * (special.j1(k * R) + 1j * special.y1(k * R))
    return np.exp(1j * k * R) * (1j * k * R - 1) / (4 * np.pi * R * R)


def green_free(x, y, medium: MediumSpec):
    x = check_point(x, medium.d, "x")
    y = check_point(y, medium.d, "y")
    R = np.linalg.norm(x - y)
    if R == 0:
        raise SingularityError("green_free evaluated at coincident points")
    if medium.d == 2:
        return complex(0.25j * hankel0_first(medium.k * R))
    return complex(np.exp(1j * medium.k * R) / (4 * np.pi * R))


def green_free_gradient(x, y, medium: MediumSpec):
    """Gradient of G_free with respect to x."""
    x = check_point(x, medium.d, "x")
    y = check_point(y, medium.d, "y")
    v = x - y
    R = np.linalg.norm(v)
    if R == 0:
        raise SingularityError("gradient evaluated at coincident points")
    if medium.d == 2:
        dr = -0.25j * medium.k * hankel1_first(medium.k * R)
    else:
        dr = free_kernel_dR(R, 3, medium.k)
    return complex(dr) * v / R


def _mirror(y):
    y = np.array(y, dtype=float)
    y[..., -1] *= -1
    return y


def green_images(x, y, medium: MediumSpec, kind="dirichlet"):
    """G(x,y) -/+ G(x,y*) for the Dirichlet / Neumann half-space problem."""
    if kind not in ("dirichlet", "neumann"):
        raise PreconditionError(f"kind must be 'dirichlet' or 'neumann', got {kind!r}")
    if kind == "neumann" and medium.theta != 0:
        raise PreconditionError("the Neumann image kernel is the theta = 0 case")
    x = check_point(x, medium.d, "x")
    y = check_point(y, medium.d, "y")
    ys = _mirror(y)
    if np.array_equal(x, y):
        raise SingularityError("green_images evaluated at coincident points")
    g1 = free_kernel(np.linalg.norm(x - y), medium.d, medium.k)
    if kind == "dirichlet" and x[-1] == 0:
        return 0j
    g2 = free_kernel(np.linalg.norm(x - ys), medium.d, medium.k)
    return complex(g1 - g2) if kind == "dirichlet" else complex(g1 + g2)


def green_images_gradient(x, y, medium: MediumSpec, kind="dirichlet"):
    x = check_point(x, medium.d, "x")
    y = check_point(y, medium.d, "y")
    ys = _mirror(y)
    sign = -1.0 if kind == "dirichlet" else 1.0
    out = np.zeros(medium.d, dtype=complex)
    for z, sg in ((y, 1.0), (ys, sign)):
        v = x - z
        R = np.linalg.norm(v)
        if R == 0:
            raise SingularityError("gradient evaluated at coincident points")
        out += sg * free_kernel_dR(R, medium.d, medium.k) * v / R
    return out


# ---------------------------------------------------------------------------
# raw spectral kernel
def _hat_terms(xi, gamma, x_d, y_d, theta):
    """Two pieces of the raw spectral kernel without the constant C_pi."""
    refl = (theta + gamma) / (theta - gamma) * np.exp(-gamma * (x_d + y_d)) / gamma
    direct = np.exp(-gamma * abs(x_d - y_d)) / gamma
    return refl, direct


def spectral_green_hat(xi, x_d, y_d, medium: MediumSpec, params=None, pole_tol=1e-10):
    """Raw spectral kernel C_pi[((theta+g)/(theta-g)) e^{-g(x_d+y_d)} - e^{-g|x_d-y_d|}]/g."""
    p = _params(params, medium.d)
    gam = branch_sqrt(xi, medium.k)
    th = medium.theta
    if abs(gam - th) < pole_tol * max(1.0, abs(th)):
        raise PoleProximityError("spectral kernel evaluated at its surface-wave pole",
                                 estimate=None, error=abs(gam - th))
    if gam == 0:
        raise PoleProximityError("spectral kernel evaluated at the branch point",
                                 estimate=None, error=0.0)
    refl, direct = _hat_terms(xi, gam, x_d, y_d, th)
    return complex(p.c_pi * (refl - direct))


# ---------------------------------------------------------------------------
# correction term P_theta = G_theta - (Neumann image kernel)
def _correction_integrator(medium, kind="value", extra=None):
    th = medium.theta

    def amp(xi, gam):
        a = th / gam
        return a if extra is None else a * extra(xi, gam)

    return RadialIntegrator(amp, medium.d, medium.k, theta=th, kind=kind)


def correction_values(medium: MediumSpec, rho, s, kind="value"):
    """Vectorized P_theta(rho, s) and derivatives.

    kind: "value", "drho" (d/drho) or "ds" (d/ds, equal to d/dx_d and d/dy_d).
    """
    rho = np.asarray(rho, dtype=float)
    if medium.theta == 0:
        return np.zeros(np.broadcast(rho, np.asarray(s)).shape, dtype=complex)
    pref = _RADIAL_PREFACTOR[medium.d]
    if kind == "ds":
        integ = _correction_integrator(medium, "value", extra=lambda xi, g: -g)
    else:
        integ = _correction_integrator(medium, kind)
    return pref * integ(rho, s)


def robin_values(medium: MediumSpec, X, Y):
    """Vectorized G_theta(X[i], Y[i]) by the image split (no validation)."""
    X = np.atleast_2d(X)
    Y = np.atleast_2d(Y)
    R1 = np.linalg.norm(X - Y, axis=1)
    R2 = np.linalg.norm(X - _mirror(Y), axis=1)
    out = free_kernel(R1, medium.d, medium.k) + free_kernel(R2, medium.d, medium.k)
    if medium.theta != 0:
        rho = np.linalg.norm(X[:, :-1] - Y[:, :-1], axis=1)
        out = out + correction_values(medium, rho, X[:, -1] + Y[:, -1])
    return out


def robin_gradient_values(medium: MediumSpec, X, Y):
    """Vectorized gradient in x of G_theta(X[i], Y[i]); shape (n, d)."""
    X = np.atleast_2d(X)
    Y = np.atleast_2d(Y)
    out = np.zeros(X.shape, dtype=complex)
    for Z in (Y, _mirror(Y)):
        V = X - Z
        R = np.linalg.norm(V, axis=1)
        out += (free_kernel_dR(R, medium.d, medium.k) / R)[:, None] * V
    if medium.theta != 0:
        H = X[:, :-1] - Y[:, :-1]
        rho = np.linalg.norm(H, axis=1)
        s = X[:, -1] + Y[:, -1]
        dr = correction_values(medium, rho, s, "drho")
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(rho[:, None] > 0, H / rho[:, None], 0.0)
        out[:, :-1] += dr[:, None] * unit
        out[:, -1] += correction_values(medium, rho, s, "ds")
    return out


def _check_pair(x, y, medium):
    x = check_point(x, medium.d, "x")
    y = check_point(y, medium.d, "y")
    if np.array_equal(x, y):
        raise SingularityError("kernel evaluated at coincident points")
    if x[-1] == 0 and y[-1] == 0 and medium.theta != 0 and np.allclose(x, y):
        raise SingularityError("kernel evaluated at coincident points")
    return x, y


def _spectral_route(x, y, medium, params):
    """Raw two-term spectral integral, converted to the normalized kernel."""
    d, k, th = medium.d, medium.k, medium.theta
    c_pi = params.c_pi
    rho = float(np.linalg.norm(x[:-1] - y[:-1]))
    s = x[-1] + y[-1]
    z = abs(x[-1] - y[-1])
    xi_p = abs(np.sqrt(k * k + th * th))
    total = 0j
    terms = (
        # reflected piece: (theta+g)/(theta-g) = -(theta+g)/(g-theta)
        (lambda xi, g: -c_pi * (th + g) / g, th, s),
        (lambda xi, g: -c_pi / g, None, z),
    )
    for amp, pole, depth in terms:
        integ = RadialIntegrator(amp, d, k, theta=pole)
        if depth * 200 * max(k, xi_p) >= 40:
            total += complex(integ(rho, depth)[0])
            continue
        if rho <= 0:
            raise SingularityError("spectral route needs x != y")
        # head up to a cutoff beyond the pole, oscillatory tail afterwards
        cut = max(4 * max(k, xi_p), 60.0 / rho)
        total += complex(integ(rho, depth, xi_max=cut)[0])

        def tail(xi, amp=amp, pole=pole, depth=depth):
            g = branch_sqrt(xi, k)
            a = amp(xi, g)
            if pole is not None:
                a = a / (g - pole)
            w = np.cos(xi * rho) if d == 2 else xi * special.j0(xi * rho)
            return a * np.exp(-g * depth) * w

        total += integrate_oscillatory_tail(tail, rho, cut, params.quad).value
    raw = params.c_pi_prime * _RADIAL_MEASURE[d] * total
    return RAW_TO_NORMALIZED[d] * raw


def green_robin(x, y, medium: MediumSpec, params: Optional[SpectralKernelParams] = None,
                method="split"):
    """Robin half-space Green's function G_theta(x, y).

    method="split" uses images plus the smooth spectral correction;
    method="spectral" integrates the raw spectral kernel and converts it.
    For real theta > 0 the surface-wave pole is resolved per ``params.pole_mode``.
    """
    p = _params(params, medium.d)
    x, y = _check_pair(x, y, medium)
    if p.pole_mode == "limiting_absorption" and medium.regime == "nonabsorbing":
        e = p.epsilon
        inner = SpectralKernelParams(p.c_pi, p.c_pi_prime, quad=p.quad)
        g1 = green_robin(x, y, medium.with_theta(medium.theta + 1j * e), inner, method)
        g2 = green_robin(x, y, medium.with_theta(medium.theta + 0.5j * e), inner, method)
        return 2 * g2 - g1
    if method == "spectral":
        return complex(_spectral_route(x, y, medium, p))
    if method != "split":
        raise PreconditionError(f"unknown method {method!r}")
    return complex(robin_values(medium, x[None], y[None])[0])


def green_robin_gradient(x, y, medium: MediumSpec, params=None):
    """Gradient in x of G_theta(x, y), from closed-form derivatives of the
    image terms and of the spectral integrand."""
    _params(params, medium.d)
    x, y = _check_pair(x, y, medium)
    return robin_gradient_values(medium, x[None], y[None])[0]


def correction_term(x, y, medium: MediumSpec, params=None):
    """P_theta(x, y) = G_theta - (G_free(x-y) + G_free(x-y*)) in the absorbing regime."""
    if medium.regime != "absorbing":
        raise PreconditionError("correction_term expects Im theta > 0")
    x = check_point(x, medium.d, "x")
    y = check_point(y, medium.d, "y")
    rho = np.linalg.norm(x[:-1] - y[:-1])
    return complex(np.ravel(correction_values(medium, rho, x[-1] + y[-1]))[0])


# ---------------------------------------------------------------------------
# boundary identities
def robin_operator_values(medium: MediumSpec, X, Y):
    """(d/dx_d + theta) G_theta(X[i], Y[i]), vectorized."""
    X = np.atleast_2d(X)
    Y = np.atleast_2d(Y)
    grad = robin_gradient_values(medium, X, Y)
    if medium.theta == 0:
        return grad[:, -1]
    return grad[:, -1] + medium.theta * robin_values(medium, X, Y)


def _boundary_rule(d, center, support, n):
    """Composite Gauss-Legendre rule on a segment / square of the boundary."""
    x, w = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(-support, support, n + 1)
    a, b = edges[:-1, None], edges[1:, None]
    t = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    wt = (0.5 * (b - a) * w).ravel()
    if d == 2:
        return (center[0] + t)[:, None], wt
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    W = np.outer(wt, wt).ravel()
    return np.column_stack([center[0] + T1.ravel(), center[1] + T2.ravel()]), W


def robin_boundary_residual(y, medium: MediumSpec, params=None, probe: Callable = None,
                            support=6.0, panels=48):
    """Integral over the boundary of (dG/dx_d + theta G)(x', 0; y) probe(x').

    For a source strictly inside the half-space this vanishes identically
    (the kernel satisfies the homogeneous Robin condition), so the return
    value is the residual of that identity.
    """
    _params(params, medium.d)
    y = check_point(y, medium.d, "y", allow_boundary=False)
    if probe is None:
        return 0j
    pts, w = _boundary_rule(medium.d, y[:-1], support, panels if medium.d == 2 else 12)
    vals = np.asarray(probe(pts), dtype=complex)
    if not np.any(vals):
        return 0j
    X = np.column_stack([pts, np.zeros(len(pts))])
    Y = np.broadcast_to(y, X.shape)
    kern = robin_operator_values(medium, X, Y)
    return complex(np.sum(w * kern * vals))


def boundary_delta_limit(height, medium: MediumSpec, params=None, width=0.5,
                         convention="normalized"):
    """Ratio  int (d/dx_d + theta)G(x', h; y', 0) p(y') dy' / p(x')  for a
    Gaussian p(y') = exp(-|y'-x'|^2 / (2 width^2)) centred under the receiver.

    As h -> 0 this tends to the constant multiplying the boundary delta:
    -1 for the normalized kernel.  With convention="raw" the kernel is the
    raw spectral one (normalized kernel divided by RAW_TO_NORMALIZED).
    """
    h = check_positive(height, "height")
    d = medium.d
    # radial rule in rho = |y' - x'|, graded toward rho = 0 on the scale h
    edges = [0.0]
    step = h / 8
    while edges[-1] < 10 * width:
        edges.append(min(edges[-1] + step, 10 * width))
        step = min(step * 1.5, width / 4)
    x, w = np.polynomial.legendre.leggauss(16)
    e = np.asarray(edges)
    a, b = e[:-1, None], e[1:, None]
    rho = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    wr = (0.5 * (b - a) * w).ravel()
    X = np.zeros((rho.size, d))
    X[:, -1] = h
    Y = np.zeros((rho.size, d))
    Y[:, 0] = rho
    kern = robin_operator_values(medium, X, Y)
    prof = np.exp(-rho ** 2 / (2 * width ** 2))
    meas = 2.0 if d == 2 else 2 * np.pi * rho      # even line / polar measure
    val = complex(np.sum(wr * meas * kern * prof))
    if convention == "raw":
        val /= RAW_TO_NORMALIZED[d]
    elif convention != "normalized":
        raise PreconditionError(f"unknown convention {convention!r}")
    return val


# ---------------------------------------------------------------------------
# surface wave and far field
def surface_wave_term(x, y, medium: MediumSpec, exact=False):
    """Outgoing surface wave carried by the boundary for real theta > 0.

    2D:  i theta / kp * exp(-theta (x_2 + y_2)) * exp(i kp |x_1 - y_1|),
    3D:  (i/2) theta exp(-theta s) H0(kp rho), or with exact=False its
         large-rho form  i theta e^{-theta s} e^{i(kp rho - pi/4)} / sqrt(2 pi kp rho),
    with kp = sqrt(k^2 + theta^2).
    """
    if medium.regime != "nonabsorbing":
        raise PreconditionError("surface waves exist only for real theta > 0")
    x = check_point(x, medium.d, "x")
    y = check_point(y, medium.d, "y")
    th = medium.theta.real
    kp = float(np.sqrt(medium.k ** 2 + th ** 2))
    rho = float(np.linalg.norm(x[:-1] - y[:-1]))
    amp = np.exp(-th * (x[-1] + y[-1]))
    if medium.d == 2:
        return complex(1j * th / kp * amp * np.exp(1j * kp * rho))
    if rho == 0:
        raise SingularityError("3D surface wave is singular at rho = 0")
    if exact:
        return complex(0.5j * th * amp * hankel0_first(kp * rho))
    return complex(1j * th * amp * np.exp(1j * (kp * rho - np.pi / 4)) / np.sqrt(2 * np.pi * kp * rho))


def reflection_coefficient(medium: MediumSpec, frame: FarFieldFrame):
    """(theta - i k cos_n)/(theta + i k cos_n), cos_n the direction cosine to the normal."""
    cos_n = np.sin(frame.gamma_angle) if medium.d == 2 else np.cos(frame.gamma_angle)
    th = medium.theta
    return (th - 1j * medium.k * cos_n) / (th + 1j * medium.k * cos_n)


def region_of(x_d, r, alpha, c=1.0, strict=True):
    """'volume' when x_d > c r^alpha, 'surface' otherwise; raise near the interface."""
    edge = c * r ** alpha
    if strict and 0.5 * edge < x_d < 2 * edge:
        raise PreconditionError(
            f"point with x_d = {x_d:.4g} is within a factor 2 of the region interface {edge:.4g}")
    return "volume" if x_d > edge else "surface"


def farfield_expansion(x, y, medium: MediumSpec, frame: Optional[FarFieldFrame] = None,
                       region=None):
    """Leading-order far-field value of G_theta(x, y) for large |x - y|.

    Volume branch: free-space wave times (1 - R e^{2 i k cos_n y_d}) with the
    plane-wave reflection coefficient R.  In the nonabsorbing regime the
    surface branch adds the surface wave.
    """
    x = check_point(x, medium.d, "x")
    y = check_point(y, medium.d, "y")
    if frame is None:
        frame = FarFieldFrame.from_points(x, y)
    if region is None:
        region = region_of(x[-1], frame.r, frame.alpha, frame.c)
    k, r = medium.k, frame.r
    cos_n = np.sin(frame.gamma_angle) if medium.d == 2 else np.cos(frame.gamma_angle)
    refl = 1 - reflection_coefficient(medium, frame) * np.exp(2j * k * cos_n * y[-1])
    if medium.d == 2:
        vol = refl * np.exp(1j * (k * r + np.pi / 4)) / np.sqrt(8 * np.pi * k * r)
    else:
        vol = refl * np.exp(1j * k * r) / (4 * np.pi * r)
    if region == "surface" and medium.regime == "nonabsorbing":
        return complex(vol + surface_wave_term(x, y, medium))
    return complex(vol)


@dataclass
class RadiationScan:
    radii: np.ndarray
    residuals: dict
    slopes: dict


def _loglog_slope(r, v):
    r, v = np.asarray(r, float), np.asarray(v, float)
    ok = v > 0
    if ok.sum() < 2:
        return -np.inf
    return float(np.polyfit(np.log(r[ok]), np.log(v[ok]), 1)[0])


def radiation_residual_scan(field: Callable, medium: MediumSpec, radii: Sequence[float],
                            gradient: Optional[Callable] = None, alpha=0.3, c=1.0,
                            center=None, n_angles=64, step=1e-3):
    """Decay of radiation-condition residuals on half-circles / half-spheres.

    ``field(X)`` evaluates u at an (n, d) array of points; ``gradient(X)``
    optionally returns the (n, d) gradient (central differences otherwise).
    Returns per-region maxima of |du/dr - i kappa u| and their log-log slopes,
    kappa = k in the volume region and sqrt(k^2 + theta^2) in the surface
    region when theta > 0 (single Sommerfeld residual otherwise).
    """
    radii = np.sort(np.asarray(radii, dtype=float))
    if radii.size < 3:
        raise PreconditionError("radiation scan needs at least three radii")
    d, k = medium.d, medium.k
    center = np.zeros(d) if center is None else np.asarray(center, float)
    two_region = medium.regime == "nonabsorbing"
    res = {"volume": [], "surface": []} if two_region else {"sommerfeld": []}
    for r in radii:
        dirs = _half_sphere_directions(d, r, n_angles, alpha, c)
        X = center + r * dirs
        u = np.asarray(field(X), dtype=complex)
        if gradient is not None:
            du = np.sum(np.asarray(gradient(X)) * dirs, axis=1)
        else:
            du = (np.asarray(field(X + step * dirs)) - np.asarray(field(X - step * dirs))) / (2 * step)
        edge = c * r ** alpha
        if two_region:
            vol = X[:, -1] > edge
            kp = medium.surface_wavenumber.real
            res["volume"].append(np.max(np.abs(du - 1j * k * u)[vol]))
            res["surface"].append(np.max(np.abs(du - 1j * kp * u)[~vol]))
        else:
            res["sommerfeld"].append(np.max(np.abs(du - 1j * k * u)))
    residuals = {key: np.asarray(v) for key, v in res.items()}
    slopes = {key: _loglog_slope(radii, v) for key, v in residuals.items()}
    return RadiationScan(radii, residuals, slopes)


def _half_sphere_directions(d, r, n, alpha, c):
    """Unit directions covering both regions: dense near the boundary."""
    edge = min(c * r ** alpha / r, 1.0)
    # polar angle from the boundary plane; sample [0, edge] densely as well
    lo = np.arcsin(edge * np.linspace(0.0, 1.0, n // 2, endpoint=False))
    hi = np.linspace(np.arcsin(edge), np.pi / 2, n // 2 + 1)[1:]
    elev = np.concatenate([lo, hi])
    if d == 2:
        both = np.concatenate([elev, np.pi - elev[::-1]])
        return np.column_stack([np.cos(both), np.sin(both)])
    az = np.linspace(0, 2 * np.pi, 8, endpoint=False)
    E, A = np.meshgrid(elev, az, indexing="ij")
    return np.column_stack([(np.cos(E) * np.cos(A)).ravel(), (np.cos(E) * np.sin(A)).ravel(),
                            np.sin(E).ravel()])
