"""Independent high-precision reference computations (mpmath).

Nothing here imports the package; the values are frozen into
tests/data/frozen.json by tests/freeze_oracles.py.
"""
import mpmath as mp

mp.mp.dps = 30


def j0_series(x):
    x = mp.mpf(x)
    term, total, m = mp.mpf(1), mp.mpf(1), 0
    while True:
        m += 1
        term *= -(x / 2) ** 2 / (m * m)
        total += term
        if abs(term) < mp.mpf(10) ** (-mp.mp.dps):
            return total


def y0_series(x):
    """Y0 = (2/pi)[(ln(x/2) + euler) J0 + sum (-1)^{m+1} H_m (x/2)^{2m}/(m!)^2]."""
    x = mp.mpf(x)
    total, harm, term, m = mp.mpf(0), mp.mpf(0), mp.mpf(1), 0
    while True:
        m += 1
        harm += mp.mpf(1) / m
        term *= (x / 2) ** 2 / (m * m)
        piece = (-1) ** (m + 1) * harm * term
        total += piece
        if abs(piece) < mp.mpf(10) ** (-mp.mp.dps) and m > 5:
            break
    return 2 / mp.pi * ((mp.log(x / 2) + mp.euler) * j0_series(x) + total)


def j0_first_zero():
    a, b = mp.mpf(2), mp.mpf(3)
    for _ in range(120):
        c = (a + b) / 2
        if j0_series(a) * j0_series(c) <= 0:
            b = c
        else:
            a = c
    return (a + b) / 2


def hankel0(x):
    return mp.besselj(0, x) + 1j * mp.bessely(0, x)


def green_free(R, d, k=1):
    R = mp.mpf(R)
    if d == 2:
        return 0.25j * hankel0(k * R)
    return mp.exp(1j * k * R) / (4 * mp.pi * R)


def correction_contour(d, k, theta, rho, s, delta=0.3):
    """P_theta(rho, s) = pref int_0^inf theta e^{-g s} W(xi rho)/(g (g - theta)) dxi
    along a path dipping below the real axis (clears the branch point and the
    outgoing surface-wave pole), principal square root."""
    th, k = mp.mpc(theta), mp.mpf(k)
    kp = abs(mp.sqrt(k ** 2 + th ** 2))
    L = 2 * max(kp, k) + 1
    s = mp.mpf(s)
    rho = mp.mpf(rho)

    def f(t):
        if t < L:
            xi = t - 1j * delta * mp.sin(mp.pi * t / L)
            dxi = 1 - 1j * delta * mp.pi / L * mp.cos(mp.pi * t / L)
        else:
            xi, dxi = mp.mpf(t), 1
        g = mp.sqrt(xi ** 2 - k ** 2)
        a = th * mp.exp(-g * s) / (g * (g - th))
        w = mp.cos(xi * rho) / mp.pi if d == 2 else xi * mp.besselj(0, xi * rho) / (2 * mp.pi)
        return a * w * dxi

    top = L + 45 / s
    n = int(top * rho / 6) + 8
    pts = sorted(set([mp.mpf(0), k, L] + [top * i / n for i in range(n + 1)]))
    total = mp.mpf(0)
    for a, b in zip(pts[:-1], pts[1:]):
        total += mp.quad(f, [a, b])
    return total + mp.quad(f, [top, mp.inf])


def selfcell_polar(h, k=1):
    """int over the square [-h/2, h/2]^2 of (i/4) H0(k r) in polar coordinates."""
    def inner(phi):
        R = h / 2 / mp.cos(phi)
        return mp.quad(lambda r: 0.25j * hankel0(k * r) * r, [0, R])
    return 8 * mp.quad(inner, [0, mp.pi / 4])


def dtn_closed_form(rho, k=1):
    """-d^2/dx2 dy2 [G(x,y) - G(x,y*)] at x2 = y2 = 0 by high-precision differentiation."""
    def gd(x2, y2):
        r1 = mp.sqrt(rho ** 2 + (x2 - y2) ** 2)
        r2 = mp.sqrt(rho ** 2 + (x2 + y2) ** 2)
        return green_free(r1, 2, k) - green_free(r2, 2, k)
    return -mp.diff(gd, (0, 0), (1, 1))


def spectral_hat(xi, xd, yd, d, k, theta):
    c_pi = 1 / mp.sqrt(8 * mp.pi) if d == 2 else 1 / (4 * mp.pi)
    g = mp.sqrt(mp.mpf(xi) ** 2 - k ** 2)
    th = mp.mpc(theta)
    return c_pi * ((th + g) / (th - g) * mp.exp(-g * (xd + yd)) / g - mp.exp(-g * abs(xd - yd)) / g)
