"""Input validation helpers used by the estimators and kernel functions."""
import numbers

import numpy as np

from .exceptions import PreconditionError, SingularityError


def check_dimension(d):
    if d not in (2, 3):
        raise PreconditionError(f"dimension must be 2 or 3, got {d!r}")
    return int(d)


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise PreconditionError(f"{name} must be a positive real number, got {value!r}")
    return float(value)


def check_impedance(theta):
    """Return theta as a complex number if it is an admissible impedance.

    Admissible values are theta = 0, theta real and positive, or Im theta > 0.
    """
    theta = complex(theta)
    if not (np.isfinite(theta.real) and np.isfinite(theta.imag)):
        raise PreconditionError(f"impedance must be finite, got {theta!r}")
    if theta.imag > 0 or theta == 0 or (theta.imag == 0 and theta.real > 0):
        return theta
    raise PreconditionError(
        f"impedance {theta!r} is not admissible: need theta = 0, theta > 0 or Im theta > 0"
    )


def check_point(x, d, name="x", allow_boundary=True):
    """Validate a half-space point of length ``d`` with non-negative last coordinate."""
    x = np.asarray(x, dtype=float)
    if x.shape != (d,):
        raise PreconditionError(f"{name} must have shape ({d},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise PreconditionError(f"{name} must be finite")
    if x[-1] < 0 or (not allow_boundary and x[-1] == 0):
        raise PreconditionError(f"{name} must lie in the upper half-space, got x_d = {x[-1]}")
    return x


def check_points(x, d, name="x"):
    """Validate an array of points of shape (n, d)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.ndim != 2 or x.shape[1] != d:
        raise PreconditionError(f"{name} must have shape (n, {d}), got {x.shape}")
    if np.any(x[:, -1] < 0):
        raise PreconditionError(f"{name} contains points below the boundary")
    return x


def check_distinct(x, y, tol=0.0):
    r = float(np.linalg.norm(np.asarray(x) - np.asarray(y)))
    if r <= tol:
        raise SingularityError("kernel evaluated at coincident points")
    return r


def check_finite_array(a, name):
    a = np.asarray(a)
    if not np.all(np.isfinite(a)):
        raise PreconditionError(f"{name} contains non-finite values")
    return a
