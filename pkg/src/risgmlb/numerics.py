"""Dense complex primitives and the central-difference gradient oracle.

Matrices are plain ``numpy`` arrays: complex128 for channel/precoder matrices,
float64 for phase vectors. Every analytic gradient in the package is checked
against :func:`finite_diff_gradient`.
"""

import numpy as np

from risgmlb import flops
from risgmlb.errors import NumericError, ShapeError

DEFAULT_FD_STEP = 1e-6


def as_cmatrix(a):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericError("matrix has non-finite entries")
    return a


def as_rvector(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NumericError("vector has non-finite entries")
    return x


def matmul(a, b):
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    flops.add(flops.cmatmul(a.shape[0], a.shape[1], b.shape[1]))
    return a @ b


def hermitian(a):
    return np.conj(as_cmatrix(a)).T


def diag_from_phases(theta):
    """Phase-shift matrix diag(exp(i*theta_n)); unit modulus by construction."""
    theta = as_rvector(theta)
    return np.diag(np.exp(1j * theta))


def finite_diff_gradient(f, x, h=DEFAULT_FD_STEP):
    """Central-difference gradient of a real scalar function.

    :param f: callable taking a float64 vector and returning a real scalar
    :param x: evaluation point
    :param h: probe step, tunable; 1e-6 suits objectives of order 1-100
    :return: float64 vector, (f(x + h e_n) - f(x - h e_n)) / 2h per coordinate
    """
    if not h > 0:
        raise ValueError("finite-difference step must be positive")
    x = np.array(x, dtype=np.float64)
    grad = np.empty_like(x)
    for n in range(x.size):
        probe = x.copy()
        probe[n] = x[n] + h
        f_plus = float(f(probe))
        probe[n] = x[n] - h
        f_minus = float(f(probe))
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise NumericError(f"non-finite objective while probing coordinate {n}", index=n)
        grad[n] = (f_plus - f_minus) / (2.0 * h)
    return grad


def complex_to_real(z):
    """Pack a complex array as [real parts, imaginary parts] (flattened, C order)."""
    z = np.asarray(z)
    return np.concatenate([z.real.ravel(), z.imag.ravel()])


def real_to_complex(v, shape):
    v = np.asarray(v, dtype=np.float64)
    size = int(np.prod(shape))
    if v.size != 2 * size:
        raise ShapeError(f"need {2 * size} reals for complex shape {shape}, got {v.size}")
    return (v[:size] + 1j * v[size:]).reshape(shape)
