"""Sum-rate objective, power regulation and analytic gradients.

With effective channel ``A = H diag(exp(i theta)) G`` (K x M) and
``Z = A W`` (K x K), user k sees total received power
``S_k = sigma2 + sum_j |Z_kj|^2`` and interference-plus-noise
``I_k = S_k - |Z_kk|^2``, so ``R = sum_k log2(S_k / I_k)``.

Gradients use the coefficient matrix ``C_kj = Z_kj / S_k - [j != k] Z_kj / I_k``:

* W: the steepest-ascent direction ``(2 / ln 2) A^H C``, i.e. the real
  gradient with respect to Re(W) in the real part and Im(W) in the imaginary part;
* theta: ``-(2 / ln 2) Im(exp(i theta_n) * sum_k H_kn (G W C^H)_nk)``.
"""

from dataclasses import dataclass, replace

import numpy as np

from risgmlb import flops
from risgmlb.errors import ConfigError, ShapeError

LN2 = np.log(2.0)


@dataclass(frozen=True, eq=False)
class BeamformingState:
    W: np.ndarray  # M x K precoder, column k serves user k
    theta: np.ndarray  # N RIS phases in radians
    power_budget: float

    def with_W(self, W):
        return replace(self, W=W)

    def with_theta(self, theta):
        return replace(self, theta=theta)

    @property
    def transmit_power(self):
        return float(np.vdot(self.W, self.W).real)


@dataclass(frozen=True)
class NoiseModel:
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ConfigError(f"noise variance must be positive, got {self.sigma2}")


def _check_dims(W, theta, ch):
    M, N, K = ch.dims
    if W.shape != (M, K) or theta.shape != (N,):
        raise ShapeError(f"state W {W.shape} / theta {theta.shape} vs channel M={M} N={N} K={K}")


def effective_channel(ch, theta):
    return (ch.H * np.exp(1j * theta)) @ ch.G


def _received(W, theta, ch, sigma2):
    A = effective_channel(ch, theta)
    Z = A @ W
    power = np.abs(Z) ** 2
    total = sigma2 + power.sum(axis=1)
    interference = total - np.diag(power)
    return A, Z, total, interference


def sinr_per_user(state, ch, noise):
    _check_dims(state.W, state.theta, ch)
    flops.add(flops.sum_rate(*ch.dims))
    _, _, total, interference = _received(state.W, state.theta, ch, noise.sigma2)
    return (total - interference) / interference


def sum_rate(state, ch, noise):
    return _rate(state.W, state.theta, ch, noise.sigma2)


def _rate(W, theta, ch, sigma2):
    _check_dims(W, theta, ch)
    flops.add(flops.sum_rate(*ch.dims))
    _, _, total, interference = _received(W, theta, ch, sigma2)
    # log2(S/I) == log2(1 + sinr); a zero signal gives exactly 0
    return float(np.sum(np.log2(total / interference)))


def loss(state, ch, noise):
    return -sum_rate(state, ch, noise)


# rescaling can land a few ulps above P; treating that as feasible makes the
# projection idempotent
POWER_RTOL = 1e-12


def project_power(W, P):
    """Scale W onto the ball trace(W^H W) <= P; feasible inputs are returned as-is."""
    if not P > 0:
        raise ConfigError("power budget must be positive")
    power = float(np.vdot(W, W).real)
    if power <= P * (1.0 + POWER_RTOL):
        return W
    return W * np.sqrt(P / power)


def noise_from_snr(snr_db, P):
    if not P > 0:
        raise ConfigError("power budget must be positive")
    return NoiseModel(sigma2=P / 10.0 ** (snr_db / 10.0))


def _coefficients(Z, total, interference):
    C = Z / total[:, None] - Z / interference[:, None]
    np.fill_diagonal(C, np.diag(Z) / total)
    return C


def grad_sum_rate_wrt_W(state, ch, noise):
    _check_dims(state.W, state.theta, ch)
    flops.add(flops.grad_w(*ch.dims))
    A, Z, total, interference = _received(state.W, state.theta, ch, noise.sigma2)
    C = _coefficients(Z, total, interference)
    return (2.0 / LN2) * (np.conj(A).T @ C)


def grad_sum_rate_wrt_theta(state, ch, noise):
    _check_dims(state.W, state.theta, ch)
    flops.add(flops.grad_theta(*ch.dims))
    phase = np.exp(1j * state.theta)
    _, Z, total, interference = _received(state.W, state.theta, ch, noise.sigma2)
    C = _coefficients(Z, total, interference)
    T = (ch.G @ state.W) @ np.conj(C).T  # N x K
    s = np.sum(ch.H.T * T, axis=1)
    return -(2.0 / LN2) * np.imag(phase * s)
