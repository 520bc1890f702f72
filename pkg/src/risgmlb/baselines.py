"""Reference optimizers: WMMSE precoding, alternating optimization, random.

WMMSE runs on the effective channel ``A = H diag(exp(i theta)) G`` and cycles
through receiver gains, MSE weights and the transmit filter. The total power
constraint enters through the Lagrange multiplier ``mu`` of the transmit-filter
update, found by bisection on the eigen-decomposed power function.
"""

from dataclasses import dataclass

import numpy as np

from risgmlb import flops
from risgmlb.errors import ConfigError, NumericError
from risgmlb.gmlb import init_state
from risgmlb.objective import (
    BeamformingState,
    effective_channel,
    grad_sum_rate_wrt_theta,
    sum_rate,
)


@dataclass(frozen=True)
class BaselineConfig:
    max_outer_iters: int = 200
    conv_tol: float = 1e-4
    theta_step: float = 0.1
    seed: int = 0
    theta_inner_iters: int = 20
    max_backtracks: int = 30

    def __post_init__(self):
        if self.max_outer_iters < 1 or self.theta_inner_iters < 1:
            raise ConfigError("iteration limits must be >= 1")
        if not self.conv_tol > 0 or self.theta_step < 0:
            raise ConfigError("conv_tol must be positive and theta_step non-negative")


def _rate_of(A, W, sigma2):
    flops.add(8 * A.shape[0] * A.shape[1] * W.shape[1] + 7 * W.shape[1] ** 2)
    power = np.abs(A @ W) ** 2
    total = sigma2 + power.sum(axis=1)
    return float(np.sum(np.log2(total / (total - np.diag(power)))))


def mrt_precoder(A, P):
    W = np.conj(A).T
    return W * np.sqrt(P / np.vdot(W, W).real)


def receiver_gains(A, W, sigma2):
    Z = A @ W
    total = sigma2 + np.sum(np.abs(Z) ** 2, axis=1)
    return np.diag(Z) / total


def mse_weights(A, W, u, sigma2):
    """Inverse MSE of each user's MMSE-style receiver."""
    Z = A @ W
    total = sigma2 + np.sum(np.abs(Z) ** 2, axis=1)
    mse = np.abs(u) ** 2 * total - 2.0 * np.real(np.conj(u) * np.diag(Z)) + 1.0
    return 1.0 / mse


def weighted_mse(A, W, u, w, sigma2):
    """The WMMSE surrogate sum_k (w_k e_k - log w_k), minimized blockwise."""
    Z = A @ W
    total = sigma2 + np.sum(np.abs(Z) ** 2, axis=1)
    mse = np.abs(u) ** 2 * total - 2.0 * np.real(np.conj(u) * np.diag(Z)) + 1.0
    return float(np.sum(w * mse - np.log(w)))


def transmit_filter(A, u, w, P, rel_tol=1e-13, max_bisect=200):
    """W = (A^H D A + mu I)^-1 A^H diag(w u), with the smallest feasible mu >= 0."""
    M, K = A.shape[1], A.shape[0]
    c = w * np.abs(u) ** 2
    gram = (np.conj(A).T * c) @ A
    rhs = np.conj(A).T * (w * u)
    eigval, eigvec = np.linalg.eigh(gram)
    eigval = np.clip(eigval, 0.0, None)
    proj = np.conj(eigvec).T @ rhs
    phi = np.sum(np.abs(proj) ** 2, axis=1)
    flops.add(8 * M * M * K * 2 + flops.eigh(M) + 8 * M * M * K)

    def power(mu):
        return float(np.sum(phi / (eigval + mu) ** 2))

    def solve(mu):
        return eigvec @ (proj / (eigval + mu)[:, None])

    if eigval.min() > 1e-12 * max(eigval.max(), 1e-300) and power(0.0) <= P:
        flops.add(8 * M * M * K)
        return solve(0.0)
    lo, hi = 0.0, np.sqrt(phi.sum() / P)
    if not (np.isfinite(hi) and hi > 0):
        raise NumericError(f"power bisection has no valid bracket (upper bound {hi})")
    for n in range(max_bisect):
        mid = 0.5 * (lo + hi)
        if power(mid) > P:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rel_tol * hi:
            break
    else:
        raise NumericError(f"power bisection did not converge: bracket [{lo}, {hi}]")
    flops.add((n + 1) * 4 * M + 8 * M * M * K)
    return solve(hi)


def wmmse_precoder(ch, theta, noise, P, cfg, history=None, W0=None):
    """WMMSE precoder for fixed RIS phases.

    :param history: optional list receiving the sum rate after every iteration
    :param W0: starting precoder; matched filter at full power when None
    """
    M, N, K = ch.dims
    flops.add(flops.effective_channel(M, N, K))
    A = effective_channel(ch, np.asarray(theta, dtype=np.float64))
    sigma2 = noise.sigma2
    W = mrt_precoder(A, P) if W0 is None else W0
    rate = _rate_of(A, W, sigma2)
    if history is not None:
        history.append(rate)
    for _ in range(cfg.max_outer_iters):
        u = receiver_gains(A, W, sigma2)
        w = mse_weights(A, W, u, sigma2)
        flops.add(2 * (8 * K * M * K + 12 * K))
        W = transmit_filter(A, u, w, P)
        new_rate = _rate_of(A, W, sigma2)
        if history is not None:
            history.append(new_rate)
        done = abs(new_rate - rate) <= cfg.conv_tol * max(abs(rate), 1e-12)
        rate = new_rate
        if done:
            break
    return W


def _phase_ascent(state, ch, noise, cfg):
    """Projected gradient ascent on the phases with accept-if-improved backtracking."""
    rate = sum_rate(state, ch, noise)
    step = cfg.theta_step
    if step == 0:
        return state, rate
    for _ in range(cfg.theta_inner_iters):
        grad = grad_sum_rate_wrt_theta(state, ch, noise)
        t = step
        for _ in range(cfg.max_backtracks):
            candidate = state.with_theta(np.mod(state.theta + t * grad, 2.0 * np.pi))
            new_rate = sum_rate(candidate, ch, noise)
            if new_rate >= rate:
                break
            t *= 0.5
        else:
            break
        improvement = new_rate - rate
        state, rate = candidate, new_rate
        step = t * 2.0
        if improvement <= cfg.conv_tol * max(abs(rate), 1e-12):
            break
    return state, rate


def ao_optimize(ch, noise, P, cfg, history=None):
    """Alternate WMMSE precoding and phase ascent until the joint gain stalls.

    Starts from the phases of ``init_state(ch, P, cfg.seed)``; after the first
    round WMMSE is warm-started from the current precoder, so the sum rate
    never decreases between rounds.
    """
    state = init_state(ch, P, cfg.seed)
    rate = None
    W0 = None
    for _ in range(cfg.max_outer_iters):
        state = state.with_W(wmmse_precoder(ch, state.theta, noise, P, cfg, W0=W0))
        state, new_rate = _phase_ascent(state, ch, noise, cfg)
        if history is not None:
            history.append(new_rate)
        converged = rate is not None and new_rate - rate <= cfg.conv_tol * max(abs(rate), 1e-12)
        rate, W0 = new_rate, state.W
        if converged:
            break
    return state


def wmmse_fixed_theta(ch, noise, P, cfg):
    """WMMSE with the RIS left at the random phases of ``init_state(ch, P, cfg.seed)``."""
    state = init_state(ch, P, cfg.seed)
    return state.with_W(wmmse_precoder(ch, state.theta, noise, P, cfg))


def random_beamforming(ch, P, seed):
    return init_state(ch, P, seed)
