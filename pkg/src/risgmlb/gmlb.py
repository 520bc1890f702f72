"""Gradient-based meta-learning beamforming (GMLB).

Each epoch refines the precoder with BF-Net proposals, then the RIS phases with
Theta-Net proposals. A proposal is kept only if the sum rate does not drop;
otherwise the previous value is restored. After both inner loops the networks
take one SGD step on ``-R``, backpropagated through the network applications of
the epoch with the gradient inputs held constant.

By default every proposal contributes ``-R`` at the proposed point, so a
network whose steps keep getting reverted still learns which way to move.
Restricting the signal to accepted steps leaves an unlucky initialization with
no gradient at all, and runs then stall far below the baselines.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from risgmlb import flops
from risgmlb.errors import ConfigError, NumericError
from risgmlb.nets import (
    DEFAULT_HIDDEN,
    RegulatorConfig,
    bf_net_apply,
    bf_net_backward,
    init_params,
    mlp_backward,
    regulate_grad,
    sgd_step,
    theta_net_apply,
)
from risgmlb.objective import (
    BeamformingState,
    grad_sum_rate_wrt_theta,
    grad_sum_rate_wrt_W,
    project_power,
    sum_rate,
)


META_SIGNALS = ("proposals", "accepted")


@dataclass(frozen=True)
class GmlbConfig:
    epochs: int = 5000
    inner_iters: int = 1
    lr_w: float = 1e-3
    lr_theta: float = 1.5e-3
    lam: float = np.pi / 4
    seed: int = 0
    regulated: bool = True
    power_budget: float = 1000.0
    hidden: int = DEFAULT_HIDDEN
    centered_regulator: bool = False
    # "proposals": every proposal, kept or reverted, backpropagates -R at the
    # proposed point. "accepted": only kept steps, chained from the epoch's
    # final state; reverted proposals leave the networks untouched.
    meta_signal: str = "proposals"

    def __post_init__(self):
        if self.epochs < 1 or self.inner_iters < 1 or self.hidden < 1:
            raise ConfigError("epochs, inner_iters and hidden must be >= 1")
        if not (self.lr_w >= 0 and self.lr_theta >= 0):
            raise ConfigError("learning rates must be non-negative (zero freezes a network)")
        if not (self.lam > 0 and self.power_budget > 0):
            raise ConfigError("lam and power_budget must be positive")
        if self.meta_signal not in META_SIGNALS:
            raise ConfigError(f"meta_signal must be one of {META_SIGNALS}")

    @property
    def regulator(self):
        if not self.regulated:
            return None
        return RegulatorConfig(lam=self.lam, centered=self.centered_regulator)


@dataclass
class EpochTrace:
    epoch: int
    sum_rate: float
    accepted_w: int
    accepted_theta: int
    flops: int
    elapsed: float


@dataclass
class _WStep:
    pre_projection: np.ndarray
    projected: bool
    cache: object
    # dL/dW at the state the loss is taken at, ascent-direction complex form
    upstream: np.ndarray = None


@dataclass
class _ThetaStep:
    raw: np.ndarray
    cache: object
    upstream: np.ndarray = None


@dataclass
class EpochTape:
    """Network applications that feed this epoch's meta-gradient, in execution order."""

    w_steps: list = field(default_factory=list)
    theta_steps: list = field(default_factory=list)


@dataclass
class GmlbResult:
    state: BeamformingState
    trace: list
    params_w: object
    params_theta: object

    @property
    def rates(self):
        return np.array([t.sum_rate for t in self.trace])


def init_state(ch, P, seed):
    """Gaussian precoder scaled to full power P, phases uniform on [0, 2pi)."""
    if not P > 0:
        raise ConfigError("power budget must be positive")
    M, N, K = ch.dims
    rng = np.random.default_rng(seed)
    W = (rng.standard_normal((M, K)) + 1j * rng.standard_normal((M, K))) / np.sqrt(2.0)
    W = W * np.sqrt(P / np.vdot(W, W).real)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=N)
    return BeamformingState(W=W, theta=theta, power_budget=float(P))


def init_networks(ch, cfg):
    M, N, K = ch.dims
    params_w = init_params((2 * K, cfg.hidden, 2 * K), [cfg.seed, 1])
    params_theta = init_params((N, cfg.hidden, N), [cfg.seed, 2])
    return params_w, params_theta


def _projection_vjp(V, P, upstream):
    """Transpose-Jacobian of V -> sqrt(P) V / |V| applied to ``upstream``."""
    norm2 = np.vdot(V, V).real
    radial = np.vdot(V, upstream).real / norm2
    return np.sqrt(P / norm2) * (upstream - radial * V)


def meta_update(params_w, params_theta, tape, final_state, ch, noise, cfg):
    """One SGD step on both networks.

    Recorded steps that carry their own ``upstream`` (proposal mode) contribute
    the gradient of ``-R`` at their proposal. Steps without one (accepted mode)
    are chained back from ``-R(final_state)``.
    """
    new_w, new_theta = params_w, params_theta
    if tape.w_steps:
        grads = params_w.zeros_like()
        chained = None
        for step in reversed(tape.w_steps):
            if step.upstream is not None:
                upstream = step.upstream
            else:
                if chained is None:
                    chained = -grad_sum_rate_wrt_W(final_state, ch, noise)
                upstream = chained
            if step.projected:
                upstream = _projection_vjp(step.pre_projection, final_state.power_budget, upstream)
            if step.upstream is None:
                # W_prev enters the projection exactly like the increment does
                chained = upstream
            grads = grads + bf_net_backward(params_w, step.cache, upstream)
        new_w = sgd_step(params_w, grads, cfg.lr_w)
    if tape.theta_steps:
        regulator = cfg.regulator
        grads = params_theta.zeros_like()
        chained = None
        for step in reversed(tape.theta_steps):
            upstream = step.upstream
            if upstream is None:
                if chained is None:
                    chained = -grad_sum_rate_wrt_theta(final_state, ch, noise)
                upstream = chained
            d_raw = upstream if regulator is None else upstream * regulate_grad(step.raw, regulator)
            grads = grads + mlp_backward(params_theta, step.cache, d_raw)[0]
        new_theta = sgd_step(params_theta, grads, cfg.lr_theta)
    return new_w, new_theta


def _checked(rate, epoch, what):
    if not np.isfinite(rate):
        raise NumericError(f"non-finite sum rate after {what} in epoch {epoch}", index=epoch)
    return rate


def run_epoch(epoch, state, params_w, params_theta, ch, noise, cfg):
    """Execute one epoch; returns (state, params_w, params_theta, rate, accepted_w, accepted_theta)."""
    P = state.power_budget
    regulator = cfg.regulator
    tape = EpochTape()
    proposals = cfg.meta_signal == "proposals"
    n_w = n_theta = 0

    best = _checked(sum_rate(state, ch, noise), epoch, "epoch start")
    for _ in range(cfg.inner_iters):
        grad = grad_sum_rate_wrt_W(state, ch, noise)
        delta, cache = bf_net_apply(params_w, grad)
        V = state.W + delta
        W = project_power(V, P)
        candidate = state.with_W(W)
        rate = _checked(sum_rate(candidate, ch, noise), epoch, "precoder step")
        accepted = rate >= best
        if proposals:
            upstream = -grad_sum_rate_wrt_W(candidate, ch, noise)
            tape.w_steps.append(_WStep(V, W is not V, cache, upstream))
        elif accepted:
            tape.w_steps.append(_WStep(V, W is not V, cache))
        if accepted:
            n_w += 1
            state, best = candidate, rate

    for _ in range(cfg.inner_iters):
        grad = grad_sum_rate_wrt_theta(state, ch, noise)
        delta, raw, cache = theta_net_apply(params_theta, regulator, grad)
        candidate = state.with_theta(state.theta + delta)
        rate = _checked(sum_rate(candidate, ch, noise), epoch, "phase step")
        accepted = rate >= best
        if proposals:
            upstream = -grad_sum_rate_wrt_theta(candidate, ch, noise)
            tape.theta_steps.append(_ThetaStep(raw, cache, upstream))
        elif accepted:
            tape.theta_steps.append(_ThetaStep(raw, cache))
        if accepted:
            n_theta += 1
            state, best = candidate, rate

    params_w, params_theta = meta_update(params_w, params_theta, tape, state, ch, noise, cfg)
    return state, params_w, params_theta, best, n_w, n_theta


def gmlb_run(ch, noise, cfg, state=None, callback=None):
    """Run GMLB on one scenario.

    :param state: starting point; defaults to ``init_state(ch, P, cfg.seed)``
    :param callback: optional ``callback(trace_entry, state)`` after every epoch
    :return: GmlbResult with the final accepted state and per-epoch trace
    """
    if state is None:
        state = init_state(ch, cfg.power_budget, cfg.seed)
    params_w, params_theta = init_networks(ch, cfg)
    trace = []
    for epoch in range(cfg.epochs):
        start = time.perf_counter()
        with flops.counting() as counter:
            state, params_w, params_theta, rate, n_w, n_theta = run_epoch(
                epoch, state, params_w, params_theta, ch, noise, cfg)
        entry = EpochTrace(epoch, rate, n_w, n_theta, counter.total, time.perf_counter() - start)
        trace.append(entry)
        if callback is not None:
            callback(entry, state)
    return GmlbResult(state=state, trace=trace, params_w=params_w, params_theta=params_theta)
