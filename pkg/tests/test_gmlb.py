import numpy as np
import pytest
from scipy import stats

from risgmlb.channel import RicianParams, generate_channel
from risgmlb.errors import ConfigError, NumericError
from risgmlb.gmlb import (
    EpochTape,
    GmlbConfig,
    _ThetaStep,
    _WStep,
    gmlb_run,
    init_networks,
    init_state,
    meta_update,
    run_epoch,
)
from risgmlb.nets import MlpParams, bf_net_apply, regulate, theta_net_apply
from risgmlb.numerics import finite_diff_gradient
from risgmlb.objective import (
    grad_sum_rate_wrt_theta,
    grad_sum_rate_wrt_W,
    noise_from_snr,
    project_power,
    sum_rate,
)

SMALL = dict(hidden=16, epochs=60)


def feasibility_violations(states, P):
    bad = 0
    for W, theta in states:
        power = np.vdot(W, W).real
        modulus = np.abs(np.exp(1j * theta))
        bad += power > P * (1 + 1e-9) or np.any(np.abs(modulus - 1.0) > 1e-12)
    return bad


def test_init_state_contract(ch444):
    s = init_state(ch444, 1000.0, 4)
    assert abs(s.transmit_power - 1000.0) <= 1e-12 * 1000.0
    t = init_state(ch444, 1000.0, 4)
    assert np.array_equal(s.W, t.W) and np.array_equal(s.theta, t.theta)
    with pytest.raises(ConfigError):
        init_state(ch444, 0.0, 4)


def test_init_phases_uniform():
    ch = generate_channel(RicianParams(M=1, N=1000, K=1), 0)
    theta = np.concatenate([init_state(ch, 1.0, s).theta for s in range(100)])
    assert theta.size == 100_000
    counts, _ = np.histogram(theta, bins=32, range=(0, 2 * np.pi))
    assert stats.chisquare(counts).pvalue > 0.01


def test_zero_networks_first_epoch(ch444, noise20):
    cfg = GmlbConfig(**SMALL)
    pw, pt = init_networks(ch444, cfg)
    pw, pt = pw.zeros_like(), pt.zeros_like()
    state = init_state(ch444, 1000.0, 0)
    start = sum_rate(state, ch444, noise20)
    out, _, _, rate, n_w, n_theta = run_epoch(0, state, pw, pt, ch444, noise20, cfg)
    # W proposal is an exact no-op, and ties are accepted
    assert n_w == 1
    proposal = state.theta + cfg.lam / 2
    assert sum_rate(state.with_theta(proposal), ch444, noise20) >= start or n_theta == 0
    if n_theta:
        np.testing.assert_array_equal(out.theta, proposal)
    else:
        np.testing.assert_array_equal(out.theta, state.theta)
    assert np.array_equal(out.W, state.W)


@pytest.mark.parametrize("regulated", [True, False])
@pytest.mark.parametrize("meta_signal", ["proposals", "accepted"])
def test_monotone_and_feasible(ch444, noise20, regulated, meta_signal):
    cfg = GmlbConfig(regulated=regulated, meta_signal=meta_signal, **SMALL)
    states = []
    result = gmlb_run(ch444, noise20, cfg, callback=lambda e, s: states.append((s.W, s.theta)))
    rates = result.rates
    assert np.all(np.diff(rates) >= 0)
    assert feasibility_violations(states, 1000.0) == 0
    assert len(result.trace) == cfg.epochs
    assert rates[-1] == sum_rate(result.state, ch444, noise20)


def test_deterministic(ch444, noise20):
    cfg = GmlbConfig(**SMALL)
    a, b = gmlb_run(ch444, noise20, cfg), gmlb_run(ch444, noise20, cfg)
    assert a.rates.tobytes() == b.rates.tobytes()
    assert a.state.W.tobytes() == b.state.W.tobytes()
    assert [t.flops for t in a.trace] == [t.flops for t in b.trace]


def test_trace_counts_flops(ch444, noise20):
    result = gmlb_run(ch444, noise20, GmlbConfig(**SMALL))
    assert all(t.flops > 0 for t in result.trace)


def test_nonfinite_rate_aborts_with_epoch(ch444, noise20):
    broken = ch444.scaled(np.nan)
    with pytest.raises(NumericError) as info:
        gmlb_run(broken, noise20, GmlbConfig(**SMALL))
    assert info.value.index == 0


def test_config_validation():
    with pytest.raises(ConfigError):
        GmlbConfig(epochs=0)
    with pytest.raises(ConfigError):
        GmlbConfig(meta_signal="sometimes")
    with pytest.raises(ConfigError):
        GmlbConfig(lr_w=-1.0)
    assert GmlbConfig(regulated=False).regulator is None


def test_empty_tape_leaves_networks(ch444, noise20, state444):
    cfg = GmlbConfig(meta_signal="accepted", **SMALL)
    pw, pt = init_networks(ch444, cfg)
    new_w, new_t = meta_update(pw, pt, EpochTape(), state444, ch444, noise20, cfg)
    assert new_w is pw and new_t is pt


def test_zero_learning_rate_freezes(ch444, noise20, state444):
    cfg = GmlbConfig(lr_w=0.0, lr_theta=0.0, **SMALL)
    pw, pt = init_networks(ch444, cfg)
    _, new_w, new_t, *_ = run_epoch(0, state444, pw, pt, ch444, noise20, cfg)
    assert new_w.allclose(pw, rtol=0, atol=0) and new_t.allclose(pt, rtol=0, atol=0)


def _rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


@pytest.mark.parametrize("meta_signal", ["proposals", "accepted"])
def test_meta_gradient_matches_fd(meta_signal):
    """Network gradients of the epoch loss, inputs held fixed, against central differences."""
    ch = generate_channel(RicianParams(M=3, N=5, K=2), 21)
    noise = noise_from_snr(10.0, 10.0)
    cfg = GmlbConfig(hidden=7, lr_w=1.0, lr_theta=1.0, meta_signal=meta_signal, power_budget=10.0)
    pw, pt = init_networks(ch, cfg)
    reg = cfg.regulator
    s0 = init_state(ch, 10.0, 2)
    g_w = grad_sum_rate_wrt_W(s0, ch, noise)

    def w_after(params):
        return project_power(s0.W + bf_net_apply(params, g_w)[0], 10.0)

    s1 = s0.with_W(w_after(pw))
    g_t = grad_sum_rate_wrt_theta(s1, ch, noise)

    def theta_after(params):
        return s1.theta + regulate(theta_net_apply(params, None, g_t)[0], reg)

    final = s1.with_theta(theta_after(pt))
    dW, cache_w = bf_net_apply(pw, g_w)
    V = s0.W + dW
    _, raw, cache_t = theta_net_apply(pt, reg, g_t)
    tape = EpochTape()
    if meta_signal == "proposals":
        tape.w_steps.append(_WStep(V, True, cache_w, -grad_sum_rate_wrt_W(s1, ch, noise)))
        tape.theta_steps.append(_ThetaStep(raw, cache_t, -grad_sum_rate_wrt_theta(final, ch, noise)))
        theta_for_w = s0.theta  # each proposal is scored where it was made
    else:
        tape.w_steps.append(_WStep(V, True, cache_w))
        tape.theta_steps.append(_ThetaStep(raw, cache_t))
        theta_for_w = final.theta  # both steps chain from the final state
    assert np.vdot(V, V).real > 10.0  # the projection is active

    new_w, new_t = meta_update(pw, pt, tape, final, ch, noise, cfg)
    grad_w = pw.flatten() - new_w.flatten()
    grad_t = pt.flatten() - new_t.flatten()

    def loss_w(flat):
        W = w_after(MlpParams.from_flat(pw.dims, flat))
        return -sum_rate(s0.with_W(W).with_theta(theta_for_w), ch, noise)

    def loss_t(flat):
        return -sum_rate(s1.with_theta(theta_after(MlpParams.from_flat(pt.dims, flat))), ch, noise)

    assert _rel(grad_w, finite_diff_gradient(loss_w, pw.flatten())) <= 1e-4
    assert _rel(grad_t, finite_diff_gradient(loss_t, pt.flatten())) <= 1e-4
