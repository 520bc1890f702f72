"""Sweep drivers behind the CLI subcommands.

Every sweep point runs all requested algorithms on the same seeded channels
(scenario seeds ``seed, seed + 1, ...``), so comparisons are paired. Work items
are independent; results are reduced in (point, algorithm, seed) order, which
keeps output files identical whatever the worker count.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from risgmlb import flops
from risgmlb.baselines import ao_optimize, random_beamforming, wmmse_fixed_theta
from risgmlb.channel import generate_channel
from risgmlb.errors import ConfigError
from risgmlb.gmlb import gmlb_run, init_state
from risgmlb.harness import output
from risgmlb.numerics import complex_to_real, finite_diff_gradient, real_to_complex
from risgmlb.objective import (
    grad_sum_rate_wrt_theta,
    grad_sum_rate_wrt_W,
    noise_from_snr,
    sum_rate,
)


@dataclass
class RunOutcome:
    algorithm: str
    seed: int
    sum_rate: float
    flops: int
    wall: float
    rates: np.ndarray = None  # per-epoch accepted rates (GMLB only)


@dataclass
class AlgorithmStats:
    seeds: tuple
    rates: tuple
    mean_rate: float
    std_rate: float
    min_rate: float
    max_rate: float
    mean_flops: float
    mean_wall: float

    @property
    def n_scenarios(self):
        return len(self.rates)

    @property
    def stderr(self):
        return self.std_rate / np.sqrt(self.n_scenarios)

    @classmethod
    def from_outcomes(cls, outcomes):
        outcomes = sorted(outcomes, key=lambda o: o.seed)
        rates = np.array([o.sum_rate for o in outcomes])
        return cls(
            seeds=tuple(o.seed for o in outcomes),
            rates=tuple(float(r) for r in rates),
            mean_rate=float(rates.mean()),
            std_rate=float(rates.std(ddof=1)) if rates.size > 1 else 0.0,
            min_rate=float(rates.min()),
            max_rate=float(rates.max()),
            mean_flops=float(np.mean([o.flops for o in outcomes])),
            mean_wall=float(np.mean([o.wall for o in outcomes])),
        )


@dataclass
class SweepResult:
    axis: str  # "snr_db" or "n_ris"
    value: float
    stats: dict  # algorithm -> AlgorithmStats, in the configured algorithm order


def run_algorithm(name, ch, noise, cfg, seed):
    """Run one registered algorithm on one scenario and measure its cost."""
    P = cfg.P
    rates = None
    start = time.perf_counter()
    with flops.counting() as counter:
        if name == "random":
            state = random_beamforming(ch, P, seed)
        elif name == "wmmse":
            state = wmmse_fixed_theta(ch, noise, P, replace(cfg.baseline, seed=seed))
        elif name == "ao":
            state = ao_optimize(ch, noise, P, replace(cfg.baseline, seed=seed))
        elif name in ("gmlb", "gmlb-unregulated"):
            gcfg = replace(cfg.gmlb, seed=seed, power_budget=P, regulated=name == "gmlb")
            result = gmlb_run(ch, noise, gcfg)
            state, rates = result.state, result.rates
        else:
            raise ConfigError(f"unknown algorithm {name!r}")
    wall = time.perf_counter() - start
    return RunOutcome(name, seed, sum_rate(state, ch, noise), counter.total, wall, rates)


def _work(item):
    cfg, N, snr_db, seed, name = item
    ch = generate_channel(cfg.rician_params(N), seed)
    return run_algorithm(name, ch, noise_from_snr(snr_db, cfg.P), cfg, seed)


def _execute(cfg, items):
    if cfg.workers == 1 or len(items) == 1:
        return [_work(item) for item in items]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(_work, items, chunksize=1))


def _sweep(cfg, axis, points):
    """points: list of (axis value, N, snr_db)."""
    items = [(cfg, N, snr, seed, name)
             for _, N, snr in points
             for name in cfg.algorithms
             for seed in cfg.scenario_seeds()]
    outcomes = iter(_execute(cfg, items))
    results = []
    for value, _, _ in points:
        stats = {}
        for name in cfg.algorithms:
            batch = [next(outcomes) for _ in range(cfg.scenario_count)]
            stats[name] = AlgorithmStats.from_outcomes(batch)
        results.append(SweepResult(axis, value, stats))
    return results


def run_snr_sweep(cfg, write=True):
    points = [(float(snr), cfg.N, float(snr)) for snr in cfg.snr_db_list]
    results = _sweep(cfg, "snr_db", points)
    if write:
        output.emit_plot_data(results, cfg.output_dir, cfg=cfg, command="snr-sweep")
    return results


def run_ris_sweep(cfg, write=True):
    points = [(int(N), int(N), float(cfg.snr_db)) for N in cfg.n_list]
    results = _sweep(cfg, "n_ris", points)
    if write:
        output.emit_plot_data(results, cfg.output_dir, cfg=cfg, command="ris-sweep")
    return results


def smooth(series, window=5):
    """Trailing moving average; the first few points average what is available."""
    series = np.asarray(series, dtype=np.float64)
    return np.array([series[max(t - window + 1, 0):t + 1].mean() for t in range(series.size)])


def first_crossing(series, level):
    """1-based epoch at which the series first exceeds ``level``; None if never."""
    above = np.nonzero(np.asarray(series) > level)[0]
    return int(above[0]) + 1 if above.size else None


@dataclass
class TraceCurve:
    n_ris: int
    mean_rate: np.ndarray
    smoothed_rate: np.ndarray
    reference: float
    crossing_epoch: int
    smoothed_crossing_epoch: int


@dataclass
class EpochTraceResult:
    curves: list
    reference_algorithm: str

    @property
    def crossing_ratio(self):
        """Epochs-to-crossing of the second curve over the first, when both cross."""
        if len(self.curves) < 2:
            return None
        a, b = self.curves[0].crossing_epoch, self.curves[1].crossing_epoch
        return None if a is None or b is None else b / a


def run_epoch_trace(cfg, write=True, reference="wmmse"):
    """Mean GMLB sum-rate traces per RIS size, against the mean WMMSE level."""
    if reference not in ("wmmse", "ao"):
        raise ConfigError("trace reference must be 'wmmse' or 'ao'")
    snr = float(cfg.snr_db)
    items = [(cfg, int(N), snr, seed, name)
             for N in cfg.trace_n_list
             for name in ("gmlb", reference)
             for seed in cfg.scenario_seeds()]
    outcomes = iter(_execute(cfg, items))
    curves = []
    for N in cfg.trace_n_list:
        traces = [next(outcomes).rates for _ in range(cfg.scenario_count)]
        ref = float(np.mean([next(outcomes).sum_rate for _ in range(cfg.scenario_count)]))
        mean = np.mean(traces, axis=0)
        smoothed = smooth(mean, cfg.smoothing_window)
        curves.append(TraceCurve(int(N), mean, smoothed, ref,
                                 first_crossing(mean, ref), first_crossing(smoothed, ref)))
    result = EpochTraceResult(curves, reference)
    if write:
        output.emit_plot_data(result, cfg.output_dir, cfg=cfg, command="epoch-trace")
    return result


@dataclass
class CostRow:
    n_ris: int
    algorithm: str
    mean_flops: float
    normalized_cost: float
    mean_wall: float
    normalized_wall: float
    n_scenarios: int


@dataclass
class CostTable:
    rows: list
    normalization: str


def run_cost_comparison(cfg, write=True, sweep=None):
    """Flop-proxy and wall-time cost per (N, algorithm), relative to GMLB at the smallest N.

    :param sweep: results of ``run_ris_sweep(cfg)`` to reuse instead of rerunning
    """
    if sweep is None:
        sweep = _sweep(cfg, "n_ris", [(int(N), int(N), float(cfg.snr_db)) for N in cfg.n_list])
    ref_name = "gmlb" if "gmlb" in cfg.algorithms else cfg.algorithms[0]
    smallest = min(sweep, key=lambda r: r.value)
    ref = smallest.stats[ref_name]
    rows = []
    for result in sweep:
        for name, st in result.stats.items():
            rows.append(CostRow(int(result.value), name, st.mean_flops,
                                st.mean_flops / ref.mean_flops if ref.mean_flops else float("nan"),
                                st.mean_wall, st.mean_wall / ref.mean_wall if ref.mean_wall else float("nan"),
                                st.n_scenarios))
    table = CostTable(rows, f"{ref_name} at N={int(smallest.value)}")
    if write:
        output.emit_plot_data(table, cfg.output_dir, cfg=cfg, command="cost-compare")
    return table


@dataclass
class GradientCheckRow:
    scenario_seed: int
    state_index: int
    rel_err_w: float
    rel_err_theta: float


def relative_error(analytic, reference):
    reference = np.asarray(reference)
    return float(np.linalg.norm(np.asarray(analytic) - reference)
                 / max(np.linalg.norm(reference), 1e-300))


def gradient_errors(state, ch, noise, h=1e-6):
    """Relative errors of both analytic gradients against central differences."""
    W = state.W

    def rate_of_w(v):
        return sum_rate(state.with_W(real_to_complex(v, W.shape)), ch, noise)

    def rate_of_theta(t):
        return sum_rate(state.with_theta(t), ch, noise)

    fd_w = finite_diff_gradient(rate_of_w, complex_to_real(W), h)
    fd_theta = finite_diff_gradient(rate_of_theta, state.theta, h)
    err_w = relative_error(complex_to_real(grad_sum_rate_wrt_W(state, ch, noise)), fd_w)
    err_theta = relative_error(grad_sum_rate_wrt_theta(state, ch, noise), fd_theta)
    return err_w, err_theta


def run_gradient_check(cfg, states=20, write=True):
    noise = noise_from_snr(cfg.snr_db, cfg.P)
    rows = []
    for seed in cfg.scenario_seeds():
        ch = generate_channel(cfg.rician_params(), seed)
        for i in range(states):
            state = init_state(ch, cfg.P, [seed, 1000 + i])
            rows.append(GradientCheckRow(seed, i, *gradient_errors(state, ch, noise)))
    if write:
        output.emit_plot_data(rows, cfg.output_dir, cfg=cfg, command="gradient-check")
    return rows
