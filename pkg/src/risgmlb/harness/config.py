"""Run configuration: a YAML key-value file merged over defaults, then CLI overrides."""

from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import yaml

from risgmlb.baselines import BaselineConfig
from risgmlb.channel import RicianParams
from risgmlb.errors import ConfigError
from risgmlb.gmlb import GmlbConfig

ALGORITHMS = ("random", "wmmse", "ao", "gmlb", "gmlb-unregulated")


@dataclass(frozen=True)
class RicianFactors:
    kappa_user: float = 10.0
    kappa_bsris: float = 10.0


@dataclass(frozen=True)
class RunConfig:
    M: int = 4
    N: int = 4
    K: int = 4
    P: float = 1000.0
    snr_db_list: tuple = (-20.0, -10.0, 0.0, 10.0, 20.0, 30.0)
    snr_db: float = 20.0  # operating point of RIS sweeps, traces and cost runs
    n_list: tuple = (4, 8, 16, 32)
    trace_n_list: tuple = (4, 8)
    scenario_count: int = 10
    algorithms: tuple = ALGORITHMS
    seed: int = 0
    output_dir: str = "results"
    workers: int = 1
    record_time: bool = False
    smoothing_window: int = 5
    gmlb: GmlbConfig = field(default_factory=lambda: GmlbConfig(epochs=2000))
    baseline: BaselineConfig = field(default_factory=BaselineConfig)
    rician: RicianFactors = field(default_factory=RicianFactors)

    def __post_init__(self):
        if self.scenario_count < 1:
            raise ConfigError("scenario_count must be >= 1")
        if min(self.M, self.N, self.K) < 1 or any(n < 1 for n in self.n_list + self.trace_n_list):
            raise ConfigError("all dimensions must be >= 1")
        if not self.algorithms:
            raise ConfigError("no algorithms selected")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ConfigError(f"unknown algorithm(s) {unknown}; choose from {list(ALGORITHMS)}")
        if self.workers < 1 or self.smoothing_window < 1:
            raise ConfigError("workers and smoothing_window must be >= 1")
        if not self.P > 0:
            raise ConfigError("P must be positive")

    def rician_params(self, N=None):
        return RicianParams(M=self.M, N=self.N if N is None else N, K=self.K,
                            kappa_user=self.rician.kappa_user,
                            kappa_bsris=self.rician.kappa_bsris)

    def scenario_seeds(self):
        return [self.seed + i for i in range(self.scenario_count)]

    def to_dict(self):
        out = asdict(self)
        for key, value in out.items():
            if isinstance(value, tuple):
                out[key] = list(value)
        return out


_NESTED = {"gmlb": GmlbConfig, "baseline": BaselineConfig, "rician": RicianFactors}
_TUPLES = ("snr_db_list", "n_list", "trace_n_list", "algorithms")


def _build(cls, values, where):
    known = {f.name for f in fields(cls)}
    extra = set(values) - known
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(extra)}")
    try:
        return cls(**values)
    except TypeError as exc:
        raise ConfigError(f"bad {where} section: {exc}") from None


def config_from_dict(data, base=None):
    """Overlay ``data`` on ``base`` (defaults when None); nested sections merge key by key."""
    base = RunConfig() if base is None else base
    data = dict(data or {})
    updates = {}
    for name, cls in _NESTED.items():
        if name in data:
            section = data.pop(name) or {}
            if not isinstance(section, dict):
                raise ConfigError(f"section {name!r} must be a mapping")
            merged = {**asdict(getattr(base, name)), **section}
            updates[name] = _build(cls, merged, name)
    for key in _TUPLES:
        if key in data:
            value = data[key]
            data[key] = tuple(value) if isinstance(value, (list, tuple)) else (value,)
    known = {f.name for f in fields(RunConfig)}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown config key(s): {sorted(extra)}")
    # the P in the run config is the one budget every algorithm uses
    try:
        cfg = replace(base, **data, **updates)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.gmlb.power_budget != cfg.P:
        cfg = replace(cfg, gmlb=replace(cfg.gmlb, power_budget=cfg.P))
    return cfg


def load_config(path=None, overrides=None):
    data = {}
    if path is not None:
        try:
            data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
    cfg = config_from_dict(data)
    if overrides:
        cfg = config_from_dict(overrides, base=cfg)
    return cfg


def dump_config(cfg, path):
    Path(path).write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=True), encoding="utf-8")
