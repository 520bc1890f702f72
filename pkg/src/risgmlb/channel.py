"""Seeded Rician channel realizations for the BS -> RIS -> users links.

Line-of-sight components come from half-wavelength uniform linear arrays at
the BS (M elements) and the RIS (N elements). For seed ``s`` the generator is
``numpy.random.default_rng(s)`` (PCG64), and draws happen in this order:

1. ``K + 2`` angles uniform on [-pi/2, pi/2): RIS arrival angle and BS
   departure angle for G, then one RIS departure angle per user;
2. G scattered part, real then imaginary parts, N x M standard normals each;
3. H scattered part, real then imaginary parts, K x N standard normals each.

Scattered entries are scaled by 1/sqrt(2) so each has unit variance. Path loss
is normalized to one on every link.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from risgmlb.errors import ConfigError, ShapeError

RNG_ALGORITHM = "numpy.random.default_rng (PCG64)"


@dataclass(frozen=True)
class RicianParams:
    """Link dimensions and Rician factors.

    ``los_angles`` pins the array geometry as (ris_arrival, bs_departure,
    user_1, ..., user_K) in radians. When None, angles are drawn per scenario.
    """

    M: int = 4
    N: int = 4
    K: int = 4
    kappa_user: float = 10.0
    kappa_bsris: float = 10.0
    los_angles: tuple = None

    def __post_init__(self):
        if min(self.M, self.N, self.K) < 1:
            raise ConfigError(f"dimensions must be >= 1, got M={self.M} N={self.N} K={self.K}")
        if self.kappa_user < 0 or self.kappa_bsris < 0:
            raise ConfigError("Rician factors must be non-negative")
        if self.los_angles is not None and len(self.los_angles) != self.K + 2:
            raise ConfigError(f"los_angles needs K + 2 = {self.K + 2} entries")


@dataclass(frozen=True, eq=False)
class ChannelSet:
    G: np.ndarray  # N x M, BS -> RIS
    H: np.ndarray  # K x N, RIS -> users; row k is h_k^H
    params: RicianParams
    seed: int

    def __post_init__(self):
        p = self.params
        if self.G.shape != (p.N, p.M) or self.H.shape != (p.K, p.N):
            raise ShapeError(
                f"G {self.G.shape} / H {self.H.shape} do not match M={p.M} N={p.N} K={p.K}"
            )

    @property
    def dims(self):
        return self.params.M, self.params.N, self.params.K

    def scaled(self, factor):
        return ChannelSet(self.G * factor, self.H * factor, self.params, self.seed)


def steering_vector(n_elements, angle):
    """Half-wavelength ULA response, entries exp(i*pi*n*sin(angle))."""
    return np.exp(1j * np.pi * np.arange(n_elements) * np.sin(angle))


def los_components(params, angles):
    ris_arrival, bs_departure = angles[0], angles[1]
    G_los = np.outer(steering_vector(params.N, ris_arrival),
                     np.conj(steering_vector(params.M, bs_departure)))
    H_los = np.stack([np.conj(steering_vector(params.N, a)) for a in angles[2:]])
    return G_los, H_los


def _rician(kappa, los, nlos):
    return np.sqrt(kappa / (1.0 + kappa)) * los + np.sqrt(1.0 / (1.0 + kappa)) * nlos


def generate_channel(params, seed):
    rng = np.random.default_rng(seed)
    angles = rng.uniform(-np.pi / 2, np.pi / 2, size=params.K + 2)
    if params.los_angles is not None:
        angles = np.asarray(params.los_angles, dtype=np.float64)
    G_nlos = (rng.standard_normal((params.N, params.M))
              + 1j * rng.standard_normal((params.N, params.M))) / np.sqrt(2.0)
    H_nlos = (rng.standard_normal((params.K, params.N))
              + 1j * rng.standard_normal((params.K, params.N))) / np.sqrt(2.0)
    G_los, H_los = los_components(params, angles)
    G = _rician(params.kappa_bsris, G_los, G_nlos)
    H = _rician(params.kappa_user, H_los, H_nlos)
    return ChannelSet(G=G, H=H, params=params, seed=int(seed))


def generate_scenario_batch(params, count, base_seed):
    if count < 1:
        raise ConfigError("scenario count must be >= 1")
    return [generate_channel(params, base_seed + i) for i in range(count)]


# Dump layout (UTF-8 text, one item per line):
#   risgmlb-channel v1
#   M N K
#   seed
#   kappa_user kappa_bsris
#   G entries row-major as "re im" pairs (N*M lines), then H likewise (K*N lines)
# Floats are written with repr(), which round-trips float64 exactly.

_DUMP_MAGIC = "risgmlb-channel v1"


def dump_channel(ch, path):
    lines = [_DUMP_MAGIC, f"{ch.params.M} {ch.params.N} {ch.params.K}", str(ch.seed),
             f"{ch.params.kappa_user!r} {ch.params.kappa_bsris!r}"]
    for z in np.concatenate([ch.G.ravel(), ch.H.ravel()]):
        lines.append(f"{float(z.real)!r} {float(z.imag)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_channel(path):
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != _DUMP_MAGIC:
        raise ValueError(f"{path}: not a channel dump")
    M, N, K = (int(v) for v in lines[1].split())
    seed = int(lines[2])
    kappa_user, kappa_bsris = (float(v) for v in lines[3].split())
    values = np.array([complex(float(a), float(b))
                       for a, b in (line.split() for line in lines[4:])])
    if values.size != N * M + K * N:
        raise ValueError(f"{path}: expected {N * M + K * N} entries, found {values.size}")
    params = RicianParams(M=M, N=N, K=K, kappa_user=kappa_user, kappa_bsris=kappa_bsris)
    return ChannelSet(G=values[:N * M].reshape(N, M), H=values[N * M:].reshape(K, N),
                      params=params, seed=seed)
