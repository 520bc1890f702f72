"""BF-Net and Theta-Net: Linear -> ReLU -> Linear, with hand-written backprop.

BF-Net maps each antenna row of the W-gradient (K complex values packed as K
real parts then K imaginary parts) through one shared 2K -> hidden -> 2K
network. Theta-Net maps the N-vector of phase gradients to N raw outputs, which
the differential regulator squashes to ``lam * sigmoid(.)``.
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from risgmlb import flops
from risgmlb.errors import ConfigError, ShapeError

DEFAULT_HIDDEN = 200


@dataclass(frozen=True, eq=False)
class MlpParams:
    w1: np.ndarray  # hidden x in
    b1: np.ndarray  # hidden
    w2: np.ndarray  # out x hidden
    b2: np.ndarray  # out

    @property
    def dims(self):
        return self.w1.shape[1], self.w1.shape[0], self.w2.shape[0]

    def arrays(self):
        return self.w1, self.b1, self.w2, self.b2

    def flatten(self):
        return np.concatenate([a.ravel() for a in self.arrays()])

    @classmethod
    def from_flat(cls, dims, flat):
        n_in, hidden, n_out = dims
        shapes = [(hidden, n_in), (hidden,), (n_out, hidden), (n_out,)]
        needed = sum(int(np.prod(shape)) for shape in shapes)
        if needed != len(flat):
            raise ShapeError(f"flat parameter vector has {len(flat)} entries, dims need {needed}")
        parts, offset = [], 0
        for shape in shapes:
            size = int(np.prod(shape))
            parts.append(np.array(flat[offset:offset + size], dtype=np.float64).reshape(shape))
            offset += size
        return cls(*parts)

    def zeros_like(self):
        return MlpParams(*(np.zeros_like(a) for a in self.arrays()))

    def __add__(self, other):
        return MlpParams(*(a + b for a, b in zip(self.arrays(), other.arrays())))

    def allclose(self, other, **kw):
        return all(np.allclose(a, b, **kw) for a, b in zip(self.arrays(), other.arrays()))


@dataclass(frozen=True)
class RegulatorConfig:
    lam: float = np.pi / 4
    # non-default variant lam * (sigmoid(x) - 1/2): zero-centered increments
    centered: bool = False

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigError("regulator amplitude must be positive")


@dataclass(frozen=True, eq=False)
class ForwardCache:
    params: MlpParams
    x: np.ndarray
    pre: np.ndarray
    hidden: np.ndarray


def init_params(dims, seed):
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases."""
    n_in, hidden, n_out = dims
    if min(dims) < 1:
        raise ConfigError(f"network dims must be >= 1, got {dims}")
    rng = np.random.default_rng(seed)
    bound1 = 1.0 / np.sqrt(n_in)
    bound2 = 1.0 / np.sqrt(hidden)
    w1 = rng.uniform(-bound1, bound1, size=(hidden, n_in))
    w2 = rng.uniform(-bound2, bound2, size=(n_out, hidden))
    return MlpParams(w1, np.zeros(hidden), w2, np.zeros(n_out))


def mlp_forward(params, x):
    """Evaluate the network on one input vector or a batch of row vectors.

    :return: (output, cache) where the cache feeds :func:`mlp_backward`
    """
    x = np.asarray(x, dtype=np.float64)
    n_in, hidden, n_out = params.dims
    if x.shape[-1] != n_in or x.ndim > 2:
        raise ShapeError(f"network expects input width {n_in}, got shape {x.shape}")
    batch = 1 if x.ndim == 1 else x.shape[0]
    flops.add(flops.mlp_forward(n_in, hidden, n_out, batch))
    pre = x @ params.w1.T + params.b1
    h = np.maximum(pre, 0.0)
    y = h @ params.w2.T + params.b2
    return y, ForwardCache(params, x, pre, h)


def mlp_backward(params, cache, upstream):
    """Gradients of sum(y * upstream) with respect to parameters and input.

    Batched caches sum the parameter gradients over the batch. The ReLU
    derivative at exactly zero is taken as zero.
    """
    if cache.params is not params:
        raise ValueError("forward cache was produced with different parameters")
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != cache.pre.shape[:-1] + (params.dims[2],):
        raise ShapeError(f"upstream shape {upstream.shape} does not match network output")
    n_in, hidden, n_out = params.dims
    batch = 1 if upstream.ndim == 1 else upstream.shape[0]
    flops.add(flops.mlp_backward(n_in, hidden, n_out, batch))
    x2 = np.atleast_2d(cache.x)
    h2 = np.atleast_2d(cache.hidden)
    up2 = np.atleast_2d(upstream)
    d_w2 = up2.T @ h2
    d_b2 = up2.sum(axis=0)
    d_h = up2 @ params.w2
    d_pre = d_h * (np.atleast_2d(cache.pre) > 0.0)
    d_w1 = d_pre.T @ x2
    d_b1 = d_pre.sum(axis=0)
    d_x = d_pre @ params.w1
    if upstream.ndim == 1:
        d_x = d_x[0]
    return MlpParams(d_w1, d_b1, d_w2, d_b2), d_x


def sgd_step(params, grads, lr):
    return MlpParams(*(p - lr * g for p, g in zip(params.arrays(), grads.arrays())))


def pack_rows(grad_W):
    return np.concatenate([grad_W.real, grad_W.imag], axis=1)


def unpack_rows(Y):
    K = Y.shape[1] // 2
    return Y[:, :K] + 1j * Y[:, K:]


def bf_net_apply(params, grad_W):
    """Row-wise BF-Net proposal for the precoder increment.

    :return: (delta_W, cache)
    """
    K = grad_W.shape[1]
    if params.dims[0] != 2 * K or params.dims[2] != 2 * K:
        raise ShapeError(f"BF-Net dims {params.dims} do not fit K={K}")
    Y, cache = mlp_forward(params, pack_rows(grad_W))
    return unpack_rows(Y), cache


def bf_net_backward(params, cache, upstream_dW):
    """Parameter gradients given dL/d(delta_W) in ascent-direction complex form."""
    return mlp_backward(params, cache, pack_rows(upstream_dW))[0]


def sigmoid(x):
    # split by sign so large |x| never overflows exp
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def regulate(raw, cfg):
    flops.add(4 * raw.size)
    s = sigmoid(raw)
    return cfg.lam * (s - 0.5) if cfg.centered else cfg.lam * s


def regulate_grad(raw, cfg):
    s = sigmoid(raw)
    return cfg.lam * s * (1.0 - s)


def theta_net_apply(params, cfg, grad_theta):
    """Phase increments from Theta-Net.

    With ``cfg=None`` the raw network output is returned unregulated.

    :return: (delta_theta, raw_output, cache)
    """
    N = grad_theta.shape[0]
    if params.dims[0] != N or params.dims[2] != N:
        raise ShapeError(f"Theta-Net dims {params.dims} do not fit N={N}")
    raw, cache = mlp_forward(params, grad_theta)
    delta = raw if cfg is None else regulate(raw, cfg)
    return delta, raw, cache


# Checkpoint layout (little-endian): b"MLPP", uint32 in, hidden, out, then
# float64 entries of w1 (row-major), b1, w2 (row-major), b2.

_CKPT_MAGIC = b"MLPP"


def save_params(params, path):
    header = _CKPT_MAGIC + struct.pack("<3I", *params.dims)
    Path(path).write_bytes(header + params.flatten().astype("<f8").tobytes())


def load_params(path):
    blob = Path(path).read_bytes()
    if blob[:4] != _CKPT_MAGIC:
        raise ValueError(f"{path}: not a parameter checkpoint")
    dims = struct.unpack("<3I", blob[4:16])
    flat = np.frombuffer(blob[16:], dtype="<f8").astype(np.float64)
    return MlpParams.from_flat(dims, flat)
