"""Floating-point operation accounting used as the compute/energy proxy.

Cost model (real flops; a complex multiply-accumulate counts as 8):

==========================  ==========================================
operation                   cost
==========================  ==========================================
complex matmul (m,n)@(n,p)  8*m*n*p
real matmul (m,n)@(n,p)     2*m*n*p
elementwise complex op      6 per entry (multiply), 2 per entry (add)
effective channel H.Θ.G     6*K*N + 8*K*N*M
sum rate                    effective channel + 8*K*M*K + 3*K*K + 4*K
grad wrt W                  sum rate + 8*M*K*K + 6*K*K
grad wrt theta              sum rate + 8*N*M*K + 8*N*K*K + 14*K*N
mlp forward (batch B)       B*(2*h*i + 2*o*h + h + o + h)
mlp backward (batch B)      B*(4*o*h + 4*h*i + h + o + h)
sigmoid regulator           4 per entry
Hermitian eigendecomposition 26*m**3 (complex QR-iteration estimate)
==========================  ==========================================

Counts accumulate into the innermost active :func:`counting` block. Outside of
any block they are discarded, so library calls stay cheap and side-effect free.
"""

import contextlib
import contextvars
from dataclasses import dataclass


@dataclass
class FlopCounter:
    total: int = 0

    def add(self, n):
        self.total += int(n)


_active = contextvars.ContextVar("risgmlb_flops", default=None)


def add(n):
    counter = _active.get()
    if counter is not None:
        counter.add(n)


@contextlib.contextmanager
def counting():
    """Collect flops for the enclosed block. Nested blocks also feed their parent."""
    parent = _active.get()
    counter = FlopCounter()
    token = _active.set(counter)
    try:
        yield counter
    finally:
        _active.reset(token)
        if parent is not None:
            parent.add(counter.total)


def cmatmul(m, n, p):
    return 8 * m * n * p


def rmatmul(m, n, p):
    return 2 * m * n * p


def effective_channel(M, N, K):
    return 6 * K * N + 8 * K * N * M


def sum_rate(M, N, K):
    return effective_channel(M, N, K) + 8 * K * M * K + 3 * K * K + 4 * K


def grad_w(M, N, K):
    return sum_rate(M, N, K) + 8 * M * K * K + 6 * K * K


def grad_theta(M, N, K):
    return sum_rate(M, N, K) + 8 * N * M * K + 8 * N * K * K + 14 * K * N


def mlp_forward(n_in, hidden, n_out, batch=1):
    return batch * (2 * hidden * n_in + 2 * n_out * hidden + hidden + n_out + hidden)


def mlp_backward(n_in, hidden, n_out, batch=1):
    return batch * (4 * n_out * hidden + 4 * hidden * n_in + hidden + n_out + hidden)


def eigh(m):
    return 26 * m ** 3
