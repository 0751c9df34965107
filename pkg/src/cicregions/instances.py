"""Built-in channel instances.

``inst_a`` is the worked example used across the docs and tests: binary
auxiliaries feeding two 4-ary inputs through deterministic pairings,
with both receivers observing their own input through a symmetric
symbol-flip channel.  ``random_instance`` draws conditional tables
from sparse Dirichlets tuned so the sampled regions are usually
non-degenerate.
"""

from __future__ import annotations

import numpy as np

from .config import InstanceConfig
from .errors import ConfigurationError
from .probability import AuxFactorization, ChannelSpec

INST_A_COPY_NOISE = 0.1
INST_A_FLIP = 0.05

# Sparse-Dirichlet concentrations for random instances.  Sharp channel and
# input rows keep the decoders' mutual-information budgets away from zero;
# the user-2 auxiliary tables mix a per-q base row with a bounded
# cross-dependent perturbation so the binning overheads stay moderate.
# Fully flat tables almost surely give overheads that exceed every decoding
# budget, collapsing the rate region to the empty set.
_CHANNEL_SHARPNESS = 0.1
_INPUT_SHARPNESS = 0.1
_BASE_FLATNESS = 5.0
_CROSS_COUPLING_MAX = 0.3


def _symbol_flip(card: int, flip: float) -> np.ndarray:
    t = np.full((card, card), flip / (card - 1))
    np.fill_diagonal(t, 1.0 - flip)
    return t


def inst_a() -> InstanceConfig:
    """Binary-auxiliary instance with deterministic input pairings.

    x1 enumerates (u1p, u1c) and x2 enumerates (u2c, u2p); u2c is a 10%%
    noisy copy of u1p xor u1c and u2p a 10%% noisy copy of u1c.  Each
    receiver sees its sender's 4-ary input through a 5%% symbol flip.
    """
    p_q = np.array([1.0])
    p_u1p = np.array([[0.5, 0.5]])
    p_u1c = np.array([[0.5, 0.5]])

    p_x1 = np.zeros((1, 2, 2, 4))
    for c in range(2):
        for a in range(2):
            p_x1[0, c, a, 2 * a + c] = 1.0

    keep = 1.0 - INST_A_COPY_NOISE
    p_u2c = np.zeros((1, 2, 2, 2))
    p_u2p = np.zeros((1, 2, 2, 2))
    for c in range(2):
        for a in range(2):
            p_u2c[0, c, a, a ^ c] = keep
            p_u2c[0, c, a, 1 - (a ^ c)] = INST_A_COPY_NOISE
            p_u2p[0, c, a, c] = keep
            p_u2p[0, c, a, 1 - c] = INST_A_COPY_NOISE

    p_x2 = np.zeros((1, 2, 2, 4))
    for u in range(2):
        for v in range(2):
            p_x2[0, u, v, 2 * u + v] = 1.0

    flip = _symbol_flip(4, INST_A_FLIP)
    channel = np.einsum("xy,wz->xwyz", flip, flip)

    aux = AuxFactorization(p_q=p_q, p_u1p=p_u1p, p_u1c=p_u1c, p_x1=p_x1,
                           p_u2c=p_u2c, p_u2p=p_u2p, p_x2=p_x2)
    return InstanceConfig(aux=aux, channel=ChannelSpec(table=channel), name="inst-a")


def random_instance(rng: np.random.Generator, q_card: int = 1,
                    x_card: int = 4, y_card: int = 4) -> InstanceConfig:
    """Random instance with informative channels and mild cross-coupling.

    Auxiliaries stay binary so projections stay cheap; input and output
    alphabet sizes are adjustable for heavier or lighter instances.  The
    draw is deterministic in ``rng``: tables are consumed in a fixed order.
    """
    if q_card < 1 or x_card < 2 or y_card < 2:
        raise ConfigurationError("alphabets need q_card >= 1 and x/y cards >= 2")

    def rows(*shape, alpha=1.0):
        flat = rng.dirichlet(np.full(shape[-1], alpha),
                             size=int(np.prod(shape[:-1])))
        return flat.reshape(shape)

    base_c = rows(q_card, 1, 1, 2, alpha=_BASE_FLATNESS)
    base_p = rows(q_card, 1, 1, 2, alpha=_BASE_FLATNESS)
    w = rng.uniform(0.0, _CROSS_COUPLING_MAX)
    aux = AuxFactorization(
        p_q=rng.dirichlet(np.ones(q_card)),
        p_u1p=rows(q_card, 2),
        p_u1c=rows(q_card, 2),
        p_x1=rows(q_card, 2, 2, x_card, alpha=_INPUT_SHARPNESS),
        p_u2c=(1.0 - w) * base_c + w * rows(q_card, 2, 2, 2),
        p_u2p=(1.0 - w) * base_p + w * rows(q_card, 2, 2, 2),
        p_x2=rows(q_card, 2, 2, x_card, alpha=_INPUT_SHARPNESS),
    )
    channel = rows(x_card, x_card, y_card * y_card,
                   alpha=_CHANNEL_SHARPNESS).reshape(
        x_card, x_card, y_card, y_card)
    return InstanceConfig(aux=aux, channel=ChannelSpec(table=channel))
