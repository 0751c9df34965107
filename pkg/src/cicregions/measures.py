"""Shannon information measures over dense joint pmfs.

Everything is measured in bits (base-2 logarithms) with the convention
0*log(0) = 0.  Marginals are computed fresh from the joint on every
query; at the table sizes this package works with, recomputation is
cheaper than correctness-risking caches.

Negative conditional mutual information can only arise from floating
point rounding.  Values in [-1e-9, 0) are clamped to zero; anything
below -1e-9 indicates a genuinely inconsistent input and raises.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ConsistencyError
from .probability import JointPmf, marginalize

# Rounding residue deeper than this is treated as a real inconsistency.
NEGATIVITY_TOL = 1e-9


def entropy(pmf: JointPmf, names: tuple[str, ...] | list[str] | None = None) -> float:
    """Joint entropy H(names) in bits; H of the empty set is 0."""
    if names is not None and len(tuple(names)) == 0:
        return 0.0
    marg = pmf if names is None else marginalize(pmf, tuple(names))
    p = marg.probs.ravel()
    nz = p[p > 0.0]
    return float(-(nz * np.log2(nz)).sum())


@dataclass(frozen=True)
class MiQuery:
    """A conditional mutual information query I(left; right | given).

    The three groups must be pairwise disjoint.  ``label()`` renders the
    query in the notation used throughout serialized constraint systems,
    e.g. ``I(Y1;U1p,U2c|U1c,Q)``.
    """

    left: tuple[str, ...]
    right: tuple[str, ...]
    given: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "left", tuple(self.left))
        object.__setattr__(self, "right", tuple(self.right))
        object.__setattr__(self, "given", tuple(self.given))
        if not self.left or not self.right:
            raise ConfigurationError("MiQuery requires non-empty left and right groups")
        groups = self.left + self.right + self.given
        if len(set(groups)) != len(groups):
            raise ConfigurationError(f"MiQuery groups overlap: {self.label()}")

    def label(self) -> str:
        head = ",".join(self.left) + ";" + ",".join(self.right)
        if self.given:
            return f"I({head}|{','.join(self.given)})"
        return f"I({head})"


def parse_mi_label(label: str) -> MiQuery:
    """Inverse of MiQuery.label(), for reading serialized systems."""
    text = label.strip()
    if not text.startswith("I(") or not text.endswith(")"):
        raise ConfigurationError(f"not a mutual-information label: {label!r}")
    body = text[2:-1]
    if "|" in body:
        head, tail = body.split("|", 1)
        given = tuple(t for t in tail.split(",") if t)
    else:
        head, given = body, ()
    if head.count(";") != 1:
        raise ConfigurationError(f"not a mutual-information label: {label!r}")
    left_s, right_s = head.split(";")
    return MiQuery(
        tuple(t for t in left_s.split(",") if t),
        tuple(t for t in right_s.split(",") if t),
        given,
    )


def cond_mutual_info(pmf: JointPmf, query: MiQuery) -> float:
    """Evaluate I(left; right | given) on the joint, in bits.

    Computed as H(left,given) + H(right,given) - H(left,right,given)
    - H(given).  Tiny negative rounding residue is clamped to zero.
    """
    for name in query.left + query.right + query.given:
        if name not in pmf.names:
            raise ConfigurationError(
                f"query {query.label()} references {name!r}, absent from joint over {pmf.names}"
            )
    h_lg = entropy(pmf, query.left + query.given)
    h_rg = entropy(pmf, query.right + query.given)
    h_lrg = entropy(pmf, query.left + query.right + query.given)
    h_g = entropy(pmf, query.given)
    value = h_lg + h_rg - h_lrg - h_g
    if value < 0.0:
        if value < -NEGATIVITY_TOL:
            raise ConsistencyError(
                f"{query.label()} evaluated to {value:.3e}; below the rounding tolerance "
                f"{-NEGATIVITY_TOL:g}, the joint is inconsistent"
            )
        value = 0.0
    return float(value)
