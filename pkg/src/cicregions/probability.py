"""Dense probability tables for the two-user cognitive interference channel.

The channel has inputs X1, X2 and outputs Y1, Y2.  The encoding side is
described by a time-sharing variable Q and four auxiliary codeword
variables: U1p/U1c carry transmitter 1's private/common sub-messages and
U2c/U2p carry transmitter 2's.  A full system state is the joint pmf of

    (Q, U1p, U1c, U2c, U2p, X1, X2, Y1, Y2)

stored as a dense row-major array indexed in exactly that order.  Zero
probabilities are kept in place; nothing is sparsified.

The factorized encoding distribution is

    p(q) p(u1p|q) p(u1c|q) p(x1|q,u1c,u1p)
        p(u2c|q,u1c,u1p) p(u2p|q,u1c,u1p) p(x2|q,u2c,u2p)

so U2c and U2p are conditionally independent given (Q, U1c, U1p); the
composed joint therefore satisfies I(U2p;U2c|U1p,U1c,Q) = 0 exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError

# Input tables are accepted when each distribution sums to one within
# this tolerance; derived quantities elsewhere use 1e-9.
NORMALIZATION_TOL = 1e-12

# Canonical variable order for every composed joint.
CANONICAL_ORDER = ("Q", "U1p", "U1c", "U2c", "U2p", "X1", "X2", "Y1", "Y2")


@dataclass(frozen=True)
class VariableRoster:
    """Ordered named variables with finite alphabet sizes."""

    names: tuple[str, ...]
    cards: tuple[int, ...]

    def __post_init__(self):
        if len(self.names) != len(self.cards):
            raise ConfigurationError("roster names and cardinalities differ in length")
        if len(set(self.names)) != len(self.names):
            raise ConfigurationError("roster contains a duplicate variable name")
        for name, card in zip(self.names, self.cards):
            if card < 1:
                raise ConfigurationError(f"variable {name} has cardinality {card}; must be >= 1")

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ConfigurationError(f"unknown variable {name!r}; roster has {self.names}") from None

    def axes(self, names: Iterable[str]) -> tuple[int, ...]:
        return tuple(self.axis(n) for n in names)

    def card(self, name: str) -> int:
        return self.cards[self.axis(name)]

    def subset(self, names: Sequence[str]) -> "VariableRoster":
        axes = self.axes(names)
        return VariableRoster(tuple(names), tuple(self.cards[a] for a in axes))


@dataclass(frozen=True)
class JointPmf:
    """A joint pmf over a roster, stored dense with shape = cardinalities."""

    roster: VariableRoster
    probs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.probs, dtype=float)
        if arr.shape != tuple(self.roster.cards):
            raise ConfigurationError(
                f"pmf shape {arr.shape} does not match roster cardinalities {self.roster.cards}"
            )
        object.__setattr__(self, "probs", arr)

    @property
    def names(self) -> tuple[str, ...]:
        return self.roster.names

    def marginal(self, keep: Sequence[str]) -> "JointPmf":
        return marginalize(self, keep)

    def flat(self) -> np.ndarray:
        """Row-major flattened copy of the table."""
        return self.probs.ravel()


def validate(pmf: JointPmf) -> str | None:
    """Return None when the pmf is a valid distribution, else a diagnostic.

    Checks, in order: no negative entries, total mass one within
    NORMALIZATION_TOL.  The diagnostic names the first offending cell.
    """
    arr = pmf.probs
    if np.any(arr < 0):
        idx = np.unravel_index(int(np.argmin(arr)), arr.shape)
        where = ",".join(f"{n}={i}" for n, i in zip(pmf.names, idx))
        return f"joint pmf has negative mass {arr[idx]:.3g} at ({where})"
    total = float(arr.sum())
    if abs(total - 1.0) > NORMALIZATION_TOL:
        return f"joint pmf sums to {total!r}, expected 1 within {NORMALIZATION_TOL}"
    return None


def marginalize(pmf: JointPmf, keep: Sequence[str]) -> JointPmf:
    """Marginal over ``keep``, preserving the pmf's variable order.

    ``keep`` may list names in any order; the result follows the parent
    roster's order so marginals of the same set always align.
    """
    keep_set = set(keep)
    unknown = keep_set - set(pmf.names)
    if unknown:
        raise ConfigurationError(f"cannot marginalize onto unknown variable(s) {sorted(unknown)}")
    ordered = tuple(n for n in pmf.names if n in keep_set)
    drop_axes = tuple(i for i, n in enumerate(pmf.names) if n not in keep_set)
    table = pmf.probs.sum(axis=drop_axes) if drop_axes else pmf.probs
    return JointPmf(pmf.roster.subset(ordered), table)


def _check_conditional(table: np.ndarray, signature: str, row_names: tuple[str, ...]) -> None:
    """Validate a conditional table whose last axis is the outcome.

    Every conditioning row must be a distribution; the diagnostic names
    the factor signature and the first bad row, e.g.
    ``factor p(u1c|q), row q=0 sums to 0.98``.
    """
    if np.any(table < 0):
        flat_idx = int(np.argmin(table))
        idx = np.unravel_index(flat_idx, table.shape)
        row = ",".join(f"{n}={i}" for n, i in zip(row_names, idx[:-1]))
        row = row or "()"
        raise ConfigurationError(
            f"factor {signature}, row {row} has negative entry {table[idx]:.3g}"
        )
    sums = table.sum(axis=-1)
    bad = np.argwhere(np.abs(sums - 1.0) > NORMALIZATION_TOL)
    if bad.size:
        idx = tuple(int(i) for i in bad[0])
        row = ",".join(f"{n}={i}" for n, i in zip(row_names, idx))
        row = row or "()"
        raise ConfigurationError(f"factor {signature}, row {row} sums to {float(sums[idx]):.6g}")


@dataclass(frozen=True)
class ChannelSpec:
    """Memoryless channel law p(y1,y2|x1,x2), indexed [x1][x2][y1][y2]."""

    table: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.table, dtype=float)
        if arr.ndim != 4:
            raise ConfigurationError(
                f"channel p(y1,y2|x1,x2) must be 4-dimensional, got {arr.ndim} axes"
            )
        object.__setattr__(self, "table", arr)
        _check_conditional(arr.reshape(arr.shape[0], arr.shape[1], -1), "p(y1,y2|x1,x2)", ("x1", "x2"))

    @property
    def x1_card(self) -> int:
        return self.table.shape[0]

    @property
    def x2_card(self) -> int:
        return self.table.shape[1]

    @property
    def y1_card(self) -> int:
        return self.table.shape[2]

    @property
    def y2_card(self) -> int:
        return self.table.shape[3]


@dataclass(frozen=True)
class AuxFactorization:
    """The factorized encoding distribution.

    Tables are indexed with conditioning variables first, in the order
    they appear in the factor signature, outcome last:

    - ``p_q``:   p(q), shape (Q,)
    - ``p_u1p``: p(u1p|q), shape (Q, U1p)
    - ``p_u1c``: p(u1c|q), shape (Q, U1c)
    - ``p_x1``:  p(x1|q,u1c,u1p), shape (Q, U1c, U1p, X1)
    - ``p_u2c``: p(u2c|q,u1c,u1p), shape (Q, U1c, U1p, U2c)
    - ``p_u2p``: p(u2p|q,u1c,u1p), shape (Q, U1c, U1p, U2p)
    - ``p_x2``:  p(x2|q,u2c,u2p), shape (Q, U2c, U2p, X2)
    """

    p_q: np.ndarray
    p_u1p: np.ndarray
    p_u1c: np.ndarray
    p_x1: np.ndarray
    p_u2c: np.ndarray
    p_u2p: np.ndarray
    p_x2: np.ndarray

    def __post_init__(self):
        conv = {f: np.asarray(getattr(self, f), dtype=float) for f in (
            "p_q", "p_u1p", "p_u1c", "p_x1", "p_u2c", "p_u2p", "p_x2")}
        for f, arr in conv.items():
            object.__setattr__(self, f, arr)
        q = self.p_q.shape[0]
        expected_ndim = {"p_q": 1, "p_u1p": 2, "p_u1c": 2, "p_x1": 4, "p_u2c": 4, "p_u2p": 4, "p_x2": 4}
        signatures = {
            "p_q": ("p(q)", ()),
            "p_u1p": ("p(u1p|q)", ("q",)),
            "p_u1c": ("p(u1c|q)", ("q",)),
            "p_x1": ("p(x1|q,u1c,u1p)", ("q", "u1c", "u1p")),
            "p_u2c": ("p(u2c|q,u1c,u1p)", ("q", "u1c", "u1p")),
            "p_u2p": ("p(u2p|q,u1c,u1p)", ("q", "u1c", "u1p")),
            "p_x2": ("p(x2|q,u2c,u2p)", ("q", "u2c", "u2p")),
        }
        for f, (sig, rows) in signatures.items():
            arr = conv[f]
            if arr.ndim != expected_ndim[f]:
                raise ConfigurationError(
                    f"factor {sig} must have {expected_ndim[f]} axes, got {arr.ndim}"
                )
            if f != "p_q" and arr.shape[0] != q:
                raise ConfigurationError(
                    f"factor {sig} has Q-axis length {arr.shape[0]}, expected {q}"
                )
            if f == "p_q":
                _check_conditional(arr.reshape(1, -1), sig, ())
            else:
                _check_conditional(arr, sig, rows)
        u1c, u1p = self.p_u1c.shape[1], self.p_u1p.shape[1]
        for f in ("p_x1", "p_u2c", "p_u2p"):
            arr = conv[f]
            if arr.shape[1] != u1c or arr.shape[2] != u1p:
                raise ConfigurationError(
                    f"factor {signatures[f][0]} conditioning shape {arr.shape[1:3]} "
                    f"does not match (U1c,U1p)=({u1c},{u1p})"
                )
        if self.p_x2.shape[1] != self.p_u2c.shape[3] or self.p_x2.shape[2] != self.p_u2p.shape[3]:
            raise ConfigurationError(
                "factor p(x2|q,u2c,u2p) conditioning shape "
                f"{self.p_x2.shape[1:3]} does not match (U2c,U2p)="
                f"({self.p_u2c.shape[3]},{self.p_u2p.shape[3]})"
            )

    @property
    def cards(self) -> dict[str, int]:
        return {
            "Q": self.p_q.shape[0],
            "U1p": self.p_u1p.shape[1],
            "U1c": self.p_u1c.shape[1],
            "U2c": self.p_u2c.shape[3],
            "U2p": self.p_u2p.shape[3],
            "X1": self.p_x1.shape[3],
            "X2": self.p_x2.shape[3],
        }

    def u2c_marginal(self) -> np.ndarray:
        """p(u2c|q): the codebook-generation marginal for the U2c bins."""
        return np.einsum("qc,qa,qcau->qu", self.p_u1c, self.p_u1p, self.p_u2c)

    def u2p_marginal(self) -> np.ndarray:
        """p(u2p|q): the codebook-generation marginal for the U2p bins."""
        return np.einsum("qc,qa,qcav->qv", self.p_u1c, self.p_u1p, self.p_u2p)

    def joint_with_aux(self) -> JointPmf:
        """Joint of (Q, U1p, U1c, U2c, U2p) induced by the factorization."""
        table = np.einsum(
            "q,qa,qc,qcau,qcav->qacuv", self.p_q, self.p_u1p, self.p_u1c, self.p_u2c, self.p_u2p
        )
        cards = self.cards
        roster = VariableRoster(
            ("Q", "U1p", "U1c", "U2c", "U2p"),
            (cards["Q"], cards["U1p"], cards["U1c"], cards["U2c"], cards["U2p"]),
        )
        return JointPmf(roster, table)


def compose(channel: ChannelSpec, aux: AuxFactorization) -> JointPmf:
    """Compose the encoding factorization with the channel law.

    Returns the joint pmf over CANONICAL_ORDER.  The channel acts on
    (X1, X2) only, so Y1,Y2 are conditionally independent of the
    auxiliaries given the inputs.
    """
    cards = aux.cards
    if channel.x1_card != cards["X1"] or channel.x2_card != cards["X2"]:
        raise ConfigurationError(
            f"channel input alphabet ({channel.x1_card},{channel.x2_card}) does not match "
            f"encoder outputs (X1,X2)=({cards['X1']},{cards['X2']})"
        )
    table = np.einsum(
        "q,qa,qc,qcax,qcau,qcav,quvw,xwyz->qacuvxwyz",
        aux.p_q, aux.p_u1p, aux.p_u1c, aux.p_x1, aux.p_u2c, aux.p_u2p, aux.p_x2,
        channel.table,
        optimize=True,
    )
    roster = VariableRoster(
        CANONICAL_ORDER,
        (
            cards["Q"], cards["U1p"], cards["U1c"], cards["U2c"], cards["U2p"],
            cards["X1"], cards["X2"], channel.y1_card, channel.y2_card,
        ),
    )
    joint = JointPmf(roster, table)
    problem = validate(joint)
    if problem is not None:
        raise ConfigurationError(f"composed joint invalid: {problem}")
    return joint
