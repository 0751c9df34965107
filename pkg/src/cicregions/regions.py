"""Rate-constraint systems for the cognitive interference channel.

Two variants of the achievable-region constraint set are built from a
composed joint pmf:

- ``dmt``:        the earlier bound set, whose right-hand sides omit
                  some cross-dependence mutual-information terms;
- ``corrected``:  the repaired set, which adds those terms so that every
                  bound matches the error exponent of the decoding event
                  it protects against.

Both consist of 16 tagged inequalities over the six split rates
(R1p, R1c, R2c, R2p, Rp2c, Rp2p) plus non-negativity bounds.  Rp2c and
Rp2p are the binning overheads of transmitter 2's codebooks: they do not
carry message payload, and the two tagged lower bounds (ids *.1 and *.2)
are the thresholds above which the encoder's bin search succeeds with
high probability.

Inequality ids are short stable tags ("2.1".."2.16" for dmt,
"3.1".."3.16" for corrected, matching suffixes describing the same
decoding event) so that gap reports and serialized systems can be
audited line by line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

from .errors import ConfigurationError, ConsistencyError
from .measures import MiQuery, cond_mutual_info, parse_mi_label
from .probability import JointPmf

LEQ = "<="
GEQ = ">="

RATE_VARS = ("R1p", "R1c", "R2c", "R2p", "Rp2c", "Rp2p")

# Numerical tolerance for derived-quantity identities (gaps, residuals).
DERIVED_TOL = 1e-9

SystemKind = Literal["dmt", "corrected"]


@dataclass(frozen=True)
class RateVector:
    """A full split-rate operating point, in bits per channel use."""

    r1p: float
    r1c: float
    r2c: float
    r2p: float
    rp2c: float
    rp2p: float

    def as_dict(self) -> dict[str, float]:
        return {
            "R1p": self.r1p, "R1c": self.r1c, "R2c": self.r2c,
            "R2p": self.r2p, "Rp2c": self.rp2c, "Rp2p": self.rp2p,
        }

    def as_tuple(self) -> tuple[float, ...]:
        return (self.r1p, self.r1c, self.r2c, self.r2p, self.rp2c, self.rp2p)

    @classmethod
    def from_sequence(cls, values) -> "RateVector":
        vals = [float(v) for v in values]
        if len(vals) != 6:
            raise ConfigurationError(
                f"rate vector needs 6 values (R1p,R1c,R2c,R2p,Rp2c,Rp2p), got {len(vals)}"
            )
        return cls(*vals)

    @property
    def r1(self) -> float:
        return self.r1p + self.r1c

    @property
    def r2(self) -> float:
        return self.r2p + self.r2c


@dataclass(frozen=True)
class LinearInequality:
    """One bound: sum(coeffs[v] * rate[v]) <sense> rhs.

    ``rhs_terms`` records the signed mutual-information terms whose sum
    produced ``rhs``, preserving auditability after serialization.
    """

    id: str
    coeffs: dict[str, float]
    sense: str
    rhs: float
    rhs_terms: tuple[tuple[int, MiQuery], ...] = field(default=())

    def __post_init__(self):
        if self.sense not in (LEQ, GEQ):
            raise ConfigurationError(f"inequality {self.id}: sense must be '<=' or '>='")
        unknown = set(self.coeffs) - set(RATE_VARS)
        if unknown:
            raise ConfigurationError(f"inequality {self.id}: unknown rate variable(s) {sorted(unknown)}")

    def lhs(self, rates: RateVector) -> float:
        values = rates.as_dict()
        return sum(c * values[v] for v, c in self.coeffs.items())

    def satisfied(self, rates: RateVector, tol: float = DERIVED_TOL) -> bool:
        lhs = self.lhs(rates)
        return lhs <= self.rhs + tol if self.sense == LEQ else lhs >= self.rhs - tol


@dataclass(frozen=True)
class ConstraintSystem:
    """All inequalities of one variant, tagged bounds plus non-negativity."""

    kind: str
    inequalities: tuple[LinearInequality, ...]

    def tagged(self) -> dict[str, LinearInequality]:
        """The 16 tagged bounds, keyed by id (non-negativity excluded)."""
        return {q.id: q for q in self.inequalities if not q.id.startswith("nonneg:")}

    def rhs(self, tag: str) -> float:
        for q in self.inequalities:
            if q.id == tag:
                return q.rhs
        raise ConfigurationError(f"no inequality tagged {tag!r} in {self.kind} system")

    def satisfied(self, rates: RateVector, tol: float = DERIVED_TOL) -> bool:
        return all(q.satisfied(rates, tol) for q in self.inequalities)

    def violations(self, rates: RateVector, tol: float = DERIVED_TOL) -> list[str]:
        return [q.id for q in self.inequalities if not q.satisfied(rates, tol)]


def _mi(left: str, right: str, given: str = "Q") -> MiQuery:
    """Shorthand: comma-separated variable groups, given defaults to Q."""
    return MiQuery(tuple(left.split(",")), tuple(right.split(",")), tuple(given.split(",")))


# The 16 tagged bounds.  Each entry: (suffix, sense, variables with +1
# coefficients, dmt rhs terms, extra corrected rhs terms).  Where the two
# variants state the same term with groups written in a different order,
# both spellings are kept so serialized systems stay faithful; the values
# are identical.
_EXTRA: dict[int, tuple[MiQuery, ...]] = {
    7: (_mi("U2c", "U1p"),),
    8: (_mi("U2c", "U1c"),),
    9: (_mi("U2c", "U1p,U1c"),),
    13: (_mi("U2p", "U2c"),),
    14: (_mi("U2p", "U1c"),),
    15: (_mi("U2c", "U1c"),),
    16: (_mi("U2p,U2c", "U1c"), _mi("U2p", "U2c")),
}

_BOUNDS: tuple[tuple[int, str, tuple[str, ...], tuple[MiQuery, ...], tuple[MiQuery, ...] | None], ...] = (
    (1, GEQ, ("Rp2c",), (_mi("U2c", "U1p,U1c"),), None),
    (2, GEQ, ("Rp2p",), (_mi("U2p", "U1p,U1c"),), None),
    (3, LEQ, ("R1p",), (_mi("Y1", "U1p", "U1c,U2c,Q"), _mi("U2c", "U1p", "U1c,Q")), None),
    (4, LEQ, ("R1c",), (_mi("Y1", "U1c", "U1p,U2c,Q"), _mi("U2c", "U1c", "U1p,Q")), None),
    (5, LEQ, ("R2c", "Rp2c"), (_mi("Y1", "U2c", "U1p,U1c,Q"), _mi("U1p,U1c", "U2c")), None),
    (6, LEQ, ("R1p", "R1c"), (_mi("Y1", "U1p,U1c", "U2c,Q"), _mi("U2c", "U1p,U1c")), None),
    (7, LEQ, ("R1p", "R2c", "Rp2c"),
     (_mi("Y1", "U1p,U2c", "U1c,Q"), _mi("U2c", "U1c", "U1p,Q")), None),
    (8, LEQ, ("R1c", "R2c", "Rp2c"),
     (_mi("Y1", "U1c,U2c", "U1p,Q"), _mi("U2c", "U1p", "U1c,Q")), None),
    (9, LEQ, ("R1p", "R1c", "R2c", "Rp2c"), (_mi("Y1", "U1p,U1c,U2c"),), None),
    (10, LEQ, ("R2p", "Rp2p"),
     (_mi("Y2", "U2p", "U1c,U2c,Q"), _mi("U1c,U2c", "U2p")),
     (_mi("Y2", "U2p", "U2c,U1c,Q"), _mi("U2c,U1c", "U2p"))),
    (11, LEQ, ("R2c", "Rp2c"),
     (_mi("Y2", "U2c", "U2p,U1c,Q"), _mi("U1c,U2p", "U2c")),
     (_mi("Y2", "U2c", "U2p,U1c,Q"), _mi("U2p,U1c", "U2c"))),
    (12, LEQ, ("R1c",), (_mi("Y2", "U1c", "U2p,U2c,Q"), _mi("U2p,U2c", "U1c")), None),
    (13, LEQ, ("R2p", "Rp2p", "R2c", "Rp2c"),
     (_mi("Y2", "U2p,U2c", "U1c,Q"), _mi("U1c", "U2p,U2c")), None),
    (14, LEQ, ("R2p", "Rp2p", "R1c"),
     (_mi("Y2", "U2p,U1c", "U2c,Q"), _mi("U2c", "U2p,U1c")), None),
    (15, LEQ, ("R2c", "Rp2c", "R1c"),
     (_mi("Y2", "U2c,U1c", "U2p,Q"), _mi("U2p", "U2c,U1c")), None),
    (16, LEQ, ("R2p", "Rp2p", "R2c", "Rp2c", "R1c"), (_mi("Y2", "U2p,U2c,U1c"),), None),
)

# Bounds whose corrected rhs gains extra terms; all others are unchanged.
CHANGED_SUFFIXES = frozenset(_EXTRA)
UNCHANGED_SUFFIXES = frozenset(range(1, 17)) - CHANGED_SUFFIXES


def build_system(kind: SystemKind, joint: JointPmf) -> ConstraintSystem:
    """Evaluate one constraint-system variant on a composed joint."""
    if kind not in ("dmt", "corrected"):
        raise ConfigurationError(f"unknown system kind {kind!r}; expected 'dmt' or 'corrected'")
    prefix = "2" if kind == "dmt" else "3"
    rows: list[LinearInequality] = []
    for suffix, sense, variables, dmt_terms, corr_terms in _BOUNDS:
        terms = list(dmt_terms if (kind == "dmt" or corr_terms is None) else corr_terms)
        if kind == "corrected":
            terms.extend(_EXTRA.get(suffix, ()))
        signed = tuple((+1, t) for t in terms)
        rhs = sum(sign * cond_mutual_info(joint, t) for sign, t in signed)
        rows.append(LinearInequality(
            id=f"{prefix}.{suffix}",
            coeffs={v: 1.0 for v in variables},
            sense=sense,
            rhs=float(rhs),
            rhs_terms=signed,
        ))
    for var in RATE_VARS:
        rows.append(LinearInequality(id=f"nonneg:{var}", coeffs={var: 1.0}, sense=GEQ, rhs=0.0))
    return ConstraintSystem(kind=kind, inequalities=tuple(rows))


def constraint_gap(dmt: ConstraintSystem, corrected: ConstraintSystem) -> dict[str, float]:
    """Per-bound rhs difference corrected - dmt, keyed by corrected id.

    Raises ConsistencyError when the systems clearly come from different
    joints (an unchanged bound differing beyond 1e-9) or when any gap is
    negative beyond rounding tolerance.
    """
    if dmt.kind != "dmt" or corrected.kind != "corrected":
        raise ConfigurationError(
            f"constraint_gap expects (dmt, corrected) systems, got ({dmt.kind}, {corrected.kind})"
        )
    gaps: dict[str, float] = {}
    for suffix in range(1, 17):
        d = dmt.rhs(f"2.{suffix}")
        c = corrected.rhs(f"3.{suffix}")
        gap = c - d
        if suffix in UNCHANGED_SUFFIXES and abs(gap) > DERIVED_TOL:
            raise ConsistencyError(
                f"bound {suffix} is identical in both variants but rhs differ by {gap:.3e}; "
                "the systems were built from different joints"
            )
        if gap < -DERIVED_TOL:
            raise ConsistencyError(
                f"corrected rhs of bound {suffix} is below the dmt rhs by {-gap:.3e}"
            )
        gaps[f"3.{suffix}"] = float(gap)
    return gaps


def added_term_value(joint: JointPmf, corrected_id: str) -> float:
    """Directly evaluate the extra term(s) a corrected bound gains."""
    suffix = int(corrected_id.split(".")[1])
    if suffix not in _EXTRA:
        return 0.0
    return float(sum(cond_mutual_info(joint, t) for t in _EXTRA[suffix]))


@dataclass(frozen=True)
class IdentityEntry:
    """One decoding-event exponent matched against its corrected bound."""

    event: str
    constraint_id: str
    exponent_terms: tuple[str, ...]
    exponent_bits: float
    bound_bits: float
    residual: float
    note: str | None = None


@dataclass(frozen=True)
class IdentityReport:
    entries: tuple[IdentityEntry, ...]
    max_residual: float
    all_ok: bool


# Decoding-event exponents, as derived from the scheme's union bound.
# Each event names which message indices the candidate has wrong; the
# exponent is what the probability of some wrong candidate passing the
# typicality test decays with.  Chain-rule algebra makes each exponent
# equal the rhs of one corrected bound; verifying the match numerically
# is a strong end-to-end check of the constraint transcription.
_EVENTS: tuple[tuple[str, tuple[MiQuery, ...], str, str | None], ...] = (
    ("rx1 wrong m1p,m2c", (_mi("Y1", "U1p,U2c", "U1c,Q"), _mi("U2c", "U1p,U1c")), "3.7", None),
    ("rx1 wrong m1c,m2c", (_mi("Y1", "U1c,U2c", "U1p,Q"), _mi("U2c", "U1p,U1c")), "3.8", None),
    ("rx1 wrong m1p,m1c,m2c", (_mi("Y1", "U1p,U1c,U2c"), _mi("U2c", "U1p,U1c")), "3.9", None),
    ("rx2 wrong m2p,m2c",
     (_mi("Y2", "U2p,U2c", "U1c,Q"), _mi("U2p", "U2c"), _mi("U2p,U2c", "U1c")), "3.13", None),
    ("rx2 wrong m2p,m1c",
     (_mi("Y2", "U2p,U1c", "U2c,Q"), _mi("U2p", "U1c"), _mi("U2c", "U2p,U1c")), "3.14", None),
    ("rx2 wrong m2c,m1c",
     (_mi("Y2", "U2c,U1c", "U2p,Q"), _mi("U2p", "U2c,U1c"), _mi("U2c", "U1c")), "3.15", None),
    ("rx2 wrong m2p,m2c,m1c",
     (_mi("Y2", "U2p,U2c,U1c"), _mi("U2p", "U2c"), _mi("U2p,U2c", "U1c")), "3.16",
     "matched to 3.16 by its term set; 3.9 (the receiver-1 sum-rate bound) lacks this "
     "event's I(U2p;U2c|Q) and I(U2p,U2c;U1c|Q) side terms"),
)


def exponent_identity_check(joint: JointPmf) -> IdentityReport:
    """Verify every decoding-event exponent equals its corrected bound.

    Exponent and bound are evaluated through different mutual-information
    decompositions, so agreement within 1e-9 exercises both the
    transcription of the bounds and the chain-rule consistency of the
    measure implementation.
    """
    corrected = build_system("corrected", joint)
    entries = []
    for event, terms, cid, note in _EVENTS:
        exponent = float(sum(cond_mutual_info(joint, t) for t in terms))
        bound = corrected.rhs(cid)
        entries.append(IdentityEntry(
            event=event,
            constraint_id=cid,
            exponent_terms=tuple(t.label() for t in terms),
            exponent_bits=exponent,
            bound_bits=bound,
            residual=abs(exponent - bound),
            note=note,
        ))
    max_residual = max(e.residual for e in entries)
    return IdentityReport(tuple(entries), max_residual, max_residual <= DERIVED_TOL)


def system_to_dict(system: ConstraintSystem) -> dict:
    """JSON-ready form of a constraint system."""
    return {
        "kind": system.kind,
        "rate_variables": list(RATE_VARS),
        "inequalities": [
            {
                "id": q.id,
                "coeffs": {v: q.coeffs[v] for v in RATE_VARS if v in q.coeffs},
                "sense": q.sense,
                "rhs": q.rhs,
                "rhs_terms": [t.label() for _, t in q.rhs_terms],
            }
            for q in system.inequalities
        ],
    }


def system_from_dict(doc: dict) -> ConstraintSystem:
    """Rebuild a constraint system from its serialized form.

    rhs values are taken verbatim from the document; term labels are
    parsed back into queries so the round trip preserves auditability.
    """
    try:
        kind = doc["kind"]
        rows = doc["inequalities"]
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"constraint-system document missing field: {exc}") from exc
    inequalities = []
    for row in rows:
        try:
            inequalities.append(LinearInequality(
                id=row["id"],
                coeffs={str(v): float(c) for v, c in row["coeffs"].items()},
                sense=row["sense"],
                rhs=float(row["rhs"]),
                rhs_terms=tuple((+1, parse_mi_label(s)) for s in row.get("rhs_terms", [])),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad inequality row {row!r}: {exc}") from exc
    return ConstraintSystem(kind=kind, inequalities=tuple(inequalities))
