"""Exact projection of the rate polytope onto the (R1, R2) plane.

The constraint systems live over six split rates.  Adding the coupling
equalities R1 = R1p + R1c and R2 = R2p + R2c (as inequality pairs) and
eliminating the six split variables by Fourier-Motzkin yields the set of
(R1, R2) pairs achievable by some splitting, binning overheads included.

Row blowup is kept in check after every elimination step by

- normalizing rows to max-abs coefficient 1 and merging near-duplicates
  (coefficient distance < 1e-12), keeping the tighter right-hand side;
- dropping rows whose derivation used more original rows than the number
  of eliminated variables plus one; such rows are always implied by the
  rest, so removing them never changes the projected set.

The systems handled here are bounded by construction: every rate is
non-negative and upper-bounded through the tagged constraints, so the
projection is a (possibly empty or degenerate) convex polygon.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CicError, ConfigurationError
from .regions import GEQ, LEQ, RATE_VARS, ConstraintSystem

FEASIBILITY_TOL = 1e-9
MERGE_TOL = 1e-12

PROJECTION_VARS = ("R1", "R2")
DEFAULT_ELIMINATION_ORDER = ("Rp2c", "Rp2p", "R1p", "R1c", "R2p", "R2c")


class PolytopeError(CicError):
    """Raised when a system violates the engine's structural assumptions."""


@dataclass(frozen=True)
class LinearSystem:
    """Rows A x <= b over named variables, with derivation bookkeeping.

    ``histories`` maps each row to the set of original row indices it was
    combined from; ``n_eliminated`` counts elimination steps so far.  A
    contradictory row with no variables left (0 <= b, b < 0) marks the
    whole system infeasible.
    """

    names: tuple[str, ...]
    lhs: np.ndarray
    rhs: np.ndarray
    histories: tuple[frozenset[int], ...] = field(default=())
    n_eliminated: int = 0
    infeasible: bool = False

    def __post_init__(self):
        lhs = np.atleast_2d(np.asarray(self.lhs, dtype=float))
        rhs = np.asarray(self.rhs, dtype=float).ravel()
        if lhs.size == 0:
            lhs = lhs.reshape(0, len(self.names))
        if lhs.shape[1] != len(self.names) or lhs.shape[0] != rhs.shape[0]:
            raise ConfigurationError(
                f"system shape mismatch: lhs {lhs.shape}, rhs {rhs.shape}, names {len(self.names)}"
            )
        object.__setattr__(self, "lhs", lhs)
        object.__setattr__(self, "rhs", rhs)
        if not self.histories:
            object.__setattr__(self, "histories", tuple(frozenset([i]) for i in range(lhs.shape[0])))
        elif len(self.histories) != lhs.shape[0]:
            raise ConfigurationError("histories length does not match row count")

    @property
    def n_rows(self) -> int:
        return int(self.lhs.shape[0])

    def margin(self, point) -> float:
        """Largest signed distance of the point beyond any row (<=0 inside).

        Rows are scaled to unit normals, so the value is a distance for
        the worst constraint; rows with zero normal are skipped.
        """
        if self.infeasible:
            return float("inf")
        pt = np.asarray(point, dtype=float)
        norms = np.linalg.norm(self.lhs, axis=1)
        keep = norms > MERGE_TOL
        if not np.any(keep):
            return float("-inf")
        slack = (self.lhs[keep] @ pt - self.rhs[keep]) / norms[keep]
        return float(slack.max())

    def contains(self, point, tol: float = FEASIBILITY_TOL) -> bool:
        return self.margin(point) <= tol


def _pruned(names, lhs, rhs, histories, n_eliminated) -> LinearSystem:
    """Normalize, drop trivial rows, merge duplicates, apply the history cap."""
    max_hist = n_eliminated + 1
    scale = np.abs(lhs).max(axis=1) if lhs.shape[1] else np.zeros(lhs.shape[0])
    infeasible = False
    keep_rows: dict[tuple, tuple[float, frozenset[int]]] = {}
    for i in range(lhs.shape[0]):
        if scale[i] <= MERGE_TOL:
            # 0 <= b: vacuous when b is non-negative, contradictory otherwise.
            if rhs[i] < -FEASIBILITY_TOL:
                infeasible = True
            continue
        if len(histories[i]) > max_hist:
            continue
        coeffs = lhs[i] / scale[i]
        bound = rhs[i] / scale[i]
        key = tuple(np.round(coeffs / MERGE_TOL) * MERGE_TOL)
        old = keep_rows.get(key)
        if old is None or bound < old[0] - MERGE_TOL:
            keep_rows[key] = (bound, histories[i])
        elif abs(bound - old[0]) <= MERGE_TOL and len(histories[i]) < len(old[1]):
            keep_rows[key] = (old[0], histories[i])
    if keep_rows:
        new_lhs = np.array([list(k) for k in keep_rows], dtype=float)
        new_rhs = np.array([v[0] for v in keep_rows.values()], dtype=float)
        new_hist = tuple(v[1] for v in keep_rows.values())
    else:
        new_lhs = np.zeros((0, len(names)))
        new_rhs = np.zeros(0)
        new_hist = ()
    return LinearSystem(names, new_lhs, new_rhs, new_hist, n_eliminated, infeasible)


def fm_eliminate(system: LinearSystem, var: str) -> LinearSystem:
    """Project out one variable by pairing its upper and lower rows."""
    if var not in system.names:
        raise ConfigurationError(f"cannot eliminate {var!r}; system has {system.names}")
    if system.infeasible:
        names = tuple(n for n in system.names if n != var)
        return LinearSystem(names, np.zeros((0, len(names))), np.zeros(0), (),
                            system.n_eliminated + 1, True)
    j = system.names.index(var)
    col = system.lhs[:, j]
    rest = np.delete(system.lhs, j, axis=1)
    names = tuple(n for n in system.names if n != var)
    pos = col > MERGE_TOL
    neg = col < -MERGE_TOL
    zero = ~(pos | neg)

    rows = [rest[zero]]
    rhs = [system.rhs[zero]]
    hists: list[frozenset[int]] = [system.histories[i] for i in np.nonzero(zero)[0]]
    if pos.any() and neg.any():
        up_rows = rest[pos] / col[pos, None]
        up_rhs = system.rhs[pos] / col[pos]
        lo_rows = rest[neg] / (-col[neg, None])
        lo_rhs = system.rhs[neg] / (-col[neg])
        combo = (up_rows[:, None, :] + lo_rows[None, :, :]).reshape(
            len(up_rows) * len(lo_rows), rest.shape[1])
        combo_rhs = (up_rhs[:, None] + lo_rhs[None, :]).ravel()
        rows.append(combo)
        rhs.append(combo_rhs)
        pos_hist = [system.histories[i] for i in np.nonzero(pos)[0]]
        neg_hist = [system.histories[i] for i in np.nonzero(neg)[0]]
        hists.extend(hp | hn for hp in pos_hist for hn in neg_hist)
    lhs_all = np.concatenate(rows, axis=0) if rows else np.zeros((0, len(names)))
    rhs_all = np.concatenate(rhs, axis=0) if rhs else np.zeros(0)
    return _pruned(names, lhs_all, rhs_all, tuple(hists), system.n_eliminated + 1)


def eliminate_many(system: LinearSystem, order) -> LinearSystem:
    for var in order:
        system = fm_eliminate(system, var)
    return system


def rate_halfplanes(system: ConstraintSystem) -> LinearSystem:
    """All-LEQ system over the six split rates plus coupled R1, R2."""
    names = RATE_VARS + PROJECTION_VARS
    index = {n: i for i, n in enumerate(names)}
    rows, rhs = [], []
    for q in system.inequalities:
        row = np.zeros(len(names))
        for v, c in q.coeffs.items():
            row[index[v]] = c
        if q.sense == LEQ:
            rows.append(row)
            rhs.append(q.rhs)
        elif q.sense == GEQ:
            rows.append(-row)
            rhs.append(-q.rhs)
        else:  # pragma: no cover - LinearInequality enforces the sense
            raise ConfigurationError(f"inequality {q.id} has unsupported sense {q.sense!r}")
    for total, parts in (("R1", ("R1p", "R1c")), ("R2", ("R2p", "R2c"))):
        row = np.zeros(len(names))
        row[index[total]] = 1.0
        for p in parts:
            row[index[p]] = -1.0
        rows.append(row.copy())
        rhs.append(0.0)
        rows.append(-row)
        rhs.append(0.0)
    return LinearSystem(names, np.array(rows), np.array(rhs))


def project_system(system: ConstraintSystem,
                   order: tuple[str, ...] = DEFAULT_ELIMINATION_ORDER) -> LinearSystem:
    """Eliminate the six split rates, leaving half-planes over (R1, R2)."""
    full = rate_halfplanes(system)
    reduced = eliminate_many(full, order)
    if reduced.names != PROJECTION_VARS:
        raise PolytopeError(f"projection left unexpected variables {reduced.names}")
    return reduced


@dataclass(frozen=True)
class Polygon2D:
    """A convex region in the (R1, R2) plane.

    Vertices are ordered counter-clockwise with no repeated or interior
    collinear points.  Zero, one, or two vertices encode the empty set,
    a single achievable point, and a segment respectively.
    """

    vertices: tuple[tuple[float, float], ...]

    @property
    def is_empty(self) -> bool:
        return len(self.vertices) == 0

    @property
    def area(self) -> float:
        v = self.vertices
        if len(v) < 3:
            return 0.0
        arr = np.asarray(v)
        x, y = arr[:, 0], arr[:, 1]
        return float(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def contains_point(self, point, tol: float = FEASIBILITY_TOL) -> bool:
        v = self.vertices
        pt = np.asarray(point, dtype=float)
        if len(v) == 0:
            return False
        if len(v) == 1:
            return bool(np.linalg.norm(pt - np.asarray(v[0])) <= tol)
        if len(v) == 2:
            return _segment_distance(np.asarray(v[0]), np.asarray(v[1]), pt) <= tol
        arr = np.asarray(v)
        nxt = np.roll(arr, -1, axis=0)
        edges = nxt - arr
        lengths = np.linalg.norm(edges, axis=1)
        cross = edges[:, 0] * (pt[1] - arr[:, 1]) - edges[:, 1] * (pt[0] - arr[:, 0])
        return bool(np.all(cross >= -tol * lengths))

    def to_dict(self) -> dict:
        return {"vertices": [[float(a), float(b)] for a, b in self.vertices]}

    def to_csv(self) -> str:
        lines = ["r1,r2"]
        lines.extend(f"{a!r},{b!r}" for a, b in self.vertices)
        return "\n".join(lines) + "\n"


def _segment_distance(a: np.ndarray, b: np.ndarray, p: np.ndarray) -> float:
    d = b - a
    denom = float(d @ d)
    if denom <= MERGE_TOL:
        return float(np.linalg.norm(p - a))
    t = float(np.clip((p - a) @ d / denom, 0.0, 1.0))
    return float(np.linalg.norm(p - (a + t * d)))


def polygon_from_halfplanes(system: LinearSystem) -> Polygon2D:
    """Enumerate the vertices of a bounded 2D half-plane intersection.

    Pairwise boundary intersections are filtered by feasibility against
    every row, deduplicated, ordered counter-clockwise around the
    centroid (by angle, then radius), and stripped of collinear interior
    points.  An empty result means the feasible set is empty, which is
    legal; an unbounded input violates the engine's contract and raises.
    """
    if len(system.names) != 2:
        raise ConfigurationError(f"vertex enumeration needs a 2-variable system, got {system.names}")
    if system.infeasible:
        return Polygon2D(())
    lhs, rhs = system.lhs, system.rhs
    norms = np.abs(lhs).max(axis=1)
    keep = norms > MERGE_TOL
    lhs, rhs = lhs[keep] / norms[keep, None], rhs[keep] / norms[keep]
    m = lhs.shape[0]
    if m < 2:
        raise PolytopeError("half-plane set cannot be bounded with fewer than two rows")
    pts = []
    for i in range(m):
        for j in range(i + 1, m):
            det = lhs[i, 0] * lhs[j, 1] - lhs[i, 1] * lhs[j, 0]
            if abs(det) <= MERGE_TOL:
                continue
            x = (rhs[i] * lhs[j, 1] - rhs[j] * lhs[i, 1]) / det
            y = (lhs[i, 0] * rhs[j] - lhs[j, 0] * rhs[i]) / det
            pts.append((x, y))
    if not pts:
        return Polygon2D(())
    cand = np.asarray(pts)
    if np.abs(cand).max() > 1e9:
        raise PolytopeError("intersection points explode; the system looks unbounded")
    row_norms = np.linalg.norm(lhs, axis=1)
    feas = np.all(lhs @ cand.T - rhs[:, None] <= FEASIBILITY_TOL * row_norms[:, None], axis=0)
    cand = cand[feas]
    if cand.shape[0] == 0:
        return Polygon2D(())

    unique: list[np.ndarray] = []
    for p in cand:
        if not any(np.linalg.norm(p - u) <= FEASIBILITY_TOL for u in unique):
            unique.append(p)
    if len(unique) == 1:
        return Polygon2D(((float(unique[0][0]) + 0.0, float(unique[0][1]) + 0.0),))
    arr = np.asarray(unique)
    centroid = arr.mean(axis=0)
    rel = arr - centroid
    angles = np.arctan2(rel[:, 1], rel[:, 0])
    radii = np.linalg.norm(rel, axis=1)
    order = np.lexsort((radii, angles))
    arr = arr[order]
    if len(arr) > 2:
        arr = _drop_collinear(arr)
    if len(arr) == 2 and np.linalg.norm(arr[0] - arr[1]) <= FEASIBILITY_TOL:
        arr = arr[:1]
    # adding 0.0 folds IEEE negative zeros into plain zeros for stable output
    return Polygon2D(tuple((float(a) + 0.0, float(b) + 0.0) for a, b in arr))


def _drop_collinear(arr: np.ndarray) -> np.ndarray:
    """Remove vertices whose neighbours already span them (cyclically)."""
    pts = [p for p in arr]
    changed = True
    while changed and len(pts) > 2:
        changed = False
        for i in range(len(pts)):
            prev_p = pts[i - 1]
            cur = pts[i]
            nxt = pts[(i + 1) % len(pts)]
            cross = (cur[0] - prev_p[0]) * (nxt[1] - prev_p[1]) - (cur[1] - prev_p[1]) * (nxt[0] - prev_p[0])
            if abs(cross) <= FEASIBILITY_TOL:
                pts.pop(i)
                changed = True
                break
    return np.asarray(pts)


def project_region(system: ConstraintSystem,
                   order: tuple[str, ...] = DEFAULT_ELIMINATION_ORDER) -> Polygon2D:
    """The achievable (R1, R2) polygon of one constraint system."""
    return polygon_from_halfplanes(project_system(system, order))


def polygon_contains(outer: Polygon2D, inner: Polygon2D, tol: float = FEASIBILITY_TOL) -> bool:
    """True when every vertex of ``inner`` lies in ``outer`` (within tol).

    Both polygons being convex, vertex containment is containment.  An
    empty inner region is trivially contained.
    """
    return all(outer.contains_point(v, tol) for v in inner.vertices)


@dataclass(frozen=True)
class ProjectionTrace:
    """Intermediate systems recorded during elimination, for witnesses."""

    steps: tuple[tuple[str, LinearSystem], ...]
    final: LinearSystem


def project_with_trace(system: ConstraintSystem,
                       order: tuple[str, ...] = DEFAULT_ELIMINATION_ORDER) -> ProjectionTrace:
    current = rate_halfplanes(system)
    steps = []
    for var in order:
        steps.append((var, current))
        current = fm_eliminate(current, var)
    return ProjectionTrace(tuple(steps), current)


def reconstruct_witness(trace: ProjectionTrace, point: dict[str, float],
                        fractions: dict[str, float] | None = None) -> dict[str, float] | None:
    """Back-substitute a projected point into the eliminated variables.

    Walking the eliminations in reverse, each variable's feasible
    interval given the already-fixed ones is computed from the system
    it was eliminated from; the value is placed at ``fractions[var]``
    of the way from the lower to the upper end (default midpoint).
    Returns None when the point is not actually in the projection.
    """
    assignment = dict(point)
    fractions = fractions or {}
    for var, sys_before in reversed(trace.steps):
        j = sys_before.names.index(var)
        col = sys_before.lhs[:, j]
        lo, hi = -np.inf, np.inf
        for i in range(sys_before.n_rows):
            if abs(col[i]) <= MERGE_TOL:
                continue
            rest = sum(
                sys_before.lhs[i, k] * assignment[name]
                for k, name in enumerate(sys_before.names) if name != var
            )
            bound = (sys_before.rhs[i] - rest) / col[i]
            if col[i] > 0:
                hi = min(hi, bound)
            else:
                lo = max(lo, bound)
        if lo > hi + FEASIBILITY_TOL:
            return None
        if not np.isfinite(lo) and not np.isfinite(hi):
            value = 0.0
        elif not np.isfinite(hi):
            value = lo
        elif not np.isfinite(lo):
            value = hi
        else:
            frac = float(np.clip(fractions.get(var, 0.5), 0.0, 1.0))
            value = lo + frac * (hi - lo)
        assignment[var] = float(min(max(value, lo if np.isfinite(lo) else value),
                                    hi if np.isfinite(hi) else value))
    return assignment
