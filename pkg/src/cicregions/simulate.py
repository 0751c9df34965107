"""Desk-scale Monte Carlo check of the layered random-coding scheme.

Each trial builds fresh codebooks, runs both encoders and the channel,
and feeds both decoders.  Every random object has its own counter-based
substream so results are reproducible element-for-element regardless of
batching or worker count:

    default_rng([master_seed, trial, tag])        tag 0 time-sharing seq
                                                  tag 1 u1c codebook
                                                  tag 2 u1p codebook
                                                  tag 5 message draw
                                                  tag 6 channel-input sampling
                                                  tag 7 channel noise
    default_rng([master_seed, trial, tag, bin])   tag 3 u2c bin, tag 4 u2p bin

Codeword tables are drawn row-major (one codeword per row) so widening a
table or lengthening a bin extends the previous draw instead of
reshuffling it; bin searches therefore behave monotonically in the bin
size for a fixed seed.  Rows are sampled per symbol by inverse CDF along
columns, except that binary alphabets whose conditional law is uniform
to within 1e-12 are drawn as packed 64-bit words (one bit per symbol),
which is what makes million-row bins affordable.

Typicality is multiplicative: a tuple of sequences is typical when every
joint-symbol count sits within (1 +- eps) of its expectation and symbols
of zero probability never occur.  Decoders exploit that any sub-tuple of
a typical tuple is itself typical, so cheap single-sequence sieves
against the received word cut the candidate lists long before the exact
full-tuple test runs; the final test is always the full joint law, which
keeps the cascade's output identical to brute force.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, GuardError
from .probability import AuxFactorization, ChannelSpec, JointPmf, compose, marginalize
from .regions import RateVector

logger = logging.getLogger("cicregions.simulate")

TABLE_CAP_BITS = 23.0
SWEEP_CAP_BITS = 28.0
BAND_SLACK = 1e-9
UNIFORM_TOL = 1e-12

_COUNT_CHUNK = 1 << 16
_WORD_CHUNK = 1 << 20
_SWEEP_CHUNK = 8192
_STAGE_CAP = 5_000_000

_TAG_Q = 0
_TAG_U1C = 1
_TAG_U1P = 2
_TAG_U2C = 3
_TAG_U2P = 4
_TAG_MSG = 5
_TAG_ENC = 6
_TAG_CHAN = 7

_POP8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)


def _popcount(words: np.ndarray) -> np.ndarray:
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(words).astype(np.int64)
    flat = np.ascontiguousarray(words).view(np.uint8)
    return _POP8[flat].reshape(words.shape + (8,)).sum(axis=-1, dtype=np.int64)


def _trial_rng(master_seed: int, trial: int, tag: int, bin_index: int | None = None):
    key = [master_seed, trial, tag]
    if bin_index is not None:
        key.append(bin_index)
    return np.random.default_rng(key)


def message_count(n: int, rate: float) -> int:
    """Number of indices carrying ``rate`` bits per symbol over n symbols."""
    return max(1, math.ceil(2.0 ** (n * rate) - 1e-9))


@dataclass(frozen=True)
class SimConfig:
    """One simulation setting: blocklength, rate split, typicality slack."""

    n: int
    rates: RateVector
    eps_typ: float
    trials: int
    master_seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError(f"blocklength must be positive, got {self.n}")
        if self.eps_typ <= 0:
            raise ConfigurationError(f"eps_typ must be positive, got {self.eps_typ}")
        if self.trials < 1:
            raise ConfigurationError(f"trials must be positive, got {self.trials}")
        bad = [k for k, v in self.rates.as_dict().items() if v < 0]
        if bad:
            raise ConfigurationError(f"negative rate for {bad[0]}")
        budgets = self.table_budgets()
        over = {k: v for k, v in budgets.items() if v > TABLE_CAP_BITS}
        if over:
            raise GuardError(
                "codebook table exceeds the desk-scale cap of "
                f"{TABLE_CAP_BITS} bits: " + ", ".join(f"{k}={v:.2f}" for k, v in over.items()),
                budgets={**budgets, "cap_bits": TABLE_CAP_BITS},
            )

    def table_budgets(self) -> dict[str, float]:
        """log2 of each codebook table's row count.

        The decoders' work and memory scale with the four tables, not
        with the product search space, because the sieve cascade only
        ever scans one table at a time against a fixed context.
        """
        r = self.rates
        return {
            "u1p_bits": self.n * r.r1p,
            "u1c_bits": self.n * r.r1c,
            "u2c_bits": self.n * (r.r2c + r.rp2c),
            "u2p_bits": self.n * (r.r2p + r.rp2p),
        }

    def sizes(self) -> dict[str, int]:
        r = self.rates
        return {
            "m1p": message_count(self.n, r.r1p),
            "m1c": message_count(self.n, r.r1c),
            "m2c": message_count(self.n, r.r2c),
            "m2p": message_count(self.n, r.r2p),
            "l2c": message_count(self.n, r.rp2c),
            "l2p": message_count(self.n, r.rp2p),
        }


# --------------------------------------------------------------------------
# typicality kernels


def _joint_code(seqs, cards) -> np.ndarray:
    code = np.zeros(len(seqs[0]), dtype=np.int64)
    for s, card in zip(seqs, cards):
        code = code * card + np.asarray(s, dtype=np.int64)
    return code


def _bands(pmf_flat: np.ndarray, n: int, eps: float):
    lo = np.where(pmf_flat > 0.0, n * pmf_flat * (1.0 - eps), 0.0)
    np.maximum(lo, 0.0, out=lo)
    hi = np.where(pmf_flat > 0.0, n * pmf_flat * (1.0 + eps), 0.0)
    return lo - BAND_SLACK, hi + BAND_SLACK


def _count_sieve(rows: np.ndarray, ctx_code: np.ndarray, n_classes: int,
                 pmf2: np.ndarray, n: int, eps: float) -> np.ndarray:
    """Exact band test for int8 candidate rows against p[class, symbol]."""
    card = pmf2.shape[1]
    lo, hi = _bands(pmf2.reshape(-1), n, eps)
    n_cells = n_classes * card
    out = np.zeros(rows.shape[0], dtype=bool)
    base = ctx_code * card
    for start in range(0, rows.shape[0], _COUNT_CHUNK):
        block = rows[start:start + _COUNT_CHUNK]
        cells = base[None, :] + block.astype(np.int64)
        offsets = np.arange(block.shape[0], dtype=np.int64)[:, None] * n_cells
        counts = np.bincount((cells + offsets).ravel(),
                             minlength=block.shape[0] * n_cells)
        counts = counts.reshape(block.shape[0], n_cells)
        out[start:start + _COUNT_CHUNK] = np.all((counts >= lo) & (counts <= hi), axis=1)
    return out


def _class_masks(ctx_code: np.ndarray, n_classes: int) -> np.ndarray:
    bits = np.uint64(1) << np.arange(len(ctx_code), dtype=np.uint64)
    masks = np.zeros(n_classes, dtype=np.uint64)
    np.bitwise_or.at(masks, ctx_code, bits)
    return masks


def _word_windows(ctx_code: np.ndarray, n_classes: int, pmf2: np.ndarray,
                  n: int, eps: float):
    """Per-class admissible popcount windows for a packed binary candidate.

    Combines the band on the (class, 1) cell with the complementary band
    on (class, 0); an empty window anywhere means nothing can pass.
    """
    sizes = np.bincount(ctx_code, minlength=n_classes).astype(np.float64)
    lo, hi = _bands(pmf2.reshape(-1), n, eps)
    lo = lo.reshape(n_classes, 2)
    hi = hi.reshape(n_classes, 2)
    wlo = np.maximum(lo[:, 1], sizes - hi[:, 0])
    whi = np.minimum(hi[:, 1], sizes - lo[:, 0])
    if np.any(wlo > whi):
        return None
    return _class_masks(ctx_code, n_classes), wlo, whi


def _word_sieve(words: np.ndarray, masks: np.ndarray, wlo: np.ndarray,
                whi: np.ndarray) -> np.ndarray:
    out = np.zeros(words.shape[0], dtype=bool)
    for start in range(0, words.shape[0], _WORD_CHUNK):
        block = words[start:start + _WORD_CHUNK]
        pops = _popcount(block[:, None] & masks[None, :])
        out[start:start + _WORD_CHUNK] = np.all((pops >= wlo) & (pops <= whi), axis=1)
    return out


@dataclass(frozen=True)
class SeqBank:
    """Codeword table stored either packed (one uint64 per row) or as rows."""

    card: int
    n: int
    words: np.ndarray | None = None
    rows: np.ndarray | None = None

    @property
    def n_rows(self) -> int:
        return len(self.words) if self.words is not None else len(self.rows)

    def row(self, idx: int) -> np.ndarray:
        return self.rows_at(np.array([idx]))[0]

    def rows_at(self, idx: np.ndarray) -> np.ndarray:
        if self.rows is not None:
            return self.rows[idx]
        shifts = np.arange(self.n, dtype=np.uint64)
        return ((self.words[idx, None] >> shifts[None, :]) & np.uint64(1)).astype(np.int8)


def sieve_bank(bank: SeqBank, ctx_code: np.ndarray, n_classes: int,
               pmf2: np.ndarray, n: int, eps: float,
               restrict: np.ndarray | None = None) -> np.ndarray:
    """Absolute indices of bank rows typical with the coded context."""
    if restrict is None:
        restrict = np.arange(bank.n_rows)
    elif len(restrict) == 0:
        return restrict
    if bank.words is not None:
        win = _word_windows(ctx_code, n_classes, pmf2, n, eps)
        if win is None:
            return np.zeros(0, dtype=np.int64)
        ok = _word_sieve(bank.words[restrict], *win)
    else:
        ok = _count_sieve(bank.rows[restrict], ctx_code, n_classes, pmf2, n, eps)
    return restrict[ok]


def is_typical(seqs: dict[str, np.ndarray], joint: JointPmf, names: tuple[str, ...],
               eps: float) -> bool:
    """Direct multiplicative-typicality test of one tuple of sequences."""
    marg = marginalize(joint, names)
    order = [marg.roster.names.index(x) for x in names]
    table = np.transpose(marg.probs, order)
    cards = [joint.roster.card(x) for x in names]
    n = len(seqs[names[0]])
    if len(names) == 1:
        code = np.zeros(n, dtype=np.int64)
    else:
        code = _joint_code([seqs[x] for x in names[:-1]], cards[:-1])
    pmf2 = table.reshape(-1, cards[-1])
    rows = np.asarray(seqs[names[-1]], dtype=np.int8)[None, :]
    return bool(_count_sieve(rows, code, pmf2.shape[0], pmf2, n, eps)[0])


# --------------------------------------------------------------------------
# sampling


def _sample_rows(prob_rows: np.ndarray, draws: np.ndarray) -> np.ndarray:
    """Inverse-CDF sample, one categorical row per draw."""
    cum = np.cumsum(prob_rows, axis=1)
    idx = (draws[:, None] >= cum).sum(axis=1)
    return np.minimum(idx, prob_rows.shape[1] - 1).astype(np.int8)


def _uniform_binary(cond: np.ndarray) -> bool:
    """Whether every conditional row is the fair coin, to within 1e-12."""
    if cond.shape[-1] != 2:
        return False
    return bool(np.all(np.abs(cond - 0.5) <= UNIFORM_TOL))


def _gen_bank(rng, rows: int, q_seq: np.ndarray, cond: np.ndarray) -> SeqBank:
    """Draw ``rows`` codewords, symbol t conditioned on q_t.

    Fair binary alphabets go through the packed-word generator; all other
    laws take the column-wise inverse-CDF path.  Both draw row-major, so
    a longer table extends a shorter one drawn from the same stream.
    """
    n = len(q_seq)
    card = cond.shape[-1]
    if n <= 64 and _uniform_binary(cond):
        words = rng.integers(0, 2 ** 64, size=rows, dtype=np.uint64)
        if n < 64:
            words &= np.uint64((1 << n) - 1)
        return SeqBank(card=2, n=n, words=words)
    draws = rng.random((rows, n))
    out = np.empty((rows, n), dtype=np.int8)
    cum = np.cumsum(cond, axis=-1)
    for t in range(n):
        col = np.searchsorted(cum[q_seq[t]], draws[:, t], side="right")
        out[:, t] = np.minimum(col, card - 1)
    return SeqBank(card=card, n=n, rows=out)


# --------------------------------------------------------------------------
# per-instance context


class SimContext:
    """Composed law plus the aligned marginals and CDF tables trials reuse."""

    def __init__(self, channel: ChannelSpec, aux: AuxFactorization):
        self.channel = channel
        self.aux = aux
        self.joint = compose(channel, aux)
        self.cards = {name: self.joint.roster.card(name) for name in self.joint.roster.names}
        self._aligned: dict[tuple, tuple[np.ndarray, int]] = {}
        self.u2c_cond = aux.u2c_marginal()
        self.u2p_cond = aux.u2p_marginal()

    def aligned(self, ctx_names: tuple[str, ...], cand: str):
        """p[class, candidate] with the class axes coded in ctx order."""
        key = (ctx_names, cand)
        if key not in self._aligned:
            keep = ctx_names + (cand,)
            marg = marginalize(self.joint, keep)
            order = [marg.roster.names.index(x) for x in keep]
            table = np.transpose(marg.probs, order)
            card = self.cards[cand]
            self._aligned[key] = (np.ascontiguousarray(table.reshape(-1, card)),
                                  table.size // card)
        return self._aligned[key]

    def code_ctx(self, ctx_names: tuple[str, ...], seqs: dict[str, np.ndarray]) -> np.ndarray:
        return _joint_code([seqs[x] for x in ctx_names], [self.cards[x] for x in ctx_names])


# --------------------------------------------------------------------------
# one trial


@dataclass
class TrialOutcome:
    binning_failed_c: bool
    binning_failed_p: bool
    dec1_error: bool
    dec2_error: bool

    @property
    def overall_error(self) -> bool:
        return (self.binning_failed_c or self.binning_failed_p
                or self.dec1_error or self.dec2_error)


@dataclass(frozen=True)
class TrialCodebooks:
    q: np.ndarray
    u1p: SeqBank
    u1c: SeqBank
    u2c: SeqBank  # row index = bin * l2c + candidate
    u2p: SeqBank
    sizes: dict[str, int]


def _concat_banks(parts: list[SeqBank]) -> SeqBank:
    first = parts[0]
    if first.words is not None:
        return SeqBank(first.card, first.n, words=np.concatenate([p.words for p in parts]))
    return SeqBank(first.card, first.n, rows=np.concatenate([p.rows for p in parts]))


def build_codebooks(ctx: SimContext, config: SimConfig, trial: int) -> TrialCodebooks:
    n = config.n
    sizes = config.sizes()
    rng_q = _trial_rng(config.master_seed, trial, _TAG_Q)
    cum_q = np.cumsum(ctx.aux.p_q)
    q_seq = np.minimum(np.searchsorted(cum_q, rng_q.random(n), side="right"),
                       ctx.cards["Q"] - 1).astype(np.int8)
    u1c = _gen_bank(_trial_rng(config.master_seed, trial, _TAG_U1C),
                    sizes["m1c"], q_seq, ctx.aux.p_u1c)
    u1p = _gen_bank(_trial_rng(config.master_seed, trial, _TAG_U1P),
                    sizes["m1p"], q_seq, ctx.aux.p_u1p)
    u2c = _concat_banks([
        _gen_bank(_trial_rng(config.master_seed, trial, _TAG_U2C, k),
                  sizes["l2c"], q_seq, ctx.u2c_cond)
        for k in range(sizes["m2c"])
    ])
    u2p = _concat_banks([
        _gen_bank(_trial_rng(config.master_seed, trial, _TAG_U2P, k),
                  sizes["l2p"], q_seq, ctx.u2p_cond)
        for k in range(sizes["m2p"])
    ])
    return TrialCodebooks(q_seq, u1p, u1c, u2c, u2p, sizes)


@dataclass(frozen=True)
class EncodeOutcome:
    l2c: int
    l2p: int
    binning_failed_c: bool
    binning_failed_p: bool
    x1: np.ndarray
    x2: np.ndarray


def _first_typical(bank: SeqBank, lo: int, hi: int, ctx_code, n_classes, pmf2,
                   n, eps) -> int | None:
    hits = sieve_bank(bank, ctx_code, n_classes, pmf2, n, eps,
                      restrict=np.arange(lo, hi))
    return int(hits[0]) if len(hits) else None


def encode(ctx: SimContext, books: TrialCodebooks, messages: dict[str, int],
           config: SimConfig, trial: int) -> EncodeOutcome:
    """Bin search for both layered inputs, then per-symbol channel inputs.

    Each bin is scanned in index order and the first candidate jointly
    typical with (q, u1p, u1c) wins; a dry bin falls back to index 0 and
    is reported, since the trial is already counted as a binning error.
    """
    n, eps = config.n, config.eps_typ
    seqs = {
        "Q": books.q,
        "U1p": books.u1p.row(messages["m1p"]),
        "U1c": books.u1c.row(messages["m1c"]),
    }
    ctx_names = ("Q", "U1p", "U1c")
    code = ctx.code_ctx(ctx_names, seqs)

    pmf_c, classes_c = ctx.aligned(ctx_names, "U2c")
    lo = messages["m2c"] * books.sizes["l2c"]
    hit_c = _first_typical(books.u2c, lo, lo + books.sizes["l2c"],
                           code, classes_c, pmf_c, n, eps)
    pmf_p, classes_p = ctx.aligned(ctx_names, "U2p")
    lo_p = messages["m2p"] * books.sizes["l2p"]
    hit_p = _first_typical(books.u2p, lo_p, lo_p + books.sizes["l2p"],
                           code, classes_p, pmf_p, n, eps)

    l2c = hit_c if hit_c is not None else lo
    l2p = hit_p if hit_p is not None else lo_p
    u2c_seq = books.u2c.row(l2c)
    u2p_seq = books.u2p.row(l2p)

    rng = _trial_rng(config.master_seed, trial, _TAG_ENC)
    p_x1 = ctx.aux.p_x1[books.q, seqs["U1c"], seqs["U1p"]]
    x1 = _sample_rows(p_x1, rng.random(n))
    p_x2 = ctx.aux.p_x2[books.q, u2c_seq, u2p_seq]
    x2 = _sample_rows(p_x2, rng.random(n))
    return EncodeOutcome(l2c, l2p, hit_c is None, hit_p is None, x1, x2)


def transmit(ctx: SimContext, x1: np.ndarray, x2: np.ndarray, config: SimConfig,
             trial: int) -> tuple[np.ndarray, np.ndarray]:
    cy1 = ctx.cards["Y1"]
    cy2 = ctx.cards["Y2"]
    rows = ctx.channel.table[x1, x2].reshape(len(x1), cy1 * cy2)
    rng = _trial_rng(config.master_seed, trial, _TAG_CHAN)
    flat = _sample_rows(rows, rng.random(len(x1))).astype(np.int64)
    return (flat // cy2).astype(np.int8), (flat % cy2).astype(np.int8)


def _pairs_cap(a: int, b: int):
    if a * b > _STAGE_CAP:
        raise GuardError(
            f"decoder stage would enumerate {a * b} pairs; the instance is "
            "outside the desk-scale envelope",
            budgets={"pairs": a * b, "cap": _STAGE_CAP},
        )


def decode_rx1(ctx: SimContext, books: TrialCodebooks, y1: np.ndarray,
               eps: float) -> set[tuple[int, int, int]]:
    """All (m1p, m1c, m2c) explaining y1, exactly as brute force finds them.

    A triple qualifies when some candidate in the m2c bin completes a
    tuple (q, u1p, u1c, u2c, y1) that is jointly typical.  Earlier sieves
    only ever test marginals of that law, so they cannot drop a
    qualifying triple.
    """
    n = books.q.shape[0]
    seqs = {"Q": books.q, "Y1": y1}
    base = ctx.code_ctx(("Q", "Y1"), seqs)
    pmf_a, cls_a = ctx.aligned(("Q", "Y1"), "U1p")
    idx_a = sieve_bank(books.u1p, base, cls_a, pmf_a, n, eps)
    pmf_c, cls_c = ctx.aligned(("Q", "Y1"), "U1c")
    idx_c = sieve_bank(books.u1c, base, cls_c, pmf_c, n, eps)
    logger.debug("rx1 sieve survivors: u1p %d/%d, u1c %d/%d",
                 len(idx_a), books.u1p.n_rows, len(idx_c), books.u1c.n_rows)
    _pairs_cap(len(idx_a), max(len(idx_c), 1))

    pmf_pair, cls_pair = ctx.aligned(("Q", "U1p", "Y1"), "U1c")
    pmf_full, cls_full = ctx.aligned(("Q", "U1p", "U1c", "Y1"), "U2c")
    out: set[tuple[int, int, int]] = set()
    l2c = books.sizes["l2c"]
    for a in idx_a:
        row_a = books.u1p.row(a)
        code_a = ctx.code_ctx(("Q", "U1p", "Y1"),
                              {"Q": books.q, "U1p": row_a, "Y1": y1})
        for c in sieve_bank(books.u1c, code_a, cls_pair, pmf_pair, n, eps, restrict=idx_c):
            row_c = books.u1c.row(c)
            code_ac = ctx.code_ctx(
                ("Q", "U1p", "U1c", "Y1"),
                {"Q": books.q, "U1p": row_a, "U1c": row_c, "Y1": y1})
            hits = sieve_bank(books.u2c, code_ac, cls_full, pmf_full, n, eps)
            out.update((int(a), int(c), int(h) // l2c) for h in hits)
    return out


def decode_rx2(ctx: SimContext, books: TrialCodebooks, y2: np.ndarray,
               eps: float) -> set[tuple[int, int, int]]:
    """All (m2p, m2c, m1c) explaining y2; same contract as decode_rx1."""
    n = books.q.shape[0]
    seqs = {"Q": books.q, "Y2": y2}
    base = ctx.code_ctx(("Q", "Y2"), seqs)
    pmf_p, cls_p = ctx.aligned(("Q", "Y2"), "U2p")
    idx_p = sieve_bank(books.u2p, base, cls_p, pmf_p, n, eps)
    pmf_u, cls_u = ctx.aligned(("Q", "Y2"), "U2c")
    idx_u = sieve_bank(books.u2c, base, cls_u, pmf_u, n, eps)
    pmf_j, cls_j = ctx.aligned(("Q", "Y2"), "U1c")
    idx_j = sieve_bank(books.u1c, base, cls_j, pmf_j, n, eps)
    logger.debug("rx2 sieve survivors: u2p %d/%d, u2c %d/%d, u1c %d/%d",
                 len(idx_p), books.u2p.n_rows, len(idx_u), books.u2c.n_rows,
                 len(idx_j), books.u1c.n_rows)
    _pairs_cap(len(idx_p), max(len(idx_u), 1))

    pmf_pu, cls_pu = ctx.aligned(("Q", "U2p", "Y2"), "U2c")
    pmf_full, cls_full = ctx.aligned(("Q", "U2c", "U2p", "Y2"), "U1c")
    out: set[tuple[int, int, int]] = set()
    l2c, l2p = books.sizes["l2c"], books.sizes["l2p"]
    for p in idx_p:
        row_p = books.u2p.row(p)
        code_p = ctx.code_ctx(("Q", "U2p", "Y2"),
                              {"Q": books.q, "U2p": row_p, "Y2": y2})
        for u in sieve_bank(books.u2c, code_p, cls_pu, pmf_pu, n, eps, restrict=idx_u):
            row_u = books.u2c.row(u)
            code_pu = ctx.code_ctx(
                ("Q", "U2c", "U2p", "Y2"),
                {"Q": books.q, "U2c": row_u, "U2p": row_p, "Y2": y2})
            for j in sieve_bank(books.u1c, code_pu, cls_full, pmf_full, n, eps,
                                restrict=idx_j):
                out.add((int(p) // l2p, int(u) // l2c, int(j)))
    return out


def decode_rx1_brute(ctx: SimContext, books: TrialCodebooks, y1: np.ndarray,
                     eps: float) -> set[tuple[int, int, int]]:
    """Reference decoder: full-tuple test on every triple, no sieves."""
    n = books.q.shape[0]
    pmf_full, cls_full = ctx.aligned(("Q", "U1p", "U1c", "Y1"), "U2c")
    out: set[tuple[int, int, int]] = set()
    l2c = books.sizes["l2c"]
    for a in range(books.u1p.n_rows):
        row_a = books.u1p.row(a)
        for c in range(books.u1c.n_rows):
            row_c = books.u1c.row(c)
            code = ctx.code_ctx(
                ("Q", "U1p", "U1c", "Y1"),
                {"Q": books.q, "U1p": row_a, "U1c": row_c, "Y1": y1})
            hits = sieve_bank(books.u2c, code, cls_full, pmf_full, n, eps)
            out.update((a, c, int(h) // l2c) for h in hits)
    return out


def decode_rx2_brute(ctx: SimContext, books: TrialCodebooks, y2: np.ndarray,
                     eps: float) -> set[tuple[int, int, int]]:
    n = books.q.shape[0]
    pmf_full, cls_full = ctx.aligned(("Q", "U2c", "U2p", "Y2"), "U1c")
    out: set[tuple[int, int, int]] = set()
    l2c, l2p = books.sizes["l2c"], books.sizes["l2p"]
    for p in range(books.u2p.n_rows):
        row_p = books.u2p.row(p)
        for u in range(books.u2c.n_rows):
            row_u = books.u2c.row(u)
            code = ctx.code_ctx(
                ("Q", "U2c", "U2p", "Y2"),
                {"Q": books.q, "U2c": row_u, "U2p": row_p, "Y2": y2})
            for j in sieve_bank(books.u1c, code, cls_full, pmf_full, n, eps):
                out.add((p // l2p, u // l2c, int(j)))
    return out


def draw_messages(config: SimConfig, trial: int) -> dict[str, int]:
    sizes = config.sizes()
    rng = _trial_rng(config.master_seed, trial, _TAG_MSG)
    return {
        "m1p": int(rng.integers(sizes["m1p"])),
        "m1c": int(rng.integers(sizes["m1c"])),
        "m2c": int(rng.integers(sizes["m2c"])),
        "m2p": int(rng.integers(sizes["m2p"])),
    }


def run_single_trial(ctx: SimContext, config: SimConfig, trial: int) -> TrialOutcome:
    books = build_codebooks(ctx, config, trial)
    messages = draw_messages(config, trial)
    enc = encode(ctx, books, messages, config, trial)
    y1, y2 = transmit(ctx, enc.x1, enc.x2, config, trial)
    cand1 = decode_rx1(ctx, books, y1, config.eps_typ)
    cand2 = decode_rx2(ctx, books, y2, config.eps_typ)
    truth1 = {(messages["m1p"], messages["m1c"], messages["m2c"])}
    truth2 = {(messages["m2p"], messages["m2c"], messages["m1c"])}
    return TrialOutcome(
        binning_failed_c=enc.binning_failed_c,
        binning_failed_p=enc.binning_failed_p,
        dec1_error=cand1 != truth1,
        dec2_error=cand2 != truth2,
    )


@dataclass(frozen=True)
class SimReport:
    """Aggregate error statistics for one simulation setting."""

    n: int
    trials: int
    master_seed: int
    eps_typ: float
    rates: dict[str, float]
    sizes: dict[str, int]
    enc_fail_count_c: int
    enc_fail_count_p: int
    dec1_error_count: int
    dec2_error_count: int
    overall_error_count: int

    @property
    def overall_error_rate(self) -> float:
        return self.overall_error_count / self.trials

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "eps_typ": self.eps_typ,
            "rates": self.rates,
            "codebook_sizes": self.sizes,
            "enc_fail_count_c": self.enc_fail_count_c,
            "enc_fail_count_p": self.enc_fail_count_p,
            "enc_fail_rate_c": self.enc_fail_count_c / self.trials,
            "enc_fail_rate_p": self.enc_fail_count_p / self.trials,
            "dec1_error_count": self.dec1_error_count,
            "dec1_error_rate": self.dec1_error_count / self.trials,
            "dec2_error_count": self.dec2_error_count,
            "dec2_error_rate": self.dec2_error_count / self.trials,
            "overall_error_count": self.overall_error_count,
            "overall_error_rate": self.overall_error_rate,
        }


def _trial_batch(args) -> list[tuple[bool, bool, bool, bool]]:
    channel, aux, config, trials = args
    ctx = SimContext(channel, aux)
    out = []
    for t in trials:
        o = run_single_trial(ctx, config, t)
        out.append((o.binning_failed_c, o.binning_failed_p, o.dec1_error, o.dec2_error))
    return out


def run_trials(channel: ChannelSpec, aux: AuxFactorization, config: SimConfig,
               jobs: int = 1) -> SimReport:
    """Monte Carlo error estimate; identical output for any worker count.

    Trials are keyed by index, so the split across workers only affects
    scheduling.  Results are re-assembled in trial order before
    aggregation.
    """
    indices = list(range(config.trials))
    jobs = max(1, min(jobs, config.trials))
    if jobs == 1:
        ctx = SimContext(channel, aux)
        outcomes = [run_single_trial(ctx, config, t) for t in indices]
        flat = [(o.binning_failed_c, o.binning_failed_p, o.dec1_error, o.dec2_error)
                for o in outcomes]
    else:
        chunks = [indices[i::jobs] for i in range(jobs)]
        flat_by_trial: dict[int, tuple] = {}
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for chunk, res in zip(chunks, pool.map(
                    _trial_batch, [(channel, aux, config, c) for c in chunks])):
                for t, r in zip(chunk, res):
                    flat_by_trial[t] = r
        flat = [flat_by_trial[t] for t in indices]
    arr = np.array(flat, dtype=bool).reshape(len(flat), 4)
    overall = arr.any(axis=1)
    return SimReport(
        n=config.n,
        trials=config.trials,
        master_seed=config.master_seed,
        eps_typ=config.eps_typ,
        rates=config.rates.as_dict(),
        sizes=config.sizes(),
        enc_fail_count_c=int(arr[:, 0].sum()),
        enc_fail_count_p=int(arr[:, 1].sum()),
        dec1_error_count=int(arr[:, 2].sum()),
        dec2_error_count=int(arr[:, 3].sum()),
        overall_error_count=int(overall.sum()),
    )


# --------------------------------------------------------------------------
# binning-overhead sweep


@dataclass(frozen=True)
class SweepReport:
    """Bin-search success against the overhead rate, shared scan per trial."""

    n: int
    trials: int
    master_seed: int
    eps_typ: float
    rp2c_values: tuple[float, ...]
    bin_sizes: tuple[int, ...]
    successes: tuple[int, ...]

    @property
    def success_rates(self) -> tuple[float, ...]:
        return tuple(s / self.trials for s in self.successes)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "eps_typ": self.eps_typ,
            "rows": [
                {"rp2c": v, "bin_size": b, "successes": s,
                 "success_rate": s / self.trials}
                for v, b, s in zip(self.rp2c_values, self.bin_sizes, self.successes)
            ],
        }


def _first_hit_lazy(rng, q_seq, cond, ctx_code, n_classes, pmf2, n, eps,
                    max_rows: int) -> int | None:
    """Index of the first typical candidate in a lazily generated bin.

    Chunks come off one stream in a fixed size, so the scan sees the same
    candidate sequence whatever the cap; all overhead rates then share
    one hit index per trial.
    """
    fast = n <= 64 and _uniform_binary(cond)
    win = _word_windows(ctx_code, n_classes, pmf2, n, eps) if fast else None
    if fast and win is None:
        return None
    seen = 0
    while seen < max_rows:
        rows = min(_SWEEP_CHUNK, max_rows - seen)
        bank = _gen_bank(rng, rows, q_seq, cond)
        if fast:
            ok = _word_sieve(bank.words, *win)
        else:
            ok = _count_sieve(bank.rows, ctx_code, n_classes, pmf2, n, eps)
        hits = np.nonzero(ok)[0]
        if len(hits):
            return seen + int(hits[0])
        seen += rows
    return None


def sweep_rp2c(channel: ChannelSpec, aux: AuxFactorization, n: int,
               rp2c_values, trials: int, master_seed: int,
               eps_typ: float) -> SweepReport:
    """Success rate of the u2c bin search as the bin grows.

    Encoder-only experiment: each trial draws fresh (q, u1p, u1c) and
    scans a single candidate stream once; the overhead rate R'2c only
    decides how much of the stream counts as the bin, so success is
    monotone in R'2c trial by trial.
    """
    values = tuple(float(v) for v in rp2c_values)
    if not values:
        raise ConfigurationError("sweep needs at least one rp2c value")
    if any(v < 0 for v in values):
        raise ConfigurationError("sweep rates must be non-negative")
    if eps_typ <= 0:
        raise ConfigurationError(f"eps_typ must be positive, got {eps_typ}")
    budget = n * max(values)
    if budget > SWEEP_CAP_BITS:
        raise GuardError(
            f"sweep bin budget {budget:.2f} bits exceeds cap {SWEEP_CAP_BITS}",
            budgets={"bin_bits": budget, "cap_bits": SWEEP_CAP_BITS},
        )
    ctx = SimContext(channel, aux)
    bin_sizes = [message_count(n, v) for v in values]
    max_rows = max(bin_sizes)
    pmf2, n_classes = ctx.aligned(("Q", "U1p", "U1c"), "U2c")
    cum_q = np.cumsum(ctx.aux.p_q)
    successes = np.zeros(len(values), dtype=np.int64)
    for trial in range(trials):
        rng_q = _trial_rng(master_seed, trial, _TAG_Q)
        q_seq = np.minimum(np.searchsorted(cum_q, rng_q.random(n), side="right"),
                           ctx.cards["Q"] - 1).astype(np.int8)
        u1c = _gen_bank(_trial_rng(master_seed, trial, _TAG_U1C), 1, q_seq, ctx.aux.p_u1c)
        u1p = _gen_bank(_trial_rng(master_seed, trial, _TAG_U1P), 1, q_seq, ctx.aux.p_u1p)
        code = ctx.code_ctx(("Q", "U1p", "U1c"),
                            {"Q": q_seq, "U1p": u1p.row(0), "U1c": u1c.row(0)})
        hit = _first_hit_lazy(_trial_rng(master_seed, trial, _TAG_U2C, 0),
                              q_seq, ctx.u2c_cond, code, n_classes, pmf2,
                              n, eps_typ, max_rows)
        if hit is not None:
            successes += hit < np.asarray(bin_sizes)
    return SweepReport(
        n=n, trials=trials, master_seed=master_seed, eps_typ=eps_typ,
        rp2c_values=values, bin_sizes=tuple(bin_sizes),
        successes=tuple(int(s) for s in successes),
    )
