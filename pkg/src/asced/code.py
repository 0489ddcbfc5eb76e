"""Linear codes, linear subcodes obtained by appending rows, and their cosets."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from .gf2 import BitMatrix, XorBasis, null_space_basis, pack, rank, span_words, unpack

__all__ = [
    "LinearCode",
    "SubcodePcm",
    "AffineSubcode",
    "ExhaustiveLimitError",
    "SearchExhaustedError",
    "from_pcm",
    "append_rows",
    "sample_independent_row",
    "enumerate_cosets",
    "verify_cover",
    "membership",
    "brute_force_ml",
    "correlation",
    "EXHAUSTIVE_MAX_K",
    "INDEPENDENT_ROW_ATTEMPTS",
]

EXHAUSTIVE_MAX_K = 20
INDEPENDENT_ROW_ATTEMPTS = 10_000


class ExhaustiveLimitError(ValueError):
    """Raised when an exhaustive operation is asked to enumerate too many codewords."""


class SearchExhaustedError(RuntimeError):
    """Raised when a randomized search runs out of its attempt budget."""


@dataclass(frozen=True, eq=False)
class LinearCode:
    """Binary linear code given as the null space of a parity-check matrix."""

    h: BitMatrix
    g: BitMatrix

    @property
    def n(self) -> int:
        return self.h.ncols

    @property
    def k(self) -> int:
        return self.g.nrows

    @property
    def rate(self) -> float:
        return self.k / self.n

    def encode(self, u) -> np.ndarray:
        """Map a length-``k`` message to the codeword ``u G``."""
        u = np.asarray(u, dtype=np.uint8)
        if u.shape != (self.k,):
            raise ValueError(f"message length {u.size} != k={self.k}")
        acc = 0
        for bit, row in zip(u, self.g.rows):
            if bit:
                acc ^= row
        return unpack(acc, self.n)

    def contains(self, x) -> bool:
        return not self.h.multiply_vector(x).any()

    def codewords(self) -> np.ndarray:
        """All ``2^k`` codewords as a ``(2^k, n)`` array; row ``u`` is ``u G``."""
        _check_exhaustive(self.k)
        return _words_to_dense(span_words(self.g.rows, self.n), self.n)

    def __repr__(self) -> str:
        return f"LinearCode(n={self.n}, k={self.k})"


def _check_exhaustive(k: int) -> None:
    if k > EXHAUSTIVE_MAX_K:
        raise ExhaustiveLimitError(f"k={k} exceeds the exhaustive limit {EXHAUSTIVE_MAX_K}")


def _words_to_dense(words: np.ndarray, n: int) -> np.ndarray:
    raw = words.astype(">u8").view(np.uint8).reshape(words.shape[0], -1)
    return np.unpackbits(raw, axis=1, bitorder="big")[:, :n]


def from_pcm(h: BitMatrix) -> LinearCode:
    """Code defined by ``h``; overcomplete (dependent) rows are accepted."""
    if rank(h) >= h.ncols:
        raise ValueError("PCM has full column rank: the code is {0}")
    return LinearCode(h, null_space_basis(h))


@dataclass(frozen=True, eq=False)
class SubcodePcm:
    """``[H; M]`` stacking of a base PCM and appended rows.

    ``delta`` is the rank deficiency: how many dimensions the subcode loses.
    """

    base_h: BitMatrix
    appended: BitMatrix
    stacked: BitMatrix
    delta: int

    @cached_property
    def code(self) -> LinearCode:
        return LinearCode(self.stacked, null_space_basis(self.stacked))

    @property
    def n(self) -> int:
        return self.stacked.ncols


@dataclass(frozen=True, eq=False)
class AffineSubcode:
    """Coset ``x_a + C(h_s)`` of a linear subcode inside its parent code.

    ``s_a = h_s x_a^T`` is shared by every member; ``s_a == 0`` is the
    linear subcode itself.
    """

    h_s: BitMatrix
    x_a: np.ndarray
    s_a: np.ndarray
    index: int = 0

    @property
    def is_linear(self) -> bool:
        return not self.s_a.any()

    def contains(self, x) -> bool:
        return np.array_equal(self.h_s.multiply_vector(x), self.s_a)


def append_rows(code: LinearCode, m: BitMatrix) -> SubcodePcm:
    if m.ncols != code.n:
        raise ValueError(f"appended rows have {m.ncols} columns, code has n={code.n}")
    stacked = code.h.vstack(m)
    delta = rank(stacked) - rank(code.h)
    return SubcodePcm(code.h, m, stacked, delta)


def sample_independent_row(code: LinearCode, d_c: int, rng=None,
                           attempts: int = INDEPENDENT_ROW_ATTEMPTS) -> np.ndarray:
    """Random weight-``d_c`` row outside the row space of ``code.h``.

    Raises
    ------
    SearchExhaustedError
        If no such row turns up in ``attempts`` draws.
    """
    n = code.n
    if not 1 <= d_c <= n:
        raise ValueError(f"row weight d_c={d_c} must lie in [1, {n}]")
    rng = np.random.default_rng(rng)
    basis = XorBasis(code.h.rows)
    for _ in range(attempts):
        support = rng.choice(n, size=d_c, replace=False)
        row = sum(1 << int(i) for i in support)
        if not basis.contains(row):
            return unpack(row, n)
    raise SearchExhaustedError(f"no independent weight-{d_c} row in {attempts} attempts")


def _solve_gf2(a_cols: list[int], nvars: int, target: int) -> int:
    """Solve ``A u = target`` for ``u`` with free variables set to zero.

    ``a_cols[i]`` packs column ``i`` of ``A`` (bit j = entry in row j); the
    augmented system is reduced column by column.  Returns packed ``u``.
    """
    # build row form: each equation j has variable mask and rhs bit
    nrows = max((c.bit_length() for c in a_cols), default=0)
    nrows = max(nrows, target.bit_length())
    eqs = []
    for j in range(nrows):
        mask = sum(((a_cols[i] >> j) & 1) << i for i in range(nvars))
        eqs.append((mask, (target >> j) & 1))
    pivots: list[tuple[int, int, int]] = []  # (pivot var, mask, rhs)
    for mask, rhs in eqs:
        for pvar, pmask, prhs in pivots:
            if (mask >> pvar) & 1:
                mask ^= pmask
                rhs ^= prhs
        if not mask:
            if rhs:
                raise ValueError("inconsistent system")
            continue
        pvar = (mask & -mask).bit_length() - 1
        pivots = [((pv, pm ^ mask, pr ^ rhs) if (pm >> pvar) & 1 else (pv, pm, pr)) for pv, pm, pr in pivots]
        pivots.append((pvar, mask, rhs))
    u = 0
    for pvar, _, rhs in pivots:
        if rhs:
            u |= 1 << pvar
    return u


def enumerate_cosets(sub: SubcodePcm, code: LinearCode) -> list[AffineSubcode]:
    """All ``2^delta`` cosets of the subcode in ``code``, linear subcode first.

    The appended constraints evaluated on the generator rows give a linear
    map ``u -> M (u G)^T``.  The first ``delta`` appended rows that are
    independent as functionals on ``code`` pin down a coset; coset ``t``
    has value bit ``b`` of ``t`` on the ``b``-th of them.  Offsets are the
    minimal solutions of that map (free message bits zero).
    """
    if sub.delta < 1:
        raise ValueError("subcode has rank deficiency 0: no proper cosets")
    # functional of appended row r on message space: bit i = r . g_i
    functionals = []
    for r in sub.appended.rows:
        functionals.append(sum(((r & g).bit_count() & 1) << i for i, g in enumerate(code.g.rows)))
    chosen: list[int] = []
    basis = XorBasis()
    for f in functionals:
        if basis.insert(f):
            chosen.append(f)
        if len(chosen) == sub.delta:
            break
    if len(chosen) != sub.delta:
        raise ArithmeticError("appended rows do not realise the stated rank deficiency")
    # columns of A (delta x k): column i has bit b = chosen[b] bit i
    a_cols = [sum(((chosen[b] >> i) & 1) << b for b in range(sub.delta)) for i in range(code.k)]
    cosets = []
    for t in range(1 << sub.delta):
        u = _solve_gf2(a_cols, code.k, t)
        x_bits = 0
        for i, g in enumerate(code.g.rows):
            if (u >> i) & 1:
                x_bits ^= g
        x_a = unpack(x_bits, code.n)
        cosets.append(AffineSubcode(sub.stacked, x_a, sub.stacked.multiply_vector(x_bits), t))
    return cosets


Part = Union[SubcodePcm, AffineSubcode, LinearCode]


def _part_syndrome_spec(part: Part) -> tuple[BitMatrix, int]:
    if isinstance(part, AffineSubcode):
        return part.h_s, pack(part.s_a)
    if isinstance(part, SubcodePcm):
        return part.stacked, 0
    if isinstance(part, LinearCode):
        return part.h, 0
    raise TypeError(f"cannot interpret {type(part).__name__} as a code part")


def membership(parts: Sequence[Part], code: LinearCode) -> np.ndarray:
    """Boolean ``(len(parts), 2^k)`` table: codeword ``u G`` lies in part ``p``."""
    _check_exhaustive(code.k)
    out = np.zeros((len(parts), 1 << code.k), dtype=bool)
    for p, part in enumerate(parts):
        h, target = _part_syndrome_spec(part)
        if h.ncols != code.n:
            raise ValueError("part and code have different block lengths")
        # syndrome of each generator row, then span enumeration of syndromes
        syn_rows = [pack(h.multiply_vector(g)) for g in code.g.rows]
        syn = span_words(syn_rows, max(h.nrows, 1))
        tgt = span_words([target], max(h.nrows, 1))[1] if target else np.zeros(syn.shape[1], dtype=np.uint64)
        out[p] = (syn == tgt).all(axis=1)
    return out


def verify_cover(parts: Sequence[Part], code: LinearCode) -> bool:
    """True iff every codeword of ``code`` belongs to at least one part (exhaustive)."""
    if not parts:
        return False
    return bool(membership(parts, code).any(axis=0).all())


def correlation(x: np.ndarray, llr: np.ndarray) -> np.ndarray:
    """``(1 - 2x) . llr`` along the last axis; shared by every ML-in-the-list rule."""
    x = np.asarray(x)
    signs = 1.0 - 2.0 * x.astype(np.float64)
    signs, llr = np.broadcast_arrays(signs, np.asarray(llr, dtype=np.float64))
    return np.einsum("...i,...i->...", signs, llr)


def brute_force_ml(code: LinearCode, llr) -> np.ndarray:
    """Exhaustive ML codeword for one LLR vector.

    Ties go to the lexicographically smallest codeword (bit string x_0 x_1 ...).
    """
    llr = np.asarray(llr, dtype=np.float64)
    if llr.shape != (code.n,):
        raise ValueError(f"llr length {llr.size} != n={code.n}")
    words = code.codewords()
    corr = correlation(words, llr)
    best = np.flatnonzero(corr == corr.max())
    if best.size == 1:
        return words[best[0]].copy()
    tied = words[best]
    order = np.lexsort(tied.T[::-1])
    return tied[order[0]].copy()
