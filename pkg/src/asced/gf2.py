"""Bit-packed GF(2) linear algebra.

Rows are stored as Python integers: bit ``i`` of a row is the entry in
column ``i``.  XOR on integers runs word-parallel, which keeps Gaussian
elimination on matrices with a few hundred columns fast without any
per-bit loops.  Vectors crossing the public API are numpy ``uint8`` arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "BitMatrix",
    "XorBasis",
    "pack",
    "unpack",
    "weight",
    "rank",
    "rref",
    "in_row_space",
    "null_space_basis",
    "min_weight_codewords",
    "span_words",
    "EXHAUSTIVE_MAX_DIM",
]

# Row-space dimension up to which min_weight_codewords enumerates exhaustively.
EXHAUSTIVE_MAX_DIM = 24


def pack(bits) -> int:
    """Pack a 0/1 sequence into an integer (entry ``i`` -> bit ``i``)."""
    arr = np.asarray(bits, dtype=np.uint8).ravel()
    if arr.size == 0:
        return 0
    packed = np.packbits(arr, bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def unpack(value: int, n: int) -> np.ndarray:
    """Inverse of :func:`pack`; returns a ``uint8`` array of length ``n``."""
    if n == 0:
        return np.zeros(0, dtype=np.uint8)
    nbytes = (n + 7) // 8
    raw = np.frombuffer(value.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n].copy()


def weight(value) -> int:
    """Hamming weight of an integer row or a 0/1 array."""
    if isinstance(value, (int, np.integer)):
        return int(value).bit_count()
    return int(np.count_nonzero(np.asarray(value)))


@dataclass(frozen=True)
class BitMatrix:
    """Dense GF(2) matrix with integer-packed rows.

    Immutable; every operation returns a new matrix.
    """

    ncols: int
    rows: tuple[int, ...] = ()

    def __post_init__(self):
        rows = tuple(int(r) for r in self.rows)
        limit = 1 << self.ncols
        for r in rows:
            if r < 0 or r >= limit:
                raise ValueError(f"row {r:#x} does not fit in {self.ncols} columns")
        object.__setattr__(self, "rows", rows)

    # construction -------------------------------------------------------
    @classmethod
    def from_dense(cls, array) -> "BitMatrix":
        arr = np.asarray(array)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D 0/1 array")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError("matrix entries must be 0 or 1")
        return cls(arr.shape[1], tuple(pack(row) for row in arr.astype(np.uint8)))

    @classmethod
    def from_strings(cls, lines: Sequence[str]) -> "BitMatrix":
        """Build from strings such as ``"1010101"`` (column 0 first)."""
        lines = [ln.strip() for ln in lines if ln.strip()]
        if not lines:
            raise ValueError("no rows given")
        width = len(lines[0])
        if any(len(ln) != width for ln in lines):
            raise ValueError("rows have different lengths")
        if any(set(ln) - {"0", "1"} for ln in lines):
            raise ValueError("rows may only contain '0' and '1'")
        return cls.from_dense(np.array([[int(c) for c in ln] for ln in lines], dtype=np.uint8))

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "BitMatrix":
        return cls(ncols, (0,) * nrows)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, tuple(1 << i for i in range(n)))

    # views --------------------------------------------------------------
    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def to_dense(self) -> np.ndarray:
        if not self.rows:
            return np.zeros((0, self.ncols), dtype=np.uint8)
        return np.stack([unpack(r, self.ncols) for r in self.rows])

    def to_strings(self) -> list[str]:
        return ["".join(map(str, unpack(r, self.ncols))) for r in self.rows]

    def row(self, i: int) -> np.ndarray:
        return unpack(self.rows[i], self.ncols)

    def weight(self) -> int:
        """Number of ones (edge count of the Tanner graph)."""
        return sum(r.bit_count() for r in self.rows)

    def column_weights(self) -> np.ndarray:
        if not self.rows:
            return np.zeros(self.ncols, dtype=np.int64)
        return self.to_dense().sum(axis=0, dtype=np.int64)

    # algebra ------------------------------------------------------------
    def vstack(self, other: "BitMatrix") -> "BitMatrix":
        if other.ncols != self.ncols:
            raise ValueError(f"column mismatch: {self.ncols} vs {other.ncols}")
        return BitMatrix(self.ncols, self.rows + other.rows)

    def pad_columns(self, extra: int) -> "BitMatrix":
        """Append ``extra`` all-zero columns on the right."""
        return BitMatrix(self.ncols + extra, self.rows)

    def select_rows(self, indices: Iterable[int]) -> "BitMatrix":
        return BitMatrix(self.ncols, tuple(self.rows[i] for i in indices))

    def truncate_columns(self, n: int) -> "BitMatrix":
        mask = (1 << n) - 1
        return BitMatrix(n, tuple(r & mask for r in self.rows))

    def multiply_vector(self, vec) -> np.ndarray:
        """Return ``M @ v`` over GF(2) as a ``uint8`` array (the syndrome)."""
        v = vec if isinstance(vec, int) else pack(vec)
        return np.array([(r & v).bit_count() & 1 for r in self.rows], dtype=np.uint8)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.ncols == other.ncols and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.ncols, self.rows))

    def __repr__(self) -> str:
        return f"BitMatrix({self.nrows}x{self.ncols}, weight={self.weight()})"


class XorBasis:
    """Incremental GF(2) basis keyed by leading (highest) bit.

    ``insert`` returns whether the vector enlarged the span; ``reduce``
    returns the residual of a vector against the current span.
    """

    def __init__(self, rows: Iterable[int] = ()):
        self._pivots: dict[int, int] = {}
        for r in rows:
            self.insert(r)

    def __len__(self) -> int:
        return len(self._pivots)

    def reduce(self, v: int) -> int:
        pivots = self._pivots
        while v:
            top = v.bit_length() - 1
            row = pivots.get(top)
            if row is None:
                return v
            v ^= row
        return 0

    def insert(self, v: int) -> bool:
        v = self.reduce(v)
        if v:
            self._pivots[v.bit_length() - 1] = v
            return True
        return False

    def contains(self, v: int) -> bool:
        return self.reduce(v) == 0

    def copy(self) -> "XorBasis":
        out = XorBasis()
        out._pivots = dict(self._pivots)
        return out

    def rows(self) -> list[int]:
        return list(self._pivots.values())


def rref(m: BitMatrix) -> tuple[list[int], list[int]]:
    """Reduced row echelon form.

    Returns ``(rows, pivot_columns)``: the nonzero reduced rows, each with a
    distinct pivot column (its lowest set bit) that is zero in every other row.
    """
    rows: list[int] = []
    pivots: list[int] = []
    for r in m.rows:
        for prow, pcol in zip(rows, pivots):
            if (r >> pcol) & 1:
                r ^= prow
        if not r:
            continue
        pcol = (r & -r).bit_length() - 1
        for i, prow in enumerate(rows):
            if (prow >> pcol) & 1:
                rows[i] = prow ^ r
        rows.append(r)
        pivots.append(pcol)
    order = sorted(range(len(rows)), key=pivots.__getitem__)
    return [rows[i] for i in order], [pivots[i] for i in order]


def rank(m: BitMatrix) -> int:
    """GF(2) row rank."""
    return len(XorBasis(m.rows))


def in_row_space(v, m: BitMatrix) -> bool:
    """True iff ``v`` is a GF(2) combination of the rows of ``m``."""
    if isinstance(v, (int, np.integer)):
        value = int(v)
        if value >> m.ncols:
            raise ValueError("vector longer than the matrix row length")
    else:
        arr = np.asarray(v)
        if arr.shape != (m.ncols,):
            raise ValueError(f"vector length {arr.size} != {m.ncols} columns")
        value = pack(arr)
    return XorBasis(m.rows).contains(value)


def null_space_basis(m: BitMatrix) -> BitMatrix:
    """Basis of ``{x : m x^T = 0}`` as the rows of a ``(n - rank) x n`` matrix."""
    n = m.ncols
    rows, pivots = rref(m)
    pivot_set = set(pivots)
    basis = []
    for free in range(n):
        if free in pivot_set:
            continue
        vec = 1 << free
        for prow, pcol in zip(rows, pivots):
            if (prow >> free) & 1:
                vec |= 1 << pcol
        basis.append(vec)
    return BitMatrix(n, tuple(basis))


# ---------------------------------------------------------------------------
# word-array helpers (numpy uint64, most-significant-first layout)
#
# For enumeration the column order is mapped so that numeric order of the
# word tuple equals lexicographic order of the bit string x_0 x_1 ... x_{n-1}:
# column c lives in word c // 64 at bit 63 - c % 64.


def _to_words(rows: Sequence[int], n: int) -> np.ndarray:
    nw = max(1, (n + 63) // 64)
    out = np.zeros((len(rows), nw), dtype=np.uint64)
    for i, r in enumerate(rows):
        bits = unpack(r, n)
        padded = np.zeros(nw * 64, dtype=np.uint8)
        padded[:n] = bits
        out[i] = np.packbits(padded.reshape(nw, 64), axis=1, bitorder="big").view(">u8").astype(np.uint64).ravel()
    return out


def _from_words(words: np.ndarray, n: int) -> int:
    bits = np.unpackbits(words.astype(">u8").view(np.uint8), bitorder="big")[:n]
    return pack(bits)


def _words_weight(words: np.ndarray) -> np.ndarray:
    return np.bitwise_count(words).sum(axis=-1, dtype=np.int64)


def span_words(rows: Sequence[int], n: int) -> np.ndarray:
    """All ``2^len(rows)`` combinations of ``rows`` as a word array.

    Entry ``u`` is the XOR of the rows selected by the bits of ``u``.
    """
    base = _to_words(rows, n)
    d = len(rows)
    out = np.zeros((1 << d, base.shape[1]), dtype=np.uint64)
    for b in range(d):
        half = 1 << b
        np.bitwise_xor(out[:half], base[b], out=out[half : 2 * half])
    return out


def _lex_weight_order(words: np.ndarray, weights: np.ndarray) -> np.ndarray:
    keys = [words[:, j] for j in range(words.shape[1] - 1, -1, -1)]
    return np.lexsort(keys + [weights])


def _exhaustive_stream(basis: list[int], n: int) -> Iterator[tuple[np.ndarray, int]]:
    words = span_words(basis, n)[1:]
    weights = _words_weight(words)
    for idx in _lex_weight_order(words, weights):
        yield unpack(_from_words(words[idx], n), n), int(weights[idx])


def _systematic_rows(basis: list[int], order: np.ndarray) -> list[int]:
    """Reduce ``basis`` so each row has a private pivot, pivots taken in ``order``."""
    rows = list(basis)
    out: list[int] = []
    for col in order:
        bit = 1 << int(col)
        hit = next((i for i, r in enumerate(rows) if r & bit), None)
        if hit is None:
            continue
        piv = rows.pop(hit)
        rows = [r ^ piv if r & bit else r for r in rows]
        out = [r ^ piv if r & bit else r for r in out]
        out.append(piv)
        if not rows:
            break
    return out


def _isd_round(basis: list[int], n: int, rng: np.random.Generator, max_comb: int,
               weight_cap: int, pool: dict[bytes, int]) -> None:
    """One information-set round: all sums of up to ``max_comb`` systematic rows.

    Codewords of weight ``<= weight_cap`` are added to ``pool``, keyed by their
    big-endian word bytes (byte order == lexicographic bit order).
    """
    rows = _systematic_rows(basis, rng.permutation(n))
    words = _to_words(rows, n)

    def keep(block: np.ndarray):
        w = _words_weight(block)
        hits = np.flatnonzero(w <= weight_cap)
        keys = block[hits].astype(">u8")
        for idx, key in zip(hits, keys):
            pool[key.tobytes()] = int(w[idx])

    keep(words)
    k = len(rows)
    if max_comb >= 2 and k >= 2:
        iu, ju = np.triu_indices(k, 1)
        pairs = words[iu] ^ words[ju]
        keep(pairs)
        if max_comb >= 3 and k >= 3:
            for c in range(2, k):
                keep(pairs[ju < c] ^ words[c])


def _key_to_bits(key: bytes, n: int) -> np.ndarray:
    return np.unpackbits(np.frombuffer(key, dtype=np.uint8), bitorder="big")[:n].copy()


def min_weight_codewords(
    gen: BitMatrix,
    effort: int = 200,
    rng=None,
    max_combination: int = 3,
) -> Iterator[tuple[np.ndarray, int]]:
    """Yield nonzero codewords of ``rowspace(gen)`` in non-decreasing weight.

    If the row space has dimension at most ``EXHAUSTIVE_MAX_DIM`` every
    nonzero codeword is produced exactly once, equal weights in lexicographic
    order of the bit string.  Above that the stream comes from a randomized
    information-set search: ``effort`` random information sets are drawn per
    weight class and all sums of at most ``max_combination`` systematic rows
    are inspected.  That mode is probabilistic; codewords missed while their
    weight class was current are never emitted later.

    Parameters
    ----------
    gen : BitMatrix
        Generator of the code to search (for dual codewords pass a PCM).
    effort : int
        Information sets per weight class in the randomized mode.
    rng : int or numpy Generator, optional
        Seed for the randomized mode.
    """
    basis = XorBasis(gen.rows).rows()
    if not basis:
        raise ValueError("generator matrix has an empty row space")
    n = gen.ncols
    if len(basis) <= EXHAUSTIVE_MAX_DIM:
        yield from _exhaustive_stream(basis, n)
        return

    rng = np.random.default_rng(rng)
    pool: dict[bytes, int] = {}
    closed_below = 0  # weights < closed_below were already emitted
    cap = n
    while True:
        for _ in range(effort):
            _isd_round(basis, n, rng, max_combination, cap, pool)
            # hold only the three lightest open weight classes
            open_weights = sorted({w for w in pool.values() if w >= closed_below})
            if len(open_weights) > 3 and open_weights[2] < cap:
                cap = open_weights[2]
                pool = {key: w for key, w in pool.items() if closed_below <= w <= cap}
        open_weights = sorted({w for w in pool.values() if w >= closed_below})
        if not open_weights:
            return
        w = open_weights[0]
        for key in sorted(key for key, kw in pool.items() if kw == w):
            yield _key_to_bits(key, n), w
        closed_below = w + 1
        pool = {key: kw for key, kw in pool.items() if kw >= closed_below}
        cap = n
