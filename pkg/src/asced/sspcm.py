"""Structured sparse PCMs: 4-cycle counting and elimination, search spaces, PCRB selection.

A search space is a list of low-weight dual codewords.  The construction
repeatedly picks a row block whose supports pairwise meet in one common
column set ``T`` (a PCRB), replaces it by its 4-cycle-free version using
one auxiliary check and one auxiliary variable, and stacks the result.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _sspcm_kernels as _k
from .gf2 import BitMatrix, XorBasis, min_weight_codewords, rank, rref, unpack, weight

__all__ = [
    "count_4cycles",
    "eliminate_4cycles",
    "SearchSpace",
    "build_search_space",
    "Pcrb",
    "AppliedBlock",
    "SspcmResult",
    "identify_pcrb",
    "build_sspcm",
    "structural_report",
    "report_json",
    "lift_with_sets",
]


def _dense(h: BitMatrix) -> np.ndarray:
    return h.to_dense().astype(np.int64)


def count_4cycles(h: BitMatrix) -> int:
    """Sum over unordered row pairs of ``C(|overlap|, 2)``."""
    if h.nrows < 2:
        return 0
    d = _dense(h)
    overlap = d @ d.T
    iu = np.triu_indices(h.nrows, 1)
    o = overlap[iu]
    return int((o * (o - 1) // 2).sum())


def eliminate_4cycles(h: BitMatrix, r_set, t_set) -> BitMatrix:
    """Remove the 4-cycles of the all-ones block ``h[R, T]`` with one ACN and one AVN.

    The result is ``(m+1) x (n+1)``: a zero column is appended, the new last
    row is ``1`` on ``T`` and the new column, and every row in ``R`` is XORed
    with it.
    """
    r_set = sorted(set(int(r) for r in r_set))
    t_set = sorted(set(int(t) for t in t_set))
    if len(r_set) < 2 or len(t_set) < 2:
        raise ValueError("R and T need at least two elements each")
    if r_set[0] < 0 or r_set[-1] >= h.nrows or t_set[0] < 0 or t_set[-1] >= h.ncols:
        raise ValueError("R or T out of range")
    t_mask = sum(1 << t for t in t_set)
    for r in r_set:
        if h.rows[r] & t_mask != t_mask:
            raise ValueError(f"block (R, T) is not all-ones in row {r}")
    acn = t_mask | (1 << h.ncols)
    rows = list(h.rows)
    for r in r_set:
        rows[r] ^= acn
    rows.append(acn)
    return BitMatrix(h.ncols + 1, tuple(rows))


@dataclass(frozen=True, eq=False)
class SearchSpace:
    """Low-weight dual codewords in insertion order.

    ``complete`` is false when the low-weight stream ran dry before the rows
    reached ``target_rank``.
    """

    s: BitMatrix
    weights: np.ndarray
    target_rank: int
    complete: bool = True

    @property
    def size(self) -> int:
        return self.s.nrows


def build_search_space(h: BitMatrix, s_max: int = 1000, effort: int = 200, rng=None) -> SearchSpace:
    """Collect dual codewords of ``C(h)`` in non-decreasing weight.

    Rows are added while fewer than ``s_max`` are held or the rank is below
    ``rank(h)``.  Once full rank is reached, the first codeword of a heavier
    weight class ends the search and is not added.
    """
    if s_max < 1:
        raise ValueError("s_max must be at least 1")
    target = rank(h)
    basis = XorBasis()
    rows: list[int] = []
    weights: list[int] = []
    d = None
    stream = min_weight_codewords(h, effort=effort, rng=rng)
    complete = False
    for vec, w in stream:
        full = len(basis) == target
        if len(rows) >= s_max and full:
            complete = True
            break
        if d is not None and w > d and full:
            complete = True
            break
        row = sum(1 << int(i) for i in np.flatnonzero(vec))
        rows.append(row)
        weights.append(w)
        basis.insert(row)
        d = w
    else:
        complete = len(basis) == target
    return SearchSpace(BitMatrix(h.ncols, tuple(rows)), np.array(weights, dtype=np.int64), target, complete)


@dataclass(frozen=True)
class Pcrb:
    """Row block of a search space whose supports pairwise meet exactly in ``t_cols``."""

    row_indices: tuple[int, ...]
    t_cols: tuple[int, ...]

    @property
    def s_size(self) -> int:
        return len(self.row_indices)

    @property
    def t_size(self) -> int:
        return len(self.t_cols)


@dataclass(frozen=True)
class AppliedBlock:
    """One construction step.

    For a PCRB step ``replacement`` holds the block rows with ``T`` cleared and
    the new auxiliary column set, followed by the auxiliary check.  When no
    PCRB existed ``pcrb`` is None and a single search row was stacked as is.
    """

    pcrb: Optional[Pcrb]
    source_rows: tuple[int, ...]
    replacement: tuple[int, ...]
    avn_col: Optional[int]


@dataclass(frozen=True, eq=False)
class SspcmResult:
    n_code: int
    sspcm_1: Optional[BitMatrix]
    sspcm_2: BitMatrix
    applied_blocks: tuple[AppliedBlock, ...]
    stage1_steps: Optional[int]
    target_rank: int

    @property
    def avn_count(self) -> int:
        return self.sspcm_2.ncols - self.n_code

    @property
    def acn_count(self) -> int:
        return sum(1 for b in self.applied_blocks if b.pcrb is not None)

    @property
    def avn_sets(self) -> list[tuple[int, ...]]:
        """``T`` of each auxiliary column, in column order."""
        return [b.pcrb.t_cols for b in self.applied_blocks if b.pcrb is not None]

    def lift(self, x, stage: int = 2) -> np.ndarray:
        """Extend a word on the original columns by its auxiliary parities."""
        return lift_with_sets(x, self.avn_sets[: self.avn_count_at(stage)])

    def avn_count_at(self, stage: int) -> int:
        if stage == 2:
            return self.avn_count
        if stage == 1:
            if self.sspcm_1 is None:
                raise ValueError("stage I was never reached")
            return self.sspcm_1.ncols - self.n_code
        raise ValueError("stage must be 1 or 2")


def lift_with_sets(x, avn_sets) -> np.ndarray:
    """Append ``parity(x[T])`` for each ``T``; works on the last axis."""
    x = np.asarray(x, dtype=np.uint8)
    if not avn_sets:
        return x.copy()
    parts = [x]
    for t in avn_sets:
        parts.append((x[..., list(t)].sum(axis=-1) & 1).astype(np.uint8)[..., None])
    return np.concatenate(parts, axis=-1)


def _to_natural_words(rows, n: int) -> np.ndarray:
    nw = max(1, (n + 63) // 64)
    out = np.zeros((len(rows), nw), dtype=np.uint64)
    mask = (1 << 64) - 1
    for i, r in enumerate(rows):
        for w in range(nw):
            out[i, w] = (r >> (64 * w)) & mask
    return out


def identify_pcrb(i: int, j: int, space: SearchSpace, alive=None) -> Optional[Pcrb]:
    """Block seeded by rows ``i < j``: ``T`` is their common support.

    Further rows join in index order when their support meets every row
    already in the block in exactly ``T``, so the replacement is free of
    4-cycles.  Returns None when ``|T| < 2``.
    """
    if not 0 <= i < j < space.size:
        raise ValueError("need 0 <= i < j < number of rows")
    alive = np.arange(space.size, dtype=np.int64) if alive is None else np.asarray(alive, dtype=np.int64)
    pos = {int(r): p for p, r in enumerate(alive)}
    if i not in pos or j not in pos:
        raise ValueError("rows i and j must be live")
    words = _to_natural_words(space.s.rows, space.s.ncols)
    out = np.empty(alive.size, dtype=np.int64)
    s = _k.pcrb_block(words, alive, pos[i], pos[j], out)
    if s == 0:
        return None
    t = space.s.rows[i] & space.s.rows[j]
    return Pcrb(tuple(int(alive[p]) for p in out[:s]), tuple(int(c) for c in np.flatnonzero(unpack(t, space.s.ncols))))


def _basis_arrays(rows: list[int], n: int) -> tuple[np.ndarray, np.ndarray]:
    if not rows:
        return np.zeros((0, max(1, (n + 63) // 64)), dtype=np.uint64), np.zeros(0, dtype=np.int64)
    reduced, pivots = rref(BitMatrix(n, tuple(rows)))
    return _to_natural_words(reduced, n), np.array(pivots, dtype=np.int64)


def _meet_tables(words: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    meet = words[:, None, :] & words[None, :, :]
    if words.shape[1] == 1:
        order = np.argsort(meet[:, :, 0], axis=1, kind="stable")
    else:
        order = np.stack([np.lexsort(meet[a].T[::-1]) for a in range(words.shape[0])])
    return np.ascontiguousarray(meet), np.ascontiguousarray(order.astype(np.int64))


def build_sspcm(space: SearchSpace, w_max: int) -> SspcmResult:
    """Grow an ssPCM from ``space`` until its weight reaches ``w_max`` or the space is used up.

    Each step evaluates the block of every live row pair and keeps the best
    by, in order: rank gained on the original columns, block size, 4-cycles
    in the stacked matrix, spread of the original column weights.  Stage I
    is the matrix at the first step where the consumed rows span the dual
    of the input code.
    """
    if space.size == 0:
        raise ValueError("empty search space")
    n = space.s.ncols
    words = _to_natural_words(space.s.rows, n)
    meet, order = _meet_tables(words)
    ends = _k.group_ends(meet, order)
    live = np.ones(space.size, dtype=np.bool_)
    consumed = XorBasis()
    consumed_rows: list[int] = []
    h_rows: list[int] = []
    h_weight = 0
    ncols = n
    colw = np.zeros(n, dtype=np.int64)
    blocks: list[AppliedBlock] = []
    sspcm_1 = None
    stage1_steps = None
    orig_mask = (1 << n) - 1
    scratch = np.empty(space.size, dtype=np.int64)
    while h_weight < w_max and live.any():
        basis, pivots = _basis_arrays(consumed_rows, n)
        h_orig = _to_natural_words([r & orig_mask for r in h_rows], n)
        remaining = space.target_rank - len(consumed)
        a, b = _k.select_pcrb(words, meet, order, ends, live, basis, pivots, remaining, h_orig, colw, n)
        if a >= 0:
            s = _k.block_members(meet, order, ends, live, a, b, scratch)
            members = tuple(int(r) for r in scratch[:s])
            t = space.s.rows[a] & space.s.rows[b]
            pcrb = Pcrb(members, tuple(int(c) for c in np.flatnonzero(unpack(t, n))))
            avn = ncols
            acn = t | (1 << avn)
            new_rows = tuple(space.s.rows[r] ^ acn for r in members) + (acn,)
            ncols += 1
            blocks.append(AppliedBlock(pcrb, members, new_rows, avn))
        else:
            # no live pair shares two columns: stack the live row adding rank, else the first
            idx = np.flatnonzero(live)
            pick = next((int(r) for r in idx if not consumed.contains(space.s.rows[r])), int(idx[0]))
            members = (pick,)
            new_rows = (space.s.rows[pick],)
            blocks.append(AppliedBlock(None, members, new_rows, None))
        for r in members:
            consumed_rows.append(space.s.rows[r])
            consumed.insert(space.s.rows[r])
            live[r] = False
        h_rows.extend(new_rows)
        for r in new_rows:
            h_weight += weight(r)
            colw += unpack(r & orig_mask, n).astype(np.int64)
        if sspcm_1 is None and len(consumed) == space.target_rank:
            sspcm_1 = BitMatrix(ncols, tuple(h_rows))
            stage1_steps = len(blocks)
    return SspcmResult(n, sspcm_1, BitMatrix(ncols, tuple(h_rows)), tuple(blocks), stage1_steps, space.target_rank)


def _stage_report(h: BitMatrix, n_code: int) -> dict:
    cycles = count_4cycles(h)
    return {
        "rows": h.nrows,
        "cols": h.ncols,
        "rank": rank(h),
        "weight": h.weight(),
        "avn": h.ncols - n_code,
        "acn": h.ncols - n_code,
        "four_cycles": cycles,
        "girth_at_least_6": cycles == 0,
    }


def structural_report(result: SspcmResult) -> dict:
    report = {
        "n_code": result.n_code,
        "target_rank": result.target_rank,
        "steps": len(result.applied_blocks),
        "sspcm_2": _stage_report(result.sspcm_2, result.n_code),
        "sspcm_1": None if result.sspcm_1 is None else _stage_report(result.sspcm_1, result.n_code),
        "blocks": [
            {"rows": list(b.source_rows), "t": None if b.pcrb is None else list(b.pcrb.t_cols)}
            for b in result.applied_blocks
        ],
    }
    return report


def report_json(result: SspcmResult) -> str:
    return json.dumps(structural_report(result), indent=2)
