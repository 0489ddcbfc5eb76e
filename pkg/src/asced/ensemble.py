"""Ensemble decoding: aSCED batches, MBBP as the rank-deficiency-0 case, ML-in-the-list selection.

A batch decodes one linear subcode and all its cosets on a shared graph;
together the coset paths cover the parent code.  Every path output is
truncated to the code length, checked against the original PCM and the
most likely valid candidate wins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bp import DecoderConfig, OriginalCode, OwnSyndrome, TannerGraph, _stop_structure, build_tanner, decode_batch
from .code import AffineSubcode, LinearCode, SubcodePcm, correlation, enumerate_cosets, verify_cover
from .gf2 import BitMatrix
from .sspcm import SspcmResult, build_search_space, build_sspcm, lift_with_sets

__all__ = [
    "EnsemblePath",
    "AscedBatch",
    "EnsembleSpec",
    "EnsembleOutcome",
    "BatchOutcome",
    "build_batch",
    "build_ensemble",
    "decode_ensemble",
    "decode_ensemble_batch",
    "tec",
    "tec_shared",
    "batch_covers",
]


@dataclass(frozen=True, eq=False)
class EnsemblePath:
    graph: TannerGraph
    syndrome: np.ndarray
    cfg: DecoderConfig
    n_code: int
    label: str

    def __post_init__(self):
        if self.syndrome.shape != (self.graph.n_cn,):
            raise ValueError("path syndrome length must equal the check count of its graph")
        if self.graph.n_vn < self.n_code:
            raise ValueError("decoding graph is shorter than the code")


@dataclass(frozen=True, eq=False)
class AscedBatch:
    """Linear subcode plus its ``2^delta - 1`` strictly affine cosets, decoded on one graph.

    ``avn_sets`` lists the column set ``T`` of each auxiliary variable of the
    decoding PCM (empty when the stacked subcode PCM is used directly).
    """

    subcode: SubcodePcm
    decoding_h: BitMatrix
    cosets: tuple[AffineSubcode, ...]
    paths: tuple[EnsemblePath, ...]
    avn_sets: tuple[tuple[int, ...], ...] = ()
    sspcm: Optional[SspcmResult] = None

    @property
    def delta(self) -> int:
        return self.subcode.delta


@dataclass(frozen=True, eq=False)
class EnsembleSpec:
    batches: tuple[AscedBatch, ...]
    original_h: BitMatrix

    @property
    def paths(self) -> tuple[EnsemblePath, ...]:
        return tuple(p for b in self.batches for p in b.paths)

    @property
    def n_paths(self) -> int:
        return len(self.paths)

    @property
    def n(self) -> int:
        return self.original_h.ncols


def _linear_coset(sub: SubcodePcm) -> AffineSubcode:
    n = sub.n
    return AffineSubcode(sub.stacked, np.zeros(n, dtype=np.uint8), np.zeros(sub.stacked.nrows, dtype=np.uint8), 0)


def build_batch(sub: SubcodePcm, code: LinearCode, cfg: DecoderConfig, optimize: bool = False,
                w_max: int = 2000, s_max: int = 1000, effort: int = 200, rng=None,
                decoding_h: Optional[BitMatrix] = None, avn_sets: Sequence[Sequence[int]] = (),
                label: str = "b") -> AscedBatch:
    """One aSCED batch for ``sub``.

    With ``optimize`` the decoding PCM is the ssPCM-II grown from the dual
    codewords of the stacked subcode PCM.  A ready-made decoding PCM may be
    passed as ``decoding_h`` with its auxiliary column sets instead.  Coset
    syndromes on a PCM with auxiliary columns are ``H* lift(x_a)``.
    """
    if sub.delta < 0:
        raise ValueError("negative rank deficiency")
    result = None
    if decoding_h is None:
        if optimize:
            space = build_search_space(sub.stacked, s_max=s_max, effort=effort, rng=rng)
            result = build_sspcm(space, w_max)
            decoding_h = result.sspcm_2
            avn_sets = result.avn_sets
        else:
            decoding_h = sub.stacked
            avn_sets = ()
    avn_sets = tuple(tuple(int(c) for c in t) for t in avn_sets)
    if decoding_h.ncols != code.n + len(avn_sets):
        raise ValueError("decoding PCM width does not match code length plus auxiliary columns")
    cosets = (_linear_coset(sub),) if sub.delta == 0 else tuple(enumerate_cosets(sub, code))
    graph = build_tanner(decoding_h)
    paths = []
    for c in cosets:
        lifted = lift_with_sets(c.x_a, avn_sets)
        syn = decoding_h.multiply_vector(lifted)
        paths.append(EnsemblePath(graph, syn, cfg, code.n, f"{label}.{c.index}"))
    return AscedBatch(sub, decoding_h, cosets, tuple(paths), avn_sets, result)


def build_ensemble(code: LinearCode, subcodes: Sequence[SubcodePcm], cfg: DecoderConfig,
                   optimize: bool = False, w_max: int = 2000, s_max: int = 1000, effort: int = 200,
                   seed: int = 0) -> EnsembleSpec:
    """Batches for ``subcodes`` sharing one decoder configuration.

    Unless ``cfg`` already stops on the original code, paths stop once their
    truncated estimate is a codeword of ``code``.
    """
    if isinstance(cfg.stop_rule, OwnSyndrome):
        cfg = cfg.with_stop_rule(OriginalCode(code.h))
    seeds = np.random.SeedSequence(seed).spawn(len(subcodes))
    batches = tuple(
        build_batch(sub, code, cfg, optimize, w_max, s_max, effort, np.random.default_rng(sq), label=f"b{i}")
        for i, (sub, sq) in enumerate(zip(subcodes, seeds))
    )
    return EnsembleSpec(batches, code.h)


@dataclass(frozen=True)
class EnsembleOutcome:
    estimate: np.ndarray
    candidates: np.ndarray
    listed: np.ndarray
    winner_path: int
    winner_label: str
    iterations: np.ndarray


@dataclass(frozen=True)
class BatchOutcome:
    """Per-frame ensemble results for ``F`` frames and ``P`` paths."""

    estimate: np.ndarray  # (F, n)
    candidates: np.ndarray  # (F, P, n)
    valid: np.ndarray  # (F, P)
    listed: np.ndarray  # (F, P)
    winner: np.ndarray  # (F,)
    iterations: np.ndarray  # (F, P)


def _run_paths(spec: EnsembleSpec, llr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    frames, n = llr.shape
    paths = spec.paths
    cand = np.empty((frames, len(paths), n), dtype=np.uint8)
    iters = np.empty((frames, len(paths)), dtype=np.int64)
    padded_cache: dict[int, np.ndarray] = {}
    for p, path in enumerate(paths):
        width = path.graph.n_vn
        if width not in padded_cache:
            padded = np.zeros((frames, width))
            padded[:, :n] = llr
            padded_cache[width] = padded
        stop = _stop_structure(path.graph, path.cfg.stop_rule, path.syndrome)
        x, it, _ = decode_batch(path.graph, padded_cache[width], path.cfg, path.syndrome, stop)
        cand[:, p] = x[:, :n]
        iters[:, p] = it
    return cand, iters


def _select(spec: EnsembleSpec, llr: np.ndarray, cand: np.ndarray):
    h = spec.original_h.to_dense().astype(np.int64)
    valid = ~((cand.astype(np.int64) @ h.T) & 1).any(axis=2)
    any_valid = valid.any(axis=1)
    listed = np.where(any_valid[:, None], valid, True)
    corr = correlation(cand, llr[:, None, :])
    corr = np.where(listed, corr, -np.inf)
    winner = np.argmax(corr, axis=1)  # first maximum: lowest path index
    estimate = cand[np.arange(cand.shape[0]), winner]
    return estimate, valid, listed, winner


def decode_ensemble_batch(spec: EnsembleSpec, llr) -> BatchOutcome:
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    if llr.ndim != 2 or llr.shape[1] != spec.n:
        raise ValueError(f"llr must have shape (frames, {spec.n})")
    if spec.n_paths == 0:
        raise ValueError("ensemble has no paths")
    cand, iters = _run_paths(spec, llr)
    estimate, valid, listed, winner = _select(spec, llr, cand)
    return BatchOutcome(estimate, cand, valid, listed, winner, iters)


def decode_ensemble(spec: EnsembleSpec, llr) -> EnsembleOutcome:
    """Run all paths on one LLR vector and apply the ML-in-the-list rule.

    The list holds the valid codewords of the original code if any path
    found one, otherwise every path output.  Ties go to the lowest path index.
    """
    llr = np.asarray(llr, dtype=np.float64)
    if llr.shape != (spec.n,):
        raise ValueError(f"llr length {llr.size} != n={spec.n}")
    out = decode_ensemble_batch(spec, llr[None, :])
    w = int(out.winner[0])
    return EnsembleOutcome(out.estimate[0], out.candidates[0], out.listed[0], w, spec.paths[w].label, out.iterations[0])


def tec(spec: EnsembleSpec) -> int:
    """Total edge count with one decoder per path."""
    return sum(p.graph.n_edges for p in spec.paths)


def tec_shared(spec: EnsembleSpec) -> int:
    """Total edge count with the paths of a batch sharing one graph."""
    return sum(b.decoding_h.weight() for b in spec.batches)


def batch_covers(batch: AscedBatch, code: LinearCode) -> bool:
    """Exhaustively confirm that the batch's cosets cover ``code``."""
    if batch.delta == 0:
        return verify_cover([batch.subcode], code)
    return verify_cover(list(batch.cosets), code)
