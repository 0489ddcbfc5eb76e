"""Flooding belief propagation on Tanner graphs, including the affine-syndrome variant.

A nonzero ``syndrome`` multiplies every outgoing message of check ``j`` by
``(-1)^syndrome[j]``, which turns the decoder for ``C(H_s)`` into a decoder
for the coset ``{x : H_s x = syndrome}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import _kernels
from .gf2 import BitMatrix

__all__ = [
    "TannerGraph",
    "DecoderConfig",
    "DecodeOutcome",
    "OwnSyndrome",
    "OriginalCode",
    "VARIANTS",
    "build_tanner",
    "cn_update_nspa",
    "cn_update_nmsa",
    "decode",
    "decode_batch",
    "flip_llr_prefix",
]

VARIANTS = {"spa": _kernels.SPA, "nspa": _kernels.NSPA, "nmsa": _kernels.NMSA}
DEFAULT_CLAMP = 30.0


@dataclass(frozen=True, eq=False)
class TannerGraph:
    """CSR adjacency of a PCM.

    Edges are numbered CN-major: the edges of check ``j`` are
    ``cn_ptr[j]:cn_ptr[j+1]`` with variable nodes ``cn_vn`` in increasing
    order.  ``vn_edge[vn_ptr[i]:vn_ptr[i+1]]`` lists the edges of variable
    ``i`` in increasing check order.
    """

    h: BitMatrix
    cn_ptr: np.ndarray
    cn_vn: np.ndarray
    vn_ptr: np.ndarray
    vn_edge: np.ndarray

    @property
    def n_vn(self) -> int:
        return self.h.ncols

    @property
    def n_cn(self) -> int:
        return self.h.nrows

    @property
    def n_edges(self) -> int:
        return int(self.cn_vn.shape[0])

    def cn_neighbors(self, j: int) -> np.ndarray:
        return self.cn_vn[self.cn_ptr[j]:self.cn_ptr[j + 1]]

    def vn_neighbors(self, i: int) -> np.ndarray:
        edges = self.vn_edge[self.vn_ptr[i]:self.vn_ptr[i + 1]]
        return np.searchsorted(self.cn_ptr, edges, side="right") - 1


def build_tanner(h: BitMatrix) -> TannerGraph:
    dense = h.to_dense()
    cn_idx, vn_idx = np.nonzero(dense)  # row-major, so already CN-major and sorted
    cn_ptr = np.zeros(h.nrows + 1, dtype=np.int64)
    np.cumsum(np.bincount(cn_idx, minlength=h.nrows), out=cn_ptr[1:])
    order = np.lexsort((cn_idx, vn_idx))
    vn_ptr = np.zeros(h.ncols + 1, dtype=np.int64)
    np.cumsum(np.bincount(vn_idx, minlength=h.ncols), out=vn_ptr[1:])
    return TannerGraph(h, cn_ptr, vn_idx.astype(np.int64), vn_ptr, order.astype(np.int64))


@dataclass(frozen=True)
class OwnSyndrome:
    """Stop once ``H_s x = syndrome`` on the decoding graph itself."""


@dataclass(frozen=True, eq=False)
class OriginalCode:
    """Stop once the first ``h.ncols`` bits form a codeword of ``C(h)``."""

    h: BitMatrix


StopRule = Union[OwnSyndrome, OriginalCode]


@dataclass(frozen=True)
class DecoderConfig:
    variant: str = "nmsa"
    alpha: float = 1.0
    max_iters: int = 20
    stop_rule: StopRule = field(default_factory=OwnSyndrome)
    llr_clamp: float = DEFAULT_CLAMP

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {sorted(VARIANTS)}")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.variant == "spa" and self.alpha != 1.0:
            raise ValueError("SPA requires alpha == 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not self.llr_clamp > 0:
            raise ValueError("llr_clamp must be positive")

    def with_stop_rule(self, rule: StopRule) -> "DecoderConfig":
        return DecoderConfig(self.variant, self.alpha, self.max_iters, rule, self.llr_clamp)


@dataclass(frozen=True)
class DecodeOutcome:
    estimate: np.ndarray
    iterations_used: int
    converged: bool


def _as_messages(incoming) -> np.ndarray:
    arr = np.ascontiguousarray(incoming, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("a check node update needs at least two incoming messages")
    return arr


def cn_update_nspa(incoming, alpha: float = 1.0, clamp: float = DEFAULT_CLAMP) -> np.ndarray:
    """Extrinsic outputs ``alpha * 2 atanh(prod_{u != t} tanh(incoming[u] / 2))``."""
    arr = _as_messages(incoming)
    out = np.empty_like(arr)
    _kernels.cn_nspa(arr, out, float(alpha), 0, float(clamp), np.empty((2, arr.size)))
    return out


def cn_update_nmsa(incoming, alpha: float = 1.0, clamp: float = DEFAULT_CLAMP) -> np.ndarray:
    """Extrinsic outputs ``alpha * prod sign * min |.|`` over the other edges; sign(0) = +1."""
    arr = _as_messages(incoming)
    out = np.empty_like(arr)
    _kernels.cn_nmsa(arr, out, float(alpha), 0, float(clamp))
    return out


def _stop_structure(graph: TannerGraph, rule: StopRule, syndrome: np.ndarray):
    if isinstance(rule, OwnSyndrome):
        return graph.cn_ptr, graph.cn_vn, syndrome
    if isinstance(rule, OriginalCode):
        if rule.h.ncols > graph.n_vn:
            raise ValueError("stop-rule PCM is longer than the decoding graph")
        stop = build_tanner(rule.h)
        return stop.cn_ptr, stop.cn_vn, np.zeros(rule.h.nrows, dtype=np.uint8)
    raise TypeError(f"unsupported stop rule {rule!r}")


def decode_batch(graph: TannerGraph, llr, cfg: DecoderConfig, syndrome=None,
                 stop=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Decode each row of a ``(frames, n_vn)`` LLR array.

    Returns ``(estimates uint8 (frames, n_vn), iterations int64, converged bool)``.
    ``stop`` optionally supplies a precomputed stop structure (see
    ``_stop_structure``) so hot loops avoid rebuilding it.
    """
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    if llr.ndim != 2 or llr.shape[1] != graph.n_vn:
        raise ValueError(f"llr must have shape (frames, {graph.n_vn}), got {llr.shape}")
    if syndrome is None:
        syndrome = np.zeros(graph.n_cn, dtype=np.uint8)
    syndrome = np.ascontiguousarray(syndrome, dtype=np.uint8)
    if syndrome.shape != (graph.n_cn,):
        raise ValueError(f"syndrome length {syndrome.size} != n_cn={graph.n_cn}")
    if stop is None:
        stop = _stop_structure(graph, cfg.stop_rule, syndrome)
    frames = llr.shape[0]
    out_x = np.empty((frames, graph.n_vn), dtype=np.uint8)
    out_it = np.empty(frames, dtype=np.int64)
    out_conv = np.empty(frames, dtype=np.bool_)
    _kernels.bp_decode_batch(
        graph.cn_ptr, graph.cn_vn, graph.vn_ptr, graph.vn_edge, syndrome,
        VARIANTS[cfg.variant], float(cfg.alpha), int(cfg.max_iters), float(cfg.llr_clamp),
        stop[0], stop[1], stop[2], llr, out_x, out_it, out_conv,
    )
    return out_x, out_it, out_conv


def decode(graph: TannerGraph, llr, cfg: DecoderConfig, syndrome=None) -> DecodeOutcome:
    llr = np.asarray(llr, dtype=np.float64)
    if llr.shape != (graph.n_vn,):
        raise ValueError(f"llr length {llr.size} != n_vn={graph.n_vn}")
    x, it, conv = decode_batch(graph, llr[None, :], cfg, syndrome)
    return DecodeOutcome(x[0], int(it[0]), bool(conv[0]))


def flip_llr_prefix(llr, offset) -> np.ndarray:
    """Negate ``llr`` on the support of ``offset`` (last axis)."""
    llr = np.asarray(llr, dtype=np.float64)
    offset = np.asarray(offset)
    if llr.shape[-1] != offset.shape[-1]:
        raise ValueError("llr and offset lengths differ")
    return np.where(offset.astype(bool), -llr, llr)
