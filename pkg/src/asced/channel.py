"""BI-AWGN channel with BPSK and a seeded Monte-Carlo FER/LER harness.

Every frame draws from its own generator seeded by ``(seed, point, frame)``,
and frames are processed in fixed-size chunks whose counters are reduced in
chunk order, so results do not depend on the number of worker threads.
"""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np
from scipy.stats import binomtest

from .code import LinearCode, brute_force_ml, correlation
from .ensemble import EnsembleSpec, decode_ensemble_batch

__all__ = [
    "ChannelPoint",
    "SimConfig",
    "PointResult",
    "SimResult",
    "FrameDecoder",
    "EnsembleFrameDecoder",
    "MLFrameDecoder",
    "LinearPathsDecoder",
    "transmit",
    "frame_rng",
    "snr_sweep",
    "wilson_interval",
    "run_fer",
    "run_ler_allzero",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("snr_db", "frames", "frame_errors", "list_errors", "fer", "ler", "mean_iters", "ci95_lo", "ci95_hi")


@dataclass(frozen=True)
class ChannelPoint:
    ebn0_db: float
    rate: float

    def __post_init__(self):
        if not 0 < self.rate <= 1:
            raise ValueError("rate must lie in (0, 1]")

    @property
    def sigma2(self) -> float:
        return 1.0 / (2.0 * self.rate * 10.0 ** (self.ebn0_db / 10.0))


def transmit(x, point: ChannelPoint, rng) -> np.ndarray:
    """BPSK ``1 - 2x`` plus Gaussian noise; returns LLRs ``2 y / sigma2``."""
    x = np.asarray(x)
    rng = np.random.default_rng(rng)
    y = 1.0 - 2.0 * x + rng.normal(0.0, np.sqrt(point.sigma2), size=x.shape)
    return 2.0 * y / point.sigma2


def frame_rng(seed: int, point: int, frame: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(point, frame)))


def snr_sweep(text: str) -> list[float]:
    """Parse ``start:step:stop`` (stop included within 1e-9) or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValueError(f"SNR sweep must be start:step:stop, got {text!r}")
    start, step, stop = (float(p) for p in parts)
    if step <= 0 or stop < start - 1e-9:
        raise ValueError(f"invalid SNR sweep {text!r}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def wilson_interval(errors: int, frames: int) -> tuple[float, float]:
    if frames == 0:
        return 0.0, 1.0
    ci = binomtest(errors, frames).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


class FrameDecoder(Protocol):
    """Anything that decodes a ``(frames, n)`` LLR array.

    ``decode_frames`` returns ``(estimate (F, n), candidates (F, P, n),
    listed (F, P), iterations (F,))``.
    """

    n: int

    def decode_frames(self, llr: np.ndarray): ...


class EnsembleFrameDecoder:
    def __init__(self, spec: EnsembleSpec):
        self.spec = spec
        self.n = spec.n

    def decode_frames(self, llr):
        out = decode_ensemble_batch(self.spec, llr)
        return out.estimate, out.candidates, out.listed, out.iterations.mean(axis=1)


class MLFrameDecoder:
    """Exhaustive ML over all codewords; one-element list."""

    def __init__(self, code: LinearCode):
        self.code = code
        self.n = code.n
        words = code.codewords()
        self._words = words[np.lexsort(words.T[::-1])]

    def decode_frames(self, llr):
        llr = np.asarray(llr, dtype=np.float64)
        corr = correlation(self._words[None, :, :], llr[:, None, :])
        est = self._words[np.argmax(corr, axis=1)]
        return est, est[:, None, :], np.ones((llr.shape[0], 1), dtype=bool), np.zeros(llr.shape[0])


class LinearPathsDecoder:
    """Only the linear-subcode path of each batch; the list is every path output."""

    def __init__(self, spec: EnsembleSpec):
        self.n = spec.n
        linear = tuple(b.paths[0] for b in spec.batches)
        self.spec = EnsembleSpec(
            tuple(type(b)(b.subcode, b.decoding_h, b.cosets[:1], (p,), b.avn_sets, b.sspcm)
                  for b, p in zip(spec.batches, linear)),
            spec.original_h,
        )

    def decode_frames(self, llr):
        out = decode_ensemble_batch(self.spec, llr)
        listed = np.ones_like(out.listed)
        return out.estimate, out.candidates, listed, out.iterations.mean(axis=1)


@dataclass(frozen=True)
class SimConfig:
    points: tuple[float, ...]
    min_frame_errors: int = 200
    max_frames: int = 1_000_000
    seed: int = 0
    tx_mode: str = "random"
    chunk: int = 1000
    threads: int = 1

    def __post_init__(self):
        if self.min_frame_errors < 1:
            raise ValueError("min_frame_errors must be at least 1")
        if self.max_frames < self.min_frame_errors:
            raise ValueError("max_frames must be at least min_frame_errors")
        if self.tx_mode not in ("random", "allzero"):
            raise ValueError("tx_mode must be 'random' or 'allzero'")
        if self.chunk < 1 or self.threads < 1:
            raise ValueError("chunk and threads must be positive")


@dataclass(frozen=True)
class PointResult:
    snr_db: float
    frames: int
    frame_errors: int
    list_errors: int
    iterations_sum: float

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    @property
    def ler(self) -> float:
        return self.list_errors / self.frames if self.frames else 0.0

    @property
    def mean_iters(self) -> float:
        return self.iterations_sum / self.frames if self.frames else 0.0

    @property
    def ci95(self) -> tuple[float, float]:
        return wilson_interval(self.frame_errors, self.frames)


@dataclass(frozen=True)
class SimResult:
    points: tuple[PointResult, ...] = field(default_factory=tuple)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for p in self.points:
            lo, hi = p.ci95
            buf.write(f"{p.snr_db:.4f},{p.frames},{p.frame_errors},{p.list_errors},{p.fer:.6e},{p.ler:.6e},"
                      f"{p.mean_iters:.4f},{lo:.6e},{hi:.6e}\n")
        return buf.getvalue()


def _draw_chunk(code: LinearCode, point: ChannelPoint, sim: SimConfig, p_idx: int, start: int, count: int):
    n, k = code.n, code.k
    g = code.g.to_dense().astype(np.int64)
    x = np.zeros((count, n), dtype=np.uint8)
    noise = np.empty((count, n))
    sd = np.sqrt(point.sigma2)
    for f in range(count):
        rng = frame_rng(sim.seed, p_idx, start + f)
        if sim.tx_mode == "random":
            u = rng.integers(0, 2, size=k)
            x[f] = (u @ g) & 1
        noise[f] = rng.normal(0.0, sd, size=n)
    llr = 2.0 * (1.0 - 2.0 * x + noise) / point.sigma2
    return x, llr


def _run_chunk(decoder: FrameDecoder, code, point, sim, p_idx, start, count):
    x, llr = _draw_chunk(code, point, sim, p_idx, start, count)
    est, cand, listed, iters = decoder.decode_frames(llr)
    frame_err = (est != x).any(axis=1)
    hit = ((cand == x[:, None, :]).all(axis=2) & listed).any(axis=1)
    return int(frame_err.sum()), int((~hit).sum()), float(np.sum(iters))


def _simulate(decoder: FrameDecoder, code: LinearCode, sim: SimConfig) -> SimResult:
    if decoder.n != code.n:
        raise ValueError("decoder and code lengths differ")
    results = []
    pool = ThreadPoolExecutor(sim.threads) if sim.threads > 1 else None
    try:
        for p_idx, snr in enumerate(sim.points):
            point = ChannelPoint(float(snr), code.rate)
            frames = errors = list_errors = 0
            iters = 0.0
            next_start = 0
            done = False
            while not done:
                # launch a window of chunks, reduce strictly in order
                window = []
                for _ in range(sim.threads):
                    if next_start >= sim.max_frames:
                        break
                    count = min(sim.chunk, sim.max_frames - next_start)
                    window.append((next_start, count))
                    next_start += count
                if not window:
                    break
                if pool is None:
                    outs = [_run_chunk(decoder, code, point, sim, p_idx, s, c) for s, c in window]
                else:
                    futs = [pool.submit(_run_chunk, decoder, code, point, sim, p_idx, s, c) for s, c in window]
                    outs = [f.result() for f in futs]
                for (s, c), (fe, le, it) in zip(window, outs):
                    frames += c
                    errors += fe
                    list_errors += le
                    iters += it
                    if errors >= sim.min_frame_errors or frames >= sim.max_frames:
                        done = True
                        break
            results.append(PointResult(float(snr), frames, errors, list_errors, iters))
    finally:
        if pool is not None:
            pool.shutdown()
    return SimResult(tuple(results))


def run_fer(decoder, code: LinearCode, sim: SimConfig) -> SimResult:
    """FER/LER per SNR point until ``min_frame_errors`` or ``max_frames``.

    ``decoder`` is an ``EnsembleSpec`` or any ``FrameDecoder``.  Stopping is
    checked after each chunk.
    """
    if isinstance(decoder, EnsembleSpec):
        decoder = EnsembleFrameDecoder(decoder)
    return _simulate(decoder, code, sim)


def run_ler_allzero(spec: EnsembleSpec, code: LinearCode, sim: SimConfig) -> SimResult:
    """All-zero transmission decoded by the linear-subcode path of each batch only.

    A frame is a list error when no linear path returns the zero word.
    """
    if sim.tx_mode != "allzero":
        raise ValueError("run_ler_allzero requires tx_mode='allzero'")
    return _simulate(LinearPathsDecoder(spec), code, sim)
