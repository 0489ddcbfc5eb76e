"""Acceptance suite: one recorded pass/fail line per criterion (see the summary section)."""

import functools
import itertools
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from asced.bp import DecoderConfig, OriginalCode, build_tanner, decode_batch, flip_llr_prefix
from asced.channel import ChannelPoint, SimConfig, _draw_chunk, frame_rng, run_fer, transmit
from asced.code import SubcodePcm, append_rows, brute_force_ml, enumerate_cosets, from_pcm, membership, \
    sample_independent_row, verify_cover
from asced.ensemble import EnsembleSpec, _select, build_batch, build_ensemble, decode_ensemble_batch, tec
from asced.families import bch_pcm, hamming_pcm
from asced.gf2 import BitMatrix, in_row_space, rank
from asced.io import write_pcm
from asced.sspcm import build_search_space, build_sspcm, count_4cycles, eliminate_4cycles, lift_with_sets

VARIANTS = (("spa", 1.0), ("nspa", 0.75), ("nmsa", 0.75))


def _random_subcode(code, delta, rng):
    stacked, rows = code.h, []
    while len(rows) < delta:
        row = int(rng.integers(1, 1 << code.n))
        if not in_row_space(row, stacked):
            rows.append(row)
            stacked = stacked.vstack(BitMatrix(code.n, (row,)))
    return append_rows(code, BitMatrix(code.n, tuple(rows)))


def _all_words(n):
    return np.array(list(itertools.product([0, 1], repeat=n)), dtype=np.uint8)


def _in_code_rows(h: BitMatrix, words) -> np.ndarray:
    return ~((words.astype(np.int64) @ h.to_dense().T.astype(np.int64)) & 1).any(axis=1)


@functools.lru_cache(maxsize=None)
def _bch63_full_sspcm():
    code = from_pcm(bch_pcm(6, 6))
    space = build_search_space(code.h, s_max=1000, effort=200, rng=5)
    return code, space, build_sspcm(space, 2000)


# 1 -------------------------------------------------------------------------

def test_criterion_1_affine_bp_equivalence(acceptance):
    start = time.perf_counter()
    frames = 100_000
    bad = []
    for name, code in (("hamming", from_pcm(hamming_pcm(3))), ("bch15", from_pcm(bch_pcm(4, 2)))):
        rng = np.random.default_rng(101)
        sub = _random_subcode(code, 1, rng)
        coset = enumerate_cosets(sub, code)[1]
        graph = build_tanner(sub.stacked)
        llr = rng.normal(1.0, 2.5, (frames, code.n))
        flipped = flip_llr_prefix(llr, coset.x_a)
        for variant, alpha in VARIANTS:
            cfg = DecoderConfig(variant, alpha, 20)
            x0, i0, c0 = decode_batch(graph, llr, cfg)
            x1, i1, c1 = decode_batch(graph, flipped, cfg, coset.s_a)
            same = (x1 == (x0 ^ coset.x_a)).all(axis=1) & (i0 == i1) & (c0 == c1)
            if not same.all():
                bad.append(f"{name}/{variant}: {int((~same).sum())} mismatches")
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 60
    acceptance("1", ok, f"2 codes x 3 variants x {frames} frames bit-exact, {elapsed:.1f}s" if ok
               else f"{bad}, {elapsed:.1f}s")
    assert ok


# 2 -------------------------------------------------------------------------

def test_criterion_2_paired_coset_fer(acceptance):
    code = from_pcm(bch_pcm(4, 2))
    rng = np.random.default_rng(202)
    sub = _random_subcode(code, 1, rng)
    coset = enumerate_cosets(sub, code)[1]
    graph = build_tanner(sub.stacked)
    point = ChannelPoint(4.0, code.rate)
    sd = math.sqrt(point.sigma2)
    frames = 20_000
    g = sub.code.g.to_dense().astype(np.int64)
    u = rng.integers(0, 2, (frames, g.shape[0]))
    x = ((u @ g) & 1).astype(np.uint8)
    z = x ^ coset.x_a
    noise = rng.normal(0.0, sd, (frames, code.n))
    mirror = np.where(coset.x_a.astype(bool), -noise, noise)
    llr_lin = 2.0 * (1.0 - 2.0 * x + noise) / point.sigma2
    llr_aff = 2.0 * (1.0 - 2.0 * z + mirror) / point.sigma2
    paired = np.array_equal(llr_aff, flip_llr_prefix(llr_lin, coset.x_a))
    counts = []
    for variant, alpha in VARIANTS:
        cfg = DecoderConfig(variant, alpha, 20)
        e_lin = int((decode_batch(graph, llr_lin, cfg)[0] != x).any(axis=1).sum())
        e_aff = int((decode_batch(graph, llr_aff, cfg, coset.s_a)[0] != z).any(axis=1).sum())
        counts.append((variant, e_lin, e_aff))
    ok = paired and all(a == b for _, a, b in counts) and all(a > 0 for _, a, _ in counts)
    acceptance("2", ok, f"{frames} paired frames at 4 dB, errors (linear, affine): "
               + ", ".join(f"{v} {a}/{b}" for v, a, b in counts))
    assert ok


# 3 -------------------------------------------------------------------------

def test_criterion_3_coset_covering(acceptance):
    start = time.perf_counter()
    checked = 0
    failures = []
    for name, code in (("hamming", from_pcm(hamming_pcm(3))), ("bch15", from_pcm(bch_pcm(4, 2)))):
        rng = np.random.default_rng(303)
        for delta in (1, 2, 3):
            for trial in range(50):
                sub = _random_subcode(code, delta, rng)
                cosets = enumerate_cosets(sub, code)
                table = membership(cosets, code)
                if len(cosets) != 2 ** delta or not (table.sum(axis=0) == 1).all():
                    failures.append((name, delta, trial, "partition"))
                    continue
                if not verify_cover(cosets, code):
                    failures.append((name, delta, trial, "cover"))
                # every proper subset misses some codeword
                for mask in range(1, (1 << len(cosets)) - 1):
                    chosen = [c for b, c in enumerate(cosets) if (mask >> b) & 1]
                    if verify_cover(chosen, code):
                        failures.append((name, delta, trial, f"subset {mask:b} covers"))
                checked += 1
    elapsed = time.perf_counter() - start
    ok = not failures
    acceptance("3", ok, f"{checked} subcodes, all proper subsets rejected, {elapsed:.1f}s" if ok else str(failures[:3]))
    assert ok


# 4 -------------------------------------------------------------------------

def test_criterion_4_ml_attainability(acceptance):
    code = from_pcm(hamming_pcm(3))
    singleton = append_rows(code, BitMatrix.identity(code.n))
    spec = build_ensemble(code, [singleton], DecoderConfig("nmsa", 0.75, 20))
    sim = SimConfig((3.0,), 1, 10_000, 404)
    x, llr = _draw_chunk(code, ChannelPoint(3.0, code.rate), sim, 0, 0, 10_000)
    est = decode_ensemble_batch(spec, llr).estimate
    ml = np.stack([brute_force_ml(code, l) for l in llr])
    agree = int((est == ml).all(axis=1).sum())
    ok = spec.n_paths == 16 and agree == 10_000
    acceptance("4", ok, f"{agree}/10000 frames equal exhaustive ML at 3 dB, {spec.n_paths} singleton cosets")
    assert ok


# 5 -------------------------------------------------------------------------

def test_criterion_5_cycle_elimination_soundness(acceptance):
    rng = np.random.default_rng(505)
    failures = []
    for trial in range(1000):
        n = int(rng.integers(3, 13))
        m = int(rng.integers(2, 7))
        r_set = np.sort(rng.choice(m, int(rng.integers(2, m + 1)), replace=False))
        t_set = np.sort(rng.choice(n, int(rng.integers(2, n + 1)), replace=False))
        dense = rng.integers(0, 2, (m, n)).astype(np.uint8)
        dense[np.ix_(r_set, t_set)] = 1
        h = BitMatrix.from_dense(dense)
        star = eliminate_4cycles(h, r_set, t_set)
        if star.to_dense()[np.ix_(r_set, t_set)].any():
            failures.append((trial, "block"))
            continue
        words = _all_words(n)
        lifted = lift_with_sets(words, [tuple(t_set)])
        if not np.array_equal(_in_code_rows(h, words), _in_code_rows(star, lifted)):
            failures.append((trial, "lift"))
        # the lift is onto: both codes have the same dimension
        if (n + 1 - rank(star)) != (n - rank(h)):
            failures.append((trial, "dimension"))
    ok = not failures
    acceptance("5", ok, "1000 random instances, lift bijection exhaustive, (R,T) block cleared" if ok
               else str(failures[:3]))
    assert ok


# 6 -------------------------------------------------------------------------

def _contract(result, h_sub, words=None, rng=None, samples=10_000):
    """Projection soundness of ssPCM-I and internal 4-cycle freedom of every block."""
    problems = []
    for i, block in enumerate(result.applied_blocks):
        if block.pcrb is not None and count_4cycles(BitMatrix(block.avn_col + 1, block.replacement)):
            problems.append(f"block {i} has 4-cycles")
    h1 = result.sspcm_1
    if h1 is None:
        return ["stage I not reached"]
    sets = result.avn_sets[: result.avn_count_at(1)]
    n = h_sub.ncols
    if words is None:
        sub_code = from_pcm(h_sub)
        g = sub_code.g.to_dense().astype(np.int64)
        cw = ((rng.integers(0, 2, (samples, g.shape[0])) @ g) & 1).astype(np.uint8)
        junk = rng.integers(0, 2, (samples, n)).astype(np.uint8)
        junk = junk[~_in_code_rows(h_sub, junk)]
        if not _in_code_rows(h1, lift_with_sets(cw, sets)).all():
            problems.append("a codeword lift violates ssPCM-I")
        if _in_code_rows(h1, lift_with_sets(junk, sets)).any():
            problems.append("a non-codeword lift satisfies ssPCM-I")
    else:
        if not np.array_equal(_in_code_rows(h_sub, words), _in_code_rows(h1, lift_with_sets(words, sets))):
            problems.append("projection mismatch")
    if h1.ncols - rank(h1) != n - rank(h_sub):
        problems.append("ssPCM-I code dimension differs")
    return problems


def test_criterion_6_sspcm_structural_contract(acceptance):
    problems = []
    summary = []
    bch15 = from_pcm(bch_pcm(4, 2))
    words15 = _all_words(15)
    rng = np.random.default_rng(606)
    row15 = sample_independent_row(bch15, 6, rng)
    for delta, h in ((0, bch15.h), (1, append_rows(bch15, BitMatrix.from_dense(row15[None])).stacked)):
        result = build_sspcm(build_search_space(h, rng=1), 2000)
        problems += [f"bch15 delta={delta}: {p}" for p in _contract(result, h, words=words15)]
        summary.append(f"bch15/d{delta} {result.sspcm_2.shape[0]}x{result.sspcm_2.shape[1]}")
    code63, _, full = _bch63_full_sspcm()
    problems += [f"bch63 delta=0: {p}" for p in _contract(full, code63.h, rng=rng)]
    summary.append(f"bch63/d0 {full.sspcm_2.shape[0]}x{full.sspcm_2.shape[1]}")
    row63 = sample_independent_row(code63, 6, np.random.default_rng(3))
    h63 = append_rows(code63, BitMatrix.from_dense(row63[None])).stacked
    sub_result = build_sspcm(build_search_space(h63, rng=5), 2000)
    problems += [f"bch63 delta=1: {p}" for p in _contract(sub_result, h63, rng=rng)]
    summary.append(f"bch63/d1 {sub_result.sspcm_2.shape[0]}x{sub_result.sspcm_2.shape[1]}")
    ok = not problems
    acceptance("6", ok, ", ".join(summary) if ok else "; ".join(problems[:4]))
    assert ok


# 7 -------------------------------------------------------------------------

def _q(x):
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def test_criterion_7a_uncoded_ber(acceptance):
    bits = 1_000_000
    rows = []
    ok = True
    for snr in (0.0, 2.0, 4.0, 6.0):
        point = ChannelPoint(snr, 1.0)
        rng = np.random.default_rng(int(snr * 10) + 707)
        x = rng.integers(0, 2, bits).astype(np.uint8)
        hard = (transmit(x, point, rng) < 0).astype(np.uint8)
        ber = float((hard != x).mean())
        p = _q(math.sqrt(2.0 * 10 ** (snr / 10)))
        sigma = math.sqrt(p * (1 - p) / bits)
        ok &= abs(ber - p) <= 3 * sigma
        rows.append(f"{snr:g}dB {ber:.3e} vs {p:.3e}")
    acceptance("7a", ok, "; ".join(rows))
    assert ok


@pytest.mark.slow
def test_criterion_7b_standalone_sspcm_fer(acceptance):
    start = time.perf_counter()
    code, space, result = _bch63_full_sspcm()
    build = time.perf_counter() - start
    sub0 = SubcodePcm(code.h, BitMatrix(code.n, ()), code.h, 0)
    batch = build_batch(sub0, code, DecoderConfig("nmsa", 0.5, 20), decoding_h=result.sspcm_2,
                        avn_sets=result.avn_sets)
    sim = SimConfig((4.0,), 200, 400_000, 1, "allzero", chunk=2000)
    point = run_fer(EnsembleSpec((batch,), code.h), code, sim).points[0]
    elapsed = time.perf_counter() - start
    ok = point.frame_errors >= 200 and point.fer <= 2e-2
    lo, hi = point.ci95
    acceptance("7b", ok, f"ssPCM-II {result.sspcm_2.shape[0]}x{result.sspcm_2.shape[1]} weight "
               f"{result.sspcm_2.weight()}, FER {point.fer:.3e} [{lo:.2e}, {hi:.2e}] from "
               f"{point.frame_errors}/{point.frames} at 4 dB, build {build:.0f}s, total {elapsed:.0f}s")
    assert ok


@pytest.mark.slow
def test_criterion_7c_ensemble_gain(acceptance):
    start = time.perf_counter()
    code = from_pcm(bch_pcm(6, 6))
    rng = np.random.default_rng(11)
    subs = []
    for _ in range(4):
        row = sample_independent_row(code, int(rng.choice([6, 8, 10])), rng)
        subs.append(append_rows(code, BitMatrix.from_dense(row[None])))
    spec = build_ensemble(code, subs, DecoderConfig("nmsa", 0.5, 20), optimize=True, seed=3)
    build = time.perf_counter() - start
    point = ChannelPoint(4.0, code.rate)
    sim = SimConfig((4.0,), 1, 10**6, 9)
    chunk, max_frames = 2000, 200_000
    ens_err = 0
    batch_err = np.zeros(len(spec.batches), dtype=np.int64)
    path_err = np.zeros(spec.n_paths, dtype=np.int64)
    frames = 0
    while frames < max_frames and batch_err.min() < 200:
        x, llr = _draw_chunk(code, point, sim, 0, frames, chunk)
        out = decode_ensemble_batch(spec, llr)
        ens_err += int((out.estimate != x).any(axis=1).sum())
        path_err += (out.candidates != x[:, None, :]).any(axis=2).sum(axis=0)
        first = 0
        for b, batch in enumerate(spec.batches):
            width = len(batch.paths)
            est = _select(spec, llr, out.candidates[:, first:first + width])[0]
            batch_err[b] += int((est != x).any(axis=1).sum())
            first += width
        frames += chunk
    fer = ens_err / frames
    best_batch = batch_err.min() / frames
    best_path = path_err.min() / frames
    ratio = best_batch / fer if fer else math.inf
    elapsed = time.perf_counter() - start
    ok = ratio >= 1.5 and batch_err.min() >= 200
    acceptance("7c", ok, f"aSCED-8 FER {fer:.3e} ({ens_err}/{frames}), best batch {best_batch:.3e} "
               f"({batch_err.min()} errors), gain {ratio:.2f}, best lone path {best_path:.3e}, "
               f"TEC {tec(spec)}, build {build:.0f}s, total {elapsed:.0f}s")
    assert ok


# 8 -------------------------------------------------------------------------

def test_criterion_8_mbbp_degeneracy(acceptance):
    code = from_pcm(bch_pcm(6, 6))
    rng = np.random.default_rng(808)
    subs = []
    for _ in range(4):
        picks = rng.choice(code.h.nrows, 3, replace=False)
        row = 0
        for p in picks:
            row ^= code.h.rows[p]
        subs.append(append_rows(code, BitMatrix(code.n, (row,))))
    cfg = DecoderConfig("nmsa", 0.5, 20)
    spec = build_ensemble(code, subs, cfg)
    x, llr = _draw_chunk(code, ChannelPoint(3.0, code.rate), SimConfig((3.0,), 1, 1000, 808), 0, 0, 1000)
    out = decode_ensemble_batch(spec, llr)
    stop_cfg = cfg.with_stop_rule(OriginalCode(code.h))
    exact = all(s.delta == 0 for s in subs) and spec.n_paths == 4
    for p, sub in enumerate(subs):
        xs, its, _ = decode_batch(build_tanner(sub.stacked), llr, stop_cfg)
        exact &= np.array_equal(out.candidates[:, p], xs) and np.array_equal(out.iterations[:, p], its)
    # selection over standalone outputs reproduces the ensemble decision
    exact &= np.array_equal(_select(spec, llr, out.candidates)[0], out.estimate)
    acceptance("8", exact, "4 delta=0 paths on BCH(63,30), 1000 frames, outputs and iterations bit-exact")
    assert exact


# 9 -------------------------------------------------------------------------

def test_criterion_9_simulate_determinism(acceptance, tmp_path):
    code = from_pcm(bch_pcm(4, 2))
    write_pcm(code.h, tmp_path / "b15.alist")
    cli = [sys.executable, "-m", "asced.cli"]
    subprocess.run(cli + ["gen-subcode", "--pcm", "b15.alist", "--dc", "4,6", "--rows", "1", "--seed", "9",
                          "--out", "s.json"], cwd=tmp_path, check=True, capture_output=True)
    subprocess.run(cli + ["build-ensemble", "--code-pcm", "b15.alist", "--batches", "s.json", "s.json",
                          "--optimize", "--seed", "9", "--wmax", "400", "--out", "e.json"],
                   cwd=tmp_path, check=True, capture_output=True)
    outputs = []
    for threads, tag in ((1, "a"), (4, "b"), (1, "c"), (4, "d")):
        subprocess.run(cli + ["simulate", "--spec", "e.json", "--snr", "1:1:4", "--min-fe", "50", "--seed", "7",
                              "--chunk", "500", "--threads", str(threads), "--out", f"r{tag}.csv"],
                       cwd=tmp_path, check=True, capture_output=True)
        outputs.append((tmp_path / f"r{tag}.csv").read_bytes())
    ok = all(o == outputs[0] for o in outputs) and outputs[0].count(b"\n") == 5
    acceptance("9", ok, "threads 1 and 4, two runs each, byte-identical CSV" if ok else "CSV differs")
    assert ok
