"""Command line: subcode generation, ssPCM construction, ensembles, simulation and checks.

Exit codes: 0 success, 1 usage error, 2 data or format error, 3 search or
budget exhaustion.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io as pio
from .bp import VARIANTS, DecoderConfig, OriginalCode
from .channel import MLFrameDecoder, SimConfig, run_fer, run_ler_allzero, snr_sweep
from .code import ExhaustiveLimitError, SearchExhaustedError, append_rows, from_pcm, sample_independent_row
from .ensemble import EnsembleSpec, batch_covers, build_batch
from .gf2 import BitMatrix, rank
from .sspcm import build_search_space, build_sspcm, count_4cycles, structural_report

__all__ = ["main", "build_parser", "load_ensemble", "EXIT_OK", "EXIT_USAGE", "EXIT_DATA", "EXIT_BUDGET"]

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class BudgetError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="asced", description="Affine subcode ensemble decoding toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-subcode", help="append random independent rows to a PCM")
    g.add_argument("--pcm", required=True)
    g.add_argument("--dc", required=True, type=_int_list, help="row weight, or comma list drawn per row")
    g.add_argument("--rows", type=int, default=1)
    g.add_argument("--seed", required=True, type=int)
    g.add_argument("--out", required=True)

    b = sub.add_parser("build-sspcm", help="build ssPCM-I/II from low-weight dual codewords")
    b.add_argument("--pcm", required=True)
    b.add_argument("--smax", type=int, default=1000)
    b.add_argument("--wmax", type=int, default=2000)
    b.add_argument("--effort", type=int, default=200)
    b.add_argument("--seed", required=True, type=int)
    b.add_argument("--stage", type=int, choices=(1, 2), default=2)
    b.add_argument("--out", required=True)
    b.add_argument("--report")

    c = sub.add_parser("cycle-stats", help="structural statistics of a PCM")
    c.add_argument("--pcm", required=True)

    e = sub.add_parser("build-ensemble", help="assemble an ensemble spec from subcode specs")
    e.add_argument("--code-pcm", required=True)
    e.add_argument("--batches", required=True, nargs="+")
    e.add_argument("--decoder", choices=sorted(VARIANTS), default="nmsa")
    e.add_argument("--alpha", type=float, default=None)
    e.add_argument("--iters", type=int, default=20)
    e.add_argument("--optimize", action="store_true")
    e.add_argument("--wmax", type=int, default=2000)
    e.add_argument("--smax", type=int, default=1000)
    e.add_argument("--effort", type=int, default=200)
    e.add_argument("--seed", type=int, help="required with --optimize")
    e.add_argument("--out", required=True)

    s = sub.add_parser("simulate", help="Monte-Carlo FER/LER over an SNR sweep")
    s.add_argument("--spec", required=True)
    s.add_argument("--snr", required=True)
    s.add_argument("--min-fe", type=int, default=200)
    s.add_argument("--max-frames", type=int, default=1_000_000)
    s.add_argument("--seed", required=True, type=int)
    s.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    s.add_argument("--chunk", type=int, default=1000)
    s.add_argument("--allzero", action="store_true", help="send the all-zero codeword")
    s.add_argument("--linear-only", action="store_true", help="with --allzero, decode linear paths only")
    s.add_argument("--out")

    v = sub.add_parser("cover-check", help="exhaustively check that each batch covers the code")
    v.add_argument("--code-pcm", required=True)
    v.add_argument("--spec", required=True)

    m = sub.add_parser("ml-oracle", help="exhaustive ML FER over an SNR sweep")
    m.add_argument("--code-pcm", required=True)
    m.add_argument("--snr", required=True)
    m.add_argument("--min-fe", type=int, default=200)
    m.add_argument("--max-frames", type=int, default=1_000_000)
    m.add_argument("--seed", required=True, type=int)
    m.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    m.add_argument("--out")
    return p


def _echo(args) -> None:
    print(json.dumps({k: v for k, v in vars(args).items()}, sort_keys=True), file=sys.stderr)


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _code_for(h: BitMatrix):
    try:
        return from_pcm(h)
    except ValueError as exc:
        raise pio.PcmFormatError(str(exc)) from exc


# commands ---------------------------------------------------------------

def cmd_gen_subcode(args) -> int:
    h = pio.read_pcm(args.pcm)
    code = _code_for(h)
    if args.rows < 1:
        raise UsageError("--rows must be at least 1")
    rng = np.random.default_rng(args.seed)
    rows = []
    current = code
    for _ in range(args.rows):
        d_c = int(rng.choice(args.dc)) if len(args.dc) > 1 else args.dc[0]
        row = sample_independent_row(current, d_c, rng)
        rows.append(row)
        current = append_rows(code, BitMatrix.from_dense(np.stack(rows))).code
    sub = append_rows(code, BitMatrix.from_dense(np.stack(rows)))
    doc = {
        "code_pcm": os.path.relpath(Path(args.pcm).resolve(), Path(args.out).resolve().parent),
        "n": code.n,
        "appended_rows": [pio.bits_to_string(r) for r in rows],
        "row_weights": [int(r.sum()) for r in rows],
        "delta": sub.delta,
        "seed": args.seed,
    }
    pio.dump_json(doc, args.out)
    print(f"delta={sub.delta}", file=sys.stderr)
    return EXIT_OK


def cmd_build_sspcm(args) -> int:
    h = pio.read_pcm(args.pcm)
    space = build_search_space(h, s_max=args.smax, effort=args.effort, rng=np.random.default_rng(args.seed))
    result = build_sspcm(space, args.wmax)
    out_h = result.sspcm_2 if args.stage == 2 else result.sspcm_1
    report = structural_report(result)
    report["search_space"] = {"rows": space.size, "complete": space.complete}
    report["avn_sets"] = [list(t) for t in result.avn_sets]
    if args.report:
        pio.dump_json(report, args.report)
    if out_h is None:
        raise BudgetError("the search space never reached the rank of the input PCM")
    pio.write_pcm(out_h, args.out)
    if not space.complete:
        raise BudgetError("low-weight search ran dry before reaching full rank")
    return EXIT_OK


def cmd_cycle_stats(args) -> int:
    h = pio.read_pcm(args.pcm)
    cycles = count_4cycles(h)
    stats = {
        "rows": h.nrows,
        "cols": h.ncols,
        "rank": rank(h),
        "weight": h.weight(),
        "four_cycles": cycles,
        "girth_at_least_6": cycles == 0,
    }
    print(json.dumps(stats))
    return EXIT_OK


def _decoder_doc(args) -> dict:
    alpha = args.alpha if args.alpha is not None else (1.0 if args.decoder == "spa" else 0.5)
    return {"variant": args.decoder, "alpha": alpha, "max_iters": args.iters, "stop_rule": "original"}


def cmd_build_ensemble(args) -> int:
    if args.optimize and args.seed is None:
        raise UsageError("--optimize requires --seed")
    out = Path(args.out)
    h = pio.read_pcm(args.code_pcm)
    code = _code_for(h)
    decoder = _decoder_doc(args)
    DecoderConfig(decoder["variant"], decoder["alpha"], decoder["max_iters"])
    seeds = np.random.SeedSequence(args.seed or 0).spawn(len(args.batches))
    batches = []
    for i, (path, sq) in enumerate(zip(args.batches, seeds)):
        doc = pio.load_json(path)
        rows = doc.get("appended_rows")
        if not isinstance(rows, list):
            raise pio.PcmFormatError(f"{path} has no appended_rows list")
        entry = {"appended_rows": rows, "decoder": decoder, "optimize": bool(args.optimize)}
        if args.optimize:
            sub = append_rows(code, pio.rows_from_strings(rows, code.n))
            batch_seed = int(sq.generate_state(1)[0])
            space = build_search_space(sub.stacked, args.smax, args.effort, np.random.default_rng(batch_seed))
            if not space.complete:
                raise BudgetError(f"batch {i}: low-weight search ran dry before reaching full rank")
            result = build_sspcm(space, args.wmax)
            pcm_name = f"{out.stem}.b{i}.alist"
            pio.write_pcm(result.sspcm_2, out.parent / pcm_name)
            entry["sspcm"] = {"pcm_file": pcm_name, "avn_sets": [list(t) for t in result.avn_sets]}
            entry.update(w_max=args.wmax, s_max=args.smax, effort=args.effort, seed=batch_seed)
        batches.append(entry)
    code_ref = os.path.relpath(Path(args.code_pcm).resolve(), out.resolve().parent)
    pio.dump_json({"code_pcm": code_ref, "batches": batches}, out)
    return EXIT_OK


def load_ensemble(path) -> tuple:
    """Read an ensemble JSON into ``(code, EnsembleSpec)``; relative files resolve against the JSON."""
    path = Path(path)
    doc = pio.load_json(path)
    base = path.parent
    try:
        code = _code_for(pio.read_pcm(base / doc["code_pcm"]))
        batches = []
        for i, entry in enumerate(doc["batches"]):
            sub = append_rows(code, pio.rows_from_strings(entry["appended_rows"], code.n))
            dec = entry.get("decoder", {})
            cfg = DecoderConfig(dec.get("variant", "nmsa"), float(dec.get("alpha", 0.5)),
                                int(dec.get("max_iters", 20)), OriginalCode(code.h))
            ss = entry.get("sspcm")
            if ss is not None:
                batches.append(build_batch(sub, code, cfg, decoding_h=pio.read_pcm(base / ss["pcm_file"]),
                                           avn_sets=ss["avn_sets"], label=f"b{i}"))
            elif entry.get("optimize"):
                rng = np.random.default_rng(entry.get("seed", 0))
                batches.append(build_batch(sub, code, cfg, True, int(entry.get("w_max", 2000)),
                                           int(entry.get("s_max", 1000)), int(entry.get("effort", 200)),
                                           rng, label=f"b{i}"))
            else:
                batches.append(build_batch(sub, code, cfg, label=f"b{i}"))
    except (KeyError, TypeError) as exc:
        raise pio.PcmFormatError(f"{path}: malformed ensemble spec ({exc})") from exc
    return code, EnsembleSpec(tuple(batches), code.h)


def cmd_simulate(args) -> int:
    code, spec = load_ensemble(args.spec)
    if args.linear_only and not args.allzero:
        raise UsageError("--linear-only requires --allzero")
    sim = SimConfig(tuple(snr_sweep(args.snr)), args.min_fe, args.max_frames, args.seed,
                    "allzero" if args.allzero else "random", args.chunk, args.threads)
    result = run_ler_allzero(spec, code, sim) if args.linear_only else run_fer(spec, code, sim)
    _emit(result.to_csv(), args.out)
    return EXIT_OK


def cmd_cover_check(args) -> int:
    code = _code_for(pio.read_pcm(args.code_pcm))
    _, spec = load_ensemble(args.spec)
    if spec.n != code.n:
        raise pio.PcmFormatError("ensemble and code lengths differ")
    per_batch = [batch_covers(b, code) for b in spec.batches]
    print(json.dumps({"covered": all(per_batch), "batches": per_batch}))
    return EXIT_OK


def cmd_ml_oracle(args) -> int:
    code = _code_for(pio.read_pcm(args.code_pcm))
    sim = SimConfig(tuple(snr_sweep(args.snr)), args.min_fe, args.max_frames, args.seed, threads=args.threads)
    _emit(run_fer(MLFrameDecoder(code), code, sim).to_csv(), args.out)
    return EXIT_OK


COMMANDS = {
    "gen-subcode": cmd_gen_subcode,
    "build-sspcm": cmd_build_sspcm,
    "cycle-stats": cmd_cycle_stats,
    "build-ensemble": cmd_build_ensemble,
    "simulate": cmd_simulate,
    "cover-check": cmd_cover_check,
    "ml-oracle": cmd_ml_oracle,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _echo(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (BudgetError, SearchExhaustedError) as exc:
        print(f"asced: budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (pio.PcmFormatError, ExhaustiveLimitError, ValueError) as exc:
        print(f"asced: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
