"""Command-line harness: codebook tools, file encode/decode, eval sweeps,
oracle checks, and timing benchmarks.

Exit codes: 0 success, 1 runtime or data error, 2 usage error (and the
exhaustive-oracle size guard). All randomness flows from ``--seed``; with
``--stable`` the JSON reports omit timestamps and timing fields so repeated
runs are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import codebooks as cb
from . import quantizer as qz
from .errors import CapacityError, FormatError
from .metrics import CiStat, MelConfig, mean_ci
from .pipeline import (
    CodecRun,
    FrameConfig,
    codec_roundtrip,
    frame_signal,
    overlap_add,
    read_f32,
    read_wav,
    write_f32,
    write_wav,
)
from .synthetic import gaussian_mixture_frames, noise_tone_signal

EVAL_SCHEMA = "rvqbeam-eval-report/1"
BENCH_SCHEMA = "rvqbeam-bench-report/1"

# scalar three-level demo where greedy encoding is suboptimal: greedy yields
# 3.0 (error 0.87) while [1, 1, 0.1] yields 2.1 (error 0.03)
DEMO_INPUT = 2.13
DEMO_LEVELS = ((1.0, 3.0), (0.0, 1.0), (0.0, 0.1))


def demo_codebooks() -> cb.CodebookSet:
    """The scalar suboptimality demo instance used by oracle checks."""
    books = tuple(
        cb.Codebook(level=i + 1, entries=np.asarray(vals, dtype=np.float64)[:, None])
        for i, vals in enumerate(DEMO_LEVELS)
    )
    return cb.CodebookSet(books)


# ---------------------------------------------------------------------------
# report types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalRow:
    strategy: str
    beam_size: int
    search_k: int
    n_q: int
    n: int
    sq_err: CiStat
    l2_err: CiStat
    si_snr: CiStat
    log_mel: CiStat | None
    ms_per_sample: float | None

    def to_dict(self) -> dict:
        def ci(stat):
            if stat is None:
                return None
            return {"mean": stat.mean, "half_width": stat.half_width, "n": stat.n}

        return {
            "strategy": self.strategy,
            "beam_size": self.beam_size,
            "search_k": self.search_k,
            "n_q": self.n_q,
            "n": self.n,
            "sq_err": ci(self.sq_err),
            "l2_err": ci(self.l2_err),
            "si_snr": ci(self.si_snr),
            "log_mel_dist": ci(self.log_mel),
            "pesq": None,
            "stoi": None,
            "nisqa": None,
            "ms_per_sample": self.ms_per_sample,
        }


@dataclass(frozen=True)
class EvalReport:
    meta: dict
    rows: list

    def to_dict(self) -> dict:
        return {"schema": EVAL_SCHEMA, "meta": self.meta, "rows": [r.to_dict() for r in self.rows]}


@dataclass(frozen=True)
class BenchRow:
    beam_size: int
    mode: str
    verified: bool
    ms: CiStat | None

    def to_dict(self) -> dict:
        out = {"beam_size": self.beam_size, "mode": self.mode, "verified": self.verified}
        if self.ms is None:
            out["ms"] = None
        else:
            out["ms"] = {"mean": self.ms.mean, "half_width": self.ms.half_width, "n": self.ms.n}
        return out


@dataclass(frozen=True)
class BenchReport:
    meta: dict
    rows: list

    def to_dict(self) -> dict:
        return {
            "schema": BENCH_SCHEMA,
            "meta": self.meta,
            "rows": [r.to_dict() for r in self.rows],
        }


def _fmt_ci(stat: CiStat | None) -> str:
    if stat is None:
        return "n/a"
    return f"{stat.mean:.4g} ± {stat.half_width:.2g}"


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip(),
        "  ".join("-" * widths[i] for i in range(len(headers))),
    ]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines)


def eval_report_text(report: EvalReport) -> str:
    headers = ["strategy", "B", "k", "n_q", "sq_err", "l2_err", "si_snr_db",
               "mel_dist", "pesq", "stoi", "nisqa", "ms/sample"]
    rows = []
    for r in report.rows:
        ms = "n/a" if r.ms_per_sample is None else f"{r.ms_per_sample:.3g}"
        rows.append([
            r.strategy, str(r.beam_size), str(r.search_k), str(r.n_q),
            _fmt_ci(r.sq_err), _fmt_ci(r.l2_err), _fmt_ci(r.si_snr),
            _fmt_ci(r.log_mel), "n/a", "n/a", "n/a", ms,
        ])
    return _table(headers, rows)


def bench_report_text(report: BenchReport) -> str:
    headers = ["B", "mode", "verified", "ms"]
    rows = [
        [str(r.beam_size), r.mode, "yes" if r.verified else "NO", _fmt_ci(r.ms)]
        for r in report.rows
    ]
    return _table(headers, rows)


def _write_json(path, payload: dict) -> None:
    Path(path).write_bytes((json.dumps(payload, indent=2, sort_keys=True) + "\n").encode())


# ---------------------------------------------------------------------------
# shared argument helpers
# ---------------------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _window_name(text: str) -> str:
    name = text.lower()
    if name in ("hann", "hanning"):
        return "hann"
    if name in ("rect", "rectangular"):
        return "rectangular"
    raise argparse.ArgumentTypeError(f"unknown window {text!r}")


def _resolve_threads(args) -> int | None:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("RVQ_THREADS")
    return int(env) if env else None


def _load_any(path) -> cb.CodebookSet | cb.GroupedCodebookSet:
    p = Path(path)
    if p.is_dir():
        return cb.load_grouped(p)
    return cb.load(p)


def _codebook_desc(books) -> str:
    if isinstance(books, cb.GroupedCodebookSet):
        dims = "+".join(str(d) for d in books.group_dims)
        return f"grouped G={books.num_groups} L={books.num_levels} dims={dims}"
    s = books.uniform_size
    return f"L={books.num_levels} S={s if s is not None else books.sizes} D={books.dim}"


def _read_signal(path, rate_flag: int) -> tuple[np.ndarray, int]:
    p = Path(path)
    if p.suffix.lower() == ".wav":
        return read_wav(p)
    return read_f32(p), rate_flag


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_gen_codebooks(args) -> int:
    books = cb.generate_random(args.seed, args.levels, args.size, args.dim, args.scale)
    cb.save(books, args.output)
    print(f"wrote {args.output} ({_codebook_desc(books)})")
    return 0


def _mean_greedy_sq_err(frames: np.ndarray, books: cb.CodebookSet) -> float:
    errs = [qz.encode_greedy(f, books, books.num_levels).sq_err for f in frames]
    return math.fsum(errs) / len(errs)


def cmd_train(args) -> int:
    raw = read_f32(args.input)
    if raw.size == 0:
        raise ValueError(f"{args.input}: no samples")
    if raw.size % args.dim != 0:
        raise ValueError(
            f"{args.input}: {raw.size} values do not divide into vectors of dim {args.dim}"
        )
    frames = raw.reshape(-1, args.dim)
    trained = cb.train_residual_kmeans(frames, args.levels, args.size, args.iters, args.seed)
    cb.save(trained, args.output)
    baseline = cb.generate_random(args.seed, args.levels, args.size, args.dim)
    print(f"wrote {args.output} ({_codebook_desc(trained)})")
    print(f"mean greedy sq_err on training frames: trained {_mean_greedy_sq_err(frames, trained):.6g}, "
          f"random {_mean_greedy_sq_err(frames, baseline):.6g}")
    return 0


def _strategy_params(args, books) -> tuple[str, int, int, int]:
    n_q = args.n_q if args.n_q is not None else books.num_levels
    if args.greedy:
        return "greedy", 1, 1, n_q
    beam = args.beam
    k = args.search_k if args.search_k is not None else beam
    return "beam", beam, k, n_q


def _encode_vectors(frames, books, strategy, beam, k, n_q, threads):
    if isinstance(books, cb.GroupedCodebookSet):
        params = qz.BeamParams(beam_size=beam, levels=n_q, search_k=k)
        grouped = [qz.encode_grvq(f, books, params) for f in frames]
        return [r for group in grouped for r in group]
    if strategy == "greedy":
        return [qz.encode_greedy(f, books, n_q) for f in frames]
    params = qz.BeamParams(beam_size=beam, levels=n_q, search_k=k)
    return qz.encode_batch(frames, books, params, mode="parallel", threads=threads)


def cmd_encode(args) -> int:
    books = _load_any(args.codebooks)
    dim = books.total_dim if isinstance(books, cb.GroupedCodebookSet) else books.dim
    strategy, beam, k, n_q = _strategy_params(args, books)
    threads = _resolve_threads(args)

    if args.vectors:
        raw = read_f32(args.input)
        if raw.size % dim != 0:
            raise ValueError(
                f"shape mismatch: {args.input} holds {raw.size} values, codebooks need "
                f"vectors of dim {dim}"
            )
        frames = raw.reshape(-1, dim)
    else:
        signal, _ = _read_signal(args.input, args.rate)
        hop = args.hop if args.hop is not None else max(1, dim // 2)
        frames = frame_signal(signal, FrameConfig(frame_len=dim, hop=hop, window=args.window))

    results = _encode_vectors(frames, books, strategy, beam, k, n_q, threads)
    if args.codes_format == "jsonl":
        qz.save_codes_jsonl(results, args.output)
    else:
        qz.save_codes_packed(results, args.output)
    total_err = math.fsum(r.sq_err for r in results)
    print(f"encoded {frames.shape[0]} vectors -> {args.output} "
          f"(strategy {strategy}, B={beam}, k={k}, n_q={n_q}, "
          f"mean sq_err {total_err / max(len(results), 1):.6g})")
    return 0


def cmd_decode(args) -> int:
    books = _load_any(args.codebooks)
    if args.codes_format == "jsonl":
        seqs = qz.load_codes_jsonl(args.codes)
    else:
        seqs = qz.load_codes_packed(args.codes)
    if not seqs:
        raise ValueError(f"{args.codes}: no code records")

    if isinstance(books, cb.GroupedCodebookSet):
        g = books.num_groups
        if len(seqs) % g != 0:
            raise ValueError(
                f"shape mismatch: {len(seqs)} code records do not divide into groups of {g}"
            )
        vectors = np.stack([
            qz.grvq_decode(seqs[i : i + g], books) for i in range(0, len(seqs), g)
        ])
        dim = books.total_dim
    else:
        vectors = np.stack([qz.decode(s, books) for s in seqs])
        dim = books.dim

    if args.vectors:
        write_f32(args.output, vectors.ravel())
        print(f"decoded {vectors.shape[0]} vectors -> {args.output}")
        return 0

    hop = args.hop if args.hop is not None else max(1, dim // 2)
    cfg = FrameConfig(frame_len=dim, hop=hop, window=args.window)
    out_len = args.length if args.length is not None else (vectors.shape[0] - 1) * hop + dim
    signal = overlap_add(vectors, cfg, out_len)
    out = Path(args.output)
    if out.suffix.lower() == ".wav":
        write_wav(out, signal, args.rate, pcm16=args.pcm16)
    else:
        write_f32(out, signal)
    print(f"decoded {vectors.shape[0]} frames -> {args.output} ({out_len} samples)")
    return 0


def _eval_clips(args) -> tuple[list[np.ndarray], int, str]:
    if args.dataset is not None:
        root = Path(args.dataset)
        files = sorted(
            p for p in root.iterdir() if p.suffix.lower() in (".wav", ".f32")
        ) if root.is_dir() else []
        if not files:
            raise ValueError(f"dataset {args.dataset} is empty or not a directory")
        clips = []
        rate = args.rate
        for p in files:
            sig, r = _read_signal(p, args.rate)
            clips.append(sig)
            rate = r
        return clips, rate, f"dir {root} ({len(files)} files)"
    n = args.synthetic
    clips = [
        noise_tone_signal(args.seed + i, args.seconds, args.rate) for i in range(n)
    ]
    return clips, args.rate, f"synthetic n={n} seconds={args.seconds} seed={args.seed}"


def evaluate_clips(
    clips,
    books,
    beams,
    n_qs,
    hop: int,
    window: str,
    sample_rate: int,
    threads: int | None = None,
    stable: bool = False,
    meta: dict | None = None,
) -> EvalReport:
    """Run every (strategy, B, n_q) configuration over the clips and
    aggregate per-clip metrics with 95% confidence half-widths."""
    if not clips:
        raise ValueError("dataset is empty")
    dim = books.total_dim if isinstance(books, cb.GroupedCodebookSet) else books.dim
    frame_cfg = FrameConfig(frame_len=dim, hop=hop, window=window)
    mel_cfg = MelConfig(sample_rate=sample_rate)
    beams = sorted(set(beams) | {1})
    configs = [("greedy", 1, 1, n_q) for n_q in n_qs]
    configs += [("beam", b, b, n_q) for n_q in n_qs for b in beams]

    rows = []
    for strategy, b, k, n_q in configs:
        run = CodecRun(
            codebooks=books, frame_cfg=frame_cfg, n_q=n_q,
            strategy=strategy, beam_size=b, search_k=k,
        )
        sqs, l2s, snrs, mels = [], [], [], []
        start = time.perf_counter()
        for clip in clips:
            _, _, summary = codec_roundtrip(
                clip, run, sample_rate=sample_rate, mel_cfg=mel_cfg,
                threads=threads, parallel=True,
            )
            sqs.append(summary.mean_sq_err)
            l2s.append(summary.mean_l2_err)
            snrs.append(summary.si_snr_db)
            if summary.log_mel_dist is not None:
                mels.append(summary.log_mel_dist)
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        rows.append(EvalRow(
            strategy=strategy, beam_size=b, search_k=k, n_q=n_q, n=len(clips),
            sq_err=mean_ci(sqs), l2_err=mean_ci(l2s), si_snr=mean_ci(snrs),
            log_mel=mean_ci(mels) if len(mels) == len(clips) else None,
            ms_per_sample=None if stable else elapsed_ms / len(clips),
        ))
    rows.sort(key=lambda r: (r.n_q, r.strategy, r.beam_size, r.search_k))
    full_meta = dict(meta or {})
    full_meta.update({
        "n_samples": len(clips), "sample_rate": sample_rate,
        "frame_hop": hop, "window": window,
    })
    if not stable:
        full_meta["generated_at"] = datetime.now(timezone.utc).isoformat()
    return EvalReport(meta=full_meta, rows=rows)


def cmd_eval(args) -> int:
    books = _load_any(args.codebooks)
    clips, rate, desc = _eval_clips(args)
    n_qs = args.n_q if args.n_q is not None else [books.num_levels]
    for n_q in n_qs:
        if not 1 <= n_q <= books.num_levels:
            raise ValueError(f"n_q {n_q} out of range [1, {books.num_levels}]")
    report = evaluate_clips(
        clips, books, args.beams, n_qs,
        hop=args.hop if args.hop is not None else max(1, (
            books.total_dim if isinstance(books, cb.GroupedCodebookSet) else books.dim
        ) // 2),
        window=args.window, sample_rate=rate,
        threads=_resolve_threads(args), stable=args.stable,
        meta={"seed": args.seed, "codebooks": _codebook_desc(books), "dataset": desc},
    )
    print(eval_report_text(report))
    if args.json is not None:
        _write_json(args.json, report.to_dict())
        print(f"wrote {args.json}")
    return 0


def _results_equal(a: list, b: list) -> bool:
    if len(a) != len(b):
        return False
    for ra, rb in zip(a, b):
        if ra.codes.indices != rb.codes.indices or ra.sq_err != rb.sq_err:
            return False
        if not np.array_equal(ra.quantized, rb.quantized):
            return False
    return True


def cmd_bench(args) -> int:
    books = _load_any(args.codebooks)
    if isinstance(books, cb.GroupedCodebookSet):
        raise ValueError("bench expects a flat codebook set")
    n_q = args.n_q if args.n_q is not None else books.num_levels
    frames = gaussian_mixture_frames(args.seed, args.samples, books.dim)
    threads = _resolve_threads(args)

    rows = []
    for b in args.beams:
        params = qz.BeamParams(beam_size=b, levels=n_q)
        seq = qz.encode_batch(frames, books, params, mode="sequential")
        par = qz.encode_batch(frames, books, params, mode="parallel", threads=threads)
        if not _results_equal(seq, par):
            print(f"error: parallel output differs from sequential at B={b}", file=sys.stderr)
            return 1
        for mode in ("sequential", "parallel"):
            if args.stable:
                rows.append(BenchRow(beam_size=b, mode=mode, verified=True, ms=None))
                continue
            times = []
            for _ in range(args.repeats):
                t0 = time.perf_counter()
                qz.encode_batch(frames, books, params, mode=mode, threads=threads)
                times.append((time.perf_counter() - t0) * 1000.0)
            rows.append(BenchRow(beam_size=b, mode=mode, verified=True, ms=mean_ci(times)))

    meta = {
        "seed": args.seed, "codebooks": _codebook_desc(books), "n_q": n_q,
        "samples": args.samples, "repeats": args.repeats,
    }
    if not args.stable:
        meta["generated_at"] = datetime.now(timezone.utc).isoformat()
    report = BenchReport(meta=meta, rows=rows)
    print(bench_report_text(report))
    if args.json is not None:
        _write_json(args.json, report.to_dict())
        print(f"wrote {args.json}")
    return 0


def cmd_oracle_check(args) -> int:
    failures: dict[str, list[int]] = {"bound": [], "greedy_equiv": [], "lossless": [], "demo": []}
    checks = 0

    def instance(i: int):
        if i == 0:
            return np.asarray([DEMO_INPUT]), demo_codebooks()
        books = cb.generate_random(args.seed + i, args.levels, args.size, args.dim)
        x = np.random.default_rng((args.seed + i) ^ 0x5EED).standard_normal(args.dim)
        return x, books

    try:
        for i in range(args.instances):
            x, books = instance(i)
            n_q = books.num_levels
            oracle = qz.encode_exhaustive(x, books, n_q)
            if i == 0 and abs(oracle.l2_err - 0.03) > 1e-9:
                failures["demo"].append(i)
            for b in args.beams:
                for k in args.ks:
                    res = qz.encode_beam(x, books, qz.BeamParams(beam_size=b, levels=n_q, search_k=k))
                    checks += 1
                    if res.sq_err < oracle.sq_err:
                        failures["bound"].append(i)
            greedy = qz.encode_greedy(x, books, n_q)
            beam11 = qz.encode_beam(x, books, qz.BeamParams(beam_size=1, levels=n_q, search_k=1))
            checks += 1
            if not (
                greedy.codes.indices == beam11.codes.indices
                and greedy.sq_err == beam11.sq_err
                and np.array_equal(greedy.quantized, beam11.quantized)
            ):
                failures["greedy_equiv"].append(i)
            sizes = books.sizes
            lossless_b = math.prod(sizes[: n_q - 1]) if n_q > 1 else 1
            lossless = qz.encode_beam(
                x, books, qz.BeamParams(beam_size=lossless_b, levels=n_q, search_k=max(sizes))
            )
            checks += 1
            if lossless.sq_err != oracle.sq_err:
                failures["lossless"].append(i)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    labels = {
        "bound": "beam error >= oracle error",
        "greedy_equiv": "beam(B=1,k=1) == greedy (bit-exact)",
        "lossless": "full-width beam == oracle error",
        "demo": "demo instance oracle error 0.03",
    }
    ok = True
    for key, label in labels.items():
        bad = failures[key]
        if bad:
            ok = False
            print(f"FAIL  {label}: violated on instance seeds {[args.seed + i for i in bad]}")
        else:
            print(f"PASS  {label}")
    print(f"{'PASS' if ok else 'FAIL'}: {args.instances} instances, {checks} checks")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: RVQ_THREADS or library default)")
    common.add_argument("--stable", action="store_true",
                        help="omit timestamps and timings so reports are byte-stable")

    parser = argparse.ArgumentParser(prog="rvq", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-codebooks", parents=[common],
                       help="write seeded random codebooks to an .rvqc file")
    p.add_argument("-L", "--levels", type=int, required=True)
    p.add_argument("-S", "--size", type=int, required=True)
    p.add_argument("-D", "--dim", type=int, required=True)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen_codebooks)

    p = sub.add_parser("train", parents=[common],
                       help="fit residual k-means codebooks on raw .f32 vectors")
    p.add_argument("--input", required=True, help="raw float32 sample vectors")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("-L", "--levels", type=int, required=True)
    p.add_argument("-S", "--size", type=int, required=True)
    p.add_argument("--iters", type=int, default=25)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_train)

    enc_dec = argparse.ArgumentParser(add_help=False)
    enc_dec.add_argument("--codebooks", required=True, help=".rvqc file or grouped-set directory")
    enc_dec.add_argument("--vectors", action="store_true",
                         help="treat data as raw vectors instead of audio frames")
    enc_dec.add_argument("--hop", type=int, default=None, help="frame hop (default dim//2)")
    enc_dec.add_argument("--window", type=_window_name, default="hann",
                         help="hann or rectangular")
    enc_dec.add_argument("--rate", type=int, default=24000,
                         help="sample rate for raw .f32 audio")
    enc_dec.add_argument("--codes-format", choices=("packed", "jsonl"), default="packed")

    p = sub.add_parser("encode", parents=[common, enc_dec],
                       help="quantize an audio or raw-vector file to a code stream")
    p.add_argument("--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--greedy", action="store_true", help="use the greedy encoder")
    p.add_argument("--beam", type=int, default=1, help="beam size B")
    p.add_argument("--search-k", type=int, default=None, help="per-node search width (default B)")
    p.add_argument("--n-q", type=int, default=None, help="levels to encode (default all)")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", parents=[common, enc_dec],
                       help="reconstruct audio or vectors from a code stream")
    p.add_argument("--codes", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--length", type=int, default=None, help="output sample count")
    p.add_argument("--pcm16", action="store_true", help="write PCM16 WAV instead of float32")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("eval", parents=[common],
                       help="metric sweep over beam sizes and level counts")
    p.add_argument("--codebooks", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--synthetic", type=int, help="number of synthetic clips")
    group.add_argument("--dataset", help="directory of .wav/.f32 clips")
    p.add_argument("--seconds", type=float, default=1.0, help="synthetic clip length")
    p.add_argument("--rate", type=int, default=24000)
    p.add_argument("--beams", type=_int_list, default=[1, 4, 8, 16])
    p.add_argument("--n-q", type=_int_list, default=None,
                   help="comma-separated level counts (default: all levels)")
    p.add_argument("--hop", type=int, default=None)
    p.add_argument("--window", type=_window_name, default="hann")
    p.add_argument("--json", default=None, help="also write the report as JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("oracle-check", parents=[common],
                       help="verify beam/greedy/oracle orderings on small instances")
    p.add_argument("--instances", type=int, default=500)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--size", type=int, default=5)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--beams", type=_int_list, default=[1, 2, 4, 8])
    p.add_argument("--ks", type=_int_list, default=[1, 2, 5])
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("bench", parents=[common],
                       help="time sequential vs parallel batch encoding")
    p.add_argument("--codebooks", required=True)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--beams", type=_int_list, default=[1, 4, 16])
    p.add_argument("--repeats", type=int, default=100)
    p.add_argument("--n-q", type=int, default=None)
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (ValueError, FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
