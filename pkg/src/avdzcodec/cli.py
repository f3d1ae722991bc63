"""Command-line front end: encode, decode, bench, kernel-dump, corpus.

Exit codes: 0 success, 1 usage error (bad arguments or parameters), 2 data
error (unreadable or unsupported input, corrupt stream, failed scorer).
"""
from __future__ import annotations

import argparse
import logging
import re
import shlex
import subprocess
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import __version__
from .audio import read_wav, segsnr, write_wav
from .bench import DEFAULT_VARIANTS, benchmark, parse_variant, to_csv
from .codec import CODERS, CodecConfig, decode_samples, encode_samples, make_quadruple, stream_rate
from .corpus import write_clip, write_corpus
from .embedded import RECONSTRUCTIONS
from .filterbank import KernelSpec
from .pquant import PquantParams

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    """Bad command-line arguments or codec parameters."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_rate(text: str) -> float | None:
    """``variable`` or a positive bit/s value, optionally with a ``k`` suffix."""
    if text.lower() == "variable":
        return None
    m = re.fullmatch(r"(\d+(?:\.\d+)?)([kK]?)", text)
    if not m:
        raise argparse.ArgumentTypeError(f"rate must be bit/s or 'variable', got {text!r}")
    rate = float(m.group(1)) * (1000 if m.group(2) else 1)
    if rate <= 0:
        raise argparse.ArgumentTypeError("rate must be positive")
    return rate


def parse_kernel(name: str, order: int | None) -> tuple[str, int]:
    """Kernel family and order from ``sav``, ``sav<N>`` or ``d4``."""
    if name == "d4":
        return "d4", 4
    m = re.fullmatch(r"sav(\d*)", name)
    if not m:
        raise UsageError(f"unknown kernel {name!r}; use sav, sav<N> or d4")
    named = int(m.group(1)) if m.group(1) else None
    if named is not None and order is not None and named != order:
        raise UsageError(f"--kernel {name} conflicts with --order {order}")
    return "sav", named or order or KernelSpec().order


def _add_kernel_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kernel", default="sav8", help="sav, sav<N> or d4 (default sav8)")
    p.add_argument("--order", type=int, default=None, help="sav kernel order N (even, >= 4)")
    p.add_argument("--beta", type=float, default=KernelSpec().beta, help="sav roll-off (default 0.168)")


def _add_quant_args(p: argparse.ArgumentParser) -> None:
    d = PquantParams()
    for name in ("alpha", "e1", "e2", "e3", "e4"):
        p.add_argument(f"--{name}", type=float, default=getattr(d, name),
                       help=f"perceptual quantizer parameter (default {getattr(d, name)})")
    p.add_argument("--uniform", action="store_true",
                   help="use the 7-bit uniform quantizer instead of the perceptual one")


def _kernel(args) -> tuple[str, KernelSpec]:
    try:
        kernel, order = parse_kernel(args.kernel, args.order)
        return kernel, KernelSpec(order, args.beta) if kernel == "sav" else KernelSpec()
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _config(args, coder: str = "avdz", rate: float | None = None) -> CodecConfig:
    kernel, spec = _kernel(args)
    try:
        params = PquantParams(args.alpha, args.e1, args.e2, args.e3, args.e4)
        return CodecConfig(coder, rate, params, kernel, spec, not args.uniform)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_encode(args) -> int:
    config = _config(args, args.coder, args.rate)
    samples = read_wav(args.input)
    stats = Counter()
    data = encode_samples(samples, config, stats)
    Path(args.output).write_bytes(data)
    mode = "variable rate" if config.rate is None else f"target {config.rate:.0f} bit/s"
    print(f"{args.output}: {stats['frames']} frames, {len(data)} bytes, "
          f"{stream_rate(data):.1f} bit/s ({config.coder}, {mode})")
    if stats["clipped"]:
        print(f"warning: {stats['clipped']} coefficients saturated in the quantizer", file=sys.stderr)
    return EXIT_OK


def cmd_decode(args) -> int:
    data = Path(args.input).read_bytes()
    samples = decode_samples(data, args.reconstruction)
    write_wav(args.output, samples)
    msg = f"{args.output}: {len(samples)} samples, {stream_rate(data):.1f} bit/s"
    if args.reference:
        ref = read_wav(args.reference)
        n = min(len(ref), len(samples))
        msg += f", SEGSNR {segsnr(ref[:n], np.clip(samples[:n], -1, 1)):.2f} dB"
    print(msg)
    if args.score_cmd:
        if not args.reference:
            raise UsageError("--score-cmd needs --reference")
        return run_scorer(args.score_cmd, args.reference, args.output)
    return EXIT_OK


def run_scorer(template: str, reference, degraded) -> int:
    """Run an external quality scorer (e.g. a PESQ binary) and echo its output.

    ``{ref}`` and ``{deg}`` in ``template`` are replaced by the file paths.
    """
    argv = [a.format(ref=reference, deg=degraded) for a in shlex.split(template)]
    try:
        res = subprocess.run(argv, capture_output=True, text=True, check=False)
    except OSError as exc:
        print(f"error: cannot run scorer: {exc}", file=sys.stderr)
        return EXIT_DATA
    sys.stdout.write(res.stdout)
    if res.returncode:
        sys.stderr.write(res.stderr)
        print(f"error: scorer exited with status {res.returncode}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def cmd_bench(args) -> int:
    variants = tuple(v.strip() for v in args.coders.split(",") if v.strip())
    try:
        for v in variants:
            parse_variant(v)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not Path(args.directory).is_dir():
        raise FileNotFoundError(f"{args.directory}: not a directory")
    rows = benchmark(args.directory, variants, _config(args), args.repeats)
    text = to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
        print(f"{args.out}: {len(rows)} rows")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_kernel_dump(args) -> int:
    kernel, spec = _kernel(args)
    quad = make_quadruple(kernel, spec)
    lines = ["# d4 analysis low-pass taps" if kernel == "d4"
             else f"# {spec.name} analysis low-pass taps, beta={spec.beta}"]
    lines += [f"{t:.17g}" for t in quad.analysis_lo]
    if args.all:
        for label in ("analysis_hi", "synthesis_lo", "synthesis_hi"):
            lines.append(f"# {label}")
            lines += [f"{t:.17g}" for t in getattr(quad, label)]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_corpus(args) -> int:
    paths = write_corpus(args.directory, args.files, args.seconds)
    if args.clip:
        paths.append(write_clip(args.clip))
    for p in paths:
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="avdzcodec", description="Wavelet-packet speech codec with zero-tree re-encoders.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("encode", help="WAV -> compressed stream")
    e.add_argument("input")
    e.add_argument("output")
    e.add_argument("--coder", default="avdz", choices=list(CODERS))
    e.add_argument("--rate", type=parse_rate, default=None, metavar="BIT/S|variable",
                   help="fixed target rate (e.g. 32000 or 32k); default variable")
    _add_quant_args(e)
    _add_kernel_args(e)
    e.set_defaults(func=cmd_encode)

    d = sub.add_parser("decode", help="compressed stream -> WAV")
    d.add_argument("input")
    d.add_argument("output")
    d.add_argument("--reconstruction", default="floor", choices=RECONSTRUCTIONS,
                   help="magnitude estimate for partially received coefficients")
    d.add_argument("--reference", help="original WAV; report SEGSNR against it")
    d.add_argument("--score-cmd", help="external scorer, e.g. 'pesq +16000 {ref} {deg}'")
    d.set_defaults(func=cmd_decode)

    b = sub.add_parser("bench", help="compare re-encoders over a directory of WAVs")
    b.add_argument("directory")
    b.add_argument("--out", help="CSV output path (default stdout)")
    b.add_argument("--coders", default=",".join(DEFAULT_VARIANTS),
                   help="comma-separated variants; suffix -u7 for the 7-bit uniform quantizer")
    b.add_argument("--repeats", type=int, default=5, help="timing runs per coder (median)")
    _add_quant_args(b)
    _add_kernel_args(b)
    b.set_defaults(func=cmd_bench)

    k = sub.add_parser("kernel-dump", help="print filter taps")
    _add_kernel_args(k)
    k.add_argument("--all", action="store_true", help="also print the other three filters")
    k.add_argument("--out", help="write to a file instead of stdout")
    k.set_defaults(func=cmd_kernel_dump)

    c = sub.add_parser("corpus", help="write the synthetic speech corpus")
    c.add_argument("directory")
    c.add_argument("--files", type=int, default=16)
    c.add_argument("--seconds", type=float, default=4.0)
    c.add_argument("--clip", help="also write the 10-second test clip to this path")
    c.set_defaults(func=cmd_corpus)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
