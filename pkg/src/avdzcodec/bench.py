"""Re-encoder comparison harness: average bit-rate, SEGSNR and coding time.

For every WAV file the transform and quantizer run once; each coder then
re-encodes the same integer maps, so rates and times compare the
re-encoders alone. Rates count the whole variable-rate stream (frame
headers and side information included) over the framed duration. Times are
the median over ``repeats`` runs of encoding (or decoding) all frames of the
file.
"""
from __future__ import annotations

import csv
import io
import logging
import statistics
import time
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .audio import WavFormatError, read_wav, segsnr
from .bitstream import FRAME_SECONDS, StreamInfo, write_stream
from .codec import (TABLE_CODERS, CodecConfig, decode_map, encode_map, get_coder,
                    quantize_frame, split_frames)
from .pquant import BitAllocation, dequantize
from .subband import synthesize

log = logging.getLogger(__name__)

UNIFORM_SUFFIX = "-u7"
DEFAULT_VARIANTS = TABLE_CODERS + ("avdz" + UNIFORM_SUFFIX,)
AVERAGE = "AVERAGE"


@dataclass
class MetricsRow:
    file: str
    coder: str
    bit_rate: float
    segsnr_db: float
    encode_s: float
    decode_s: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def parse_variant(variant: str) -> tuple[str, bool]:
    """Coder name and perceptual flag of a variant such as ``avdz`` or ``avdz-u7``."""
    perceptual = not variant.endswith(UNIFORM_SUFFIX)
    name = variant if perceptual else variant[:-len(UNIFORM_SUFFIX)]
    get_coder(name)
    return name, perceptual


def _median_time(fn, repeats: int):
    times, result = [], None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), result


def bench_signal(samples, name: str, variants=DEFAULT_VARIANTS, config: CodecConfig = CodecConfig(),
                 repeats: int = 5) -> list[MetricsRow]:
    quad = config.quadruple()
    blocks, pad = split_frames(samples)
    duration = len(blocks) * FRAME_SECONDS
    prepared: dict[bool, list] = {}
    rows = []
    for variant in variants:
        coder, perceptual = parse_variant(variant)
        if perceptual not in prepared:
            prepared[perceptual] = [quantize_frame(b, quad, config.params, perceptual) for b in blocks]
        maps = prepared[perceptual]
        enc_s, frames = _median_time(
            lambda: [encode_map(q, a, coder, perceptual) for q, a in maps], repeats)
        dec_s, decoded = _median_time(lambda: [decode_map(f) for f in frames], repeats)
        for (q, _), d in zip(maps, decoded):
            if not np.array_equal(q, d):
                raise AssertionError(f"{variant} is not lossless on {name}")
        stream = write_stream(StreamInfo(perceptual=perceptual, pad=pad), frames)
        alloc_of = (lambda a: a) if perceptual else (lambda a: BitAllocation.uniform(7))
        recon = np.concatenate([synthesize(dequantize(d, alloc_of(a)), quad)
                                for (_, a), d in zip(maps, decoded)])
        x = np.asarray(samples, dtype=float)
        rows.append(MetricsRow(name, variant, 8 * len(stream) / duration,
                               segsnr(x, recon[:len(x)]), enc_s, dec_s))
    return rows


def average_rows(rows: list[MetricsRow], variants) -> list[MetricsRow]:
    out = []
    for v in variants:
        sel = [r for r in rows if r.coder == v]
        if sel:
            out.append(MetricsRow(AVERAGE, v, *(float(np.mean([getattr(r, f) for r in sel]))
                                               for f in ("bit_rate", "segsnr_db", "encode_s", "decode_s"))))
    return out


def benchmark(directory, variants=DEFAULT_VARIANTS, config: CodecConfig = CodecConfig(),
              repeats: int = 5) -> list[MetricsRow]:
    """Per-file, per-variant rows followed by per-variant averages."""
    variants = tuple(variants)
    for v in variants:
        parse_variant(v)
    rows: list[MetricsRow] = []
    for path in sorted(Path(directory).glob("*.wav")):
        try:
            samples = read_wav(path)
        except WavFormatError as exc:
            log.warning("skipping %s", exc)
            continue
        if not len(samples):
            log.warning("skipping %s: no samples", path)
            continue
        rows += bench_signal(samples, path.name, variants, config, repeats)
    return rows + average_rows(rows, variants)


def to_csv(rows: list[MetricsRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MetricsRow.columns())
    for r in rows:
        w.writerow([r.file, r.coder, f"{r.bit_rate:.1f}", f"{r.segsnr_db:.3f}",
                    f"{r.encode_s:.6f}", f"{r.decode_s:.6f}"])
    return buf.getvalue()


def read_csv(text: str) -> list[MetricsRow]:
    reader = csv.DictReader(io.StringIO(text))
    return [MetricsRow(d["file"], d["coder"], float(d["bit_rate"]), float(d["segsnr_db"]),
                       float(d["encode_s"]), float(d["decode_s"])) for d in reader]


def file_table(rows: list[MetricsRow], field: str = "bit_rate") -> dict[str, dict[str, float]]:
    """``{file: {coder: value}}`` for the per-file rows."""
    out: dict[str, dict[str, float]] = {}
    for r in rows:
        if r.file != AVERAGE:
            out.setdefault(r.file, {})[r.coder] = getattr(r, field)
    return out

