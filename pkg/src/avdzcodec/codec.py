"""End-to-end frame pipeline: WPT → perceptual quantizer → zero-tree re-encoder.

The quantized integer map is the only lossy step; every re-encoder is
lossless on it, so a variable-rate stream decodes to exactly
``synthesize(dequantize(quantize(analyze(frame))))``. Fixed-rate streams are
the same frames with their payloads truncated by the one-frame-buffer rate
controller.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import avdz, ezw, spiht
from .bitstream import (FRAME_SECONDS, FrameHeader, FrameStream, RateBudget, StreamInfo,
                        read_stream, truncate_to_budget, write_stream)
from .embedded import Encoded
from .filterbank import FilterQuadruple, KernelSpec, daubechies4, sav_quadruple
from .pquant import BitAllocation, PquantParams, allocate_bits, dequantize, quantize
from .subband import FRAME_SIZE, SAMPLE_RATE, analyze, synthesize

UNIFORM_BITS = 7


@dataclass(frozen=True)
class Coder:
    name: str
    label: str
    encode: Callable[[np.ndarray], Encoded]
    decode: Callable[..., np.ndarray]  # (bits, last_step_level, ordering, recon)


def _ezw(variant):
    return (lambda m: ezw.ezw_encode(m, variant),
            lambda bits, level, ordering=(), recon="floor":
            ezw.ezw_decode(bits, level, variant, ordering, recon))


def _spiht(variant):
    return (lambda m: spiht.spiht_encode(m, variant),
            lambda bits, level, ordering=(), recon="floor":
            spiht.spiht_decode(bits, level, variant, ordering, recon))


CODERS: dict[str, Coder] = {
    "ezw": Coder("ezw", "EZW", *_ezw("baseline")),
    "spiht": Coder("spiht", "SPIHT", *_spiht("baseline")),
    "mezw": Coder("mezw", "MEZW", *_ezw("modified")),
    "mspiht": Coder("mspiht", "MSPIHT", *_spiht("merged")),
    "spiht-ordered": Coder("spiht-ordered", "SPIHT-ORD", *_spiht("ordered")),
    "spiht-modo": Coder("spiht-modo", "SPIHT-MODO", *_spiht("modifiedO")),
    "avdz": Coder("avdz", "AVDZ",
                  avdz.avdz_encode,
                  lambda bits, level, ordering=(), recon="floor":
                  avdz.avdz_decode(bits, level, ordering, recon=recon)),
}
# comparison order of the benchmark tables
TABLE_CODERS = ("ezw", "spiht", "mezw", "mspiht", "avdz")
KERNELS = ("sav", "d4")


def get_coder(name: str) -> Coder:
    try:
        return CODERS[name]
    except KeyError:
        raise ValueError(f"unknown coder {name!r}; choose from {', '.join(CODERS)}") from None


@dataclass(frozen=True)
class CodecConfig:
    coder: str = "avdz"
    rate: float | None = None  # bit/s; None means variable rate
    params: PquantParams = field(default_factory=PquantParams)
    kernel: str = "sav"
    kernel_spec: KernelSpec = field(default_factory=KernelSpec)
    perceptual: bool = True

    def __post_init__(self):
        get_coder(self.coder)
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}; choose from {KERNELS}")
        if self.rate is not None and self.rate <= 0:
            raise ValueError("rate must be positive")

    def quadruple(self) -> FilterQuadruple:
        return make_quadruple(self.kernel, self.kernel_spec)

    def stream_info(self, pad: int = 0) -> StreamInfo:
        # a zero beta marks the Daubechies reference kernel
        order, beta = ((4, 0.0) if self.kernel == "d4"
                       else (self.kernel_spec.order, self.kernel_spec.beta))
        return StreamInfo(SAMPLE_RATE, FRAME_SIZE, order, beta, self.perceptual, pad)


def make_quadruple(kernel: str = "sav", spec: KernelSpec | None = None) -> FilterQuadruple:
    if kernel == "d4":
        return daubechies4()
    if kernel == "sav":
        return sav_quadruple(spec)
    raise ValueError(f"unknown kernel {kernel!r}")


def quadruple_from_info(info: StreamInfo) -> FilterQuadruple:
    if info.beta == 0:
        return daubechies4()
    return sav_quadruple(KernelSpec(info.kernel_order, info.beta))


def split_frames(samples) -> tuple[np.ndarray, int]:
    """Zero-pad to whole frames; returns (frames x FRAME_SIZE, pad length)."""
    x = np.asarray(samples, dtype=float)
    pad = -len(x) % FRAME_SIZE
    x = np.concatenate([x, np.zeros(pad)])
    return x.reshape(-1, FRAME_SIZE), pad


def quantize_frame(frame, quad: FilterQuadruple, params: PquantParams | None = None,
                   perceptual: bool = True, stats: Counter | None = None
                   ) -> tuple[np.ndarray, BitAllocation]:
    """Integer coefficient map and allocation of one frame.

    ``stats``, when given, accumulates ``frames`` and ``clipped`` (saturated
    coefficients).
    """
    coeffs = analyze(frame, quad)
    alloc = allocate_bits(coeffs, params) if perceptual else BitAllocation.uniform(UNIFORM_BITS)
    qmap, clipped = quantize(coeffs, alloc, return_clipped=True)
    if stats is not None:
        stats["frames"] += 1
        stats["clipped"] += clipped
    return qmap, alloc


def encode_map(qmap, alloc: BitAllocation, coder: str, perceptual: bool = True) -> FrameStream:
    enc = get_coder(coder).encode(qmap)
    header = FrameHeader(coder, enc.last_step_level, alloc if perceptual else None, enc.ordering)
    return FrameStream(header, enc.bits)


def decode_map(frame: FrameStream, recon: str = "floor") -> np.ndarray:
    h = frame.header
    return get_coder(h.coder).decode(frame.payload, h.last_step_level, h.ordering, recon)


def encode_frame(samples, config: CodecConfig = CodecConfig(),
                 quad: FilterQuadruple | None = None, stats: Counter | None = None) -> FrameStream:
    quad = quad or config.quadruple()
    qmap, alloc = quantize_frame(samples, quad, config.params, config.perceptual, stats)
    return encode_map(qmap, alloc, config.coder, config.perceptual)


def decode_frame(frame: FrameStream, quad: FilterQuadruple, perceptual: bool = True,
                 recon: str = "floor") -> np.ndarray:
    qmap = decode_map(frame, recon)
    if frame.header.last_step_level == 0:
        return np.zeros(FRAME_SIZE)
    alloc = frame.header.alloc if perceptual else BitAllocation.uniform(UNIFORM_BITS)
    return synthesize(dequantize(qmap, alloc), quad)


def apply_rate(frames: list[FrameStream], rate: float, perceptual: bool = True) -> list[FrameStream]:
    """Truncate a frame sequence to a fixed rate with a one-frame carry buffer."""
    budget = RateBudget(rate).frame_bits
    carry = 0
    out = []
    for frame in frames:
        cut, carry = truncate_to_budget(frame, budget, carry, perceptual)
        out.append(cut)
    return out


def encode_samples(samples, config: CodecConfig = CodecConfig(),
                   stats: Counter | None = None) -> bytes:
    quad = config.quadruple()
    blocks, pad = split_frames(samples)
    frames = [encode_frame(b, config, quad, stats) for b in blocks]
    if config.rate is not None:
        frames = apply_rate(frames, config.rate, config.perceptual)
    return write_stream(config.stream_info(pad), frames)


def decode_samples(data: bytes, recon: str = "floor") -> np.ndarray:
    info, frames = read_stream(data)
    if info.sample_rate != SAMPLE_RATE or info.frame_size != FRAME_SIZE:
        raise ValueError(f"unsupported stream geometry {info.sample_rate} Hz / {info.frame_size}")
    quad = quadruple_from_info(info)
    out = np.concatenate([decode_frame(f, quad, info.perceptual, recon) for f in frames]
                         or [np.zeros(0)])
    return out[:len(out) - info.pad]


def reference_samples(samples, config: CodecConfig = CodecConfig()) -> np.ndarray:
    """Quantizer-only path that bypasses the re-encoder and the bitstream."""
    quad = config.quadruple()
    blocks, pad = split_frames(samples)
    out = []
    for b in blocks:
        qmap, alloc = quantize_frame(b, quad, config.params, config.perceptual)
        out.append(synthesize(dequantize(qmap, alloc), quad))
    out = np.concatenate(out or [np.zeros(0)])
    return out[:len(out) - pad]


def stream_rate(data: bytes) -> float:
    """Realized bit/s of a stream over its framed duration."""
    n_frames = StreamInfo.from_bytes(data).n_frames
    return 8 * len(data) / (n_frames * FRAME_SECONDS) if n_frames else 0.0
