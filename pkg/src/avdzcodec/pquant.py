"""Heuristic perceptual bit allocation and uniform scalar quantization."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .subband import SubbandLayout, make_layout

NARROW_BANDS = tuple(range(3, 17))
WIDE_BANDS = (1, 2, 17, 18, 19)
# Bits removed from the 6/7 base allocation in the wide bands.
WIDE_REDUCTION = {1: 2, 2: 1, 17: 1, 18: 3, 19: 2}
# 2-bit side codes of the narrow bands: code -> bits.
NARROW_CODES = {0: 6, 1: 7, 2: 5, 3: 8}
NARROW_BITS = {bits: code for code, bits in NARROW_CODES.items()}
SIDE_INFO_BITS = len(WIDE_BANDS) + 2 * len(NARROW_BANDS)


class SideInfoError(ValueError):
    """Allocation side information is truncated or malformed."""


@dataclass(frozen=True)
class PquantParams:
    alpha: float = 0.04
    e1: float = 0.01
    e2: float = 0.004
    e3: float = 0.02
    e4: float = 0.04

    def __post_init__(self):
        for name in ("alpha", "e1", "e2", "e3", "e4"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class BitAllocation:
    """Bits per critical band (index 0 is band 1), sign bit included."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if len(self.bits) != 19:
            raise ValueError(f"need 19 band allocations, got {len(self.bits)}")
        for band, b in enumerate(self.bits, start=1):
            if b not in allowed_bits(band):
                raise ValueError(f"band {band}: {b} bits not allowed")

    @classmethod
    def uniform(cls, bits: int = 7) -> "BitAllocation":
        # bypasses the range check on purpose: the uniform comparison mode
        # sits outside the perceptual allocation space
        obj = object.__new__(cls)
        object.__setattr__(obj, "bits", (bits,) * 19)
        return obj

    def side_codes(self) -> tuple[int, ...]:
        codes = []
        for band, b in enumerate(self.bits, start=1):
            if band in WIDE_REDUCTION:
                codes.append(b + WIDE_REDUCTION[band] - 6)
            else:
                codes.append(NARROW_BITS[b])
        return tuple(codes)

    def leaf_bits(self, layout: SubbandLayout | None = None) -> np.ndarray:
        """Per-coefficient bit counts in leaf order."""
        layout = layout or make_layout()
        out = np.empty(layout.frame_size, dtype=np.int64)
        for leaf in layout.leaves:
            out[leaf.slice] = self.bits[leaf.band - 1]
        return out


def allowed_bits(band: int) -> tuple[int, ...]:
    if band in WIDE_REDUCTION:
        return (6 - WIDE_REDUCTION[band], 7 - WIDE_REDUCTION[band])
    return (5, 6, 7, 8)


def mean_energy(values) -> float:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("empty band")
    return float(np.mean(v * v))


def i_factor(values, alpha: float) -> float:
    """Mean squared magnitude raised to ``alpha``."""
    e = mean_energy(values)
    return 0.0 if e == 0.0 else e ** alpha


def allocate_bits(coeffs, params: PquantParams | None = None,
                  layout: SubbandLayout | None = None) -> BitAllocation:
    params = params or PquantParams()
    layout = layout or make_layout()
    c = np.asarray(coeffs, dtype=float)
    band_vals = [layout.band_values(c, b) for b in range(1, 20)]
    energy = np.array([mean_energy(v) for v in band_vals])
    factors = np.array([0.0 if e == 0.0 else e ** params.alpha for e in energy])

    hi, lo = factors.max(), factors.min()
    if hi == lo:
        bits = np.full(19, 7)
    else:
        bits = np.where(factors >= (hi + lo) / 2, 7, 6)

    for band, cut in WIDE_REDUCTION.items():
        bits[band - 1] -= cut

    narrow = np.array(NARROW_BANDS) - 1
    region = np.concatenate([band_vals[i] for i in narrow])
    region_energy = mean_energy(region)
    if region_energy < params.e1:
        bits[narrow] += energy[narrow] < params.e2
    elif region_energy > params.e3:
        bits[narrow] -= energy[narrow] > params.e4
    return BitAllocation(tuple(int(b) for b in bits))


def quantize(coeffs, alloc: BitAllocation, layout: SubbandLayout | None = None,
             return_clipped: bool = False):
    """Symmetric mid-tread quantizer; ``b`` bits include the sign.

    Values beyond the representable range saturate. With
    ``return_clipped=True`` the number of saturated coefficients is returned
    as well.
    """
    c = np.asarray(coeffs, dtype=float)
    scale = np.ldexp(1.0, alloc.leaf_bits(layout) - 1)
    limit = scale - 1
    scaled = c * scale
    q = np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)
    clipped = int(np.count_nonzero(np.abs(q) > limit))
    q = np.clip(q, -limit, limit).astype(np.int64)
    return (q, clipped) if return_clipped else q


def dequantize(q, alloc: BitAllocation, layout: SubbandLayout | None = None) -> np.ndarray:
    scale = np.ldexp(1.0, alloc.leaf_bits(layout) - 1)
    return np.asarray(q, dtype=float) / scale


def encode_alloc_side_info(alloc: BitAllocation) -> list[int]:
    """33 side-info bits: 1 per wide band, 2 per narrow band, band order."""
    bits: list[int] = []
    for band, code in enumerate(alloc.side_codes(), start=1):
        if band in WIDE_REDUCTION:
            bits.append(code)
        else:
            bits.extend(((code >> 1) & 1, code & 1))
    return bits


def decode_alloc_side_info(bits) -> BitAllocation:
    bits = list(bits)
    if len(bits) < SIDE_INFO_BITS:
        raise SideInfoError(f"allocation side info needs {SIDE_INFO_BITS} bits, got {len(bits)}")
    out = []
    pos = 0
    for band in range(1, 20):
        if band in WIDE_REDUCTION:
            out.append(6 + bits[pos] - WIDE_REDUCTION[band])
            pos += 1
        else:
            out.append(NARROW_CODES[(bits[pos] << 1) | bits[pos + 1]])
            pos += 2
    return BitAllocation(tuple(out))
