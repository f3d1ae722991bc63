"""Raised-cosine "savN" kernel design and one-level two-channel split/merge.

Frames are treated as periodic, so a split of ``L`` samples gives exactly
``L/2`` low and ``L/2`` high coefficients and merge inverts it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np


class KernelError(ValueError):
    """Invalid kernel configuration."""


@dataclass(frozen=True)
class KernelSpec:
    order: int = 8
    beta: float = 0.168
    r: float = field(default=0.5, init=False)

    def __post_init__(self):
        if self.order < 4 or self.order % 2:
            raise KernelError(f"kernel order must be even and >= 4, got {self.order}")
        if not 0.0 < self.beta < self.r:
            raise KernelError(f"beta must lie in (0, {self.r}), got {self.beta}")

    @property
    def k(self) -> int:
        return self.order // 2

    @property
    def name(self) -> str:
        return f"sav{self.order}"


@dataclass(frozen=True)
class FilterQuadruple:
    analysis_lo: np.ndarray
    analysis_hi: np.ndarray
    synthesis_lo: np.ndarray
    synthesis_hi: np.ndarray

    @property
    def length(self) -> int:
        return len(self.analysis_lo)


def kernel_response(spec: KernelSpec, f: float) -> float:
    """Transfer function of the mother kernel at frequency sample ``f`` in [0, k].

    The cosine is evaluated on ``f / k`` so the taper meets the plateau and the
    stop band continuously.
    """
    k, r, beta = spec.k, spec.r, spec.beta
    f = abs(f)
    if f > k + 1e-12:
        raise KernelError(f"frequency {f} outside [0, {k}]")
    if f <= (r - beta) * k:
        return 1.0
    if f <= (r + beta) * k:
        return max(0.0, math.cos(math.pi / (4 * beta) * (f / k - r + beta)))
    return 0.0


def design_kernel(spec: KernelSpec) -> np.ndarray:
    """Low-pass analysis prototype: centred IDFT of the sampled response, unit norm."""
    n = spec.order
    # DFT bin m sits at frequency min(m, n - m) on the 0..k scale.
    response = np.array([kernel_response(spec, min(m, n - m)) for m in range(n)])
    taps = np.roll(np.real(np.fft.ifft(response)), n // 2)
    return taps / np.linalg.norm(taps)


def derive_quadruple(lowpass) -> FilterQuadruple:
    lo = np.asarray(lowpass, dtype=float)
    if lo.ndim != 1 or len(lo) % 2:
        raise KernelError(f"low-pass prototype needs even length, got {lo.shape}")
    signs = np.where(np.arange(len(lo)) % 2 == 0, 1.0, -1.0)
    hi = signs * lo[::-1]
    return FilterQuadruple(lo, hi, lo[::-1].copy(), hi[::-1].copy())


def sav_quadruple(spec: KernelSpec | None = None) -> FilterQuadruple:
    return derive_quadruple(design_kernel(spec or KernelSpec()))


def daubechies4() -> FilterQuadruple:
    """Exactly orthogonal D4 reference kernel (closed-form taps)."""
    s3 = math.sqrt(3.0)
    lo = np.array([1 + s3, 3 + s3, 3 - s3, 1 - s3]) / (4 * math.sqrt(2.0))
    return derive_quadruple(lo)


def load_golden_taps(name: str = "sav8") -> np.ndarray:
    """Read the frozen tap values shipped under ``avdzcodec/data``."""
    text = resources.files("avdzcodec").joinpath("data").joinpath(f"{name}_taps.txt").read_text()
    rows = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    return np.array([float(v) for v in rows])


@lru_cache(maxsize=256)
def _circular_index(n_out: int, step: int, size: int, n_taps: int, shift: int) -> np.ndarray:
    """``[(step * i - n + shift) mod size]`` for output i and tap n."""
    i = np.arange(n_out)[:, None] * step
    return (i - np.arange(n_taps)[None, :] + shift) % size


def _filter_down(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Periodic convolution with ``taps`` keeping even outputs."""
    return x[_circular_index(len(x) // 2, 2, len(x), len(taps), 0)] @ taps


def split(signal, quad: FilterQuadruple) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1 or len(x) % 2:
        raise ValueError(f"split needs an even-length 1-D signal, got shape {x.shape}")
    return _filter_down(x, quad.analysis_lo), _filter_down(x, quad.analysis_hi)


def _up_filter(band: np.ndarray, synth: np.ndarray) -> np.ndarray:
    up = np.zeros(2 * len(band))
    up[::2] = band
    # Convolution with the synthesis filter advanced by len-1 samples is the
    # transpose of _filter_down, hence its inverse for orthogonal filters.
    last = len(synth) - 1
    return up[_circular_index(len(up), 1, len(up), len(synth), last)] @ synth


def merge(low, high, quad: FilterQuadruple) -> np.ndarray:
    lo = np.asarray(low, dtype=float)
    hi = np.asarray(high, dtype=float)
    if lo.shape != hi.shape or lo.ndim != 1:
        raise ValueError(f"merge needs equal-length halves, got {lo.shape} and {hi.shape}")
    return _up_filter(lo, quad.synthesis_lo) + _up_filter(hi, quad.synthesis_hi)
