"""Pieces shared by the zero-tree coders.

All coders track, for every significant coefficient, the magnitude interval
``[lo, lo + width)`` it is known to lie in. A coefficient found significant
at exponent ``n`` starts at ``[2**n, 2**(n+1))`` and every refinement bit
halves the interval. Two reconstruction rules are offered:

* ``floor``: the lower interval edge, i.e. the magnitude bits received so far.
  Every bit moves the estimate towards the true value, so the squared error
  of each coefficient never grows as a stream prefix gets longer.
* ``midpoint``: the interval centre, ``1.5 * 2**n`` on discovery. Lower error
  on average for a truncated stream, but a single refinement bit can move an
  estimate away from the true value (91 is found at ``[64, 128)`` → 96, then
  refined into ``[64, 96)`` → 80).

Once the width reaches 1 both rules give the exact integer ``lo``.

Encoders need no interval state: the refinement bit sent at level ``n`` is
bit ``n`` of the magnitude. Decoders pull bits from a plain iterator; running
out of bits (``StopIteration``) is the normal end of a truncated stream.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import islice

import numpy as np


@dataclass
class Encoded:
    bits: list[int]
    last_step_level: int
    pass_marks: list[int] = field(default_factory=list)
    ordering: tuple[int, ...] = ()
    ops: Counter = field(default_factory=Counter)

    def __len__(self) -> int:
        return len(self.bits)


def top_exponent(magnitudes) -> int | None:
    """Exponent of the largest power of two not above max |c|; None if all zero."""
    m = int(np.max(np.abs(magnitudes))) if len(magnitudes) else 0
    return m.bit_length() - 1 if m else None


def last_step_level(magnitudes) -> int:
    n = top_exponent(magnitudes)
    return 0 if n is None else n + 1


RECONSTRUCTIONS = ("floor", "midpoint")


def check_reconstruction(mode: str) -> None:
    if mode not in RECONSTRUCTIONS:
        raise ValueError(f"unknown reconstruction {mode!r}; expected one of {RECONSTRUCTIONS}")


def reconstruct(lo, width, sign, mode: str = "floor") -> np.ndarray:
    check_reconstruction(mode)
    lo = np.asarray(lo, dtype=np.int64)
    width = np.asarray(width, dtype=np.int64)
    mag = np.where(width > 1, lo + width // 2, lo) if mode == "midpoint" else lo
    return np.where(np.asarray(sign) < 0, -mag, mag)


def scan_bits(mags: np.ndarray, negs: np.ndarray, idx: np.ndarray, n: int,
              top_flag: bool = False) -> tuple[list[int], np.ndarray]:
    """Bits of a significance scan over coefficients ``idx`` at threshold ``2**n``.

    Each coefficient emits its significance bit; a significant one then emits
    its sign and, with ``top_flag``, whether it also reaches ``2**(n+1)``.
    Returns the bits and the significance mask.
    """
    m = mags[idx]
    sig = m >= (1 << n)
    width = 1 + sig * (2 if top_flag else 1)
    pos = np.cumsum(width) - width
    out = np.zeros(int(width.sum()), dtype=np.int8)
    out[pos] = sig
    hit = pos[sig]
    out[hit + 1] = negs[idx][sig]
    if top_flag:
        out[hit + 2] = m[sig] >= (2 << n)
    return out.tolist(), sig


def refinement_bits(mags: np.ndarray, idx, n: int) -> list[int]:
    """Refinement bits at level ``n``: bit ``n`` of each magnitude."""
    return ((mags[np.asarray(idx, dtype=np.int64)] >> n) & 1).tolist()


def refine(bit_iter, lo: np.ndarray, width: np.ndarray, idx, n: int) -> None:
    """Apply level-``n`` refinement bits to ``idx``; StopIteration if the stream ends."""
    idx = np.asarray(idx, dtype=np.int64)
    got = np.fromiter(islice(bit_iter, len(idx)), dtype=np.int64)
    done = idx[:len(got)]
    lo[done] += got << n
    width[done] = 1 << n
    if len(got) < len(idx):
        raise StopIteration


def refinement_set(lsp: list[int], found_at: np.ndarray, n: int) -> np.ndarray:
    """Entries of ``lsp`` (in list order) found significant above level ``n``."""
    idx = np.asarray(lsp, dtype=np.int64)
    return idx[found_at[idx] > n]
