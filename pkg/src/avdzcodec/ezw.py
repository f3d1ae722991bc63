"""EZW re-encoding over the time-frequency map.

Symbols are written without entropy coding. Nodes with descendants use two
bits (ZTR 00, IZ 01, POS 10, NEG 11); nodes without descendants use Z 0,
POS 10, NEG 11. A coefficient's descendants are the time-span-nested
coefficients in strictly longer rows further down. Every coefficient with
descendants is a tree node, whether or not it has an ancestor itself, so
rows that no earlier row can parent root trees of their own; coefficients
without descendants are standalone. The same machinery covers the
length-relocated baseline and the magnitude-ordered variant.
"""
from __future__ import annotations

import numpy as np

from .embedded import (Encoded, check_reconstruction, reconstruct, refine, refinement_bits,
                       top_exponent)
from .tfmap import TFMap, complete_order, order_by_avg_magnitude, relocate_by_length, tfmap

POS, NEG, IZ, ZTR, Z = "POS", "NEG", "IZ", "ZTR", "Z"
VARIANTS = ("baseline", "modified")


def row_order(imap, variant: str):
    """Row order and transmitted ordering sequence for ``variant``."""
    if variant == "baseline":
        return relocate_by_length(), ()
    if variant == "modified":
        return order_by_avg_magnitude(imap)
    raise ValueError(f"unknown EZW variant {variant!r}")


def _descendant_exponents(tf: TFMap, mags: np.ndarray) -> list[list[int] | None]:
    """Per node, a bit mask with bit ``e`` set when some descendant has exponent ``e``.

    Coefficients already significant count as zero in the zero-tree test, so
    at level ``n`` a node is a zero-tree root exactly when no descendant has
    exponent ``n`` -- one precomputed mask answers that for every level.
    """
    bits = np.zeros(len(mags), dtype=np.int64)
    nz = mags > 0
    bits[nz] = np.left_shift(1, np.floor(np.log2(mags[nz])).astype(np.int64))
    below: dict[int, np.ndarray] = {}  # length -> OR of the rows below with that length
    out: list[list[int] | None] = [None] * len(tf.lengths)
    for r in range(len(tf.lengths) - 1, -1, -1):
        length = tf.lengths[r]
        if tf.descendant_rows[r]:
            acc = np.zeros(length, dtype=np.int64)
            for l2, seg in below.items():
                if l2 > length or (not tf.strict and l2 == length):
                    acc |= np.bitwise_or.reduce(seg.reshape(length, -1), axis=1)
            out[r] = acc.tolist()
        row = bits[tf.starts[r]:tf.starts[r] + length]
        below[length] = row | below[length] if length in below else row.copy()
    return out


def _mark_tree(tf: TFMap, skip: bytearray, r: int, j: int) -> None:
    length = tf.lengths[r]
    for r2 in tf.descendant_rows[r]:
        ratio = tf.lengths[r2] // length
        a = tf.starts[r2] + j * ratio
        skip[a:a + ratio] = b"\x01" * ratio


def encode_tf(imap, tf: TFMap) -> Encoded:
    vals = tf.to_scan(np.asarray(imap, dtype=np.int64))
    mags = np.abs(vals)
    n_top = top_exponent(mags)
    if n_top is None:
        return Encoded([], 0)
    neg = (vals < 0).astype(int).tolist()
    mag = mags.tolist()
    size = tf.size
    sig = [False] * size
    subordinate: list[int] = []
    bits: list[int] = []
    out = bits.append
    marks = []
    has_desc = [bool(rows) for rows in tf.descendant_rows]
    masks = _descendant_exponents(tf, mags)

    for n in range(n_top, -1, -1):
        t = 1 << n
        skip = bytearray(size)
        for r, (start, length) in enumerate(zip(tf.starts, tf.lengths)):
            mask = masks[r]
            for j in range(length):
                s = start + j
                if sig[s] or skip[s]:
                    continue
                if mag[s] >= t:
                    out(1)
                    out(neg[s])
                    sig[s] = True
                    subordinate.append(s)
                elif has_desc[r]:
                    out(0)
                    if not mask[j] >> n & 1:
                        out(0)
                        _mark_tree(tf, skip, r, j)
                    else:
                        out(1)
                else:
                    out(0)
        marks.append(len(bits))
        if n == 0:
            break
        bits += refinement_bits(mags, subordinate, n - 1)
        marks.append(len(bits))
    return Encoded(bits, n_top + 1, marks)


def decode_tf(bits, last_step_level: int, tf: TFMap, recon: str = "floor") -> np.ndarray:
    check_reconstruction(recon)
    size = tf.size
    lo = np.zeros(size, dtype=np.int64)
    width = np.zeros(size, dtype=np.int64)
    sign = np.ones(size, dtype=np.int64)
    if last_step_level:
        _decode_into(iter(bits), last_step_level - 1, tf, lo, width, sign)
    return tf.from_scan(reconstruct(lo, width, sign, recon))


def _decode_into(it, n_top: int, tf: TFMap, lo, width, sign) -> None:
    size = tf.size
    sig = [False] * size
    subordinate: list[int] = []
    has_desc = [bool(rows) for rows in tf.descendant_rows]
    bit = it.__next__
    try:
        for n in range(n_top, -1, -1):
            t = 1 << n
            skip = bytearray(size)
            for r, (start, length) in enumerate(zip(tf.starts, tf.lengths)):
                for j in range(length):
                    s = start + j
                    if sig[s] or skip[s]:
                        continue
                    if bit():
                        if bit():
                            sign[s] = -1
                        sig[s] = True
                        lo[s] = width[s] = t
                        subordinate.append(s)
                    elif has_desc[r] and not bit():
                        _mark_tree(tf, skip, r, j)
            if n == 0:
                break
            refine(it, lo, width, subordinate, n - 1)
    except StopIteration:
        pass


def ezw_encode(imap, variant: str = "modified") -> Encoded:
    order, sent = row_order(imap, variant)
    enc = encode_tf(imap, tfmap(order))
    enc.ordering = sent
    return enc


def ezw_decode(bits, last_step_level: int, variant: str = "modified", ordering=(),
               recon: str = "floor") -> np.ndarray:
    if variant == "baseline":
        order = relocate_by_length()
    elif variant == "modified":
        order = complete_order(ordering)
    else:
        raise ValueError(f"unknown EZW variant {variant!r}")
    return decode_tf(bits, last_step_level, tfmap(order), recon)
