"""Adaptive variable degree-k zero-tree (AVDZ) re-encoding.

Only the coefficients of the top row are tree roots, and the top row is
always a shortest row, so every other coefficient lies in exactly one root's
time span. Root ``j`` keeps a degree ``k_j``: rows 1..k_j of its tree have
been moved into the LIC/LSC, rows below are still summarised by one
significance bit per level. When that bit is 1 the encoder sends how many
rows to descend (the depth code) and codes every coefficient of the new rows
individually.
"""
from __future__ import annotations

from collections import Counter
from operator import length_hint

import numpy as np

from .bitstream import BitWriter
from .embedded import (Encoded, check_reconstruction, reconstruct, refine, refinement_bits,
                       refinement_set, scan_bits, top_exponent)
from .tfmap import TFMap, avdz_relocate, complete_order, order_by_avg_magnitude, tfmap

MAX_DEPTH = 25


def encode_depth(d: int) -> list[int]:
    """Depth code: 2 bits for 1..3, escape 00 + 3 bits for 4..10,
    escape 00 000 + 4 bits for 11..25."""
    if not 1 <= d <= MAX_DEPTH:
        raise ValueError(f"depth {d} outside 1..{MAX_DEPTH}")
    w = BitWriter()
    if d <= 3:
        w.put_bits(d, 2)
    elif d <= 10:
        w.put_bits(0, 2)
        w.put_bits(d - 3, 3)
    else:
        w.put_bits(0, 5)
        w.put_bits(d - 10, 4)
    return w.bits


DEPTH_CODES = (None,) + tuple(encode_depth(d) for d in range(1, MAX_DEPTH + 1))


def read_depth(bit) -> int:
    """Read one depth code, pulling bits from the callable ``bit``."""
    v = bit() << 1 | bit()
    if v:
        return v
    v = bit() << 2 | bit() << 1 | bit()
    if v:
        return v + 3
    v = bit() << 3 | bit() << 2 | bit() << 1 | bit()
    if not v:
        raise ValueError("invalid depth code 00 000 0000")
    return v + 10


def decode_depth(bits) -> int:
    try:
        return read_depth(iter(bits).__next__)
    except StopIteration:
        raise ValueError("truncated depth code") from None


def row_order(imap):
    order, sent = order_by_avg_magnitude(imap)
    return avdz_relocate(order), sent


def _check(tf: TFMap) -> None:
    if min(tf.lengths) != tf.lengths[0]:
        raise ValueError("AVDZ needs a shortest row on top (apply avdz_relocate)")


def encode_tf(imap, tf: TFMap) -> Encoded:
    _check(tf)
    vals = tf.to_scan(np.asarray(imap, dtype=np.int64))
    mags = np.abs(vals)
    n_top = top_exponent(mags)
    if n_top is None:
        return Encoded([], 0)
    negs = vals < 0
    neg = negs.astype(int).tolist()
    mag = mags.tolist()
    n_rows = len(tf.lengths)
    roots = tf.lengths[0]
    # rowmax[j, r]: largest magnitude of root j's tree in row r
    rowmax = np.stack([mags[a:a + length].reshape(roots, -1).max(axis=1)
                       for a, length in zip(tf.starts, tf.lengths)], axis=1)
    row_ids = np.arange(n_rows)
    blocks = tf.root_blocks
    found_at = np.zeros(tf.size, dtype=np.int64)
    degree = [0] * roots  # 0-based index of the last expanded row
    lic = list(range(roots))
    lsc: list[int] = []
    bits: list[int] = []
    out = bits.append
    marks = []
    ops = Counter()
    last_row = n_rows - 1

    for n in range(n_top, -1, -1):
        t = 1 << n
        if lic:
            idx = np.array(lic)
            scan, sig = scan_bits(mags, negs, idx, n)
            bits += scan
            hit = idx[sig]
            found_at[hit] = n
            lsc += hit.tolist()
            lic = idx[~sig].tolist()
            ops["list"] += len(hit)

        # deepest row of each tree holding a coefficient significant at t
        deepest = np.where(rowmax >= t, row_ids, -1).max(axis=1).tolist()
        for j in range(roots):
            k_old = degree[j]
            if k_old == last_row:
                continue
            k_new = deepest[j]
            if k_new <= k_old:
                out(0)
                continue
            out(1)
            bits += DEPTH_CODES[k_new - k_old]
            degree[j] = k_new
            ops["list"] += 1
            for r in range(k_old + 1, k_new + 1):
                for s in blocks[j][r]:
                    if mag[s] >= t:
                        out(1)
                        out(neg[s])
                        found_at[s] = n
                        lsc.append(s)
                    else:
                        out(0)
                        lic.append(s)
                    ops["list"] += 1
        marks.append(len(bits))

        ref = refinement_set(lsc, found_at, n)
        if len(ref):
            bits += refinement_bits(mags, ref, n)
            marks.append(len(bits))
    ops["bits"] = len(bits)
    return Encoded(bits, n_top + 1, marks, ops=ops)


def decode_tf(bits, last_step_level: int, tf: TFMap, ops: Counter | None = None,
              recon: str = "floor") -> np.ndarray:
    _check(tf)
    check_reconstruction(recon)
    size = tf.size
    lo = np.zeros(size, dtype=np.int64)
    width = np.zeros(size, dtype=np.int64)
    sign = np.ones(size, dtype=np.int64)
    ops = Counter() if ops is None else ops
    if last_step_level:
        bits = bits if isinstance(bits, list) else list(bits)
        it = iter(bits)
        _decode_into(it, last_step_level - 1, tf, lo, width, sign, ops)
        ops["bits"] = len(bits) - length_hint(it)
    return tf.from_scan(reconstruct(lo, width, sign, recon))


def _decode_into(it, n_top: int, tf: TFMap, lo, width, sign, ops: Counter) -> None:
    n_rows = len(tf.lengths)
    roots = tf.lengths[0]
    blocks = tf.root_blocks
    found_at = np.zeros(tf.size, dtype=np.int64)
    degree = [0] * roots
    lic = list(range(roots))
    lsc: list[int] = []
    bit = it.__next__
    last_row = n_rows - 1
    try:
        for n in range(n_top, -1, -1):
            t = 1 << n
            keep = []
            for s in lic:
                if bit():
                    if bit():
                        sign[s] = -1
                    lo[s] = width[s] = t
                    found_at[s] = n
                    lsc.append(s)
                    ops["list"] += 1
                else:
                    keep.append(s)
            lic = keep

            for j in range(roots):
                k_old = degree[j]
                if k_old == last_row or not bit():
                    continue
                k_new = k_old + read_depth(bit)
                if k_new > last_row:
                    return  # corrupt depth: treat as end of stream
                degree[j] = k_new
                ops["list"] += 1
                for r in range(k_old + 1, k_new + 1):
                    for s in blocks[j][r]:
                        if bit():
                            if bit():
                                sign[s] = -1
                            lo[s] = width[s] = t
                            found_at[s] = n
                            lsc.append(s)
                        else:
                            lic.append(s)
                        ops["list"] += 1

            refine(it, lo, width, refinement_set(lsc, found_at, n), n)
    except StopIteration:
        pass


def avdz_encode(imap) -> Encoded:
    order, sent = row_order(imap)
    enc = encode_tf(imap, tfmap(order))
    enc.ordering = sent
    return enc


def avdz_decode(bits, last_step_level: int, ordering=(), ops: Counter | None = None,
                recon: str = "floor") -> np.ndarray:
    order = avdz_relocate(complete_order(ordering))
    return decode_tf(bits, last_step_level, tfmap(order), ops, recon)
