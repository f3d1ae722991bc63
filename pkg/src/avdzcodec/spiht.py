"""SPIHT re-encoding over the time-frequency map.

The map is not a regular quadtree: rows have different lengths and several
rows may share a length. Sets are therefore kept at row granularity. A LIS
entry owns a node ``p`` and a tuple of rows; its members are the
coefficients of those rows inside p's time span.

* Type A (D-like set): when significant, the coefficients of its first
  ``k`` rows form O(p) and are coded individually; the remaining rows become
  a type B entry.
* Type B (L-like set): when significant, each remaining row is handed to the
  nearest O row that is shorter than it (every node of that row becomes a
  type A owner); rows no O row can parent stay with ``p`` as a new type A
  entry.

On a regular quadtree with ``k = 1`` this is exactly classical SPIHT.
Coefficients with no ancestor (the top row and any row no longer than
every row above it) are the roots and start in the LIP. Each root row owns
the descendant rows not already owned by an earlier root row; its nodes
enter the LIS as type A entries over those rows.

Variants: ``baseline`` (length-relocated rows, k = 1), ``ordered``
(magnitude-ordered rows, k = 1), ``modifiedO`` (ordered, k = 3 for nodes of
the first row and 2 elsewhere) and ``merged`` (modifiedO whose first sorting
pass runs at half the top threshold; each coefficient found there carries one
extra bit telling which of the two top bit planes it belongs to).
"""
from __future__ import annotations

import numpy as np

from .embedded import (Encoded, check_reconstruction, reconstruct, refine, refinement_bits,
                       refinement_set, scan_bits, top_exponent)
from .tfmap import TFMap, complete_order, order_by_avg_magnitude, relocate_by_length, tfmap

VARIANTS = ("baseline", "ordered", "modifiedO", "merged")
_A, _B = 0, 1


def significance(magnitudes, n: int) -> int:
    """1 if any magnitude reaches 2**n; 0 for an empty set."""
    if n < 0:
        raise ValueError("exponent must be non-negative")
    return int(any(abs(m) >= (1 << n) for m in magnitudes))


def row_order(imap, variant: str):
    if variant == "baseline":
        return relocate_by_length(), ()
    if variant in VARIANTS:
        return order_by_avg_magnitude(imap)
    raise ValueError(f"unknown SPIHT variant {variant!r}")


def _o_depth(variant: str, owner_row: int) -> int:
    if variant in ("baseline", "ordered"):
        return 1
    return 3 if owner_row == 0 else 2


def _root_rows(tf: TFMap) -> list[tuple[int, tuple[int, ...]]]:
    """Root rows with the descendant rows each one owns."""
    out = []
    claimed: set[int] = set()
    for r in tf.root_rows:
        owned = tuple(r2 for r2 in tf.descendant_rows[r] if r2 not in claimed)
        claimed.update(owned)
        out.append((r, owned))
    return out


def _initial_lists(tf: TFMap):
    lip, lis = [], []
    for r, owned in _root_rows(tf):
        start = tf.starts[r]
        lip.extend(range(start, start + tf.lengths[r]))
        if owned:
            lis.extend((_A, r, j, owned, ()) for j in range(tf.lengths[r]))
    return lip, lis


def _split_b(tf: TFMap, r: int, j: int, rows, orows, lis) -> None:
    lengths = tf.lengths
    assigned = {ro: [] for ro in orows}
    rest = []
    for r2 in rows:
        parent = None
        for ro in orows:
            if r2 in tf.descendant_rows[ro]:
                parent = ro
        (assigned[parent] if parent is not None else rest).append(r2)
    length = lengths[r]
    for ro in orows:
        if assigned[ro]:
            ratio = lengths[ro] // length
            sub = tuple(assigned[ro])
            lis.extend((_A, ro, jj, sub, ()) for jj in range(j * ratio, (j + 1) * ratio))
    if rest:
        lis.append((_A, r, j, tuple(rest), ()))


class _SetMax:
    """Encoder-side max |c| of a row block inside a node's span."""

    def __init__(self, tf: TFMap, mags: np.ndarray):
        self.tf = tf
        self.mags = mags
        self.cache: dict[tuple[int, int], list[int]] = {}

    def __call__(self, r: int, j: int, rows) -> int:
        length = self.tf.lengths[r]
        best = 0
        for r2 in rows:
            tab = self.cache.get((r2, length))
            if tab is None:
                a = self.tf.starts[r2]
                seg = self.mags[a:a + self.tf.lengths[r2]]
                tab = seg.reshape(length, -1).max(axis=1).tolist()
                self.cache[(r2, length)] = tab
            if tab[j] > best:
                best = tab[j]
        return best


def encode_tf(imap, tf: TFMap, variant: str = "modifiedO") -> Encoded:
    vals = tf.to_scan(np.asarray(imap, dtype=np.int64))
    mags = np.abs(vals)
    n_top = top_exponent(mags)
    if n_top is None:
        return Encoded([], 0)
    negs = vals < 0
    neg = negs.astype(int).tolist()
    mag = mags.tolist()
    setmax = _SetMax(tf, mags)
    lengths = tf.lengths
    found_at = np.zeros(tf.size, dtype=np.int64)
    lip, lis = _initial_lists(tf)
    lsp: list[int] = []
    bits: list[int] = []
    out = bits.append
    marks = []
    merged = variant == "merged" and n_top > 0
    n_start = n_top - 1 if merged else n_top

    for n in range(n_start, -1, -1):
        t = 1 << n
        first = merged and n == n_start

        if lip:
            idx = np.array(lip)
            scan, sig = scan_bits(mags, negs, idx, n, top_flag=first)
            bits += scan
            hit = idx[sig]
            found_at[hit] = n + (mags[hit] >= 2 * t) if first else n
            lsp += hit.tolist()
            lip = idx[~sig].tolist()

        i = 0
        while i < len(lis):
            kind, r, j, rows, orows = lis[i]
            i += 1
            if setmax(r, j, rows) < t:
                out(0)
                continue
            out(1)
            lis[i - 1] = None
            if kind == _A:
                k = _o_depth(variant, r)
                head, tail = rows[:k], rows[k:]
                for ro in head:
                    for s in tf.block(ro, lengths[r], j):
                        if mag[s] >= t:
                            out(1)
                            out(neg[s])
                            e = n
                            if first:
                                e += mag[s] >= 2 * t
                                out(e - n)
                            found_at[s] = e
                            lsp.append(s)
                        else:
                            out(0)
                            lip.append(s)
                if tail:
                    lis.append((_B, r, j, tail, head))
            else:
                _split_b(tf, r, j, rows, orows, lis)
        lis = [e for e in lis if e is not None]
        marks.append(len(bits))

        ref = refinement_set(lsp, found_at, n)
        if len(ref):
            bits += refinement_bits(mags, ref, n)
            marks.append(len(bits))
    return Encoded(bits, n_top + 1, marks)


def decode_tf(bits, last_step_level: int, tf: TFMap, variant: str = "modifiedO",
              recon: str = "floor") -> np.ndarray:
    check_reconstruction(recon)
    size = tf.size
    lo = np.zeros(size, dtype=np.int64)
    width = np.zeros(size, dtype=np.int64)
    sign = np.ones(size, dtype=np.int64)
    if last_step_level:
        _decode_into(iter(bits), last_step_level - 1, tf, variant, lo, width, sign)
    return tf.from_scan(reconstruct(lo, width, sign, recon))


def _decode_into(it, n_top: int, tf: TFMap, variant: str, lo, width, sign) -> None:
    lengths = tf.lengths
    found_at = np.zeros(tf.size, dtype=np.int64)
    lip, lis = _initial_lists(tf)
    lsp: list[int] = []
    bit = it.__next__
    merged = variant == "merged" and n_top > 0
    n_start = n_top - 1 if merged else n_top
    try:
        for n in range(n_start, -1, -1):
            first = merged and n == n_start

            def found(s):
                if bit():
                    sign[s] = -1
                e = n + 1 if first and bit() else n
                lo[s] = width[s] = 1 << e
                found_at[s] = e
                lsp.append(s)

            keep = []
            for s in lip:
                if bit():
                    found(s)
                else:
                    keep.append(s)
            lip = keep

            i = 0
            while i < len(lis):
                kind, r, j, rows, orows = lis[i]
                i += 1
                if not bit():
                    continue
                lis[i - 1] = None
                if kind == _A:
                    k = _o_depth(variant, r)
                    head, tail = rows[:k], rows[k:]
                    for ro in head:
                        for s in tf.block(ro, lengths[r], j):
                            if bit():
                                found(s)
                            else:
                                lip.append(s)
                    if tail:
                        lis.append((_B, r, j, tail, head))
                else:
                    _split_b(tf, r, j, rows, orows, lis)
            lis = [e for e in lis if e is not None]

            refine(it, lo, width, refinement_set(lsp, found_at, n), n)
    except StopIteration:
        pass


def spiht_encode(imap, variant: str = "modifiedO") -> Encoded:
    order, sent = row_order(imap, variant)
    enc = encode_tf(imap, tfmap(order), variant)
    enc.ordering = sent
    return enc


def spiht_decode(bits, last_step_level: int, variant: str = "modifiedO", ordering=(),
                 recon: str = "floor") -> np.ndarray:
    if variant not in VARIANTS:
        raise ValueError(f"unknown SPIHT variant {variant!r}")
    order = relocate_by_length() if variant == "baseline" else complete_order(ordering)
    return decode_tf(bits, last_step_level, tfmap(order), variant, recon)
