"""Slow, literal reference coders used as bit-exact oracles.

They recompute every set by brute force from the coefficient coordinates
instead of using the production coders' precomputed row structure.
"""
from __future__ import annotations

import numpy as np

from avdzcodec.avdz import encode_depth
from avdzcodec.tfmap import TFMap


def _coords(tf: TFMap):
    """Scan index -> (row, 1-based j)."""
    return [(r, j + 1) for r, length in enumerate(tf.lengths) for j in range(length)]


def descendants(tf: TFMap) -> list[list[int]]:
    """Scan indices of every coefficient's descendants, via is_descendant."""
    co = _coords(tf)
    out = []
    for r, j in co:
        parent = (tf.order[r], j)
        out.append([s for s, (r2, b) in enumerate(co) if r2 > r
                    and tf.is_descendant(parent, (tf.order[r2], b))])
    return out


def top_exponent(mags) -> int | None:
    m = max(mags)
    return None if m == 0 else int(np.floor(np.log2(m)))


def ezw_reference(imap, tf: TFMap) -> list[int]:
    vals = [int(v) for v in tf.to_scan(np.asarray(imap))]
    mags = [abs(v) for v in vals]
    n_top = top_exponent(mags)
    if n_top is None:
        return []
    desc = descendants(tf)
    sig: set[int] = set()
    sub: list[int] = []
    bits: list[int] = []
    for n in range(n_top, -1, -1):
        t = 1 << n
        skip: set[int] = set()
        for s in range(len(vals)):
            if s in sig or s in skip:
                continue
            if mags[s] >= t:
                bits += [1, int(vals[s] < 0)]
                sig.add(s)
                sub.append(s)
            elif desc[s]:
                if all(d in sig or mags[d] < t for d in desc[s]):
                    bits += [0, 0]
                    skip.update(desc[s])
                else:
                    bits += [0, 1]
            else:
                bits.append(0)
        if n == 0:
            break
        bits += [(mags[s] >> (n - 1)) & 1 for s in sub]
    return bits


def avdz_reference(imap, tf: TFMap) -> list[int]:
    vals = [int(v) for v in tf.to_scan(np.asarray(imap))]
    mags = [abs(v) for v in vals]
    n_top = top_exponent(mags)
    if n_top is None:
        return []
    co = _coords(tf)
    top = tf.lengths[0]
    last = len(tf.lengths) - 1

    def tree_row(root, r):
        span = (root / top, (root + 1) / top)
        return [s for s, (r2, b) in enumerate(co) if r2 == r
                and span[0] <= (b - 1) / tf.lengths[r] and b / tf.lengths[r] <= span[1]]

    lic = list(range(top))
    lsc: list[tuple[int, int]] = []
    degree = [0] * top
    bits: list[int] = []
    for n in range(n_top, -1, -1):
        t = 1 << n
        keep = []
        for s in lic:
            if mags[s] >= t:
                bits += [1, int(vals[s] < 0)]
                lsc.append((s, n))
            else:
                bits.append(0)
                keep.append(s)
        lic = keep
        for root in range(top):
            if degree[root] == last:
                continue
            rows = range(degree[root] + 1, last + 1)
            hit = [r for r in rows if any(mags[s] >= t for s in tree_row(root, r))]
            bits.append(int(bool(hit)))
            if not hit:
                continue
            k_new = max(hit)
            bits += encode_depth(k_new - degree[root])
            for r in range(degree[root] + 1, k_new + 1):
                for s in tree_row(root, r):
                    if mags[s] >= t:
                        bits += [1, int(vals[s] < 0)]
                        lsc.append((s, n))
                    else:
                        bits.append(0)
                        lic.append(s)
            degree[root] = k_new
        bits += [(mags[s] >> n) & 1 for s, found in lsc if found > n]
    return bits


def set_max_reference(tf: TFMap, mags, r: int, j: int, rows) -> int:
    """Largest magnitude among coefficients of ``rows`` inside node (r, j)'s span."""
    lo, hi = j / tf.lengths[r], (j + 1) / tf.lengths[r]
    best = 0
    for r2 in rows:
        length = tf.lengths[r2]
        for b in range(length):
            if lo <= b / length and (b + 1) / length <= hi:
                best = max(best, abs(int(mags[tf.starts[r2] + b])))
    return best
