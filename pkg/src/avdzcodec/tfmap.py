"""Time-frequency map of the 26 leaves: row orders, descendant relation and
the ordering side information.

Rows are leaves placed top to bottom. Coefficient ``j`` (1-based) of a row of
length ``L`` covers the time span ``[(j-1)/L, j/L)`` of the frame. A
coefficient descends from one in a row above when its span lies inside the
parent's span. Two readings of "lies inside" are supported:

* strict (default): the descendant's row must also be strictly longer, so
  rows of equal length never nest. Used by every EZW and SPIHT variant.
* nested: containment alone, so equal-length rows chain one child per
  parent (the "full tree" of the length-relocated map). Kept for
  comparisons; AVDZ trees need neither flag because their roots sit in the
  shortest row, where every row below is nested by containment.
"""
from __future__ import annotations

import csv
import io
from functools import cached_property, lru_cache

import numpy as np

from .subband import SubbandLayout, make_layout


class TFMap:
    """A row order over the layout plus scan-order bookkeeping.

    Coordinates inside the coders are *scan indices*: rows top to bottom,
    left to right within a row. ``scan[s]`` gives the leaf-order (flat)
    position of scan index ``s``.
    """

    def __init__(self, order, layout: SubbandLayout | None = None, strict: bool = True):
        self.layout = layout or make_layout()
        self.strict = strict
        self.order = tuple(int(i) for i in order)
        if sorted(self.order) != list(range(1, len(self.layout.leaves) + 1)):
            raise ValueError(f"row order must be a permutation of the leaves: {self.order}")
        self.lengths = tuple(self.layout.leaf(i).coeff_count for i in self.order)
        starts = np.cumsum((0,) + self.lengths)
        self.starts = tuple(int(s) for s in starts[:-1])
        self.size = int(starts[-1])
        self.row_of_leaf = {leaf: r for r, leaf in enumerate(self.order)}

    def __repr__(self):
        return f"TFMap({self.order}, strict={self.strict})"

    @cached_property
    def scan(self) -> np.ndarray:
        return np.concatenate([np.arange(self.layout.leaf(i).offset,
                                         self.layout.leaf(i).offset + self.layout.leaf(i).coeff_count)
                               for i in self.order])

    @cached_property
    def row_of_scan(self) -> np.ndarray:
        return np.repeat(np.arange(len(self.order)), self.lengths)

    def to_scan(self, coeffs) -> np.ndarray:
        return np.asarray(coeffs)[self.scan]

    def from_scan(self, values) -> np.ndarray:
        out = np.empty(self.size, dtype=np.asarray(values).dtype)
        out[self.scan] = values
        return out

    def coord(self, leaf: int, j: int) -> tuple[int, int]:
        """Row position and 0-based offset of coefficient c(leaf, j)."""
        length = self.layout.leaf(leaf).coeff_count
        if not 1 <= j <= length:
            raise IndexError(f"c({leaf}, {j}) outside 1..{length}")
        return self.row_of_leaf[leaf], j - 1

    def block(self, row: int, span_len: int, span_pos: int) -> range:
        """Scan indices of ``row`` lying inside the span of node (span_len, span_pos)."""
        ratio = self.lengths[row] // span_len
        start = self.starts[row] + span_pos * ratio
        return range(start, start + ratio)

    @cached_property
    def root_blocks(self) -> tuple[tuple[tuple[int, ...], ...], ...]:
        """``root_blocks[j][r]``: scan indices of row ``r`` inside the span of top-row node ``j``."""
        top = self.lengths[0]
        return tuple(tuple(tuple(self.block(r, top, j)) for r in range(len(self.lengths)))
                     for j in range(top))

    @cached_property
    def descendant_rows(self) -> tuple[tuple[int, ...], ...]:
        """Rows below each row that hold its descendants (longer, or not shorter if nested)."""
        n = len(self.lengths)
        return tuple(tuple(r2 for r2 in range(r + 1, n) if self._nests(r, r2)) for r in range(n))

    def _nests(self, r: int, r2: int) -> bool:
        a, b = self.lengths[r], self.lengths[r2]
        return b > a if self.strict else b >= a

    @cached_property
    def child_row(self) -> tuple[int | None, ...]:
        return tuple(rows[0] if rows else None for rows in self.descendant_rows)

    @cached_property
    def root_rows(self) -> tuple[int, ...]:
        """Rows with no ancestor row above them."""
        return tuple(r for r in range(len(self.lengths))
                     if not any(self._nests(r0, r) for r0 in range(r)))

    def is_descendant(self, parent: tuple[int, int], cand: tuple[int, int]) -> bool:
        """``cand`` is a descendant of ``parent``; both given as (leaf, j), j 1-based."""
        rp, jp = self.coord(*parent)
        rc, jc = self.coord(*cand)
        lp, lc = self.lengths[rp], self.lengths[rc]
        return rc > rp and self._nests(rp, rc) and jc // (lc // lp) == jp

    def average_magnitudes(self, coeffs) -> np.ndarray:
        """Mean |c| of each leaf, in leaf-index order."""
        c = np.abs(np.asarray(coeffs, dtype=float))
        return np.array([c[leaf.slice].mean() for leaf in self.layout.leaves])

    def dump_csv(self, coeffs) -> str:
        avg = self.average_magnitudes(coeffs)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row", "leaf_index", "length", "avg_magnitude"])
        for r, leaf in enumerate(self.order):
            w.writerow([r + 1, leaf, self.lengths[r], f"{avg[leaf - 1]:.6g}"])
        return buf.getvalue()


@lru_cache(maxsize=4096)
def tfmap(order: tuple[int, ...], strict: bool = True) -> TFMap:
    return TFMap(order, strict=strict)


def order_by_avg_magnitude(coeffs, layout: SubbandLayout | None = None):
    """Rows by descending mean |c| (ties: ascending leaf index); zero rows last.

    Returns the full row order and the transmitted leaf sequence (nonzero
    rows only; the 5-bit terminator is added by the frame writer).
    """
    layout = layout or make_layout()
    c = np.abs(np.asarray(coeffs, dtype=float))
    sums = [(c[leaf.slice].sum() / leaf.coeff_count, leaf.index) for leaf in layout.leaves]
    nonzero = sorted((s for s in sums if s[0] > 0), key=lambda t: (-t[0], t[1]))
    sent = tuple(i for _, i in nonzero)
    return complete_order(sent, len(layout.leaves)), sent


def complete_order(sent, n_leaves: int = 26) -> tuple[int, ...]:
    """Full row order from the transmitted prefix: remaining leaves ascending."""
    seen = set(sent)
    if len(seen) != len(sent) or not seen <= set(range(1, n_leaves + 1)):
        raise ValueError(f"invalid ordering sequence {sent}")
    return tuple(sent) + tuple(i for i in range(1, n_leaves + 1) if i not in seen)


def relocate_by_length(layout: SubbandLayout | None = None) -> tuple[int, ...]:
    layout = layout or make_layout()
    return tuple(sorted((leaf.index for leaf in layout.leaves),
                        key=lambda i: (layout.leaf(i).coeff_count, i)))


def relocate_rows_by_length(order, layout: SubbandLayout | None = None) -> tuple[int, ...]:
    """Stable length sort of an arbitrary row order."""
    layout = layout or make_layout()
    return tuple(sorted(order, key=lambda i: layout.leaf(i).coeff_count))


def avdz_relocate(order, layout: SubbandLayout | None = None) -> tuple[int, ...]:
    """Promote the first row of globally minimal length to the top."""
    layout = layout or make_layout()
    order = tuple(order)
    lengths = [layout.leaf(i).coeff_count for i in order]
    first = lengths.index(min(lengths))
    return (order[first],) + order[:first] + order[first + 1:]
