"""Fixed wavelet-packet tree over the 19 critical bands (26 leaves) at 16 kHz."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .filterbank import FilterQuadruple, merge, split

SAMPLE_RATE = 16000
FRAME_SIZE = 512
NYQUIST = SAMPLE_RATE // 2

# Critical-band edges in Hz; inner edges mark where a band is assembled from
# several tree leaves.
CRITICAL_BANDS = (
    (0, 125), (125, 250), (250, 375), (375, 500), (500, 625), (625, 750),
    (750, 875), (875, 1000), (1000, 1250), (1250, 1500), (1500, 1750),
    (1750, 2000), (2000, 2250), (2250, 2500, 2750), (2750, 3000, 3125),
    (3125, 3250, 3500, 3750), (3750, 4000, 5000), (5000, 6000, 6500),
    (6500, 7000, 8000),
)


@dataclass(frozen=True)
class Leaf:
    index: int
    low_hz: int
    high_hz: int
    depth: int
    coeff_count: int
    band: int
    offset: int

    @property
    def slice(self) -> slice:
        return slice(self.offset, self.offset + self.coeff_count)


@dataclass(frozen=True)
class Band:
    index: int
    low_hz: int
    high_hz: int
    leaves: tuple[int, ...]


@dataclass(frozen=True)
class SubbandLayout:
    leaves: tuple[Leaf, ...]
    bands: tuple[Band, ...]
    frame_size: int = FRAME_SIZE

    def leaf(self, index: int) -> Leaf:
        return self.leaves[index - 1]

    def band(self, index: int) -> Band:
        return self.bands[index - 1]

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(leaf.coeff_count for leaf in self.leaves)

    def band_slices(self, index: int) -> list[slice]:
        return [self.leaf(i).slice for i in self.band(index).leaves]

    def band_values(self, coeffs: np.ndarray, index: int) -> np.ndarray:
        return np.concatenate([coeffs[s] for s in self.band_slices(index)])

    def split_leaves(self, coeffs: np.ndarray) -> list[np.ndarray]:
        return [coeffs[leaf.slice] for leaf in self.leaves]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["leaf_index", "low_Hz", "high_Hz", "depth", "count", "band"])
        for leaf in self.leaves:
            w.writerow([leaf.index, leaf.low_hz, leaf.high_hz, leaf.depth,
                        leaf.coeff_count, leaf.band])
        return buf.getvalue()


@lru_cache(maxsize=None)
def make_layout() -> SubbandLayout:
    leaves: list[Leaf] = []
    bands: list[Band] = []
    offset = 0
    for b, edges in enumerate(CRITICAL_BANDS, start=1):
        members = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            width = hi - lo
            depth = (NYQUIST // width).bit_length() - 1
            if NYQUIST != width << depth or lo % width:
                raise AssertionError(f"non-dyadic leaf {lo}-{hi} Hz")
            count = FRAME_SIZE >> depth
            leaves.append(Leaf(len(leaves) + 1, lo, hi, depth, count, b, offset))
            members.append(len(leaves))
            offset += count
        bands.append(Band(b, edges[0], edges[-1], tuple(members)))
    return SubbandLayout(tuple(leaves), tuple(bands))


def _tree_node(leaf: Leaf) -> tuple[int, int]:
    """(depth, natural index) of a leaf; high-band splits reverse frequency
    order, so the natural index is the Gray code of the frequency position."""
    pos = leaf.low_hz // (leaf.high_hz - leaf.low_hz)
    return leaf.depth, pos ^ (pos >> 1)


@lru_cache(maxsize=None)
def _tree_plan(layout: SubbandLayout):
    leaf_nodes = [_tree_node(leaf) for leaf in layout.leaves]
    internal = set()
    for depth, p in leaf_nodes:
        for d in range(depth):
            internal.add((d, p >> (depth - d)))
    return tuple(leaf_nodes), tuple(sorted(internal))


def analyze(frame, quad: FilterQuadruple, layout: SubbandLayout | None = None) -> np.ndarray:
    """Wavelet-packet analysis; returns the 512 coefficients in leaf order."""
    layout = layout or make_layout()
    x = np.asarray(frame, dtype=float)
    if x.shape != (layout.frame_size,):
        raise ValueError(f"frame must have {layout.frame_size} samples, got {x.shape}")
    leaf_nodes, internal = _tree_plan(layout)
    nodes = {(0, 0): x}
    for d, p in internal:
        nodes[(d + 1, 2 * p)], nodes[(d + 1, 2 * p + 1)] = split(nodes[(d, p)], quad)
    return np.concatenate([nodes[n] for n in leaf_nodes])


def synthesize(coeffs, quad: FilterQuadruple, layout: SubbandLayout | None = None) -> np.ndarray:
    layout = layout or make_layout()
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (layout.frame_size,):
        raise ValueError(f"coefficient map must have {layout.frame_size} entries, got {c.shape}")
    leaf_nodes, internal = _tree_plan(layout)
    nodes = {node: c[leaf.slice] for node, leaf in zip(leaf_nodes, layout.leaves)}
    for d, p in reversed(internal):
        nodes[(d, p)] = merge(nodes.pop((d + 1, 2 * p)), nodes.pop((d + 1, 2 * p + 1)), quad)
    return nodes[(0, 0)]
