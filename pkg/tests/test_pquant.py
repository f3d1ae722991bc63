import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from avdzcodec.pquant import (NARROW_BANDS, SIDE_INFO_BITS, WIDE_BANDS, BitAllocation,
                              PquantParams, SideInfoError, allocate_bits, allowed_bits,
                              decode_alloc_side_info, dequantize, encode_alloc_side_info,
                              i_factor, mean_energy, quantize)
from avdzcodec.subband import make_layout


def frame_with_band_energies(energies: dict[int, float], default: float) -> np.ndarray:
    """Coefficients whose band ``b`` has constant magnitude sqrt(energy)."""
    layout = make_layout()
    c = np.zeros(512)
    for band in range(1, 20):
        for s in layout.band_slices(band):
            c[s] = math.sqrt(energies.get(band, default))
    return c


def narrow_count(band):
    layout = make_layout()
    return sum(s.stop - s.start for s in layout.band_slices(band))


def fill_energy(region_mean, fixed: dict[int, float]) -> float:
    """Energy for the unlisted narrow bands so the narrow region averages ``region_mean``."""
    total = sum(narrow_count(b) for b in NARROW_BANDS)
    fixed_sum = sum(narrow_count(b) * e for b, e in fixed.items())
    rest = total - sum(narrow_count(b) for b in fixed)
    return (region_mean * total - fixed_sum) / rest


def test_i_factor_examples():
    assert i_factor([0.0, 0.0], 0.04) == 0.0
    assert i_factor([1.0, -1.0], 0.3) == 1.0
    # 0.25 ** 0.04 = exp(0.04 ln 0.25); checked against a 50-digit decimal evaluation
    from decimal import Decimal, getcontext
    getcontext().prec = 50
    oracle = float((Decimal("0.04") * Decimal("0.25").ln()).exp())
    assert i_factor([0.5, -0.5], 0.04) == pytest.approx(oracle, rel=1e-14)
    assert oracle == pytest.approx(0.94606, abs=1e-5)


def test_mean_energy_rejects_empty():
    with pytest.raises(ValueError):
        mean_energy([])


def test_equal_energies_give_base_seven_then_wide_reductions():
    alloc = allocate_bits(frame_with_band_energies({}, 0.015))
    assert [alloc.bits[b - 1] for b in (1, 2, 17, 18, 19)] == [5, 6, 6, 4, 5]
    assert all(alloc.bits[b - 1] == 7 for b in NARROW_BANDS)


def test_quiet_narrow_region_adds_bit():
    fixed = {5: 0.001}
    e = {1: 1.0, **fixed}
    e.update({b: fill_energy(0.005, fixed) for b in NARROW_BANDS if b not in fixed})
    c = frame_with_band_energies(e, 0.5)
    layout = make_layout()
    region = np.concatenate([layout.band_values(c, b) for b in NARROW_BANDS])
    assert mean_energy(region) == pytest.approx(0.005)
    base = allocate_bits(c, PquantParams(e1=1e-9))  # rule (d) disabled
    assert base.bits[4] == 6
    assert allocate_bits(c).bits[4] == 7


def test_loud_narrow_region_removes_bit():
    fixed = {10: 0.05}
    e = {1: 0.05, 19: 1e-6, **fixed}
    e.update({b: fill_energy(0.03, fixed) for b in NARROW_BANDS if b not in fixed})
    c = frame_with_band_energies(e, 0.01)
    base = allocate_bits(c, PquantParams(e3=1.0))  # rule (e) disabled
    assert base.bits[9] == 7
    assert allocate_bits(c).bits[9] == 6


def test_silent_frame_allocation_is_valid():
    alloc = allocate_bits(np.zeros(512))
    assert alloc == BitAllocation(alloc.bits)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_params_must_be_positive(bad):
    with pytest.raises(ValueError):
        PquantParams(alpha=bad)


def test_allowed_bits():
    assert allowed_bits(1) == (4, 5)
    assert allowed_bits(18) == (3, 4)
    assert allowed_bits(7) == (5, 6, 7, 8)
    with pytest.raises(ValueError):
        BitAllocation((7,) * 19)  # band 1 can only take 4 or 5


def test_quantize_examples():
    alloc = BitAllocation.uniform(7)
    c = np.zeros(512)
    c[3] = 0.5
    q = quantize(c, alloc)
    assert q[0] == 0 and q[3] == 32
    assert dequantize(q, alloc)[3] == 0.5


def test_quantize_rounds_half_away_from_zero():
    alloc = BitAllocation.uniform(3)  # scale 4
    c = np.zeros(512)
    c[:4] = [0.125, -0.125, 0.375, -0.375]
    assert quantize(c, alloc)[:4].tolist() == [1, -1, 2, -2]


def test_quantize_saturates_and_counts():
    alloc = BitAllocation.uniform(7)
    c = np.zeros(512)
    c[:3] = [1.5, -2.0, 0.999]
    q, clipped = quantize(c, alloc, return_clipped=True)
    assert q[:3].tolist() == [63, -63, 63]
    assert clipped == 3


@given(st.integers(0, 2 ** 32 - 1))
def test_quantization_error_bound(seed):
    rng = np.random.default_rng(seed)
    c = rng.uniform(-1, 1, 512)
    alloc = allocate_bits(c)
    q, _ = quantize(c, alloc, return_clipped=True)
    b = alloc.leaf_bits()
    unclipped = np.abs(q) < 2.0 ** (b - 1) - 1
    err = np.abs(dequantize(q, alloc) - c)
    assert np.all(err[unclipped] <= 2.0 ** (-b[unclipped]) + 1e-12)


def test_side_info_all_base_is_zero_code():
    base = BitAllocation(tuple(allowed_bits(b)[0] if b in WIDE_BANDS else 6 for b in range(1, 20)))
    assert encode_alloc_side_info(base) == [0] * SIDE_INFO_BITS == [0] * 33


def test_narrow_code_table():
    for code, bits in [((0, 0), 6), ((0, 1), 7), ((1, 0), 5), ((1, 1), 8)]:
        side = [0, 0] + list(code) + [0] * 29  # bands 1, 2 wide; band 3 narrow
        assert decode_alloc_side_info(side).bits[2] == bits


allocations = st.tuples(*[st.sampled_from(allowed_bits(b)) for b in range(1, 20)]).map(BitAllocation)


@given(allocations)
def test_side_info_roundtrip(alloc):
    bits = encode_alloc_side_info(alloc)
    assert len(bits) == 33
    assert decode_alloc_side_info(bits) == alloc


def test_side_info_truncated():
    with pytest.raises(SideInfoError):
        decode_alloc_side_info([0] * 32)
