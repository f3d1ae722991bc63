from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from avdzcodec.avdz import (DEPTH_CODES, MAX_DEPTH, avdz_decode, avdz_encode, decode_depth,
                            decode_tf, encode_depth, encode_tf, row_order)
from avdzcodec.tfmap import avdz_relocate, tfmap
from coder_helpers import single_value_map
from conftest import random_map
from reference import avdz_reference
from toy import toy_maps

NATURAL = tuple(range(1, 27))


def test_depth_code_examples():
    assert encode_depth(1) == [0, 1]
    assert encode_depth(2) == [1, 0]
    assert encode_depth(3) == [1, 1]
    assert encode_depth(4) == [0, 0] + [0, 0, 1]
    assert encode_depth(10) == [0, 0, 1, 1, 1]
    assert encode_depth(11) == [0, 0, 0, 0, 0, 0, 0, 0, 1]
    assert encode_depth(25) == [0, 0, 0, 0, 0, 1, 1, 1, 1]


def test_depth_codes_roundtrip_exhaustively():
    for d in range(1, MAX_DEPTH + 1):
        assert decode_depth(encode_depth(d)) == d
        assert DEPTH_CODES[d] == encode_depth(d)


def test_depth_code_is_prefix_free():
    codes = ["".join(map(str, encode_depth(d))) for d in range(1, MAX_DEPTH + 1)]
    for a in codes:
        for b in codes:
            assert a == b or not b.startswith(a)


@pytest.mark.parametrize("d", [0, 26, -1])
def test_depth_out_of_range(d):
    with pytest.raises(ValueError):
        encode_depth(d)


def test_invalid_or_truncated_depth_code():
    with pytest.raises(ValueError):
        decode_depth([0] * 9)
    with pytest.raises(ValueError):
        decode_depth([0, 0, 0])


def test_row_three_example():
    # natural order: rows 1..3 are leaves 1..3, all 8 long, so every root owns
    # one coefficient per row; the only nonzero value sits in row 3 of root 4
    tf = tfmap(NATURAL)
    m = np.zeros(512, dtype=np.int64)
    m[2 * 8 + 4] = 6
    enc = encode_tf(m, tf)
    first = enc.bits[:enc.pass_marks[0]]
    lic = [0] * 8
    lis = [0, 0, 0, 0] + [1] + [1, 0] + [0] + [1, 0] + [0, 0, 0]
    assert first == lic + lis
    assert first == avdz_reference(m, tf)[:len(first)]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_matches_reference_on_toy_layouts(seed):
    rng = np.random.default_rng(seed)
    tfs = [tf for tf in toy_maps((2, 4, 2, 8, 8)) if tf.lengths[0] == 2]
    tf = tfs[rng.integers(len(tfs))]
    m = np.round(rng.laplace(0, 4, tf.size)).astype(np.int64)
    enc = encode_tf(m, tf)
    assert enc.bits == avdz_reference(m, tf)
    np.testing.assert_array_equal(decode_tf(enc.bits, enc.last_step_level, tf), m)


@pytest.mark.parametrize("seed", range(3))
def test_matches_reference_on_real_layout(seed):
    m = random_map(np.random.default_rng(seed))
    tf = tfmap(row_order(m)[0])
    assert encode_tf(m, tf).bits == avdz_reference(m, tf)


def test_requires_shortest_row_on_top():
    with pytest.raises(ValueError):
        encode_tf(np.ones(512, dtype=np.int64), tfmap(tuple(range(26, 0, -1))))


def test_row_order_promotes_shortest_row():
    m = np.zeros(512, dtype=np.int64)
    m[-64:] = 50  # leaf 26 (64 long) is the loudest
    order, sent = row_order(m)
    assert sent == (26,)
    assert order == avdz_relocate((26,) + NATURAL[:-1])
    assert order[:2] == (1, 26)


def test_single_five_midpoint_trace():
    m = single_value_map(5)
    enc = avdz_encode(m)
    vals = [int(avdz_decode(enc.bits[:cut], enc.last_step_level, enc.ordering,
                            recon="midpoint")[7]) for cut in enc.pass_marks]
    assert vals[0] == 6 and vals[-1] == 5
    assert 5 in vals[1:]


def test_corrupt_depth_stops_decoding():
    tf = tfmap(NATURAL)
    # root 1 significant in its tree with a depth of 25 rows: beyond the last row
    bits = [0] * 8 + [1] + encode_depth(25)
    out = decode_tf(bits, 3, tf)
    assert not out.any()


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_decoder_mirrors_encoder_work(seed):
    m = random_map(np.random.default_rng(seed))
    enc = avdz_encode(m)
    ops = Counter()
    avdz_decode(enc.bits, enc.last_step_level, enc.ordering, ops=ops)
    assert ops["bits"] == enc.ops["bits"] == len(enc.bits)
    assert abs(ops["list"] - enc.ops["list"]) <= 0.1 * enc.ops["list"]
