import numpy as np
import pytest

from avdzcodec.audio import write_wav
from avdzcodec.bench import AVERAGE, MetricsRow, benchmark, file_table, parse_variant, read_csv, to_csv
from avdzcodec.corpus import synthesize_utterance


def test_empty_directory_gives_header_only(tmp_path):
    assert to_csv(benchmark(tmp_path)) == "file,coder,bit_rate,segsnr_db,encode_s,decode_s\n"


def test_parse_variant():
    assert parse_variant("avdz") == ("avdz", True)
    assert parse_variant("mezw-u7") == ("mezw", False)
    with pytest.raises(ValueError):
        parse_variant("zip-u7")


def test_rows_columns_and_roundtrip(tmp_path):
    write_wav(tmp_path / "a.wav", synthesize_utterance(0.3, 3))
    (tmp_path / "bad.wav").write_bytes(b"junk")
    variants = ("ezw", "avdz", "avdz-u7")
    rows = benchmark(tmp_path, variants, repeats=1)
    assert [r.coder for r in rows] == list(variants) * 2
    assert [r.file for r in rows] == ["a.wav"] * 3 + [AVERAGE] * 3
    assert MetricsRow.columns() == ["file", "coder", "bit_rate", "segsnr_db", "encode_s", "decode_s"]
    back = read_csv(to_csv(rows))
    for r, b in zip(rows, back):
        assert (r.file, r.coder) == (b.file, b.coder)
        assert b.bit_rate == pytest.approx(r.bit_rate, abs=0.05)
    table = file_table(rows)
    assert set(table) == {"a.wav"} and table["a.wav"]["avdz"] > 0
    # perceptual and uniform variants share the same re-encoder, not the same maps
    assert table["a.wav"]["avdz"] != table["a.wav"]["avdz-u7"]
    assert np.isfinite([r.segsnr_db for r in rows]).all()
