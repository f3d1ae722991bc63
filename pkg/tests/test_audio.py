import wave

import numpy as np
import pytest

from avdzcodec.audio import SNR_CAP_DB, WavFormatError, read_wav, segment_snrs, segsnr, write_wav


def _segsnr_oracle(x, y, seg=160):
    vals = []
    for i in range(0, len(x) - seg + 1, seg):
        s = sum(v * v for v in x[i:i + seg])
        e = sum((a - b) ** 2 for a, b in zip(x[i:i + seg], y[i:i + seg]))
        if s > 0:
            vals.append(SNR_CAP_DB if e == 0 else min(SNR_CAP_DB, 10 * np.log10(s / e)))
    return sum(vals) / len(vals)


def test_identical_is_capped():
    x = np.sin(np.arange(1600) * 0.1)
    assert segsnr(x, x) == SNR_CAP_DB


def test_zero_reconstruction_is_zero_db():
    x = np.random.default_rng(0).standard_normal(1600)
    assert segsnr(x, np.zeros_like(x)) == pytest.approx(0.0, abs=1e-12)


def test_sine_with_dc_offset_matches_oracle():
    x = 0.5 * np.sin(2 * np.pi * 440 * np.arange(1700) / 16000)
    y = x + 0.01
    assert segsnr(x, y) == pytest.approx(_segsnr_oracle(x.tolist(), y.tolist()), rel=1e-9)
    # 0.125 / 1e-4 signal-to-noise power
    assert segsnr(x, y) == pytest.approx(10 * np.log10(0.125 / 1e-4), abs=0.2)


def test_silent_segments_are_skipped():
    x = np.concatenate([np.zeros(160), np.ones(160)])
    assert len(segment_snrs(x, 0.5 * x)) == 1
    with pytest.raises(ValueError):
        segsnr(np.zeros(320), np.zeros(320))


def test_length_mismatch():
    with pytest.raises(ValueError):
        segsnr(np.ones(320), np.ones(321))


def test_wav_roundtrip(tmp_path):
    x = np.random.default_rng(1).integers(-32768, 32768, 1000) / 32768
    write_wav(tmp_path / "a.wav", x)
    np.testing.assert_array_equal(read_wav(tmp_path / "a.wav"), x)


def test_wav_write_clips(tmp_path):
    write_wav(tmp_path / "c.wav", [2.0, -2.0, 0.5])
    np.testing.assert_array_equal(read_wav(tmp_path / "c.wav"), [32767 / 32768, -1.0, 0.5])


def _raw_wav(path, channels=1, width=2, rate=16000):
    with wave.open(str(path), "wb") as w:
        w.setnchannels(channels)
        w.setsampwidth(width)
        w.setframerate(rate)
        w.writeframes(bytes(channels * width * 10))


@pytest.mark.parametrize("kw", [{"channels": 2}, {"width": 1}, {"rate": 8000}])
def test_unsupported_wavs(tmp_path, kw):
    _raw_wav(tmp_path / "x.wav", **kw)
    with pytest.raises(WavFormatError):
        read_wav(tmp_path / "x.wav")


def test_not_a_wav(tmp_path):
    (tmp_path / "x.wav").write_bytes(b"hello")
    with pytest.raises(WavFormatError):
        read_wav(tmp_path / "x.wav")
