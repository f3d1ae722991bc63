import numpy as np

from avdzcodec.audio import read_wav
from avdzcodec.corpus import PEAK_LEVEL, synthesize_utterance, write_clip, write_corpus


def test_deterministic():
    a = synthesize_utterance(0.5, 4)
    np.testing.assert_array_equal(a, synthesize_utterance(0.5, 4))
    assert not np.array_equal(a, synthesize_utterance(0.5, 5))


def test_peak_level():
    x = synthesize_utterance(0.5, 2)
    assert len(x) == 8000
    assert abs(np.max(np.abs(x)) - PEAK_LEVEL) < 1e-12


def test_spectrum_falls_with_frequency():
    x = synthesize_utterance(2.0, 1)
    spec = np.abs(np.fft.rfft(x)) ** 2
    f = np.fft.rfftfreq(len(x), 1 / 16000)
    low = spec[(f > 300) & (f < 1000)].mean()
    high = spec[(f > 4000) & (f < 8000)].mean()
    assert low > 10 * high


def test_write_corpus(tmp_path):
    paths = write_corpus(tmp_path / "c", n_files=2, seconds=0.2)
    assert [p.name for p in paths] == ["speech01.wav", "speech02.wav"]
    assert len(read_wav(paths[0])) == 3200
    clip = write_clip(tmp_path / "clip.wav", seconds=0.25)
    assert len(read_wav(clip)) == 4000


def test_bundled_corpus(corpus_files, clip_samples):
    assert len(corpus_files) == 16
    assert len(clip_samples) == 160000
