import numpy as np
import pytest

from avdzcodec.audio import read_wav
from avdzcodec.corpus import bundled_clip, bundled_corpus_dir


def random_map(rng, size=512, max_mag=127):
    """Laplacian integer map with a random scale, clipped to ``max_mag``."""
    scale = rng.uniform(1, 40)
    return np.clip(np.round(rng.laplace(0, scale, size)), -max_mag, max_mag).astype(np.int64)


def short_row_heavy_map(rng):
    """Energy concentrated in the shortest rows (leaves 1..8 and 17, 18)."""
    from avdzcodec.subband import make_layout
    layout = make_layout()
    m = np.zeros(512, dtype=np.int64)
    for leaf in layout.leaves:
        scale = rng.uniform(10, 60) if leaf.coeff_count == 8 else rng.uniform(0.2, 2)
        m[leaf.slice] = np.round(rng.laplace(0, scale, leaf.coeff_count))
    return np.clip(m, -127, 127)


@pytest.fixture(scope="session")
def corpus_dir():
    return bundled_corpus_dir()


@pytest.fixture(scope="session")
def corpus_files(corpus_dir):
    return sorted(corpus_dir.glob("*.wav"))


@pytest.fixture(scope="session")
def clip_samples():
    return read_wav(bundled_clip())


_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record and print the one-line PASS/FAIL verdict of an acceptance criterion."""
    def report(number: int, ok: bool, summary: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {summary}"
        _CRITERIA[number] = line
        print(line)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])
