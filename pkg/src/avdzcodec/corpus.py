"""Deterministic formant-synthesized speech for tests and benchmarks.

Each utterance is a sequence of words; a word is a few syllables made of an
optional consonant (fricative, plosive burst or nasal murmur) followed by a
vowel. Voiced sounds are a jittered glottal pulse train through a cascade of
time-varying formant resonators; fricatives are band-passed noise. Words are
separated by short pauses over a low noise floor, and every utterance is
peak-normalized to -1 dBFS. Source tilt, formant set and fricative levels
are set so the long-term spectrum falls roughly 6 dB per octave above
500 Hz, like the long-term average spectrum of real speech.
"""
from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np
from scipy import signal

from .audio import write_wav
from .subband import SAMPLE_RATE

FS = SAMPLE_RATE
BLOCK = 80  # formant update interval (5 ms)

# F1..F4 targets (Hz) for an adult male voice; F5 is fixed
VOWELS = {
    "a": (730, 1090, 2440, 3400),
    "ae": (660, 1720, 2410, 3400),
    "e": (530, 1840, 2480, 3500),
    "i": (270, 2290, 3010, 3700),
    "o": (570, 840, 2410, 3300),
    "u": (300, 870, 2240, 3300),
    "er": (490, 1350, 1690, 3300),
    "uh": (520, 1190, 2390, 3400),
}
F5 = 4500.0
BANDWIDTHS = (80, 100, 140, 200, 300)
FRICATIVES = {"s": (4000, 7600, 0.20), "sh": (2000, 6000, 0.24),
              "f": (1200, 7600, 0.08), "h": (500, 5000, 0.10)}
NASAL = (280, 1300, 2500, 3400)

PEAK_LEVEL = 10 ** (-1 / 20)  # files are peak-normalized to -1 dBFS
NOISE_FLOOR = 3e-4
CORPUS_FILES = 16
CORPUS_SECONDS = 4.0
CLIP_SECONDS = 10.0
CLIP_SEED = 1000


class _Resonators:
    """Cascade of two-pole resonators with state carried across blocks."""

    def __init__(self, n: int):
        self.state = [np.zeros(2) for _ in range(n)]

    def run(self, x: np.ndarray, freqs, bws) -> np.ndarray:
        for i, (f, bw) in enumerate(zip(freqs, bws)):
            r = np.exp(-np.pi * bw / FS)
            a = [1.0, -2 * r * np.cos(2 * np.pi * f / FS), r * r]
            x, self.state[i] = signal.lfilter([sum(a)], a, x, zi=self.state[i])
        return x


def _glottal(n: int, f0: np.ndarray, rng, phase: float) -> tuple[np.ndarray, float]:
    """Pulse train with per-sample pitch ``f0`` and 1 % jitter."""
    inc = f0 * (1 + 0.01 * rng.standard_normal(n)) / FS
    ph = phase + np.cumsum(inc)
    pulses = np.diff(np.floor(ph), prepend=np.floor(phase)).astype(float)
    return pulses, float(ph[-1] % 1.0)


def _band_noise(n: int, lo: float, hi: float, rng) -> np.ndarray:
    sos = signal.butter(4, [lo, min(hi, 0.49 * FS)], btype="bandpass", fs=FS, output="sos")
    return signal.sosfilt(sos, rng.standard_normal(n))


def _envelope(n: int, attack: int, release: int) -> np.ndarray:
    env = np.ones(n)
    a, r = min(attack, n // 2), min(release, n // 2)
    env[:a] = np.linspace(0, 1, a, endpoint=False)
    if r:
        env[n - r:] = np.linspace(1, 0, r)
    return env


def _voiced(n: int, start, end, f0, rng, res: _Resonators, phase: float):
    """Voiced segment gliding from formants ``start`` to ``end``."""
    pulses, phase = _glottal(n, f0, rng, phase)
    # glottal shaping (-12 dB/oct), lip radiation (+6 dB/oct), mild presence boost
    src = signal.lfilter([1.0], [1.0, -1.9, 0.9025], pulses)
    src = signal.lfilter([1.0, -1.0], [1.0], src)
    src = signal.lfilter([1.5, -0.5], [1.0], src) + 0.02 * rng.standard_normal(n)
    out = np.empty(n)
    start, end = np.asarray(start, float), np.asarray(end, float)
    for b in range(0, n, BLOCK):
        t = min(1.0, (b + BLOCK / 2) / n)
        freqs = start + (end - start) * (3 * t * t - 2 * t ** 3)
        out[b:b + BLOCK] = res.run(src[b:b + BLOCK], (*freqs, F5), BANDWIDTHS)
    return out, phase


def synthesize_utterance(seconds: float, seed: int) -> np.ndarray:
    """One speaker reading random syllables for ``seconds`` seconds."""
    rng = np.random.default_rng(seed)
    n_total = int(round(seconds * FS))
    female = rng.random() < 0.5
    base_f0 = rng.uniform(170, 230) if female else rng.uniform(90, 135)
    fscale = rng.uniform(1.1, 1.2) if female else rng.uniform(0.95, 1.05)
    res = _Resonators(len(BANDWIDTHS))
    phase = 0.0
    prev = np.array(VOWELS["uh"]) * fscale
    chunks: list[np.ndarray] = [np.zeros(int(rng.uniform(0.05, 0.2) * FS))]
    length = len(chunks[0])
    names = list(VOWELS)

    while length < n_total:
        for _ in range(rng.integers(1, 4)):  # syllables per word
            kind = rng.choice(["none", "fric", "stop", "nasal"], p=[0.3, 0.3, 0.2, 0.2])
            if kind == "fric":
                lo, hi, gain = FRICATIVES[rng.choice(list(FRICATIVES))]
                n = int(rng.uniform(0.06, 0.14) * FS)
                chunks.append(gain * _band_noise(n, lo, hi, rng) * _envelope(n, 160, 160))
            elif kind == "stop":
                gap = int(rng.uniform(0.02, 0.05) * FS)
                n = int(rng.uniform(0.01, 0.025) * FS)
                burst = _band_noise(n, rng.uniform(1500, 3000), 7600, rng)
                chunks += [np.zeros(gap), 0.25 * burst * np.exp(-np.arange(n) / (0.3 * n))]
            elif kind == "nasal":
                n = int(rng.uniform(0.04, 0.08) * FS)
                f0 = np.full(n, base_f0)
                nasal = np.array(NASAL) * fscale
                seg, phase = _voiced(n, nasal, nasal, f0, rng, res, phase)
                chunks.append(0.3 * seg * _envelope(n, 80, 40))
                prev = nasal
            n = int(rng.uniform(0.08, 0.25) * FS)
            target = np.array(VOWELS[names[rng.integers(len(names))]]) * fscale
            glide = base_f0 * (1 + 0.15 * np.sin(np.linspace(0, np.pi, n) + rng.uniform(0, np.pi)))
            f0 = glide * np.linspace(1.05, 0.92, n)
            seg, phase = _voiced(n, prev, target, f0, rng, res, phase)
            chunks.append(seg * _envelope(n, 240, 400) * rng.uniform(0.6, 1.0))
            prev = target
        pause = rng.uniform(0.3, 0.6) if rng.random() < 0.15 else rng.uniform(0.04, 0.15)
        chunks.append(np.zeros(int(pause * FS)))
        length = sum(len(c) for c in chunks)

    x = np.concatenate(chunks)[:n_total]
    x /= max(1e-9, np.max(np.abs(x)))
    x += NOISE_FLOOR * rng.standard_normal(n_total)  # recording noise floor
    return x * (PEAK_LEVEL / np.max(np.abs(x)))


def corpus_seeds(n_files: int = CORPUS_FILES) -> list[int]:
    return list(range(1, n_files + 1))


def write_corpus(directory, n_files: int = CORPUS_FILES, seconds: float = CORPUS_SECONDS) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for seed in corpus_seeds(n_files):
        path = directory / f"speech{seed:02d}.wav"
        write_wav(path, synthesize_utterance(seconds, seed))
        paths.append(path)
    return paths


def write_clip(path, seconds: float = CLIP_SECONDS) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_wav(path, synthesize_utterance(seconds, CLIP_SEED))
    return path


def bundled_corpus_dir() -> Path:
    """Directory of the bundled speech corpus WAVs."""
    return Path(str(resources.files("avdzcodec").joinpath("data").joinpath("corpus")))


def bundled_clip() -> Path:
    return Path(str(resources.files("avdzcodec").joinpath("data").joinpath("clip10s.wav")))
