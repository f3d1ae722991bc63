"""16-bit mono PCM WAV I/O and segmental SNR."""
from __future__ import annotations

import wave
from pathlib import Path

import numpy as np

from .subband import SAMPLE_RATE

PCM_SCALE = 32768.0
SEGMENT = 160  # 10 ms at 16 kHz
SNR_CAP_DB = 100.0


class WavFormatError(ValueError):
    """The WAV file is not 16-bit mono PCM at the codec rate."""


def read_wav(path, sample_rate: int = SAMPLE_RATE) -> np.ndarray:
    """Samples normalized to [-1, 1)."""
    try:
        with wave.open(str(path), "rb") as w:
            channels, width, rate = w.getnchannels(), w.getsampwidth(), w.getframerate()
            raw = w.readframes(w.getnframes())
    except (wave.Error, EOFError) as exc:
        raise WavFormatError(f"{path}: {exc}") from None
    if channels != 1:
        raise WavFormatError(f"{path}: {channels} channels, only mono is supported")
    if width != 2:
        raise WavFormatError(f"{path}: {8 * width}-bit samples, only 16-bit PCM is supported")
    if rate != sample_rate:
        raise WavFormatError(f"{path}: {rate} Hz, expected {sample_rate} Hz (no resampling)")
    return np.frombuffer(raw, dtype="<i2").astype(float) / PCM_SCALE


def to_pcm16(samples) -> np.ndarray:
    x = np.round(np.asarray(samples, dtype=float) * PCM_SCALE)
    return np.clip(x, -32768, 32767).astype("<i2")


def write_wav(path, samples, sample_rate: int = SAMPLE_RATE) -> None:
    with wave.open(str(Path(path)), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(sample_rate)
        w.writeframes(to_pcm16(samples).tobytes())


def segment_snrs(original, reconstructed, segment: int = SEGMENT,
                 cap: float = SNR_CAP_DB) -> np.ndarray:
    """Per-segment SNR in dB; silent segments dropped, exact ones capped."""
    x = np.asarray(original, dtype=float)
    y = np.asarray(reconstructed, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    n = len(x) // segment
    xs = x[:n * segment].reshape(n, segment)
    es = (xs - y[:n * segment].reshape(n, segment))
    sig = np.sum(xs * xs, axis=1)
    noise = np.sum(es * es, axis=1)
    keep = sig > 0
    sig, noise = sig[keep], noise[keep]
    out = np.full(len(sig), cap)
    hit = noise > 0
    out[hit] = np.minimum(cap, 10 * np.log10(sig[hit] / noise[hit]))
    return out


def segsnr(original, reconstructed, segment: int = SEGMENT, cap: float = SNR_CAP_DB) -> float:
    """Mean per-segment SNR (dB) over 10 ms segments; trailing partial segment ignored."""
    snrs = segment_snrs(original, reconstructed, segment, cap)
    if not len(snrs):
        raise ValueError("no segment carries signal energy")
    return float(snrs.mean())
