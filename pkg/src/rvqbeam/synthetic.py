"""Seeded synthetic data so benchmarks and tests need no external corpora."""

from __future__ import annotations

import numpy as np


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed) & 0xFFFF_FFFF_FFFF_FFFF)


def gaussian_mixture_frames(seed: int, n: int, dim: int, components: int = 8) -> np.ndarray:
    """Frames drawn from a seeded Gaussian mixture, shape (n, dim).

    Component means and scales are themselves drawn from the seed, giving a
    clusterable distribution that k-means codebooks can model.
    """
    if n < 1 or dim < 1 or components < 1:
        raise ValueError(f"n, dim, components must be >= 1, got ({n}, {dim}, {components})")
    rng = _rng(seed)
    means = rng.normal(0.0, 2.0, size=(components, dim))
    scales = rng.uniform(0.3, 1.0, size=components)
    which = rng.integers(0, components, size=n)
    noise = rng.standard_normal((n, dim))
    return means[which] + noise * scales[which][:, None]


def noise_tone_signal(seed: int, seconds: float, sample_rate: int, n_tones: int = 3) -> np.ndarray:
    """A noise-plus-tones test waveform with peak amplitude 0.9."""
    if seconds <= 0 or sample_rate < 1:
        raise ValueError(f"seconds must be > 0 and sample_rate >= 1, got ({seconds}, {sample_rate})")
    rng = _rng(seed)
    n = int(round(seconds * sample_rate))
    t = np.arange(n) / sample_rate
    sig = 0.25 * rng.standard_normal(n)
    freqs = rng.uniform(80.0, 0.4 * sample_rate, size=n_tones)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n_tones)
    amps = rng.uniform(0.2, 0.6, size=n_tones)
    for f, p, a in zip(freqs, phases, amps):
        sig = sig + a * np.sin(2.0 * np.pi * f * t + p)
    peak = np.abs(sig).max()
    return sig * (0.9 / peak) if peak > 0 else sig
