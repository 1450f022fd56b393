"""Reconstruction metrics: L2 error, SI-SNR, log-mel spectral distance, CIs.

Aggregation uses exactly rounded compensated summation (``math.fsum``), so
means and confidence intervals do not depend on reduction order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

SI_SNR_CAP_DB = 120.0


@dataclass(frozen=True)
class MelConfig:
    """STFT and mel-filterbank parameters for the spectral distance."""

    fft_size: int = 1024
    hop: int = 256
    n_mels: int = 80
    sample_rate: int = 24000
    log_floor: float = 1e-5

    def __post_init__(self):
        if self.fft_size < 2:
            raise ValueError(f"fft_size must be >= 2, got {self.fft_size}")
        if not 1 <= self.hop <= self.fft_size:
            raise ValueError(f"hop must be in [1, fft_size], got {self.hop}")
        if self.n_mels < 1:
            raise ValueError(f"n_mels must be >= 1, got {self.n_mels}")
        if self.sample_rate < 1:
            raise ValueError(f"sample_rate must be >= 1, got {self.sample_rate}")
        if not self.log_floor > 0:
            raise ValueError(f"log_floor must be > 0, got {self.log_floor}")

    @property
    def n_bins(self) -> int:
        return self.fft_size // 2 + 1


@dataclass(frozen=True)
class CiStat:
    """Sample mean with a 95% normal-approximation confidence half-width."""

    mean: float
    half_width: float
    n: int


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise ValueError("inputs must be 1-D")
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a, b


def sq_l2(x, y) -> float:
    """Squared Euclidean distance."""
    a, b = _pair(x, y)
    d = a - b
    return float((d * d).sum())


def l2(x, y) -> float:
    """Euclidean distance."""
    return math.sqrt(sq_l2(x, y))


def si_snr(target, estimate) -> float:
    """Scale-invariant signal-to-noise ratio in dB.

    Both signals are mean-removed; the estimate is split into its projection
    onto the target and a residual. The result is clamped to +/-120 dB so a
    perfect (or fully orthogonal) match stays finite in reports.
    """
    t, e = _pair(target, estimate)
    if t.shape[0] < 1:
        raise ValueError("signals must contain at least one sample")
    t0 = t - t.mean()
    e0 = e - e.mean()
    tt = float((t0 * t0).sum())
    if tt == 0.0:
        raise ValueError("target has no energy after mean removal")
    s = (float((e0 * t0).sum()) / tt) * t0
    r = e0 - s
    ss = float((s * s).sum())
    rr = float((r * r).sum())
    if rr == 0.0:
        return SI_SNR_CAP_DB
    if ss == 0.0:
        return -SI_SNR_CAP_DB
    return float(np.clip(10.0 * math.log10(ss / rr), -SI_SNR_CAP_DB, SI_SNR_CAP_DB))


def _hann(n: int) -> np.ndarray:
    return get_window("hann", n, fftbins=True)


def stft_mag(signal, cfg: MelConfig) -> np.ndarray:
    """Hann-windowed magnitude spectrogram, shape (frames, fft_size//2 + 1).

    Frames are centered: the signal is reflect-padded by fft_size//2 on both
    sides, giving 1 + len(signal)//hop frames.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("signal must be 1-D")
    if x.shape[0] < cfg.fft_size:
        raise ValueError(f"signal length {x.shape[0]} is shorter than fft_size {cfg.fft_size}")
    pad = cfg.fft_size // 2
    padded = np.pad(x, pad, mode="reflect")
    n_frames = 1 + x.shape[0] // cfg.hop
    frames = np.lib.stride_tricks.sliding_window_view(padded, cfg.fft_size)[:: cfg.hop]
    frames = frames[:n_frames] * _hann(cfg.fft_size)
    return np.abs(np.fft.rfft(frames, axis=1))


def mel_band_edges(cfg: MelConfig) -> np.ndarray:
    """n_mels + 2 band-edge frequencies in Hz, uniformly spaced on the mel
    scale m = 2595 * log10(1 + f / 700) from 0 Hz to Nyquist."""
    top_mel = 2595.0 * math.log10(1.0 + (cfg.sample_rate / 2.0) / 700.0)
    mels = np.linspace(0.0, top_mel, cfg.n_mels + 2)
    return 700.0 * (np.power(10.0, mels / 2595.0) - 1.0)


def mel_filterbank(cfg: MelConfig) -> np.ndarray:
    """Triangular mel filters, shape (n_mels, fft_size//2 + 1).

    Each row is normalized to sum to 1 over the FFT bins it covers.
    """
    edges = mel_band_edges(cfg)
    freqs = np.arange(cfg.n_bins) * (cfg.sample_rate / cfg.fft_size)
    lower = edges[:-2, None]
    center = edges[1:-1, None]
    upper = edges[2:, None]
    rise = (freqs[None, :] - lower) / (center - lower)
    fall = (upper - freqs[None, :]) / (upper - center)
    weights = np.maximum(0.0, np.minimum(rise, fall))
    sums = weights.sum(axis=1, keepdims=True)
    return np.divide(weights, sums, out=np.zeros_like(weights), where=sums > 0)


def log_mel_distance(a, b, cfg: MelConfig | None = None) -> float:
    """Mean absolute difference between log mel spectrograms."""
    cfg = cfg or MelConfig()
    x, y = _pair(a, b)
    fb = mel_filterbank(cfg).T
    mel_a = stft_mag(x, cfg) @ fb
    mel_b = stft_mag(y, cfg) @ fb
    return float(np.abs(np.log(mel_a + cfg.log_floor) - np.log(mel_b + cfg.log_floor)).mean())


def mean_ci(values) -> CiStat:
    """Sample mean with a 1.96 * std / sqrt(n) half-width (std uses n - 1)."""
    vals = [float(v) for v in values]
    n = len(vals)
    if n < 1:
        raise ValueError("need at least one value")
    mean = math.fsum(vals) / n
    if n == 1:
        return CiStat(mean=mean, half_width=0.0, n=1)
    var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1)
    return CiStat(mean=mean, half_width=1.96 * math.sqrt(var) / math.sqrt(n), n=n)
