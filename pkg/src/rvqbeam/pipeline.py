"""Desk-scale waveform codec: frame, quantize, reconstruct by overlap-add.

This pipeline stands in for a learned encoder/decoder: the quantizers operate
directly on windowed waveform frames, which makes end-to-end SI-SNR and
spectral-distance comparisons possible without any pretrained model. Absolute
numbers are therefore specific to this setup; only directional comparisons
between encoding strategies are meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.io.wavfile
from scipy.signal import check_COLA, get_window

from .codebooks import CodebookSet, GroupedCodebookSet
from .metrics import MelConfig, log_mel_distance, si_snr
from .quantizer import (
    BeamParams,
    QuantResult,
    encode_batch,
    encode_exhaustive,
    encode_greedy,
    encode_grvq,
)

ENVELOPE_FLOOR = 1e-8

STRATEGIES = ("greedy", "beam", "exhaustive")


@dataclass(frozen=True)
class FrameConfig:
    """Analysis/synthesis framing; window and hop must overlap-add to a
    constant (checked at construction, tolerance 1e-6)."""

    frame_len: int
    hop: int
    window: str = "hann"

    def __post_init__(self):
        if self.frame_len < 1:
            raise ValueError(f"frame_len must be >= 1, got {self.frame_len}")
        if not 0 < self.hop <= self.frame_len:
            raise ValueError(f"hop must be in (0, frame_len], got {self.hop}")
        if self.window not in ("hann", "rectangular"):
            raise ValueError(f"window must be 'hann' or 'rectangular', got {self.window!r}")
        if not check_COLA(self.window_values(), self.frame_len, self.frame_len - self.hop, tol=1e-6):
            raise ValueError(
                f"window {self.window!r} with frame_len {self.frame_len} and hop "
                f"{self.hop} does not satisfy constant overlap-add"
            )

    def window_values(self) -> np.ndarray:
        if self.window == "rectangular":
            return np.ones(self.frame_len)
        return get_window("hann", self.frame_len, fftbins=True)


@dataclass(frozen=True, eq=False)
class CodecRun:
    """One end-to-end configuration: codebooks, framing, strategy, levels."""

    codebooks: CodebookSet | GroupedCodebookSet
    frame_cfg: FrameConfig
    n_q: int
    strategy: str = "beam"
    beam_size: int = 1
    search_k: int | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        dim = (
            self.codebooks.total_dim
            if isinstance(self.codebooks, GroupedCodebookSet)
            else self.codebooks.dim
        )
        if self.frame_cfg.frame_len != dim:
            raise ValueError(
                f"frame_len {self.frame_cfg.frame_len} must equal codebook dim {dim}"
            )
        if not 1 <= self.n_q <= self.codebooks.num_levels:
            raise ValueError(
                f"n_q must be in [1, {self.codebooks.num_levels}], got {self.n_q}"
            )
        if isinstance(self.codebooks, GroupedCodebookSet) and self.strategy != "beam":
            raise ValueError("grouped codebooks support only the beam strategy")

    def beam_params(self) -> BeamParams:
        return BeamParams(beam_size=self.beam_size, levels=self.n_q, search_k=self.search_k)


@dataclass(frozen=True)
class RoundtripSummary:
    """Aggregate metrics of one codec round-trip."""

    n_frames: int
    n_q: int
    mean_sq_err: float
    mean_l2_err: float
    si_snr_db: float
    log_mel_dist: float | None
    index_bits_per_sec: float


def frame_signal(signal, cfg: FrameConfig) -> np.ndarray:
    """Windowed frames at hop offsets; the trailing partial frame is
    zero-padded. Shape (n_frames, frame_len)."""
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("signal must be 1-D")
    if x.shape[0] < cfg.frame_len:
        raise ValueError(f"signal length {x.shape[0]} is shorter than frame_len {cfg.frame_len}")
    n = 1 + (x.shape[0] - cfg.frame_len + cfg.hop - 1) // cfg.hop
    total = (n - 1) * cfg.hop + cfg.frame_len
    padded = np.pad(x, (0, total - x.shape[0]))
    frames = np.lib.stride_tricks.sliding_window_view(padded, cfg.frame_len)[:: cfg.hop]
    return np.ascontiguousarray(frames[:n] * cfg.window_values())


def overlap_add(frames, cfg: FrameConfig, out_len: int) -> np.ndarray:
    """Windowed overlap-add divided by the accumulated squared-window
    envelope (floored at 1e-8); inverse of :func:`frame_signal` away from
    the signal boundaries."""
    f = np.asarray(frames, dtype=np.float64)
    if f.ndim != 2 or f.shape[1] != cfg.frame_len:
        raise ValueError(f"expected frames of shape (n, {cfg.frame_len}), got {f.shape}")
    if out_len < 0:
        raise ValueError(f"out_len must be >= 0, got {out_len}")
    win = cfg.window_values()
    total = (max(f.shape[0], 1) - 1) * cfg.hop + cfg.frame_len
    acc = np.zeros(total)
    env = np.zeros(total)
    wsq = win * win
    for i in range(f.shape[0]):
        start = i * cfg.hop
        acc[start : start + cfg.frame_len] += win * f[i]
        env[start : start + cfg.frame_len] += wsq
    out = acc / np.maximum(env, ENVELOPE_FLOOR)
    if out_len <= total:
        return out[:out_len]
    return np.pad(out, (0, out_len - total))


def _encode_frames(frames: np.ndarray, run: CodecRun, threads: int | None, parallel: bool):
    if isinstance(run.codebooks, GroupedCodebookSet):
        params = run.beam_params()
        return [encode_grvq(f, run.codebooks, params) for f in frames]
    if run.strategy == "greedy":
        return [encode_greedy(f, run.codebooks, run.n_q) for f in frames]
    if run.strategy == "exhaustive":
        return [encode_exhaustive(f, run.codebooks, run.n_q) for f in frames]
    mode = "parallel" if parallel else "sequential"
    return encode_batch(frames, run.codebooks, run.beam_params(), mode=mode, threads=threads)


def _frame_vector(result) -> np.ndarray:
    if isinstance(result, QuantResult):
        return result.quantized
    return np.concatenate([r.quantized for r in result])


def _frame_sq_err(result) -> float:
    if isinstance(result, QuantResult):
        return result.sq_err
    return math.fsum(r.sq_err for r in result)


def codec_roundtrip(
    signal,
    run: CodecRun,
    sample_rate: int = 24000,
    mel_cfg: MelConfig | None = None,
    threads: int | None = None,
    parallel: bool = False,
):
    """Frame, encode per strategy, decode, and overlap-add back to a signal.

    Returns ``(reconstructed, per_frame_results, summary)``. For grouped
    codebooks each per-frame result is a list with one QuantResult per group.
    The first and last frame_len samples are excluded from the SI-SNR and
    spectral-distance comparisons to keep windowing edge effects out of the
    metrics; the mel distance is None when the interior is shorter than one
    FFT frame.
    """
    x = np.asarray(signal, dtype=np.float64)
    frames = frame_signal(x, run.frame_cfg)
    results = _encode_frames(frames, run, threads, parallel)
    decoded = np.stack([_frame_vector(r) for r in results])
    recon = overlap_add(decoded, run.frame_cfg, x.shape[0])

    errs = [_frame_sq_err(r) for r in results]
    mean_sq = math.fsum(errs) / len(errs)
    mean_l2 = math.fsum(math.sqrt(e) for e in errs) / len(errs)

    lo, hi = run.frame_cfg.frame_len, x.shape[0] - run.frame_cfg.frame_len
    mel_cfg = mel_cfg or MelConfig(sample_rate=sample_rate)
    if hi - lo >= 2:
        snr = si_snr(x[lo:hi], recon[lo:hi])
    else:
        snr = math.nan
    mel = (
        log_mel_distance(x[lo:hi], recon[lo:hi], mel_cfg)
        if hi - lo >= mel_cfg.fft_size
        else None
    )

    sizes = (
        run.codebooks.groups[0].sizes
        if isinstance(run.codebooks, GroupedCodebookSet)
        else run.codebooks.sizes
    )
    bits_per_frame = sum(math.log2(sizes[i]) for i in range(run.n_q))
    if isinstance(run.codebooks, GroupedCodebookSet):
        bits_per_frame *= run.codebooks.num_groups
    summary = RoundtripSummary(
        n_frames=len(results),
        n_q=run.n_q,
        mean_sq_err=mean_sq,
        mean_l2_err=mean_l2,
        si_snr_db=snr,
        log_mel_dist=mel,
        index_bits_per_sec=bits_per_frame * sample_rate / run.frame_cfg.hop,
    )
    return recon, results, summary


# ---------------------------------------------------------------------------
# Audio file I/O: mono WAV (PCM16 / float32) and headerless .f32 raw.
# ---------------------------------------------------------------------------


def read_wav(path) -> tuple[np.ndarray, int]:
    """Mono WAV as float64 in [-1, 1] plus its sample rate."""
    rate, data = scipy.io.wavfile.read(path)
    if data.ndim != 1:
        raise ValueError(f"{path}: expected mono audio, got {data.ndim} channels")
    if data.dtype == np.int16:
        return data.astype(np.float64) / 32768.0, int(rate)
    if data.dtype in (np.float32, np.float64):
        return data.astype(np.float64), int(rate)
    raise ValueError(f"{path}: unsupported WAV sample format {data.dtype}")


def write_wav(path, signal, sample_rate: int, pcm16: bool = False) -> None:
    x = np.asarray(signal, dtype=np.float64)
    if pcm16:
        data = np.round(np.clip(x, -1.0, 1.0) * 32767.0).astype(np.int16)
    else:
        data = x.astype(np.float32)
    scipy.io.wavfile.write(path, sample_rate, data)


def read_f32(path) -> np.ndarray:
    """Headerless little-endian float32 stream as float64."""
    return np.fromfile(path, dtype="<f4").astype(np.float64)


def write_f32(path, values) -> None:
    np.asarray(values, dtype=np.float64).astype("<f4").tofile(path)
