"""Residual vector quantization with beam-search encoding.

Quantizes vectors against a stack of per-level codebooks using either the
conventional greedy encoder, a beam-search encoder that trades compute for
lower quantization error, or an exhaustive oracle for small instances, plus
reconstruction metrics and a desk-scale waveform codec pipeline.
"""

from .codebooks import (
    Codebook,
    CodebookSet,
    GroupedCodebookSet,
    generate_random,
    load,
    load_grouped,
    save,
    save_grouped,
    train_residual_kmeans,
)
from .errors import CapacityError, FormatError
from .metrics import (
    CiStat,
    MelConfig,
    l2,
    log_mel_distance,
    mean_ci,
    mel_filterbank,
    si_snr,
    sq_l2,
    stft_mag,
)
from .pipeline import (
    CodecRun,
    FrameConfig,
    RoundtripSummary,
    codec_roundtrip,
    frame_signal,
    overlap_add,
)
from .quantizer import (
    BeamNode,
    BeamParams,
    CodeSequence,
    QuantResult,
    beam_search_nodes,
    decode,
    encode_batch,
    encode_beam,
    encode_exhaustive,
    encode_greedy,
    encode_grvq,
    grvq_decode,
    top_k_nearest,
)

__version__ = "0.1.0"

__all__ = [
    "BeamNode",
    "BeamParams",
    "CapacityError",
    "CiStat",
    "Codebook",
    "CodebookSet",
    "CodecRun",
    "CodeSequence",
    "FormatError",
    "FrameConfig",
    "GroupedCodebookSet",
    "MelConfig",
    "QuantResult",
    "RoundtripSummary",
    "beam_search_nodes",
    "codec_roundtrip",
    "decode",
    "encode_batch",
    "encode_beam",
    "encode_exhaustive",
    "encode_greedy",
    "encode_grvq",
    "frame_signal",
    "generate_random",
    "grvq_decode",
    "l2",
    "load",
    "load_grouped",
    "log_mel_distance",
    "mean_ci",
    "mel_filterbank",
    "overlap_add",
    "save",
    "save_grouped",
    "si_snr",
    "sq_l2",
    "stft_mag",
    "top_k_nearest",
    "train_residual_kmeans",
]
