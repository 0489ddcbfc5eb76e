"""Affine subcode ensemble decoding of binary linear block codes."""

from .bp import DecoderConfig, OriginalCode, OwnSyndrome, build_tanner, decode, decode_batch, flip_llr_prefix
from .channel import ChannelPoint, SimConfig, run_fer, run_ler_allzero
from .code import LinearCode, append_rows, brute_force_ml, enumerate_cosets, from_pcm, verify_cover
from .ensemble import EnsembleSpec, build_batch, build_ensemble, decode_ensemble, decode_ensemble_batch
from .estimators import AscedDecoder, BPDecoder, MLDecoder, SSPCMOptimizer
from .gf2 import BitMatrix
from .sspcm import build_search_space, build_sspcm

__version__ = "0.1.0"

__all__ = [
    "BitMatrix",
    "LinearCode",
    "from_pcm",
    "append_rows",
    "enumerate_cosets",
    "verify_cover",
    "brute_force_ml",
    "DecoderConfig",
    "OwnSyndrome",
    "OriginalCode",
    "build_tanner",
    "decode",
    "decode_batch",
    "flip_llr_prefix",
    "build_search_space",
    "build_sspcm",
    "EnsembleSpec",
    "build_batch",
    "build_ensemble",
    "decode_ensemble",
    "decode_ensemble_batch",
    "ChannelPoint",
    "SimConfig",
    "run_fer",
    "run_ler_allzero",
    "BPDecoder",
    "AscedDecoder",
    "MLDecoder",
    "SSPCMOptimizer",
]
