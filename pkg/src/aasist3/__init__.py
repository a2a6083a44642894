"""AASIST3 audio anti-spoofing on numpy.

Raw 16 kHz audio goes through pre-emphasis and a fixed sinc filterbank, a
residual convolutional encoder, temporal and spatial graphs processed by
KAN-based graph attention and pooling, and parallel heterogeneous stacking
branches, ending in a two-class KAN readout.
"""

from .checkpoint import load_checkpoint, save_checkpoint
from .config import Config, MetricConfig, ModelConfig, TrainConfig, load_config, pocket_model_config
from .dsp import AudioSignal, SincFilterbank, chunk_signal, pre_emphasis, sinc_conv
from .errors import Aasist3Error
from .eval import compute_eer, compute_min_dcf
from .model import Aasist3Model, fuse_scores, score_utterance
from .wavio import read_wav, write_wav

__version__ = "0.1.0"

__all__ = [
    "Aasist3Error",
    "Aasist3Model",
    "AudioSignal",
    "Config",
    "MetricConfig",
    "ModelConfig",
    "SincFilterbank",
    "TrainConfig",
    "chunk_signal",
    "compute_eer",
    "compute_min_dcf",
    "fuse_scores",
    "load_checkpoint",
    "load_config",
    "pocket_model_config",
    "pre_emphasis",
    "read_wav",
    "save_checkpoint",
    "score_utterance",
    "sinc_conv",
    "write_wav",
]
