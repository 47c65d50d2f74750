"""Corpus engineering and evaluation toolkit for Arabic text-to-text models."""

__version__ = "0.1.0"

from .normalize import NormalizationConfig, normalize
from .tokenizer import SubwordModel, decode, encode, train
from .denoise import CorruptionConfig, corrupt, reconstruct
from .codeswitch import CSConfig, code_switch_rate, synthesize
from .paraphrase import MiningConfig, mine, split_dataset, unigram_overlap
from .metrics import arlue_score, bleu, rouge_l, rouge_n

__all__ = [
    "__version__",
    "NormalizationConfig",
    "normalize",
    "SubwordModel",
    "train",
    "encode",
    "decode",
    "CorruptionConfig",
    "corrupt",
    "reconstruct",
    "CSConfig",
    "synthesize",
    "code_switch_rate",
    "MiningConfig",
    "mine",
    "unigram_overlap",
    "split_dataset",
    "bleu",
    "rouge_n",
    "rouge_l",
    "arlue_score",
]
