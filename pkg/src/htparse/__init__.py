"""Easy-first dependency parsing with hierarchical tree-LSTM subtree encodings."""

from .config import ConfigError, ModelConfig, TrainConfig
from .corpus import (
    Arc,
    DropoutPolicy,
    Sentence,
    Token,
    Vocab,
    build_vocab,
    dropout_replace,
    is_projective,
    load_pretrained_embeddings,
    read_conll,
    write_conll,
)
from .evaluation import AlignmentError, EvalReport, evaluate
from .model import ParserModel
from .training import train

__version__ = "0.1.0"
