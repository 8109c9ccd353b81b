"""Joint document/word embeddings from document streams with content.

Train with `hdv.trainer.train`, retrieve with `hdv.query`, persist with
`hdv.model_io`, evaluate with `hdv.evaluation`.
"""

from .corpus import Corpus, SequenceStats, Vocabulary, build_corpus, corpus_from_sequences, sequence_stats, tokenize
from .errors import CorpusFormatError, HdvError, ModelFormatError, UnknownTokenError
from .evaluation import LabeledSet, SyntheticSpec, compare_modes, cross_validate, generate_synthetic, parse_labels
from .huffman import HuffmanTree, build_tree, expected_code_length
from .model import (
    ModelParams,
    TrainConfig,
    TrainingExample,
    context_vector,
    example_loss,
    init_params,
    loss_and_grads,
    set_exact_sigmoid,
    sgd_update,
    sigmoid,
    target_distribution,
    target_probability,
)
from .model_io import export_embeddings, load_model, load_text_embeddings, save_model
from .query import Neighbor, QueryIndex, build_index, cosine, index_from_model, nearest, recommend, tag_document
from .trainer import TrainReport, corpus_objective, epoch_examples, learning_rate, scheduled_example_count, train

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "CorpusFormatError",
    "HdvError",
    "HuffmanTree",
    "LabeledSet",
    "ModelFormatError",
    "ModelParams",
    "Neighbor",
    "QueryIndex",
    "SequenceStats",
    "SyntheticSpec",
    "TrainConfig",
    "TrainReport",
    "TrainingExample",
    "UnknownTokenError",
    "Vocabulary",
    "build_corpus",
    "build_index",
    "build_tree",
    "compare_modes",
    "context_vector",
    "corpus_from_sequences",
    "corpus_objective",
    "cosine",
    "cross_validate",
    "epoch_examples",
    "example_loss",
    "expected_code_length",
    "export_embeddings",
    "generate_synthetic",
    "index_from_model",
    "init_params",
    "learning_rate",
    "load_model",
    "load_text_embeddings",
    "loss_and_grads",
    "nearest",
    "parse_labels",
    "recommend",
    "save_model",
    "scheduled_example_count",
    "sequence_stats",
    "set_exact_sigmoid",
    "sgd_update",
    "sigmoid",
    "tag_document",
    "target_distribution",
    "target_probability",
    "tokenize",
    "train",
]
