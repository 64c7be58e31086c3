"""tagseq: toy intent-tag-conditioned seq2seq reformulator."""

from tagseq.data import DataError, Example, Vocab, read_tagged_dataset
from tagseq.predict import predict_file, top_k_candidates
from tagseq.train import TrainSpec, load_model, save_model, train

__version__ = "0.1.0"
