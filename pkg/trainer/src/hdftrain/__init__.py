"""Toy-scale trainer and weight exporter for the hdfnet enhancement engine."""

from .data import SyntheticDataset
from .export import export_weights, make_parity_fixture, write_bundle
from .model import ModelSettings, TwoStageModel, settings_digest
from .train import (
    TrainSettings,
    evaluate_si_sdr,
    model_from_checkpoint,
    train_joint,
    train_stage1,
)

__version__ = "0.1.0"
