"""
공통 테스트 픽스처 (작은 격자, 짧은 학습)
"""
import os

os.environ.setdefault("ACTIVE_PROFILE", "test")

import numpy as np
import pytest

from app.eval.schema.schemas import EvalConfig
from app.experiments.schema.schemas import ExperimentConfig
from app.slidegen.schema.schemas import GenConfig, SplitCounts
from app.slidegen.services.slide_service import generate_dataset
from app.train.schema.schemas import TrainConfig

TINY_GEN = {
    "rows": 8,
    "cols": 8,
    "patch_height": 4,
    "patch_width": 4,
    "lesion_count_max": 2,
    "lesion_radius_min": 1,
    "lesion_radius_max": 2,
    "seed": 7,
}
TINY_COUNTS = {
    "train": {"benign": 2, "dysplasia": 2, "malignant": 2},
    "val": {"benign": 1, "dysplasia": 1, "malignant": 1},
    "test": {"benign": 1, "dysplasia": 1, "malignant": 1},
}
TINY_TRAIN = {
    "batch_size": 16,
    "epochs": 2,
    "steps_per_epoch": 2,
    "hidden_dims": [8],
    "embedding_dim": 6,
    "projector_hidden": 6,
    "projection_dim": 4,
}
TINY_EVAL = {
    "probe_train_per_class": 20,
    "probe_val_per_class": 10,
    "probe_test_per_class": 10,
    "probe_epochs": 3,
    "probe_batch_size": 16,
    "mil_hidden": 4,
    "mil_epochs": 3,
    "supervised_epochs": 2,
    "supervised_batch_size": 16,
}


def tiny_experiment_dict(**changes) -> dict:
    data = {
        "gen": dict(TINY_GEN),
        "counts": dict(TINY_COUNTS),
        "seeds": [1, 2],
        "train": dict(TINY_TRAIN),
        "eval": dict(TINY_EVAL),
    }
    data.update(changes)
    return data


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def tiny_gen() -> GenConfig:
    return GenConfig(**TINY_GEN)


@pytest.fixture(scope="session")
def tiny_counts() -> SplitCounts:
    return SplitCounts(**TINY_COUNTS)


@pytest.fixture(scope="session")
def tiny_dataset(tiny_gen, tiny_counts):
    return generate_dataset(tiny_gen, tiny_counts)


@pytest.fixture
def tiny_train_config() -> TrainConfig:
    return TrainConfig(**TINY_TRAIN)


@pytest.fixture
def tiny_eval_config() -> EvalConfig:
    return EvalConfig(**TINY_EVAL)


@pytest.fixture
def tiny_experiment_config() -> ExperimentConfig:
    return ExperimentConfig(**tiny_experiment_dict())
