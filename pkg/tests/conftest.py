import os

import pytest

from snnuq.datastructures.core import (
    OptimizerConfig,
    TrainConfig,
    train_ensemble,
)
from snnuq.interfaces import SyntheticSpec, gen_synthetic


@pytest.fixture
def config_path():
    def load_config(file_name):
        dirpath = os.path.dirname(os.path.abspath(__file__))
        return os.path.join(dirpath, "configuration", "test_configs",
                            file_name)

    return load_config


@pytest.fixture(scope="session")
def tiny_config():
    """A network small enough to train in well under a second."""
    return TrainConfig(
        ensemble_size=3, batch_size=32, max_epochs=8, patience=3,
        class_count=4, seed=7, hidden_dim=8, trunk_layers=2, upper_layers=1,
        projection_dim=4, optimizer=OptimizerConfig(learning_rate=0.003))


@pytest.fixture(scope="session")
def toy_data():
    return gen_synthetic(SyntheticSpec(n_train=240, n_in=60, n_out=60,
                                       dims=3, seed=11))


@pytest.fixture(scope="session")
def trained_ensemble(toy_data, tiny_config):
    train = toy_data[0]
    return train_ensemble(train.features, train.target, tiny_config,
                          train.columns, train.target_name)
