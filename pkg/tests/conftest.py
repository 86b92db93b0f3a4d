"""Shared fixtures.

Training runs are expensive relative to everything else, so the corpus
and both reference models are built once per session and reused by the
unit tests and the acceptance gate. Fixtures that time their work return
(value, seconds) pairs so acceptance tests can assert runtime budgets
that include the work itself, not just the assertions.
"""
from __future__ import annotations

import time

import pytest

from extruplan.codec import load_config
from extruplan.knowledge import DieStack, load_kb
from extruplan.library import Library, build_dataset, generate_synthetic_cases
from extruplan.network import TrainConfig, init_model, train

CORPUS_SIZE = 150
CORPUS_SEED = 42


@pytest.fixture(scope="session")
def cfg():
    return load_config()


@pytest.fixture(scope="session")
def kb():
    return load_kb()


@pytest.fixture(scope="session")
def stack(cfg):
    return DieStack.from_config(cfg)


@pytest.fixture(scope="session")
def library(cfg, kb):
    cases = generate_synthetic_cases(CORPUS_SIZE, CORPUS_SEED, cfg, kb)
    return Library(
        cases=tuple(cases),
        codec_version=cfg.codec_version,
        kb_fingerprint=kb.fingerprint,
    )


@pytest.fixture(scope="session")
def dataset(library, cfg):
    return build_dataset(library, cfg)


def _timed_training(dataset, train_cfg):
    n_in = dataset[0][0].size
    n_out = dataset[0][1].size
    start = time.perf_counter()
    model = init_model(n_in, n_out, train_cfg)
    model, history = train(model, dataset, train_cfg)
    return model, history, time.perf_counter() - start


@pytest.fixture(scope="session")
def narrow_training(dataset):
    """Small five-hidden-node network: (model, history, seconds)."""
    cfg = TrainConfig(
        learning_rate=0.1, momentum=0.7, hidden_size=5, epochs=2000, seed=42
    )
    return _timed_training(dataset, cfg)


@pytest.fixture(scope="session")
def wide_training(dataset):
    """Wider network used for retrieval: (model, history, seconds)."""
    cfg = TrainConfig(
        learning_rate=0.1, momentum=0.7, hidden_size=32, epochs=600, seed=42
    )
    return _timed_training(dataset, cfg)


@pytest.fixture(scope="session")
def wide_model(wide_training):
    return wide_training[0]
