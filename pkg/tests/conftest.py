"""Shared fixtures: a small synthetic corpus in NSL-KDD format.

The real benchmark files are not shipped with the repository; tests that
require them read the directory named by the NSLKDD_DIR environment
variable and skip when it is unset. Everything else runs on the seeded
synthetic corpus below.
"""

import os
from pathlib import Path

import numpy as np
import pytest

from evadegan import detectors, nslkdd, synthetic

CORPUS_SEED = 20240917
N_TRAIN = 2600
N_TEST = 1000


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus")
    synthetic.write_corpus_pair(
        path / "train.txt", path / "test.txt", N_TRAIN, N_TEST, seed=CORPUS_SEED
    )
    return path


@pytest.fixture(scope="session")
def train_records(corpus_dir):
    return nslkdd.load_file(corpus_dir / "train.txt")


@pytest.fixture(scope="session")
def test_records(corpus_dir):
    return nslkdd.load_file(corpus_dir / "test.txt")


@pytest.fixture(scope="session")
def halves(train_records):
    return nslkdd.split_train(train_records, seed=42)


@pytest.fixture(scope="session")
def schema(halves):
    return nslkdd.build_schema(halves[0])


@pytest.fixture(scope="session")
def encoded(halves, schema):
    """(ids_X, ids_y, gan_X, gan_categories) from the synthetic corpus."""
    ids_half, gan_half = halves
    ids_X, ids_cats = nslkdd.encode_batch(ids_half, schema)
    ids_y = np.array(
        [
            detectors.LABEL_NORMAL
            if c == nslkdd.AttackCategory.NORMAL
            else detectors.LABEL_ATTACK
            for c in ids_cats
        ]
    )
    gan_X, gan_cats = nslkdd.encode_batch(gan_half, schema)
    return ids_X, ids_y, gan_X, gan_cats


def real_dataset_dir():
    """Directory holding KDDTrain+.txt / KDDTest+.txt, or None."""
    path = os.environ.get("NSLKDD_DIR")
    if not path:
        return None
    path = Path(path)
    if (path / "KDDTrain+.txt").exists() and (path / "KDDTest+.txt").exists():
        return path
    return None


requires_real_dataset = pytest.mark.skipif(
    real_dataset_dir() is None,
    reason="real NSL-KDD files not found; set NSLKDD_DIR to a directory "
    "containing KDDTrain+.txt and KDDTest+.txt",
)
