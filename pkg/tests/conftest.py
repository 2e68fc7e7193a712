import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile("default")

DATA_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "data")


def data_file(name):
    """Path of a fetched public dataset, or None if it is not present."""
    path = os.path.join(DATA_DIR, name)
    return path if os.path.exists(path) else None


def blob_data(n=60, d=2, spread=0.6, seed=0):
    """Two separable gaussian blobs, labels -1/+1."""
    rng = np.random.default_rng(seed)
    half = n // 2
    X = np.vstack([rng.normal(-1.0, spread, (half, d)),
                   rng.normal(1.0, spread, (n - half, d))])
    y = np.hstack([np.ones(half), -np.ones(n - half)])
    perm = rng.permutation(n)
    return X[perm], y[perm]


def regression_data(n=200, d=5, noise=0.1, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    coef = rng.normal(size=d)
    y = X @ coef + np.sin(X[:, 0]) + noise * rng.normal(size=n)
    return X, y


@pytest.fixture
def blobs():
    return blob_data()


@pytest.fixture
def blob_csv(tmp_path, blobs):
    import densecost as dc
    X, y = blobs
    path = tmp_path / "blobs.csv"
    dc.save_csv(dc.Dataset(X, y), path)
    return str(path)
