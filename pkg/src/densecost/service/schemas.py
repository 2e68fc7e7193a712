"""Request/response models for the service endpoints.

File paths in requests are resolved on the machine running the app; with
the in-process client that is simply the local filesystem.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DataSource(_Strict):
    """Where and how to read a dataset."""

    path: str
    format: Literal["csv", "libsvm"] = "csv"
    delimiter: str = ","
    label_col: Optional[int] = -1  # None: no label column (prediction inputs)
    label_map: Optional[dict[str, float]] = None
    skip_header: int = 0
    clean: bool = False
    task: Literal["classification", "regression"] = "classification"


class SolverOptions(_Strict):
    tol: float = 1e-6
    iter_multiplier: float = 50.0
    max_iter: Optional[int] = None
    seed: int = 3
    engine: Literal["fast", "checked"] = "fast"


class WeightOptions(_Strict):
    scheme: str = "none"
    gamma_s: float = 1.0
    seed: int = 4
    normalize: bool = False


class PrepRequest(_Strict):
    source: DataSource
    output_path: str
    task: Literal["classification", "regression"] = "classification"
    shuffle_seed: Optional[int] = 1  # None writes rows in input order


class PrepResponse(_Strict):
    rows_in: int
    rows_out: int
    duplicates_removed: int
    conflicts_removed: int
    n_features: int
    output_path: str


class TrainRequest(_Strict):
    source: DataSource
    model_out: str
    C: float = 1.0
    gamma_k: float = 1.0
    weights: WeightOptions = Field(default_factory=WeightOptions)
    solver: SolverOptions = Field(default_factory=SolverOptions)
    standardize: bool = False


class TrainResponse(_Strict):
    n: int
    n_features: int
    n_support: int
    objective: float
    bias: float
    attempted: int
    accepted: int
    stopped_early: bool
    violation: float
    model_path: str


class PredictRequest(_Strict):
    model_path: str
    source: Optional[DataSource] = None
    features: Optional[list[list[float]]] = None
    out_path: Optional[str] = None


class PredictResponse(_Strict):
    n: int
    labels: list[float]
    decision: list[float]
    f1: Optional[float] = None
    out_path: Optional[str] = None


class CvRequest(_Strict):
    source: DataSource
    scheme: str = "none"
    gamma_s: Optional[float] = None
    C: float = 1.0
    gamma_k: float = 1.0
    folds: int = 5
    fold_seed: int = 2
    solver: SolverOptions = Field(default_factory=SolverOptions)
    weights_seed: int = 4
    normalize_weights: bool = False
    standardize: bool = False
    positive: float = 1.0


class CvResponse(_Strict):
    folds: int
    fold_f1: Optional[list[float]]
    mean_f1: Optional[float]
    std_f1: Optional[float]
    invalid: bool
    sv_per_fold: Optional[list[int]]


class GridRequest(_Strict):
    source: DataSource
    schemes: list[str] = ["none"]
    gamma_s_grid: list[float] = [0.01, 0.1, 1.0, 10.0, 100.0]
    c_grid: list[float] = [0.1, 1.0, 10.0, 100.0]
    gamma_k_grid: list[float] = [0.01, 0.1, 1.0, 10.0]
    folds: int = 5
    fold_seed: int = 2
    weights_seed: int = 4
    solver: SolverOptions = Field(default_factory=SolverOptions)
    jobs: int = 1
    positive: float = 1.0
    normalize_weights: bool = False
    standardize: bool = False
    report_out: Optional[str] = None
    table_limit: Optional[int] = 10


class GridResponse(_Strict):
    n_points: int
    best: Optional[dict]
    digest: str
    table: str
    report_path: Optional[str]


class MlpRequest(_Strict):
    source: DataSource
    scheme: str = "identity"
    gamma_s_grid: list[float] = [0.01, 0.1, 1.0, 10.0, 100.0]
    hidden: list[int] = [100, 50, 20]
    activation: Literal["relu", "tanh"] = "relu"
    loss: Literal["mse", "mae"] = "mse"
    lr: float = 0.01
    epochs: int = 100
    batch_size: int = 32
    test_fraction: float = 0.25
    shuffle_seed: int = 1
    net_seeds: list[int] = [1, 2, 3, 4, 5, 6]
    weights_seed: int = 4
    normalize_weights: bool = False
    report_out: Optional[str] = None


class MlpResponse(_Strict):
    rows: list[dict]
    digest: str
    table: str
    report_path: Optional[str]


class SelftestRequest(_Strict):
    instances: int = 20
    seed: int = 0
    max_iter: int = 1000000
    tol: float = 1e-6
    objective_tol: float = 1e-4
    engine: Literal["fast", "checked"] = "fast"


class SelftestResponse(_Strict):
    instances: int
    max_gap: float
    mean_gap: float
    failures: list[dict]
    passed: bool


class WeightsRequest(_Strict):
    source: DataSource
    weights: WeightOptions = Field(default_factory=WeightOptions)
    out_path: Optional[str] = None


class WeightsResponse(_Strict):
    n: int
    weights: list[float]
    out_path: Optional[str]
