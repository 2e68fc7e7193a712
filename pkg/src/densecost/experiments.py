"""Cross-validated grid search for the weighted-cost SVC and the MLP harness.

Reports are JSON-lines: one header record, one record per grid point in
enumeration order, then one ``best`` record. Timing fields are excluded
from the content digest so two runs with equal seeds digest identically.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import hashlib
import json
import time

import numpy as np

from .data import DataError, Dataset, Standardizer, kfold, shuffle
from .mlp import MlpRegressor, mae
from .svc import SvcModel
from .weighting import WeightScheme, make_weights

DEFAULT_C_GRID = (0.1, 1.0, 10.0, 100.0)
DEFAULT_GAMMA_K_GRID = (0.01, 0.1, 1.0, 10.0)
DEFAULT_GAMMA_S_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)


def f1_score(y_true, y_pred, positive=1.0):
    """F1 = 2TP / (2TP + FP + FN), defined as 0 when the denominator is 0."""
    t = np.asarray(y_true, dtype=np.float64)
    p = np.asarray(y_pred, dtype=np.float64)
    tp = int(np.sum((p == positive) & (t == positive)))
    fp = int(np.sum((p == positive) & (t != positive)))
    fn = int(np.sum((p != positive) & (t == positive)))
    den = 2 * tp + fp + fn
    if den == 0:
        return 0.0
    return 2.0 * tp / den


@dataclasses.dataclass
class GridSpec:
    """Axes of one SVC grid search.

    Schemes that do not use a density width (none, random) collapse the
    gamma_s axis to a single entry recorded as null.
    """

    schemes: tuple
    gamma_s: tuple = DEFAULT_GAMMA_S_GRID
    C: tuple = DEFAULT_C_GRID
    gamma_k: tuple = DEFAULT_GAMMA_K_GRID

    def points(self):
        """Grid points in enumeration order: scheme, gamma_s, C, gamma_k."""
        out = []
        for scheme in self.schemes:
            gs_axis = tuple(self.gamma_s) if scheme.uses_density else (None,)
            for gs in gs_axis:
                for C in self.C:
                    for gk in self.gamma_k:
                        out.append((scheme, gs, float(C), float(gk)))
        return out


def _derive_seed(base, *path):
    """Stable per-task integer seed from a base seed and an index path."""
    ss = np.random.SeedSequence((int(base),) + tuple(int(v) for v in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0] & np.uint64(0x7FFFFFFFFFFFFFFF))


def cross_validate(ds, folds, scheme, gamma_s, C, gamma_k, *,
                   solver_seed=3, weights_seed=4, point_index=0,
                   tol=1e-6, iter_multiplier=50.0, max_iter=None,
                   engine="fast", positive=1.0, normalize_weights=False,
                   standardize=False):
    """Evaluate one hyperparameter point with k-fold cross-validation.

    Weights are computed on each training fold only. A fold whose training
    split lacks one of the two classes marks the whole point invalid
    (fold F1 values are then reported as null).
    """
    labels = np.unique(ds.y)
    if not np.all(np.isin(labels, (-1.0, 1.0))):
        raise DataError("classification labels must be -1 or +1")
    fold_f1 = []
    sv_counts = []
    stopped = []
    invalid = False
    for f in range(folds.k):
        tr = folds.train_indices(f)
        te = folds.test_indices(f)
        Xtr, ytr = ds.X[tr], ds.y[tr]
        Xte, yte = ds.X[te], ds.y[te]
        if len(np.unique(ytr)) < 2:
            invalid = True
            break
        if standardize:
            sc = Standardizer().fit(Xtr)
            Xtr = sc.transform(Xtr)
            Xte = sc.transform(Xte)
        wseed = _derive_seed(weights_seed, point_index, f)
        w = make_weights(Xtr, ytr, scheme, gamma_s if gamma_s is not None else 1.0,
                         seed=wseed, normalize=normalize_weights)
        if __debug__:
            # leakage guard: weights must be a pure function of the training
            # fold; a second computation has to reproduce them bitwise
            w2 = make_weights(Xtr, ytr, scheme,
                              gamma_s if gamma_s is not None else 1.0,
                              seed=wseed, normalize=normalize_weights)
            assert np.array_equal(w, w2), "fold weights are not reproducible"
        model = SvcModel(C=C, gamma=gamma_k, tol=tol,
                         iter_multiplier=iter_multiplier, max_iter=max_iter,
                         seed=_derive_seed(solver_seed, point_index, f),
                         engine=engine)
        model.fit(Xtr, ytr, sample_weight=w)
        fold_f1.append(f1_score(yte, model.predict(Xte), positive=positive))
        sv_counts.append(model.n_support_)
        stopped.append(bool(model.stats_.stopped_early))
    if invalid:
        return {"fold_f1": None, "mean_f1": None, "std_f1": None,
                "invalid": True, "sv_per_fold": None, "stopped_early": None}
    arr = np.asarray(fold_f1)
    return {"fold_f1": [float(v) for v in fold_f1],
            "mean_f1": float(arr.mean()),
            "std_f1": float(arr.std()),
            "invalid": False,
            "sv_per_fold": sv_counts,
            "stopped_early": stopped}


@dataclasses.dataclass
class ExperimentReport:
    """Header + per-point records + a best record, serializable as JSONL."""

    header: dict
    points: list
    best: dict | None

    def records(self):
        out = [self.header] + list(self.points)
        if self.best is not None:
            out.append(self.best)
        return out

    def to_jsonl(self):
        return "".join(json.dumps(rec) + "\n" for rec in self.records())

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())

    def digest(self):
        """SHA-256 over the canonicalized records, timing fields excluded."""
        h = hashlib.sha256()
        for rec in self.records():
            slim = {k: v for k, v in rec.items() if k != "time_s"}
            h.update(json.dumps(slim, sort_keys=True).encode())
            h.update(b"\n")
        return h.hexdigest()

    @classmethod
    def load(cls, path):
        header = None
        points = []
        best = None
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                if rec.get("type") == "header":
                    header = rec
                elif rec.get("type") == "best":
                    best = rec
                else:
                    points.append(rec)
        if header is None:
            raise DataError(f"{path}: no header record")
        return cls(header, points, best)


def grid_search(ds, spec, *, folds=5, fold_seed=2, solver_seed=3,
                weights_seed=4, jobs=1, positive=1.0, tol=1e-6,
                iter_multiplier=50.0, max_iter=None, engine="fast",
                normalize_weights=False, standardize=False, dataset_name=""):
    """Cross-validate every point of ``spec`` and rank by mean F1.

    Points are evaluated independently (thread pool when jobs > 1; the
    fast engine releases the GIL) and reported in enumeration order, so
    results do not depend on scheduling. Ranking is by (-mean_f1, index);
    invalid points rank last.
    """
    points = spec.points()
    fa = kfold(len(ds), folds, seed=fold_seed)

    def run_point(item):
        idx, (scheme, gs, C, gk) = item
        t0 = time.perf_counter()
        res = cross_validate(ds, fa, scheme, gs, C, gk,
                             solver_seed=solver_seed, weights_seed=weights_seed,
                             point_index=idx, tol=tol,
                             iter_multiplier=iter_multiplier, max_iter=max_iter,
                             engine=engine, positive=positive,
                             normalize_weights=normalize_weights,
                             standardize=standardize)
        rec = {"type": "point", "index": idx, "scheme": scheme.value,
               "gamma_s": gs, "c": C, "gamma_k": gk}
        rec.update(res)
        rec["time_s"] = time.perf_counter() - t0
        return rec

    items = list(enumerate(points))
    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(run_point, items))
    else:
        records = [run_point(item) for item in items]

    header = {"type": "header", "kind": "svc-grid", "dataset": dataset_name,
              "n": len(ds), "d": ds.n_features, "folds": folds,
              "schemes": [s.value for s in spec.schemes],
              "gamma_s_grid": [float(v) for v in spec.gamma_s],
              "c_grid": [float(v) for v in spec.C],
              "gamma_k_grid": [float(v) for v in spec.gamma_k],
              "fold_seed": fold_seed, "solver_seed": solver_seed,
              "weights_seed": weights_seed, "positive": positive,
              "tol": tol if tol else 0.0, "iter_multiplier": iter_multiplier,
              "max_iter": max_iter, "engine": engine,
              "normalize_weights": normalize_weights,
              "standardize": standardize}
    valid = [r for r in records if not r["invalid"]]
    best = None
    if valid:
        top = min(valid, key=lambda r: (-r["mean_f1"], r["index"]))
        best = {"type": "best", "index": top["index"], "scheme": top["scheme"],
                "gamma_s": top["gamma_s"], "c": top["c"],
                "gamma_k": top["gamma_k"], "mean_f1": top["mean_f1"]}
    return ExperimentReport(header, records, best)


def rank_points(report):
    """Point records sorted by (-mean_f1, index); invalid points last."""
    def key(rec):
        if rec["invalid"]:
            return (1, 0.0, rec["index"])
        return (0, -rec["mean_f1"], rec["index"])
    return sorted(report.points, key=key)


def format_table(report, limit=None):
    """Human-readable ranking of a grid report."""
    rows = rank_points(report)
    if limit is not None:
        rows = rows[:limit]
    lines = [f"{'rank':>4}  {'scheme':<10} {'gamma_s':>8} {'C':>7} "
             f"{'gamma_k':>8} {'mean_f1':>8} {'std':>7}"]
    for rank, rec in enumerate(rows, 1):
        gs = "-" if rec["gamma_s"] is None else f"{rec['gamma_s']:g}"
        if rec["invalid"]:
            lines.append(f"{rank:>4}  {rec['scheme']:<10} {gs:>8} "
                         f"{rec['c']:>7g} {rec['gamma_k']:>8g} "
                         f"{'invalid':>8} {'-':>7}")
        else:
            lines.append(f"{rank:>4}  {rec['scheme']:<10} {gs:>8} "
                         f"{rec['c']:>7g} {rec['gamma_k']:>8g} "
                         f"{rec['mean_f1']:>8.6f} {rec['std_f1']:>7.4f}")
    return "\n".join(lines)


def mlp_experiment(ds, *, gamma_s_grid=DEFAULT_GAMMA_S_GRID,
                   scheme=WeightScheme.IDENTITY, hidden=(100, 50, 20),
                   activation="relu", loss="mse", lr=0.01, epochs=100,
                   batch_size=32, test_fraction=0.25, shuffle_seed=1,
                   net_seeds=(1, 2, 3, 4, 5, 6), weights_seed=4,
                   normalize_weights=False, dataset_name=""):
    """Density-weighted vs standard training of the regressor, per seed.

    The dataset is shuffled once with ``shuffle_seed`` and split by
    ``test_fraction``. For each net seed: one standard (unweighted) run,
    then one weighted run per ``gamma_s_grid`` value, all from the same
    initial network. Weights come from the training split only (default
    w_i = s_i, the raw density). Each report row carries the standard test
    MAE, the best weighted test MAE over the grid, and the gamma_s that
    achieved it (first on ties), plus the full per-gamma breakdown.
    """
    if not scheme.uses_density:
        raise DataError("the comparison needs a density-based scheme")
    if scheme.uses_labels:
        raise DataError("the signed scheme needs -1/+1 labels and does "
                        "not apply to regression targets")
    if not gamma_s_grid:
        raise DataError("gamma_s grid is empty")
    if not net_seeds:
        raise DataError("no net seeds given")
    n_test = int(round(len(ds) * test_fraction))
    if not 0 < n_test < len(ds):
        raise DataError("test fraction leaves an empty split")
    mixed = shuffle(ds, shuffle_seed)
    test = mixed.subset(np.arange(n_test))
    train = mixed.subset(np.arange(n_test, len(mixed)))
    layers = (train.n_features,) + tuple(int(v) for v in hidden) + (1,)

    def run(seed, w):
        model = MlpRegressor(layers, activation=activation, loss=loss, lr=lr,
                             epochs=epochs, batch_size=batch_size, seed=seed)
        model.fit(train.X, train.y, sample_weight=w)
        return mae(test.y, model.predict(test.X))

    # weights depend only on the training split and gamma_s, not the seed
    weight_sets = [make_weights(train.X, None, scheme, gs,
                                seed=_derive_seed(weights_seed, j),
                                normalize=normalize_weights)
                   for j, gs in enumerate(gamma_s_grid)]
    rows = []
    for seed in net_seeds:
        t0 = time.perf_counter()
        standard = run(seed, None)
        weighted = [run(seed, w) for w in weight_sets]
        j_best = min(range(len(weighted)), key=lambda j: (weighted[j], j))
        rows.append({"type": "row", "seed": int(seed),
                     "standard_mae": standard,
                     "gamma_best": float(gamma_s_grid[j_best]),
                     "best_weighted_mae": weighted[j_best],
                     "weighted_mae": [[float(gs), m] for gs, m
                                      in zip(gamma_s_grid, weighted)],
                     "time_s": time.perf_counter() - t0})
    header = {"type": "header", "kind": "mlp", "dataset": dataset_name,
              "n": len(ds), "d": ds.n_features,
              "n_train": len(train), "n_test": len(test),
              "scheme": scheme.value,
              "gamma_s_grid": [float(v) for v in gamma_s_grid],
              "hidden": list(hidden), "activation": activation, "loss": loss,
              "lr": lr, "epochs": epochs, "batch_size": batch_size,
              "test_fraction": test_fraction, "shuffle_seed": shuffle_seed,
              "net_seeds": [int(s) for s in net_seeds],
              "weights_seed": weights_seed,
              "normalize_weights": normalize_weights}
    top = min(rows, key=lambda r: (r["best_weighted_mae"], r["seed"]))
    best = {"type": "best", "seed": top["seed"],
            "gamma_best": top["gamma_best"],
            "best_weighted_mae": top["best_weighted_mae"]}
    return ExperimentReport(header, rows, best)


def format_mlp_table(report):
    lines = [f"{'seed':>4}  {'standard_mae':>12} {'gamma_best':>10} "
             f"{'weighted_mae':>12}"]
    for rec in report.points:
        lines.append(f"{rec['seed']:>4}  {rec['standard_mae']:>12.6f} "
                     f"{rec['gamma_best']:>10g} "
                     f"{rec['best_weighted_mae']:>12.6f}")
    return "\n".join(lines)
