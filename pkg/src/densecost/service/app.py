"""The FastAPI application: every operation the package offers, over HTTP.

Endpoints are synchronous functions (FastAPI runs them in its thread pool)
so long solves do not block the event loop. Bad input surfaces as a 400
with a one-line detail; unexpected errors as a 500.
"""

from __future__ import annotations

import json

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..data import (DataError, Dataset, Standardizer, clean, kfold, load_csv,
                    load_libsvm, save_csv, shuffle)
from ..experiments import (GridSpec, cross_validate, f1_score,
                           format_mlp_table, format_table, grid_search,
                           mlp_experiment)
from ..reference import selftest
from ..svc import SvcModel
from ..weighting import WeightScheme, make_weights
from . import schemas


def _load_source(src: schemas.DataSource) -> Dataset:
    if src.format == "csv":
        ds = load_csv(src.path, label_col=src.label_col,
                      label_map=src.label_map, delimiter=src.delimiter,
                      skip_header=src.skip_header)
    else:
        ds = load_libsvm(src.path)
    if src.clean:
        ds = clean(ds, task=src.task)
    return ds


def _parse_schemes(names):
    try:
        return tuple(WeightScheme.parse(n) for n in names)
    except ValueError as exc:
        raise DataError(str(exc)) from None


def _save_bundle(path, model, standardizer=None):
    bundle = {"model": model.to_dict(), "standardizer": None}
    if standardizer is not None:
        bundle["standardizer"] = {"mean": standardizer.mean_.tolist(),
                                  "std": standardizer.std_.tolist()}
    with open(path, "w") as fh:
        json.dump(bundle, fh)
        fh.write("\n")


def _load_bundle(path):
    try:
        with open(path) as fh:
            bundle = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"{path}: no such model file") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not a model file ({exc})") from None
    model = SvcModel.from_dict(bundle["model"])
    sc = None
    if bundle.get("standardizer"):
        sc = Standardizer()
        sc.mean_ = np.asarray(bundle["standardizer"]["mean"], dtype=np.float64)
        sc.std_ = np.asarray(bundle["standardizer"]["std"], dtype=np.float64)
    return model, sc


def create_app() -> FastAPI:
    app = FastAPI(title="densecost", version=__version__)

    @app.exception_handler(DataError)
    async def _data_error(request, exc):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _value_error(request, exc):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(FileNotFoundError)
    async def _missing_file(request, exc):
        return JSONResponse(status_code=400,
                            content={"detail": f"no such file: {exc.filename}"})

    @app.exception_handler(Exception)
    async def _unexpected(request, exc):
        return JSONResponse(status_code=500,
                            content={"detail": f"internal error: {exc}"})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/prep", response_model=schemas.PrepResponse)
    def prep(req: schemas.PrepRequest):
        ds = _load_source(req.source)
        rows_in = len(ds)
        out = clean(ds, task=req.task)
        if req.shuffle_seed is not None:
            out = shuffle(out, req.shuffle_seed)
        save_csv(out, req.output_path)
        return schemas.PrepResponse(
            rows_in=rows_in, rows_out=len(out),
            duplicates_removed=out.duplicates_removed,
            conflicts_removed=out.conflicts_removed,
            n_features=out.n_features, output_path=req.output_path)

    @app.post("/train", response_model=schemas.TrainResponse)
    def train(req: schemas.TrainRequest):
        ds = _load_source(req.source)
        X = ds.X
        sc = None
        if req.standardize:
            sc = Standardizer()
            X = sc.fit_transform(X)
        scheme = WeightScheme.parse(req.weights.scheme)
        w = make_weights(X, ds.y, scheme, req.weights.gamma_s,
                         seed=req.weights.seed,
                         normalize=req.weights.normalize)
        model = SvcModel(C=req.C, gamma=req.gamma_k, tol=req.solver.tol,
                         iter_multiplier=req.solver.iter_multiplier,
                         max_iter=req.solver.max_iter, seed=req.solver.seed,
                         engine=req.solver.engine)
        model.fit(X, ds.y, sample_weight=w)
        _save_bundle(req.model_out, model, sc)
        return schemas.TrainResponse(
            n=len(ds), n_features=ds.n_features, n_support=model.n_support_,
            objective=model.objective_, bias=model.bias_,
            attempted=model.stats_.attempted, accepted=model.stats_.accepted,
            stopped_early=model.stats_.stopped_early,
            violation=model.stats_.violation, model_path=req.model_out)

    @app.post("/predict", response_model=schemas.PredictResponse)
    def predict(req: schemas.PredictRequest):
        model, sc = _load_bundle(req.model_path)
        y_true = None
        if req.features is not None:
            X = np.asarray(req.features, dtype=np.float64)
            if X.ndim != 2:
                raise DataError("features must be a list of rows")
        elif req.source is not None:
            ds = _load_source(req.source)
            X = ds.X
            if req.source.label_col is not None:
                y_true = ds.y
        else:
            raise DataError("predict needs either a source or inline features")
        if sc is not None:
            X = sc.transform(X)
        decision = model.decision_function(X)
        labels = np.where(decision >= 0.0, 1.0, -1.0)
        f1 = None
        if y_true is not None and np.all(np.isin(np.unique(y_true), (-1.0, 1.0))):
            f1 = f1_score(y_true, labels)
        out_path = None
        if req.out_path:
            with open(req.out_path, "w") as fh:
                for lab, dec in zip(labels, decision):
                    fh.write(f"{int(lab):+d} {repr(float(dec))}\n")
            out_path = req.out_path
        return schemas.PredictResponse(
            n=len(labels), labels=[float(v) for v in labels],
            decision=[float(v) for v in decision], f1=f1, out_path=out_path)

    @app.post("/cv", response_model=schemas.CvResponse)
    def cv(req: schemas.CvRequest):
        ds = _load_source(req.source)
        scheme = WeightScheme.parse(req.scheme)
        fa = kfold(len(ds), req.folds, seed=req.fold_seed)
        res = cross_validate(
            ds, fa, scheme, req.gamma_s, req.C, req.gamma_k,
            solver_seed=req.solver.seed, weights_seed=req.weights_seed,
            tol=req.solver.tol, iter_multiplier=req.solver.iter_multiplier,
            max_iter=req.solver.max_iter, engine=req.solver.engine,
            positive=req.positive, normalize_weights=req.normalize_weights,
            standardize=req.standardize)
        return schemas.CvResponse(folds=req.folds, **{
            k: res[k] for k in ("fold_f1", "mean_f1", "std_f1", "invalid",
                                "sv_per_fold")})

    @app.post("/grid", response_model=schemas.GridResponse)
    def grid(req: schemas.GridRequest):
        ds = _load_source(req.source)
        spec = GridSpec(schemes=_parse_schemes(req.schemes),
                        gamma_s=tuple(req.gamma_s_grid),
                        C=tuple(req.c_grid), gamma_k=tuple(req.gamma_k_grid))
        report = grid_search(
            ds, spec, folds=req.folds, fold_seed=req.fold_seed,
            solver_seed=req.solver.seed, weights_seed=req.weights_seed,
            jobs=req.jobs, positive=req.positive, tol=req.solver.tol,
            iter_multiplier=req.solver.iter_multiplier,
            max_iter=req.solver.max_iter, engine=req.solver.engine,
            normalize_weights=req.normalize_weights,
            standardize=req.standardize, dataset_name=req.source.path)
        report_path = None
        if req.report_out:
            report.save(req.report_out)
            report_path = req.report_out
        return schemas.GridResponse(
            n_points=len(report.points), best=report.best,
            digest=report.digest(),
            table=format_table(report, limit=req.table_limit),
            report_path=report_path)

    @app.post("/mlp", response_model=schemas.MlpResponse)
    def mlp(req: schemas.MlpRequest):
        ds = _load_source(req.source)
        report = mlp_experiment(
            ds, gamma_s_grid=tuple(req.gamma_s_grid),
            scheme=_parse_schemes([req.scheme])[0],
            hidden=tuple(req.hidden), activation=req.activation,
            loss=req.loss, lr=req.lr, epochs=req.epochs,
            batch_size=req.batch_size, test_fraction=req.test_fraction,
            shuffle_seed=req.shuffle_seed, net_seeds=tuple(req.net_seeds),
            weights_seed=req.weights_seed,
            normalize_weights=req.normalize_weights,
            dataset_name=req.source.path)
        report_path = None
        if req.report_out:
            report.save(req.report_out)
            report_path = req.report_out
        return schemas.MlpResponse(rows=report.points, digest=report.digest(),
                                   table=format_mlp_table(report),
                                   report_path=report_path)

    @app.post("/selftest", response_model=schemas.SelftestResponse)
    def run_selftest(req: schemas.SelftestRequest):
        res = selftest(instances=req.instances, seed=req.seed,
                       max_iter=req.max_iter, tol=req.tol,
                       objective_tol=req.objective_tol, engine=req.engine)
        return schemas.SelftestResponse(**res)

    @app.post("/weights", response_model=schemas.WeightsResponse)
    def weights(req: schemas.WeightsRequest):
        ds = _load_source(req.source)
        scheme = WeightScheme.parse(req.weights.scheme)
        w = make_weights(ds.X, ds.y, scheme, req.weights.gamma_s,
                         seed=req.weights.seed,
                         normalize=req.weights.normalize)
        out_path = None
        if req.out_path:
            with open(req.out_path, "w") as fh:
                for v in w:
                    fh.write(repr(float(v)) + "\n")
            out_path = req.out_path
        return schemas.WeightsResponse(n=len(w), weights=[float(v) for v in w],
                                       out_path=out_path)

    return app


app = create_app()
