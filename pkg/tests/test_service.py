import json
import warnings

import numpy as np
import pytest

with warnings.catch_warnings():
    warnings.filterwarnings("ignore",
                            message="Using `httpx` with `starlette.testclient`")
    from fastapi.testclient import TestClient

import densecost as dc
from densecost.service.app import create_app

from conftest import blob_data, regression_data


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app(), raise_server_exceptions=False) as c:
        yield c


@pytest.fixture
def tight_csv(tmp_path):
    X, y = blob_data(n=40, spread=0.2, seed=1)
    path = tmp_path / "tight.csv"
    dc.save_csv(dc.Dataset(X, y), path)
    return str(path)


@pytest.fixture
def regression_csv(tmp_path):
    X, y = regression_data(n=60, d=3, seed=2)
    path = tmp_path / "reg.csv"
    dc.save_csv(dc.Dataset(X, y), path)
    return str(path)


def src(path, **kw):
    return {"path": path, **kw}


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    body = r.json()
    assert body["status"] == "ok"
    assert body["version"] == dc.__version__


def test_prep_reports_removals(client, tmp_path):
    raw = tmp_path / "raw.csv"
    raw.write_text("1.0,2.0,1\n"
                   "1.0,2.0,1\n"      # exact duplicate
                   "3.0,4.0,1\n"
                   "3.0,4.0,-1\n"     # label conflict with the row above
                   "5.0,6.0,-1\n")
    out = tmp_path / "clean.csv"
    r = client.post("/prep", json={"source": src(str(raw)),
                                   "output_path": str(out)})
    assert r.status_code == 200
    body = r.json()
    assert body["rows_in"] == 5
    assert body["rows_out"] == 2
    assert body["duplicates_removed"] == 1
    assert body["conflicts_removed"] == 2
    assert body["n_features"] == 2
    cleaned = dc.load_csv(out)
    assert len(cleaned) == 2
    # default prep shuffles the cleaned rows with seed 1
    kept = dc.shuffle(dc.clean(dc.load_csv(raw)), 1)
    assert np.array_equal(cleaned.X, kept.X)
    # a null seed keeps the input order
    r = client.post("/prep", json={"source": src(str(raw)),
                                   "output_path": str(out),
                                   "shuffle_seed": None})
    assert r.status_code == 200
    assert np.array_equal(dc.load_csv(out).X, dc.clean(dc.load_csv(raw)).X)


def test_train_predict_cycle(client, tight_csv, tmp_path):
    model_path = tmp_path / "model.json"
    r = client.post("/train", json={
        "source": src(tight_csv), "model_out": str(model_path),
        "C": 10.0, "gamma_k": 0.5,
        "weights": {"scheme": "inv", "gamma_s": 1.0}})
    assert r.status_code == 200
    body = r.json()
    assert body["n"] == 40
    assert body["stopped_early"]
    assert 0 < body["n_support"] <= 40
    assert model_path.exists()

    # predict back on the training file: separable blobs, so F1 is perfect
    out_path = tmp_path / "pred.txt"
    r = client.post("/predict", json={"model_path": str(model_path),
                                      "source": src(tight_csv),
                                      "out_path": str(out_path)})
    assert r.status_code == 200
    body = r.json()
    assert body["n"] == 40
    assert body["f1"] == 1.0
    assert set(body["labels"]) <= {-1.0, 1.0}
    lines = out_path.read_text().splitlines()
    assert len(lines) == 40
    lab, dec = lines[0].split()
    assert lab in ("+1", "-1")
    assert float(dec) == body["decision"][0]


def test_predict_inline_features(client, tight_csv, tmp_path):
    model_path = tmp_path / "model.json"
    client.post("/train", json={"source": src(tight_csv),
                                "model_out": str(model_path),
                                "C": 10.0, "gamma_k": 0.5})
    r = client.post("/predict", json={"model_path": str(model_path),
                                      "features": [[-1.0, -1.0], [1.0, 1.0]]})
    assert r.status_code == 200
    body = r.json()
    assert body["n"] == 2
    assert body["f1"] is None
    assert body["labels"] == [1.0, -1.0]


def test_train_with_standardizer_bundles_it(client, tmp_path):
    X, y = blob_data(n=40, spread=0.2, seed=3)
    scaled = tmp_path / "scaled.csv"
    dc.save_csv(dc.Dataset(X * np.array([1.0, 500.0]), y), scaled)
    model_path = tmp_path / "model.json"
    r = client.post("/train", json={"source": src(str(scaled)),
                                    "model_out": str(model_path),
                                    "C": 10.0, "gamma_k": 0.5,
                                    "standardize": True})
    assert r.status_code == 200
    bundle = json.loads(model_path.read_text())
    assert bundle["standardizer"] is not None
    assert len(bundle["standardizer"]["mean"]) == 2
    r = client.post("/predict", json={"model_path": str(model_path),
                                      "source": src(str(scaled))})
    assert r.json()["f1"] == 1.0


def test_predict_requires_some_input(client, tight_csv, tmp_path):
    model_path = tmp_path / "model.json"
    client.post("/train", json={"source": src(tight_csv),
                                "model_out": str(model_path)})
    r = client.post("/predict", json={"model_path": str(model_path)})
    assert r.status_code == 400
    assert "source or inline features" in r.json()["detail"]


def test_predict_missing_model_is_400(client):
    r = client.post("/predict", json={"model_path": "/nonexistent/m.json",
                                      "features": [[0.0]]})
    assert r.status_code == 400
    assert "no such model file" in r.json()["detail"]


def test_missing_data_file_is_400(client, tmp_path):
    r = client.post("/prep", json={"source": src(str(tmp_path / "gone.csv")),
                                   "output_path": str(tmp_path / "o.csv")})
    assert r.status_code == 400


def test_cv_valid_point(client, tight_csv):
    r = client.post("/cv", json={"source": src(tight_csv), "scheme": "sqrt",
                                 "gamma_s": 1.0, "C": 10.0, "gamma_k": 0.5,
                                 "folds": 4})
    assert r.status_code == 200
    body = r.json()
    assert body["folds"] == 4
    assert not body["invalid"]
    assert len(body["fold_f1"]) == 4
    assert body["mean_f1"] == pytest.approx(1.0)


def test_cv_invalid_point_reports_nulls(client, tmp_path):
    path = tmp_path / "skewed.csv"
    path.write_text("0.0,1\n1.0,1\n2.0,1\n3.0,1\n4.0,-1\n")
    r = client.post("/cv", json={"source": src(str(path)), "folds": 5,
                                 "fold_seed": 0})
    assert r.status_code == 200
    body = r.json()
    assert body["invalid"]
    assert body["fold_f1"] is None
    assert body["mean_f1"] is None


def test_grid_endpoint(client, tight_csv, tmp_path):
    report_path = tmp_path / "report.jsonl"
    payload = {"source": src(tight_csv), "schemes": ["none", "5"],
               "gamma_s_grid": [1.0], "c_grid": [1.0, 10.0],
               "gamma_k_grid": [0.5], "folds": 4,
               "report_out": str(report_path)}
    r = client.post("/grid", json=payload)
    assert r.status_code == 200
    body = r.json()
    assert body["n_points"] == 4
    assert body["best"]["type"] == "best"
    assert len(body["digest"]) == 64
    assert "rank" in body["table"]
    assert body["report_path"] == str(report_path)
    report = dc.ExperimentReport.load(report_path)
    assert report.digest() == body["digest"]
    # identical request, identical digest
    payload.pop("report_out")
    again = client.post("/grid", json=payload)
    assert again.json()["digest"] == body["digest"]


def test_grid_rejects_unknown_scheme(client, tight_csv):
    r = client.post("/grid", json={"source": src(tight_csv),
                                   "schemes": ["bogus"]})
    assert r.status_code == 400
    assert "scheme" in r.json()["detail"]


def test_mlp_endpoint(client, regression_csv):
    r = client.post("/mlp", json={"source": src(regression_csv),
                                  "gamma_s_grid": [0.1, 1.0],
                                  "net_seeds": [1, 2],
                                  "hidden": [6], "epochs": 2})
    assert r.status_code == 200
    body = r.json()
    assert [row["seed"] for row in body["rows"]] == [1, 2]
    for row in body["rows"]:
        maes = [m for _, m in row["weighted_mae"]]
        assert row["best_weighted_mae"] == min(maes)
        assert np.isfinite(row["standard_mae"])
    assert len(body["digest"]) == 64
    assert body["table"].splitlines()[0].split() == [
        "seed", "standard_mae", "gamma_best", "weighted_mae"]


def test_selftest_endpoint(client):
    r = client.post("/selftest", json={"instances": 2, "seed": 0})
    assert r.status_code == 200
    body = r.json()
    assert body["passed"]
    assert body["instances"] == 2
    assert body["max_gap"] <= 1e-4


def test_weights_endpoint_matches_library(client, tight_csv, tmp_path):
    out_path = tmp_path / "w.txt"
    r = client.post("/weights", json={
        "source": src(tight_csv),
        "weights": {"scheme": "signed", "gamma_s": 2.0},
        "out_path": str(out_path)})
    assert r.status_code == 200
    body = r.json()
    ds = dc.load_csv(tight_csv)
    expected = dc.make_weights(ds.X, ds.y, dc.WeightScheme.SIGNED, 2.0, seed=4)
    assert np.array_equal(np.asarray(body["weights"]), expected)
    from_file = np.asarray([float(line) for line
                            in out_path.read_text().splitlines()])
    assert np.array_equal(from_file, expected)


def test_unknown_request_field_is_422(client, tight_csv):
    r = client.post("/cv", json={"source": src(tight_csv), "bogus_knob": 1})
    assert r.status_code == 422
