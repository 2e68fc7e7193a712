"""Command-line client for the densecost service.

Every command builds a request and POSTs it to the service. By default the
FastAPI app runs in-process (no server or socket involved), so the CLI
works standalone on local files; pass ``--server http://host:port`` to talk
to a remote instance started with ``densecost serve``. Paths inside
requests are resolved where the app runs.

Exit codes: 0 success, 1 operational failure (bad data, failed selftest),
2 usage errors.
"""

import argparse
import json
import sys

from .data import DataError, parse_label_map


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}") from None


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad int list {text!r}") from None


def _str_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="densecost",
        description="Density-weighted SVC training, evaluation and serving.")
    parser.add_argument("--server", default=None, metavar="URL",
                        help="talk to a running service instead of in-process")

    sub = parser.add_subparsers(dest="command", required=True)

    def add_source_args(p, label_optional=False):
        p.add_argument("data", help="input data file")
        p.add_argument("--format", choices=["csv", "libsvm"], default="csv")
        p.add_argument("--delimiter", default=",")
        if label_optional:
            p.add_argument("--label-col", type=int, default=None,
                           help="label column to strip (default: none)")
        else:
            p.add_argument("--label-col", type=int, default=-1,
                           help="label column (default: last)")
        p.add_argument("--label-map", default=None, metavar="SPEC",
                       help='raw label translation, e.g. "g=1,b=-1"')
        p.add_argument("--skip-header", type=int, default=0)
        p.add_argument("--clean", action="store_true",
                       help="drop duplicate/conflicting rows after loading")
        p.add_argument("--task", choices=["classification", "regression"],
                       default="classification")

    def add_solver_args(p):
        p.add_argument("--tol", type=float, default=1e-6,
                       help="early-stop KKT tolerance; 0 disables")
        p.add_argument("--iter-multiplier", type=float, default=50.0,
                       help="step budget = ceil(multiplier * l^2)")
        p.add_argument("--max-iter", type=int, default=None,
                       help="explicit step budget, overrides the multiplier")
        p.add_argument("--solver-seed", type=int, default=3)
        p.add_argument("--engine", choices=["fast", "checked"], default="fast")

    p = sub.add_parser("prep",
                       help="clean and shuffle a dataset, write it back out")
    add_source_args(p)
    p.add_argument("output", help="cleaned CSV to write")
    p.add_argument("--shuffle-seed", type=int, default=1)
    p.add_argument("--no-shuffle", action="store_true",
                   help="keep the input row order")
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("train", help="fit one SVC and save the model")
    add_source_args(p)
    p.add_argument("model", help="model JSON to write")
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--gamma-k", type=float, default=1.0,
                   help="decision kernel width")
    p.add_argument("--scheme", default="none",
                   help="weight scheme name or number (default: none)")
    p.add_argument("--gamma-s", type=float, default=1.0,
                   help="density kernel width")
    p.add_argument("--weights-seed", type=int, default=4)
    p.add_argument("--normalize-weights", action="store_true")
    p.add_argument("--standardize", action="store_true")
    add_solver_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="apply a saved model")
    add_source_args(p, label_optional=True)
    p.add_argument("model", help="model JSON from `train`")
    p.add_argument("--out", default=None, help="write `label decision` lines")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("cv", help="k-fold cross-validate one setting")
    add_source_args(p)
    p.add_argument("--scheme", default="none")
    p.add_argument("--gamma-s", type=float, default=None)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--gamma-k", type=float, default=1.0)
    p.add_argument("--folds", type=_positive_int, default=5)
    p.add_argument("--fold-seed", type=int, default=2)
    p.add_argument("--weights-seed", type=int, default=4)
    p.add_argument("--normalize-weights", action="store_true")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--positive", type=float, default=1.0,
                   help="label counted as positive in F1")
    add_solver_args(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("grid", help="grid-search schemes and kernel settings")
    add_source_args(p)
    p.add_argument("--schemes", type=_str_list, default=["none"],
                   metavar="LIST", help='e.g. "none,5" or "none,1,2,3"')
    p.add_argument("--gamma-s-grid", type=_float_list,
                   default=[0.01, 0.1, 1.0, 10.0, 100.0], metavar="LIST")
    p.add_argument("--c-grid", type=_float_list,
                   default=[0.1, 1.0, 10.0, 100.0], metavar="LIST")
    p.add_argument("--gamma-k-grid", type=_float_list,
                   default=[0.01, 0.1, 1.0, 10.0], metavar="LIST")
    p.add_argument("--folds", type=_positive_int, default=5)
    p.add_argument("--fold-seed", type=int, default=2)
    p.add_argument("--weights-seed", type=int, default=4)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--positive", type=float, default=1.0)
    p.add_argument("--normalize-weights", action="store_true")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--report", default=None, help="JSONL report to write")
    p.add_argument("--top", type=int, default=10,
                   help="rows of the ranking table to print")
    add_solver_args(p)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("mlp",
                       help="standard vs density-weighted regressor runs")
    add_source_args(p)
    p.add_argument("--scheme", default="identity",
                   help="density-based weighting for the weighted runs")
    p.add_argument("--gamma-s-grid", type=_float_list,
                   default=[0.01, 0.1, 1.0, 10.0, 100.0], metavar="LIST")
    p.add_argument("--hidden", type=_int_list, default=[100, 50, 20],
                   metavar="LIST", help="hidden layer widths")
    p.add_argument("--activation", choices=["relu", "tanh"], default="relu")
    p.add_argument("--loss", choices=["mse", "mae"], default="mse")
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--epochs", type=_positive_int, default=100)
    p.add_argument("--batch-size", type=_positive_int, default=32)
    p.add_argument("--test-fraction", type=float, default=0.25)
    p.add_argument("--shuffle-seed", type=int, default=1)
    p.add_argument("--net-seeds", type=_int_list, default=[1, 2, 3, 4, 5, 6],
                   metavar="LIST", help="one report row per seed")
    p.add_argument("--weights-seed", type=int, default=4)
    p.add_argument("--normalize-weights", action="store_true")
    p.add_argument("--report", default=None, help="JSONL report to write")
    p.set_defaults(func=cmd_mlp)

    p = sub.add_parser("selftest",
                       help="cross-check the solver against a reference")
    p.add_argument("--instances", type=_positive_int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=1000000)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--objective-tol", type=float, default=1e-4)
    p.add_argument("--engine", choices=["fast", "checked"], default="fast")
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("weights", help="print or save weights for a dataset")
    add_source_args(p)
    p.add_argument("--scheme", default="none")
    p.add_argument("--gamma-s", type=float, default=1.0)
    p.add_argument("--weights-seed", type=int, default=4)
    p.add_argument("--normalize-weights", action="store_true")
    p.add_argument("--out", default=None, help="write one weight per line")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def _make_client(args):
    if args.server:
        import httpx
        return httpx.Client(base_url=args.server, timeout=None)
    import warnings
    with warnings.catch_warnings():
        # starlette wants its httpx fork for in-process clients; the plain
        # httpx fallback it warns about works fine for synchronous use
        warnings.filterwarnings(
            "ignore", message="Using `httpx` with `starlette.testclient`")
        from fastapi.testclient import TestClient

    from .service.app import app
    return TestClient(app, raise_server_exceptions=False)


def _post(args, path, payload):
    """POST and return the parsed body, or exit 1 with a one-line error."""
    with _make_client(args) as client:
        try:
            resp = client.post(path, json=payload)
        except Exception as exc:
            print(f"error: cannot reach service: {exc}", file=sys.stderr)
            raise SystemExit(1)
    try:
        body = resp.json()
    except json.JSONDecodeError:
        body = {"detail": resp.text.strip()}
    if resp.status_code != 200:
        detail = body.get("detail", body)
        print(f"error: {detail}", file=sys.stderr)
        raise SystemExit(1)
    return body


def _source_payload(args):
    src = {"path": args.data, "format": args.format,
           "delimiter": args.delimiter, "label_col": args.label_col,
           "skip_header": args.skip_header, "clean": args.clean,
           "task": args.task}
    if args.label_map:
        src["label_map"] = parse_label_map(args.label_map)
    return src


def _solver_payload(args):
    return {"tol": args.tol, "iter_multiplier": args.iter_multiplier,
            "max_iter": args.max_iter, "seed": args.solver_seed,
            "engine": args.engine}


def cmd_prep(args):
    seed = None if args.no_shuffle else args.shuffle_seed
    body = _post(args, "/prep", {"source": _source_payload(args),
                                 "output_path": args.output,
                                 "task": args.task, "shuffle_seed": seed})
    print(f"read {body['rows_in']} rows, kept {body['rows_out']} "
          f"({body['duplicates_removed']} duplicates, "
          f"{body['conflicts_removed']} conflicting removed)")
    order = "input order" if seed is None else f"shuffled with seed {seed}"
    print(f"wrote {body['output_path']} ({order})")
    return 0


def cmd_train(args):
    body = _post(args, "/train", {
        "source": _source_payload(args), "model_out": args.model,
        "C": args.C, "gamma_k": args.gamma_k,
        "weights": {"scheme": args.scheme, "gamma_s": args.gamma_s,
                    "seed": args.weights_seed,
                    "normalize": args.normalize_weights},
        "solver": _solver_payload(args), "standardize": args.standardize})
    print(f"trained on {body['n']} samples: {body['n_support']} SVs, "
          f"objective {body['objective']:.6f}, bias {body['bias']:.6f}")
    print(f"steps {body['attempted']} (accepted {body['accepted']}), "
          f"stopped_early={body['stopped_early']}, "
          f"violation {body['violation']:.2e}")
    print(f"wrote {body['model_path']}")
    return 0


def cmd_predict(args):
    body = _post(args, "/predict", {"model_path": args.model,
                                    "source": _source_payload(args),
                                    "out_path": args.out})
    if args.out:
        print(f"wrote {body['out_path']} ({body['n']} predictions)")
    else:
        for lab, dec in zip(body["labels"], body["decision"]):
            print(f"{int(lab):+d} {dec!r}")
    if body.get("f1") is not None:
        print(f"F1 against given labels: {body['f1']:.6f}")
    return 0


def cmd_cv(args):
    solver = _solver_payload(args)
    gs = f"{1.0 if args.gamma_s is None else args.gamma_s:g}"
    print(f"config: scheme={args.scheme} gamma_s={gs} "
          f"C={args.C:g} gamma_k={args.gamma_k:g} folds={args.folds} "
          f"fold_seed={args.fold_seed} weights_seed={args.weights_seed} "
          f"solver_seed={solver['seed']} engine={solver['engine']} "
          f"standardize={args.standardize} "
          f"normalize_weights={args.normalize_weights}")
    body = _post(args, "/cv", {
        "source": _source_payload(args), "scheme": args.scheme,
        "gamma_s": args.gamma_s, "C": args.C, "gamma_k": args.gamma_k,
        "folds": args.folds, "fold_seed": args.fold_seed,
        "solver": solver, "weights_seed": args.weights_seed,
        "normalize_weights": args.normalize_weights,
        "standardize": args.standardize, "positive": args.positive})
    if body["invalid"]:
        print("invalid: some training fold lacks one of the classes")
        return 1
    folds = " ".join(f"{v:.4f}" for v in body["fold_f1"])
    print(f"fold F1: {folds}")
    print(f"mean F1 {body['mean_f1']:.6f} (std {body['std_f1']:.4f})")
    return 0


def cmd_grid(args):
    body = _post(args, "/grid", {
        "source": _source_payload(args), "schemes": args.schemes,
        "gamma_s_grid": args.gamma_s_grid, "c_grid": args.c_grid,
        "gamma_k_grid": args.gamma_k_grid, "folds": args.folds,
        "fold_seed": args.fold_seed, "weights_seed": args.weights_seed,
        "solver": _solver_payload(args), "jobs": args.jobs,
        "positive": args.positive,
        "normalize_weights": args.normalize_weights,
        "standardize": args.standardize, "report_out": args.report,
        "table_limit": args.top})
    print(body["table"])
    best = body["best"]
    if best is None:
        print("no valid grid point")
        return 1
    gs = "-" if best["gamma_s"] is None else f"{best['gamma_s']:g}"
    print(f"best: scheme={best['scheme']} gamma_s={gs} C={best['c']:g} "
          f"gamma_k={best['gamma_k']:g} mean_f1={best['mean_f1']:.6f}")
    print(f"digest: {body['digest']}")
    if body.get("report_path"):
        print(f"wrote {body['report_path']}")
    return 0


def cmd_mlp(args):
    body = _post(args, "/mlp", {
        "source": _source_payload(args), "scheme": args.scheme,
        "gamma_s_grid": args.gamma_s_grid, "hidden": args.hidden,
        "activation": args.activation, "loss": args.loss, "lr": args.lr,
        "epochs": args.epochs, "batch_size": args.batch_size,
        "test_fraction": args.test_fraction,
        "shuffle_seed": args.shuffle_seed, "net_seeds": args.net_seeds,
        "weights_seed": args.weights_seed,
        "normalize_weights": args.normalize_weights,
        "report_out": args.report})
    print(body["table"])
    print(f"digest: {body['digest']}")
    if body.get("report_path"):
        print(f"wrote {body['report_path']}")
    return 0


def cmd_selftest(args):
    body = _post(args, "/selftest", {
        "instances": args.instances, "seed": args.seed,
        "max_iter": args.max_iter, "tol": args.tol,
        "objective_tol": args.objective_tol, "engine": args.engine})
    print(f"{body['instances']} instances, max objective gap "
          f"{body['max_gap']:.2e} (mean {body['mean_gap']:.2e})")
    if not body["passed"]:
        for f in body["failures"]:
            print(f"  FAIL instance {f['instance']}: gap {f['gap']:.3e} "
                  f"feasible={f['feasible']}", file=sys.stderr)
        print("selftest FAILED", file=sys.stderr)
        return 1
    print("selftest passed")
    return 0


def cmd_weights(args):
    body = _post(args, "/weights", {
        "source": _source_payload(args),
        "weights": {"scheme": args.scheme, "gamma_s": args.gamma_s,
                    "seed": args.weights_seed,
                    "normalize": args.normalize_weights},
        "out_path": args.out})
    if args.out:
        print(f"wrote {body['out_path']} ({body['n']} weights)")
    else:
        for v in body["weights"]:
            print(repr(v))
    return 0


def cmd_serve(args):
    import uvicorn

    from .service.app import app
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
