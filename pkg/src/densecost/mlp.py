"""Small dense MLP regressor with per-sample loss weights (numpy only).

The training objective is a weighted mean, L = (1/n) sum_i w_i * l_i, with
l_i the squared (default) or absolute error of sample i. Uniform weights
recover the ordinary mean loss.
"""

import json

import numpy as np

from .data import DataError


def mae(y_true, y_pred):
    """Unweighted mean absolute error."""
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    return float(np.mean(np.abs(y_pred - y_true)))


class MlpRegressor:
    """Fully-connected regressor trained by mini-batch SGD.

    ``layers`` lists all widths including input and output, e.g.
    (11, 20, 10, 1); the output width must be 1. Hidden activations are
    relu or tanh, the output is linear. Initial weights are uniform on
    [-1/sqrt(fan_in), +1/sqrt(fan_in)] from ``seed``, biases zero; the same
    generator then drives the per-epoch shuffles, so a seed fixes the whole
    trajectory.
    """

    def __init__(self, layers, activation="relu", loss="mse", lr=0.01,
                 epochs=100, batch_size=32, seed=0):
        layers = tuple(int(v) for v in layers)
        if len(layers) < 2:
            raise DataError("need at least input and output layer sizes")
        if any(v < 1 for v in layers):
            raise DataError("layer sizes must be positive")
        if layers[-1] != 1:
            raise DataError("output layer must have width 1")
        if activation not in ("relu", "tanh"):
            raise DataError(f"unknown activation {activation!r}")
        if loss not in ("mse", "mae"):
            raise DataError(f"unknown loss {loss!r}")
        self.layers = layers
        self.activation = activation
        self.loss = loss
        self.lr = float(lr)
        self.epochs = int(epochs)
        self.batch_size = int(batch_size)
        self.seed = seed
        self._rng = np.random.default_rng(seed)
        self.W_ = []
        self.b_ = []
        for fan_in, fan_out in zip(layers[:-1], layers[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            self.W_.append(self._rng.uniform(-bound, bound, (fan_in, fan_out)))
            self.b_.append(np.zeros(fan_out))

    # -- forward / backward ------------------------------------------------

    def _act(self, z):
        if self.activation == "relu":
            return np.maximum(z, 0.0)
        return np.tanh(z)

    def _act_grad(self, z, a):
        if self.activation == "relu":
            return (z > 0.0).astype(np.float64)
        return 1.0 - a * a

    def _forward(self, X):
        """Returns (pre-activations, activations); activations[0] is X."""
        zs = []
        acts = [X]
        a = X
        last = len(self.W_) - 1
        for k, (W, b) in enumerate(zip(self.W_, self.b_)):
            z = a @ W + b
            zs.append(z)
            a = z if k == last else self._act(z)
            acts.append(a)
        return zs, acts

    def predict(self, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.layers[0]:
            raise DataError(f"expected {self.layers[0]} features")
        _, acts = self._forward(X)
        return acts[-1][:, 0]

    def weighted_loss(self, X, y, sample_weight=None):
        """L = (1/n) sum_i w_i * l_i over the given samples."""
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        w = np.ones(len(y)) if sample_weight is None else \
            np.asarray(sample_weight, dtype=np.float64)
        r = self.predict(X) - y
        per = r * r if self.loss == "mse" else np.abs(r)
        return float(np.mean(w * per))

    def _loss_and_grads(self, X, y, w):
        n = X.shape[0]
        zs, acts = self._forward(X)
        r = acts[-1][:, 0] - y
        if self.loss == "mse":
            loss = float(np.mean(w * r * r))
            dout = (2.0 / n) * w * r
        else:
            loss = float(np.mean(w * np.abs(r)))
            dout = (1.0 / n) * w * np.sign(r)
        delta = dout[:, None]  # gradient wrt the linear output
        gW = [None] * len(self.W_)
        gb = [None] * len(self.b_)
        for k in range(len(self.W_) - 1, -1, -1):
            gW[k] = acts[k].T @ delta
            gb[k] = delta.sum(axis=0)
            if k > 0:
                delta = (delta @ self.W_[k].T) * self._act_grad(zs[k - 1], acts[k])
        return loss, gW, gb

    # -- training ----------------------------------------------------------

    def fit(self, X, y, sample_weight=None):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        n = X.shape[0]
        if X.ndim != 2 or X.shape[1] != self.layers[0]:
            raise DataError(f"expected {self.layers[0]} features")
        if y.shape != (n,):
            raise DataError("y length does not match X")
        if sample_weight is None:
            w = np.ones(n)
        else:
            w = np.asarray(sample_weight, dtype=np.float64)
            if w.shape != (n,):
                raise DataError("sample_weight length does not match X")
            if np.any(w < 0.0):
                raise DataError("sample weights must be nonnegative")
        self.history_ = []
        for _ in range(self.epochs):
            perm = self._rng.permutation(n)
            for start in range(0, n, self.batch_size):
                idx = perm[start:start + self.batch_size]
                _, gW, gb = self._loss_and_grads(X[idx], y[idx], w[idx])
                for k in range(len(self.W_)):
                    self.W_[k] -= self.lr * gW[k]
                    self.b_[k] -= self.lr * gb[k]
            self.history_.append(self.weighted_loss(X, y, w))
        return self

    # -- persistence ---------------------------------------------------------

    def to_dict(self):
        return {
            "kind": "mlp",
            "layers": list(self.layers),
            "activation": self.activation,
            "loss": self.loss,
            "lr": self.lr,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "W": [W.tolist() for W in self.W_],
            "b": [b.tolist() for b in self.b_],
        }

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)
            fh.write("\n")

    @classmethod
    def from_dict(cls, d):
        if d.get("kind") != "mlp":
            raise DataError("not a saved MLP model")
        model = cls(d["layers"], activation=d["activation"], loss=d["loss"],
                    lr=d["lr"], epochs=d["epochs"], batch_size=d["batch_size"],
                    seed=d["seed"])
        model.W_ = [np.asarray(W, dtype=np.float64) for W in d["W"]]
        model.b_ = [np.asarray(b, dtype=np.float64) for b in d["b"]]
        return model

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def gradient_check(model, X, y, sample_weight=None, step=1e-5):
    """Largest relative gap between backprop and central-difference gradients.

    For every parameter theta: numeric = (L(theta+h) - L(theta-h)) / (2h),
    and the gap is |analytic - numeric| / max(1, |analytic|, |numeric|).
    Use a smooth activation (tanh); relu kinks can land inside the stencil.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.ones(len(y)) if sample_weight is None else \
        np.asarray(sample_weight, dtype=np.float64)
    _, gW, gb = model._loss_and_grads(X, y, w)
    worst = 0.0
    for params, grads in ((model.W_, gW), (model.b_, gb)):
        for P, G in zip(params, grads):
            flatP = P.reshape(-1)
            flatG = G.reshape(-1)
            for idx in range(flatP.size):
                orig = flatP[idx]
                flatP[idx] = orig + step
                up, _, _ = model._loss_and_grads(X, y, w)
                flatP[idx] = orig - step
                dn, _, _ = model._loss_and_grads(X, y, w)
                flatP[idx] = orig
                numeric = (up - dn) / (2.0 * step)
                analytic = flatG[idx]
                gap = abs(analytic - numeric) / max(1.0, abs(analytic),
                                                    abs(numeric))
                if gap > worst:
                    worst = gap
    return worst
