"""Training-set density estimates and the per-sample cost weights built from them."""

import enum

import numpy as np

from .kernel import gram

# Weights must stay strictly positive or the box constraint collapses; the
# signed scheme can produce non-positive values and gets clamped here.
SIGNED_CLAMP = 1e-6


class WeightScheme(enum.Enum):
    """Ways to turn the kernel density s_i of a training point into a cost weight.

    Schemes 1-6 are monotone transforms of the plain density, the signed
    scheme weighs a point by how much its neighbourhood agrees with its own
    label, and the random scheme is a control. ``parse`` accepts either the
    scheme name or its conventional number (1=sqrt ... 8=random).
    """

    NONE = "none"
    SQRT = "sqrt"
    IDENTITY = "identity"
    SQUARE = "square"
    INV_SQRT = "inv-sqrt"
    INV = "inv"
    INV_SQUARE = "inv-square"
    SIGNED = "signed"
    RANDOM = "random"

    @classmethod
    def parse(cls, text):
        t = str(text).strip().lower()
        numbered = {
            "0": cls.NONE, "1": cls.SQRT, "2": cls.IDENTITY, "3": cls.SQUARE,
            "4": cls.INV_SQRT, "5": cls.INV, "6": cls.INV_SQUARE,
            "7": cls.SIGNED, "8": cls.RANDOM,
        }
        if t in numbered:
            return numbered[t]
        for member in cls:
            if member.value == t:
                return member
        raise ValueError(f"unknown weight scheme {text!r}")

    @property
    def number(self):
        return _SCHEME_NUMBERS[self]

    @property
    def uses_density(self):
        """True when the scheme depends on the density width gamma_s."""
        return self not in (WeightScheme.NONE, WeightScheme.RANDOM)

    @property
    def uses_labels(self):
        return self is WeightScheme.SIGNED


_SCHEME_NUMBERS = {s: n for n, s in enumerate([
    WeightScheme.NONE, WeightScheme.SQRT, WeightScheme.IDENTITY,
    WeightScheme.SQUARE, WeightScheme.INV_SQRT, WeightScheme.INV,
    WeightScheme.INV_SQUARE, WeightScheme.SIGNED, WeightScheme.RANDOM])}


def density(X, gamma_s):
    """Kernel density estimate at each training point.

    s_i = sum_j exp(-gamma_s * ||x_i - x_j||^2), the j = i self-term
    included, so values lie in [1, l]. As gamma_s -> 0 every s_i -> l; as
    gamma_s -> inf every s_i -> the multiplicity of x_i.
    """
    return gram(X, gamma_s).sum(axis=1)


def signed_density(X, y, gamma_s):
    """Label-signed density sy_i = y_i * sum_j y_j exp(-gamma_s ||x_i - x_j||^2).

    Positive where the neighbourhood agrees with the point's own label,
    negative where it is outvoted.
    """
    y = np.asarray(y, dtype=np.float64)
    return y * (gram(X, gamma_s) @ y)


def make_weights(X, y, scheme, gamma_s=1.0, seed=None, normalize=False):
    """Per-sample cost weights for the chosen scheme; strictly positive.

    The signed scheme clamps non-positive values at ``SIGNED_CLAMP`` so the
    box constraint stays open. The random scheme draws 1 + U[0, 1) per
    sample from ``seed`` and ignores ``gamma_s``. ``normalize=True``
    rescales the result to mean one.
    """
    X = np.asarray(X, dtype=np.float64)
    l = X.shape[0]
    if scheme == WeightScheme.NONE:
        w = np.ones(l)
    elif scheme == WeightScheme.RANDOM:
        w = 1.0 + np.random.default_rng(seed).random(l)
    elif scheme == WeightScheme.SIGNED:
        if y is None:
            raise ValueError("the signed scheme needs labels")
        w = np.maximum(signed_density(X, y, gamma_s), SIGNED_CLAMP)
    else:
        s = density(X, gamma_s)
        if scheme == WeightScheme.SQRT:
            w = np.sqrt(s)
        elif scheme == WeightScheme.IDENTITY:
            w = s
        elif scheme == WeightScheme.SQUARE:
            w = s * s
        elif scheme == WeightScheme.INV_SQRT:
            w = 1.0 / np.sqrt(s)
        elif scheme == WeightScheme.INV:
            w = 1.0 / s
        elif scheme == WeightScheme.INV_SQUARE:
            w = 1.0 / (s * s)
        else:  # pragma: no cover - parse() can't produce anything else
            raise ValueError(f"unhandled scheme {scheme}")
    if normalize:
        w = w * (l / w.sum())
    return w
