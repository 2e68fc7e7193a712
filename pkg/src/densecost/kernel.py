"""RBF kernel and Gram matrix helpers."""

import numpy as np


def rbf(a, b, gamma):
    """Gaussian kernel k(a, b) = exp(-gamma * ||a - b||^2) between two vectors."""
    d = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    return float(np.exp(-gamma * (d * d).sum()))


def gram(X, gamma, Z=None):
    """Gram matrix of the Gaussian kernel.

    Parameters
    ----------
    X : array-like, shape (l, d)
        Training points (columns of the result).
    gamma : float
        Kernel width; k(a, b) = exp(-gamma * ||a - b||^2).
    Z : array-like, shape (m, d), optional
        Evaluation points. When omitted the symmetric train matrix
        K[i, j] = k(X[i], X[j]) is returned with an exactly unit diagonal
        and exact symmetry (each off-diagonal entry is computed once and
        mirrored). When given, the rectangular matrix K[i, j] = k(Z[i], X[j])
        is returned.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be 2-d")
    gamma = float(gamma)
    if Z is None:
        l = X.shape[0]
        K = np.empty((l, l))
        for i in range(l):
            K[i, i] = 1.0
            if i + 1 < l:
                d = X[i + 1:] - X[i]
                K[i, i + 1:] = np.exp(-gamma * (d * d).sum(axis=1))
                K[i + 1:, i] = K[i, i + 1:]
        return K
    Z = np.ascontiguousarray(Z, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[1] != X.shape[1]:
        raise ValueError("Z must be 2-d with the same number of columns as X")
    K = np.empty((Z.shape[0], X.shape[0]))
    for i in range(Z.shape[0]):
        d = X - Z[i]
        K[i] = np.exp(-gamma * (d * d).sum(axis=1))
    return K


class GramCache:
    """Caches train Gram matrices per kernel width.

    Grid searches revisit the same gamma for many C values; the cache keeps
    one matrix per gamma so each is computed once.
    """

    def __init__(self, X):
        self.X = np.ascontiguousarray(X, dtype=np.float64)
        self._store = {}

    def get(self, gamma):
        key = float(gamma)
        K = self._store.get(key)
        if K is None:
            K = gram(self.X, key)
            self._store[key] = K
        return K
