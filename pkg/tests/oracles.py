"""Independent reference computations used by the tests."""

import numpy as np


def gauss_jordan_inverse(M):
    """Explicit inverse by Gauss-Jordan elimination with partial pivoting."""
    M = np.array(M, dtype=np.float64)
    n = M.shape[0]
    aug = np.hstack([M, np.eye(n)])
    for col in range(n):
        pivot = col + int(np.argmax(np.abs(aug[col:, col])))
        if pivot != col:
            aug[[col, pivot]] = aug[[pivot, col]]
        aug[col] /= aug[col, col]
        for row in range(n):
            if row != col:
                aug[row] -= aug[row, col] * aug[col]
    return aug[:, n:]


def weighted_gradient(X, y, W, gamma, weighted=True):
    """Gradient of sum_y pi_y ||X_y W - Y_y||^2 + gamma ||W||^2, summed class by class."""
    C = W.shape[1]
    grad = 2.0 * gamma * W
    for label in range(C):
        Xy = X[y == label]
        if len(Xy) == 0:
            continue
        pi = 1.0 / len(Xy) if weighted else 1.0
        Yy = np.zeros((len(Xy), C))
        Yy[:, label] = 1.0
        grad += -2.0 * pi * Xy.T @ (Yy - Xy @ W)
    return grad


def nearest_mean_predict(train_X, train_y, X):
    labels = np.unique(train_y)
    means = np.stack([train_X[train_y == c].mean(axis=0) for c in labels])
    d = ((X[:, None, :] - means[None, :, :]) ** 2).sum(axis=2)
    return labels[np.argmin(d, axis=1)]


def riemann_auc(points, steps=2_000_000):
    """Midpoint-rule integral of the piecewise-linear curve, normalized by its span."""
    pts = np.asarray(points, dtype=np.float64)
    s, a = pts[:, 0], pts[:, 1]
    grid = np.linspace(s[0], s[-1], steps + 1)
    mids = 0.5 * (grid[1:] + grid[:-1])
    return float(np.sum(np.interp(mids, s, a)) * (grid[1] - grid[0]) / (s[-1] - s[0]))
