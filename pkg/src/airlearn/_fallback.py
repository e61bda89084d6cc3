"""Pure numpy versions of the accumulation kernels in ``_kernels.pyx``."""

import numpy as np

NAME = "python"


def sym_rank1_update(A, x, scale):
    """In place: ``A += scale * outer(x, x)``."""
    n = x.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"matrix is {A.shape[0]}x{A.shape[1]}, vector has length {n}")
    A += scale * np.outer(x, x)


def accumulate_rows(A, c, X):
    """In place, one row at a time: ``A += x x^T`` and ``c += x`` for each row."""
    n = X.shape[1]
    if A.shape != (n, n) or c.shape != (n,):
        raise ValueError(f"accumulator shapes do not match feature dimension {n}")
    for x in X:
        A += np.outer(x, x)
        c += x
