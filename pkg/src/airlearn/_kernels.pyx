# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled accumulation kernels.

Matrices are C-contiguous. BLAS sees a row-major buffer as its transpose,
so ``uplo='U'`` there touches our lower triangle; the upper triangle is
rebuilt by copying, which keeps the result bit-exactly symmetric.
"""
from scipy.linalg.cython_blas cimport daxpy, dsyr

NAME = "cython"


cdef void _mirror_lower(double[:, ::1] A) noexcept nogil:
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(i + 1, n):
            A[i, j] = A[j, i]


def sym_rank1_update(double[:, ::1] A, const double[::1] x, double scale):
    """In place: ``A += scale * outer(x, x)``."""
    cdef int n = <int>x.shape[0]
    cdef int inc = 1
    cdef char uplo = b'U'
    if A.shape[0] != n or A.shape[1] != n:
        raise ValueError(f"matrix is {A.shape[0]}x{A.shape[1]}, vector has length {n}")
    if n == 0:
        return
    with nogil:
        dsyr(&uplo, &n, &scale, <double*>&x[0], &inc, &A[0, 0], &n)
        _mirror_lower(A)


def accumulate_rows(double[:, ::1] A, double[::1] c, const double[:, ::1] X):
    """In place, one row at a time: ``A += x x^T`` and ``c += x`` for each row."""
    cdef int n = <int>X.shape[1]
    cdef int inc = 1
    cdef char uplo = b'U'
    cdef double one = 1.0
    cdef Py_ssize_t r
    if A.shape[0] != n or A.shape[1] != n or c.shape[0] != n:
        raise ValueError(f"accumulator shapes do not match feature dimension {n}")
    if n == 0 or X.shape[0] == 0:
        return
    with nogil:
        for r in range(X.shape[0]):
            dsyr(&uplo, &n, &one, <double*>&X[r, 0], &inc, &A[0, 0], &n)
            daxpy(&n, &one, <double*>&X[r, 0], &inc, &c[0], &inc)
        _mirror_lower(A)
