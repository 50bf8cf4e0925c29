"""Exact integer and floating-point matrix algebra for lattice work.

Integer matrices are numpy arrays with ``dtype=object`` holding Python
ints, so HNF multipliers never overflow. Floating-point matrices are
plain float64 arrays.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import NumericallyRankDeficient, RankDeficient, Singular

__all__ = [
    "as_int_matrix",
    "hnf_zero_block",
    "column_hnf_square",
    "orthogonal_zero_block",
    "det_and_inverse",
    "int_det",
    "unimodular_inverse",
]


def as_int_matrix(M) -> np.ndarray:
    """Return ``M`` as an object array of exact Python ints.

    Raises ValueError if any entry is not (close to) an integer.
    """
    A = np.asarray(M)
    if A.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    out = np.empty(A.shape, dtype=object)
    for i in range(A.shape[0]):
        for j in range(A.shape[1]):
            v = A[i, j]
            iv = int(round(float(v)))
            if abs(float(v) - iv) > 1e-12:
                raise ValueError(f"entry ({i},{j})={v!r} is not an integer")
            out[i, j] = iv
    return out


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    """Extended gcd: returns (g, x, y) with a*x + b*y = g >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b != 0:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _col_combine(A: np.ndarray, U: np.ndarray, i: int, j: int, row: int) -> None:
    """Unimodular 2-column op zeroing A[row, j] against pivot A[row, i]."""
    a, b = A[row, i], A[row, j]
    g, x, y = _egcd(a, b)
    # [[x, -b/g], [y, a/g]] has determinant (ax + by)/g = 1.
    p, q = -(b // g), a // g
    for Mat in (A, U):
        ci = Mat[:, i].copy()
        cj = Mat[:, j].copy()
        Mat[:, i] = x * ci + y * cj
        Mat[:, j] = p * ci + q * cj


def _column_reduce(A: np.ndarray, U: np.ndarray) -> int:
    """In-place column echelon reduction; returns the achieved row rank.

    After the call A[i, j] == 0 for j > i, with A[i, i] > 0 for i < rank.
    """
    n, m = A.shape
    rank = 0
    for i in range(n):
        if rank >= m:
            break
        # Move a nonzero entry into the pivot column if needed.
        for j in range(rank, m):
            if A[i, j] != 0:
                break
        else:
            continue  # row already zero in the remaining columns
        for j in range(rank + 1, m):
            if A[i, j] != 0:
                _col_combine(A, U, rank, j, i)
        if A[i, rank] == 0:
            # all mass was to the right of the pivot; swap it in
            for j in range(rank + 1, m):
                if A[i, j] != 0:
                    A[:, [rank, j]] = A[:, [j, rank]]
                    U[:, [rank, j]] = U[:, [j, rank]]
                    U[:, rank] = -U[:, rank]
                    A[:, rank] = -A[:, rank]
                    break
        if A[i, rank] < 0:
            A[:, rank] = -A[:, rank]
            U[:, rank] = -U[:, rank]
        if A[i, rank] != 0:
            rank += 1
    return rank


def hnf_zero_block(M) -> tuple[np.ndarray, np.ndarray]:
    """Unimodular U with M @ U = [0_{n x (m-n)} | B], B invertible.

    M must be an integer n x m matrix with m > n and full row rank.
    The zero block occupies the leading m - n columns. Returns (U, B)
    as exact-integer object arrays; |det U| = 1.
    """
    A = as_int_matrix(M)
    n, m = A.shape
    if m <= n:
        raise RankDeficient(f"need m > n, got shape {n}x{m}")
    U = np.empty((m, m), dtype=object)
    for i in range(m):
        for j in range(m):
            U[i, j] = 1 if i == j else 0
    rank = _column_reduce(A, U)
    if rank < n:
        raise RankDeficient(f"row rank {rank} < {n}")
    # A is now [B | 0] with B lower triangular; move zeros to the front.
    perm = list(range(n, m)) + list(range(n))
    U = U[:, perm]
    B = A[:, :n].copy()
    return U, B


def column_hnf_square(T) -> np.ndarray:
    """Lower-triangular H with positive diagonal spanning the same
    column lattice as the nonsingular integer matrix T."""
    A = as_int_matrix(T)
    n, m = A.shape
    if n != m:
        raise ValueError("square matrix required")
    U = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            U[i, j] = 1 if i == j else 0
    rank = _column_reduce(A, U)
    if rank < n:
        raise RankDeficient("matrix is singular over the integers")
    return A


def int_det(M) -> int:
    """Exact determinant of a square integer matrix (fraction-free Bareiss)."""
    A = [[int(v) for v in row] for row in np.asarray(M, dtype=object)]
    n = len(A)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for r in range(k + 1, n):
                if A[r][k] != 0:
                    A[k], A[r] = A[r], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def unimodular_inverse(U) -> np.ndarray:
    """Exact inverse of an integer matrix with |det| = 1."""
    A = np.asarray(U, dtype=object)
    n = A.shape[0]
    work = [[Fraction(int(A[i, j])) for j in range(n)] for i in range(n)]
    inv = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if work[r][col] != 0), None)
        if piv is None:
            raise Singular("matrix is singular")
        work[col], work[piv] = work[piv], work[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        p = work[col][col]
        work[col] = [v / p for v in work[col]]
        inv[col] = [v / p for v in inv[col]]
        for r in range(n):
            if r != col and work[r][col] != 0:
                f = work[r][col]
                work[r] = [a - f * b for a, b in zip(work[r], work[col])]
                inv[r] = [a - f * b for a, b in zip(inv[r], inv[col])]
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            v = inv[i][j]
            if v.denominator != 1:
                raise ValueError("matrix is not unimodular")
            out[i, j] = int(v)
    return out


def orthogonal_zero_block(M) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal U with M @ U = [0_{n x (m-n)} | B], B triangular.

    Implemented as the full QR factorization of M^T followed by a block
    swap of the columns (itself orthogonal).
    """
    A = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    n, m = A.shape
    if m <= n:
        raise NumericallyRankDeficient(f"need m > n, got shape {n}x{m}")
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        raise NumericallyRankDeficient(
            f"smallest singular value {sv[-1]:.3e} below threshold"
        )
    Q, _ = np.linalg.qr(A.T, mode="complete")
    # M @ Q = [B' | 0] with B' lower triangular; swap the blocks.
    perm = list(range(n, m)) + list(range(n))
    U = Q[:, perm]
    B = (A @ Q)[:, :n]
    return U, B


def det_and_inverse(A) -> tuple[float, np.ndarray]:
    """Determinant and inverse of a well-conditioned real square matrix."""
    M = np.asarray(A, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n) or n < 1:
        raise ValueError("square matrix of size >= 1 required")
    det = float(np.linalg.det(M))
    # Hadamard bound as the natural scale for the singularity test.
    scale = float(np.prod(np.maximum(np.linalg.norm(M, axis=1), 1e-30)))
    if abs(det) < 1e-12 * max(scale, 1e-30):
        raise Singular(f"determinant {det:.3e} below 1e-12 * scale")
    return det, np.linalg.inv(M)
