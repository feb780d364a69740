"""Dense complex linear algebra primitives and bipartite index operations.

Conventions used across the package:

- Matrices are numpy arrays in row-major (C) order.
- A bipartite index pair (a, b) on dimensions (dimA, dimB) is flattened
  as a * dimB + b.
- Subsystems of a bipartite matrix are numbered 1 (left factor) and 2
  (right factor).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

TOL_HERM = 1e-10
TOL_EIG = 1e-10
TOL_UNIT = 1e-10
TOL_PSD = 1e-9
PIVOT_TOL = 1e-9
GRAM_TOL = 1e-8


def _as_complex(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(np.asarray(m, dtype=complex).imag)):
        raise ValueError("matrix has non-finite entries")
    return np.asarray(m, dtype=complex)


def assert_hermitian(m: np.ndarray, tol: float = TOL_HERM) -> np.ndarray:
    """Return m as a complex array, raising if it is not Hermitian within tol."""
    m = _as_complex(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix is not square: {m.shape}")
    dev = np.abs(m - m.conj().T).max() if m.size else 0.0
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian: max |m - m^dag| = {dev:.3e} > {tol:.1e}")
    return m


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; index (i*rowsB + p, j*colsB + q) holds A_ij * B_pq."""
    return np.kron(_as_complex(a), _as_complex(b))


def schur(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Entrywise (Schur/Hadamard) product of two equally sized matrices."""
    a = _as_complex(a)
    b = _as_complex(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch for Schur product: {a.shape} vs {b.shape}")
    return a * b


def _bipartite_view(m: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    da, db = int(shape[0]), int(shape[1])
    m = _as_complex(m)
    if m.shape != (da * db, da * db):
        raise ValueError(f"matrix shape {m.shape} does not match bipartite shape {da}x{db}")
    return m.reshape(da, db, da, db)


def partial_trace(m: np.ndarray, shape: tuple[int, int], which: int) -> np.ndarray:
    """Trace out subsystem `which` (1 or 2) of a bipartite matrix."""
    m4 = _bipartite_view(m, shape)
    if which == 1:
        return np.trace(m4, axis1=0, axis2=2)
    if which == 2:
        return np.trace(m4, axis1=1, axis2=3)
    raise ValueError(f"which must be 1 or 2, got {which}")


def partial_transpose(m: np.ndarray, shape: tuple[int, int], which: int) -> np.ndarray:
    """Transpose the indices of subsystem `which` (1 or 2) of a bipartite matrix."""
    m4 = _bipartite_view(m, shape)
    da, db = int(shape[0]), int(shape[1])
    if which == 1:
        return m4.transpose(2, 1, 0, 3).reshape(da * db, da * db)
    if which == 2:
        return m4.transpose(0, 3, 2, 1).reshape(da * db, da * db)
    raise ValueError(f"which must be 1 or 2, got {which}")


def reshuffle(m: np.ndarray, d: int) -> np.ndarray:
    """Reorder entries of a d^2 x d^2 matrix: output (ij),(kl) = input (ik),(jl).

    The permutation is an involution; it converts between the bipartite
    (Jamiolkowski) index grouping and the superoperator grouping.
    """
    m = _as_complex(m)
    if m.shape != (d * d, d * d):
        raise ValueError(f"reshuffle needs a {d * d}x{d * d} matrix, got {m.shape}")
    return m.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)


def realign(m: np.ndarray, d: int) -> np.ndarray:
    """Realignment of a bipartite matrix: (ij),(kl) -> (ik),(jl).

    A product A (x) B realigns to the rank-1 matrix vec(A) vec(B^T)^T, which
    is the basis of the product test. Same index permutation as reshuffle.
    """
    return reshuffle(m, d)


def herm_eig(m: np.ndarray, tol: float = TOL_HERM) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (w, v) with eigenvalues w ascending and unitary v such that
    m = v @ diag(w) @ v^dag.
    """
    m = assert_hermitian(m, tol)
    w, v = np.linalg.eigh(m)
    return w, v


def is_psd(m: np.ndarray, tol: float = TOL_PSD) -> bool:
    """True iff the Hermitian matrix m has min eigenvalue >= -tol."""
    w, _ = herm_eig(m)
    return bool(w.min() >= -tol) if w.size else True


def gram_vectors(c: np.ndarray, tol: float = TOL_PSD) -> np.ndarray:
    """Vectors realizing a PSD matrix as a Gram matrix.

    Returns an n x n array whose i-th row v_i satisfies <v_j|v_i> = C_ij,
    so each ||v_i||^2 = C_ii. Eigenvalues in [-tol, 0) are clipped to 0;
    anything more negative is an error.
    """
    w, v = herm_eig(c)
    if w.size and w.min() < -tol:
        raise ValueError(f"matrix is not PSD: min eigenvalue {w.min():.3e} < -{tol:.1e}")
    w = np.clip(w, 0.0, None)
    return v * np.sqrt(w)


def _residual(vec: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    w = vec.astype(complex)
    for b in basis:
        w = w - b * (b.conj() @ w)
    return w


def _orthonormalize(vec: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    # projected twice for numerical stability
    w = _residual(_residual(vec, basis), basis)
    return w / np.linalg.norm(w)


def complete_isometry(
    partial_map: Sequence[tuple[np.ndarray, np.ndarray]],
    dim: int | None = None,
    pivot_tol: float = PIVOT_TOL,
    gram_tol: float = GRAM_TOL,
) -> np.ndarray:
    """Unitary W with W @ source_k = target_k for every (source, target) pair.

    Such a W exists iff the two collections share a Gram matrix; a mismatch
    beyond gram_tol raises. The construction is deterministic: pivoted
    orthogonalization with the same pivot order on both collections (largest
    residual norm first, stop below pivot_tol), then the orthogonal
    complement is filled by orthogonalizing standard basis vectors in index
    order on each side independently.
    """
    sources = [np.asarray(s, dtype=complex).reshape(-1) for s, _ in partial_map]
    targets = [np.asarray(t, dtype=complex).reshape(-1) for _, t in partial_map]
    if not sources:
        raise ValueError("partial_map must contain at least one pair")
    n = sources[0].size if dim is None else int(dim)
    if any(v.size != n for v in sources + targets):
        raise ValueError("all vectors must have length equal to dim")

    s_mat = np.stack(sources, axis=1)
    t_mat = np.stack(targets, axis=1)
    gram_dev = np.abs(s_mat.conj().T @ s_mat - t_mat.conj().T @ t_mat).max()
    if gram_dev > gram_tol:
        raise ValueError(
            f"Gram matrices differ by {gram_dev:.3e} > {gram_tol:.1e}; no unitary maps sources to targets"
        )

    basis_s: list[np.ndarray] = []
    basis_t: list[np.ndarray] = []
    remaining = list(range(len(sources)))
    while remaining:
        norms = [np.linalg.norm(_residual(sources[j], basis_s)) for j in remaining]
        best = int(np.argmax(norms))
        if norms[best] <= pivot_tol:
            break
        j = remaining.pop(best)
        basis_s.append(_orthonormalize(sources[j], basis_s))
        basis_t.append(_orthonormalize(targets[j], basis_t))

    for basis in (basis_s, basis_t):
        for j in range(n):
            if len(basis) == n:
                break
            e = np.zeros(n, dtype=complex)
            e[j] = 1.0
            if np.linalg.norm(_residual(e, basis)) > pivot_tol:
                basis.append(_orthonormalize(e, basis))

    b_s = np.stack(basis_s, axis=1)
    b_t = np.stack(basis_t, axis=1)
    return b_t @ b_s.conj().T
