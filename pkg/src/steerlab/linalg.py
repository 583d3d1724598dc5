"""Dense complex matrix kernels shared by every other module.

Matrices and vectors are plain ``numpy.ndarray`` objects with dtype
``complex128``; everything here is a pure function of its inputs.
All matrices in this package are small (42x42 at most), so no sparse
or accelerated paths are provided.
"""

from __future__ import annotations

import numpy as np

#: Absolute tolerance for Hermiticity checks; downstream PSD checks inherit it.
HERMITICITY_TOL = 1e-10

#: Cutoff used when locating the first nonzero eigenvector component
#: for deterministic phase fixing (unit vectors always have a component
#: of magnitude >= 1/sqrt(d), far above this).
_PHASE_FIX_CUTOFF = 1e-8


def as_complex_matrix(m) -> np.ndarray:
    """Return ``m`` as a 2-d complex128 array, rejecting other shapes."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"expected a matrix, got array of ndim {arr.ndim}")
    return arr


def freeze_array(arr: np.ndarray) -> np.ndarray:
    """Owned, read-only complex copy; used by the immutable value types."""
    out = np.array(arr, dtype=complex)
    out.setflags(write=False)
    return out


def matrix_to_entries(m: np.ndarray) -> list[list[float]]:
    """Row-major [re, im] pairs, the wire format for matrices."""
    flat = np.asarray(m, dtype=complex).ravel()
    return [[float(z.real), float(z.imag)] for z in flat]


def entries_to_matrix(entries, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`matrix_to_entries`."""
    flat = np.array([complex(re, im) for re, im in entries])
    if flat.size != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, got {flat.size}")
    return flat.reshape(rows, cols)


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(m).conj().T


def frobenius(m: np.ndarray) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(np.asarray(m)))


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two matrices; dimensions multiply."""
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))


def partial_trace(m: np.ndarray, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    Parameters
    ----------
    m:
        Square matrix of side ``dims[0] * dims[1]``.
    dims:
        Pair ``(d_first, d_second)`` of subsystem dimensions.
    keep:
        Index (0 or 1) of the subsystem to keep.

    Returns
    -------
    The reduced operator on the kept subsystem. The trace is preserved.
    """
    m = as_complex_matrix(m)
    da, db = int(dims[0]), int(dims[1])
    if da < 1 or db < 1:
        raise ValueError(f"subsystem dimensions must be >= 1, got {dims}")
    if m.shape != (da * db, da * db):
        raise ValueError(
            f"matrix side {m.shape} does not match dims {da}x{db} = {da * db}"
        )
    if keep not in (0, 1):
        raise ValueError(f"keep must be 0 or 1, got {keep}")
    t = m.reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ijkj->ik", t)
    return np.einsum("ijil->jl", t)


def is_hermitian(m: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    """True iff ``m`` is square and equals its conjugate transpose within ``tol``."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m - dagger(m))) <= tol)


def is_psd(m: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    """True iff ``m`` is Hermitian within ``tol`` and its minimal eigenvalue is >= -tol."""
    m = as_complex_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("is_psd requires a square matrix")
    if not is_hermitian(m, tol):
        return False
    evals = np.linalg.eigvalsh((m + dagger(m)) / 2.0)
    return bool(evals[0] >= -tol)


def eig_hermitian(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix with reproducible output.

    Eigenvalues are returned in descending order. Each eigenvector (column
    ``i`` of the second return value) has its first component of magnitude
    above a fixed cutoff phase-fixed to be real positive, so repeated runs
    on identical input produce identical output.

    Raises
    ------
    ValueError
        If ``m`` is not Hermitian within the module tolerance.
    """
    m = as_complex_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("eig_hermitian requires a square matrix")
    if not is_hermitian(m, HERMITICITY_TOL):
        raise ValueError("matrix is not Hermitian within tolerance 1e-10")
    evals, evecs = np.linalg.eigh((m + dagger(m)) / 2.0)
    evals = evals[::-1].copy()
    evecs = evecs[:, ::-1].copy()
    for i in range(evecs.shape[1]):
        col = evecs[:, i]
        idx = np.flatnonzero(np.abs(col) > _PHASE_FIX_CUTOFF)
        j = idx[0] if idx.size else int(np.argmax(np.abs(col)))
        phase = col[j] / abs(col[j])
        evecs[:, i] = col / phase
    return evals, evecs
