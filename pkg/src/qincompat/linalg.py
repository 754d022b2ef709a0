"""Dense complex linear algebra helpers.

Thin wrappers over numpy with the validation and conventions the rest of the
package relies on: matrices are square complex ndarrays unless noted, tensor
factors follow C (row-major) ordering, and Hermitian inputs are checked, not
assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvariantError

HERMITIAN_ATOL = 1e-10


def as_complex_matrix(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D complex ndarray, rejecting anything else."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    return arr


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product a @ b."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape[-1] != b.shape[0]:
        raise ValueError(f"incompatible shapes for matmul: {a.shape} and {b.shape}")
    return a @ b


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(a, dtype=complex).conj().T


def trace(a: np.ndarray) -> complex:
    """Matrix trace as a Python complex."""
    a = as_complex_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"trace requires a square matrix, got shape {a.shape}")
    return complex(np.trace(a))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the left factor slowest (row-major blocks)."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def frobenius_norm(a: np.ndarray) -> float:
    """Frobenius norm sqrt(sum |a_ij|^2)."""
    return float(np.linalg.norm(np.asarray(a, dtype=complex)))


def is_hermitian(a: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    """Entrywise check that a equals its conjugate transpose."""
    a = as_complex_matrix(a)
    if a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(a - a.conj().T)) <= atol)


def partial_trace(a: np.ndarray, dims: Sequence[int], traced: Sequence[int]) -> np.ndarray:
    """Trace out the tensor factors listed in ``traced``.

    ``a`` lives on a tensor product of factors with dimensions ``dims`` (in
    kron order, left factor slowest). Returns the reduced matrix on the kept
    factors, in their original order; tracing every factor leaves a 1x1
    matrix holding the full trace.
    """
    a = as_complex_matrix(a)
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims):
        raise ValueError(f"factor dimensions must be positive, got {dims}")
    total = math.prod(dims)
    if a.shape != (total, total):
        raise ValueError(f"matrix shape {a.shape} does not match factor dimensions {dims}")
    n = len(dims)
    traced_set = set(int(i) for i in traced)
    if not traced_set <= set(range(n)):
        raise ValueError(f"traced factors {sorted(traced_set)} out of range for {n} factors")
    keep = [i for i in range(n) if i not in traced_set]
    t = a.reshape(dims + dims)
    # Reusing one einsum label for a row/column axis pair contracts that factor.
    row_labels = list(range(n))
    col_labels = [i if i in traced_set else n + i for i in range(n)]
    out_labels = [i for i in keep] + [n + i for i in keep]
    reduced = np.einsum(t, row_labels + col_labels, out_labels)
    kept_dim = math.prod(dims[i] for i in keep) if keep else 1
    return np.asarray(reduced, dtype=complex).reshape(kept_dim, kept_dim)


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral decomposition of a Hermitian matrix.

    ``eigenvalues`` is real and ascending; column j of ``eigenvectors`` is a
    unit eigenvector for ``eigenvalues[j]`` and the columns are orthonormal.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.eigenvalues, dtype=float)
        vecs = np.asarray(self.eigenvectors, dtype=complex)
        if vals.ndim != 1 or vecs.ndim != 2 or vecs.shape != (vals.size, vals.size):
            raise InvariantError("eigendecomposition shape mismatch")
        if np.any(np.diff(vals) < 0):
            raise InvariantError("eigenvalues must be ascending")
        vals.flags.writeable = False
        vecs.flags.writeable = False
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)

    def reconstruct(self) -> np.ndarray:
        """Return V diag(w) V^dagger."""
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def hermitian_eig(a: np.ndarray, atol: float = HERMITIAN_ATOL) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    a = as_complex_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise InvariantError(f"hermitian_eig requires a square matrix, got shape {a.shape}")
    if not is_hermitian(a, atol):
        raise InvariantError("hermitian_eig requires a Hermitian matrix")
    w, v = np.linalg.eigh(a)
    return EigenDecomposition(eigenvalues=w, eigenvectors=v)


def psd_sqrt(a: np.ndarray, neg_atol: float = 1e-8) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in [-neg_atol, 0) are treated as rounding noise and clamped
    to zero; anything more negative is rejected.
    """
    dec = hermitian_eig(a)
    w = dec.eigenvalues.copy()
    if w[0] < -neg_atol:
        raise InvariantError(f"psd_sqrt requires positive semidefinite input; min eigenvalue {w[0]:.3e}")
    w[w < 0.0] = 0.0
    v = dec.eigenvectors
    root = (v * np.sqrt(w)) @ v.conj().T
    return (root + root.conj().T) / 2.0


def vec(a: np.ndarray) -> np.ndarray:
    """Row-major vectorization: stack rows into one column vector."""
    return as_complex_matrix(a).reshape(-1)
