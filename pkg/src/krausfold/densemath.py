"""Minimal dense complex matrix helpers shared by all other modules.

All matrices are numpy complex128 arrays. Sizes stay tiny (the largest
object is a 9x9 Choi matrix), so clarity wins over throughput everywhere.
"""

from __future__ import annotations

import numpy as np

# Structural checks (unitarity, signature extraction, class membership).
EPS_STRUCTURAL = 1e-10
# Entries below this are treated as exact zeros when pruning.
EPS_ZERO = 1e-12

__all__ = [
    "EPS_STRUCTURAL",
    "EPS_ZERO",
    "UnitaryMatrix",
    "as_matrix",
    "mat_mul",
    "dagger",
    "frobenius_distance",
    "complete_to_unitary",
]


def as_matrix(entries) -> np.ndarray:
    """Coerce to a 2-D complex array, rejecting non-finite entries."""
    mat = np.asarray(entries, dtype=complex)
    if mat.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={mat.ndim}")
    if not np.all(np.isfinite(mat.real)) or not np.all(np.isfinite(mat.imag)):
        raise ValueError("matrix entries must be finite")
    return mat


def mat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Complex matrix product with an explicit shape check."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"incompatible shapes {a.shape} x {b.shape}")
    return a @ b


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(a, dtype=complex).conj().T


def frobenius_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius norm of A - B."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


class UnitaryMatrix:
    """Square complex matrix validated as unitary at construction.

    The backing array is frozen; ``mat`` is safe to share.
    """

    __slots__ = ("mat",)

    def __init__(self, mat) -> None:
        m = as_matrix(mat)
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"unitary must be square, got {m.shape}")
        defect = frobenius_distance(dagger(m) @ m, np.eye(m.shape[0]))
        if defect > EPS_STRUCTURAL:
            raise ValueError(f"not unitary: ||U^H U - I||_F = {defect:.3e}")
        m = m.copy()
        m.setflags(write=False)
        self.mat = m

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def __matmul__(self, other):
        if isinstance(other, UnitaryMatrix):
            return UnitaryMatrix(self.mat @ other.mat)
        return self.mat @ other

    def __repr__(self) -> str:
        return f"UnitaryMatrix(dim={self.dim})"


# Candidates whose residual falls below this after projection are skipped
# (completion) or rejected as dependent (caller-supplied rows).
_GS_TOL = 1e-8


def _project_out(vec: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    for b in basis:
        vec = vec - np.vdot(b, vec) * b
    return vec


def complete_to_unitary(rows, dim: int) -> UnitaryMatrix:
    """Extend orthonormal rows to a dim x dim unitary.

    The first ``len(rows)`` output rows equal the inputs after
    re-orthonormalization. Remaining rows come from a Gram-Schmidt sweep
    over canonical basis vectors in index order, skipping near-dependent
    candidates, so the completion is deterministic.
    """
    basis: list[np.ndarray] = []
    for i, row in enumerate(rows):
        vec = np.asarray(row, dtype=complex).reshape(dim)
        vec = _project_out(vec, basis)
        norm = np.linalg.norm(vec)
        if norm < _GS_TOL:
            raise ValueError(f"input row {i} is linearly dependent on earlier rows")
        basis.append(vec / norm)
    for k in range(dim):
        if len(basis) == dim:
            break
        vec = np.zeros(dim, dtype=complex)
        vec[k] = 1.0
        vec = _project_out(vec, basis)
        norm = np.linalg.norm(vec)
        if norm > _GS_TOL:
            basis.append(vec / norm)
    if len(basis) != dim:
        raise ValueError("Gram-Schmidt completion failed")
    return UnitaryMatrix(np.array(basis))
