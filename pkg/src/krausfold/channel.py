"""Kraus-set data model, incoherence predicates, Choi oracle, classification.

A channel is a list of d x d complex Kraus operators. Incoherence is the
column-sparsity predicate (at most one nonzero entry per column); strict
incoherence additionally bounds rows. Signatures use 1-based target rows
with 0 marking an all-zero column, matching the class tables.

JSON interchange format (bit-exact contract):
``{"dim": d, "operators": [[[[re, im], ...], ...], ...]}`` with each
operator a row-major nested list of [re, im] pairs. The parser rejects
non-finite numbers and ragged shapes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .densemath import EPS_STRUCTURAL, EPS_ZERO, as_matrix, dagger, frobenius_distance
from .tables import REGIME_DIMS, TABLES, class_of_signature

# Sets flagged as channels must satisfy this completeness bound.
CHANNEL_DEFECT_TOL = 1e-8

__all__ = [
    "CHANNEL_DEFECT_TOL",
    "KrausSet",
    "signature_of",
    "is_incoherent",
    "is_strictly_incoherent",
    "completeness_defect",
    "choi",
    "choi_spectrum",
    "choi_rank",
    "channels_equal",
    "classify",
    "apply",
    "kraus_to_json_dict",
    "kraus_from_json_dict",
    "load_kraus",
    "save_kraus",
]


@dataclass(frozen=True)
class KrausSet:
    """Immutable list of d x d Kraus operators."""

    dim: int
    ops: tuple[np.ndarray, ...]

    @classmethod
    def from_ops(cls, ops: Sequence, dim: int | None = None) -> "KrausSet":
        mats = tuple(as_matrix(op) for op in ops)
        if dim is None:
            if not mats:
                raise ValueError("cannot infer dim from an empty operator list")
            dim = mats[0].shape[0]
        for i, m in enumerate(mats):
            if m.shape != (dim, dim):
                raise ValueError(f"operator {i} has shape {m.shape}, expected ({dim}, {dim})")
        frozen = []
        for m in mats:
            m = m.copy()
            m.setflags(write=False)
            frozen.append(m)
        return cls(dim=dim, ops=tuple(frozen))

    def __len__(self) -> int:
        return len(self.ops)

    def pruned(self, tol: float = EPS_ZERO) -> "KrausSet":
        """Drop operators whose largest entry is below tol."""
        kept = [op for op in self.ops if np.max(np.abs(op)) >= tol]
        return KrausSet.from_ops(kept, dim=self.dim) if kept else KrausSet(self.dim, ())

    def is_channel(self, tol: float = CHANNEL_DEFECT_TOL) -> bool:
        return completeness_defect(self) <= tol


def signature_of(op: np.ndarray, eps: float = EPS_STRUCTURAL) -> tuple[int, ...] | None:
    """Per-column target rows, or None when some column has two entries.

    The zero matrix gets the all-zero signature (vacuously incoherent).
    """
    op = np.asarray(op, dtype=complex)
    sig = []
    for c in range(op.shape[1]):
        rows = np.nonzero(np.abs(op[:, c]) > eps)[0]
        if len(rows) > 1:
            return None
        sig.append(int(rows[0]) + 1 if len(rows) == 1 else 0)
    return tuple(sig)


def is_incoherent(op: np.ndarray, eps: float = EPS_STRUCTURAL) -> bool:
    return signature_of(op, eps) is not None


def is_strictly_incoherent(op: np.ndarray, eps: float = EPS_STRUCTURAL) -> bool:
    """True iff both the operator and its adjoint are incoherent."""
    op = np.asarray(op, dtype=complex)
    return signature_of(op, eps) is not None and signature_of(dagger(op), eps) is not None


def completeness_defect(s: KrausSet) -> float:
    """Frobenius norm of sum(K^H K) - I."""
    acc = np.zeros((s.dim, s.dim), dtype=complex)
    for op in s.ops:
        acc += dagger(op) @ op
    return frobenius_distance(acc, np.eye(s.dim))


def choi(s: KrausSet) -> np.ndarray:
    """Choi matrix J = sum_ij E_ij (x) Phi(E_ij), composite index i*d + k."""
    d = s.dim
    j = np.zeros((d * d, d * d), dtype=complex)
    for op in s.ops:
        w = op.flatten(order="F")
        j += np.outer(w, w.conj())
    return j


def choi_spectrum(s: KrausSet) -> np.ndarray:
    """Eigenvalues of the Choi matrix, descending."""
    return np.linalg.eigvalsh(choi(s))[::-1]


def choi_rank(s: KrausSet, tol: float = EPS_STRUCTURAL) -> int:
    """Eigenvalues of choi(s) above tol times the largest one.

    Lower bound on the operator count of any decomposition of the channel.
    """
    defect = completeness_defect(s)
    if defect > CHANNEL_DEFECT_TOL:
        raise ValueError(f"not a channel: completeness defect {defect:.3e}")
    eigs = choi_spectrum(s)
    top = eigs[0]
    if top <= 0:
        return 0
    return int(np.sum(eigs > tol * top))


def channels_equal(a: KrausSet, b: KrausSet, tol: float = 1e-9) -> tuple[bool, float]:
    """Choi-matrix equality test; returns (equal, distance)."""
    if a.dim != b.dim:
        raise ValueError(f"dim mismatch {a.dim} vs {b.dim}")
    dist = frobenius_distance(choi(a), choi(b))
    return dist <= tol, dist


def classify(s: KrausSet, regime: str) -> list[int | None]:
    """Per-operator class index within a regime table; None if outside it.

    Raises on operators that are not incoherent at all.
    """
    if regime not in TABLES:
        raise ValueError(f"unknown regime {regime!r}")
    if s.dim != REGIME_DIMS[regime]:
        raise ValueError(f"regime {regime} expects dim {REGIME_DIMS[regime]}, got {s.dim}")
    out: list[int | None] = []
    for i, op in enumerate(s.ops):
        sig = signature_of(op)
        if sig is None:
            raise ValueError(f"operator {i} is not incoherent")
        out.append(class_of_signature(regime, sig))
    return out


def apply(s: KrausSet, rho: np.ndarray) -> np.ndarray:
    """Channel action sum K rho K^H."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (s.dim, s.dim):
        raise ValueError(f"state shape {rho.shape} does not match dim {s.dim}")
    out = np.zeros_like(rho)
    for op in s.ops:
        out += op @ rho @ dagger(op)
    return out


def kraus_to_json_dict(s: KrausSet) -> dict:
    return {
        "dim": s.dim,
        "operators": [
            [[[float(z.real), float(z.imag)] for z in row] for row in op] for op in s.ops
        ],
    }


def kraus_from_json_dict(data) -> KrausSet:
    if not isinstance(data, dict):
        raise ValueError("top-level JSON value must be an object")
    if set(data.keys()) != {"dim", "operators"}:
        raise ValueError("expected exactly the keys 'dim' and 'operators'")
    dim = data["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise ValueError("'dim' must be a positive integer")
    raw_ops = data["operators"]
    if not isinstance(raw_ops, list) or not raw_ops:
        raise ValueError("'operators' must be a non-empty list")
    ops = []
    for n, raw in enumerate(raw_ops):
        mat = np.zeros((dim, dim), dtype=complex)
        if not isinstance(raw, list) or len(raw) != dim:
            raise ValueError(f"operator {n}: expected {dim} rows")
        for r, row in enumerate(raw):
            if not isinstance(row, list) or len(row) != dim:
                raise ValueError(f"operator {n} row {r}: expected {dim} entries")
            for c, cell in enumerate(row):
                if (
                    not isinstance(cell, list)
                    or len(cell) != 2
                    or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in cell)
                ):
                    raise ValueError(f"operator {n} entry ({r},{c}): expected [re, im]")
                re, im = float(cell[0]), float(cell[1])
                if not (np.isfinite(re) and np.isfinite(im)):
                    raise ValueError(f"operator {n} entry ({r},{c}): non-finite value")
                mat[r, c] = complex(re, im)
        ops.append(mat)
    return KrausSet.from_ops(ops, dim=dim)


def load_kraus(path) -> KrausSet:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return kraus_from_json_dict(data)


def save_kraus(s: KrausSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(kraus_to_json_dict(s), fh, indent=1)
        fh.write("\n")
