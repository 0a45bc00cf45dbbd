"""Certified reduction of canonical incoherent Kraus decompositions.

Three regimes: qubit IO (5 -> 4 operators), qutrit IO (39 -> 32), qutrit
SIO (15 -> 13). Each merge group mixes a few canonical classes by a
unitary, which never changes the channel, so that one class cancels and
a structured residual folds into an absorbing class. Candidate unitaries
come from closed-form coefficient formulas where such formulas exist;
a null-space cancellation engine re-derives a valid mixer whenever the
formulas are degenerate or fail validation; the two groups whose
residual target has two-column support fall back to a direct block
reconstruction from population and coherence data. Every result is
certified against the input's Choi matrix before it is reported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import (
    KrausSet,
    choi,
    choi_rank,
    classify,
    completeness_defect,
    is_strictly_incoherent,
    signature_of,
)
from .densemath import EPS_ZERO, UnitaryMatrix, complete_to_unitary, frobenius_distance
from .tables import QUBIT4, QUBIT5, QUTRIT_IO39, QUTRIT_SIO15, TABLES

__all__ = [
    "MergeGroup",
    "MergeStep",
    "ReductionOutcome",
    "IO_GROUPS",
    "SIO_GROUPS",
    "QUBIT_GROUP",
    "REGIME_BOUNDS",
    "mix",
    "cancellation_row",
    "merge_proportional",
    "closed_form_unitary_qubit",
    "closed_form_unitary_triple",
    "closed_form_unitary_quad",
    "closed_form_unitary_sio_triple",
    "connecting_unitary",
    "canonical_qubit_params",
    "run_merge_group",
    "reduce_qubit_io",
    "reduce_qutrit_io",
    "reduce_qutrit_sio",
]

REGIME_BOUNDS = {QUBIT5: 4, QUTRIT_IO39: 32, QUTRIT_SIO15: 13}

# Relative tolerance for accepting a mixed output's sparsity pattern.
_PATTERN_TOL = 1e-9
# Groups are re-run until a full pass changes nothing (absorber classes
# revived in one pass are consumed by earlier groups on the next).
_MAX_PASSES = 4


@dataclass(frozen=True)
class MergeGroup:
    """One cancellation step: mix members, drop one class, absorb the rest.

    ``member_indices`` lists the classes entering the step as declared
    (the residual target itself may appear; it is never mixed). The class
    ``eliminated_class`` loses its slot; the leftover mixing row lands on
    the sparsity pattern of ``residual_target`` and is folded into it.
    """

    name: str
    member_indices: tuple[int, ...]
    eliminated_class: int
    residual_target: int


@dataclass(frozen=True)
class MergeStep:
    pass_index: int
    group: str
    route: str  # noop | closed-form | engine | block | fail


@dataclass(frozen=True)
class ReductionOutcome:
    result: KrausSet
    choi_distance: float
    all_incoherent: bool
    strictly_incoherent: bool
    op_count_before: int
    op_count_after: int
    status: str  # Reduced | FallbackUsed | NotReduced
    log: tuple[MergeStep, ...]


IO_GROUPS: tuple[MergeGroup, ...] = (
    MergeGroup("G1", (32, 24, 37), 37, 39),
    MergeGroup("G2", (8, 12, 39), 39, 38),
    MergeGroup("G3", (4, 8, 38, 16), 38, 12),
    MergeGroup("G4", (11, 12, 19, 20), 20, 38),
    MergeGroup("G5", (15, 16, 35, 36), 36, 39),
    MergeGroup("G6", (15, 16, 23, 24), 24, 39),
    MergeGroup("G7", (11, 12, 27, 28), 28, 38),
)

SIO_GROUPS: tuple[MergeGroup, ...] = (
    MergeGroup("H1", (9, 12, 14, 15), 15, 14),
    MergeGroup("H2", (8, 10, 13, 14), 14, 13),
)

# The qubit reduction is a single merge step in the same shape.
QUBIT_GROUP = MergeGroup("Q1", (1, 2, 5, 4), 5, 3)


# ---------------------------------------------------------------------------
# mixing and merging primitives


def mix(u, s: KrausSet) -> KrausSet:
    """New decomposition L_i = sum_j U_ij K_j of the same channel."""
    umat = u.mat if isinstance(u, UnitaryMatrix) else UnitaryMatrix(u).mat
    if umat.shape[0] != len(s.ops):
        raise ValueError(f"unitary dim {umat.shape[0]} does not match {len(s.ops)} operators")
    ops = [sum(umat[i, j] * s.ops[j] for j in range(len(s.ops))) for i in range(len(s.ops))]
    return KrausSet.from_ops(ops, dim=s.dim)


def cancellation_row(ops, forbidden) -> np.ndarray | None:
    """Unit-norm c with sum_n c_n K_n vanishing on the forbidden positions.

    Null-space vector of the |forbidden| x |ops| coefficient system, with
    the first nonzero component rotated to the positive real axis. None
    when the system has no null space (combination infeasible).
    """
    ops = [np.asarray(op, dtype=complex) for op in ops]
    rows = [np.array([op[r, c] for op in ops]) for (r, c) in forbidden]
    a = np.array(rows) if rows else np.zeros((0, len(ops)), dtype=complex)
    _, sv, vh = np.linalg.svd(a, full_matrices=True)
    rank = int(np.sum(sv > 1e-11)) if len(sv) else 0
    if rank >= len(ops):
        return None
    c = vh[-1].conj()
    k0 = next((i for i in range(len(c)) if abs(c[i]) > EPS_ZERO), None)
    if k0 is None:
        return None
    return c * (abs(c[k0]) / c[k0])


def _proportional_coeff(base: np.ndarray, other: np.ndarray, rtol: float) -> complex | None:
    """lam with other = lam * base within rtol, or None."""
    nb = np.linalg.norm(base)
    no = np.linalg.norm(other)
    if no < EPS_ZERO:
        return 0.0
    if nb < EPS_ZERO:
        return None
    lam = np.vdot(base, other) / nb**2
    if np.linalg.norm(other - lam * base) <= rtol * max(no, nb):
        return complex(lam)
    return None


def _merge_pair(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Single operator carrying the joint Choi weight of a proportional pair.

    Rank-1 factor of the 2x2 Gram matrix; exact when b = lam * a.
    """
    pair = np.array([a.flatten(), b.flatten()])
    gram = pair @ pair.conj().T
    _, vec = np.linalg.eigh(gram)
    return (vec[:, -1].conj() @ pair).reshape(a.shape)


def merge_proportional(s: KrausSet) -> KrausSet:
    """Collapse proportional operator pairs to single operators.

    Iterates to a fixpoint and prunes zero operators; the Choi matrix is
    preserved because K and lam*K combine into sqrt(1+|lam|^2)*K.
    """
    ops = [op for op in s.ops if np.max(np.abs(op)) >= EPS_ZERO]
    changed = True
    while changed:
        changed = False
        for i in range(len(ops)):
            for j in range(i + 1, len(ops)):
                if _proportional_coeff(ops[i], ops[j], rtol=1e-9) is not None:
                    merged = _merge_pair(ops[i], ops[j])
                    ops = [op for k, op in enumerate(ops) if k not in (i, j)]
                    if np.max(np.abs(merged)) >= EPS_ZERO:
                        ops.append(merged)
                    changed = True
                    break
            if changed:
                break
    return KrausSet.from_ops(ops, dim=s.dim) if ops else KrausSet(s.dim, ())


# ---------------------------------------------------------------------------
# closed-form mixing unitaries


def _rows_normalized(rows) -> np.ndarray | None:
    """Stack rows normalized to unit length; None when a row degenerates.

    The closed-form displays carry explicit normalizers; renormalizing
    numerically keeps the construction exact where those displays hold
    and makes typos in the printed normalizers irrelevant.
    """
    out = []
    for r in rows:
        norm_sq = float(np.real(np.vdot(r, r)))
        if norm_sq < 1e-10:
            return None
        out.append(np.asarray(r, dtype=complex) / np.sqrt(norm_sq))
    return np.array(out)


def _validated_unitary(rows) -> np.ndarray | None:
    u = _rows_normalized(rows)
    if u is None:
        return None
    if frobenius_distance(u @ u.conj().T, np.eye(u.shape[0])) > _PATTERN_TOL:
        return None
    return u


def closed_form_unitary_triple(a1, b1, b2, a3) -> np.ndarray | None:
    """Mixer for [M1, M2, M3] where M1 carries (a1, b1), M2 carries b2 in
    the same column as b1, and M3 is the single-entry operator (a3) sharing
    M1's first-column row. Rows: two class-preserving outputs, then the
    residual row. None when degenerate or not unitary.
    """
    r1 = np.array([np.conj(a1), 0.0, np.conj(a3)])
    r2 = np.array(
        [
            np.conj(b1) * abs(a3) ** 2,
            (abs(a1) ** 2 + abs(a3) ** 2) * np.conj(b2),
            -np.conj(a3) * np.conj(b1) * a1,
        ]
    )
    r3 = np.array([a3 * b2, -a3 * b1, -a1 * b2])
    return _validated_unitary([r1, r2, r3])


def closed_form_unitary_quad(a1, a2, a3, a4, b1, b4) -> np.ndarray | None:
    """Mixer for [M1, M2, M3, M4]: M1 (a1, b1) and M2 (a2) share output
    rows with M3 (single entry a3 under M1's row) and M4 (a4, b4) on the
    swapped pattern. Rows: three class-preserving outputs, then the
    residual row (which lands on the diagonal-class pattern).
    """
    m1, m4 = abs(b1), abs(b4)
    r1 = np.array([a1, 0.0, a3, 0.0])
    r2 = np.array(
        [
            -(a3**2) * a4 * m1**2 * m4**2,
            a2 * b1 * np.conj(b4) * (a1**2 * m4**2 + a3**2 * m1**2 + a3**2 * m4**2),
            a1 * a3 * a4 * m1**2 * m4**2,
            a3**2 * a4 * m1**3 * m4,
        ]
    )
    r3 = np.array(
        [
            -a2 * a3 * np.conj(b1) * b4,
            -a3 * a4 * m1**2,
            a1 * a2 * np.conj(b1) * b4,
            a2 * a3 * m1**2,
        ]
    )
    r4 = np.array(
        [
            a3**2 * np.conj(b1) * b4,
            0.0,
            -a1 * a3 * np.conj(b1) * b4,
            (a1**2 + a3**2) * m4**2,
        ]
    )
    return _validated_unitary([r1, r2, r4, r3])


def closed_form_unitary_sio_triple(b1, a2, b2, a3) -> np.ndarray | None:
    """Mixer for strictly incoherent [M1, M2, M3]: M1 carries b1, M2
    carries (a2, b2), M3 the single entry a3 sharing M2's first-column
    row. Rows: two class-preserving outputs, then the residual row.
    """
    r1 = np.array(
        [
            -(abs(a2) ** 2 + abs(a3) ** 2) * b1,
            -abs(a3) ** 2 * np.conj(b2),
            a2 * np.conj(a3) * np.conj(b2),
        ]
    )
    r2 = np.array([0.0, -np.conj(a2), -np.conj(a3)])
    r3 = np.array([a3 * b2, -a3 * np.conj(b1), a2 * np.conj(b1)])
    return _validated_unitary([r1, r2, r3])


def closed_form_unitary_qubit(a, b) -> UnitaryMatrix | None:
    """5x5 mixer over the five canonical qubit classes, built from the
    canonical coefficients a1..a5, b1..b4.

    Acts on classes (1, 2, 5, 4) and fixes the diagonal class 3; the
    mixed output in slot 5 lands on the diagonal-class pattern, ready
    to merge with class 3. None when parameters are degenerate (for
    example a1 = a3-coefficient = 0) or the formulas fail validation.
    """
    a = [complex(x) for x in a]
    b = [complex(x) for x in b]
    if any(abs(x.imag) > 1e-8 for x in a):
        return None
    u = closed_form_unitary_quad(a[0].real, a[1].real, a[4].real, a[3].real, b[0], b[3])
    if u is None:
        return None
    v = np.zeros((5, 5), dtype=complex)
    slots = (0, 1, 4, 3)  # quad inputs [K1, K2, K5, K4]
    for r, vrow in enumerate((0, 1, 3, 4)):  # quad rows: classes 1, 2, 4, then residual
        for c, vcol in enumerate(slots):
            v[vrow, vcol] = u[r, c]
    v[2, 2] = 1.0
    try:
        return UnitaryMatrix(v)
    except ValueError:
        return None


def connecting_unitary(k_ops, l_ops) -> UnitaryMatrix:
    """Unitary U with L_i = sum_j U_ij K_j for decompositions of one channel.

    The shorter list is padded with zero operators. Obtained by matching
    the row spaces of the flattened operator stacks via SVD and completing
    both isometries deterministically.
    """
    k_ops = [np.asarray(k, dtype=complex) for k in k_ops]
    l_ops = [np.asarray(m, dtype=complex) for m in l_ops]
    n = max(len(k_ops), len(l_ops))
    zero = np.zeros_like(k_ops[0] if k_ops else l_ops[0])
    k_ops = k_ops + [zero] * (n - len(k_ops))
    l_ops = l_ops + [zero] * (n - len(l_ops))
    kv = np.array([k.flatten() for k in k_ops])
    lv = np.array([m.flatten() for m in l_ops])
    pk, sv, qk = np.linalg.svd(kv, full_matrices=True)
    r = int(np.sum(sv > 1e-11))
    pl = lv @ qk[:r].conj().T @ np.diag(1.0 / sv[:r])
    pk_full = complete_to_unitary(list(pk[:, :r].T), n).mat.T
    pl_full = complete_to_unitary(list(pl.T), n).mat.T
    return UnitaryMatrix(pl_full @ pk_full.conj().T)


# ---------------------------------------------------------------------------
# the cancellation engine


def _union_support(members, tol: float = 1e-14) -> list[tuple[int, int]]:
    coords: set[tuple[int, int]] = set()
    for k in members:
        for r, c in zip(*np.nonzero(np.abs(k) > tol)):
            coords.add((int(r), int(c)))
    return sorted(coords)


def _kill_vectors(members, out_sig, tol: float = 1e-14) -> list[np.ndarray]:
    """Functionals a mixing row must annihilate so its output has a
    sparsity pattern inside out_sig."""
    d = members[0].shape[0]
    kills = []
    for j in range(d):
        rows_present: dict[int, np.ndarray] = {}
        for n, k in enumerate(members):
            for i in range(d):
                if abs(k[i, j]) > tol:
                    rows_present.setdefault(i, np.zeros(len(members), dtype=complex))
                    rows_present[i][n] = k[i, j]
        for i, vec in rows_present.items():
            if out_sig[j] == 0 or i != out_sig[j] - 1:
                kills.append(vec.conj())
    return kills


def _structured_completion(members, c, out_sigs) -> list[np.ndarray] | None:
    """Orthonormal rows perpendicular to c whose mixed outputs land on
    out_sigs, or None.

    Rows are built most-constrained-first: kill systems with disjoint
    operator support are automatically orthogonal, so the least
    constrained directions remain feasible until the end.
    """
    k = len(members)
    kills = [_kill_vectors(members, sig) for sig in out_sigs]
    order = sorted(range(len(out_sigs)), key=lambda i: -len(kills[i]))
    rows: list[np.ndarray | None] = [None] * len(out_sigs)
    built: list[np.ndarray] = []
    for i in order:
        constraints = [c] + built + kills[i]
        a = np.array([x.conj() for x in constraints])
        _, sv, vh = np.linalg.svd(a, full_matrices=True)
        if int(np.sum(sv > 1e-9)) >= k:
            return None
        u = vh[-1].conj()
        rows[i] = u / np.linalg.norm(u)
        built.append(rows[i])
    return rows  # type: ignore[return-value]


def _within_class(sig, class_sig) -> bool:
    return all(s in (0, t) for s, t in zip(sig, class_sig))


def _commit_mixed(ops: dict[int, np.ndarray], group: MergeGroup, table, u: np.ndarray, ids) -> bool:
    """Mix ops[ids] by u (residual row last), validate, commit in place.

    Kept outputs must stay inside their class patterns; the residual must
    sit inside the target pattern and merge with the target operator (or
    revive the slot when the target is absent). Rejects without mutating
    on any failure.
    """
    if u is None or u.shape != (len(ids), len(ids)):
        return False
    if frobenius_distance(u @ u.conj().T, np.eye(len(ids))) > _PATTERN_TOL:
        return False
    members = [ops[i] for i in ids]
    outs = [sum(u[r, n] * members[n] for n in range(len(ids))) for r in range(len(ids))]
    *keep, res = outs
    keep_ids = [i for i in ids if i != group.eliminated_class]
    scale = max(1.0, max(float(np.max(np.abs(o))) for o in outs))
    for cls, mat in zip(keep_ids, keep):
        sig = signature_of(mat, eps=_PATTERN_TOL * scale)
        if sig is None or not _within_class(sig, table[cls]):
            return False
    tsig = table[group.residual_target]
    off_pattern = np.ones(res.shape, dtype=bool)
    for j, r in enumerate(tsig):
        if r:
            off_pattern[r - 1, j] = False
    if np.max(np.abs(res[off_pattern]), initial=0.0) > _PATTERN_TOL * scale:
        return False
    target = ops.get(group.residual_target)
    if np.linalg.norm(res) < EPS_ZERO:
        merged = target
    elif target is None:
        merged = res
    else:
        if _proportional_coeff(target, res, rtol=1e-8) is None:
            return False
        merged = _merge_pair(target, res)
    for cls, mat in zip(keep_ids, keep):
        if np.max(np.abs(mat)) >= EPS_ZERO:
            ops[cls] = mat
        else:
            ops.pop(cls, None)
    if merged is not None and np.max(np.abs(merged)) >= EPS_ZERO:
        ops[group.residual_target] = merged
    else:
        ops.pop(group.residual_target, None)
    ops.pop(group.eliminated_class, None)
    return True


# ---------------------------------------------------------------------------
# block reconstruction (two-conflict-column fallback)


def _two_column_block_solve(p: np.ndarray, x: np.ndarray):
    """Canonical coefficients for a 2x2 population block p and coherence
    block x: alpha[k, l], beta[k, l] with sum_l |alpha[k, l]|^2 = p[k, 0],
    sum_k |beta[k, l]|^2 = p[l, 1], alpha[k, l] * conj(beta[k, l]) =
    conj(x[k, l]). Returns (alpha, beta) or None.

    Reduces to a scalar root-find in t = |alpha[0, 0]|^2: the remaining
    squared magnitudes follow from the row/column sums and the product
    constraints, and the last column sum pins t by bisection.
    """
    p11, p21 = float(p[0, 0]), float(p[1, 0])
    p12, p22 = float(p[0, 1]), float(p[1, 1])
    a = np.abs(x) ** 2

    def residual(t: float):
        t01 = p11 - t
        den = p12 - a[0, 0] / t if t > 0 else -np.inf
        if den <= 0:
            return None
        t10 = a[1, 0] / den if a[1, 0] > 0 else 0.0
        t11 = p21 - t10
        if t11 <= 0 or t01 <= 0:
            return None
        return a[0, 1] / t01 + a[1, 1] / t11 - p22

    lo = a[0, 0] / p12 if p12 > 0 else 0.0
    hi = p11
    if hi <= lo:
        return None
    grid = np.linspace(lo + (hi - lo) * 1e-9, hi - (hi - lo) * 1e-9, 2000)
    vals = [(t, residual(t)) for t in grid]
    vals = [(t, v) for t, v in vals if v is not None and np.isfinite(v)]
    root = None
    for (t1, v1), (t2, v2) in zip(vals, vals[1:]):
        if v1 == 0 or v1 * v2 < 0:
            left, right = t1, t2
            for _ in range(200):
                mid = 0.5 * (left + right)
                vm = residual(mid)
                if vm is None:
                    left = mid
                    continue
                if (residual(left) or 0.0) * vm <= 0:
                    right = mid
                else:
                    left = mid
            root = 0.5 * (left + right)
            break
    if root is None:
        return None
    t = root
    t2 = np.array([[t, p11 - t], [0.0, 0.0]])
    t2[1, 0] = a[1, 0] / (p12 - a[0, 0] / t) if a[1, 0] > 0 else 0.0
    t2[1, 1] = p21 - t2[1, 0]
    alpha = np.sqrt(np.maximum(t2, 0.0))
    beta = np.zeros((2, 2), dtype=complex)
    for l in range(2):
        free = []
        known = 0.0
        for k in range(2):
            if abs(x[k, l]) > 0:
                if alpha[k, l] <= 0:
                    return None
                beta[k, l] = np.conj(x[k, l]) / alpha[k, l]
                known += abs(beta[k, l]) ** 2
            else:
                free.append(k)
        if free:
            # zero-coherence slots: any split of the leftover column
            # weight gives the same Choi matrix, so park it on one slot
            beta[free[0], l] = np.sqrt(max(p[l, 1] - known, 0.0))
    return alpha, beta


def _block_population(members) -> np.ndarray:
    return sum(np.abs(k[:2, :2]) ** 2 for k in members)


def _block_coherence(members) -> np.ndarray:
    return sum(np.outer(k[:2, 0], k[:2, 1].conj()) for k in members)


def _g3_block(ops: dict[int, np.ndarray], ids) -> bool:
    """Rebuild the {classes 4, 8, 38, 16, 12} block from its moments."""
    solve_ids = list(dict.fromkeys(list(ids) + ([12] if 12 in ops else [])))
    members = [ops[i] for i in solve_ids]
    sol = _two_column_block_solve(_block_population(members), _block_coherence(members))
    if sol is None:
        return False
    alpha, beta = sol
    for i in solve_ids:
        ops.pop(i, None)
    out_classes = {(0, 0): 4, (1, 1): 8, (0, 1): 12, (1, 0): 16}
    for (k, l), cls in out_classes.items():
        mat = np.zeros((3, 3), dtype=complex)
        mat[k, 0] = alpha[k, l]
        mat[l, 1] = beta[k, l]
        if np.max(np.abs(mat)) >= EPS_ZERO:
            ops[cls] = mat
    return True


# ---------------------------------------------------------------------------
# group execution and drivers


def _coeff(op: np.ndarray, sig, col: int) -> complex:
    return complex(op[sig[col] - 1, col]) if sig[col] else 0.0


def _closed_form_g1(ops):
    t = TABLES[QUTRIT_IO39]
    return closed_form_unitary_triple(
        _coeff(ops[32], t[32], 0),
        _coeff(ops[32], t[32], 1),
        _coeff(ops[24], t[24], 1),
        _coeff(ops[37], t[37], 0),
    )


def _closed_form_g2(ops):
    t = TABLES[QUTRIT_IO39]
    return closed_form_unitary_triple(
        _coeff(ops[8], t[8], 0),
        _coeff(ops[8], t[8], 1),
        _coeff(ops[12], t[12], 1),
        _coeff(ops[39], t[39], 0),
    )


def _closed_form_g3(ops):
    t = TABLES[QUTRIT_IO39]
    a = [
        _coeff(ops[4], t[4], 0),
        _coeff(ops[8], t[8], 0),
        _coeff(ops[38], t[38], 0),
        _coeff(ops[16], t[16], 0),
    ]
    if any(abs(x.imag) > 1e-8 for x in a):
        return None
    return closed_form_unitary_quad(
        a[0].real,
        a[1].real,
        a[2].real,
        a[3].real,
        _coeff(ops[4], t[4], 1),
        _coeff(ops[16], t[16], 1),
    )


def _closed_form_h1(ops):
    t = TABLES[QUTRIT_SIO15]
    return closed_form_unitary_sio_triple(
        _coeff(ops[9], t[9], 1),
        _coeff(ops[12], t[12], 0),
        _coeff(ops[12], t[12], 1),
        _coeff(ops[15], t[15], 0),
    )


def _closed_form_h2(ops):
    t = TABLES[QUTRIT_SIO15]
    return closed_form_unitary_sio_triple(
        _coeff(ops[8], t[8], 1),
        _coeff(ops[10], t[10], 0),
        _coeff(ops[10], t[10], 1),
        _coeff(ops[14], t[14], 0),
    )


_CLOSED_FORM = {
    "G1": _closed_form_g1,
    "G2": _closed_form_g2,
    "G3": _closed_form_g3,
    "H1": _closed_form_h1,
    "H2": _closed_form_h2,
}


def _run_group(ops: dict[int, np.ndarray], group: MergeGroup, table, force_fallback: bool) -> str:
    if group.eliminated_class not in ops:
        return "noop"
    mix_ids = [i for i in group.member_indices if i != group.residual_target]
    ids = [i for i in mix_ids if i in ops]
    if not force_fallback and group.name in _CLOSED_FORM and all(i in ops for i in mix_ids):
        u = _CLOSED_FORM[group.name](ops)
        if u is not None and _commit_mixed(ops, group, table, u, mix_ids):
            return "closed-form"
    if len(ids) >= 2:
        members = [ops[i] for i in ids]
        tsig = table[group.residual_target]
        target_support = {(tsig[j] - 1, j) for j in range(len(tsig)) if tsig[j]}
        forbidden = [rc for rc in _union_support(members) if rc not in target_support]
        c = cancellation_row(members, forbidden)
        if c is not None:
            out_sigs = [table[i] for i in ids if i != group.eliminated_class]
            rows = _structured_completion(members, c, out_sigs)
            if rows is not None and _commit_mixed(ops, group, table, np.array(rows + [c]), ids):
                return "engine"
    if group.name == "G3" and _g3_block(ops, ids):
        return "block"
    return "fail"


def _classified_ops(s: KrausSet, regime: str) -> dict[int, np.ndarray]:
    """Map canonical class -> operator, or raise when not in canonical form."""
    work = merge_proportional(s)
    classes = classify(work, regime)
    ops: dict[int, np.ndarray] = {}
    for cls, op in zip(classes, work.ops):
        if cls is None:
            raise ValueError(f"operator not in the {regime} class table")
        if cls in ops:
            raise ValueError(f"two non-proportional operators in class {cls}")
        ops[cls] = np.array(op)
    return ops


def _outcome(
    s: KrausSet,
    ops: dict[int, np.ndarray],
    j0: np.ndarray,
    regime: str,
    log: list[MergeStep],
    any_failed: bool,
    fallback_used: bool,
) -> ReductionOutcome:
    result = KrausSet.from_ops([ops[i] for i in sorted(ops)], dim=s.dim) if ops else KrausSet(s.dim, ())
    dist = frobenius_distance(choi(result), j0)
    all_inc = all(signature_of(op) is not None for op in result.ops)
    strict = all(is_strictly_incoherent(op) for op in result.ops)
    bound = REGIME_BOUNDS[regime]
    certified = (
        dist <= 1e-9
        and len(result.ops) <= bound
        and all_inc
        and (strict or regime != QUTRIT_SIO15)
    )
    if certified and completeness_defect(result) <= 1e-8:
        certified = choi_rank(result) <= len(result.ops)
    if any_failed or not certified:
        status = "NotReduced"
    elif fallback_used:
        status = "FallbackUsed"
    else:
        status = "Reduced"
    return ReductionOutcome(
        result=result,
        choi_distance=dist,
        all_incoherent=all_inc,
        strictly_incoherent=strict,
        op_count_before=len(s.ops),
        op_count_after=len(result.ops),
        status=status,
        log=tuple(log),
    )


def _reduce_grouped(s: KrausSet, regime: str, groups, *, force_fallback: bool) -> ReductionOutcome:
    ops = _classified_ops(s, regime)
    table = TABLES[regime]
    j0 = choi(s)
    log: list[MergeStep] = []
    last_pass = 0
    for p in range(_MAX_PASSES):
        last_pass = p
        changed = False
        for group in groups:
            route = _run_group(ops, group, table, force_fallback)
            log.append(MergeStep(p, group.name, route))
            changed = changed or route in ("closed-form", "engine", "block")
        if not changed:
            break
    any_failed = any(step.route == "fail" for step in log if step.pass_index == last_pass)
    fallback_used = any(
        step.group in _CLOSED_FORM and step.route in ("engine", "block") for step in log
    )
    return _outcome(s, ops, j0, regime, log, any_failed, fallback_used)


def reduce_qutrit_io(s: KrausSet, *, force_fallback: bool = False) -> ReductionOutcome:
    """Reduce a canonical 39-class qutrit IO set to at most 32 operators."""
    return _reduce_grouped(s, QUTRIT_IO39, IO_GROUPS, force_fallback=force_fallback)


def reduce_qutrit_sio(s: KrausSet, *, force_fallback: bool = False) -> ReductionOutcome:
    """Reduce a canonical 15-class qutrit SIO set to at most 13 operators."""
    return _reduce_grouped(s, QUTRIT_SIO15, SIO_GROUPS, force_fallback=force_fallback)


def run_merge_group(s: KrausSet, group: MergeGroup, regime: str, *, force_fallback: bool = False):
    """Apply a single merge group to a (possibly sub-channel) set.

    Returns (reduced KrausSet, route string). Completeness is not
    required; Choi equality is the caller's certification oracle.
    """
    ops = _classified_ops(s, regime)
    route = _run_group(ops, group, TABLES[regime], force_fallback)
    result = KrausSet.from_ops([ops[i] for i in sorted(ops)], dim=s.dim) if ops else KrausSet(s.dim, ())
    return result, route


def _qubit_block(ops: dict[int, np.ndarray]) -> bool:
    members = list(ops.values())
    sol = _two_column_block_solve(_block_population(members), _block_coherence(members))
    if sol is None:
        return False
    alpha, beta = sol
    ops.clear()
    out_classes = {(0, 0): 1, (1, 1): 2, (0, 1): 3, (1, 0): 4}
    for (k, l), cls in out_classes.items():
        mat = np.zeros((2, 2), dtype=complex)
        mat[k, 0] = alpha[k, l]
        mat[l, 1] = beta[k, l]
        if np.max(np.abs(mat)) >= EPS_ZERO:
            ops[cls] = mat
    return True


def _qubit_closed_form(ops: dict[int, np.ndarray]) -> bool:
    table = TABLES[QUBIT5]
    a = [_coeff(ops[i], table[i], 0) if i in ops else 0.0 for i in range(1, 6)]
    b = [_coeff(ops[i], table[i], 1) if i in ops else 0.0 for i in range(1, 5)]
    v = closed_form_unitary_qubit(a, b)
    if v is None:
        return False
    zero = np.zeros((2, 2), dtype=complex)
    mixed = mix(v, KrausSet.from_ops([ops.get(i, zero) for i in range(1, 6)], dim=2))
    l1, l2, l3, l4, res = mixed.ops
    scale = max(1.0, max(float(np.max(np.abs(m))) for m in mixed.ops))
    for mat, cls in ((l1, 1), (l2, 2), (l4, 4), (res, 3)):
        sig = signature_of(mat, eps=_PATTERN_TOL * scale)
        if sig is None or not _within_class(sig, table[cls]):
            return False
    if np.linalg.norm(res) < EPS_ZERO:
        merged = l3
    elif np.linalg.norm(l3) < EPS_ZERO:
        merged = res
    else:
        if _proportional_coeff(l3, res, rtol=1e-8) is None:
            return False
        merged = _merge_pair(l3, res)
    ops.clear()
    for cls, mat in ((1, l1), (2, l2), (3, merged), (4, l4)):
        if np.max(np.abs(mat)) >= EPS_ZERO:
            ops[cls] = mat
    return True


def reduce_qubit_io(s: KrausSet, *, force_fallback: bool = False) -> ReductionOutcome:
    """Reduce a canonical 5-class qubit IO set to at most 4 operators."""
    ops = _classified_ops(s, QUBIT5)
    j0 = choi(s)
    if 5 not in ops:
        route = "noop"
    elif not force_fallback and _qubit_closed_form(ops):
        route = "closed-form"
    elif _qubit_block(ops):
        route = "block"
    else:
        route = "fail"
    log = [MergeStep(0, QUBIT_GROUP.name, route)]
    return _outcome(
        s,
        ops,
        j0,
        QUBIT5,
        log,
        any_failed=(route == "fail"),
        fallback_used=(route == "block"),
    )


def canonical_qubit_params(s: KrausSet) -> tuple[np.ndarray, np.ndarray]:
    """Canonical coefficients (a, b) of a reduced 4-class qubit set.

    a[i] is the first-column coefficient of class i+1 (zero when the
    class is absent), b[i] the second-column coefficient. For any
    channel these echo the completeness constraints sum |a|^2 =
    sum |b|^2 = 1 and conj(a1) b1 + conj(a2) b2 = 0.
    """
    ops = _classified_ops(s, QUBIT4)
    table = TABLES[QUBIT4]
    a = np.array([_coeff(ops[i], table[i], 0) if i in ops else 0.0 for i in range(1, 5)])
    b = np.array([_coeff(ops[i], table[i], 1) if i in ops else 0.0 for i in range(1, 5)])
    return a, b
