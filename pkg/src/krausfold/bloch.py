"""Gell-Mann Bloch coordinates for qutrits and achievable-region checks.

Basis ordering: lambda 1..3 are the real symmetric off-diagonal
generators for index pairs (1,2), (1,3), (2,3); lambda 4..6 the imaginary
antisymmetric ones for the same pairs; lambda 7 = diag(1,-1,0) and
lambda 8 = diag(1,1,-2)/sqrt(3). States are rho = I/3 + (1/2) sum t_i
lambda_i with |t| <= 2/sqrt(3).

The matrix path (bloch -> density -> channel -> bloch) is ground truth
for final-state coordinates. ``sio_image_closed_form`` is a secondary
coefficient-level computation kept for cross-checking; its deviation
from the matrix path is reported, not asserted, because its source
displays are not self-consistent (see the condition-2 handling below).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import KrausSet, apply, classify
from .tables import QUTRIT_SIO15, TABLES

__all__ = [
    "GELL_MANN",
    "MAX_BLOCH_NORM",
    "MARGIN_TOL",
    "ConditionRecord",
    "ConditionReport",
    "bloch_to_density",
    "density_to_bloch",
    "push_forward",
    "sio_canonical_params",
    "sio_image_closed_form",
    "closed_form_deviation",
    "check_conditions",
]

_PAIRS = [(0, 1), (0, 2), (1, 2)]


def _gell_mann() -> tuple[np.ndarray, ...]:
    lams = []
    for p, q in _PAIRS:
        lam = np.zeros((3, 3), dtype=complex)
        lam[p, q] = lam[q, p] = 1.0
        lams.append(lam)
    for p, q in _PAIRS:
        lam = np.zeros((3, 3), dtype=complex)
        lam[p, q] = -1j
        lam[q, p] = 1j
        lams.append(lam)
    lams.append(np.diag([1.0, -1.0, 0.0]).astype(complex))
    lams.append(np.diag([1.0, 1.0, -2.0]).astype(complex) / np.sqrt(3.0))
    for lam in lams:
        lam.setflags(write=False)
    return tuple(lams)


GELL_MANN: tuple[np.ndarray, ...] = _gell_mann()

# Length bound for physical Bloch vectors (necessary, not sufficient).
MAX_BLOCH_NORM = 2.0 / np.sqrt(3.0)
# Acceptance tolerance for condition margins.
MARGIN_TOL = 1e-9

# A section coordinate counts as zero below this.
_SECTION_TOL = 1e-12


def bloch_to_density(t, *, require_psd: bool = True) -> np.ndarray:
    """Matrix I/3 + (1/2) sum t_i lambda_i; Hermitian, trace 1.

    By default a reconstruction with a negative eigenvalue below -1e-9
    is rejected. require_psd=False admits section points outside the
    state body: channel action on the coordinate vector is affine and
    well defined for any Hermitian reconstruction, and the standard
    region sections (both coordinates 0.5) include such points.
    """
    t = np.asarray(t, dtype=float)
    if t.shape != (8,):
        raise ValueError("Bloch vector must have 8 components")
    norm = float(np.linalg.norm(t))
    if norm > MAX_BLOCH_NORM + 1e-12:
        raise ValueError(f"Bloch vector too long: |t| = {norm:.6f} > 2/sqrt(3)")
    rho = np.eye(3, dtype=complex) / 3.0
    for ti, lam in zip(t, GELL_MANN):
        rho = rho + 0.5 * ti * lam
    if require_psd:
        smallest = float(np.linalg.eigvalsh(rho)[0])
        if smallest < -1e-9:
            raise ValueError(
                f"reconstructed state not PSD: min eigenvalue {smallest:.3e}"
            )
    return rho


def density_to_bloch(rho) -> np.ndarray:
    """Coordinates t_i = Tr(rho lambda_i)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (3, 3):
        raise ValueError("state must be 3x3")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
        raise ValueError("state must be Hermitian")
    return np.array([float(np.trace(rho @ lam).real) for lam in GELL_MANN])


def push_forward(s: KrausSet, t) -> np.ndarray:
    """Final-state Bloch vector of the channel acting on the state t."""
    return density_to_bloch(apply(s, bloch_to_density(t, require_psd=False)))


# Membership of the canonical coefficients in the three diagonal weight
# sums: group g collects the coefficients that feed final population g.
_A_GROUPS = {1: (1, 2, 7, 8, 13), 2: (3, 4, 9, 10), 3: (5, 6, 11, 12)}
_B_GROUPS = {1: (3, 6, 9, 12), 2: (1, 5, 7, 11), 3: (2, 4, 8, 10)}
_C_GROUPS = {1: (4, 5), 2: (2, 6), 3: (1, 3)}


def sio_canonical_params(s: KrausSet) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Canonical coefficients (a, b, c) of a reduced 13-class SIO set.

    a[i] is the first-column coefficient of class i+1 (1 <= i+1 <= 13),
    b[j] the second-column coefficient of class j+1 (<= 12), c[k] the
    third-column coefficient of class k+1 (<= 6); absent classes
    contribute zeros. Each operator is first rotated by a global phase
    so its first-column coefficient is real nonnegative; the phase is
    unphysical and every coefficient-level m term pairs coefficients of
    the same operator, so the image is unchanged. Raises when an
    operator sits outside classes 1-13.
    """
    classes = classify(s, QUTRIT_SIO15)
    table = TABLES[QUTRIT_SIO15]
    a = np.zeros(13)
    b = np.zeros(12, dtype=complex)
    c = np.zeros(6, dtype=complex)
    for cls, op in zip(classes, s.ops):
        if cls is None or cls > 13:
            raise ValueError("operator outside the reduced 13-class layout")
        sig = table[cls]
        coeff = complex(op[sig[0] - 1, 0])
        phase = coeff / abs(coeff) if abs(coeff) > 0 else 1.0
        a[cls - 1] = abs(coeff)
        if sig[1] and cls <= 12:
            b[cls - 1] = complex(op[sig[1] - 1, 1]) / phase
        if sig[2] and cls <= 6:
            c[cls - 1] = complex(op[sig[2] - 1, 2]) / phase
    return a, b, c


def sio_image_closed_form(a, b, c, t) -> np.ndarray:
    """Coefficient-level final Bloch vector of a reduced 13-class SIO.

    The m3 component keeps the transcribed sign asymmetry of its source
    display (one cross term enters as -b2 conj(c2) + conj(b2) c2); the
    m7 component uses the population difference rho'_11 - rho'_22, which
    is the only reading consistent with the identity channel. Deviations
    from push_forward are expected for generic channels and are surfaced
    by ``closed_form_deviation``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=complex)
    c = np.asarray(c, dtype=complex)
    if a.shape != (13,) or b.shape != (12,) or c.shape != (6,):
        raise ValueError("expected 13 a, 12 b and 6 c coefficients")
    t = np.asarray(t, dtype=float)
    rho = bloch_to_density(t, require_psd=False)
    r11, r22, r33 = rho[0, 0].real, rho[1, 1].real, rho[2, 2].real

    def av(i):
        return a[i - 1]

    def bv(j):
        return b[j - 1]

    def cv(k):
        return c[k - 1]

    m = np.zeros(8)
    m[0] = t[0] * (
        av(1) * bv(1).real + av(3) * bv(3).real + av(7) * bv(7).real + av(9) * bv(9).real
    )
    m[1] = t[1] * (av(1) * cv(1).real + av(5) * cv(5).real)
    m[2] = t[2] * 0.5 * (
        bv(1) * np.conj(cv(1))
        + np.conj(bv(1)) * cv(1)
        + bv(2) * np.conj(cv(2))
        + np.conj(bv(2)) * cv(2)
    ).real
    m[3] = t[3] * (
        av(1) * bv(1).real - av(3) * bv(3).real + av(7) * bv(7).real - av(9) * bv(9).real
    )
    m[4] = t[4] * (av(1) * cv(1).real - av(5) * cv(5).real)
    m[5] = t[5] * 0.5 * (
        bv(1) * np.conj(cv(1))
        + np.conj(bv(1)) * cv(1)
        - bv(2) * np.conj(cv(2))
        + np.conj(bv(2)) * cv(2)
    ).real
    wa = {g: sum(av(i) ** 2 for i in _A_GROUPS[g]) for g in (1, 2, 3)}
    wb = {g: sum(abs(bv(j)) ** 2 for j in _B_GROUPS[g]) for g in (1, 2, 3)}
    wc = {g: sum(abs(cv(k)) ** 2 for k in _C_GROUPS[g]) for g in (1, 2, 3)}
    m[6] = (wa[1] - wa[2]) * r11 + (wb[1] - wb[2]) * r22 + (wc[1] - wc[2]) * r33
    m[7] = 1.0 / np.sqrt(3.0) - np.sqrt(3.0) * (wa[3] * r11 + wb[3] * r22 + wc[3] * r33)
    return m


def closed_form_deviation(s: KrausSet, t) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cross-check harness: (closed-form m, matrix-path m, |difference|)."""
    a, b, c = sio_canonical_params(s)
    m_closed = sio_image_closed_form(a, b, c, t)
    m_matrix = push_forward(s, t)
    return m_closed, m_matrix, np.abs(m_closed - m_matrix)


@dataclass(frozen=True)
class ConditionRecord:
    condition: int
    applicable: bool
    satisfied: bool
    margin: float | None


@dataclass(frozen=True)
class ConditionReport:
    records: tuple[ConditionRecord, ...]

    def __getitem__(self, condition: int) -> ConditionRecord:
        return self.records[condition - 1]

    @property
    def violations(self) -> int:
        return sum(1 for r in self.records if r.applicable and not r.satisfied)


# Off-diagonal index pairs sharing no plane with conditions 1-3.
_GENERIC_PAIRS = [
    (i, j) for i in range(6) for j in range(i + 1, 6) if (i, j) not in ((0, 3), (1, 4), (2, 5))
]


def check_conditions(t, m) -> ConditionReport:
    """Achievable-region checks on initial t and final m.

    Applicability follows the 2-D section containing t (exactly two
    nonzero coordinates): condition 1 for (off-diagonal, diagonal)
    sections, condition 2 (advisory equality, signed residual as margin)
    for the diagonal-diagonal section, condition 3 for conjugate
    off-diagonal pairs, condition 4 for the remaining off-diagonal
    pairs. Outside any section only condition 4 applies, as the minimum
    margin over all generic pairs.
    """
    t = np.asarray(t, dtype=float)
    m = np.asarray(m, dtype=float)
    nz = [i for i in range(8) if abs(t[i]) > _SECTION_TOL]
    section = tuple(nz) if len(nz) == 2 else None

    def inapplicable(cid):
        return ConditionRecord(cid, False, True, None)

    rec1, rec2, rec3, rec4 = (inapplicable(i) for i in (1, 2, 3, 4))
    if section and section[0] <= 5 and section[1] in (6, 7):
        i = section[0]
        margin = t[i] ** 2 - m[i] ** 2
        rec1 = ConditionRecord(1, True, margin >= -MARGIN_TOL, float(margin))
    if section == (6, 7):
        residual = -np.sqrt(3.0) * m[6] + m[7] - 2.0 * np.sqrt(3.0) / 3.0
        rec2 = ConditionRecord(2, True, abs(residual) <= MARGIN_TOL, float(residual))
    if section in ((0, 3), (1, 4), (2, 5)):
        i, j = section
        margin = (t[i] ** 2 + t[j] ** 2) - (m[i] ** 2 + m[j] ** 2)
        rec3 = ConditionRecord(3, True, margin >= -MARGIN_TOL, float(margin))
    if section in _GENERIC_PAIRS:
        i, j = section
        margin = (abs(t[i]) + abs(t[j])) ** 2 - (abs(m[i]) + abs(m[j])) ** 2
        rec4 = ConditionRecord(4, True, margin >= -MARGIN_TOL, float(margin))
    elif section is None:
        margin = min(
            (abs(t[i]) + abs(t[j])) ** 2 - (abs(m[i]) + abs(m[j])) ** 2
            for i, j in _GENERIC_PAIRS
        )
        rec4 = ConditionRecord(4, True, margin >= -MARGIN_TOL, float(margin))
    return ConditionReport((rec1, rec2, rec3, rec4))
