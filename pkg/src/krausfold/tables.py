"""Canonical sparsity-class tables for incoherent Kraus operators.

A signature is a tuple with one entry per column: the 1-based target row
of the column's single nonzero entry, or 0 for an all-zero column. The
class tables below are hand-transcribed; ``enumerate_io_signatures`` and
``enumerate_sio_signatures`` regenerate the same sets programmatically so
tests can cross-check the transcription entry by entry.
"""

from __future__ import annotations

from itertools import permutations, product

__all__ = [
    "QUBIT5",
    "QUBIT4",
    "QUTRIT_IO39",
    "QUTRIT_SIO15",
    "TABLES",
    "REGIME_DIMS",
    "SIG_TO_CLASS",
    "class_of_signature",
    "signature_family",
    "enumerate_io_signatures",
    "enumerate_sio_signatures",
]

QUBIT5 = "Qubit5"
QUBIT4 = "Qubit4"
QUTRIT_IO39 = "QutritIO39"
QUTRIT_SIO15 = "QutritSIO15"

# Five canonical qubit IO forms: two column-1 entries live on the row named
# first, column-2 entries on the row named second.
_QUBIT5 = {
    1: (1, 1),
    2: (2, 2),
    3: (1, 2),
    4: (2, 1),
    5: (1, 0),
}

# Reduced qubit family: the single-column class is absent.
_QUBIT4 = {k: _QUBIT5[k] for k in (1, 2, 3, 4)}

# 39 qutrit IO classes: 27 with all columns nonzero, 9 with columns 1-2
# nonzero, 3 with column 1 only.
_QUTRIT_IO39 = {
    1: (1, 1, 1),
    2: (1, 1, 2),
    3: (1, 1, 3),
    4: (1, 1, 0),
    5: (2, 2, 1),
    6: (2, 2, 2),
    7: (2, 2, 3),
    8: (2, 2, 0),
    9: (1, 2, 1),
    10: (1, 2, 2),
    11: (1, 2, 3),
    12: (1, 2, 0),
    13: (2, 1, 1),
    14: (2, 1, 2),
    15: (2, 1, 3),
    16: (2, 1, 0),
    17: (1, 3, 1),
    18: (1, 3, 2),
    19: (1, 3, 3),
    20: (1, 3, 0),
    21: (2, 3, 1),
    22: (2, 3, 2),
    23: (2, 3, 3),
    24: (2, 3, 0),
    25: (3, 2, 1),
    26: (3, 2, 2),
    27: (3, 2, 3),
    28: (3, 2, 0),
    29: (3, 3, 1),
    30: (3, 3, 2),
    31: (3, 3, 3),
    32: (3, 3, 0),
    33: (3, 1, 1),
    34: (3, 1, 2),
    35: (3, 1, 3),
    36: (3, 1, 0),
    37: (3, 0, 0),
    38: (1, 0, 0),
    39: (2, 0, 0),
}

# 15 qutrit SIO classes: the row-injective subset (6 permutations, 6
# two-column injections, 3 single-column forms).
_QUTRIT_SIO15 = {
    1: (1, 2, 3),
    2: (1, 3, 2),
    3: (2, 1, 3),
    4: (2, 3, 1),
    5: (3, 2, 1),
    6: (3, 1, 2),
    7: (1, 2, 0),
    8: (1, 3, 0),
    9: (2, 1, 0),
    10: (2, 3, 0),
    11: (3, 2, 0),
    12: (3, 1, 0),
    13: (1, 0, 0),
    14: (2, 0, 0),
    15: (3, 0, 0),
}

TABLES: dict[str, dict[int, tuple[int, ...]]] = {
    QUBIT5: _QUBIT5,
    QUBIT4: _QUBIT4,
    QUTRIT_IO39: _QUTRIT_IO39,
    QUTRIT_SIO15: _QUTRIT_SIO15,
}

REGIME_DIMS: dict[str, int] = {
    QUBIT5: 2,
    QUBIT4: 2,
    QUTRIT_IO39: 3,
    QUTRIT_SIO15: 3,
}

SIG_TO_CLASS: dict[str, dict[tuple[int, ...], int]] = {
    regime: {sig: idx for idx, sig in table.items()} for regime, table in TABLES.items()
}


def class_of_signature(regime: str, sig: tuple[int, ...]) -> int | None:
    """Class index of a signature within a regime table, or None."""
    return SIG_TO_CLASS[regime].get(tuple(sig))


def signature_family(sig: tuple[int, ...]) -> int:
    """Number of nonzero columns."""
    return sum(1 for s in sig if s != 0)


def enumerate_io_signatures(dim: int = 3) -> list[tuple[int, ...]]:
    """All IO signatures whose nonzero columns form a leading prefix.

    For dim=3 this yields 3^3 + 3^2 + 3 = 39 signatures, widest support
    first, each block in lexicographic order.
    """
    sigs: list[tuple[int, ...]] = []
    for ncols in range(dim, 0, -1):
        for rows in product(range(1, dim + 1), repeat=ncols):
            sigs.append(rows + (0,) * (dim - ncols))
    return sigs


def enumerate_sio_signatures(dim: int = 3) -> list[tuple[int, ...]]:
    """The row-injective subset of the IO enumeration.

    For dim=3 this yields 6 + 6 + 3 = 15 signatures.
    """
    sigs: list[tuple[int, ...]] = []
    for ncols in range(dim, 0, -1):
        for rows in permutations(range(1, dim + 1), ncols):
            sigs.append(rows + (0,) * (dim - ncols))
    return sigs
