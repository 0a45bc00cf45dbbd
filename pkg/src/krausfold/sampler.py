"""Random canonical channel sampling and achievable-region batch runs.

Channels are drawn column by column: each input column carries one
coefficient per class whose signature touches that column, unit norm,
and masked orthogonality against earlier columns (two classes couple
columns j' < j only when they send both columns to the same row).
Draws that project to near-zero are rejected and retried.

Region runs are deterministic for a fixed seed independent of worker
count: the index space is split into fixed-size chunks and each chunk
gets its own generator seeded from (seed, chunk_id).
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bloch import ConditionReport, check_conditions, push_forward
from .channel import KrausSet
from .tables import QUTRIT_IO39, QUTRIT_SIO15, REGIME_DIMS, TABLES

__all__ = [
    "RetriesExhausted",
    "SamplerConfig",
    "sample_channel",
    "RegionRequest",
    "RegionPoint",
    "RegionSummary",
    "identity_channel",
    "dephasing_channel",
    "sample_region",
]

logger = logging.getLogger(__name__)

# Chunk width for region parallelism; fixed so results do not depend on
# the worker count.
_CHUNK = 64


class RetriesExhausted(RuntimeError):
    """All rejection-sampling attempts for one column failed."""


@dataclass(frozen=True)
class SamplerConfig:
    """Draw configuration.

    With ``active_classes`` set, only those classes are drawn, with free
    normalized column coefficients and no cross-column completeness;
    that is the hook for exercising one merge group at a time, where
    certification is Choi equality rather than the CPTP condition (in a
    small class family the completeness constraints would force the
    couplings the group acts on to zero).
    """

    regime: str
    seed: int = 0
    max_retries: int = 50
    active_classes: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.regime not in TABLES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.active_classes is not None:
            bad = [c for c in self.active_classes if c not in TABLES[self.regime]]
            if bad:
                raise ValueError(f"classes {bad} not in regime {self.regime}")


def _sample_columns(cfg: SamplerConfig, rng: np.random.Generator):
    """Column coefficient vectors plus the number of rejected draws."""
    table = TABLES[cfg.regime]
    dim = REGIME_DIMS[cfg.regime]
    classes = sorted(cfg.active_classes) if cfg.active_classes else sorted(table)
    supports = [[idx for idx in classes if table[idx][j] != 0] for j in range(dim)]
    constrained = cfg.active_classes is None
    vs: list[np.ndarray] = []
    rejected = 0
    for j in range(dim):
        n = len(supports[j])
        if n == 0:
            vs.append(np.zeros(0, dtype=complex))
            continue
        for _ in range(cfg.max_retries):
            v = rng.normal(size=n) + 1j * rng.normal(size=n)
            prev = []
            for jp in range(j if constrained else 0):
                w = np.zeros(n, dtype=complex)
                hit = False
                for k, idx in enumerate(supports[j]):
                    if idx in supports[jp] and table[idx][jp] == table[idx][j]:
                        w[k] = vs[jp][supports[jp].index(idx)]
                        hit = True
                if hit:
                    prev.append(w)
            if prev:
                # The masked constraint vectors need not be mutually
                # orthogonal; project via the small Gram system.
                w_rows = np.array(prev)
                gram = w_rows.conj() @ w_rows.T
                rhs = w_rows.conj() @ v
                try:
                    coef = np.linalg.solve(gram, rhs)
                except np.linalg.LinAlgError:
                    rejected += 1
                    continue
                v = v - w_rows.T @ coef
            norm = np.linalg.norm(v)
            if norm > 1e-6:
                vs.append(v / norm)
                break
            rejected += 1
        else:
            raise RetriesExhausted(
                f"column {j + 1} rejected {cfg.max_retries} consecutive draws"
            )
    # Gauge fix: rotate each operator so its first-column coefficient is
    # real and nonnegative (every class populates column 1).
    phases = {}
    for k, idx in enumerate(supports[0]):
        a = vs[0][k]
        phases[idx] = a / abs(a) if abs(a) > 0 else 1.0
    for j in range(dim):
        for k, idx in enumerate(supports[j]):
            vs[j][k] = vs[j][k] / phases.get(idx, 1.0)
    cols = [
        {idx: vs[j][k] for k, idx in enumerate(supports[j])} for j in range(dim)
    ]
    return cols, rejected


def _build_ops(cfg: SamplerConfig, cols) -> KrausSet:
    table = TABLES[cfg.regime]
    dim = REGIME_DIMS[cfg.regime]
    classes = sorted(cfg.active_classes) if cfg.active_classes else sorted(table)
    ops = []
    for idx in classes:
        op = np.zeros((dim, dim), dtype=complex)
        for j, row in enumerate(table[idx]):
            if row and idx in cols[j]:
                op[row - 1, j] = cols[j][idx]
        ops.append(op)
    return KrausSet.from_ops(ops, dim=dim)


def sample_channel(cfg: SamplerConfig, rng: np.random.Generator | None = None) -> KrausSet:
    """One random canonical channel; bit-identical for equal rng state."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    cols, _ = _sample_columns(cfg, rng)
    return _build_ops(cfg, cols)


def identity_channel(dim: int = 3) -> KrausSet:
    return KrausSet.from_ops([np.eye(dim, dtype=complex)], dim=dim)


def dephasing_channel(dim: int = 3) -> KrausSet:
    ops = []
    for j in range(dim):
        op = np.zeros((dim, dim), dtype=complex)
        op[j, j] = 1.0
        ops.append(op)
    return KrausSet.from_ops(ops, dim=dim)


@dataclass(frozen=True)
class RegionRequest:
    t: tuple[float, ...]
    kind: str = "sio"
    n_samples: int = 0
    seed: int = 0

    def __post_init__(self):
        if len(self.t) != 8:
            raise ValueError("initial Bloch vector must have 8 components")
        norm = float(np.linalg.norm(self.t))
        if norm > 2.0 / np.sqrt(3.0) + 1e-12:
            raise ValueError(f"Bloch vector too long: |t| = {norm:.6f} > 2/sqrt(3)")
        if self.kind.lower() not in ("sio", "io"):
            raise ValueError("kind must be 'sio' or 'io'")
        if self.n_samples < 0:
            raise ValueError("n_samples must be nonnegative")

    @property
    def regime(self) -> str:
        return QUTRIT_SIO15 if self.kind.lower() == "sio" else QUTRIT_IO39


@dataclass(frozen=True)
class RegionPoint:
    index: int
    m: np.ndarray
    report: ConditionReport


@dataclass(frozen=True)
class RegionSummary:
    n: int
    rejected_draws: int
    m_min: tuple[float, ...] | None = None
    m_max: tuple[float, ...] | None = None
    violations: dict[int, int] = field(default_factory=dict)
    min_margin: dict[int, float] = field(default_factory=dict)


def _region_chunk(req: RegionRequest, start: int, stop: int):
    rng = np.random.default_rng(abs(hash((req.seed, start // _CHUNK))))
    cfg = SamplerConfig(regime=req.regime, seed=req.seed)
    t = np.asarray(req.t, dtype=float)
    points = []
    rejected = 0
    for i in range(start, stop):
        # Anchor samples: the identity and the full dephasing channel.
        if i == 0:
            s = identity_channel()
        elif i == 1:
            s = dephasing_channel()
        else:
            cols, rej = _sample_columns(cfg, rng)
            rejected += rej
            s = _build_ops(cfg, cols)
        m = push_forward(s, t)
        points.append(RegionPoint(i, m, check_conditions(t, m)))
    return points, rejected


def _worker_count() -> int:
    env = os.environ.get("KF_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def sample_region(req: RegionRequest) -> tuple[list[RegionPoint], RegionSummary]:
    """Batch of final-state points with condition reports and summary.

    Sample 0 is the identity channel and sample 1 the full dephasing
    channel whenever n_samples admits them; the rest are random draws.
    Output order and values do not depend on the worker count.
    """
    n = req.n_samples
    if n == 0:
        return [], RegionSummary(n=0, rejected_draws=0)
    bounds = [(lo, min(lo + _CHUNK, n)) for lo in range(0, n, _CHUNK)]
    workers = min(_worker_count(), len(bounds))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda b: _region_chunk(req, *b), bounds))
    else:
        results = [_region_chunk(req, *b) for b in bounds]
    points: list[RegionPoint] = []
    rejected = 0
    for chunk_points, chunk_rejected in results:
        points.extend(chunk_points)
        rejected += chunk_rejected
    ms = np.array([p.m for p in points])
    violations = {}
    min_margin = {}
    for cid in (1, 2, 3, 4):
        recs = [p.report[cid] for p in points if p.report[cid].applicable]
        violations[cid] = sum(1 for r in recs if not r.satisfied)
        margins = [r.margin for r in recs if r.margin is not None]
        if margins:
            min_margin[cid] = float(min(margins))
    rate = rejected / max(1, n)
    logger.info("region run: %d samples, %d rejected draws (rate %.4f)", n, rejected, rate)
    return points, RegionSummary(
        n=n,
        rejected_draws=rejected,
        m_min=tuple(float(x) for x in ms.min(axis=0)),
        m_max=tuple(float(x) for x in ms.max(axis=0)),
        violations=violations,
        min_margin=min_margin,
    )
