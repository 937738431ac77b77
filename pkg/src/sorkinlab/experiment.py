"""Seeded Monte Carlo simulation of the seven-setting three-slit experiment
and statistical estimation of the third-order interference from counts.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .gpt import (
    EPS_TOL,
    Measurement,
    ModelSpace,
    State,
    probability,
    apply,
)
from .interference import (
    PAIRS,
    SINGLES,
    TRIPLE,
    ProbabilityTable,
    SlitSystem,
    all_subsets,
    subset_key,
)

# Fixed setting order so seed substreams are stable across runs.
SETTING_ORDER = SINGLES + PAIRS + (TRIPLE,)

BLOCKED = "blocked"


@dataclass(eq=False)
class ExperimentPlan:
    model: ModelSpace
    slits: SlitSystem
    detector_measurement: Measurement
    source_state: State
    shots_per_setting: int
    seed: int

    def setting_probabilities(self, J: frozenset) -> np.ndarray:
        """Joint outcome probabilities for one setting, blocked event last."""
        filt = self.slits.derived[J]
        s_f = apply(filt.projection, self.source_state)
        probs = np.array(
            [probability(e, s_f) for e in self.detector_measurement.effects]
        )
        if probs.min() < -EPS_TOL or probs.max() > 1.0 + EPS_TOL:
            raise ValueError(
                f"setting {subset_key(J)} produced probabilities outside [0, 1]; "
                "model and plan are inconsistent"
            )
        probs = np.clip(probs, 0.0, None)
        blocked = max(0.0, 1.0 - probs.sum())
        full = np.append(probs, blocked)
        return full / full.sum()


@dataclass(eq=False)
class ExperimentRecord:
    """Per-setting detector counts; last outcome index is the blocked event."""

    counts: dict  # frozenset -> np.ndarray of ints, length n_outcomes + 1
    shots_per_setting: int
    seed: int
    plan_hash: str

    @property
    def n_outcomes(self) -> int:
        return len(next(iter(self.counts.values()))) - 1

    def frequencies(self, J) -> np.ndarray:
        if self.shots_per_setting == 0:
            return np.zeros_like(self.counts[frozenset(J)], dtype=float)
        return self.counts[frozenset(J)] / self.shots_per_setting


def plan_hash(plan: ExperimentPlan) -> str:
    h = hashlib.sha256()
    h.update(plan.model.label.encode())
    h.update(np.ascontiguousarray(plan.source_state.coords).tobytes())
    for e in plan.detector_measurement.effects:
        h.update(np.ascontiguousarray(e.coords).tobytes())
    for J in SETTING_ORDER:
        h.update(np.ascontiguousarray(plan.slits.derived[J].projection.matrix).tobytes())
    h.update(str((plan.shots_per_setting, plan.seed)).encode())
    return h.hexdigest()[:16]


def simulate_setting(plan: ExperimentPlan, J) -> np.ndarray:
    """Multinomial draw of all shots for one setting; deterministic in
    (seed, setting)."""
    J = frozenset(J)
    full = plan.setting_probabilities(J)
    idx = SETTING_ORDER.index(J)
    rng = np.random.default_rng([plan.seed, idx])
    if plan.shots_per_setting == 0:
        return np.zeros(len(full), dtype=np.int64)
    return rng.multinomial(plan.shots_per_setting, full)


def run_experiment(plan: ExperimentPlan) -> ExperimentRecord:
    counts = {J: simulate_setting(plan, J) for J in SETTING_ORDER}
    return ExperimentRecord(
        counts=counts,
        shots_per_setting=plan.shots_per_setting,
        seed=plan.seed,
        plan_hash=plan_hash(plan),
    )


def record_from_table(
    table: ProbabilityTable, shots: int, seed: int, n_outcomes: int = 1
) -> ExperimentRecord:
    """Synthetic record from a raw probability table: outcome 0 fires with the
    tabulated probability, everything else is blocked."""
    table.require_complete()
    if table.k != 3:
        raise ValueError("synthetic records support k = 3 tables")
    counts = {}
    for idx, J in enumerate(SETTING_ORDER):
        p = min(max(table.entries[J], 0.0), 1.0)
        rng = np.random.default_rng([seed, idx])
        hit = rng.binomial(shots, p) if shots > 0 else 0
        row = np.zeros(n_outcomes + 1, dtype=np.int64)
        row[0] = hit
        row[-1] = shots - hit
        counts[J] = row
    h = hashlib.sha256(str((sorted(map(subset_key, table.entries)), shots, seed)).encode())
    return ExperimentRecord(counts, shots, seed, h.hexdigest()[:16])


@dataclass(eq=False)
class I3Estimate:
    """Per-detector-outcome point estimates of I3 with standard errors."""

    estimates: np.ndarray
    standard_errors: np.ndarray
    z_scores: np.ndarray
    chi_square: float
    degenerate: bool
    frequency_tables: dict = field(default_factory=dict)  # str key -> list

    def to_dict(self) -> dict:
        return {
            "per_outcome": [
                {"estimate": float(e), "standard_error": float(se), "z": float(z)}
                for e, se, z in zip(self.estimates, self.standard_errors, self.z_scores)
            ],
            "chi_square": self.chi_square,
            "degenerate": self.degenerate,
            "frequency_tables": self.frequency_tables,
        }


def estimate_i3(record: ExperimentRecord) -> I3Estimate:
    """Empirical third-order interference per detector outcome.

    Each setting uses an independent sub-ensemble, so the variance is the
    sum of the per-setting binomial variances.
    """
    for J in all_subsets(3):
        if frozenset(J) not in record.counts:
            raise KeyError(f"record is missing setting {subset_key(J)}")
    n_out = record.n_outcomes
    shots = record.shots_per_setting
    freqs = {J: record.frequencies(J)[:n_out] for J in SETTING_ORDER}
    est = (
        freqs[TRIPLE]
        - sum(freqs[J] for J in PAIRS)
        + sum(freqs[J] for J in SINGLES)
    )
    if shots > 0:
        var = sum(f * (1.0 - f) / shots for f in freqs.values())
        se = np.sqrt(var)
    else:
        se = np.zeros(n_out)
    degenerate = bool(np.any(se == 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0.0, est / se, 0.0)
    return I3Estimate(
        estimates=est,
        standard_errors=se,
        z_scores=z,
        chi_square=float(np.sum(z**2)),
        degenerate=degenerate,
        frequency_tables={
            subset_key(J): record.frequencies(J).tolist() for J in SETTING_ORDER
        },
    )
