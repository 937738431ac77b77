"""Two-slit-filtering tomography: informationally complete measurements on
the pair faces, least-squares estimation of filtered states, and the signed
reconstruction s = s12 + s13 + s23 - s1 - s2 - s3.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

from .gpt import (
    EPS_RANK_REL,
    Effect,
    Face,
    Filter,
    Measurement,
    ModelSpace,
    State,
    face_of,
    probability,
    apply,
)
from .interference import PAIRS, TRIPLE, SlitSystem


def _flat_seed(seed) -> list[int]:
    if isinstance(seed, (list, tuple)):
        out: list[int] = []
        for part in seed:
            out.extend(_flat_seed(part))
        return out
    return [int(seed)]


@dataclass(eq=False)
class FaceMeasurementPlan:
    """Measurements that are informationally complete on one face."""

    model: ModelSpace
    face: Face
    settings: tuple[Measurement, ...]
    design_matrix: np.ndarray  # (n_effects_total, face.rank)

    @property
    def effects(self) -> list[Effect]:
        return [e for ms in self.settings for e in ms.effects]


def _supporting_projector(face: Face, model: ModelSpace) -> np.ndarray:
    """Hilbert-space projector whose conjugation map generated the face."""
    return model.unembed(face.projection_matrix @ model.embed(np.eye(model.cone.d)))


def _subspace_vectors(pi: np.ndarray) -> list[np.ndarray]:
    w, v = np.linalg.eigh(pi)
    return [v[:, i] for i in range(len(w)) if w[i] > 0.5]


def build_face_measurement(face: Face, model: ModelSpace) -> FaceMeasurementPlan:
    """Tomographic measurement family for the states fixed on a face.

    Matrix models use basis projectors of the supporting subspace plus, for
    each basis pair, superposition bases (and for complex models the
    phase-shifted ones); every family is completed to a measurement with the
    effect u - sum.  Classical faces need only their indicator measurement.
    """
    kind = model.cone.kind
    settings: list[Measurement] = []
    if kind in ("quantum", "real_quantum"):
        pi = _supporting_projector(face, model)
        vecs = _subspace_vectors(pi)
        families: list[list[np.ndarray]] = []
        families.append([np.outer(v, v.conj()) for v in vecs])
        for a, b in combinations(range(len(vecs)), 2):
            plus = (vecs[a] + vecs[b]) / np.sqrt(2.0)
            minus = (vecs[a] - vecs[b]) / np.sqrt(2.0)
            families.append([np.outer(plus, plus.conj()), np.outer(minus, minus.conj())])
            if kind == "quantum":
                ip = (vecs[a] + 1j * vecs[b]) / np.sqrt(2.0)
                im = (vecs[a] - 1j * vecs[b]) / np.sqrt(2.0)
                families.append([np.outer(ip, ip.conj()), np.outer(im, im.conj())])
        u = model.order_unit
        for fam in families:
            coords = [model.embed(m) for m in fam]
            rest = u - np.sum(coords, axis=0)
            effects = tuple(Effect(model, c) for c in coords) + (Effect(model, rest),)
            settings.append(Measurement(model, effects))
    elif kind == "classical":
        mask = np.round(np.diagonal(face.projection_matrix))
        effects = tuple(
            Effect(model, np.eye(model.dimension)[i])
            for i in np.flatnonzero(mask)
        ) + (Effect(model, 1.0 - mask),)
        settings.append(Measurement(model, effects))
    else:
        raise ValueError("no tomographic family available for custom cones")

    rows = np.array(
        [e.coords @ face.image_basis for ms in settings for e in ms.effects]
    )
    rank = np.linalg.matrix_rank(rows, tol=EPS_RANK_REL * max(1.0, np.abs(rows).max()))
    if rank < face.rank:
        raise ValueError(
            f"measurement family is not informationally complete on the face "
            f"(design rank {rank} < face rank {face.rank})"
        )
    return FaceMeasurementPlan(model, face, tuple(settings), rows)


def exact_frequencies(plan: FaceMeasurementPlan, s_filtered: State) -> list[np.ndarray]:
    """Per-setting joint outcome probabilities for an already-filtered state."""
    return [
        np.array([probability(e, s_filtered) for e in ms.effects])
        for ms in plan.settings
    ]


def sample_frequencies(
    plan: FaceMeasurementPlan, s_filtered: State, shots: int, seed
) -> list[np.ndarray]:
    """Finite-shot frequencies; the blocked (not passed) event absorbs the
    missing normalization so joint frequencies stay estimable."""
    out = []
    for idx, ms in enumerate(plan.settings):
        probs = np.array([probability(e, s_filtered) for e in ms.effects])
        probs = np.clip(probs, 0.0, None)
        blocked = max(0.0, 1.0 - probs.sum())
        full = np.append(probs, blocked)
        full /= full.sum()
        rng = np.random.default_rng(_flat_seed(seed) + [idx])
        counts = rng.multinomial(shots, full)
        freq = counts[:-1] / shots if shots > 0 else np.zeros(len(probs))
        out.append(freq)
    return out


def estimate_filtered_state(
    plan: FaceMeasurementPlan, freqs: list[np.ndarray], filt: Filter
) -> State:
    """Least-squares fit of face coordinates to observed joint frequencies."""
    b = np.concatenate(freqs)
    if b.shape[0] != plan.design_matrix.shape[0]:
        raise ValueError("frequency vector does not match the plan's settings")
    x, *_ = np.linalg.lstsq(plan.design_matrix, b, rcond=None)
    coords = plan.face.image_basis @ x
    return State(plan.model, coords)


def extract_single_slit_components(
    s_ij: State, ss: SlitSystem, i: int, j: int
) -> tuple[State, State]:
    """Single-slit parts P_i(s_ij) and P_j(s_ij) of a pair-filtered state."""
    return (
        apply(ss.filter_for({i}).projection, s_ij),
        apply(ss.filter_for({j}).projection, s_ij),
    )


def reconstruct(estimates: dict, ss: SlitSystem) -> State:
    """Signed sum of pair states minus single-slit states.

    Each slit appears in two pair faces; its single-slit component is
    averaged over both (identical in exact mode, variance-reducing with
    sampled estimates).
    """
    estimates = {frozenset(J): v for J, v in estimates.items()}
    for J in PAIRS:
        if J not in estimates:
            raise KeyError(f"missing pair estimate for slits {sorted(J)}")
    total = np.sum([estimates[J].coords for J in PAIRS], axis=0)
    for i in (1, 2, 3):
        parts = [
            apply(ss.filter_for({i}).projection, estimates[J]).coords
            for J in PAIRS
            if i in J
        ]
        total = total - np.mean(parts, axis=0)
    return State(ss.model, total)


@dataclass(eq=False)
class TomographyResult:
    reconstructed: State
    per_face: dict  # frozenset -> State
    mode: str  # "exact" | "sampled"
    shots: Optional[int]
    seed: Optional[int]
    reconstruction_error: Optional[float]
    cone_distance: float
    truth: Optional[State] = None

    def to_dict(self) -> dict:
        from .interference import subset_key

        return {
            "mode": self.mode,
            "shots": self.shots,
            "seed": self.seed,
            "reconstruction": self.reconstructed.coords.tolist(),
            "per_face": {
                subset_key(J): s.coords.tolist() for J, s in self.per_face.items()
            },
            "reconstruction_error": self.reconstruction_error,
            "cone_distance": self.cone_distance,
        }


def tomography_roundtrip(
    model: ModelSpace,
    ss: SlitSystem,
    s: State,
    mode: str = "exact",
    shots: int = 100000,
    seed: int = 0,
) -> TomographyResult:
    """Full filter-measure-estimate-reconstruct cycle for one source state.

    Errors are reported against P123(s): systems blocked by the triple
    filter never reach a measurement, so that is the recoverable truth.
    """
    if mode not in ("exact", "sampled"):
        raise ValueError("mode must be 'exact' or 'sampled'")
    truth = apply(ss.derived[TRIPLE].projection, s)
    estimates: dict = {}
    for pair_idx, J in enumerate(PAIRS):
        filt = ss.derived[J]
        plan = build_face_measurement(face_of(filt), model)
        s_filtered = apply(filt.projection, s)
        if mode == "exact":
            freqs = exact_frequencies(plan, s_filtered)
        else:
            freqs = sample_frequencies(plan, s_filtered, shots, [seed, pair_idx])
        estimates[J] = estimate_filtered_state(plan, freqs, filt)
    recon = reconstruct(estimates, ss)
    err = float(np.linalg.norm(recon.coords - truth.coords))
    return TomographyResult(
        reconstructed=recon,
        per_face=estimates,
        mode=mode,
        shots=shots if mode == "sampled" else None,
        seed=seed if mode == "sampled" else None,
        reconstruction_error=err,
        cone_distance=model.cone_residual(recon.coords),
        truth=truth,
    )
