"""Builders for concrete model spaces and the spin-1 filter/detector geometry.

Quantum models embed Hermitian matrices in an orthonormal basis (identity
over sqrt(d) plus normalized generalized Gell-Mann matrices), so coordinate
dot products reproduce trace inner products exactly.  Real-quantum models do
the same over the symmetric matrices; classical models are the nonnegative
orthant with the all-ones order unit.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .gpt import (
    ConeDescriptor,
    DimensionMismatch,
    Effect,
    Filter,
    Measurement,
    ModelSpace,
    NotAProjection,
    State,
    Transformation,
    probability,
    apply,
)

_ORTHO_TOL = 1e-10
_EIG_GAP_TOL = 1e-8


def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal Hermitian basis of C^{d x d}, identity component first.

    Order: I/sqrt(d), symmetric off-diagonal pairs, antisymmetric pairs,
    diagonal (traceless) elements.  Tr(B_j B_k) = delta_jk.
    """
    basis = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1.0 / np.sqrt(2.0)
            basis.append(m)
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = -1.0j / np.sqrt(2.0)
            m[k, j] = 1.0j / np.sqrt(2.0)
            basis.append(m)
    for l in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        m[np.arange(l), np.arange(l)] = 1.0
        m[l, l] = -float(l)
        basis.append(m / np.sqrt(l * (l + 1)))
    return np.stack(basis)


def symmetric_basis(d: int) -> np.ndarray:
    """Orthonormal basis of real symmetric d x d matrices, identity first."""
    basis = [np.eye(d) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d))
            m[j, k] = m[k, j] = 1.0 / np.sqrt(2.0)
            basis.append(m)
    for l in range(1, d):
        m = np.zeros((d, d))
        m[np.arange(l), np.arange(l)] = 1.0
        m[l, l] = -float(l)
        basis.append(m / np.sqrt(l * (l + 1)))
    return np.stack(basis)


def build_quantum_model(d: int) -> ModelSpace:
    """Hermitian d x d model; m = d^2."""
    if d < 2:
        raise ValueError("quantum model needs d >= 2")
    basis = hermitian_basis(d)
    model = ModelSpace(
        label=f"quantum:{d}",
        dimension=d * d,
        order_unit=np.zeros(d * d),
        cone=ConeDescriptor("quantum", d=d),
        basis=basis,
    )
    model.order_unit = model.embed(np.eye(d))
    return model


def build_real_quantum_model(d: int) -> ModelSpace:
    """Real symmetric d x d model; m = d(d+1)/2."""
    if d < 2:
        raise ValueError("real quantum model needs d >= 2")
    basis = symmetric_basis(d)
    m = d * (d + 1) // 2
    model = ModelSpace(
        label=f"real_quantum:{d}",
        dimension=m,
        order_unit=np.zeros(m),
        cone=ConeDescriptor("real_quantum", d=d),
        basis=basis,
    )
    model.order_unit = model.embed(np.eye(d))
    return model


def build_classical_model(n: int) -> ModelSpace:
    """Probability simplex on n outcomes; order unit = all ones."""
    if n < 2:
        raise ValueError("classical model needs n >= 2")
    return ModelSpace(
        label=f"classical:{n}",
        dimension=n,
        order_unit=np.ones(n),
        cone=ConeDescriptor("classical", n=n),
    )


def conjugation_superoperator(pi: np.ndarray, model: ModelSpace) -> Transformation:
    """The real matrix of rho -> Pi rho Pi in embedded coordinates."""
    pi = np.asarray(pi)
    if np.linalg.norm(pi @ pi - pi, "fro") > _ORTHO_TOL * max(
        1.0, np.linalg.norm(pi, "fro")
    ) or np.linalg.norm(pi - pi.conj().T, "fro") > _ORTHO_TOL:
        raise NotAProjection("matrix is not an orthogonal projector")
    basis = model.basis
    conjugated = np.einsum("ab,kbc,cd->kad", pi, basis, pi)
    mat = np.real(np.einsum("jdc,kcd->jk", basis, conjugated))
    return Transformation(mat)


def lueders_filter(pi: np.ndarray, model: ModelSpace) -> Filter:
    """Filter pair (conjugation by Pi, conjugation by I - Pi)."""
    d = pi.shape[0]
    return Filter(
        projection=conjugation_superoperator(pi, model),
        complement=conjugation_superoperator(np.eye(d) - pi, model),
    )


def classical_filter(mask: np.ndarray, model: ModelSpace) -> Filter:
    """Coordinate-mask filter on a classical model."""
    mask = np.asarray(mask, dtype=float)
    return Filter(
        projection=Transformation(np.diag(mask)),
        complement=Transformation(np.diag(1.0 - mask)),
    )


def subset_filters(pis, model: ModelSpace) -> dict[frozenset, Filter]:
    """All 2^k - 1 join filters generated by k pairwise-orthogonal projectors.

    Raises when the supplied projectors are not pairwise orthogonal.
    """
    k = len(pis)
    for i in range(k):
        for j in range(i + 1, k):
            if np.linalg.norm(pis[i] @ pis[j], "fro") > _ORTHO_TOL:
                raise ValueError("slits not pairwise orthogonal")
    out: dict[frozenset, Filter] = {}
    for r in range(1, k + 1):
        for J in combinations(range(1, k + 1), r):
            pi = np.sum([pis[i - 1] for i in J], axis=0)
            out[frozenset(J)] = lueders_filter(pi, model)
    return out


def classical_subset_filters(blocks, model: ModelSpace) -> dict[frozenset, Filter]:
    """Join filters for a classical model from disjoint coordinate blocks."""
    k = len(blocks)
    seen: set[int] = set()
    for b in blocks:
        if seen & set(b):
            raise ValueError("slits not pairwise orthogonal")
        seen |= set(b)
    out: dict[frozenset, Filter] = {}
    for r in range(1, k + 1):
        for J in combinations(range(1, k + 1), r):
            mask = np.zeros(model.dimension)
            for i in J:
                mask[list(blocks[i - 1])] = 1.0
            out[frozenset(J)] = classical_filter(mask, model)
    return out


# --- spin-1 Stern-Gerlach geometry ------------------------------------------

_SQ2 = 1.0 / np.sqrt(2.0)
SPIN1_X = _SQ2 * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
SPIN1_Y = _SQ2 * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex)
SPIN1_Z = np.diag([1.0, 0.0, -1.0]).astype(complex)


def spin1_operator(axis) -> np.ndarray:
    """Spin-1 component along a unit axis; eigenvalues {+1, 0, -1}."""
    axis = np.asarray(axis, dtype=float)
    if abs(np.linalg.norm(axis) - 1.0) > _ORTHO_TOL:
        raise ValueError("axis must be a unit vector")
    return axis[0] * SPIN1_X + axis[1] * SPIN1_Y + axis[2] * SPIN1_Z


def _eigenprojectors_desc(op: np.ndarray) -> list[np.ndarray]:
    """Rank-1 eigenprojectors of a Hermitian matrix, descending eigenvalue."""
    w, v = np.linalg.eigh(op)
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    if np.min(np.abs(np.diff(w))) < _EIG_GAP_TOL:
        raise ValueError("degenerate eigendecomposition; projectors ambiguous")
    return [np.outer(v[:, i], v[:, i].conj()) for i in range(v.shape[1])]


@dataclass(frozen=True, eq=False)
class Spin1Setup:
    """Filter and detector axes plus their spectral projectors."""

    filter_axis: np.ndarray
    detector_axis: np.ndarray
    slit_projectors: tuple[np.ndarray, ...]
    detector_effects: tuple[np.ndarray, ...]


def spin1_feynman_setup(b, d) -> Spin1Setup:
    """Three slit projectors along b and three detector effects along d,
    both ordered by descending spin eigenvalue."""
    b = np.asarray(b, dtype=float)
    d = np.asarray(d, dtype=float)
    slits = _eigenprojectors_desc(spin1_operator(b))
    dets = _eigenprojectors_desc(spin1_operator(d))
    total = np.sum(slits, axis=0)
    if np.linalg.norm(total - np.eye(3)) > 1e-12:
        raise ValueError("slit projectors do not resolve the identity")
    return Spin1Setup(b, d, tuple(slits), tuple(dets))


def effect_from_matrix(mat: np.ndarray, model: ModelSpace) -> Effect:
    return Effect(model, model.embed(mat))


def state_from_matrix(mat: np.ndarray, model: ModelSpace) -> State:
    return State(model, model.embed(mat))


def measurement_from_matrices(mats, model: ModelSpace) -> Measurement:
    return Measurement(model, tuple(effect_from_matrix(m, model) for m in mats))


def joint_probability(detector: Effect, filt: Filter, s: State) -> float:
    """Probability that the system passes the filter and the detector fires."""
    if filt.projection.matrix.shape[1] != s.coords.shape[0]:
        raise DimensionMismatch("filter and state dimensions differ")
    return probability(detector, apply(filt.projection, s))
