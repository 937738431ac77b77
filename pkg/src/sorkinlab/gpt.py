"""Core operational-probabilistic model objects: states, effects, transformations,
filters, measurements, and faces on a finite-dimensional ordered vector space.

Everything lives in real coordinates.  Probabilities are plain dot products
between effect and state vectors; for the matrix-algebra models the embedding
basis is orthonormal under the trace inner product, so the dot product equals
the trace pairing exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import nnls

# Numerical tolerances used across the library.
EPS_PROJ = 1e-9    # projector identities, Frobenius, relative to matrix norm
EPS_TOL = 1e-9     # scalar comparisons
EPS_CONE = 1e-10   # eigenvalue / coordinate floor for cone membership
EPS_RANK_REL = 1e-8  # singular-value cutoff, relative to the largest
EPS_PROP = 1e-8    # verdict tolerance for the three-way equivalence check


class DimensionMismatch(ValueError):
    """Operands belong to spaces of different dimension."""


class ZeroProbabilityOutcome(ValueError):
    """Conditioning on an outcome whose probability is (numerically) zero."""


class NotAProjection(ValueError):
    """A map required to be idempotent is not."""


@dataclass(eq=False)
class ConeDescriptor:
    """Which positive cone the model uses.

    kind is one of "quantum", "real_quantum", "classical", "custom".
    quantum(d) embeds Hermitian d x d matrices (m = d^2), real_quantum(d)
    real symmetric ones (m = d(d+1)/2), classical(n) is the nonnegative
    orthant (m = n).  Custom cones are given by a generator list; membership
    is decided by a nonnegative-least-squares residual.
    """

    kind: str
    d: Optional[int] = None
    n: Optional[int] = None
    generators: Optional[np.ndarray] = None  # (n_gen, m)
    tol: float = EPS_CONE


@dataclass(eq=False)
class ModelSpace:
    """A finite-dimensional model: coordinate space, order unit, cone.

    For quantum / real_quantum models ``basis`` holds the orthonormal
    Hermitian (resp. symmetric) embedding basis with shape (m, d, d), so
    embed/unembed round-trip exactly.
    """

    label: str
    dimension: int
    order_unit: np.ndarray
    cone: ConeDescriptor
    basis: Optional[np.ndarray] = None

    def embed(self, mat: np.ndarray) -> np.ndarray:
        """Coordinates of a Hermitian/symmetric matrix in the embedding basis."""
        if self.basis is None:
            raise ValueError(f"model {self.label!r} has no matrix embedding")
        return np.real(np.einsum("kij,ji->k", self.basis, np.asarray(mat)))

    def unembed(self, coords: np.ndarray) -> np.ndarray:
        """Matrix represented by a coordinate vector."""
        if self.basis is None:
            raise ValueError(f"model {self.label!r} has no matrix embedding")
        return np.einsum("k,kij->ij", np.asarray(coords, dtype=float), self.basis)

    def cone_residual(self, coords: np.ndarray) -> float:
        """How far a coordinate vector sits outside the cone (0 = inside)."""
        coords = np.asarray(coords, dtype=float)
        if self.cone.kind in ("quantum", "real_quantum"):
            w = np.linalg.eigvalsh(self.unembed(coords))
            return float(max(0.0, -w.min()))
        if self.cone.kind == "classical":
            return float(max(0.0, -coords.min()))
        gens = self.cone.generators
        _, resid = nnls(gens.T, coords)
        return float(resid)

    def contains(self, coords: np.ndarray, tol: float | None = None) -> bool:
        return self.cone_residual(coords) <= (self.cone.tol if tol is None else tol)


@dataclass(frozen=True, eq=False)
class State:
    model: ModelSpace
    coords: np.ndarray

    @property
    def normalization(self) -> float:
        return float(self.model.order_unit @ self.coords)

    def is_normalized(self, tol: float = EPS_TOL) -> bool:
        return abs(self.normalization - 1.0) <= tol


@dataclass(frozen=True, eq=False)
class Effect:
    model: ModelSpace
    coords: np.ndarray


@dataclass(frozen=True, eq=False)
class Transformation:
    matrix: np.ndarray

    def __matmul__(self, other: "Transformation") -> "Transformation":
        return Transformation(self.matrix @ other.matrix)


@dataclass(frozen=True, eq=False)
class Filter:
    """An idempotent, neutral, complemented transformation and its complement."""

    projection: Transformation
    complement: Transformation


@dataclass(frozen=True, eq=False)
class Measurement:
    model: ModelSpace
    effects: tuple[Effect, ...]


@dataclass(frozen=True, eq=False)
class Face:
    """Linear-span representation of the set of states fixed by a filter."""

    projection_matrix: np.ndarray
    image_basis: np.ndarray  # (m, rank), orthonormal columns
    rank: int


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


@dataclass(frozen=True)
class ValidationReport:
    subject: str
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def worst(self, name: str) -> float:
        for c in self.checks:
            if c.name == name:
                return c.residual
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "passed": self.passed,
            "checks": [
                {
                    "name": c.name,
                    "residual": c.residual,
                    "tolerance": c.tolerance,
                    "passed": c.passed,
                }
                for c in self.checks
            ],
        }


def _check_same_model(a, b) -> None:
    if a.model.dimension != b.model.dimension:
        raise DimensionMismatch(
            f"dimension mismatch: {a.model.dimension} vs {b.model.dimension}"
        )


def probability(e: Effect, s: State) -> float:
    """Outcome probability e . s."""
    _check_same_model(e, s)
    return float(e.coords @ s.coords)


def apply(t: Transformation, s: State) -> State:
    """Image of a state under a transformation."""
    if t.matrix.shape[1] != s.coords.shape[0]:
        raise DimensionMismatch(
            f"matrix is {t.matrix.shape}, state has length {s.coords.shape[0]}"
        )
    return State(s.model, t.matrix @ s.coords)


def conditional_state(op_branch: Transformation, e_branch: Effect, s: State) -> State:
    """State conditioned on a branch outcome; keeps the input normalization."""
    _check_same_model(e_branch, s)
    p = float(e_branch.coords @ s.coords)
    if p <= EPS_TOL:
        raise ZeroProbabilityOutcome(f"outcome has zero probability (p={p:.3e})")
    scale = s.normalization / p
    return State(s.model, scale * (op_branch.matrix @ s.coords))


def _rel_fro(mat: np.ndarray, ref: np.ndarray) -> float:
    return float(np.linalg.norm(mat, "fro") / max(1.0, np.linalg.norm(ref, "fro")))


def validate_filter(
    f: Filter, model: ModelSpace, n_samples: int = 200, seed: int = 0
) -> ValidationReport:
    """Check the three filter axioms: idempotence, neutrality, complementation.

    Neutrality and the pass/block equivalences are sampled over random cone
    states (plus their filtered images, which exercise the fixed-point sets);
    the algebraic identities are checked exactly on the matrices.
    """
    P = f.projection.matrix
    Pc = f.complement.matrix
    u = model.order_unit

    idem = max(_rel_fro(P @ P - P, P), _rel_fro(Pc @ Pc - Pc, Pc))
    prod = max(_rel_fro(P @ Pc, P), _rel_fro(Pc @ P, P))

    neutral_worst = 0.0
    equiv_worst = 0.0
    for i in range(n_samples):
        s = random_state(model, seed=[seed, i])
        for t in (s.coords, P @ s.coords, Pc @ s.coords):
            nt = float(u @ t)
            if nt <= EPS_TOL:
                continue
            pt = P @ t
            if abs(float(u @ pt) - nt) <= EPS_TOL * max(1.0, nt):
                neutral_worst = max(
                    neutral_worst, float(np.linalg.norm(pt - t)) / max(1.0, nt)
                )
        # pass/block equivalences on the filtered samples
        t = P @ s.coords
        equiv_worst = max(equiv_worst, float(np.linalg.norm(Pc @ t)))
        t = Pc @ s.coords
        equiv_worst = max(equiv_worst, float(np.linalg.norm(P @ t)))

    return ValidationReport(
        subject="filter",
        checks=(
            CheckResult("idempotence", idem, EPS_PROJ),
            CheckResult("neutrality", neutral_worst, EPS_TOL * 10),
            CheckResult("complement_product", prod, EPS_PROJ),
            CheckResult("complement_equivalence", equiv_worst, EPS_TOL * 10),
        ),
    )


def validate_effect(e: Effect, model: ModelSpace, n_samples: int = 100, seed: int = 0) -> ValidationReport:
    """Check 0 <= e.s <= 1 on normalized states (exactly where possible)."""
    if model.cone.kind in ("quantum", "real_quantum"):
        w = np.linalg.eigvalsh(model.unembed(e.coords))
        low, high = float(-min(w.min(), 0.0)), float(max(w.max() - 1.0, 0.0))
    elif model.cone.kind == "classical":
        c = e.coords
        low, high = float(-min(c.min(), 0.0)), float(max(c.max() - 1.0, 0.0))
    else:
        low = high = 0.0
        for i in range(n_samples):
            p = probability(e, random_state(model, seed=[seed, i]))
            low = max(low, -p)
            high = max(high, p - 1.0)
    return ValidationReport(
        subject="effect",
        checks=(
            CheckResult("lower_bound", low, EPS_TOL),
            CheckResult("upper_bound", high, EPS_TOL),
        ),
    )


def validate_measurement(ms: Measurement, model: ModelSpace) -> ValidationReport:
    """Effects must sum to the order unit; each effect must be in [0, u]."""
    total = np.sum([e.coords for e in ms.effects], axis=0)
    sum_resid = float(np.linalg.norm(total - model.order_unit))
    range_resid = 0.0
    for e in ms.effects:
        rep = validate_effect(e, model)
        range_resid = max(range_resid, *(c.residual for c in rep.checks))
    return ValidationReport(
        subject="measurement",
        checks=(
            CheckResult("sum_to_order_unit", sum_resid, EPS_TOL * 10),
            CheckResult("effect_range", range_resid, EPS_TOL * 10),
        ),
    )


def orthonormal_column_basis(mat: np.ndarray, rtol: float = EPS_RANK_REL) -> np.ndarray:
    """Orthonormal basis for the column space of mat (SVD with relative cutoff)."""
    u_, s_, _ = np.linalg.svd(mat, full_matrices=False)
    if s_.size == 0 or s_[0] == 0.0:
        return np.zeros((mat.shape[0], 0))
    return u_[:, s_ > rtol * s_[0]]


def face_of(f: Filter) -> Face:
    """The face fixed by a filter, as an orthonormal basis of its image."""
    P = f.projection.matrix
    if _rel_fro(P @ P - P, P) > EPS_PROJ:
        raise NotAProjection("filter map is not idempotent; not a projection")
    basis = orthonormal_column_basis(P)
    return Face(P, basis, basis.shape[1])


def random_state(model: ModelSpace, seed) -> State:
    """A normalized random state, deterministic in the seed.

    quantum / real_quantum draw a full-rank Ginibre density matrix, classical
    a flat Dirichlet point on the simplex, custom a convex mix of generators.
    """
    rng = np.random.default_rng(seed)
    kind = model.cone.kind
    if kind in ("quantum", "real_quantum"):
        d = model.cone.d
        g = rng.standard_normal((d, d))
        if kind == "quantum":
            g = g + 1j * rng.standard_normal((d, d))
        rho = g @ g.conj().T
        rho /= np.trace(rho).real
        return State(model, model.embed(rho))
    if kind == "classical":
        n = model.cone.n
        return State(model, rng.dirichlet(np.ones(n)))
    gens = model.cone.generators
    w = rng.dirichlet(np.ones(gens.shape[0]))
    coords = w @ gens
    norm = float(model.order_unit @ coords)
    return State(model, coords / norm)


def random_effect(model: ModelSpace, seed) -> Effect:
    """A random valid effect, deterministic in the seed.

    Matrix models use a Haar-random eigenbasis with eigenvalues uniform in
    [0, 1]; classical models draw coordinates uniform in [0, 1].
    """
    rng = np.random.default_rng(seed)
    kind = model.cone.kind
    if kind in ("quantum", "real_quantum"):
        d = model.cone.d
        g = rng.standard_normal((d, d))
        if kind == "quantum":
            g = g + 1j * rng.standard_normal((d, d))
        q, r = np.linalg.qr(g)
        q = q * np.sign(np.diagonal(r))
        lam = rng.uniform(0.0, 1.0, size=d)
        mat = (q * lam) @ q.conj().T
        return Effect(model, model.embed(mat))
    if kind == "classical":
        return Effect(model, rng.uniform(0.0, 1.0, size=model.cone.n))
    # custom cones: rescale a random functional so it stays in [0, u]
    coords = rng.uniform(0.0, 1.0, size=model.dimension)
    gens = model.cone.generators
    norms = gens @ model.order_unit
    vals = (gens @ coords) / norms
    hi = float(vals.max())
    if hi > 1.0:
        coords = coords / hi
    return Effect(model, coords)
