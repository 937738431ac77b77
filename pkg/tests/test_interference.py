"""Interference hierarchy: table and operator paths, the signed projector
sum, defect operator, span condition, and the three-way equivalence check."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import sorkinlab as sl
from sorkinlab.fixtures import (
    basis_projectors,
    classical_fixture,
    quantum4_subspace_fixture,
    qutrit_fixture,
    real_qutrit_fixture,
    table_06,
)
from sorkinlab.interference import (
    ProbabilityTable,
    all_subsets,
    table_from_filters,
    mutual_span_residual,
)
from sorkinlab.models import (
    build_quantum_model,
    effect_from_matrix,
    state_from_matrix,
    subset_filters,
)
from sorkinlab.gpt import orthonormal_column_basis


def make_table(k, values):
    return ProbabilityTable(k, dict(zip(all_subsets(k), values)))


class TestTableFormulas:
    def test_constructed_table(self):
        assert sl.i3_from_table(table_06()) == pytest.approx(0.6, abs=1e-15)

    def test_all_zero(self):
        t = make_table(3, [0.0] * 7)
        assert sl.i3_from_table(t) == 0.0

    def test_qutrit_fixture_entries_and_i3(self):
        model, ss, s, r = qutrit_fixture()
        t = sl.table_from_system(r, ss, s)
        assert t[{1, 2, 3}] == pytest.approx(1.0, abs=1e-12)
        for pair in ({1, 2}, {1, 3}, {2, 3}):
            assert t[pair] == pytest.approx(4.0 / 9.0, abs=1e-12)
        for single in ({1}, {2}, {3}):
            assert t[single] == pytest.approx(1.0 / 9.0, abs=1e-12)
        assert sl.i3_from_table(t) == pytest.approx(0.0, abs=1e-12)

    def test_missing_entry_raises(self):
        t = ProbabilityTable(3, {frozenset({1}): 0.5})
        with pytest.raises(KeyError):
            sl.i3_from_table(t)

    def test_i2_qutrit_pair(self):
        model, ss, s, r = qutrit_fixture()
        t = sl.table_from_system(r, ss, s)
        assert sl.i2_from_table(t[{1, 2}], t[{1}], t[{2}]) == pytest.approx(
            2.0 / 9.0, abs=1e-12
        )

    def test_i2_diagonal_detector(self):
        model, ss, s, _ = qutrit_fixture()
        e0 = np.diag([1.0, 0.0, 0.0]).astype(complex)
        r = effect_from_matrix(e0, model)
        t = sl.table_from_system(r, ss, s)
        assert sl.i2_from_table(t[{1, 2}], t[{1}], t[{2}]) == pytest.approx(0.0, abs=1e-12)

    def test_i2_classical_additivity(self):
        model, ss, s, r = classical_fixture()
        t = sl.table_from_system(r, ss, s)
        assert sl.i2_from_table(t[{1, 2}], t[{1}], t[{2}]) == pytest.approx(0.0, abs=1e-15)


class TestIkFromTable:
    def test_reduces_to_i3(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            t = make_table(3, rng.uniform(0, 1, 7))
            assert sl.ik_from_table(t) == sl.i3_from_table(t)

    def test_k2(self):
        t = make_table(2, [0.0, 0.0, 1.0])
        # subsets ordered {1},{2},{12}
        assert sl.ik_from_table(t) == pytest.approx(1.0)

    def test_k_below_2_rejected(self):
        with pytest.raises(ValueError):
            sl.ik_from_table(make_table(1, [0.5]))

    def test_i4_vanishes_on_quantum4(self):
        model = build_quantum_model(4)
        filters = subset_filters(basis_projectors(4), model)
        for i in range(50):
            s = sl.random_state(model, [20, i])
            r = sl.random_effect(model, [21, i])
            t = table_from_filters(r, filters, s, 4)
            assert abs(sl.ik_from_table(t)) < 1e-10

    @given(delta=st.floats(-0.5, 0.5, allow_nan=False), seed=st.integers(0, 1000))
    @settings(max_examples=50, deadline=None)
    def test_linearity_in_triple_entry(self, delta, seed):
        rng = np.random.default_rng(seed)
        vals = rng.uniform(0, 1, 7)
        t = make_table(3, vals)
        base = sl.i3_from_table(t)
        t.entries[frozenset({1, 2, 3})] += delta
        assert sl.i3_from_table(t) == pytest.approx(base + delta, abs=1e-12)


class TestOperatorPicture:
    def test_p3_identity_on_qutrit_basis_slits(self):
        _, ss, _, _ = qutrit_fixture()
        np.testing.assert_allclose(sl.p3_operator(ss).matrix, np.eye(9), atol=1e-12)

    def test_p3_identity_on_classical(self):
        _, ss, _, _ = classical_fixture()
        np.testing.assert_allclose(sl.p3_operator(ss).matrix, np.eye(3), atol=1e-14)

    @pytest.mark.parametrize(
        "fixture",
        [qutrit_fixture, real_qutrit_fixture, classical_fixture, quantum4_subspace_fixture],
    )
    def test_p3_idempotent(self, fixture):
        ss = fixture()[1]
        p3 = sl.p3_operator(ss).matrix
        assert np.linalg.norm(p3 @ p3 - p3, "fro") < 1e-10

    def test_defect_zero_on_qutrit(self):
        _, ss, _, _ = qutrit_fixture()
        assert np.linalg.norm(sl.defect_operator(ss).matrix) < 1e-12

    def test_defect_zero_on_quantum4_subspace(self):
        _, ss = quantum4_subspace_fixture()
        assert np.linalg.norm(sl.defect_operator(ss).matrix) < 1e-10

    @pytest.mark.parametrize(
        "fixture",
        [qutrit_fixture, real_qutrit_fixture, classical_fixture, quantum4_subspace_fixture],
    )
    def test_defect_annihilates_p3(self, fixture):
        ss = fixture()[1]
        r = sl.defect_operator(ss).matrix
        p3 = sl.p3_operator(ss).matrix
        assert np.linalg.norm(r @ p3, "fro") < 1e-10
        assert np.linalg.norm(p3 @ r, "fro") < 1e-10

    def test_i3_operator_zero_on_qutrit(self):
        model, ss, _, _ = qutrit_fixture()
        for i in range(20):
            r = sl.random_effect(model, [30, i])
            s = sl.random_state(model, [31, i])
            assert abs(sl.i3_operator(r, ss, s)) < 1e-12

    def test_zero_effect(self):
        model, ss, s, _ = qutrit_fixture()
        zero = sl.Effect(model, np.zeros(9))
        assert sl.i3_operator(zero, ss, s) == 0.0

    def test_operator_matches_table_on_quantum4(self):
        model, ss = quantum4_subspace_fixture()
        for i in range(200):
            r = sl.random_effect(model, [40, i])
            s = sl.random_state(model, [41, i])
            t = sl.table_from_system(r, ss, s)
            assert sl.i3_operator(r, ss, s) == pytest.approx(
                sl.i3_from_table(t), abs=1e-11
            )


class TestSpanCondition:
    def test_qutrit_basis_slits(self):
        _, ss, _, _ = qutrit_fixture()
        assert sl.span_condition_check(ss) < 1e-10

    def test_classical(self):
        _, ss, _, _ = classical_fixture()
        assert sl.span_condition_check(ss) < 1e-12

    def test_lemma2_mutual_span(self):
        # span of the signed sum's image equals the union of the pair faces
        for fixture in (qutrit_fixture, classical_fixture, quantum4_subspace_fixture):
            ss = fixture()[1]
            pair_cols = np.hstack(
                [ss.filter_for(J).projection.matrix for J in ({1, 2}, {1, 3}, {2, 3})]
            )
            resid = mutual_span_residual(sl.p3_operator(ss).matrix, pair_cols)
            assert resid < 1e-10


class TestProp1:
    @pytest.mark.parametrize(
        "fixture", [qutrit_fixture, real_qutrit_fixture, classical_fixture]
    )
    def test_all_hold_on_valid_systems(self, fixture):
        ss = fixture()[1]
        rep = sl.prop1_verify(ss, n_samples=500, seed=0)
        assert rep.verdicts == (True, True, True)
        assert rep.consistent
        assert max(rep.sup_abs_i3, rep.operator_gap, rep.span_defect) < 1e-9

    def test_perturbation_flips_all_three(self):
        model, ss = quantum4_subspace_fixture()
        rng = np.random.default_rng(11)
        v = rng.standard_normal(16)
        v /= np.linalg.norm(v)
        rep = sl.prop1_verify(
            ss.with_triple_perturbation(1e-3 * np.outer(v, v)), n_samples=500, seed=0
        )
        assert rep.verdicts == (False, False, False)
        assert rep.operator_gap == pytest.approx(1e-3, rel=1e-6)
        assert rep.sup_abs_i3 > 1e-5
        assert rep.span_defect > 1e-5

    def test_i2_witnesses_interference(self):
        model, ss, _, _ = qutrit_fixture()
        best = 0.0
        for i in range(500):
            rng = np.random.default_rng([50, i])
            psi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            psi /= np.linalg.norm(psi)
            phi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            phi /= np.linalg.norm(phi)
            s = state_from_matrix(np.outer(psi, psi.conj()), model)
            r = effect_from_matrix(np.outer(phi, phi.conj()), model)
            t = sl.table_from_system(r, ss, s)
            for a, b in ((1, 2), (1, 3), (2, 3)):
                best = max(best, abs(sl.i2_from_table(t[{a, b}], t[{a}], t[{b}])))
        assert best > 0.1

    def test_classical_i2_i3_vanish(self):
        model, ss, _, _ = classical_fixture()
        for i in range(100):
            s = sl.random_state(model, [60, i])
            r = sl.random_effect(model, [61, i])
            t = sl.table_from_system(r, ss, s)
            assert abs(sl.i3_from_table(t)) < 1e-12
            for a, b in ((1, 2), (1, 3), (2, 3)):
                assert abs(sl.i2_from_table(t[{a, b}], t[{a}], t[{b}])) < 1e-12
