import math

import numpy as np
import pytest

from qumodesim.gaussian import (
    GaussianState,
    InvalidStateError,
    NonSymplecticError,
    OutOfWindowError,
    SymplecticOp,
    apply,
    beam_splitter_op,
    coherent,
    displace_p,
    displace_x,
    fidelity_pure,
    homodyne,
    joint_quadrature_moments,
    omega,
    peak_x,
    qnd_op,
    rotation_op,
    sample_quadratures,
    squeeze_op,
    squeezed_vacuum,
    states_close,
    symplectic_eigenvalues,
    tensor,
    two_mode_squeeze_op,
    vacuum,
    wigner,
)

from oracles import propagate_cov, random_mixed_state, random_pure_state, wigner_overlap


class TestVacuum:
    def test_single_mode(self):
        st = vacuum(1)
        assert np.array_equal(st.mean, [0.0, 0.0])
        assert np.array_equal(st.cov, 0.25 * np.eye(2))

    def test_two_modes(self):
        assert np.array_equal(vacuum(2).cov, 0.25 * np.eye(4))

    def test_symplectic_eigenvalues_quarter(self):
        nu = symplectic_eigenvalues(vacuum(3).cov)
        assert np.allclose(nu, 0.25, atol=1e-14)

    def test_zero_modes_rejected(self):
        with pytest.raises(ValueError):
            vacuum(0)


class TestStateValidation:
    def test_asymmetric_cov_rejected(self):
        cov = 0.25 * np.eye(2)
        cov[0, 1] = 0.1
        with pytest.raises(InvalidStateError):
            GaussianState(np.zeros(2), cov)

    def test_uncertainty_violation_rejected(self):
        with pytest.raises(InvalidStateError):
            GaussianState(np.zeros(2), 0.1 * np.eye(2))

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(InvalidStateError):
            GaussianState(np.zeros(4), 0.25 * np.eye(2))

    def test_immutable_arrays(self):
        st = vacuum(1)
        with pytest.raises(ValueError):
            st.mean[0] = 1.0


class TestApply:
    def test_identity(self):
        st = coherent(1.0, -2.0)
        assert states_close(apply(st, SymplecticOp.identity(1)), st, 1e-15)

    def test_op_then_inverse(self):
        st = apply(vacuum(2), two_mode_squeeze_op(2, 0, 1, 0.8))
        op = beam_splitter_op(2, 0, 1, 0.3)
        assert states_close(apply(apply(st, op), op.inverse()), st, 1e-9)

    def test_balanced_bs_twice_keeps_vacuum(self):
        bs = beam_splitter_op(2, 0, 1, 0.5)
        twice = propagate_cov(bs.matrix, propagate_cov(bs.matrix, vacuum(2).cov))
        assert np.abs(twice - vacuum(2).cov).max() < 1e-12
        out = apply(apply(vacuum(2), bs), bs)
        assert states_close(out, vacuum(2), 1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            apply(vacuum(1), beam_splitter_op(2, 0, 1, 0.5))

    def test_non_symplectic_rejected(self):
        with pytest.raises(NonSymplecticError):
            SymplecticOp(2.0 * np.eye(2), np.zeros(2))


class TestSqueeze:
    def test_variance_scaling_convention(self):
        # x-variance e^{-2r}/4, p-variance e^{+2r}/4 for axis "x"
        st = apply(vacuum(1), squeeze_op(1, 0, 1.0, "x"))
        assert st.quad_var(0, "x") == pytest.approx(0.0338338208091532, abs=1e-14)
        assert st.quad_var(0, "p") == pytest.approx(np.exp(2.0) / 4.0, rel=1e-12)

    def test_axis_p(self):
        st = apply(vacuum(1), squeeze_op(1, 0, 0.7, "p"))
        assert st.quad_var(0, "p") == pytest.approx(np.exp(-1.4) / 4.0, rel=1e-12)
        assert st.quad_var(0, "x") == pytest.approx(np.exp(1.4) / 4.0, rel=1e-12)

    def test_zero_is_identity(self):
        assert np.array_equal(squeeze_op(1, 0, 0.0).matrix, np.eye(2))

    def test_other_modes_untouched(self):
        st = apply(vacuum(2), squeeze_op(2, 0, 1.0, "x"))
        assert states_close(st.reduced(1), vacuum(1), 1e-15)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            squeeze_op(1, 0, math.inf)


class TestBeamSplitter:
    def test_full_transmission_is_identity(self):
        assert np.array_equal(beam_splitter_op(2, 0, 1, 1.0).matrix, np.eye(4))

    def test_difference_arm_variance(self):
        # x-squeezed (x) p-squeezed through t=1/2: Var((x_a'-x_b')/sqrt2) = e^{-2r}/4
        r = 0.9
        st = apply(vacuum(2), squeeze_op(2, 0, r, "x"))
        st = apply(st, squeeze_op(2, 1, r, "p"))
        bs = beam_splitter_op(2, 0, 1, 0.5)
        cov = propagate_cov(bs.matrix, st.cov)  # brute-force oracle path
        w = np.array([1.0, 0.0, -1.0, 0.0]) / math.sqrt(2.0)
        assert w @ cov @ w == pytest.approx(math.exp(-2 * r) / 4.0, rel=1e-10)

    def test_balanced_is_symplectic(self):
        s = beam_splitter_op(2, 0, 1, 0.5).matrix
        omg = omega(2)
        assert np.abs(s @ omg @ s.T - omg).max() < 1e-15

    def test_transmissivity_out_of_range(self):
        with pytest.raises(ValueError):
            beam_splitter_op(2, 0, 1, 1.2)

    def test_same_mode_rejected(self):
        with pytest.raises(ValueError):
            beam_splitter_op(2, 1, 1, 0.5)


class TestDisplacements:
    def test_displace_x(self):
        st = displace_x(vacuum(1), 0, 2.0)
        assert np.array_equal(st.mean, [2.0, 0.0])
        assert np.array_equal(st.cov, vacuum(1).cov)

    def test_displace_p(self):
        st = displace_p(vacuum(1), 0, 1.5)
        assert np.array_equal(st.mean, [0.0, 1.5])

    def test_inverse_displacement(self):
        st = displace_x(displace_x(vacuum(1), 0, 3.2), 0, -3.2)
        assert states_close(st, vacuum(1), 1e-15)

    def test_displacements_commute_on_means(self):
        a = displace_p(displace_x(vacuum(1), 0, 1.0), 0, 2.0)
        b = displace_x(displace_p(vacuum(1), 0, 2.0), 0, 1.0)
        assert np.array_equal(a.mean, b.mean)

    def test_displace_p_keeps_x_marginal(self):
        # integrate the Wigner in p before and after: x marginal unchanged
        st = squeezed_vacuum(0.5, "x")
        shifted = displace_p(st, 0, 1.7)
        xs = np.linspace(-4, 4, 161)
        ps = np.linspace(-8, 8, 321)
        gx, gp = np.meshgrid(xs, ps, indexing="ij")
        pts = np.column_stack([gx.ravel(), gp.ravel()])
        before = wigner(st, 0, pts).reshape(161, 321).sum(axis=1)
        after = wigner(shifted, 0, pts).reshape(161, 321).sum(axis=1)
        assert np.abs(before - after).max() * (ps[1] - ps[0]) < 1e-9


class TestQnd:
    def test_zero_gain_identity(self):
        assert np.array_equal(qnd_op(2, 0, 1, 0.0).matrix, np.eye(4))

    @pytest.mark.parametrize("gain", [-2.0, 0.5, 1.0, 3.0])
    def test_symplectic_any_gain(self, gain):
        s = qnd_op(2, 0, 1, gain).matrix
        omg = omega(2)
        assert np.abs(s @ omg @ s.T - omg).max() < 1e-12

    def test_mean_arithmetic(self):
        st = GaussianState([3.0, 0.0, 0.0, 0.0], 0.25 * np.eye(4))
        out = apply(st, qnd_op(2, 0, 1, 2.0))
        assert np.array_equal(out.mean, [3.0, 0.0, 6.0, 0.0])


class TestHomodyne:
    def test_product_state_leaves_partner_untouched(self):
        st = tensor(coherent(1.0, 2.0), vacuum(1))
        remainder, record = homodyne(st, 0, "x", seed=11)
        assert states_close(remainder, vacuum(1), 1e-12)
        assert record.mode == 0 and record.quadrature == "x"

    def test_epr_forced_outcome_steers_other_arm(self):
        # conditional-Gaussian oracle: E[x_B | x_A = m] = tanh(2r) * m
        r, m = 5.0, 2.5
        st = apply(vacuum(2), squeeze_op(2, 0, r, "p"))
        st = apply(st, squeeze_op(2, 1, r, "x"))
        st = apply(st, beam_splitter_op(2, 1, 0, 0.5))
        remainder, record = homodyne(st, 0, "x", forced_outcome=m)
        assert record.outcome == m
        assert remainder.quad_mean(0, "x") == pytest.approx(math.tanh(2 * r) * m, abs=1e-8)
        assert abs(remainder.quad_mean(0, "x") - m) < 1e-6

    def test_density_peak_value(self):
        st = coherent(0.7, 0.0)
        _, record = homodyne(st, 0, "x", forced_outcome=0.7)
        assert record.density == pytest.approx(1.0 / math.sqrt(2 * math.pi * 0.25), rel=1e-12)

    def test_density_is_marginal_normal_density(self):
        st = squeezed_vacuum(0.6, "x")
        var = st.quad_var(0, "x")
        _, record = homodyne(st, 0, "x", forced_outcome=0.9)
        expected = math.exp(-0.5 * 0.9**2 / var) / math.sqrt(2 * math.pi * var)
        assert record.density == pytest.approx(expected, abs=1e-9)

    def test_forced_far_from_singular_quadrature_warns(self):
        mean = np.zeros(2)
        cov = np.diag([1e-14, 0.25**2 / 1e-14])
        st = GaussianState(mean, cov)
        _, record = homodyne(st, 0, "x", forced_outcome=5.0)
        assert record.warning
        assert record.density >= 0.0

    def test_seeded_reproducible(self):
        st = squeezed_vacuum(0.4)
        out1 = homodyne(st, 0, "x", seed=123)[1].outcome
        out2 = homodyne(st, 0, "x", seed=123)[1].outcome
        assert out1 == out2

    def test_no_modes_left(self):
        remainder, _ = homodyne(vacuum(1), 0, "x", seed=0)
        assert remainder.n_modes == 0

    def test_averaged_conditional_mean_matches_unconditional(self):
        # 1e4 sampled shots reproduce the reduced state's mean within 5 SE
        st = apply(vacuum(2), two_mode_squeeze_op(2, 0, 1, 1.0))
        st = displace_x(st, 1, 0.8)
        rng = np.random.default_rng(2024)
        means = np.empty((10_000, 2))
        for i in range(means.shape[0]):
            remainder, _ = homodyne(st, 0, "x", seed=rng)
            means[i] = remainder.mean
        se = means.std(axis=0, ddof=1) / math.sqrt(means.shape[0])
        target = st.reduced(1).mean
        assert np.all(np.abs(means.mean(axis=0) - target) <= 5 * np.maximum(se, 1e-12))

    def test_sequential_equals_joint_sampling_law(self):
        st = apply(vacuum(2), two_mode_squeeze_op(2, 0, 1, 0.8))
        n = 4000
        seq = np.empty((n, 2))
        rng = np.random.default_rng(7)
        for i in range(n):
            rest, rec0 = homodyne(st, 0, "x", seed=rng)
            _, rec1 = homodyne(rest, 0, "x", seed=rng)
            seq[i] = rec0.outcome, rec1.outcome
        mean, cov = joint_quadrature_moments(st, [(0, "x"), (1, "x")])
        sample_cov = np.cov(seq.T)
        assert np.abs(seq.mean(axis=0) - mean).max() < 5 * math.sqrt(cov.max() / n)
        assert np.abs(sample_cov - cov).max() < 6 * cov.max() * math.sqrt(2.0 / n)


class TestFidelity:
    def test_identical_vacuum(self):
        assert fidelity_pure(vacuum(1), vacuum(1)) == pytest.approx(1.0, abs=1e-12)

    def test_unit_gain_teleport_r0(self):
        inp = coherent(2.0, 1.0)
        out = GaussianState(inp.mean, inp.cov + 2 * 0.25 * np.eye(2))
        assert fidelity_pure(inp, out) == pytest.approx(0.5, abs=1e-12)
        assert wigner_overlap(inp, out) == pytest.approx(0.5, abs=1e-5)

    def test_symmetric_for_pure_pairs(self):
        rng = np.random.default_rng(5)
        a, b = random_pure_state(rng), random_pure_state(rng)
        assert fidelity_pure(a, b) == pytest.approx(fidelity_pure(b, a), abs=1e-12)

    def test_bounds_and_equality_condition(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            a, b = random_pure_state(rng), random_mixed_state(rng)
            f = fidelity_pure(a, b)
            assert 0.0 <= f <= 1.0
        st = random_pure_state(rng)
        assert fidelity_pure(st, st) == pytest.approx(1.0, abs=1e-9)

    def test_mixed_input_rejected(self):
        mixed = GaussianState(np.zeros(2), 0.5 * np.eye(2))
        with pytest.raises(ValueError):
            fidelity_pure(mixed, vacuum(1))

    def test_agrees_with_wigner_overlap_oracle(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            a = random_pure_state(rng)
            b = random_mixed_state(rng)
            assert fidelity_pure(a, b) == pytest.approx(wigner_overlap(a, b), abs=1e-4)


class TestWigner:
    def test_vacuum_origin(self):
        value = wigner(vacuum(1), 0, [(0.0, 0.0)])[0]
        assert value == pytest.approx(2.0 / math.pi, abs=1e-12)

    def test_grid_normalization(self):
        st = random_mixed_state(np.random.default_rng(3))
        spread = 8 * math.sqrt(st.cov.max())
        xs = np.linspace(st.mean[0] - spread, st.mean[0] + spread, 401)
        ps = np.linspace(st.mean[1] - spread, st.mean[1] + spread, 401)
        gx, gp = np.meshgrid(xs, ps, indexing="ij")
        vals = wigner(st, 0, np.column_stack([gx.ravel(), gp.ravel()]))
        mass = vals.sum() * (xs[1] - xs[0]) * (ps[1] - ps[0])
        assert 0.999 <= mass <= 1.001

    def test_peak_at_mean(self):
        st = coherent(1.3, -0.4)
        at_mean = wigner(st, 0, [(1.3, -0.4)])[0]
        elsewhere = wigner(st, 0, [(1.0, 0.0), (2.0, -1.0), (0.0, 0.0)])
        assert np.all(at_mean > elsewhere)


class TestPeakScan:
    def test_gaussian_peak_equals_mean(self):
        st = coherent(12.5, 0.0)
        assert peak_x(st, 0, (0.0, 16.0), 0.01) == pytest.approx(12.5, abs=0.005)

    def test_vacuum_peak_at_zero(self):
        assert peak_x(vacuum(1), 0, (-1.0, 1.0), 0.01) == pytest.approx(0.0, abs=0.005)

    def test_displaced_peak(self):
        s = 2.75
        assert peak_x(displace_x(vacuum(1), 0, s), 0, (0.0, 5.0), 0.01) == pytest.approx(
            s, abs=0.005
        )

    def test_boundary_peak_raises(self):
        with pytest.raises(OutOfWindowError):
            peak_x(coherent(10.0, 0.0), 0, (0.0, 5.0), 0.01)

    def test_bad_window(self):
        with pytest.raises(ValueError):
            peak_x(vacuum(1), 0, (1.0, 1.0), 0.01)
        with pytest.raises(ValueError):
            peak_x(vacuum(1), 0, (0.0, 1.0), -0.1)


def _builtin_ops():
    return [
        squeeze_op(2, 0, 1.3, "x"),
        squeeze_op(2, 1, 0.6, "p"),
        rotation_op(2, 0, 0.77),
        beam_splitter_op(2, 0, 1, 0.5),
        beam_splitter_op(2, 0, 1, 0.31),
        two_mode_squeeze_op(2, 0, 1, 1.1),
        qnd_op(2, 0, 1, 1.7),
        qnd_op(2, 1, 0, -0.9),
    ]


class TestOpProperties:
    @pytest.mark.parametrize("op", _builtin_ops())
    def test_symplectic_form_preserved(self, op):
        omg = omega(op.n_modes)
        assert np.abs(op.matrix @ omg @ op.matrix.T - omg).max() < 1e-10

    def test_uncertainty_preserved_on_random_circuits(self):
        rng = np.random.default_rng(99)
        for _ in range(25):
            st = tensor(random_mixed_state(rng), random_mixed_state(rng))
            for op in rng.choice(len(_builtin_ops()), size=4):
                st = apply(st, _builtin_ops()[op])
            assert symplectic_eigenvalues(st.cov).min() >= 0.25 - 1e-9


class TestSampling:
    def test_joint_moments_selection(self):
        st = apply(vacuum(2), two_mode_squeeze_op(2, 0, 1, 0.5))
        mean, cov = joint_quadrature_moments(st, [(0, "x"), (1, "p")])
        assert mean.shape == (2,) and cov.shape == (2, 2)
        assert cov[0, 0] == st.quad_var(0, "x")

    def test_sample_statistics(self):
        st = displace_x(squeezed_vacuum(0.8, "x"), 0, 1.5)
        draws = sample_quadratures(st, [(0, "x")], 60_000, seed=17)
        var = st.quad_var(0, "x")
        assert draws.mean() == pytest.approx(1.5, abs=5 * math.sqrt(var / 60_000))
        assert draws.var(ddof=1) == pytest.approx(var, rel=0.05)

    def test_reproducible(self):
        st = vacuum(1)
        a = sample_quadratures(st, [(0, "x")], 5, seed=4)
        b = sample_quadratures(st, [(0, "x")], 5, seed=4)
        assert np.array_equal(a, b)
