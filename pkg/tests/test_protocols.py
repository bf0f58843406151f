import math

import numpy as np
import pytest

from cavity_entangler import (
    ArgumentError,
    EffectiveModel,
    RegimeWarning,
    build_effective,
    cluster_initial_state,
    evolve,
    fidelity,
    ideal_cluster,
    inject_phase_errors,
    inner,
    number_operator,
    run_cluster,
    run_w,
    w_initial_state,
    w_target,
)


class TestClusterRun:
    def test_no_decay_gives_ideal_state(self):
        for n in (2, 4):
            model = EffectiveModel((1.3,) * n, 0.0)
            state, report = run_cluster(model, n, "analytic")
            assert np.allclose(state.amplitudes, ideal_cluster(n).amplitudes, atol=1e-12)
            assert report.fidelity == pytest.approx(1.0, abs=1e-12)
            assert report.success_probability == pytest.approx(1.0, abs=1e-12)

    def test_feasibility_ratio_keeps_high_fidelity(self):
        # at kappa/lambda = 0.04 every small register stays above 0.99;
        # the largest size verified here is N = 4
        fids = {}
        for n in (2, 3, 4):
            model = EffectiveModel((1.0,) * n, 0.04)
            _, report = run_cluster(model, n, "analytic")
            fids[n] = report.fidelity
            assert report.fidelity >= 0.99
        assert max(n for n, f in fids.items() if f >= 0.99) == 4

    def test_modes_agree(self, rng):
        for n in (2, 3, 4):
            lams = tuple(rng.uniform(0.5, 2.0, n))
            kappa = 0.05 * min(lams)
            model = EffectiveModel(lams, kappa)
            state_a, rep_a = run_cluster(model, n, "analytic")
            state_n, rep_n = run_cluster(model, n, "numeric")
            assert np.linalg.norm(state_a.amplitudes - state_n.amplitudes) < 1e-8
            assert rep_a.fidelity == pytest.approx(rep_n.fidelity, abs=1e-10)
            assert rep_a.success_probability == pytest.approx(
                rep_n.success_probability, abs=1e-10
            )

    def test_per_step_norms_non_increasing(self):
        model = EffectiveModel((1.0,) * 5, 0.08)
        _, report = run_cluster(model, 5, "numeric")
        values = [v for _, v in report.per_step]
        assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))
        assert report.success_probability == pytest.approx(values[-1], abs=1e-12)

    def test_success_probability_is_product_of_step_ratios(self):
        model = EffectiveModel((1.0,) * 3, 0.06)
        _, report = run_cluster(model, 3, "analytic")
        values = [v for _, v in report.per_step]
        product = values[0]
        for prev, cur in zip(values, values[1:]):
            product *= cur / prev
        assert report.success_probability == pytest.approx(product, abs=1e-12)

    def test_monotone_in_decay_and_size(self):
        ratios = np.linspace(0.0, 0.1, 6)
        table = {}
        for n in (2, 3, 4):
            rows = []
            for r in ratios:
                _, report = run_cluster(EffectiveModel((1.0,) * n, r), n, "analytic")
                rows.append((report.fidelity, report.success_probability))
            table[n] = rows
            fs, ps = zip(*rows)
            assert all(a >= b for a, b in zip(fs, fs[1:]))
            assert all(a >= b for a, b in zip(ps, ps[1:]))
        for i in range(len(ratios)):
            assert table[2][i][0] >= table[3][i][0] >= table[4][i][0]
            assert table[2][i][1] >= table[3][i][1] >= table[4][i][1]

    def test_out_of_regime_warns(self):
        with pytest.warns(RegimeWarning):
            model = EffectiveModel((1.0, 1.0), 0.2)
        with pytest.warns(RegimeWarning):
            run_cluster(model, 2, "analytic")

    def test_small_register_rejected(self):
        with pytest.raises(ArgumentError):
            run_cluster(EffectiveModel((1.0,), 0.0), 1)

    def test_initial_state_structure(self):
        psi = cluster_initial_state(3)
        # qubit 3 grounded, cavity in (|0> + i|1>)/sqrt(2)
        assert psi.amplitude([0, 0, 0], 1) == pytest.approx(1j / (2 * math.sqrt(2)))
        assert psi.amplitude([0, 0, 1], 0) == 0


class TestWRun:
    def test_uniform_output_no_decay(self):
        model = EffectiveModel((2.0, 1.0, 1.0, 1.0), 0.0)
        state, report = run_w(model, 4, "analytic")
        assert state.qubit_count == 3
        assert report.fidelity == pytest.approx(1.0, abs=1e-12)
        assert report.success_probability == pytest.approx(1.0, abs=1e-12)
        nonzero = np.abs(state.amplitudes[state.amplitudes != 0])
        assert np.allclose(nonzero, 1 / math.sqrt(3), atol=1e-12)

    def test_success_probability_matches_decay_envelope(self):
        rest = (1.0, 1.0, 1.0)
        kappa = 0.05
        model = EffectiveModel((2.0,) + rest, kappa)
        _, report = run_w(model, 4, "analytic")
        t = report.details["solution"].duration
        assert report.success_probability == pytest.approx(
            math.exp(-kappa * t / 4), abs=1e-10
        )

    def test_weighted_couplings_up_to_global_phase(self):
        model = EffectiveModel((1.0, 1.0, 2.0), 0.0)
        state, report = run_w(model, 3, "analytic")
        target = w_target((1.0, 2.0), 0.0, report.details["solution"].duration)
        assert report.fidelity == pytest.approx(1.0, abs=1e-10)
        assert abs(state.amplitude([1, 0], 0)) == pytest.approx(1 / math.sqrt(5), abs=1e-10)
        assert abs(state.amplitude([0, 1], 0)) == pytest.approx(2 / math.sqrt(5), abs=1e-10)
        assert fidelity(state, target) == pytest.approx(1.0, abs=1e-10)

    def test_modes_agree(self, rng):
        for n in (3, 4, 5):
            rest = tuple(rng.uniform(0.5, 2.0, n - 1))
            kappa = 0.06 * min(rest)
            model = EffectiveModel((1.0,) + rest, kappa)
            state_a, rep_a = run_w(model, n, "analytic")
            state_n, rep_n = run_w(model, n, "numeric")
            assert np.linalg.norm(state_a.amplitudes - state_n.amplitudes) < 1e-8
            assert rep_a.fidelity == pytest.approx(rep_n.fidelity, abs=1e-10)

    def test_residuals_reported(self):
        model = EffectiveModel((1.0, 1.0, 1.0), 0.08)
        _, report = run_w(model, 3, "numeric")
        assert report.details["qubit1_residual"] < 1e-7
        assert report.details["cavity_residual"] < 1e-7

    def test_excitation_bookkeeping_along_trajectory(self):
        # within the single-excitation sector the squared norm *is* the
        # excitation expectation, so norm loss must equal kappa times the
        # accumulated photon population
        rest = (1.0, 1.0, 1.0)
        kappa = 0.08
        from cavity_entangler import w_solve_lambda1
        sol = w_solve_lambda1(rest, kappa)
        model = EffectiveModel((sol.lambda1,) + rest, kappa)
        h = build_effective(model, 4, 2)
        n_op = number_operator(4, 2).matrix
        psi0 = w_initial_state(4)
        times = np.linspace(0.0, sol.duration, 201)
        photon = []
        norms = []
        for t in times:
            out = evolve(h, psi0, float(t))
            norms.append(out.norm_sq())
            photon.append(float(np.vdot(out.amplitudes, n_op @ out.amplitudes).real))
        leaked = kappa * np.trapezoid(photon, times)
        assert norms[0] - norms[-1] == pytest.approx(leaked, rel=1e-6)


class TestInjectPhaseErrors:
    def test_zero_phases_identity(self):
        state = ideal_cluster(3)
        out = inject_phase_errors(state, [0.0, 0.0, 0.0])
        assert np.allclose(out.amplitudes, state.amplitudes)

    def test_norm_preserved(self, rng):
        state = ideal_cluster(4)
        phases = rng.uniform(-np.pi, np.pi, 4)
        out = inject_phase_errors(state, phases)
        assert out.norm_sq() == pytest.approx(state.norm_sq(), abs=1e-12)

    def test_overlap_from_direct_inner_product(self):
        state = ideal_cluster(3)
        phi = 0.1
        out = inject_phase_errors(state, [phi, 0.0, 0.0])
        # direct overlap: the |1>_1 branch (half the weight) picks up e^{i phi}
        expected = abs(0.5 + 0.5 * np.exp(1j * phi)) ** 2
        assert fidelity(out, state) == pytest.approx(expected, abs=1e-12)

    def test_sensitivity_grows_with_phase(self):
        state = ideal_cluster(3)
        fids = [
            fidelity(inject_phase_errors(state, [phi, phi, phi]), state)
            for phi in (0.0, 0.05, 0.1, 0.2)
        ]
        assert all(a >= b for a, b in zip(fids, fids[1:]))

    def test_wrong_length_rejected(self):
        with pytest.raises(ArgumentError):
            inject_phase_errors(ideal_cluster(2), [0.1])
