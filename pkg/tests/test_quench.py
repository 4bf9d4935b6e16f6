import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sshdpt.lattice import HoppingChain, apply_disorder, build_ssh, edge_state, sample_disorder
from sshdpt.quench import (QuenchSpec, classify_dpt, critical_times, dynamical_phase,
                           edge_initial_state, evolve, is_polarized, loschmidt, loschmidt_trace,
                           merged_loschmidt, merged_weights, pgp, pgp_jump_times, rate_function,
                           zero_mode_weight)
from sshdpt.spectral import eigendecompose

from oracles import (dimer_loschmidt, dimer_zeros, expm_state, loschmidt_dense, ode_state,
                     zeros_dense)

T40 = np.linspace(0.0, 0.04, 801)


@pytest.fixture(scope="module")
def dimer():
    return eigendecompose(HoppingChain([60.0]))


class TestEvolve:
    def test_identity_at_zero(self, trivial8_eig, e1):
        np.testing.assert_allclose(evolve(trivial8_eig, e1, 0.0), e1, atol=1e-15)

    def test_dimer_closed_form(self, dimer):
        t = np.linspace(0, 0.05, 101)
        psi = evolve(dimer, np.array([1, 0], complex), t)
        np.testing.assert_allclose(psi[:, 0], np.cos(np.pi * 60 * t), atol=1e-13)
        np.testing.assert_allclose(psi[:, 1], -1j * np.sin(np.pi * 60 * t), atol=1e-13)

    def test_trivial_chain_against_ode(self, trivial8, trivial8_eig, e1):
        psi = evolve(trivial8_eig, e1, 0.04)
        assert np.linalg.norm(psi - ode_state(trivial8.couplings, e1, 0.04)) < 1e-6
        assert np.linalg.norm(psi - expm_state(trivial8.couplings, e1, 0.04)) < 1e-10

    def test_norm_preserved(self, trivial8_eig, e1):
        psi = evolve(trivial8_eig, e1, T40)
        assert np.max(np.abs(np.linalg.norm(psi, axis=1) - 1)) < 1e-12


class TestLoschmidt:
    def test_starts_at_one(self, trivial8_eig, e1):
        assert loschmidt(trivial8_eig, e1, [0.0])[0] == pytest.approx(1.0, abs=1e-15)

    def test_dimer(self, dimer):
        t = np.linspace(0, 0.02, 401)
        G = loschmidt(dimer, np.array([1, 0], complex), t)
        np.testing.assert_allclose(G, dimer_loschmidt(60, t), atol=1e-13)

    def test_against_dense_oracle(self, trivial8, trivial8_eig, e1):
        np.testing.assert_allclose(loschmidt(trivial8_eig, e1, T40),
                                   loschmidt_dense(trivial8.couplings, e1, T40), atol=1e-12)

    def test_merged_matches_full_on_trivial_quench(self, trivial8_eig, e1):
        full = loschmidt(trivial8_eig, e1, T40)
        np.testing.assert_allclose(merged_loschmidt(trivial8_eig, e1, T40), full.real, atol=1e-12)
        assert np.max(np.abs(full.imag)) < 1e-12

    def test_topological_quench_dominated_by_zero_modes(self, topological8_eig, e1):
        c0 = zero_mode_weight(topological8_eig, e1)
        G = merged_loschmidt(topological8_eig, e1, T40)
        assert c0 > 0.5
        assert np.all(G > 0)
        assert G.min() >= 2 * c0 - 1

    def test_uniform_chain_at_zero(self):
        eig = eigendecompose(HoppingChain([30.0] * 5))
        assert merged_loschmidt(eig, edge_state(6), [0.0])[0] == pytest.approx(1.0, abs=1e-14)

    def test_merged_needs_polarized_state(self, trivial8_eig):
        psi = np.zeros(8, complex)
        psi[:2] = 2**-0.5
        assert not is_polarized(psi)
        with pytest.raises(ValueError):
            merged_loschmidt(trivial8_eig, psi, T40)

    def test_merged_weights_sum_to_one(self, trivial8_eig, e1):
        _, w = merged_weights(trivial8_eig, e1)
        assert abs(w.sum() - 1) < 1e-12


class TestRateFunction:
    def test_zero_at_start(self, trivial8_eig, e1):
        G = loschmidt(trivial8_eig, e1, T40)
        assert rate_function(G, 4)[0] == 0.0

    def test_dimer(self, dimer):
        t = np.linspace(0, 0.003, 50)
        lam = rate_function(loschmidt(dimer, np.array([1, 0], complex), t), 1)
        np.testing.assert_allclose(lam, -np.log(np.cos(np.pi * 60 * t) ** 2), atol=1e-10)

    def test_exact_zero_is_infinite(self):
        assert rate_function(np.array([1.0, 0.0]), 2)[1] == np.inf

    def test_peaks_at_critical_times(self, trivial8_eig, e1):
        t = np.linspace(0, 0.04, 40001)
        lam = rate_function(loschmidt(trivial8_eig, e1, t), 4)
        peaks = [i for i in range(1, t.size - 1) if lam[i] > lam[i - 1] and lam[i] > lam[i + 1] and lam[i] > 2]
        np.testing.assert_allclose(t[peaks], [8.4538e-3, 25.4032e-3], atol=2e-6)


class TestDynamicalPhase:
    def test_edge_quench_vanishes(self, trivial8_eig, e1):
        assert np.max(np.abs(dynamical_phase(trivial8_eig, e1, T40))) < 1e-10

    def test_eigenstate(self, trivial8_eig):
        k = 6
        phi = dynamical_phase(trivial8_eig, trivial8_eig.vectors[:, k].astype(complex), T40)
        np.testing.assert_allclose(phi, -np.pi * trivial8_eig.eigenvalues[k] * T40, atol=1e-10)

    def test_every_site_state_vanishes(self, trivial8_eig):
        for j in range(8):
            psi = np.eye(8, dtype=complex)[j]
            assert np.max(np.abs(dynamical_phase(trivial8_eig, psi, T40))) < 1e-10


class TestPgp:
    def test_quench_i_window(self, trivial8_eig, e1):
        t = np.linspace(0, 0.04, 4001)
        phase, flagged = pgp(loschmidt(trivial8_eig, e1, t))
        assert phase[0] == 0.0
        inside = (t > 8.46e-3) & (t < 25.39e-3)
        outside = (t < 8.44e-3) | (t > 25.41e-3)
        assert np.all(phase[inside] == np.pi)
        assert np.all(phase[outside] == 0.0)
        assert not flagged.any()

    def test_quench_ii_flat(self, topological8_eig, e1):
        phase, _ = pgp(loschmidt(topological8_eig, e1, T40))
        assert np.all(phase == 0.0)

    def test_complex_input_rejected_in_chiral_mode(self):
        with pytest.raises(ValueError):
            pgp(np.array([1.0, 0.5 + 0.1j]))

    def test_non_chiral_mode_classifies_noisy_input(self):
        phase, _ = pgp(np.array([1.0, 0.2 + 0.5j, -1.0 + 0.3j]), chiral=False)
        assert phase.tolist() == [0.0, 0.0, np.pi]

    def test_zero_samples_carry_forward(self):
        phase, flagged = pgp(np.array([1.0, -0.5, 0.0, 0.2]))
        assert phase.tolist() == [0.0, np.pi, np.pi, 0.0]
        assert flagged.tolist() == [False, False, True, False]

    def test_offset_subtracted(self):
        G = np.array([1.0, -1.0]) * np.exp(0.3j)
        phase, _ = pgp(G, offset=0.3)
        np.testing.assert_allclose(phase, [0.0, np.pi], atol=1e-12)


class TestTrace:
    def test_invariants(self, trivial8_eig, e1):
        tr = loschmidt_trace(trivial8_eig, e1, T40, 4)
        assert tr.G[0] == pytest.approx(1.0)
        assert tr.rate[0] == 0.0 and tr.phi_p[0] == 0.0
        assert np.all(tr.r <= 1 + 1e-12) and np.all(tr.r >= 0)
        diff = np.angle(np.exp(1j * (tr.phi - tr.phi_dyn - tr.phi_p)))
        assert np.max(np.abs(diff)) < 1e-9

    def test_columns(self, trivial8_eig, e1):
        tr = loschmidt_trace(trivial8_eig, e1, T40, 4)
        assert tr.columns().shape == (T40.size, len(tr.COLUMNS))
        assert tr.COLUMNS[0] == "t_s"


class TestCriticalTimes:
    def test_quench_i(self, trivial8_eig, e1):
        tc = critical_times(trivial8_eig, e1, 0.04)
        np.testing.assert_allclose(tc, [8.45e-3, 25.40e-3], atol=5e-5)

    def test_quench_i_against_dense_oracle(self, trivial8, trivial8_eig, e1):
        tc = critical_times(trivial8_eig, e1, 0.04)
        np.testing.assert_allclose(tc, zeros_dense(trivial8.couplings, e1, 0.04), atol=2e-7)

    def test_dimer(self, dimer):
        tc = critical_times(dimer, np.array([1, 0], complex), 0.1)
        np.testing.assert_allclose(tc, dimer_zeros(60, 0.1), atol=2e-7)

    def test_quench_ii_empty(self, topological8_eig, e1):
        assert critical_times(topological8_eig, e1, 0.04) == []

    def test_pgp_jumps_match(self, trivial8_eig, e1):
        t = np.linspace(0, 0.04, 4001)
        jumps = pgp_jump_times(trivial8_eig, e1, t)
        tc = critical_times(trivial8_eig, e1, 0.04)
        np.testing.assert_allclose(jumps, tc, atol=2e-7)


class TestEdgeInitialState:
    def test_dimerized_limit_is_site_one(self):
        np.testing.assert_array_equal(edge_initial_state(4, 0.0), edge_state(8))

    def test_polarized_and_normalized(self):
        psi = edge_initial_state(6, 0.5)
        assert is_polarized(psi)
        assert abs(np.linalg.norm(psi) - 1) < 1e-14
        # exponential decay away from the left edge
        assert abs(psi[0]) > abs(psi[2]) > abs(psi[4])
        assert abs(psi[2] / psi[0]) == pytest.approx(0.5, rel=1e-3)

    def test_trivial_initial_ratio_rejected(self):
        with pytest.raises(ValueError):
            edge_initial_state(4, 1.2)


class TestClassify:
    def test_quench_i_robust(self):
        spec = QuenchSpec.edge_quench(4, 60, 20, 0.04, grid_step=1e-5)
        rep = classify_dpt(spec, [4, 40, 80])
        assert rep.dpt_present
        assert rep.finite_size_verdict == "robust"
        np.testing.assert_allclose(rep.critical_times, [8.45e-3, 25.40e-3], atol=5e-5)
        assert sorted(rep.escalation) == [4, 40, 80]

    def test_quench_ii_absent(self):
        rep = classify_dpt(QuenchSpec.edge_quench(4, 20, 60, 0.04))
        assert not rep.dpt_present
        assert rep.min_abs_G > 0.5
        assert rep.finite_size_verdict == "not-applicable"

    def test_accidental_dpt_near_boundary(self):
        rep = classify_dpt(QuenchSpec.edge_quench(40, 0.95 * 60, 60, 10 / 60))
        assert rep.dpt_present

    def test_size_artifact(self):
        rep = classify_dpt(QuenchSpec.edge_quench(2, 0.75 * 60, 60, 1 / 6), [2, 40, 80])
        assert rep.dpt_present
        assert rep.finite_size_verdict == "size-artifact"
        assert rep.escalation[40] == []

    def test_escalation_must_start_at_own_size(self):
        with pytest.raises(ValueError):
            classify_dpt(QuenchSpec.edge_quench(4, 60, 20, 0.04), [8, 40])

    def test_record(self):
        rec = classify_dpt(QuenchSpec.edge_quench(4, 60, 20, 0.04)).to_record()
        assert rec["dpt_present"] is True
        assert len(rec["critical_times_s"]) == 2

    def test_spec_validation(self, trivial8):
        with pytest.raises(ValueError):
            QuenchSpec(trivial8, edge_state(4), 0.04)
        with pytest.raises(ValueError):
            QuenchSpec(trivial8, 2 * edge_state(8), 0.04)
        with pytest.raises(ValueError):
            QuenchSpec(trivial8, edge_state(8), 0.0)

    def test_time_grid(self):
        t = QuenchSpec.edge_quench(4, 60, 20, 0.04, grid_step=5e-5).times()
        assert t[0] == 0.0 and t[-1] == 0.04 and np.all(np.diff(t) > 0)
        assert t.size == 801


chains = st.builds(
    lambda cells, ja, jb, strength, seed: apply_disorder(
        build_ssh(cells, ja, jb), sample_disorder(strength, 2 * cells - 1, seed)),
    st.integers(4, 20), st.floats(20, 120), st.floats(20, 120), st.floats(0, 15),
    st.integers(0, 2**32 - 1))


@settings(max_examples=100, deadline=None)
@given(chain=chains)
def test_chiral_quench_is_real_and_phase_free(chain):
    eig = eigendecompose(chain)
    psi0 = edge_state(chain.sites)
    G = loschmidt(eig, psi0, T40)
    assert np.max(np.abs(G.imag)) < 1e-10
    assert np.max(np.abs(dynamical_phase(eig, psi0, T40))) < 1e-10
    assert np.max(np.abs(np.linalg.norm(evolve(eig, psi0, T40[::80]), axis=1) - 1)) < 1e-12


@settings(max_examples=50, deadline=None)
@given(chain=chains)
def test_pgp_jumps_are_critical_times(chain):
    eig = eigendecompose(chain)
    psi0 = edge_state(chain.sites)
    t = np.linspace(0, 0.04, 4001)
    tc = critical_times(eig, psi0, 0.04, 1e-5)
    jumps = pgp_jump_times(eig, psi0, t)
    # every jump seen on the coarser sampling grid is a refined critical time
    for s in jumps:
        assert min(abs(np.array(tc) - s)) <= 2e-7


@settings(max_examples=50, deadline=None)
@given(cells=st.integers(2, 20), ratio=st.floats(0.05, 0.7), seed=st.integers(0, 2**32 - 1),
       strength=st.floats(0, 5))
def test_zero_mode_bound(cells, ratio, seed, strength):
    chain = apply_disorder(build_ssh(cells, 60 * ratio + 5, 60),
                           sample_disorder(strength, 2 * cells - 1, seed))
    eig = eigendecompose(chain)
    psi0 = edge_state(chain.sites)
    c0 = zero_mode_weight(eig, psi0)
    if c0 > 0.5:
        # the near-zero pair is split by +-delta on a finite chain
        delta = np.max(np.abs(eig.eigenvalues[list(eig.zero_modes)]))
        bound = c0 * np.min(np.cos(np.pi * delta * T40)) - (1 - c0)
        G = merged_loschmidt(eig, psi0, T40)
        assert G.min() >= bound - 1e-12
        if bound > 0:
            assert critical_times(eig, psi0, 0.04) == []


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1), t=st.floats(0, 0.04))
def test_propagator_matches_ode(n, seed, t):
    rng = np.random.default_rng(seed)
    couplings = rng.uniform(0, 120, 2 * n - 1)
    psi0 = rng.normal(size=2 * n) + 1j * rng.normal(size=2 * n)
    psi0 /= np.linalg.norm(psi0)
    psi = evolve(eigendecompose(HoppingChain(couplings)), psi0, t)
    assert np.linalg.norm(psi - ode_state(couplings, psi0, t)) < 1e-6
