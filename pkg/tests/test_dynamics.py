"""Dynamical observables checked against dense matrix-exponential oracles."""

import math

import numpy as np
import pytest
import scipy.linalg as sla
import scipy.sparse as sp

from bhchaos.basis import (
    LatticeParams,
    assemble_hamiltonian,
    build_basis,
    diagonal_energies,
    occupation_operator,
)
from bhchaos.dynamics import (
    TimeSeries,
    autocorrelation,
    cbs_experiment,
    otoc,
    otoc_multisector,
    symmetry_images,
    time_grid,
    transition_probability,
    transition_row,
    weighted_spectrum,
)
from bhchaos.errors import NumericError
from bhchaos.states import coherent_state, fock_state


class TestTimeSeries:
    def test_uniform_grid_accepted(self):
        ts = TimeSeries(np.linspace(0, 5, 11), np.zeros(11))
        assert ts.dt == pytest.approx(0.5)

    def test_nonuniform_grid_accepted_but_dt_undefined(self):
        ts = TimeSeries(np.array([0.0, 1.0, 2.5]), np.zeros(3))
        with pytest.raises(ValueError):
            ts.dt

    def test_decreasing_grid_rejected(self):
        with pytest.raises(ValueError):
            TimeSeries(np.array([0.0, 2.0, 1.5]), np.zeros(3))

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            TimeSeries(np.linspace(0, 1, 5), np.zeros(4))

    def test_time_grid_endpoints(self):
        g = time_grid(14.0, 0.05)
        assert g[0] == 0.0
        assert g[-1] == pytest.approx(14.0)
        assert len(g) == 281

    def test_time_grid_validation(self):
        with pytest.raises(ValueError):
            time_grid(-1.0, 0.1)
        with pytest.raises(ValueError):
            time_grid(1.0, 0.0)


class TestAutocorrelation:
    def test_starts_at_unity(self):
        params = LatticeParams(L=2, J=0.7, U=0.4)
        state = coherent_state([1.0, 0.6])
        _, C = autocorrelation(params, state, time_grid(2.0, 0.5))
        assert C.values[0] == pytest.approx(1.0, abs=1e-9)

    def test_no_hopping_revival_period(self):
        # With J = 0 every Fock energy is an integer multiple of U, so the
        # overlap amplitude is exactly periodic with period 2*pi/U.
        U = 0.5
        params = LatticeParams(L=3, J=0.0, U=U)
        state = coherent_state([1.2, 0.8, 0.5])
        tau = 2.0 * math.pi / U
        times = np.linspace(0.0, tau, 5)
        _, C = autocorrelation(params, state, times, tol=1e-11)
        assert C.values[4] == pytest.approx(1.0, abs=1e-8)
        assert C.values[1] < 1.0 - 1e-3

    def test_matches_dense_oracle(self):
        params = LatticeParams(L=2, J=0.9, U=0.33, eps=(0.05, -0.02))
        state = coherent_state([1.1, 0.8], k_sigma=6.0)
        times = time_grid(3.0, 0.25)
        A, C = autocorrelation(params, state, times, tol=1e-11)
        expect = np.zeros(len(times), dtype=complex)
        for N, comp in state.sectors.items():
            h = assemble_hamiltonian(comp.basis, params).toarray()
            for k, t in enumerate(times):
                u = sla.expm(-1j * h * t) @ comp.amplitudes
                expect[k] += np.vdot(comp.amplitudes, u)
        assert np.max(np.abs(A.values - expect)) < 1e-9
        assert np.max(np.abs(C.values - np.abs(expect) ** 2)) < 1e-9

    def test_threaded_matches_serial(self):
        params = LatticeParams(L=2, J=0.5, U=0.2)
        state = coherent_state([1.0, 0.7])
        times = time_grid(2.0, 0.5)
        A1, _ = autocorrelation(params, state, times, tol=1e-10, threads=1)
        A2, _ = autocorrelation(params, state, times, tol=1e-10, threads=2)
        np.testing.assert_allclose(A2.values, A1.values, atol=1e-12)

    def test_chebyshev_backend_agrees(self):
        params = LatticeParams(L=2, J=0.8, U=0.3)
        state = coherent_state([1.0, 0.9])
        times = time_grid(2.0, 0.25)
        A1, _ = autocorrelation(params, state, times, tol=1e-10, method="krylov")
        A2, _ = autocorrelation(params, state, times, tol=1e-10, method="chebyshev")
        np.testing.assert_allclose(A2.values, A1.values, atol=1e-8)


class TestWeightedSpectrum:
    def test_matches_eigenbasis_sum(self):
        # Single-sector state so the closed-form overlap amplitude is exact;
        # the engine A(t) and the closed-form A(t) go through the same
        # quadrature, isolating the propagation error.
        params = LatticeParams(L=2, J=1.0, U=0.7)
        basis = build_basis(2, 3)
        h = assemble_hamiltonian(basis, params).toarray()
        e, v = sla.eigh(h)
        psi = np.zeros(basis.dim, dtype=complex)
        psi[basis.index((3, 0))] = 1.0 / math.sqrt(2.0)
        psi[basis.index((1, 2))] = 1.0 / math.sqrt(2.0)
        times = time_grid(25.0, 0.02)
        w2 = np.abs(v.conj().T @ psi) ** 2
        amp = np.array([np.sum(w2 * np.exp(-1j * e * t)) for t in times])
        eta = 0.4
        grid_e = np.linspace(e.min() - 2, e.max() + 2, 60)
        sp_closed = weighted_spectrum(TimeSeries(times, amp), eta, grid_e)
        gauss = np.exp(-((grid_e[:, None] - e[None, :]) ** 2) / (2 * eta**2))
        gauss /= math.sqrt(2 * math.pi) * eta
        direct = gauss @ w2
        # half-line quadrature reconstructs the full Gaussian-smoothed density
        assert np.max(np.abs(sp_closed - direct)) < 1e-3
        assert np.trapezoid(sp_closed, grid_e) == pytest.approx(1.0, abs=1e-2)

    def test_rejects_bad_eta(self):
        ts = TimeSeries(np.linspace(0, 1, 11), np.ones(11, dtype=complex))
        with pytest.raises(ValueError):
            weighted_spectrum(ts, 0.0, [0.0])


class TestTransitions:
    def test_zero_time_is_delta(self):
        basis = build_basis(3, 2)
        params = LatticeParams(L=3, J=1.0, U=0.5)
        h = assemble_hamiltonian(basis, params)
        row = transition_row(basis, h, (1, 1, 0), 0.0)
        expect = np.zeros(basis.dim)
        expect[basis.index((1, 1, 0))] = 1.0
        np.testing.assert_allclose(row, expect, atol=1e-12)

    def test_row_sums_to_one(self):
        basis = build_basis(3, 3)
        params = LatticeParams(L=3, J=0.8, U=0.4, eps=(0.1, 0.0, -0.1))
        h = assemble_hamiltonian(basis, params)
        row = transition_row(basis, h, (2, 1, 0), 4.0, tol=1e-10)
        assert np.sum(row) == pytest.approx(1.0, abs=1e-8)

    def test_matches_dense_oracle(self):
        basis = build_basis(3, 2)
        params = LatticeParams(L=3, J=1.0, U=0.6, phi=0.3)
        h = assemble_hamiltonian(basis, params)
        t = 2.7
        u = sla.expm(-1j * h.toarray() * t)
        i0 = basis.index((0, 2, 0))
        row = transition_row(basis, h, (0, 2, 0), t, tol=1e-12)
        np.testing.assert_allclose(row, np.abs(u[:, i0]) ** 2, atol=1e-10)

    def test_probability_lookup(self):
        basis = build_basis(2, 2)
        params = LatticeParams(L=2, J=1.0, U=0.0)
        h = assemble_hamiltonian(basis, params)
        p = transition_probability(basis, h, (2, 0), (0, 2), 1.0, tol=1e-11)
        assert 0.0 <= p <= 1.0
        # real Hamiltonian: detailed balance between basis states
        q = transition_probability(basis, h, (0, 2), (2, 0), 1.0, tol=1e-11)
        assert p == pytest.approx(q, abs=1e-10)


class TestSymmetryImages:
    def test_ring_orbit_is_dihedral(self):
        params = LatticeParams(L=4, J=1.0, U=0.1)
        images = symmetry_images(params, (1, 0, 3, 2))
        assert (1, 0, 3, 2) in images
        assert (2, 3, 0, 1) in images  # reversal
        assert (2, 1, 0, 3) in images  # shift
        assert len(images) == 8

    def test_uniform_pattern_single_image(self):
        params = LatticeParams(L=4, J=1.0, U=0.1)
        assert symmetry_images(params, (2, 2, 2, 2)) == {(2, 2, 2, 2)}

    def test_chain_orbit_is_reflection_pair(self):
        params = LatticeParams(L=4, J=1.0, U=0.1, geometry="chain")
        images = symmetry_images(params, (3, 1, 0, 0))
        assert images == {(3, 1, 0, 0), (0, 0, 1, 3)}


class TestCbs:
    def test_small_system_contrast_fields(self):
        params = LatticeParams(L=4, J=1.0, U=0.3)
        results = cbs_experiment(
            params,
            N=4,
            n_i=(2, 2, 0, 0),
            phi_list=[0.0],
            t_window=(20.0, 30.0),
            n_times=21,
        )
        r = results[0]
        assert r.phi == 0.0
        assert r.g > 0.0
        assert r.n_shell >= 1
        assert r.background > 0.0
        assert r.n_window_times == 21

    def test_empty_shell_raises(self):
        # L=2 with n_i=(3,0): the only state sharing its interaction energy
        # is the mirror image, which is excluded.
        params = LatticeParams(L=2, J=1.0, U=0.4)
        with pytest.raises(NumericError):
            cbs_experiment(
                params,
                N=3,
                n_i=(3, 0),
                phi_list=[0.0],
                t_window=(5.0, 10.0),
                n_times=5,
                shell_width=1e-9,
            )

    def test_shell_excludes_images(self):
        params = LatticeParams(L=4, J=1.0, U=0.3)
        basis = build_basis(4, 4)
        results = cbs_experiment(
            params,
            N=4,
            n_i=(2, 2, 0, 0),
            phi_list=[0.0],
            t_window=(20.0, 25.0),
            n_times=11,
            shell_width=1e-9,
            basis=basis,
        )
        # exact-degeneracy shell of (2,2,0,0) holds its 6 permutations;
        # 4 are ring images, leaving the 2 interleaved patterns
        assert results[0].n_shell == 2


def dense_otoc(h, psi, vd, wd, times):
    vals = np.zeros(len(times))
    for k, t in enumerate(times):
        u = sla.expm(-1j * h * t)
        wt = u.conj().T @ np.diag(wd) @ u
        comm = wt @ (vd * psi) - vd * (wt @ psi)
        vals[k] = np.vdot(comm, comm).real
    return vals


class TestOtoc:
    def test_zero_at_equal_time(self):
        basis = build_basis(3, 3)
        params = LatticeParams(L=3, J=1.0, U=0.5)
        h = assemble_hamiltonian(basis, params)
        psi = fock_state(basis, (2, 1, 0))
        vd = occupation_operator(basis, 0).diagonal()
        wd = occupation_operator(basis, 1).diagonal()
        series = otoc(h, psi, vd, wd, np.array([0.0, 1.0]))
        assert series.values[0] == 0.0

    def test_nonnegative(self):
        basis = build_basis(3, 3)
        params = LatticeParams(L=3, J=1.0, U=0.5)
        h = assemble_hamiltonian(basis, params)
        psi = fock_state(basis, (1, 1, 1))
        vd = occupation_operator(basis, 0).diagonal()
        wd = occupation_operator(basis, 2).diagonal()
        series = otoc(h, psi, vd, wd, time_grid(5.0, 1.0))
        assert np.all(series.values >= 0.0)

    @pytest.mark.parametrize("method", ["krylov", "chebyshev"])
    def test_matches_dense_oracle(self, method):
        basis = build_basis(3, 3)
        params = LatticeParams(L=3, J=1.0, U=0.4, eps=(0.0, 0.07, -0.03))
        h = assemble_hamiltonian(basis, params)
        psi = fock_state(basis, (2, 0, 1))
        vd = occupation_operator(basis, 0).diagonal()
        wd = occupation_operator(basis, 1).diagonal()
        times = time_grid(4.0, 0.5)
        series = otoc(h, psi, vd, wd, times, tol=1e-11, method=method)
        expect = dense_otoc(h.toarray(), psi, vd, wd, times)
        np.testing.assert_allclose(series.values, expect, atol=1e-9)

    def test_sparse_diagonal_operator_accepted(self):
        basis = build_basis(2, 2)
        params = LatticeParams(L=2, J=1.0, U=0.2)
        h = assemble_hamiltonian(basis, params)
        psi = fock_state(basis, (1, 1))
        n0 = occupation_operator(basis, 0)
        n1 = occupation_operator(basis, 1)
        series = otoc(h, psi, n0, n1, np.array([0.0, 1.5]), tol=1e-10)
        assert series.values[1] > 0

    def test_offdiagonal_operator_rejected(self):
        basis = build_basis(2, 2)
        params = LatticeParams(L=2, J=1.0, U=0.2)
        h = assemble_hamiltonian(basis, params)
        psi = fock_state(basis, (1, 1))
        with pytest.raises(ValueError):
            otoc(h, psi, h, occupation_operator(basis, 0), np.array([0.0, 1.0]))


class TestOtocMultisector:
    def test_matches_block_embedding(self):
        # The sector-weighted average must equal the commutator norm on the
        # direct sum of the kept sectors, computed densely.
        params = LatticeParams(L=3, J=0.8, U=0.35)
        state = coherent_state([0.9, 0.6, 0.3], k_sigma=5.0)
        state, _ = state.restrict(1e-3)
        times = time_grid(3.0, 0.75)
        agg, per_sector, dropped = otoc_multisector(
            params, state, times, sites=(0, 1), tol=1e-11
        )
        blocks_h, blocks_v, blocks_w, chunks = [], [], [], []
        for N, comp in sorted(state.sectors.items()):
            blocks_h.append(assemble_hamiltonian(comp.basis, params).toarray())
            blocks_v.append(occupation_operator(comp.basis, 0).diagonal())
            blocks_w.append(occupation_operator(comp.basis, 1).diagonal())
            chunks.append(comp.amplitudes)
        h = sla.block_diag(*blocks_h)
        vd = np.concatenate(blocks_v)
        wd = np.concatenate(blocks_w)
        psi = np.concatenate(chunks)
        expect = dense_otoc(h, psi, vd, wd, times)
        np.testing.assert_allclose(agg.values, expect, atol=1e-9)
        assert set(per_sector) == set(state.sectors)

    def test_floor_reports_dropped_weight(self):
        params = LatticeParams(L=2, J=1.0, U=0.3)
        state = coherent_state([1.2, 0.9], k_sigma=6.0)
        raw = state.weights()
        floor = 0.05
        _, per_sector, dropped = otoc_multisector(
            params, state, np.array([0.0, 1.0]), weight_floor=floor, tol=1e-9
        )
        expect_drop = sum(w for w in raw.values() if w < floor)
        assert dropped == pytest.approx(expect_drop, rel=1e-9)
        assert set(per_sector) == {N for N, w in raw.items() if w >= floor}

    def test_threaded_matches_serial(self):
        params = LatticeParams(L=2, J=0.9, U=0.25)
        state = coherent_state([1.0, 0.8], k_sigma=5.0)
        state, _ = state.restrict(1e-2)
        times = time_grid(2.0, 0.5)
        a1, _, _ = otoc_multisector(params, state, times, tol=1e-10, threads=1)
        a2, _, _ = otoc_multisector(params, state, times, tol=1e-10, threads=2)
        np.testing.assert_allclose(a2.values, a1.values, atol=1e-12)
