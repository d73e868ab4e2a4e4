"""Tests for coherent-state construction over particle-number sectors."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bhchaos.basis import build_basis
from bhchaos.errors import CapacityError, NumericError
from bhchaos.states import coherent_state, fock_state


def poisson_weight(nbar, n):
    return math.exp(-nbar) * nbar**n / math.factorial(n)


class TestCoherentAmplitudes:
    def test_two_site_example_amplitude(self):
        # b = (sqrt(2), 0): amplitude on |2,0> is e^{-1} * sqrt(2)^2/sqrt(2!)
        # = sqrt(2) e^{-1} ~= 0.5203.
        state = coherent_state([math.sqrt(2.0), 0.0], renormalize=False)
        comp = state.sectors[2]
        amp = comp.amplitudes[comp.basis.index((2, 0))]
        assert amp == pytest.approx(math.sqrt(2.0) * math.exp(-1.0), rel=1e-12)

    def test_amplitudes_match_closed_form(self):
        b = [1.2, -0.7, 0.4]
        nbar = sum(abs(x) ** 2 for x in b)
        state = coherent_state(b, k_sigma=8.0, renormalize=False)
        comp = state.sectors[3]
        for i, occ in enumerate(comp.basis.states):
            expect = math.exp(-nbar / 2.0)
            for j, n in enumerate(occ):
                expect *= b[j] ** int(n) / math.sqrt(math.factorial(int(n)))
            assert comp.amplitudes[i] == pytest.approx(expect, abs=1e-12)

    def test_complex_amplitudes(self):
        b = [0.9 * np.exp(0.3j), 0.5]
        state = coherent_state(b, k_sigma=8.0, renormalize=False)
        comp = state.sectors[2]
        idx = comp.basis.index((1, 1))
        expect = math.exp(-state.nbar / 2.0) * b[0] * b[1]
        assert comp.amplitudes[idx] == pytest.approx(expect, abs=1e-12)

    def test_sector_weights_are_poissonian(self):
        b = [1.1, 0.6, -0.3, 0.2]
        nbar = sum(abs(x) ** 2 for x in b)
        state = coherent_state(b, k_sigma=6.0, renormalize=False)
        for N, w in state.weights().items():
            assert w == pytest.approx(poisson_weight(nbar, N), rel=1e-9)

    def test_renormalization_scales_uniformly(self):
        b = [1.4, 0.9]
        raw = coherent_state(b, k_sigma=4.0, renormalize=False, error_weight=0.5)
        scaled = coherent_state(b, k_sigma=4.0, renormalize=True, error_weight=0.5)
        assert scaled.total_norm_sq() == pytest.approx(1.0, abs=1e-12)
        ratio = None
        for N, comp in scaled.sectors.items():
            r = comp.amplitudes[0] / raw.sectors[N].amplitudes[0]
            if ratio is None:
                ratio = r
            assert r == pytest.approx(ratio, rel=1e-12)


class TestWindowAndTruncation:
    def test_truncated_weight_shrinks_with_window(self):
        b = [2.0, 1.0]
        truncs = []
        for k in (2.0, 4.0, 6.0, 10.0):
            state = coherent_state(b, k_sigma=k, error_weight=0.5)
            truncs.append(state.truncated_weight)
        assert truncs == sorted(truncs, reverse=True)
        assert truncs[-1] < 1e-10

    def test_renormalized_weights_sum_to_one(self):
        state = coherent_state([1.0, 0.5, 0.5], k_sigma=4.0, error_weight=0.5)
        assert sum(state.weights().values()) == pytest.approx(1.0, abs=1e-12)

    def test_warning_status_on_moderate_truncation(self):
        state = coherent_state([3.0, 0.0], k_sigma=3.3, error_weight=1e-2)
        assert 1e-6 < state.truncated_weight < 1e-2
        assert state.status == "warning"

    def test_ok_status_on_wide_window(self):
        state = coherent_state([1.0, 1.0], k_sigma=8.0)
        assert state.status == "ok"
        assert state.truncated_weight < 1e-6

    def test_error_on_heavy_truncation(self):
        with pytest.raises(NumericError):
            coherent_state([3.0, 1.0], k_sigma=1.0)

    def test_capacity_error_on_huge_sector(self):
        with pytest.raises(CapacityError):
            coherent_state([math.sqrt(75.0)] * 6, cap=10**6)

    def test_unnormalized_total_complements_truncation(self):
        b = [1.5, 0.5]
        state = coherent_state(b, k_sigma=3.0, renormalize=False, error_weight=0.5)
        assert state.total_norm_sq() == pytest.approx(
            1.0 - state.truncated_weight, abs=1e-12
        )

    @given(
        nbar=st.floats(min_value=0.5, max_value=12.0),
        k=st.floats(min_value=4.0, max_value=8.0),
    )
    @settings(max_examples=20, deadline=None)
    def test_window_covers_k_sigma(self, nbar, k):
        state = coherent_state([math.sqrt(nbar)], k_sigma=k, error_weight=0.999)
        kept = sorted(state.sectors)
        sigma = math.sqrt(nbar)
        assert kept[0] <= max(0, math.floor(nbar - k * sigma)) + 1
        assert kept[-1] >= nbar + k * sigma - 1


class TestRestrict:
    def test_restrict_drops_and_renormalizes(self):
        state = coherent_state([2.0, 1.0], k_sigma=6.0)
        floor = 0.02
        raw = state.weights()
        restricted, dropped = state.restrict(floor)
        kept = restricted.weights()
        assert set(kept) == {N for N, w in raw.items() if w >= floor}
        assert sum(kept.values()) == pytest.approx(1.0, abs=1e-12)
        expected_drop = sum(w for w in raw.values() if w < floor)
        assert dropped == pytest.approx(expected_drop, rel=1e-9)

    def test_restrict_zero_floor_is_identity(self):
        state = coherent_state([1.0, 1.0], k_sigma=5.0)
        restricted, dropped = state.restrict(0.0)
        assert dropped == 0.0
        assert len(restricted.sectors) == len(state.sectors)

    def test_restrict_without_renormalize(self):
        state = coherent_state([2.0, 1.0], k_sigma=6.0)
        raw = state.weights()
        restricted, dropped = state.restrict(0.05, renormalize=False)
        for N, w in restricted.weights().items():
            assert w == pytest.approx(raw[N], rel=1e-12)

    def test_restrict_everything_raises(self):
        state = coherent_state([1.0, 1.0], k_sigma=5.0)
        with pytest.raises(NumericError):
            state.restrict(2.0)


class TestFockState:
    def test_fock_state_is_basis_vector(self):
        basis = build_basis(3, 4)
        vec = fock_state(basis, (2, 1, 1))
        assert vec.shape == (basis.dim,)
        assert vec[basis.index((2, 1, 1))] == 1.0
        assert np.count_nonzero(vec) == 1

    def test_fock_state_rejects_wrong_total(self):
        basis = build_basis(3, 4)
        with pytest.raises(ValueError):
            fock_state(basis, (2, 1, 0))

    def test_fock_state_rejects_wrong_length(self):
        basis = build_basis(3, 4)
        with pytest.raises(ValueError):
            fock_state(basis, (2, 2))
