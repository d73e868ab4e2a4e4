"""Product coherent states spread over fixed-number sectors.

A coherent state with site amplitudes b_j has Fock amplitudes

    <n|b> = e^{-Nbar/2} prod_j b_j^{n_j} / sqrt(n_j!),   Nbar = sum |b_j|^2.

Only total-number sectors N within Nbar +- k*sigma (sigma = sqrt(Nbar))
are kept; the truncated weight is reported and, by default, the kept
amplitudes are rescaled so the state is exactly normalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import DEFAULT_BASIS_CAP, FockBasis, build_basis
from .errors import NumericError

TRUNCATION_WARN = 1e-6
TRUNCATION_ERROR = 1e-3


@dataclass
class SectorComponent:
    basis: FockBasis
    amplitudes: np.ndarray  # carries the sector weight: ||amplitudes||^2 = w_N


@dataclass
class MultiSectorState:
    center: np.ndarray
    nbar: float
    sectors: dict[int, SectorComponent]
    truncated_weight: float
    status: str  # "ok" or "warning"

    def weights(self) -> dict[int, float]:
        return {N: float(np.vdot(c.amplitudes, c.amplitudes).real) for N, c in self.sectors.items()}

    def total_norm_sq(self) -> float:
        return float(sum(self.weights().values()))

    def restrict(self, weight_floor: float, renormalize: bool = True):
        """Drop sectors with weight below weight_floor.

        Returns (restricted state, dropped weight).  With renormalize the
        kept amplitudes are rescaled to unit total norm, which is how the
        sector-weighted averages downstream stay properly normalized.
        """
        w = self.weights()
        kept = {N: c for N, c in self.sectors.items() if w[N] >= weight_floor}
        if not kept:
            raise NumericError("weight floor removed every sector")
        dropped = sum(wN for N, wN in w.items() if N not in kept)
        total = sum(w[N] for N in kept)
        scale = 1.0 / math.sqrt(total) if renormalize else 1.0
        sectors = {
            N: SectorComponent(c.basis, c.amplitudes * scale) for N, c in sorted(kept.items())
        }
        return (
            MultiSectorState(self.center, self.nbar, sectors, self.truncated_weight + dropped, self.status),
            float(dropped),
        )


def coherent_state(
    b,
    k_sigma: float = 5.0,
    cap: int = DEFAULT_BASIS_CAP,
    renormalize: bool = True,
    warn_weight: float = TRUNCATION_WARN,
    error_weight: float = TRUNCATION_ERROR,
) -> MultiSectorState:
    b = np.asarray(b, dtype=complex)
    L = len(b)
    nbar = float(np.sum(np.abs(b) ** 2))
    if not nbar > 0:
        raise ValueError("coherent center must carry particles (sum |b_j|^2 > 0)")
    sigma = math.sqrt(nbar)
    n_lo = max(0, math.ceil(nbar - k_sigma * sigma))
    n_hi = math.floor(nbar + k_sigma * sigma)

    # per-site ladder ratios r[j, n] = b_j^n / sqrt(n!), built stably by recursion
    r = np.zeros((L, n_hi + 1), dtype=complex)
    r[:, 0] = 1.0
    for n in range(1, n_hi + 1):
        r[:, n] = r[:, n - 1] * b / math.sqrt(n)

    prefactor = math.exp(-0.5 * nbar)
    sectors = {}
    kept_weight = 0.0
    site_idx = np.arange(L)
    for N in range(n_lo, n_hi + 1):
        basis = build_basis(L, N, cap=cap)
        amps = prefactor * np.prod(r[site_idx[None, :], basis.states.astype(np.intp)], axis=1)
        wN = float(np.vdot(amps, amps).real)
        if wN == 0.0:
            continue
        sectors[N] = SectorComponent(basis, amps)
        kept_weight += wN

    truncated = max(0.0, 1.0 - kept_weight)
    if truncated > error_weight:
        raise NumericError(
            f"coherent-state truncation lost weight {truncated:.3e} (> {error_weight:.0e}); widen k_sigma"
        )
    status = "warning" if truncated > warn_weight else "ok"
    if renormalize and kept_weight > 0:
        scale = 1.0 / math.sqrt(kept_weight)
        for c in sectors.values():
            c.amplitudes = c.amplitudes * scale
    return MultiSectorState(b, nbar, sectors, truncated, status)


def fock_state(basis: FockBasis, occupations) -> np.ndarray:
    """Unit vector on one Fock basis state."""
    occ = tuple(int(n) for n in occupations)
    if len(occ) != basis.L:
        raise ValueError(f"expected {basis.L} occupations, got {len(occ)}")
    if any(n < 0 for n in occ) or sum(occ) != basis.N:
        raise ValueError(f"occupations {occ} do not hold {basis.N} particles")
    v = np.zeros(basis.dim, dtype=complex)
    v[basis.index(occ)] = 1.0
    return v
