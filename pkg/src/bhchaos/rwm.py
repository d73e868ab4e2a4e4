"""Eigenvector-amplitude statistics in Fock space.

Windowed covariance of eigenstate amplitudes, two ways:

  * exact: R_{nm} = sum_j W_eta(E_j - E) <n|psi_j><psi_j|m> / sum_j W_eta(E_j - E)

  * semiclassical: a winding sum of Bessel-function products over bond
    currents, integrated against the window's Fourier transform,

      R_nm = (1/rho_cl) sum_Q int dtau/2pi  Wt(tau) e^{i tau (E - Ed(I))}
             prod_alpha  i^{(delta_alpha+Q)} J_{delta_alpha+Q}(2 J tau sqrt(I_alpha I_{alpha+1}))

    with I = (n+m)/2 midpoint occupations (ring-closed), delta the
    cumulative occupation difference, and Ed the diagonal energy function
    evaluated on midpoints.  Ed is configurable; the default is the
    Hamiltonian's own diagonal, which the J -> 0 limit singles out.

Plus: classical density of states on the fixed-number sphere, normalized
correlators, Gaussian (Wick) functional averages, and an ensemble sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import jv

from .basis import FockBasis, LatticeParams
from .errors import NumericError

__all__ = [
    "SpectralWindow",
    "fourier_pair_defect",
    "CovarianceMatrix",
    "exact_covariance",
    "DosEstimate",
    "classical_dos",
    "semiclassical_covariance",
    "semiclassical_entry",
    "normalized_correlator",
    "gaussian_average",
    "sample_amplitudes",
]


@dataclass(frozen=True)
class SpectralWindow:
    """Gaussian energy window of half-width eta centered at E."""

    center: float
    eta: float

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("window width must be positive")

    def value(self, x):
        """W(x) = exp(-x^2 / (2 eta^2)) as a function of distance from center."""
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * (x / self.eta) ** 2)

    def weight(self, energies):
        return self.value(np.asarray(energies, dtype=float) - self.center)

    def fourier(self, tau):
        """Wt(tau) = integral W(x) e^{-i x tau} dx = sqrt(2 pi) eta exp(-eta^2 tau^2/2)."""
        tau = np.asarray(tau, dtype=float)
        return math.sqrt(2.0 * math.pi) * self.eta * np.exp(-0.5 * (self.eta * tau) ** 2)


def fourier_pair_defect(window: SpectralWindow, x_grid=None, n_nodes: int = 400) -> float:
    """Max deviation of the inverse transform of Wt from W on a test grid."""
    if x_grid is None:
        x_grid = np.linspace(-5.0, 5.0, 41) * window.eta
    x_grid = np.asarray(x_grid, dtype=float)
    tau_max = 8.5 / window.eta
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    tau = 0.5 * tau_max * (nodes + 1.0)
    w = 0.5 * tau_max * weights
    wt = window.fourier(tau)
    # W(x) = (1/pi) int_0^inf Wt(tau) cos(x tau) dtau
    recon = (np.cos(np.outer(x_grid, tau)) * (wt * w)).sum(axis=1) / math.pi
    return float(np.max(np.abs(recon - window.value(x_grid))))


# ---------------------------------------------------------------------------
# exact covariance


@dataclass
class CovarianceMatrix:
    states: np.ndarray  # (S, L) occupation vectors
    matrix: np.ndarray  # (S, S)
    provenance: str  # "exact" | "semiclassical"
    window: SpectralWindow
    meta: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


def exact_covariance(spectrum, window: SpectralWindow, states, basis: FockBasis) -> CovarianceMatrix:
    """Windowed eigenvector covariance over the given Fock states.

    Normalized by the total window weight, so the full-basis trace is 1.
    States with |E_j - E| <= eta count as inside the window; fewer than 50
    is recorded as a warning.
    """
    if spectrum.vectors is None:
        raise ValueError("need eigenvectors")
    states = np.asarray(states)
    idx = basis.index_many(states)
    w = window.weight(spectrum.energies)
    total = float(w.sum())
    if total <= 0.0:
        raise NumericError("window carries no spectral weight")
    inside = int(np.sum(np.abs(spectrum.energies - window.center) <= window.eta))
    warnings = []
    if inside < 50:
        warnings.append(f"only {inside} eigenstates inside the window half-width")
    V = spectrum.vectors[idx, :]
    R = (V * w) @ V.conj().T / total
    return CovarianceMatrix(
        states=states,
        matrix=R,
        provenance="exact",
        window=window,
        meta={"inside": inside, "weight_total": total},
        warnings=warnings,
    )


# ---------------------------------------------------------------------------
# classical density of states


@dataclass
class DosEstimate:
    value: float
    stderr: float
    n_samples: int


def classical_dos(
    params: LatticeParams,
    N: float,
    window: SpectralWindow,
    n_mc: int = 100_000,
    seed: int = 0,
    batch: int = 20_000,
) -> DosEstimate:
    """Monte Carlo window weight over the fixed-density sphere sum |psi|^2 = N."""
    if n_mc < 10_000:
        raise ValueError("need at least 1e4 samples")
    rng = np.random.default_rng(seed)
    L = params.L
    from .meanfield import hop_matrix

    h = hop_matrix(params)
    total = 0.0
    total2 = 0.0
    done = 0
    while done < n_mc:
        m = min(batch, n_mc - done)
        z = rng.standard_normal((m, L)) + 1j * rng.standard_normal((m, L))
        z *= (math.sqrt(N) / np.linalg.norm(z, axis=1))[:, None]
        quad = np.einsum("ij,jk,ik->i", z.conj(), h, z).real
        quart = 0.5 * params.U * np.sum(np.abs(z) ** 4, axis=1)
        vals = window.weight(quad + quart)
        total += vals.sum()
        total2 += (vals**2).sum()
        done += m
    mean = total / n_mc
    var = max(total2 / n_mc - mean**2, 0.0)
    return DosEstimate(float(mean), float(math.sqrt(var / n_mc)), n_mc)


# ---------------------------------------------------------------------------
# semiclassical covariance


def default_diagonal_energy(params: LatticeParams):
    """Diagonal energy on (possibly half-integer) occupations: the
    Hamiltonian's own diagonal continued to midpoints."""

    eps = np.asarray(params.eps, dtype=float)

    def f(I):
        return 0.5 * params.U * np.sum(I * (I - 1.0), axis=-1) + I @ eps

    return f


def _check_ring(params: LatticeParams):
    if params.geometry != "ring" or params.L < 3:
        raise ValueError("winding-sum covariance needs a ring of at least 3 sites")
    if params.phi != 0.0:
        raise ValueError("winding-sum covariance assumes zero gauge phase")


def _check_states(states, L):
    states = np.asarray(states, dtype=float)
    if states.ndim != 2 or states.shape[1] != L:
        raise ValueError("states must be (n_states, L)")
    totals = states.sum(axis=1)
    if np.max(np.abs(totals - totals[0])) > 1e-9:
        raise ValueError("all states must share the same total particle number")
    return states


def _pair_terms(
    na: np.ndarray,
    ma: np.ndarray,
    E: float,
    params: LatticeParams,
    window: SpectralWindow,
    diagonal_energy,
    q_values,
    tau: np.ndarray,
    wq: np.ndarray,
    chunk: int = 2048,
):
    """Winding-sum integrals for explicit state pairs (na[i], ma[i]).

    Returns (values, tail) where tail holds the |Q| beyond-truncation
    contributions used for the convergence estimate.
    """
    L = params.L
    P = na.shape[0]
    diff = na - ma
    delta = np.cumsum(diff, axis=1).astype(int)
    I = 0.5 * (na + ma)
    Iw = np.concatenate([I, I[:, :1]], axis=1)
    c = 2.0 * abs(params.J) * np.sqrt(Iw[:, :-1] * Iw[:, 1:])
    D = delta.sum(axis=1)
    dE = E - np.atleast_1d(diagonal_energy(I))

    # Bessel lookup table over unique scaled arguments
    cu, cinv = np.unique(np.round(c, 12), return_inverse=True)
    cinv = cinv.reshape(c.shape)
    q_arr = np.asarray([q for q, _ in q_values])
    omax = int(np.max(np.abs(delta[..., None] + q_arr))) if P else 0
    orders = np.arange(omax + 1)
    table = jv(orders[:, None, None], cu[None, :, None] * tau[None, None, :])

    wt = window.fourier(tau) * wq  # quadrature weight times window transform

    main = np.zeros(P)
    tail = np.zeros(P)
    for start in range(0, P, chunk):
        sl = slice(start, min(start + chunk, P))
        cosm = np.cos(np.outer(dE[sl], tau))
        sinm = np.sin(np.outer(dE[sl], tau))
        d_sl = delta[sl]
        ci_sl = cinv[sl]
        D_sl = D[sl]
        for q, is_tail in q_values:
            o = d_sl + q
            oa = np.abs(o)
            sgn = np.where((o < 0) & (oa % 2 == 1), -1.0, 1.0).prod(axis=1)
            prod = table[oa, ci_sl, :].prod(axis=1)  # (chunk, K)
            m4 = (D_sl + L * q) % 4
            cosI = (prod * cosm) @ wt / math.pi
            sinI = (prod * sinm) @ wt / math.pi
            even = m4 % 2 == 0
            term = np.where(
                even,
                np.where(m4 == 0, 1.0, -1.0) * cosI,
                np.where(m4 == 1, -1.0, 1.0) * sinI,
            )
            term = sgn * term
            if is_tail:
                tail[sl] += term  # signed: exactly the q_max -> q_max+2 change
            else:
                main[sl] += term
    return main, tail


def _winding_values(q_max: int):
    qs = [(q, False) for q in range(-q_max, q_max + 1)]
    qs += [(q, True) for q in (q_max + 1, q_max + 2, -(q_max + 1), -(q_max + 2))]
    return qs


def _eval_adaptive(na, ma, E, params, window, diagonal_energy, q_max, n_nodes, max_nodes, conv_tol):
    q_values = _winding_values(q_max)
    K = n_nodes
    prev = None
    while True:
        nodes, weights = np.polynomial.legendre.leggauss(K)
        tau_max = 8.03 / window.eta
        tau = 0.5 * tau_max * (nodes + 1.0)
        wq = 0.5 * tau_max * weights
        vals, tail = _pair_terms(na, ma, E, params, window, diagonal_energy, q_values, tau, wq)
        if prev is not None:
            ref = max(float(np.max(np.abs(vals))), 1e-300)
            if float(np.max(np.abs(vals - prev))) <= conv_tol * ref:
                return vals, tail, K, ref
        prev = vals
        K *= 2
        if K > max_nodes:
            raise NumericError(f"quadrature did not converge below {conv_tol} within {max_nodes} nodes")


def semiclassical_covariance(
    states,
    E: float,
    params: LatticeParams,
    window: SpectralWindow,
    q_max: int = 12,
    rho_cl: float | None = None,
    diagonal_energy=None,
    n_nodes: int = 64,
    max_nodes: int = 4096,
    conv_tol: float = 1e-8,
    dos_mc: int = 100_000,
    seed: int = 0,
) -> CovarianceMatrix:
    """Bessel-product covariance over all pairs of the given Fock states.

    rho_cl = None normalizes by dim * classical_dos (the semiclassical
    window count); pass a number to override (e.g. the exact windowed count
    for diagnostic comparison).  Raises when the winding sum has not
    converged at q_max or the quadrature fails to settle.
    """
    _check_ring(params)
    states = _check_states(states, params.L)
    S = len(states)
    if diagonal_energy is None:
        diagonal_energy = default_diagonal_energy(params)
    iu, ju = np.triu_indices(S)
    na, ma = states[iu], states[ju]
    vals, tail, K, ref = _eval_adaptive(
        na, ma, E, params, window, diagonal_energy, q_max, n_nodes, max_nodes, conv_tol
    )
    tail_max = float(np.max(np.abs(tail))) if len(tail) else 0.0
    if tail_max > conv_tol * max(ref, 1e-300):
        raise NumericError(
            f"winding sum not converged at q_max={q_max}: tail {tail_max:.2e} vs scale {ref:.2e}"
        )
    if rho_cl is None:
        N = float(np.round(states[0].sum()))
        dim = math.comb(int(N) + params.L - 1, params.L - 1)
        dos = classical_dos(params, N, window, n_mc=dos_mc, seed=seed)
        if dos.value <= 0.0:
            raise NumericError("window has no classical support")
        rho_cl = dim * dos.value
    R = np.zeros((S, S))
    R[iu, ju] = vals / rho_cl
    R[ju, iu] = R[iu, ju]
    return CovarianceMatrix(
        states=states,
        matrix=R,
        provenance="semiclassical",
        window=window,
        meta={"q_max": q_max, "n_nodes": K, "tail_max": tail_max, "rho_cl": rho_cl},
    )


def semiclassical_entry(
    n,
    m,
    E: float,
    params: LatticeParams,
    window: SpectralWindow,
    q_max: int = 12,
    rho_cl: float = 1.0,
    diagonal_energy=None,
    n_nodes: int = 64,
    max_nodes: int = 4096,
    conv_tol: float = 1e-8,
) -> float:
    """Single covariance entry; rho_cl defaults to 1 (unnormalized)."""
    _check_ring(params)
    n = np.asarray(n, dtype=float)[None, :]
    m = np.asarray(m, dtype=float)[None, :]
    if n.shape != m.shape or n.shape[1] != params.L:
        raise ValueError("occupation vectors must both have length L")
    if abs(n.sum() - m.sum()) > 1e-9:
        raise ValueError("states must share the total particle number")
    if diagonal_energy is None:
        diagonal_energy = default_diagonal_energy(params)
    vals, tail, K, ref = _eval_adaptive(
        n, m, E, params, window, diagonal_energy, q_max, n_nodes, max_nodes, conv_tol
    )
    # unnormalized integrals are bounded by W(0) = 1, the natural scale
    scale = max(abs(float(vals[0])), 1.0)
    if abs(float(tail[0])) > conv_tol * scale:
        raise NumericError(f"winding sum not converged at q_max={q_max}")
    return float(vals[0]) / rho_cl


# ---------------------------------------------------------------------------
# derived quantities


def normalized_correlator(cov: CovarianceMatrix):
    """R_nm / sqrt(R_nn R_mm); diagonal exactly 1.

    Exact-provenance magnitudes obey the Cauchy-Schwarz bound; semiclassical
    entries may exceed 1 slightly and are flagged, never clipped.
    """
    R = cov.matrix
    d = np.real(np.diag(R)).copy()
    if np.any(d <= 0):
        raise NumericError("covariance diagonal must be strictly positive")
    s = 1.0 / np.sqrt(d)
    out = R * np.outer(s, s)
    np.fill_diagonal(out, 1.0)
    overshoot = float(np.max(np.abs(out)))
    warnings = list(cov.warnings)
    if overshoot > 1.0 + 1e-10:
        if cov.provenance == "exact":
            raise NumericError(f"exact correlator breaks the Schwarz bound: {overshoot}")
        warnings.append(f"semiclassical correlator magnitude up to {overshoot:.4f} exceeds 1")
    return out, warnings


def gaussian_average(cov: CovarianceMatrix, bra, ket):
    """Wick average E[prod_a z_a * prod_c conj(z_c)] for the zero-mean
    complex Gaussian with covariance R (degree <= 4).

    bra and ket are index lists into cov.states; odd totals give 0 exactly,
    higher degrees are out of scope.
    """
    bra = list(bra)
    ket = list(ket)
    deg = len(bra) + len(ket)
    if deg > 4:
        raise ValueError("only monomials up to degree 4 are supported")
    if len(bra) != len(ket):
        return 0.0  # odd or unbalanced monomials vanish for circular Gaussians
    R = cov.matrix
    if len(bra) == 0:
        return 1.0
    if len(bra) == 1:
        return complex(R[bra[0], ket[0]])
    (a, b), (c, d) = bra, ket
    return complex(R[a, c] * R[b, d] + R[a, d] * R[b, c])


def sample_amplitudes(cov: CovarianceMatrix, n_samples: int, seed: int = 0) -> np.ndarray:
    """Draws z ~ CN(0, R): (n_samples, S) complex array."""
    R = cov.matrix
    s, V = np.linalg.eigh(0.5 * (R + R.conj().T))
    s = np.clip(s, 0.0, None)
    A = V * np.sqrt(s)
    rng = np.random.default_rng(seed)
    S = R.shape[0]
    xi = math.sqrt(0.5) * (rng.standard_normal((n_samples, S)) + 1j * rng.standard_normal((n_samples, S)))
    return xi @ A.T  # E[z_a conj(z_b)] = (A A^dag)_{ab} = R_{ab}


def window_count(spectrum, window: SpectralWindow) -> int:
    """Eigenvalues within one half-width of the window center."""
    return int(np.sum(np.abs(spectrum.energies - window.center) <= window.eta))
