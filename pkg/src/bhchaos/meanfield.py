"""Classical mean-field limit: nonlinear lattice wave dynamics.

Site amplitudes psi_j obey

    i dpsi_j/dt = (h psi)_j + U |psi_j|^2 psi_j,

where h is the single-particle hopping matrix (on-site energies on its
diagonal).  In canonical coordinates psi = (q + i p)/sqrt(2) this is a
Hamiltonian flow for

    H(q, p) = psi^dag h psi + (U/2) sum_j |psi_j|^4,

with dz/dt = Omega grad H, z = (q, p), Omega = [[0, I], [-I, 0]].  The
conserved total density is sum_j |psi_j|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .basis import LatticeParams
from .errors import NumericError

__all__ = [
    "hop_matrix",
    "energy",
    "density_total",
    "derivative",
    "real_coords",
    "complex_coords",
    "grad_energy",
    "hessian",
    "omega_matrix",
    "Trajectory",
    "evolve",
    "tangent_map",
    "fixed_point",
    "stability_exponents",
    "LyapunovEstimate",
    "lyapunov_benettin",
]


def hop_matrix(params: LatticeParams) -> np.ndarray:
    """Single-particle matrix: hopping on bonds, site energies on the diagonal."""
    L = params.L
    h = np.zeros((L, L), dtype=complex)
    amp = -params.J * np.exp(1j * params.phi)
    for j, k in params.bonds():
        h[j, k] += amp
        h[k, j] += np.conj(amp)
    h[np.diag_indices(L)] += np.asarray(params.eps, dtype=float)
    return h


def energy(params: LatticeParams, psi) -> float:
    psi = np.asarray(psi, dtype=complex)
    h = hop_matrix(params)
    quad = np.vdot(psi, h @ psi).real
    quart = 0.5 * params.U * float(np.sum(np.abs(psi) ** 4))
    return float(quad + quart)


def density_total(psi) -> float:
    return float(np.sum(np.abs(np.asarray(psi)) ** 2))


def derivative(params: LatticeParams, psi, h=None) -> np.ndarray:
    """dpsi/dt = -i (h psi + U |psi|^2 psi)."""
    psi = np.asarray(psi, dtype=complex)
    if h is None:
        h = hop_matrix(params)
    return -1j * (h @ psi + params.U * (np.abs(psi) ** 2) * psi)


def real_coords(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.concatenate([math.sqrt(2.0) * psi.real, math.sqrt(2.0) * psi.imag])


def complex_coords(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    L = len(z) // 2
    return (z[:L] + 1j * z[L:]) / math.sqrt(2.0)


def grad_energy(params: LatticeParams, z, h=None) -> np.ndarray:
    """Gradient of H in (q, p); equals sqrt(2) (Re F, Im F) with F = i dpsi/dt."""
    psi = complex_coords(z)
    if h is None:
        h = hop_matrix(params)
    F = h @ psi + params.U * (np.abs(psi) ** 2) * psi
    return np.concatenate([math.sqrt(2.0) * F.real, math.sqrt(2.0) * F.imag])


def hessian(params: LatticeParams, z, h=None) -> np.ndarray:
    """Second-derivative matrix of H at z, in (q, p) block order."""
    L = params.L
    z = np.asarray(z, dtype=float)
    q, p = z[:L], z[L:]
    if h is None:
        h = hop_matrix(params)
    hr, hi = h.real, h.imag
    out = np.block([[hr, -hi], [hi, hr]])
    U = params.U
    out[np.arange(L), np.arange(L)] += 0.5 * U * (3.0 * q**2 + p**2)
    out[np.arange(L, 2 * L), np.arange(L, 2 * L)] += 0.5 * U * (q**2 + 3.0 * p**2)
    out[np.arange(L), np.arange(L, 2 * L)] += U * q * p
    out[np.arange(L, 2 * L), np.arange(L)] += U * q * p
    return out


def omega_matrix(L: int) -> np.ndarray:
    eye = np.eye(L)
    zero = np.zeros((L, L))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass
class Trajectory:
    times: np.ndarray
    psi: np.ndarray  # (n_times, L) complex
    energy_drift: float
    density_drift: float
    monodromy: np.ndarray | None = None  # (n_times, 2L, 2L)
    action: np.ndarray | None = None  # (n_times,)
    extras: dict = field(default_factory=dict)


def _pack(z, M, a, with_tangent, with_action):
    parts = [z]
    if with_tangent:
        parts.append(M.ravel())
    if with_action:
        parts.append(np.array([a]))
    return np.concatenate(parts)


def evolve(
    params: LatticeParams,
    psi0,
    times,
    rtol: float = 1e-11,
    atol: float = 1e-12,
    with_tangent: bool = False,
    with_action: bool = False,
    max_step: float = np.inf,
) -> Trajectory:
    """Integrate the lattice wave equation on a grid of times (times[0] = 0).

    with_tangent also carries the 2L x 2L tangent map d z(t)/d z(0);
    with_action accumulates int (p . dq/dt - H) dt along the trajectory.
    """
    times = np.asarray(times, dtype=float)
    if times[0] != 0.0:
        raise ValueError("time grid must start at 0")
    psi0 = np.asarray(psi0, dtype=complex)
    L = params.L
    if len(psi0) != L:
        raise ValueError("initial state has wrong length")
    h = hop_matrix(params)
    n2 = 2 * L
    with_M = with_tangent

    def rhs(t, y):
        z = y[:n2]
        psi = complex_coords(z)
        F = h @ psi + params.U * (np.abs(psi) ** 2) * psi
        dz = np.concatenate([math.sqrt(2.0) * F.imag, -math.sqrt(2.0) * F.real])
        parts = [dz]
        if with_M:
            M = y[n2 : n2 + n2 * n2].reshape(n2, n2)
            hess = hessian(params, z, h=h)
            omega_hess = np.vstack([hess[L:], -hess[:L]])  # Omega @ hess
            parts.append((omega_hess @ M).ravel())
        if with_action:
            p = z[L:]
            dq = dz[:L]
            H = float(np.vdot(psi, h @ psi).real + 0.5 * params.U * np.sum(np.abs(psi) ** 4))
            parts.append(np.array([float(p @ dq) - H]))
        return np.concatenate(parts)

    z0 = real_coords(psi0)
    y0 = _pack(z0, np.eye(n2), 0.0, with_M, with_action)
    sol = solve_ivp(
        rhs,
        (0.0, float(times[-1])),
        y0,
        t_eval=times,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        max_step=max_step,
    )
    if not sol.success:
        raise NumericError(f"integration failed: {sol.message}")
    ys = sol.y.T
    psis = np.array([complex_coords(y[:n2]) for y in ys])
    e0 = energy(params, psi0)
    n0 = density_total(psi0)
    e_drift = max(abs(energy(params, p) - e0) for p in psis)
    n_drift = max(abs(density_total(p) - n0) for p in psis)
    monodromy = None
    action = None
    if with_M:
        monodromy = ys[:, n2 : n2 + n2 * n2].reshape(len(times), n2, n2)
    if with_action:
        action = ys[:, -1]
    return Trajectory(times, psis, float(e_drift), float(n_drift), monodromy, action)


def tangent_map(params: LatticeParams, psi0, t: float, rtol: float = 1e-11, atol: float = 1e-12):
    """Final state and tangent map after time t."""
    traj = evolve(params, psi0, np.array([0.0, float(t)]), rtol, atol, with_tangent=True)
    return traj.psi[-1], traj.monodromy[-1]


def fixed_point(
    params: LatticeParams,
    guess,
    density: float,
    max_iter: int = 60,
    grad_tol: float = 1e-12,
):
    """Stationary wave with sum |psi|^2 = density: solve grad H = mu z.

    Newton iteration on the extended system [grad H - mu z; |z|^2/2 - density]
    with a least-squares step, which quotients out the free global phase.
    Returns (psi, mu).
    """
    z = real_coords(np.asarray(guess, dtype=complex))
    h = hop_matrix(params)
    n2 = len(z)
    g = grad_energy(params, z, h=h)
    mu = float(z @ g) / max(float(z @ z), 1e-300)
    for _ in range(max_iter):
        g = grad_energy(params, z, h=h)
        res = np.concatenate([g - mu * z, [0.5 * float(z @ z) - density]])
        if np.linalg.norm(res[:-1]) <= grad_tol * max(1.0, abs(mu)) and abs(res[-1]) <= 1e-13 * max(
            1.0, density
        ):
            psi = complex_coords(z)
            return psi, mu
        jac = np.zeros((n2 + 1, n2 + 1))
        jac[:n2, :n2] = hessian(params, z, h=h) - mu * np.eye(n2)
        jac[:n2, n2] = -z
        jac[n2, :n2] = z
        step, *_ = np.linalg.lstsq(jac, -res, rcond=None)
        z = z + step[:n2]
        mu = mu + step[n2]
    raise NumericError("fixed-point search did not converge")


def stability_exponents(params: LatticeParams, psi, mu: float) -> np.ndarray:
    """Eigenvalues of the flow linearized about a stationary wave.

    In the co-rotating frame the linearization is Omega (Hess - mu I);
    purely imaginary pairs are stable, real/complex quartets unstable.
    """
    z = real_coords(np.asarray(psi, dtype=complex))
    L = params.L
    A = hessian(params, z) - mu * np.eye(2 * L)
    lin = np.vstack([A[L:], -A[:L]])  # Omega @ A
    return np.linalg.eigvals(lin)


@dataclass
class LyapunovEstimate:
    value: float
    error: float
    block_values: np.ndarray
    drift: float
    warnings: list = field(default_factory=list)


def lyapunov_benettin(
    params: LatticeParams,
    psi0,
    t_total: float,
    renorm_dt: float | None = None,
    n_blocks: int = 10,
    rtol: float = 1e-10,
    atol: float = 1e-11,
    seed: int | None = 0,
    drift_limit: float = 0.2,
) -> LyapunovEstimate:
    """Largest Lyapunov exponent by repeated tangent-vector renormalization.

    The interval is cut into n_blocks blocks; the estimate is the mean of
    per-block growth rates and the quoted error their standard error.  A
    drift warning compares the first- and second-half means.
    """
    if renorm_dt is None:
        renorm_dt = 0.5 / abs(params.J) if params.J != 0 else 0.5
    n_steps = max(n_blocks, int(round(t_total / renorm_dt)))
    n_steps -= n_steps % n_blocks  # equal-length blocks
    if n_steps == 0:
        raise ValueError("t_total too short for the requested blocks")
    dt = t_total / n_steps
    L = params.L
    n2 = 2 * L
    h = hop_matrix(params)
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(n2)
    w /= np.linalg.norm(w)
    z = real_coords(np.asarray(psi0, dtype=complex))

    def rhs(t, y):
        z = y[:n2]
        psi = complex_coords(z)
        F = h @ psi + params.U * (np.abs(psi) ** 2) * psi
        dz = np.concatenate([math.sqrt(2.0) * F.imag, -math.sqrt(2.0) * F.real])
        hess = hessian(params, z, h=h)
        dw = np.concatenate([hess[L:] @ y[n2:], -hess[:L] @ y[n2:]])
        return np.concatenate([dz, dw])

    logs = np.zeros(n_steps)
    for k in range(n_steps):
        sol = solve_ivp(rhs, (0.0, dt), np.concatenate([z, w]), method="DOP853", rtol=rtol, atol=atol)
        if not sol.success:
            raise NumericError(f"tangent integration failed: {sol.message}")
        y = sol.y[:, -1]
        z, w = y[:n2], y[n2:]
        growth = np.linalg.norm(w)
        if growth == 0.0 or not np.isfinite(growth):
            raise NumericError("tangent vector collapsed")
        logs[k] = math.log(growth)
        w /= growth

    per_block = logs.reshape(n_blocks, -1).sum(axis=1) / (t_total / n_blocks)
    value = float(per_block.mean())
    error = float(per_block.std(ddof=1) / math.sqrt(n_blocks)) if n_blocks > 1 else 0.0
    half = n_blocks // 2
    scale = max(abs(value), 10.0 * error, 1e-300)
    drift = abs(per_block[:half].mean() - per_block[half:].mean()) / scale
    warnings = []
    if drift > drift_limit:
        warnings.append(f"block means drift by {drift:.1%}; exponent may not be converged")
    return LyapunovEstimate(value, error, per_block, float(drift), warnings)
