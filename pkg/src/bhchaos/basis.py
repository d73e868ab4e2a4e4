"""Fixed-number Fock bases and sparse Bose-Hubbard operators.

Conventions used throughout the package: ``L`` is the number of lattice
sites, ``N`` the total particle number.  Basis states are occupation
vectors n = (n_0, ..., n_{L-1}) with sum N, enumerated in descending
lexicographic order, e.g. (L=2, N=2) -> |2,0>, |1,1>, |0,2>.  The order
is deterministic and stable across runs.

The Hamiltonian is

    H = -J sum_<j,k> (e^{i phi} b_j^dag b_k + h.c.)
        + (U/2) sum_j n_j (n_j - 1) + sum_j eps_j n_j

with <j,k> running over the bonds of a ring or open chain.  A ring with
L = 2 is normalized to a single bond so the edge is not counted twice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError

DEFAULT_BASIS_CAP = 5_000_000
MAX_SITE_OCCUPATION = 255  # occupations are stored as uint8


@dataclass(frozen=True)
class LatticeParams:
    """Lattice geometry and Hamiltonian couplings.

    phi is a uniform gauge (Peierls) phase attached to every bond in the
    positive direction; phi = 0 gives a real symmetric Hamiltonian and
    phi -> -phi is complex conjugation in the Fock basis.
    """

    L: int
    J: float = 1.0
    U: float = 0.0
    phi: float = 0.0
    eps: tuple[float, ...] = field(default=())
    geometry: str = "ring"

    def __post_init__(self):
        if self.L < 2:
            raise ValueError(f"need at least 2 sites, got L={self.L}")
        if self.geometry not in ("ring", "chain"):
            raise ValueError(f"unknown geometry {self.geometry!r}")
        eps = tuple(float(e) for e in self.eps) if len(self.eps) else (0.0,) * self.L
        if len(eps) != self.L:
            raise ValueError(f"eps has length {len(eps)}, expected {self.L}")
        object.__setattr__(self, "eps", eps)

    def bonds(self):
        """Ordered site pairs (j, k) carrying hopping -J e^{i phi} b_j^dag b_k."""
        pairs = [(j, j + 1) for j in range(self.L - 1)]
        if self.geometry == "ring" and self.L > 2:
            pairs.append((self.L - 1, 0))
        return pairs


class FockBasis:
    """All occupation vectors of N bosons on L sites.

    States are stored as a (dim, L) uint8 array; `index` maps an
    occupation vector back to its row by combinatorial ranking (constant
    arithmetic per site, no search).
    """

    def __init__(self, L, N, cap=DEFAULT_BASIS_CAP):
        if L < 1 or N < 0:
            raise ValueError(f"invalid sector L={L}, N={N}")
        if N > MAX_SITE_OCCUPATION:
            raise CapacityError(f"N={N} exceeds the uint8 occupation limit")
        dim = math.comb(N + L - 1, L - 1)
        if dim > cap:
            raise CapacityError(f"basis dimension {dim} exceeds cap {cap}")
        self.L = int(L)
        self.N = int(N)
        self.dim = dim
        self.states = _enumerate_states(L, N)
        # Pascal table for ranking: _binom[a, b] = C(a, b)
        self._binom = _pascal(N + L)

    def index(self, n) -> int:
        """Row of occupation vector n in `states`."""
        n = np.asarray(n, dtype=np.int64)
        rank = 0
        remaining = self.N
        for i in range(self.L - 1):
            gap = remaining - n[i]  # particles sitting to the right
            if gap > 0:
                rank += self._binom[gap - 1 + self.L - 1 - i, self.L - 1 - i]
            remaining = gap
        return int(rank)

    def index_many(self, ns) -> np.ndarray:
        """Vectorized `index` for an (M, L) array of occupation vectors."""
        ns = np.asarray(ns, dtype=np.int64)
        remaining = self.N - np.cumsum(ns[:, :-1], axis=1) + ns[:, :-1]
        gap = remaining - ns[:, :-1]  # (M, L-1)
        sites = self.L - 1 - np.arange(self.L - 1)
        rank = np.where(gap > 0, self._binom[gap - 1 + sites, sites], 0)
        return rank.sum(axis=1)

    def __len__(self):
        return self.dim

    def __repr__(self):
        return f"FockBasis(L={self.L}, N={self.N}, dim={self.dim})"


def _enumerate_states(L, N):
    if L == 1:
        return np.array([[N]], dtype=np.uint8)
    blocks = []
    for n0 in range(N, -1, -1):
        rest = _enumerate_states(L - 1, N - n0)
        head = np.full((rest.shape[0], 1), n0, dtype=np.uint8)
        blocks.append(np.hstack([head, rest]))
    return np.vstack(blocks)


def _pascal(n_max):
    c = np.zeros((n_max + 1, n_max + 1), dtype=np.int64)
    c[:, 0] = 1
    for a in range(1, n_max + 1):
        c[a, 1:] = c[a - 1, 1:] + c[a - 1, :-1]
    return c


def build_basis(L, N, cap=DEFAULT_BASIS_CAP) -> FockBasis:
    return FockBasis(L, N, cap=cap)


def diagonal_energies(basis: FockBasis, params: LatticeParams) -> np.ndarray:
    """(U/2) sum n(n-1) + sum eps*n for every basis state."""
    n = basis.states.astype(np.float64)
    return 0.5 * params.U * np.sum(n * (n - 1.0), axis=1) + n @ np.asarray(params.eps)


def assemble_hamiltonian(basis: FockBasis, params: LatticeParams):
    """Sparse sector Hamiltonian.

    Returns a CSR matrix, real for phi = 0 and complex otherwise.  Each
    row has at most 2L + 1 nonzeros (hops along each bond in both
    directions plus the diagonal).
    """
    if basis.L != params.L:
        raise ValueError(f"basis has L={basis.L}, params have L={params.L}")
    dim = basis.dim
    occ = basis.states.astype(np.int64)
    diag = diagonal_energies(basis, params)

    rows = [np.arange(dim)]
    cols = [np.arange(dim)]
    vals = [diag.astype(np.complex128)]
    amp = -params.J * np.exp(1j * params.phi)
    for (j, k) in params.bonds():
        movable = np.nonzero(occ[:, j] > 0)[0]
        if movable.size == 0:
            continue
        target = occ[movable].copy()
        target[:, j] -= 1
        target[:, k] += 1
        partner = basis.index_many(target)
        # <n| H |n'> with n' = n - e_j + e_k
        v = amp * np.sqrt(occ[movable, j] * (occ[movable, k] + 1.0))
        rows.append(movable)
        cols.append(partner)
        vals.append(v)
        rows.append(partner)
        cols.append(movable)
        vals.append(v.conj())

    h = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    ).tocsr()
    if params.phi == 0.0:
        h = h.real
    return h


def occupation_operator(basis: FockBasis, site: int):
    """Diagonal sparse matrix of n_site."""
    if not 0 <= site < basis.L:
        raise ValueError(f"site {site} out of range for L={basis.L}")
    return sp.diags(basis.states[:, site].astype(np.float64)).tocsr()


def apply(op, v):
    """Sparse matrix-vector product with a shape check."""
    v = np.asarray(v)
    if op.shape[1] != v.shape[0]:
        raise ValueError(f"shape mismatch: {op.shape} @ {v.shape}")
    return op @ v
