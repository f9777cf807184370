"""Perron-Frobenius analysis of nonnegative matrices and matrix families.

The central objects are the P-F triple (rho, h, nu) of a single irreducible
matrix and the notion of a family of matrices *sharing* eigenvectors: all
members have the same left and right P-F eigenvectors while their eigenvalues
may differ.  Shared families admit closed-form long-run behavior, and products
of their normalized members are uniformly bounded by the eigenvector weight
ratio.  Constructors for shared families (from a stochastic matrix plus a
target eigenvector) and a commutation test are included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergenceError, NotStochasticError

DEFAULT_TOL = 1e-12
SHARING_TOL = 1e-8


def matrix_inf_norm(a: np.ndarray) -> float:
    """Max absolute row sum."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    return float(np.abs(a).sum(axis=1).max())


def is_irreducible(m: np.ndarray) -> bool:
    """True iff the digraph of nonzero entries is strongly connected.

    A 1x1 matrix counts as irreducible only when its entry is positive, so
    that the zero matrix is always reducible.
    """
    m = np.asarray(m)
    n = m.shape[0]
    if n == 1:
        return m[0, 0] > 0
    adj = m != 0

    def reaches_all(a):
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        frontier = [0]
        while frontier:
            nxt = a[frontier].any(axis=0) & ~seen
            seen |= nxt
            frontier = np.flatnonzero(nxt).tolist()
        return seen.all()

    return reaches_all(adj) and reaches_all(adj.T)


@dataclass(frozen=True)
class PFData:
    """P-F eigenvalue and eigenvectors, normalized nu'1 = 1 and nu'h = 1."""

    rho: float
    h: np.ndarray = field(repr=False)
    nu: np.ndarray = field(repr=False)
    residual_right: float
    residual_left: float


def pf_decompose(m: np.ndarray, tol: float = DEFAULT_TOL) -> PFData:
    """Power iteration for the P-F triple of an irreducible nonnegative matrix.

    Iterates on M + I so that periodic (but irreducible) matrices converge;
    the shift leaves eigenvectors untouched.  The eigenvalue comes from the
    two-sided Rayleigh quotient, accurate to roughly the square of the
    eigenvector residual.  Residuals are measured in the infinity norm and
    driven below ``tol * max(1, rho)``.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if not is_irreducible(m):
        raise ValueError("matrix is reducible")
    n = m.shape[0]
    if n == 1:
        one = np.ones(1)
        return PFData(rho=float(m[0, 0]), h=one, nu=one.copy(),
                      residual_right=0.0, residual_left=0.0)

    a = m + np.eye(n)
    h = np.full(n, 1.0 / n)
    nu = np.full(n, 1.0 / n)
    max_iters = max(100, int(math.ceil(100 * n * math.log(1.0 / tol))))
    for _ in range(max_iters):
        h = a @ h
        h /= h.sum()
        nu = nu @ a
        nu /= nu.sum()
        rho = float((nu @ m @ h) / (nu @ h))
        h_out = h / (nu @ h)
        res_r = float(np.max(np.abs(m @ h_out - rho * h_out)))
        res_l = float(np.max(np.abs(nu @ m - rho * nu)))
        if max(res_r, res_l) <= tol * max(1.0, abs(rho)):
            return PFData(rho=rho, h=h_out, nu=nu.copy(),
                          residual_right=res_r, residual_left=res_l)
    raise NoConvergenceError(max_iters)


def family_pf(family, tol: float = DEFAULT_TOL) -> dict[int, PFData]:
    """P-F data for every matrix in a MeanMatrixFamily, keyed by delay."""
    return {d: pf_decompose(mat, tol) for d, mat in family.items()}


@dataclass(frozen=True)
class SharedPFReport:
    shared: bool
    h: np.ndarray | None
    nu: np.ndarray | None
    per_delay_rho: dict[int, float]
    max_deviation: float
    tolerance: float


def shared_pf_check(family, tol: float = SHARING_TOL,
                    pf_tol: float = DEFAULT_TOL) -> SharedPFReport:
    """Decide whether all matrices in the family share P-F eigenvectors.

    Eigenvectors are compared after the nu'1 = 1, nu'h = 1 normalization; the
    family is shared when the worst infinity-norm discrepancy among the h_d
    and among the nu_d stays within ``tol``.  The reported common pair is the
    one computed at the smallest delay; no pair is reported when sharing
    fails.
    """
    pf = family_pf(family, pf_tol)
    base = family.delays[0]
    h0, nu0 = pf[base].h, pf[base].nu
    dev = 0.0
    for d in family.delays:
        dev = max(dev,
                  float(np.max(np.abs(pf[d].h - h0))),
                  float(np.max(np.abs(pf[d].nu - nu0))))
    shared = dev <= tol
    return SharedPFReport(
        shared=shared,
        h=h0 if shared else None,
        nu=nu0 if shared else None,
        per_delay_rho={d: pf[d].rho for d in family.delays},
        max_deviation=dev,
        tolerance=tol,
    )


def weight_ratio(v: np.ndarray) -> float:
    """max_i v_i / min_j v_j for a strictly positive vector; always >= 1."""
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise ValueError("vector must be strictly positive")
    return float(v.max() / v.min())


def normalized_word_product(family, word, pf: dict[int, PFData] | None = None) -> np.ndarray:
    """Product over the word (left to right) of rho_d^{-1} M_d.

    The empty word yields the identity.  When the family shares the right
    eigenvector h, the infinity norm of any such product is bounded by the
    weight ratio of h, irrespective of word length.
    """
    if pf is None:
        pf = family_pf(family)
    out = np.eye(family.n_types)
    for d in word:
        out = out @ (family.matrix(d) / pf[d].rho)
    return out


def _check_stochastic(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError("matrix must be square")
    if np.any(p < 0):
        raise ValueError("stochastic matrix must be nonnegative")
    sums = p.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > 1e-12)
    if bad.size:
        raise NotStochasticError(int(bad[0]), float(sums[bad[0]]))
    if not is_irreducible(p):
        raise ValueError("stochastic matrix must be irreducible")
    return p


def construct_shared_family(p: np.ndarray, h: np.ndarray, rhos: dict[int, float]):
    """Build a family sharing P-F eigenvectors from a stochastic matrix.

    M_d(i,j) = rho_d * P(i,j) * h(i)/h(j).  Every member then has right
    eigenvector h and left eigenvector proportional to pi(i)/h(i), where pi is
    the stationary distribution of P.
    """
    from .model import MeanMatrixFamily

    p = _check_stochastic(p)
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise ValueError("h must be strictly positive")
    ratio = h[:, None] / h[None, :]
    delays = tuple(sorted(int(d) for d in rhos))
    mats = []
    for d in delays:
        r = float(rhos[d])
        if r <= 0:
            raise ValueError(f"eigenvalue for delay {d} must be positive, got {r}")
        mats.append(r * p * ratio)
    return MeanMatrixFamily(delays, tuple(mats))


def construct_shared_family_reversed(p: np.ndarray, nu: np.ndarray, rhos: dict[int, float]):
    """Time-reversed variant pinning the left eigenvector instead.

    M_d(i,j) = rho_d * (nu(j)/nu(i)) * P(j,i); then nu' M_d = rho_d nu' for
    every stochastic P, and the right eigenvectors coincide across the family
    whenever a single P is used for all delays.
    """
    from .model import MeanMatrixFamily

    p = _check_stochastic(p)
    nu = np.asarray(nu, dtype=float)
    if np.any(nu <= 0):
        raise ValueError("nu must be strictly positive")
    ratio = nu[None, :] / nu[:, None]
    delays = tuple(sorted(int(d) for d in rhos))
    mats = []
    for d in delays:
        r = float(rhos[d])
        if r <= 0:
            raise ValueError(f"eigenvalue for delay {d} must be positive, got {r}")
        mats.append(r * ratio * p.T)
    return MeanMatrixFamily(delays, tuple(mats))


def commute_check(family, tol: float = 1e-10) -> bool:
    """True iff all pairs of family matrices commute within ``tol``
    (infinity norm of the commutator).  Commuting families always share
    P-F eigenvectors."""
    mats = list(family.matrices)
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            if matrix_inf_norm(mats[i] @ mats[j] - mats[j] @ mats[i]) > tol:
                return False
    return True
