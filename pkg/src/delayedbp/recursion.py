"""Exact mean evolution of the incidence, symptomatic and asymptomatic counts.

Everything here is driven by one linear recursion: a mean vector at time s is
a source term plus the sum over delays d of the vector at s-d pushed through
M_d.  The three processes differ only in their source:

* incidence X:     E[X(0)] at s = 0, nothing afterwards;
* symptomatic Z:   E[X(0)] * P(L > s) at every s;
* asymptomatic Y:  E[X(0)] * P(L = 0) on the window 0 <= s <= D.

Geometrically weighted versions (multiplied by exp(-theta*s)) are evolved
with their own recursion rather than rescaled after the fact, which keeps
long supercritical or subcritical horizons inside floating-point range.
The kernel Xi(s) collects the same dynamics as a matrix so that
E[X(s)]' = E[X(0)]' Xi(s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDenominatorError, HorizonTooLargeError, NotSharedError
from .malthusian import MalthusianSolution, mixture_matrix, solve_malthusian
from .spectral import pf_decompose, shared_pf_check

OVERFLOW_LIMIT = 1e300


@dataclass(frozen=True)
class MeanTrajectory:
    """Time-indexed mean vectors, raw and geometrically weighted.

    Row s of each array holds the corresponding vector at time s; vectors at
    negative times are zero by convention.
    """

    horizon: int
    theta: float
    ex: np.ndarray = field(repr=False)
    ez: np.ndarray = field(repr=False)
    ey: np.ndarray = field(repr=False)
    wx: np.ndarray = field(repr=False)
    wz: np.ndarray = field(repr=False)
    wy: np.ndarray = field(repr=False)


def evolve_means(model, family, horizon: int, mal: MalthusianSolution | None = None) -> MeanTrajectory:
    """Run the mean recursions up to ``horizon``.

    Raises HorizonTooLargeError as soon as any entry exceeds 1e300.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    if mal is None:
        mal = solve_malthusian(family)
    theta = mal.theta
    n = family.n_types
    D = family.max_delay
    lt = model.lifetime
    x0 = model.initial_mean_vector()
    p0 = lt.prob(0)

    S = horizon
    ex = np.zeros((S + 1, n))
    ez = np.zeros((S + 1, n))
    ey = np.zeros((S + 1, n))
    wx = np.zeros((S + 1, n))
    wz = np.zeros((S + 1, n))
    wy = np.zeros((S + 1, n))

    weighted = {d: math.exp(-theta * d) * mat for d, mat in family.items()}

    for s in range(S + 1):
        for d, mat in family.items():
            if s - d >= 0:
                ex[s] += ex[s - d] @ mat
                ez[s] += ez[s - d] @ mat
                ey[s] += ey[s - d] @ mat
                wmat = weighted[d]
                wx[s] += wx[s - d] @ wmat
                wz[s] += wz[s - d] @ wmat
                wy[s] += wy[s - d] @ wmat
        if s == 0:
            ex[0] += x0
            wx[0] += x0
        ez[s] += x0 * lt.survival(s)
        wz[s] += x0 * _weighted_survival(lt, s, theta)
        if s <= D:
            ey[s] += x0 * p0
            wy[s] += x0 * (p0 * math.exp(-theta * s))
        if max(ex[s].max(), ez[s].max(), ey[s].max(),
               wx[s].max(), wz[s].max(), wy[s].max()) > OVERFLOW_LIMIT:
            raise HorizonTooLargeError(s)

    return MeanTrajectory(horizon=S, theta=theta, ex=ex, ez=ez, ey=ey,
                          wx=wx, wz=wz, wy=wy)


def _weighted_survival(lt, c: int, theta: float) -> float:
    """P(L > c) * exp(-theta*c), computed in log space on the geometric tail
    so that subcritical weighting cannot overflow prematurely."""
    if c < lt.max_finite:
        return lt.survival(c) * math.exp(-theta * c)
    rem = lt.survival(lt.max_finite)  # tail or defect mass
    if rem == 0.0:
        return 0.0
    q = lt.tail_ratio
    if q is None:
        return rem * math.exp(-theta * c)
    if q == 0.0:
        return rem * math.exp(-theta * c) if c == lt.max_finite else 0.0
    return math.exp(math.log(rem) + (c - lt.max_finite) * math.log(q) - theta * c)


def xi_kernel(family, s: int) -> np.ndarray:
    """Mean-evolution kernel: Xi(0) = I and Xi(s) = sum_d Xi(s-d) M_d."""
    return _xi_sequence(family, s)[s]


def _xi_sequence(family, s: int) -> list[np.ndarray]:
    if s < 0:
        raise ValueError("time must be >= 0")
    n = family.n_types
    seq = [np.eye(n)]
    for t in range(1, s + 1):
        acc = np.zeros((n, n))
        for d, mat in family.items():
            if t - d >= 0:
                acc += seq[t - d] @ mat
        seq.append(acc)
    return seq


@dataclass(frozen=True)
class LimitReport:
    """Closed-form limits of the weighted mean processes for shared families."""

    limit_x: np.ndarray
    limit_z: np.ndarray
    limit_y: np.ndarray
    type_limit: np.ndarray
    age_limit: np.ndarray | None  # None when no delay has positive survival
    empirical_gap: dict[str, float]
    horizon: int


def theorem_limits(model, family, mal: MalthusianSolution,
                   horizon: int = 400, shared_tol: float = 1e-8) -> LimitReport:
    """Evaluate the limit formulas and measure the gap to the trajectory.

    With g = (E[X(0)]'h) / mu(beta):

    limit_x = g nu
    limit_z = g (sum_{c>=0} P(L>c) e^{-theta c}) nu
    limit_y = g P(L=0) (sum_{c=0}^{D} e^{-theta c}) nu

    These are the exact limits of the weighted convolutions
    E[Z(s)] = sum_c E[X(s-c)] P(L>c) and
    E[Y(s)] = P(L=0) sum_{c=0}^{D} E[X(s-c)]; the window factor for Y
    collapses to D+1 in the critical case (theta = 0).

    Requires the family to share P-F eigenvectors; in the subcritical regime
    the lifetime series must converge (geometric tail ratio below
    exp(theta)), otherwise TailDivergesError propagates from the series.
    """
    rep = shared_pf_check(family, shared_tol)
    if not rep.shared:
        raise NotSharedError(
            f"max eigenvector deviation {rep.max_deviation!r} exceeds {shared_tol!r}")
    h, nu = rep.h, rep.nu
    theta = mal.theta
    mu = mal.mu_beta
    lt = model.lifetime
    x0 = model.initial_mean_vector()
    D = family.max_delay

    g = float(x0 @ h) / mu
    series = lt.weighted_survival_series(theta)
    window = math.fsum(math.exp(-theta * c) for c in range(D + 1))
    limit_x = g * nu
    limit_z = g * series * nu
    limit_y = g * lt.prob(0) * window * nu

    age_w = np.array([lt.survival(d) * math.exp(-theta * d) for d in family.delays])
    age_limit = age_w / age_w.sum() if age_w.sum() > 0 else None

    traj = evolve_means(model, family, horizon, mal)
    gap = {
        "x": float(np.max(np.abs(traj.wx[horizon] - limit_x))),
        "z": float(np.max(np.abs(traj.wz[horizon] - limit_z))),
        "y": float(np.max(np.abs(traj.wy[horizon] - limit_y))),
    }
    return LimitReport(limit_x=limit_x, limit_z=limit_z, limit_y=limit_y,
                       type_limit=nu, age_limit=age_limit,
                       empirical_gap=gap, horizon=horizon)


def age_distribution(model, family, mal: MalthusianSolution, s: int) -> np.ndarray:
    """Age profile of the expected actively reproducing population at time s.

    Entry (k, j) is the fraction of the type-j reproducing population whose
    age is delays[k]:

        E[X_j(s - d)] P(L > d) / sum_d' E[X_j(s - d')] P(L > d')

    As s grows each column tends to P(L>d) e^{-theta d}, normalized over the
    delay set.
    """
    D = family.max_delay
    if s <= D:
        raise ValueError(f"need s > {D} so every age is populated")
    lt = model.lifetime
    surv = np.array([lt.survival(d) for d in family.delays])
    if not np.any(surv > 0):
        raise DegenerateDenominatorError("P(L > d) = 0 for every delay")
    traj = evolve_means(model, family, s, mal)
    num = np.array([traj.ex[s - d] * surv[k]
                    for k, d in enumerate(family.delays)])
    denom = num.sum(axis=0)
    if np.any(denom <= 0):
        raise DegenerateDenominatorError("zero reproducing population for some type")
    return num / denom


def stationary_check(family, mal: MalthusianSolution) -> float:
    """Residual of the stationary type profile under the mean evolution.

    Seeds the first window with nu' rho_hat^s, where nu is the left P-F
    eigenvector of the mixture matrix at rho_hat, evolves one further window
    and returns the worst infinity-norm deviation of the type proportions
    from nu.  For families sharing P-F eigenvectors this is zero up to
    rounding.
    """
    rho = mal.rho_hat
    nu = pf_decompose(mixture_matrix(family, rho)).nu
    D = family.max_delay
    n = family.n_types
    window = np.zeros((2 * D + 1, n))
    for s in range(D):
        window[s] = nu * rho ** s
    worst = 0.0
    for s in range(D, 2 * D + 1):
        acc = np.zeros(n)
        for d, mat in family.items():
            acc += window[s - d] @ mat
        window[s] = acc
        worst = max(worst, float(np.max(np.abs(acc / acc.sum() - nu))))
    return worst
