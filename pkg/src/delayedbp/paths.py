"""Backward-path combinatorics and brute-force oracles for the kernel.

A backward path from time s to 0 is a word (d_1, ..., d_r) of delays summing
to s.  Words group into classes by their step-count vector k (how many steps
of each size), each class holding r!/prod(k_d!) distinct words.  Long words
almost always contain long runs of a repeated symbol, which is what drags
products of normalized mean matrices to their rank-one limit; the run and
block statistics here make that effect measurable at small s.

Two independent evaluations of the kernel live here as test oracles: full
path enumeration (exponential cost, capped) and a Monte Carlo estimator that
draws path steps i.i.d. from the step distribution beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from .errors import BetaNotNormalizedError, CapExceededError
from .spectral import family_pf

ENUMERATION_S_CAP = 64
KERNEL_S_CAP = 12
WORD_CAP = 10 ** 6
SAMPLING_BLOCK = 1 << 16


@dataclass(frozen=True)
class StepCountVector:
    """Step counts per delay; membership in Lambda(s, r) is checked via the
    derived quantities ``total`` (the time spanned) and ``r`` (word length)."""

    delays: tuple[int, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.delays) != len(self.counts):
            raise ValueError("counts must align with delays")
        if any(k < 0 for k in self.counts):
            raise ValueError("counts must be >= 0")

    @property
    def r(self) -> int:
        return sum(self.counts)

    @property
    def total(self) -> int:
        return sum(d * k for d, k in zip(self.delays, self.counts))

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.delays, self.counts))


PathWord = tuple[int, ...]


def enumerate_lambda(delays, s: int, r: int | None = None,
                     cap: int = ENUMERATION_S_CAP) -> list[StepCountVector]:
    """All step-count vectors spanning exactly s, ascending lexicographic.

    With ``r`` given, restricts to words of that length (Lambda(s, r) is
    nonempty only for ceil(s/max_delay) <= r <= s).
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    if s > cap:
        raise CapExceededError(f"enumeration capped at s <= {cap}, got {s}")
    delays = tuple(sorted(int(d) for d in delays))
    out: list[StepCountVector] = []

    def rec(idx, remaining, prefix):
        if idx == len(delays) - 1:
            d = delays[idx]
            if remaining % d == 0:
                out.append(StepCountVector(delays, prefix + (remaining // d,)))
            return
        d = delays[idx]
        for k in range(remaining // d + 1):
            rec(idx + 1, remaining - k * d, prefix + (k,))

    rec(0, s, ())
    if r is not None:
        out = [k for k in out if k.r == r]
    out.sort(key=lambda k: k.counts)
    return out


def multinomial_size(k: StepCountVector) -> int:
    """|S(k)| = r! / prod_d k_d!, exactly (arbitrary-precision integers)."""
    num = math.factorial(k.r)
    for c in k.counts:
        num //= math.factorial(c)
    return num


def enumerate_words(k: StepCountVector, cap: int = WORD_CAP) -> list[PathWord]:
    """All distinct arrangements of the multiset described by k."""
    size = multinomial_size(k)
    if size > cap:
        raise CapExceededError(f"class holds {size} words, cap is {cap}")
    out: list[PathWord] = []
    counts = list(k.counts)

    def rec(prefix):
        if len(prefix) == k.r:
            out.append(tuple(prefix))
            return
        for idx, d in enumerate(k.delays):
            if counts[idx] > 0:
                counts[idx] -= 1
                prefix.append(d)
                rec(prefix)
                prefix.pop()
                counts[idx] += 1

    rec([])
    return out


def has_kappa_run(word, kappa: int) -> bool:
    """True iff the word contains kappa consecutive equal symbols.

    Words shorter than kappa never qualify.
    """
    if kappa <= 1:
        raise ValueError("kappa must be > 1")
    run = 1
    for prev, cur in zip(word, word[1:]):
        run = run + 1 if cur == prev else 1
        if run >= kappa:
            return True
    return False


@dataclass(frozen=True)
class RunFractions:
    """Per-class fraction of words containing a kappa-run, as exact rationals."""

    by_class: dict[tuple[int, ...], Fraction]
    minimum: Fraction


def run_fraction(delays, s: int, kappa: int, cap: int = WORD_CAP) -> RunFractions:
    """|S(k)^kappa| / |S(k)| for every class k in Lambda(s), plus the minimum.

    The minimum over classes creeps toward 1 as s grows: long words cannot
    avoid runs.
    """
    fractions: dict[tuple[int, ...], Fraction] = {}
    for k in enumerate_lambda(delays, s):
        words = enumerate_words(k, cap)
        hits = sum(1 for w in words if has_kappa_run(w, kappa))
        fractions[k.counts] = Fraction(hits, len(words))
    return RunFractions(by_class=fractions, minimum=min(fractions.values()))


def block_run_statistic(word, delays, upsilon: int, alpha: float, delta: float) -> bool:
    """Aligned-block run test behind the run-frequency lower bound.

    Splits the word into floor(r / 2^upsilon) aligned blocks of length
    2^upsilon and asks whether some delay d fills at least
    (1 - delta) * beta_upsilon * floor(r / 2^upsilon) of them entirely, where
    beta_0 = alpha and beta_l = beta_{l-1} (1 - beta_{l-1}).
    """
    if upsilon < 1:
        raise ValueError("upsilon must be >= 1")
    n_sym = len(set(delays))
    if not (0.0 < alpha < 1.0 / n_sym):
        raise ValueError(f"alpha must lie in (0, 1/{n_sym})")
    if not (0.0 < delta < 0.5):
        raise ValueError("delta must lie in (0, 1/2)")
    r = len(word)
    block = 1 << upsilon
    if r <= block:
        raise ValueError(f"word length {r} must exceed 2^upsilon = {block}")
    beta = alpha
    for _ in range(upsilon):
        beta = beta * (1.0 - beta)
    n_blocks = r // block
    threshold = (1.0 - delta) * beta * n_blocks
    for d in set(delays):
        full = 0
        for i in range(n_blocks):
            seg = word[i * block:(i + 1) * block]
            if all(x == d for x in seg):
                full += 1
        if full >= threshold:
            return True
    return False


def xi_by_enumeration(family, s: int, cap: int = KERNEL_S_CAP):
    """Kernel at time s by summing matrix products over every backward path.

    Evaluates the class-resolved form: each class k contributes
    prod_d rho_d^{k_d} times the sum over its words of the normalized
    products, which reproduces the plain path sum but exercises the
    eigenvalue bookkeeping.  Returns (Xi(s), {r: Xi(s; r)}).
    """
    if s > cap:
        raise CapExceededError(f"enumeration kernel capped at s <= {cap}, got {s}")
    n = family.n_types
    pf = family_pf(family)
    norm = {d: family.matrix(d) / pf[d].rho for d in family.delays}
    per_r: dict[int, np.ndarray] = {}
    if s == 0:
        per_r[0] = np.eye(n)
        return np.eye(n), per_r
    for k in enumerate_lambda(family.delays, s):
        coeff = 1.0
        for d, c in zip(k.delays, k.counts):
            coeff *= pf[d].rho ** c
        acc = np.zeros((n, n))
        for word in enumerate_words(k):
            prod = np.eye(n)
            for d in word:
                prod = prod @ norm[d]
            acc += prod
        per_r[k.r] = per_r.get(k.r, np.zeros((n, n))) + coeff * acc
    total = np.zeros((n, n))
    for mat in per_r.values():
        total += mat
    return total, per_r


@dataclass(frozen=True)
class SamplingEstimate:
    estimate: np.ndarray
    stderr: np.ndarray
    n_samples: int


def xi_by_sampling(family, mal, s: int, n_samples: int, seed) -> SamplingEstimate:
    """Monte Carlo kernel estimate via Bernoulli path sampling.

    Steps are drawn i.i.d. from beta until the running total reaches s; a
    sample contributes the normalized matrix product along its path when the
    total hits s exactly, and zero otherwise.  The average, scaled by
    exp(theta*s), is an unbiased estimator of Xi(s).

    Samples are assigned to fixed 2^16-sample blocks, each with its own
    counter-based substream keyed by (seed, block), so the result does not
    depend on how blocks are scheduled across workers.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    total_beta = math.fsum(mal.beta.values())
    if abs(total_beta - 1.0) > 1e-8:
        raise BetaNotNormalizedError(total_beta)
    n = family.n_types
    if s == 0:
        return SamplingEstimate(np.eye(n), np.zeros((n, n)), n_samples)

    delays = np.array(family.delays)
    probs = np.array([mal.beta[d] for d in family.delays])
    probs = probs / probs.sum()
    pf = family_pf(family)
    norm = {d: family.matrix(d) / pf[d].rho for d in family.delays}

    sums = np.zeros((n, n))
    sq_sums = np.zeros((n, n))
    done = 0
    block_idx = 0
    single_type = n == 1
    while done < n_samples:
        b = min(SAMPLING_BLOCK, n_samples - done)
        rng = Generator(Philox(SeedSequence((seed, block_idx))))
        steps = rng.choice(delays, size=(b, s), p=probs)
        csum = np.cumsum(steps, axis=1)
        stop = (csum >= s).argmax(axis=1)
        hit = csum[np.arange(b), stop] == s
        if single_type:
            # normalized 1x1 products are identically 1
            vals = hit.astype(float)
            sums[0, 0] += vals.sum()
            sq_sums[0, 0] += vals.sum()  # vals are 0/1
        else:
            for row in np.flatnonzero(hit):
                prod = np.eye(n)
                for d in steps[row, :stop[row] + 1]:
                    prod = prod @ norm[d]
                sums += prod
                sq_sums += prod * prod
        done += b
        block_idx += 1

    scale = math.exp(mal.theta * s)
    mean = sums / n_samples
    estimate = scale * mean
    if n_samples > 1:
        var = (sq_sums - n_samples * mean * mean) / (n_samples - 1)
        stderr = scale * np.sqrt(np.maximum(var, 0.0) / n_samples)
    else:
        stderr = np.full((n, n), np.nan)
    return SamplingEstimate(estimate=estimate, stderr=stderr, n_samples=n_samples)
