"""Model definition for delayed multi-type branching processes.

A model couples four ingredients: the set of reproduction ages (delays), the
type space, the raw offspring laws per (parent type, child type, age), and the
lifetime/recovery law that censors reproduction after death.  From these the
censored mean matrices are derived; everything downstream (spectral analysis,
growth rates, mean recursions, simulation) consumes either the model or its
mean-matrix family.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DuplicateDelayError, NegativeEntryError, NonIrreducibleError

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class DelayFamily:
    """Ordered set of positive integer reproduction ages."""

    delays: tuple[int, ...]

    def __post_init__(self):
        delays = tuple(int(d) for d in self.delays)
        if len(delays) == 0:
            raise ValueError("at least one delay is required")
        if any(d < 1 for d in delays):
            raise ValueError(f"delays must be >= 1, got {delays}")
        if len(set(delays)) != len(delays):
            raise DuplicateDelayError(delays)
        delays = tuple(sorted(delays))
        object.__setattr__(self, "delays", delays)
        if len(delays) == 1:
            warnings.warn("single-delay family: the process degenerates to an "
                          "ordinary multi-type branching process", stacklevel=2)
        if self.gcd != 1:
            warnings.warn(f"gcd of delays is {self.gcd} != 1; the process is "
                          "periodic and limit statements need care", stacklevel=2)

    @property
    def max_delay(self) -> int:
        return self.delays[-1]

    @property
    def gcd(self) -> int:
        return math.gcd(*self.delays)

    def __iter__(self):
        return iter(self.delays)

    def __len__(self):
        return len(self.delays)


@dataclass(frozen=True)
class LifetimeLaw:
    """Distribution of the convalescence time L and the death indicator.

    ``pmf[l]`` is P(L = l) for l = 0..L_max.  Any missing mass is placed on
    {L_max+1, L_max+2, ...} as a geometric tail with ratio ``tail_ratio``:
    P(L > c) = (1 - sum(pmf)) * tail_ratio**(c - L_max) for c >= L_max.

    ``death_prob`` gives P(death | L = l) for l >= 1, either as a single
    constant or as a sequence indexed from l = 1 (values past the end repeat
    the last entry).  Individuals with L = 0 are asymptomatic and never die.
    """

    pmf: tuple[float, ...]
    tail_ratio: float | None = None
    death_prob: float | tuple[float, ...] = 0.0

    def __post_init__(self):
        pmf = tuple(float(p) for p in self.pmf)
        if len(pmf) == 0:
            raise ValueError("lifetime pmf must have at least one entry")
        if any(p < 0 for p in pmf):
            raise NegativeEntryError("lifetime.pmf", min(pmf))
        total = math.fsum(pmf)
        if self.tail_ratio is None:
            if total > 1.0 + _NORM_TOL:
                raise ValueError(f"lifetime pmf sums to {total!r} > 1")
            if abs(total - 1.0) > _NORM_TOL:
                # constructible so that validate() can report the defect;
                # the missing mass behaves as P(L = infinity)
                warnings.warn(f"lifetime pmf sums to {total!r}, mass != 1",
                              stacklevel=2)
        else:
            q = float(self.tail_ratio)
            if not (0.0 <= q < 1.0):
                raise ValueError(f"tail ratio must lie in [0, 1), got {q!r}")
            if total > 1.0 + _NORM_TOL:
                raise ValueError(f"lifetime pmf sums to {total!r} > 1")
            object.__setattr__(self, "tail_ratio", q)
        object.__setattr__(self, "pmf", pmf)
        dp = self.death_prob
        if isinstance(dp, (int, float)):
            dp = float(dp)
            if not (0.0 <= dp <= 1.0):
                raise ValueError(f"death probability {dp!r} outside [0, 1]")
        else:
            dp = tuple(float(x) for x in dp)
            if any(not (0.0 <= x <= 1.0) for x in dp):
                raise ValueError("death probabilities must lie in [0, 1]")
        object.__setattr__(self, "death_prob", dp)
        if self.survival(0) <= 0.0:
            warnings.warn("P(L > 0) = 0: every individual is asymptomatic",
                          stacklevel=2)

    @property
    def max_finite(self) -> int:
        """Largest lifetime covered by the explicit pmf."""
        return len(self.pmf) - 1

    @property
    def tail_mass(self) -> float:
        if self.tail_ratio is None:
            return 0.0
        return max(0.0, 1.0 - math.fsum(self.pmf))

    def prob(self, l: int) -> float:
        """P(L = l), including the geometric tail."""
        if l < 0:
            return 0.0
        if l <= self.max_finite:
            return self.pmf[l]
        q = self.tail_ratio
        if q is None or self.tail_mass == 0.0:
            return 0.0
        k = l - self.max_finite
        return self.tail_mass * (1.0 - q) * q ** (k - 1)

    def survival(self, c: int) -> float:
        """P(L > c).  For an unnormalized law without a tail, the missing
        mass never dies off (it acts as P(L = infinity))."""
        if c < 0:
            return 1.0
        if c < self.max_finite:
            return max(0.0, 1.0 - math.fsum(self.pmf[: c + 1]))
        rem = max(0.0, 1.0 - math.fsum(self.pmf))
        if self.tail_ratio is None:
            return rem
        return rem * self.tail_ratio ** (c - self.max_finite)

    def death_prob_at(self, l: int) -> float:
        """P(death | L = l); zero for l = 0 (asymptomatic individuals)."""
        if l <= 0:
            return 0.0
        dp = self.death_prob
        if isinstance(dp, float):
            return dp
        if len(dp) == 0:
            return 0.0
        return dp[min(l, len(dp)) - 1]

    def mean(self) -> float:
        """E[L]; infinite only for an unnormalized law (defect mass)."""
        m = math.fsum(l * p for l, p in enumerate(self.pmf))
        if self.tail_ratio is None:
            return m if math.fsum(self.pmf) >= 1.0 - _NORM_TOL else math.inf
        if self.tail_mass > 0.0:
            m += self.tail_mass * (self.max_finite + 1.0 / (1.0 - self.tail_ratio))
        return m

    def weighted_survival_series(self, theta: float) -> float:
        """sum_{c>=0} P(L > c) * exp(-theta*c) in closed form.

        The finite part is summed term by term; the geometric tail collapses
        to tail_mass * exp(-theta*L_max) / (1 - q*exp(-theta)).  Raises
        TailDivergesError when q*exp(-theta) >= 1 (and likewise for the
        never-dying defect mass of an unnormalized law at theta <= 0).
        """
        from .errors import TailDivergesError

        w = math.exp(-theta)
        total = math.fsum(self.survival(c) * w ** c for c in range(self.max_finite))
        rem = self.survival(max(self.max_finite, 0))
        if rem > 0.0:
            ratio = w if self.tail_ratio is None else self.tail_ratio * w
            if ratio >= 1.0:
                raise TailDivergesError(
                    f"geometric rate {ratio!r} >= 1 beyond the finite lifetime part")
            total += rem * w ** self.max_finite / (1.0 - ratio)
        return total


@dataclass(frozen=True)
class OffspringLaw:
    """Raw (uncensored) offspring count laws z_d^{i,j}.

    One law per (parent type i, child type j, delay d), all of a single kind:

    * ``kind="poisson"``: ``means[d][i, j]`` is the Poisson mean.
    * ``kind="pmf"``: ``pmfs[d][i][j]`` is an explicit finite pmf over
      {0, 1, ..., len-1}.
    """

    kind: str
    means: dict[int, np.ndarray] | None = None
    pmfs: dict[int, list[list[tuple[float, ...]]]] | None = None

    def __post_init__(self):
        if self.kind not in ("poisson", "pmf"):
            raise ValueError(f"unknown offspring law kind {self.kind!r}")
        if self.kind == "poisson":
            if self.means is None:
                raise ValueError("poisson offspring law requires means")
            means = {int(d): np.asarray(m, dtype=float) for d, m in self.means.items()}
            for d, m in means.items():
                if m.ndim != 2 or m.shape[0] != m.shape[1]:
                    raise ValueError(f"offspring mean matrix at delay {d} is not square")
                if np.any(m < 0):
                    raise NegativeEntryError(f"offspring.means[{d}]", float(m.min()))
                m.setflags(write=False)
            object.__setattr__(self, "means", means)
        else:
            if self.pmfs is None:
                raise ValueError("pmf offspring law requires pmfs")
            pmfs = {}
            for d, grid in self.pmfs.items():
                rows = []
                for i, row in enumerate(grid):
                    cells = []
                    for j, cell in enumerate(row):
                        cell = tuple(float(p) for p in cell)
                        if any(p < 0 for p in cell):
                            raise NegativeEntryError(f"offspring.pmfs[{d}][{i}][{j}]",
                                                     min(cell))
                        if abs(math.fsum(cell) - 1.0) > _NORM_TOL:
                            raise ValueError(
                                f"offspring pmf at (d={d}, i={i}, j={j}) sums to "
                                f"{math.fsum(cell)!r}")
                        cells.append(cell)
                    rows.append(cells)
                pmfs[int(d)] = rows
            object.__setattr__(self, "pmfs", pmfs)

    @property
    def delays_covered(self) -> tuple[int, ...]:
        table = self.means if self.kind == "poisson" else self.pmfs
        return tuple(sorted(table))

    def n_types(self) -> int:
        table = self.means if self.kind == "poisson" else self.pmfs
        first = next(iter(table.values()))
        return first.shape[0] if self.kind == "poisson" else len(first)

    def mean_matrix(self, d: int) -> np.ndarray:
        """E[z_d^{i,j}] as an (n, n) array."""
        if self.kind == "poisson":
            return np.array(self.means[d], dtype=float)
        grid = self.pmfs[d]
        n = len(grid)
        out = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                out[i, j] = math.fsum(k * p for k, p in enumerate(grid[i][j]))
        return out


@dataclass(frozen=True)
class ModelSpec:
    """Complete process description; immutable once constructed."""

    type_names: tuple[str, ...]
    delay_family: DelayFamily
    offspring: OffspringLaw
    lifetime: LifetimeLaw
    initial: int | tuple[float, ...] = 0

    def __post_init__(self):
        names = tuple(str(t) for t in self.type_names)
        if len(names) == 0:
            raise ValueError("at least one type is required")
        object.__setattr__(self, "type_names", names)
        n = len(names)
        covered = self.offspring.delays_covered
        for d in self.delay_family:
            if d not in covered:
                raise ValueError(f"offspring law missing for delay {d}")
        if self.offspring.n_types() != n:
            raise ValueError(
                f"offspring law is for {self.offspring.n_types()} types, model has {n}")
        init = self.initial
        if isinstance(init, (int, np.integer)):
            if not (0 <= init < n):
                raise ValueError(f"initial type index {init} out of range")
            object.__setattr__(self, "initial", int(init))
        else:
            init = tuple(float(x) for x in init)
            if len(init) != n:
                raise ValueError("initial vector length does not match type count")
            if any(x < 0 for x in init):
                raise NegativeEntryError("initial", min(init))
            object.__setattr__(self, "initial", init)

    @property
    def n_types(self) -> int:
        return len(self.type_names)

    def initial_mean_vector(self) -> np.ndarray:
        """E[X(0)] as a row vector."""
        if isinstance(self.initial, int):
            e = np.zeros(self.n_types)
            e[self.initial] = 1.0
            return e
        return np.array(self.initial, dtype=float)


@dataclass(frozen=True)
class MeanMatrixFamily:
    """Censored mean matrices (M_d : d in the delay set).

    Matrices are stored in delay order; ``matrix(d)`` fetches by delay and
    returns the zero matrix for delays outside the family.  Every stored
    matrix is validated nonnegative and irreducible at construction.
    """

    delays: tuple[int, ...]
    matrices: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        from .spectral import is_irreducible  # deferred: spectral imports this module

        delays = tuple(int(d) for d in self.delays)
        if sorted(set(delays)) != list(delays):
            raise ValueError("delays must be strictly increasing and unique")
        mats = []
        n = None
        for d, m in zip(delays, self.matrices, strict=True):
            m = np.array(m, dtype=float)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError(f"matrix at delay {d} is not square")
            if n is None:
                n = m.shape[0]
            elif m.shape[0] != n:
                raise ValueError("matrices have inconsistent sizes")
            if np.any(m < 0):
                raise NegativeEntryError(f"M[{d}]", float(m.min()))
            if not is_irreducible(m):
                raise NonIrreducibleError(d)
            m.setflags(write=False)
            mats.append(m)
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "matrices", tuple(mats))

    @property
    def n_types(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def max_delay(self) -> int:
        return self.delays[-1]

    def matrix(self, d: int) -> np.ndarray:
        """M_d, or the zero matrix for d outside the delay set."""
        try:
            return self.matrices[self.delays.index(d)]
        except ValueError:
            return np.zeros((self.n_types, self.n_types))

    def items(self):
        return zip(self.delays, self.matrices)


def death_prob_by_age(lifetime: LifetimeLaw, d: int) -> float:
    """P(L <= d, death) = sum_{l=1..d} P(L = l) P(death | L = l).

    This is the probability that an individual has died by age d and is
    therefore censored from reproducing at ages >= d.
    """
    if d < 1:
        raise ValueError("age must be >= 1")
    return math.fsum(lifetime.prob(l) * lifetime.death_prob_at(l) for l in range(1, d + 1))


def censored_mean_matrices(model: ModelSpec) -> MeanMatrixFamily:
    """Derive M_d(i,j) = E[z_d^{i,j}] * (1 - P(L <= d, death)) for every delay.

    Raises NonIrreducibleError when any resulting matrix is reducible.
    """
    mats = []
    for d in model.delay_family:
        raw = model.offspring.mean_matrix(d)
        mats.append(raw * (1.0 - death_prob_by_age(model.lifetime, d)))
    return MeanMatrixFamily(tuple(model.delay_family), tuple(mats))


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    status: str  # "pass" | "warn" | "fail"
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[ValidationCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def __str__(self):
        return "\n".join(f"[{c.status}] {c.name}: {c.detail}" for c in self.checks)


def validate(model: ModelSpec) -> ValidationReport:
    """Check the standing assumptions; failures are reported, never raised."""
    from .spectral import is_irreducible

    checks = []

    g = model.delay_family.gcd
    checks.append(ValidationCheck(
        "delay gcd", "pass" if g == 1 else "warn",
        f"gcd({list(model.delay_family.delays)}) = {g}"))

    lt = model.lifetime
    mass = 1.0 if lt.tail_ratio is not None else math.fsum(lt.pmf)
    checks.append(ValidationCheck(
        "lifetime mass", "pass" if abs(mass - 1.0) <= 1e-9 else "fail",
        f"P(L < inf) = {mass!r}"))

    p_pos = lt.survival(0)
    checks.append(ValidationCheck(
        "nontrivial lifetime", "pass" if p_pos > 0 else "warn",
        f"P(L > 0) = {p_pos!r}"))

    if model.offspring.kind == "pmf":
        bad = []
        for d in model.delay_family:
            grid = model.offspring.pmfs[d]
            for i, row in enumerate(grid):
                for j, cell in enumerate(row):
                    if abs(math.fsum(cell) - 1.0) > 1e-9:
                        bad.append((d, i, j))
        checks.append(ValidationCheck(
            "offspring pmf normalization", "pass" if not bad else "fail",
            "all normalized" if not bad else f"unnormalized at {bad}"))
    else:
        checks.append(ValidationCheck(
            "offspring pmf normalization", "pass", "poisson laws are normalized"))

    for d in model.delay_family:
        raw = model.offspring.mean_matrix(d)
        m = raw * (1.0 - death_prob_by_age(lt, d))
        ok = is_irreducible(m)
        checks.append(ValidationCheck(
            f"irreducibility of M_{d}", "pass" if ok else "fail",
            "irreducible" if ok else "reducible"))

    return ValidationReport(tuple(checks))
