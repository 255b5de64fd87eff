"""Agent populations and money-conserving pairwise exchange dynamics.

Covers the closed-market model family: with no saving the money
distribution relaxes to an exponential; a shared saving fraction bends it
into a Gamma-like shape with a depleted low-money region; quenched
per-agent saving fractions produce a power-law tail in the rich end.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from ._kernels import exchange_kernel
from .stats import ks_two_sample

# Relative drift of any conserved total that we treat as "exact".
CONSERVATION_RTOL = 1e-12

# Sub-stream labels: setup draws and dynamics draws never share a stream,
# so adding saving heterogeneity cannot shift the trade sequence.
INIT_STREAM = 0
DYNAMICS_STREAM = 1

# Draws are consumed in fixed-size chunks regardless of the snapshot
# schedule, which keeps the random stream a function of (seed, n_exchanges)
# only.  See run().
CHUNK = 1 << 20


def init_rng(seed) -> np.random.Generator:
    """Generator for population setup (per-agent saving draws)."""
    return np.random.default_rng([int(seed), INIT_STREAM])


def dynamics_rng(seed) -> np.random.Generator:
    """Generator for the exchange dynamics (pair picks and trade fractions)."""
    return np.random.default_rng([int(seed), DYNAMICS_STREAM])


@dataclass(frozen=True)
class SavingSpec:
    """How per-agent saving fractions are assigned.

    kind "none": every agent exposes all money (fraction 0 for everyone).
    kind "uniform": one shared fraction `value` in [0, 1).
    kind "distributed": quenched per-agent draws, uniform on [low, high);
    draws landing exactly on 1.0 are redrawn so the domain stays [0, 1).
    """

    kind: str
    value: float = 0.0
    low: float = 0.0
    high: float = 1.0

    def __post_init__(self):
        self.validate()

    @classmethod
    def none(cls) -> "SavingSpec":
        return cls("none")

    @classmethod
    def uniform(cls, value) -> "SavingSpec":
        return cls("uniform", value=float(value))

    @classmethod
    def distributed(cls, low=0.0, high=1.0) -> "SavingSpec":
        return cls("distributed", low=float(low), high=float(high))

    @property
    def model(self) -> str:
        """Config-level model name implied by this spec."""
        return "gibbs" if self.kind == "none" else "ccm"

    def validate(self):
        if self.kind not in ("none", "uniform", "distributed"):
            raise ValueError(f"unknown saving kind {self.kind!r}")
        if self.kind == "uniform" and not 0.0 <= self.value < 1.0:
            raise ValueError("saving must lie in [0,1)")
        if self.kind == "distributed" and not 0.0 <= self.low < self.high <= 1.0:
            raise ValueError("saving_law bounds must satisfy 0 <= low < high <= 1")

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "none":
            return np.zeros(n)
        if self.kind == "uniform":
            return np.full(n, self.value)
        lam = rng.uniform(self.low, self.high, size=n)
        bad = lam >= 1.0
        while bad.any():
            lam[bad] = rng.uniform(self.low, self.high, size=int(bad.sum()))
            bad = lam >= 1.0
        return lam


@dataclass
class Population:
    """Mutable market state: a money balance and a saving fraction per agent."""

    money: np.ndarray
    saving: np.ndarray
    n_agents: int
    total_money: float

    def validate(self):
        if self.n_agents < 2:
            raise ValueError("n_agents must be at least 2")
        if not self.total_money > 0:
            raise ValueError("total_money must be positive")
        if self.money.shape != (self.n_agents,) or self.saving.shape != (self.n_agents,):
            raise ValueError("money and saving need one entry per agent")
        if (self.money < 0).any():
            raise ValueError("money must be non-negative")
        if ((self.saving < 0.0) | (self.saving >= 1.0)).any():
            raise ValueError("saving must lie in [0,1)")
        if self.conservation_error() > CONSERVATION_RTOL:
            raise ValueError("total money drifted beyond tolerance")

    def conservation_error(self) -> float:
        """Relative drift of the summed money from the configured total."""
        return abs(float(self.money.sum()) - self.total_money) / self.total_money

    @property
    def mean_money(self) -> float:
        return self.total_money / self.n_agents

    def copy(self) -> "Population":
        return Population(self.money.copy(), self.saving.copy(),
                          self.n_agents, self.total_money)


@dataclass(frozen=True)
class GibbsModel:
    """Exponential money distribution with the given mean.

    This is the steady state of saving-free random exchange: density
    (1/mean) * exp(-m / mean), maximal at m = 0.
    """

    mean: float

    def __post_init__(self):
        if not self.mean > 0:
            raise ValueError("mean must be positive")

    @property
    def amplitude(self) -> float:
        """Density at zero money; equals the normalization constant 1/mean."""
        return 1.0 / self.mean

    def pdf(self, money):
        m = np.asarray(money, dtype=np.float64)
        if (m < 0).any():
            raise ValueError("money must be non-negative")
        out = np.exp(-m / self.mean) / self.mean
        return float(out) if m.ndim == 0 else out

    def cdf(self, money):
        m = np.asarray(money, dtype=np.float64)
        if (m < 0).any():
            raise ValueError("money must be non-negative")
        out = -np.expm1(-m / self.mean)
        return float(out) if m.ndim == 0 else out


@dataclass(frozen=True)
class SimConfig:
    """Complete, reproducible description of one market experiment."""

    model: str              # "gibbs" (no saving) or "ccm" (saving fractions)
    n_agents: int
    total_money: float
    saving: SavingSpec
    n_exchanges: int
    seed: int
    burn_in: int
    measure_every: int
    ensemble: int = 1
    init: str = "equal"     # "equal" or "all-to-one" starting split

    def validate(self):
        if self.model not in ("gibbs", "ccm"):
            raise ValueError("model must be 'gibbs' or 'ccm'")
        if self.n_agents < 2:
            raise ValueError("n_agents must be at least 2")
        if not self.total_money > 0:
            raise ValueError("total_money must be positive")
        if self.burn_in < 0:
            raise ValueError("burn_in must be non-negative")
        if self.n_exchanges < self.burn_in:
            raise ValueError("n_exchanges must be at least burn_in")
        if self.measure_every < 1:
            raise ValueError("measure_every must be at least 1")
        if self.ensemble < 1:
            raise ValueError("ensemble must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if self.init not in ("equal", "all-to-one"):
            raise ValueError("init must be 'equal' or 'all-to-one'")
        self.saving.validate()
        if self.model == "gibbs" and self.saving.kind != "none":
            raise ValueError("model 'gibbs' takes no saving parameters")
        if self.model == "ccm" and self.saving.kind == "none":
            raise ValueError("model 'ccm' requires 'saving' or 'saving_law'")

    @property
    def mean_money(self) -> float:
        return self.total_money / self.n_agents

    @property
    def sweeps(self) -> float:
        """Exchange count in units of one expected trade per agent."""
        return self.n_exchanges / self.n_agents

    def replica(self, r: int) -> "SimConfig":
        """Config for ensemble member r: seed shifted to seed + r."""
        return dataclasses.replace(self, seed=self.seed + r)


@dataclass
class SnapshotSeries:
    """Money (or energy) snapshots on a fixed schedule, plus the final state."""

    times: np.ndarray       # exchange counts, one per snapshot
    snapshots: np.ndarray   # shape (n_snapshots, n_agents)
    final: object           # Population or GasEnsemble

    @property
    def n_snapshots(self) -> int:
        return len(self.times)

    def pooled(self, last=None) -> np.ndarray:
        """Concatenated trailing `last` snapshots (all of them by default)."""
        take = self.snapshots if last is None else self.snapshots[self.n_snapshots - last:]
        return take.ravel()


def init_population(n_agents, total_money, spec: SavingSpec, seed,
                    init="equal") -> Population:
    """Build a starting population: equal split by default, or everything
    handed to agent 0 under init="all-to-one" (for checking that steady
    states do not depend on the start)."""
    n = int(n_agents)
    m = float(total_money)
    if n < 2:
        raise ValueError("n_agents must be at least 2")
    if not m > 0:
        raise ValueError("total_money must be positive")
    if init == "equal":
        money = np.full(n, m / n)
    elif init == "all-to-one":
        money = np.zeros(n)
        money[0] = m
    else:
        raise ValueError("init must be 'equal' or 'all-to-one'")
    saving = spec.draw(n, init_rng(seed))
    pop = Population(money, saving, n, m)
    pop.validate()
    return pop


def make_population(config: SimConfig) -> Population:
    """Population described by a config (same seed policy as run())."""
    config.validate()
    return init_population(config.n_agents, config.total_money, config.saving,
                           config.seed, init=config.init)


def exchange_pair(m_i, m_j, saving_i, saving_j, eps):
    """One trade between two balances; returns the updated pair.

    Each partner shields its saving fraction of its own balance; the pooled
    exposed money is split by the trade fraction eps.  The second output is
    computed as pooled total minus the first, so the pair sum is conserved
    exactly in floating point.  Matches the compiled kernel bit for bit.
    """
    m_i = float(m_i)
    m_j = float(m_j)
    saving_i = float(saving_i)
    saving_j = float(saving_j)
    eps = float(eps)
    assert m_i >= 0.0 and m_j >= 0.0
    assert 0.0 <= saving_i < 1.0 and 0.0 <= saving_j < 1.0
    assert 0.0 <= eps <= 1.0
    if m_i == m_j and saving_i == saving_j and eps == 0.5:
        # A symmetric trade at the even split maps the pair to itself;
        # return it directly rather than through rounded intermediates.
        return m_i, m_j
    exposed_i = (1.0 - saving_i) * m_i
    exposed_j = (1.0 - saving_j) * m_j
    total = m_i + m_j
    new_i = (m_i - exposed_i) + eps * (exposed_i + exposed_j)
    if new_i < 0.0:
        new_i = 0.0
    elif new_i > total:
        new_i = total
    return new_i, total - new_i


def apply_exchanges(pop: Population, ii, jj, eps):
    """Apply a prepared batch of trades in order (mutates pop)."""
    exchange_kernel(pop.money, pop.saving,
                    np.ascontiguousarray(ii, dtype=np.int64),
                    np.ascontiguousarray(jj, dtype=np.int64),
                    np.ascontiguousarray(eps, dtype=np.float64))


def step(pop: Population, rng: np.random.Generator):
    """One random trade in place: uniform distinct pair, uniform fraction."""
    n = pop.n_agents
    i = int(rng.integers(0, n))
    j = int(rng.integers(0, n - 1))
    if j >= i:
        j += 1
    eps = float(rng.random())
    m_i, m_j = exchange_pair(pop.money[i], pop.money[j],
                             pop.saving[i], pop.saving[j], eps)
    pop.money[i] = m_i
    pop.money[j] = m_j


def run(pop: Population, config: SimConfig, rng=None,
        chunk_size=CHUNK) -> SnapshotSeries:
    """Execute config.n_exchanges trades in place, snapshotting the money
    vector every measure_every exchanges once burn_in has passed.

    Random draws are consumed in fixed-size chunks, so the stream depends
    only on the seed and the exchange count, never on the snapshot
    schedule; with chunk_size=1 the trajectory is identical to calling
    step() repeatedly on the same generator.  Snapshot memory is
    O(n_agents * n_snapshots).
    """
    config.validate()
    if config.n_agents != pop.n_agents or config.total_money != pop.total_money:
        raise ValueError("config does not match the population")
    if rng is None:
        rng = dynamics_rng(config.seed)
    n = pop.n_agents
    total = config.n_exchanges
    snap_times = np.arange(config.burn_in + config.measure_every, total + 1,
                           config.measure_every, dtype=np.int64)
    frames = []
    done = 0
    next_snap = 0
    while done < total:
        k = min(chunk_size, total - done)
        ii = rng.integers(0, n, size=k)
        jj = rng.integers(0, n - 1, size=k)
        jj += jj >= ii          # uniform over ordered distinct pairs
        eps = rng.random(size=k)
        start = 0
        while next_snap < len(snap_times) and snap_times[next_snap] <= done + k:
            stop = int(snap_times[next_snap] - done)
            exchange_kernel(pop.money, pop.saving,
                            ii[start:stop], jj[start:stop], eps[start:stop])
            frames.append(pop.money.copy())
            start = stop
            next_snap += 1
        exchange_kernel(pop.money, pop.saving, ii[start:], jj[start:], eps[start:])
        done += k
    snaps = np.asarray(frames) if frames else np.empty((0, n))
    return SnapshotSeries(snap_times, snaps, pop)


def detect_steady_state(series: SnapshotSeries, window: int, tol: float) -> bool:
    """Trailing two-window test for relaxation.

    Pools the last 2*window snapshots, splits them in half chronologically
    and compares the halves with a two-sample KS distance; True means the
    halves are closer than tol.
    """
    w = int(window)
    if w < 1:
        raise ValueError("window must be at least 1")
    have = series.n_snapshots
    if have < 2 * w:
        raise ValueError(f"need at least {2 * w} snapshots, have {have}")
    tail = series.snapshots[have - 2 * w:]
    return bool(ks_two_sample(tail[:w].ravel(), tail[w:].ravel()) < tol)
