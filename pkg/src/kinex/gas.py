"""Ideal-gas reference channel.

Analytic energy densities plus a microcanonical pair-collision sampler.
A collision pools the two particles' energies and splits the pool with a
Beta(3/2, 3/2) draw, which is the marginal split between two
three-degree-of-freedom partners on a fixed energy shell. The per-particle
steady state is then the Maxwell-Boltzmann (Gamma 3/2) density, whose
vanishing weight at zero energy is the structural contrast with the
market's exponential.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import beta32_cdf, beta32_quantile, collide_kernel, gamma32_cdf
from .market import CONSERVATION_RTOL, CHUNK, GibbsModel, SnapshotSeries


@dataclass(frozen=True)
class MBModel:
    """Maxwell-Boltzmann energy distribution, a Gamma(3/2, scale) law.

    Density (2/sqrt(pi)) * scale**-1.5 * sqrt(e) * exp(-e/scale); the scale
    is the temperature in energy units, the mean is 1.5 * scale and the
    mode sits at scale / 2.
    """

    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @classmethod
    def from_mean(cls, mean) -> "MBModel":
        """Model whose scale is pinned by a mean energy (scale = 2/3 mean)."""
        return cls(2.0 * float(mean) / 3.0)

    @property
    def mean(self) -> float:
        return 1.5 * self.scale

    @property
    def mode(self) -> float:
        return 0.5 * self.scale

    def pdf(self, energy):
        e = np.asarray(energy, dtype=np.float64)
        if (e < 0).any():
            raise ValueError("energy must be non-negative")
        t = e / self.scale
        out = (2.0 / math.sqrt(math.pi)) / self.scale * np.sqrt(t) * np.exp(-t)
        return float(out) if e.ndim == 0 else out

    def cdf(self, energy):
        e = np.asarray(energy, dtype=np.float64)
        if (e < 0).any():
            raise ValueError("energy must be non-negative")
        out = gamma32_cdf(e / self.scale)
        return float(out) if e.ndim == 0 else out


@dataclass
class GasEnsemble:
    """Mutable gas state: one kinetic energy per particle."""

    energy: np.ndarray
    n_particles: int
    total_energy: float

    def validate(self):
        if self.n_particles < 2:
            raise ValueError("n_particles must be at least 2")
        if not self.total_energy > 0:
            raise ValueError("total_energy must be positive")
        if self.energy.shape != (self.n_particles,):
            raise ValueError("energy needs one entry per particle")
        if (self.energy < 0).any():
            raise ValueError("energy must be non-negative")
        if self.conservation_error() > CONSERVATION_RTOL:
            raise ValueError("total energy drifted beyond tolerance")

    def conservation_error(self) -> float:
        return abs(float(self.energy.sum()) - self.total_energy) / self.total_energy

    @property
    def mean_energy(self) -> float:
        return self.total_energy / self.n_particles


def init_gas(n_particles, total_energy) -> GasEnsemble:
    """Equal-energy starting ensemble (the split is start-independent)."""
    n = int(n_particles)
    e = float(total_energy)
    if n < 2:
        raise ValueError("n_particles must be at least 2")
    if not e > 0:
        raise ValueError("total_energy must be positive")
    ens = GasEnsemble(np.full(n, e / n), n, e)
    ens.validate()
    return ens


def mb_pdf(energy, model: MBModel):
    """Maxwell-Boltzmann energy density; zero at zero energy."""
    return model.pdf(energy)


def gibbs_pdf(money, model: GibbsModel):
    """Exponential money density; maximal at zero money."""
    return model.pdf(money)


def beta_3_2_cdf(x):
    """CDF of Beta(3/2, 3/2) in closed elementary form."""
    arr = np.asarray(x, dtype=np.float64)
    if ((arr < 0) | (arr > 1)).any():
        raise ValueError("x must lie in [0,1]")
    out = beta32_cdf(arr)
    return float(out) if arr.ndim == 0 else out


def beta_3_2_quantile(u):
    """Inverse CDF of Beta(3/2, 3/2), by bisection to an interval of 1e-12."""
    arr = np.asarray(u, dtype=np.float64)
    if ((arr < 0) | (arr > 1)).any():
        raise ValueError("u must lie in [0,1]")
    out = beta32_quantile(arr)
    return float(out) if arr.ndim == 0 else out


def collide(e_i, e_j, u):
    """One pair collision: split the pooled energy at the Beta(3/2,3/2)
    quantile of u. The second output is pool minus the first, so the pair
    sum is conserved exactly."""
    e_i = float(e_i)
    e_j = float(e_j)
    assert e_i >= 0.0 and e_j >= 0.0
    share = beta_3_2_quantile(u)
    total = e_i + e_j
    first = share * total
    return first, total - first


def run_collisions(ens: GasEnsemble, n_collisions, rng, burn_in=0,
                   measure_every=0, chunk_size=CHUNK) -> SnapshotSeries:
    """Run pair collisions in place, snapshotting the energy vector every
    measure_every collisions once burn_in has passed (0 disables snapshots).

    Chunked draw consumption follows market.run: the random stream depends
    only on the generator state and the collision count.
    """
    ens.validate()
    total = int(n_collisions)
    burn_in = int(burn_in)
    measure_every = int(measure_every)
    if total < 0:
        raise ValueError("n_collisions must be non-negative")
    if measure_every < 0:
        raise ValueError("measure_every must be non-negative")
    n = ens.n_particles
    if measure_every > 0:
        snap_times = np.arange(burn_in + measure_every, total + 1,
                               measure_every, dtype=np.int64)
    else:
        snap_times = np.empty(0, dtype=np.int64)
    frames = []
    done = 0
    next_snap = 0
    while done < total:
        k = min(chunk_size, total - done)
        ii = rng.integers(0, n, size=k)
        jj = rng.integers(0, n - 1, size=k)
        jj += jj >= ii
        shares = beta32_quantile(rng.random(size=k))
        start = 0
        while next_snap < len(snap_times) and snap_times[next_snap] <= done + k:
            stop = int(snap_times[next_snap] - done)
            collide_kernel(ens.energy, ii[start:stop], jj[start:stop],
                           shares[start:stop])
            frames.append(ens.energy.copy())
            start = stop
            next_snap += 1
        collide_kernel(ens.energy, ii[start:], jj[start:], shares[start:])
        done += k
    snaps = np.asarray(frames) if frames else np.empty((0, n))
    return SnapshotSeries(snap_times, snaps, ens)
