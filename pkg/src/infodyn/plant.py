"""Plant-scale scenarios: bearing inference on a circle and erasure accounting.

A seedling circumnutates, sampling a volatile gradient along its current
heading.  Each reading is ``kappa * cos(theta* - heading) + noise``; the
plant updates a discrete distribution over bearing bins and grows toward
the circular mean of that distribution.  The entropy it sheds is logged in
bits, and erasing those bits later costs at least ``k_B T ln 2`` each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.constants import k as BOLTZMANN
from scipy.integrate import trapezoid

from .errors import InvalidParameter, NegativeBits
from .signal import LN2, NoiseDensity, bayes_weights, shannon_entropy

TWO_PI = 2.0 * math.pi


def wrap(angle):
    """Map angles to ``(-pi, pi]``."""
    a = np.mod(np.asarray(angle, dtype=float) + math.pi, TWO_PI) - math.pi
    a = np.where(a == -math.pi, math.pi, a)
    return float(a) if a.ndim == 0 else a


def circular_mean(probs, angles) -> float:
    z = np.sum(np.asarray(probs) * np.exp(1j * np.asarray(angles)))
    return float(np.angle(z))


# -- ledger ------------------------------------------------------------------


@dataclass(frozen=True)
class InfoLedger:
    """Bits processed per step and the minimum heat of erasing them.

    ``step_bits`` keeps the signed per-step record; ``bits_processed`` is
    their sum.  ``landauer_heat`` only grows through :func:`landauer_update`.
    """

    temperature: float
    step_bits: tuple[float, ...] = ()
    bits_erased: float = 0.0
    landauer_heat: float = 0.0
    external_energy: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.temperature) and self.temperature > 0):
            raise InvalidParameter("temperature must be > 0 kelvin")
        if self.external_energy is not None and not self.external_energy > 0:
            raise InvalidParameter("external_energy must be > 0 when given")

    @property
    def bits_processed(self) -> float:
        return math.fsum(self.step_bits)

    @property
    def joules_per_bit(self) -> float:
        return BOLTZMANN * self.temperature * LN2

    @property
    def efficiency(self) -> float | None:
        """Landauer heat as a fraction of the external energy input."""
        if self.external_energy is None:
            return None
        return self.landauer_heat / self.external_energy

    def record(self, bits: float) -> InfoLedger:
        return replace(self, step_bits=(*self.step_bits, float(bits)))


def landauer_update(ledger: InfoLedger, bits_erased: float) -> InfoLedger:
    """Charge the erasure of ``bits_erased`` bits at the ledger's temperature."""
    bits_erased = float(bits_erased)
    if not bits_erased >= 0:
        raise NegativeBits(f"cannot erase {bits_erased!r} bits")
    return replace(
        ledger,
        bits_erased=ledger.bits_erased + bits_erased,
        landauer_heat=ledger.landauer_heat + bits_erased * ledger.joules_per_bit,
    )


# -- circular scenario ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CircularScenario:
    """Host-bearing inference problem.

    Parameters
    ----------
    n_bins : int
        Number of bearing bins ``theta_k = 2 pi k / n_bins``.
    true_bearing : float
        Hidden host bearing (radians); only the simulator reads it.
    kappa, sensor_sigma : float
        Gradient strength and gaussian sensor noise.
    sweep_period : float
        Steps per circumnutation revolution; heading is
        ``heading0 + 2 pi t / sweep_period``.
    prior : array, optional
        Defaults to uniform.
    memory_horizon : float, optional
        If set, the belief relaxes toward the prior with this time constant
        (in steps) after every update.
    erasure_fraction : float
        Fraction of the net bits erased into the ledger when a run ends.
    """

    n_bins: int
    true_bearing: float
    kappa: float
    sensor_sigma: float
    sweep_period: float = 16.0
    heading0: float = 0.0
    prior: np.ndarray | None = None
    memory_horizon: float | None = None
    erasure_fraction: float = 1.0

    def __post_init__(self):
        if int(self.n_bins) != self.n_bins or self.n_bins < 4:
            raise InvalidParameter("n_bins must be an integer >= 4")
        if not (self.kappa > 0 and self.sensor_sigma > 0):
            raise InvalidParameter("kappa and sensor_sigma must be > 0")
        if not self.sweep_period > 0:
            raise InvalidParameter("sweep_period must be > 0")
        if self.memory_horizon is not None and not self.memory_horizon >= 1:
            raise InvalidParameter("memory_horizon must be >= 1 step")
        if not 0 <= self.erasure_fraction <= 1:
            raise InvalidParameter("erasure_fraction must lie in [0, 1]")
        m = int(self.n_bins)
        prior = np.full(m, 1.0 / m) if self.prior is None else np.array(self.prior, dtype=float)
        if prior.shape != (m,) or np.any(prior < 0) or abs(prior.sum() - 1) > 1e-12:
            raise InvalidParameter("prior must be a normalised vector of length n_bins")
        prior.setflags(write=False)
        object.__setattr__(self, "n_bins", m)
        object.__setattr__(self, "prior", prior)

    @property
    def bins(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n_bins) / self.n_bins

    def heading(self, t: int) -> float:
        return self.heading0 + TWO_PI * t / self.sweep_period

    def signal_means(self, t: int, bearings=None) -> np.ndarray:
        """Noise-free reading at step ``t`` for each candidate bearing."""
        b = self.bins if bearings is None else np.asarray(bearings, dtype=float)
        return self.kappa * np.cos(b - self.heading(t))

    @property
    def noise(self) -> NoiseDensity:
        return NoiseDensity.gaussian(self.sensor_sigma)


def cuscuta_step(scenario: CircularScenario, posterior_prev, t: int, rng: np.random.Generator):
    """One nutation reading and Bayes update; returns ``(posterior, bits_gained)``."""
    prev = np.asarray(posterior_prev, dtype=float)
    xi = float(scenario.signal_means(t, scenario.true_bearing)) + scenario.sensor_sigma * rng.standard_normal()
    post = bayes_weights(scenario.signal_means(t), prev, scenario.noise, xi)
    if scenario.memory_horizon is not None:
        lam = 1.0 / scenario.memory_horizon
        post = (1 - lam) * post + lam * scenario.prior
    post = post / post.sum()
    bits = (shannon_entropy(prev) - shannon_entropy(post)) / LN2
    return post, bits


@dataclass(frozen=True, eq=False)
class CuscutaRun:
    posteriors: np.ndarray
    step_bits: np.ndarray
    growth_direction: float
    ledger: InfoLedger
    true_bearing: float

    @property
    def bearing_error(self) -> float:
        return abs(wrap(self.growth_direction - self.true_bearing))

    @property
    def cumulative_bits(self) -> float:
        return self.ledger.bits_processed


def growth_direction(scenario: CircularScenario, probs, method: str = "mean") -> float:
    if method == "mean":
        return circular_mean(probs, scenario.bins)
    if method == "argmax":
        return float(scenario.bins[int(np.argmax(probs))])
    raise InvalidParameter(f"unknown growth direction method {method!r}")


def run_cuscuta(
    scenario: CircularScenario,
    n_steps: int,
    rng: np.random.Generator,
    temperature: float = 300.0,
    direction: str = "mean",
    reset: bool = True,
) -> CuscutaRun:
    """Run ``n_steps`` nutation readings from the scenario prior.

    With ``reset`` the run ends by erasing ``erasure_fraction`` of the net
    bits gained into the ledger.
    """
    post = scenario.prior.copy()
    history = [post]
    ledger = InfoLedger(temperature)
    bits = np.empty(n_steps)
    for t in range(n_steps):
        post, b = cuscuta_step(scenario, post, t, rng)
        history.append(post)
        bits[t] = b
        ledger = ledger.record(b)
    if reset:
        ledger = landauer_update(ledger, max(0.0, scenario.erasure_fraction * ledger.bits_processed))
    heading = growth_direction(scenario, post, direction)
    return CuscutaRun(np.array(history), bits, heading, ledger, scenario.true_bearing)


# -- heliotropism -----------------------------------------------------------------


def _transition_kernel(n_bins: int, std: float, resolution: int = 64) -> np.ndarray:
    """Bin-to-bin transition probabilities for a gaussian step of ``std`` radians.

    The position inside the starting bin is taken as uniform, so the
    gaussian is convolved with a triangle one bin wide on each side; this
    keeps sub-bin steps from being rounded away.
    """
    width = TWO_PI / n_bins
    reach = 3.0 * std + width
    y = np.linspace(-reach, reach, int(2 * resolution * reach / width) + 1)
    density = np.exp(-0.5 * (y / std) ** 2)
    offsets = np.arange(n_bins) * width
    k = np.zeros(n_bins)
    for d in range(n_bins):
        for shift in (offsets[d], offsets[d] - TWO_PI):
            tri = np.maximum(0.0, 1.0 - np.abs(y - shift) / width)
            k[d] += trapezoid(tri * density, y)
    return k / k.sum()


def _diffuse(p: np.ndarray, kernel_fft: np.ndarray) -> np.ndarray:
    q = np.fft.irfft(np.fft.rfft(p) * kernel_fft, n=p.size)
    q = np.maximum(q, 0.0)
    return q / q.sum()


@dataclass(frozen=True, eq=False)
class TrackingRecord:
    drift_rate: float
    coupling: float
    sun: np.ndarray
    estimates: np.ndarray
    errors: np.ndarray

    @property
    def mean_error(self) -> float:
        return float(self.errors.mean())

    @property
    def ratio(self) -> float:
        return self.drift_rate / self.coupling if self.coupling > 0 else math.inf

    #: expected error of a predictor that never looks (uniform belief, uniform target)
    baseline_error: float = field(default=math.pi / 2)


def run_heliotropism(
    drift_rate: float,
    coupling: float,
    n_steps: int,
    rng: np.random.Generator,
    n_bins: int = 64,
    sweep_period: float = 16.0,
    process_std: float | None = None,
    initial_bearing: float | None = None,
) -> TrackingRecord:
    """Track a source drifting at ``drift_rate`` rad/step.

    Readings are ``coupling * cos(sun - heading) + N(0, 1)``.  The plant's
    belief does not know the drift direction: before each reading it is
    blurred by a random step of ``process_std`` (default ``drift_rate``)
    radians.
    """
    if drift_rate < 0 or coupling < 0:
        raise InvalidParameter("drift_rate and coupling must be >= 0")
    if n_bins < 4:
        raise InvalidParameter("n_bins must be >= 4")
    start = rng.uniform(0, TWO_PI) if initial_bearing is None else float(initial_bearing)
    bins = TWO_PI * np.arange(n_bins) / n_bins
    std = drift_rate if process_std is None else process_std
    kernel_fft = np.fft.rfft(_transition_kernel(n_bins, std)) if std > 0 else None
    noise = NoiseDensity.gaussian(1.0)
    post = np.full(n_bins, 1.0 / n_bins)
    sun = start + drift_rate * np.arange(n_steps)
    estimates = np.empty(n_steps)
    for t in range(n_steps):
        if kernel_fft is not None:
            post = _diffuse(post, kernel_fft)
        heading = TWO_PI * t / sweep_period
        xi = coupling * math.cos(sun[t] - heading) + rng.standard_normal()
        if coupling > 0:
            post = bayes_weights(coupling * np.cos(bins - heading), post, noise, xi)
        estimates[t] = circular_mean(post, bins)
    errors = np.abs(wrap(estimates - sun))
    return TrackingRecord(float(drift_rate), float(coupling), wrap(sun), estimates, errors)
