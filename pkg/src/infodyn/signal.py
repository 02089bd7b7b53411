"""Classical signal detection under additive independent noise.

The hidden signal ``X`` takes one of finitely many values ``x_i`` with prior
probabilities ``p_i``; the receiver sees ``xi = X + eps`` where ``eps`` has
density ``f``.  This module provides the Bayes posterior, the discrete and
differential entropies involved, and the mutual information between ``xi``
and ``X``.  Logs are natural; ``*_bits`` helpers divide by ``ln 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate
from scipy.special import entr, logsumexp

from .errors import InvalidParameter, QuadratureFailure, ZeroMarginal

LN2 = math.log(2.0)

#: marginal densities below this are treated as zero (double underflow floor)
MARGINAL_FLOOR = 1e-300
_LOG_MARGINAL_FLOOR = math.log(MARGINAL_FLOOR)

#: default absolute tolerance for entropy quadratures, in nats
QUAD_TOL = 1e-8

NOISE_KINDS = ("gaussian", "uniform", "laplace")

# Integration half-widths, in units of the noise scale.  Laplace tails are
# heavy enough that 10 scales would leave ~5e-4 nats of entropy outside.
_SUPPORT_SCALES = {"gaussian": 10.0, "uniform": 1.0, "laplace": 40.0}


@dataclass(frozen=True)
class NoiseDensity:
    """Zero-centred noise density.

    Parameters
    ----------
    kind : {"gaussian", "uniform", "laplace"}
    scale : float
        Standard deviation (gaussian), half-width (uniform) or Laplace
        scale ``b``.
    """

    kind: str
    scale: float

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise InvalidParameter(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")
        scale = float(self.scale)
        if not (math.isfinite(scale) and scale > 0):
            raise InvalidParameter(f"noise scale must be finite and > 0, got {self.scale!r}")
        object.__setattr__(self, "scale", scale)

    @classmethod
    def gaussian(cls, sigma: float) -> NoiseDensity:
        return cls("gaussian", sigma)

    @classmethod
    def uniform(cls, half_width: float) -> NoiseDensity:
        return cls("uniform", half_width)

    @classmethod
    def laplace(cls, b: float) -> NoiseDensity:
        return cls("laplace", b)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        s = self.scale
        if self.kind == "gaussian":
            return -0.5 * (x / s) ** 2 - math.log(s) - 0.5 * math.log(2 * math.pi)
        if self.kind == "laplace":
            return -np.abs(x) / s - math.log(2 * s)
        return np.where(np.abs(x) <= s, -math.log(2 * s), -np.inf)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def sample(self, rng: np.random.Generator, size=None):
        if self.kind == "gaussian":
            return rng.normal(0.0, self.scale, size)
        if self.kind == "laplace":
            return rng.laplace(0.0, self.scale, size)
        return rng.uniform(-self.scale, self.scale, size)

    @cached_property
    def entropy_nats(self) -> float:
        """Differential entropy in closed form."""
        s = self.scale
        if self.kind == "gaussian":
            return 0.5 * math.log(2 * math.pi * math.e * s * s)
        if self.kind == "laplace":
            return 1.0 + math.log(2 * s)
        return math.log(2 * s)

    @property
    def half_width(self) -> float:
        """Half-width of the interval treated as the support for quadrature."""
        return _SUPPORT_SCALES[self.kind] * self.scale

    @property
    def kinks(self) -> tuple[float, ...]:
        """Offsets where the density is not smooth."""
        if self.kind == "uniform":
            return (-self.scale, self.scale)
        if self.kind == "laplace":
            return (0.0,)
        return ()


@dataclass(frozen=True)
class Observation:
    value: float

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v):
            raise InvalidParameter(f"observation must be finite, got {self.value!r}")
        object.__setattr__(self, "value", v)

    def __float__(self):
        return self.value


def _as_value(xi) -> float:
    return xi.value if isinstance(xi, Observation) else Observation(xi).value


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _check_probabilities(p: np.ndarray, name: str, tol: float = 1e-12) -> None:
    if p.ndim != 1 or p.size == 0:
        raise InvalidParameter(f"{name} must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise InvalidParameter(f"{name} entries must be finite and >= 0")
    total = float(p.sum())
    if abs(total - 1.0) > tol:
        raise InvalidParameter(f"{name} sums to {total!r}, not 1")


@dataclass(frozen=True, eq=False)
class SignalModel:
    """Discrete signal alphabet with prior probabilities and a noise density."""

    values: np.ndarray
    prior: np.ndarray
    noise: NoiseDensity

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        prior = np.array(self.prior, dtype=float).ravel()
        if values.size == 0:
            raise InvalidParameter("signal alphabet must be non-empty")
        if values.shape != prior.shape:
            raise InvalidParameter(f"{values.size} values but {prior.size} prior probabilities")
        if not np.all(np.isfinite(values)):
            raise InvalidParameter("signal values must be finite")
        if np.unique(values).size != values.size:
            raise InvalidParameter("signal values must be pairwise distinct")
        _check_probabilities(prior, "prior")
        if not isinstance(self.noise, NoiseDensity):
            raise InvalidParameter("noise must be a NoiseDensity")
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "prior", _frozen(prior))

    @property
    def size(self) -> int:
        return self.values.size

    @classmethod
    def from_continuous(
        cls,
        density: Callable[[np.ndarray], np.ndarray],
        lo: float,
        hi: float,
        n: int,
        noise: NoiseDensity,
    ) -> SignalModel:
        """Discretise a continuous prior density on ``[lo, hi]`` at ``n`` cell midpoints.

        The discretisation error is that of the midpoint rule; refine ``n``
        until the quantity of interest stops moving.
        """
        if n < 1 or not hi > lo:
            raise InvalidParameter("need n >= 1 and hi > lo")
        edges = np.linspace(lo, hi, n + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        w = np.asarray(density(mids), dtype=float)
        if np.any(w < 0) or not w.sum() > 0:
            raise InvalidParameter("density must be nonnegative with positive mass on [lo, hi]")
        return cls(mids, w / w.sum(), noise)


@dataclass(frozen=True, eq=False)
class Posterior:
    probs: np.ndarray
    conditioning_observation: Observation

    @property
    def entropy(self) -> float:
        return shannon_entropy(self.probs)


# -- Bayes kernel ----------------------------------------------------------


def log_joint(values, prior, noise: NoiseDensity, xi):
    """``log(p_i f(xi - x_i))``; broadcasts over an array of observations.

    For an observation array of shape ``(m,)`` the result is ``(m, N)``.
    """
    values = np.asarray(values, dtype=float)
    xi = np.asarray(xi, dtype=float)[..., None]
    with np.errstate(divide="ignore"):
        logp = np.log(np.asarray(prior, dtype=float))
    return logp + noise.logpdf(xi - values)


def _logsumexp(a: np.ndarray) -> np.ndarray:
    # scipy's logsumexp costs ~10x more on the short rows used here
    top = a.max(axis=-1, keepdims=True)
    safe = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(divide="ignore"):
        return safe + np.log(np.exp(a - safe).sum(axis=-1, keepdims=True))


def bayes_weights(values, prior, noise: NoiseDensity, xi) -> np.ndarray:
    """Posterior over ``values`` given one observation.

    Unlike :func:`posterior` the alphabet may contain repeated values, which
    is what degenerate spectra and symmetric bearing models need.
    """
    lj = log_joint(values, prior, noise, xi)
    lm = _logsumexp(lj)
    if np.any(lm < _LOG_MARGINAL_FLOOR):
        raise ZeroMarginal(f"marginal density at xi={xi!r} is below {MARGINAL_FLOOR:g}")
    return np.exp(lj - lm)


def marginal_density(model: SignalModel, xi) -> float:
    """Density of ``xi``: ``sum_i p_i f(xi - x_i)``."""
    return float(np.exp(logsumexp(log_joint(model.values, model.prior, model.noise, _as_value(xi)))))


def marginal_logpdf(model: SignalModel, xi):
    """Vectorised log of :func:`marginal_density`."""
    return logsumexp(log_joint(model.values, model.prior, model.noise, xi), axis=-1)


def posterior(model: SignalModel, xi) -> Posterior:
    obs = xi if isinstance(xi, Observation) else Observation(xi)
    probs = bayes_weights(model.values, model.prior, model.noise, obs.value)
    return Posterior(_frozen(probs), obs)


def posterior_matrix(model: SignalModel, xis) -> np.ndarray:
    """Posteriors for many observations at once, shape ``(len(xis), N)``."""
    return bayes_weights(model.values, model.prior, model.noise, np.asarray(xis, dtype=float))


def posterior_mean(model: SignalModel, xi) -> float:
    probs = posterior(model, xi).probs
    mean = float(probs @ model.values)
    # guard against rounding pushing the convex combination outside the hull
    return min(max(mean, float(model.values.min())), float(model.values.max()))


def posterior_sequence(model: SignalModel, xis: Iterable) -> list[Posterior]:
    """Condition on conditionally independent observations one at a time."""
    out = []
    current = model
    for xi in xis:
        post = posterior(current, xi)
        out.append(post)
        current = SignalModel(model.values, post.probs / post.probs.sum(), model.noise)
    return out


# -- sampling --------------------------------------------------------------


def sample_observations(model: SignalModel, rng: np.random.Generator, n: int) -> np.ndarray:
    """Ancestral samples of ``xi = X + eps``."""
    idx = rng.choice(model.size, size=n, p=model.prior)
    return model.values[idx] + model.noise.sample(rng, n)


def sample_observation(model: SignalModel, rng: np.random.Generator) -> Observation:
    return Observation(sample_observations(model, rng, 1)[0])


# -- entropies -------------------------------------------------------------


def shannon_entropy(p) -> float:
    """Discrete entropy in nats with ``0 log 0 = 0``."""
    return float(entr(np.asarray(p, dtype=float)).sum())


def _probs(x) -> np.ndarray:
    if isinstance(x, Posterior):
        return x.probs
    if isinstance(x, SignalModel):
        return x.prior
    return np.asarray(x, dtype=float)


def entropy_change(prior, post) -> float:
    """``S(posterior) - S(prior)`` in nats; negative when information is gained."""
    return shannon_entropy(_probs(post)) - shannon_entropy(_probs(prior))


def mean_entropy_change(model: SignalModel, n: int, rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo mean of the entropy change over ``xi`` drawn from the marginal.

    Returns ``(mean, standard_error)``.
    """
    xis = sample_observations(model, rng, n)
    post = posterior_matrix(model, xis)
    ds = entr(post).sum(axis=1) - shannon_entropy(model.prior)
    return float(ds.mean()), float(ds.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf


def _merge(intervals: list[tuple[float, float]]) -> list[tuple[float, float]]:
    merged: list[tuple[float, float]] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def integrate_pieces(
    fn: Callable[[float], float],
    intervals: Sequence[tuple[float, float]],
    breakpoints: Iterable[float] = (),
    tol: float = QUAD_TOL,
) -> float:
    """Adaptive Gauss-Kronrod over a union of intervals split at ``breakpoints``.

    Raises :class:`QuadratureFailure` if the summed error estimate exceeds ``tol``.
    """
    cuts = sorted(set(float(b) for b in breakpoints))
    pieces = []
    for lo, hi in _merge(list(intervals)):
        inner = [c for c in cuts if lo < c < hi]
        edges = [lo, *inner, hi]
        pieces.extend(zip(edges[:-1], edges[1:]))
    total = 0.0
    err = 0.0
    piece_tol = tol / (10 * max(len(pieces), 1))
    for lo, hi in pieces:
        val, abserr, *_ = integrate.quad(fn, lo, hi, epsabs=piece_tol, epsrel=0.0, limit=500, full_output=1)
        total += val
        err += abserr
    if not (math.isfinite(total) and err <= tol):
        raise QuadratureFailure(f"quadrature error estimate {err:.3g} exceeds tolerance {tol:.3g}")
    return total


def _mixture_pieces(values, noise: NoiseDensity):
    w = noise.half_width
    intervals = [(x - w, x + w) for x in values]
    kinks = [x + k for x in values for k in noise.kinks]
    return intervals, kinks


def noise_entropy(noise: NoiseDensity) -> float:
    """Differential entropy ``-int f log f`` in nats (closed form)."""
    return noise.entropy_nats


def noise_entropy_quadrature(noise: NoiseDensity, tol: float = QUAD_TOL) -> float:
    """Same quantity as :func:`noise_entropy`, by numerical integration."""

    def integrand(x):
        lf = float(noise.logpdf(x))
        return 0.0 if lf == -math.inf else -math.exp(lf) * lf

    intervals, kinks = _mixture_pieces([0.0], noise)
    return integrate_pieces(integrand, intervals, kinks, tol)


def observation_entropy(model: SignalModel, tol: float = QUAD_TOL) -> float:
    """Differential entropy of the marginal density of ``xi``, in nats."""
    live = model.prior > 0
    values, prior = model.values[live], model.prior[live]
    logp = np.log(prior)

    def integrand(y):
        lm = float(logsumexp(logp + model.noise.logpdf(y - values)))
        return 0.0 if lm == -math.inf else -math.exp(lm) * lm

    intervals, kinks = _mixture_pieces(values, model.noise)
    return integrate_pieces(integrand, intervals, kinks, tol)


def mutual_information(model: SignalModel, tol: float = QUAD_TOL) -> float:
    """Mutual information between ``xi`` and ``X`` in nats: ``S_xi - S_eps``."""
    if np.count_nonzero(model.prior) == 1:
        return 0.0
    j = observation_entropy(model, tol) - noise_entropy(model.noise)
    if j < 0:
        if j < -tol:
            raise QuadratureFailure(f"negative mutual information {j:.3g} beyond tolerance")
        j = 0.0
    return j


def mutual_information_bits(model: SignalModel, tol: float = QUAD_TOL) -> float:
    return mutual_information(model, tol) / LN2
