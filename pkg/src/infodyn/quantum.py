"""Finite-dimensional quantum states updated by noisy energy information.

A state ``sum_i c_i |E_i>`` is written in the energy eigenbasis of a
Hamiltonian with eigenvalues ``E_i``.  The system receives ``xi = H + eps``
and its amplitudes are rescaled so that the squared moduli become the Bayes
posterior over energies.  An observer who does not see ``xi`` describes the
system by the observation-averaged density matrix, whose off-diagonal
entries are damped by the overlap factors ``Lambda_ij``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import entr, logsumexp

from . import streams
from .errors import DimensionMismatch, InvalidParameter, NumericalFailure, PhasePresent, ZeroMarginal
from .signal import _LOG_MARGINAL_FLOOR, NoiseDensity, integrate_pieces, log_joint

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
EIGEN_FLOOR = -1e-10
LAMBDA_TOL = 1e-11

MC_CHUNK = 8192


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QuantumSystem:
    """Hamiltonian spectrum in its own eigenbasis."""

    energies: np.ndarray

    def __post_init__(self):
        e = np.array(self.energies, dtype=float).ravel()
        if e.size == 0 or not np.all(np.isfinite(e)):
            raise InvalidParameter("energies must be a non-empty sequence of finite numbers")
        object.__setattr__(self, "energies", _frozen(e))

    @property
    def dim(self) -> int:
        return self.energies.size

    @cached_property
    def gaps(self) -> np.ndarray:
        """``omega_ij = E_i - E_j``."""
        return _frozen(self.energies[:, None] - self.energies[None, :])

    @property
    def hamiltonian(self) -> np.ndarray:
        return np.diag(self.energies).astype(complex)


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        c = np.array(self.amplitudes, dtype=complex).ravel()
        if c.size == 0 or not np.all(np.isfinite(c)):
            raise InvalidParameter("amplitudes must be a non-empty sequence of finite numbers")
        norm2 = float(np.vdot(c, c).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise InvalidParameter(f"state is not normalised (sum |c|^2 = {norm2!r})")
        object.__setattr__(self, "amplitudes", _frozen(c))

    @classmethod
    def from_probabilities(cls, probs, phases=None) -> StateVector:
        """State with moduli ``sqrt(probs)``; phases default to zero."""
        p = np.asarray(probs, dtype=float)
        if np.any(p < 0):
            raise InvalidParameter("probabilities must be >= 0")
        amp = np.sqrt(p / p.sum()).astype(complex)
        if phases is not None:
            amp = amp * np.exp(1j * np.asarray(phases, dtype=float))
        return cls(amp)

    @classmethod
    def basis(cls, n: int, k: int) -> StateVector:
        c = np.zeros(n, dtype=complex)
        c[k] = 1.0
        return cls(c)

    @classmethod
    def normalised(cls, amplitudes) -> StateVector:
        c = np.asarray(amplitudes, dtype=complex)
        return cls(c / np.linalg.norm(c))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def density(self) -> DensityMatrix:
        c = self.amplitudes
        return DensityMatrix(np.outer(c, c.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        rho = np.array(self.entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise InvalidParameter("density matrix must be square")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
            raise InvalidParameter("density matrix is not Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > NORM_TOL:
            raise InvalidParameter(f"density matrix has trace {tr!r}")
        rho = 0.5 * (rho + rho.conj().T)
        if np.linalg.eigvalsh(rho).min() < EIGEN_FLOOR:
            raise InvalidParameter("density matrix has a negative eigenvalue")
        object.__setattr__(self, "entries", _frozen(rho))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def expectation(self, observable) -> float:
        """``tr(rho F)``."""
        f = _check_observable(observable, self.dim)
        return float(np.trace(self.entries @ f).real)

    @property
    def purity(self) -> float:
        return float(np.sum(np.abs(self.entries) ** 2))


def _check_observable(observable, n: int) -> np.ndarray:
    f = np.asarray(observable, dtype=complex)
    if f.shape != (n, n):
        raise DimensionMismatch(f"observable shape {f.shape} does not match dimension {n}")
    if np.max(np.abs(f - f.conj().T)) > HERMITIAN_TOL * max(1.0, np.max(np.abs(f))):
        raise InvalidParameter("observable is not Hermitian")
    return f


def expectation(state: StateVector, observable) -> float:
    """``<Psi|F|Psi>`` for a Hermitian matrix ``F``."""
    f = _check_observable(observable, state.dim)
    c = state.amplitudes
    val = np.vdot(c, f @ c)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise NumericalFailure(f"expectation has imaginary residue {val.imag:.3g}")
    return float(val.real)


def _check_dims(system: QuantumSystem, state: StateVector) -> None:
    if system.dim != state.dim:
        raise DimensionMismatch(f"state has dimension {state.dim}, system has {system.dim}")


def update_factors(levels, probs, noise: NoiseDensity, xi) -> np.ndarray:
    """Amplitude multipliers ``sqrt(pi_i / p_i) = sqrt(f(xi - E_i) / p(xi))``.

    Works on a single observation or an array of them (one row each).
    Raises :class:`ZeroMarginal` if the marginal density underflows.
    """
    lj = log_joint(levels, probs, noise, xi)
    lm = logsumexp(lj, axis=-1, keepdims=True)
    if np.any(lm < _LOG_MARGINAL_FLOOR):
        raise ZeroMarginal("marginal density of the observation is below the underflow floor")
    lf = noise.logpdf(np.asarray(xi, dtype=float)[..., None] - np.asarray(levels, dtype=float))
    return np.exp(0.5 * (lf - lm))


def single_shot_update(system: QuantumSystem, state: StateVector, noise: NoiseDensity, xi) -> StateVector:
    """State after the system learns ``xi = H + eps``; phases are preserved."""
    _check_dims(system, state)
    xi = float(xi)
    c = state.amplitudes
    new = c * update_factors(system.energies, state.probabilities, noise, xi)
    return StateVector(new / np.linalg.norm(new))


def overlap_factor(noise: NoiseDensity, omega: float, tol: float = LAMBDA_TOL) -> float:
    """``int sqrt(f(x) f(x + omega)) dx`` by adaptive quadrature."""
    omega = float(omega)
    if omega == 0.0:
        return 1.0
    w = noise.half_width
    if noise.kind == "uniform" and abs(omega) >= 2 * w:
        return 0.0

    def integrand(x):
        s = float(noise.logpdf(x)) + float(noise.logpdf(x + omega))
        return 0.0 if s == -math.inf else math.exp(0.5 * s)

    intervals = [(-w, w), (-omega - w, -omega + w)]
    if noise.kind != "uniform":
        # for large gaps the integrand peaks between the two supports
        intervals.append((-0.5 * omega - w, -0.5 * omega + w))
    kinks = [k for k in noise.kinks] + [k - omega for k in noise.kinks] + [-0.5 * omega]
    return min(1.0, integrate_pieces(integrand, intervals, kinks, tol))


def decoherence_factor(system: QuantumSystem, noise: NoiseDensity, i: int, j: int) -> float:
    return overlap_factor(noise, system.gaps[i, j])


def decoherence_matrix(system: QuantumSystem, noise: NoiseDensity) -> np.ndarray:
    """Symmetric matrix of all ``Lambda_ij`` with unit diagonal."""
    n = system.dim
    lam = np.eye(n)
    cache: dict[float, float] = {}
    for i in range(n):
        for j in range(i + 1, n):
            omega = abs(float(system.gaps[i, j]))
            if omega not in cache:
                cache[omega] = overlap_factor(noise, omega)
            lam[i, j] = lam[j, i] = cache[omega]
    return lam


def averaged_density_analytic(system: QuantumSystem, state: StateVector, noise: NoiseDensity) -> DensityMatrix:
    """Observation-averaged density matrix ``sqrt(p_i p_j) Lambda_ij``.

    Only valid for real nonnegative amplitudes; use
    :func:`averaged_density_mc` otherwise.
    """
    _check_dims(system, state)
    c = state.amplitudes
    if np.any(np.abs(c.imag) > NORM_TOL) or np.any(c.real < -NORM_TOL):
        raise PhasePresent("analytic averaging requires zero-phase amplitudes")
    p = state.probabilities
    root = np.sqrt(p)
    rho = np.outer(root, root) * decoherence_matrix(system, noise)
    rho[np.diag_indices_from(rho)] = p
    return DensityMatrix(rho)


def sample_updated_states(
    system: QuantumSystem,
    state: StateVector,
    noise: NoiseDensity,
    n_samples: int,
    rng: np.random.Generator,
    threads: int | None = None,
) -> np.ndarray:
    """Post-update amplitudes for ``n_samples`` draws of ``xi``, shape ``(n_samples, n)``.

    The budget is cut into fixed chunks, each with its own spawned stream, so
    the output does not depend on ``threads``.
    """
    _check_dims(system, state)
    if n_samples < 1:
        raise InvalidParameter("n_samples must be >= 1")
    sizes = streams.chunk_sizes(n_samples, MC_CHUNK)
    children = streams.substreams(rng, len(sizes))
    c = state.amplitudes
    p = state.probabilities
    e = system.energies

    def run(job):
        m, child = job
        idx = child.choice(e.size, size=m, p=p / p.sum())
        xis = e[idx] + noise.sample(child, m)
        amps = c * update_factors(e, p, noise, xis)
        return amps / np.linalg.norm(amps, axis=1, keepdims=True)

    return np.concatenate(streams.ordered_map(run, list(zip(sizes, children)), threads))


def outer_mean(amps: np.ndarray) -> np.ndarray:
    """Mean of ``|psi><psi|`` over the rows of ``amps``."""
    rho = amps.T @ amps.conj() / amps.shape[0]
    return 0.5 * (rho + rho.conj().T)


def averaged_density_mc(
    system: QuantumSystem,
    state: StateVector,
    noise: NoiseDensity,
    n_samples: int,
    rng: np.random.Generator,
    threads: int | None = None,
) -> DensityMatrix:
    """Monte Carlo estimate of the observation-averaged density matrix."""
    amps = sample_updated_states(system, state, noise, n_samples, rng, threads)
    rho = outer_mean(amps)
    rho /= np.trace(rho).real
    return DensityMatrix(rho)


def bootstrap_stderr(amps: np.ndarray, n_boot: int, rng: np.random.Generator) -> np.ndarray:
    """Bootstrap standard error of each entry of :func:`outer_mean`.

    Returned as a complex matrix whose real and imaginary parts are the
    standard errors of the corresponding parts of the estimate.
    """
    m, n = amps.shape
    outer = (amps[:, :, None] * amps[:, None, :].conj()).reshape(m, n * n)
    reps = np.empty((n_boot, n * n), dtype=complex)
    for b in range(n_boot):
        counts = np.bincount(rng.integers(0, m, m), minlength=m)
        reps[b] = counts @ outer / m
    se = reps.real.std(axis=0, ddof=1) + 1j * reps.imag.std(axis=0, ddof=1)
    return se.reshape(n, n)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """``-tr(rho ln rho)`` in nats."""
    try:
        lam = np.linalg.eigvalsh(rho.entries)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver failed: {exc}") from exc
    lam = np.where((lam < 0) & (lam >= EIGEN_FLOOR), 0.0, lam)
    return float(entr(lam).sum())
