"""Continuous-time state reduction as repeated Bayesian updating.

Each time step applies the unitary ``exp(-i H dt)`` and then a single-shot
update on the eigenbasis of the monitored observable ``L``, using gaussian
noise of variance ``1 / (s^2 dt)``.  The squared amplitudes on the
``L``-eigenbasis are then martingales, ensemble coherences between levels
``l_i`` and ``l_j`` decay like ``exp(-s^2 (l_i - l_j)^2 t / 8)``, and
individual trajectories collapse onto ``L``-eigenstates with Born
frequencies when ``[H, L] = 0``.

Trajectories are simulated in batches.  Every trajectory owns a stream
spawned from the master generator by index and draws its random numbers in
fixed blocks, so results do not depend on batch layout or thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numba
import numpy as np
from scipy import stats

from . import streams
from .errors import (
    DimensionMismatch,
    FitFailure,
    InvalidParameter,
    NonConverged,
    StabilityViolation,
    ZeroMarginal,
)
from .quantum import StateVector
from .signal import MARGINAL_FLOOR

#: upper bound on s^2 dt span(L)^2
STABILITY_CEILING = 0.1
#: trajectory counts as collapsed once Var(L) < COLLAPSE_VAR * span^2
COLLAPSE_VAR = 1e-6
NORM_RESIDUE = 1e-6

DRAW_BLOCK = 256
TRAJ_BATCH = 512

LOG_FLOOR = math.log(MARGINAL_FLOOR)


def _hermitian(a, name: str) -> np.ndarray:
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidParameter(f"{name} must be a square matrix")
    if not np.all(np.isfinite(m)):
        raise InvalidParameter(f"{name} has non-finite entries")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12:
        raise InvalidParameter(f"{name} is not Hermitian")
    m = 0.5 * (m + m.conj().T)
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class DynamicsSpec:
    """Hamiltonian, monitored observable, coupling strength and time grid.

    ``coupling = 0`` switches the measurement off and leaves plain
    Schrodinger evolution.
    """

    hamiltonian: np.ndarray
    lindblad: np.ndarray
    coupling: float
    dt: float
    horizon: float

    def __post_init__(self):
        h = _hermitian(self.hamiltonian, "hamiltonian")
        l = _hermitian(self.lindblad, "lindblad")
        if h.shape != l.shape:
            raise DimensionMismatch(f"hamiltonian {h.shape} and lindblad {l.shape} differ in shape")
        s, dt, horizon = float(self.coupling), float(self.dt), float(self.horizon)
        if not (math.isfinite(s) and s >= 0):
            raise InvalidParameter("coupling must be finite and >= 0")
        if not (dt > 0 and horizon > 0 and math.isfinite(horizon)):
            raise InvalidParameter("dt and horizon must be > 0")
        if dt > horizon * (1 + 1e-12):
            raise InvalidParameter("dt must not exceed the horizon")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "lindblad", l)
        object.__setattr__(self, "coupling", s)
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "horizon", horizon)
        if self.stability_number > STABILITY_CEILING * (1 + 1e-12):
            raise InvalidParameter(
                f"s^2 dt span^2 = {self.stability_number:.4g} exceeds the ceiling {STABILITY_CEILING}"
            )

    @classmethod
    def diagonal(cls, energies, levels=None, **kw) -> DynamicsSpec:
        """Diagonal ``H``; ``L`` defaults to ``H`` (energy-based reduction)."""
        h = np.diag(np.asarray(energies, dtype=float))
        l = h if levels is None else np.diag(np.asarray(levels, dtype=float))
        return cls(h, l, **kw)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @cached_property
    def _l_eig(self):
        ell, w = np.linalg.eigh(self.lindblad)
        return ell, w

    @property
    def levels(self) -> np.ndarray:
        """Eigenvalues of ``L`` (ascending)."""
        return self._l_eig[0]

    @property
    def l_basis(self) -> np.ndarray:
        """Columns are the ``L`` eigenvectors matching :attr:`levels`."""
        return self._l_eig[1]

    @property
    def span(self) -> float:
        return float(self.levels[-1] - self.levels[0])

    @property
    def stability_number(self) -> float:
        return self.coupling**2 * self.dt * self.span**2

    @property
    def noise_sigma(self) -> float:
        return math.inf if self.coupling == 0 else 1.0 / (self.coupling * math.sqrt(self.dt))

    @cached_property
    def n_steps(self) -> int:
        return max(1, int(round(self.horizon / self.dt)))

    @cached_property
    def unitary(self) -> np.ndarray:
        e, v = np.linalg.eigh(self.hamiltonian)
        return (v * np.exp(-1j * e * self.dt)) @ v.conj().T

    @cached_property
    def _unitary_l(self) -> np.ndarray:
        w = self.l_basis
        return w.conj().T @ self.unitary @ w

    @cached_property
    def _h_l(self) -> np.ndarray:
        w = self.l_basis
        return w.conj().T @ self.hamiltonian @ w

    @cached_property
    def has_drift(self) -> bool:
        return bool(np.any(self.hamiltonian != 0))

    @property
    def commutator_norm(self) -> float:
        h, l = self.hamiltonian, self.lindblad
        return float(np.linalg.norm(h @ l - l @ h))

    def level_groups(self, rtol: float = 1e-9) -> np.ndarray:
        """Index of the distinct ``L`` eigenvalue each eigenvector belongs to."""
        ell = self.levels
        tol = rtol * max(self.span, 1.0)
        groups = np.zeros(ell.size, dtype=int)
        for k in range(1, ell.size):
            groups[k] = groups[k - 1] + (ell[k] - ell[k - 1] > tol)
        return groups

    def to_l_basis(self, state: StateVector) -> np.ndarray:
        if state.dim != self.dim:
            raise DimensionMismatch(f"state has dimension {state.dim}, dynamics has {self.dim}")
        return self.l_basis.conj().T @ state.amplitudes

    def from_l_basis(self, c: np.ndarray) -> np.ndarray:
        return c @ self.l_basis.T


# -- one step ---------------------------------------------------------------


@numba.njit(cache=True)
def _step_kernel(c, unitary, drift, measure, ell, sigma, u, z, xi_out, failed, var_acc, occ_acc):
    """Advance every row of ``c`` (``L``-basis amplitudes) by one step, in place.

    Rows whose observation underflows are flagged in ``failed`` and left
    after the unitary part only.  Returns the largest norm residue seen
    after the unitary part.
    """
    b_count, n = c.shape
    tmp = np.empty(n, dtype=np.complex128)
    p = np.empty(n)
    e = np.empty(n)
    worst = 0.0
    log_norm = math.log(sigma) + 0.5 * math.log(2 * math.pi) if measure else 0.0
    for b in range(b_count):
        if drift:
            for i in range(n):
                acc = 0j
                for k in range(n):
                    acc += unitary[i, k] * c[b, k]
                tmp[i] = acc
            nrm = 0.0
            for i in range(n):
                c[b, i] = tmp[i]
                nrm += c[b, i].real ** 2 + c[b, i].imag ** 2
            worst = max(worst, abs(math.sqrt(nrm) - 1.0))
        total = 0.0
        for i in range(n):
            p[i] = c[b, i].real ** 2 + c[b, i].imag ** 2
            total += p[i]
        failed[b] = False
        if measure:
            cum = 0.0
            idx = n - 1
            for i in range(n):
                cum += p[i] / total
                if u[b] <= cum:
                    idx = i
                    break
            xi = ell[idx] + sigma * z[b]
            xi_out[b] = xi
            top = -np.inf
            for i in range(n):
                e[i] = -0.5 * ((xi - ell[i]) / sigma) ** 2
                if p[i] > 0 and e[i] > top:
                    top = e[i]
            s = 0.0
            for i in range(n):
                e[i] = math.exp(e[i] - top)
                s += p[i] * e[i]
            s /= total
            if math.log(s) + top - log_norm < LOG_FLOOR:
                failed[b] = True
                continue
            total = 0.0
            for i in range(n):
                c[b, i] *= math.sqrt(e[i] / s)
                p[i] = c[b, i].real ** 2 + c[b, i].imag ** 2
                total += p[i]
        scale = 1.0 / math.sqrt(total)
        mean = 0.0
        sq = 0.0
        top_p = 0.0
        for i in range(n):
            c[b, i] *= scale
            q = p[i] / total
            mean += q * ell[i]
            sq += q * ell[i] ** 2
            top_p = max(top_p, q)
        var_acc[b] += max(sq - mean * mean, 0.0)
        occ_acc[b] += top_p
    return worst


class _Stepper:
    """Holds per-batch scratch arrays for :func:`_step_kernel`."""

    def __init__(self, spec: DynamicsSpec, batch: int):
        self.spec = spec
        self.xi = np.full(batch, np.nan)
        self.failed = np.zeros(batch, dtype=np.bool_)
        self.var_acc = np.zeros(batch)
        self.occ_acc = np.zeros(batch)
        self.sigma = spec.noise_sigma if spec.coupling > 0 else 1.0

    def advance(self, c: np.ndarray, u: np.ndarray, z: np.ndarray, gens) -> np.ndarray:
        """Unitary drift then measurement for a batch; returns the observations."""
        spec = self.spec
        measure = spec.coupling > 0
        args = (spec._unitary_l, spec.has_drift, measure, spec.levels, self.sigma)
        worst = _step_kernel(c, *args, u, z, self.xi, self.failed, self.var_acc, self.occ_acc)
        if worst > NORM_RESIDUE:
            raise StabilityViolation(f"norm residue {worst:.3g} after unitary step")
        if self.failed.any():
            rows = np.flatnonzero(self.failed)
            sub = np.ascontiguousarray(c[rows])
            u2 = np.array([gens[r].random() for r in rows])
            z2 = np.array([gens[r].standard_normal() for r in rows])
            xi2, failed2 = np.empty(rows.size), np.zeros(rows.size, dtype=np.bool_)
            var2, occ2 = np.zeros(rows.size), np.zeros(rows.size)
            # the unitary part already ran for these rows
            _step_kernel(sub, spec._unitary_l, False, True, spec.levels, self.sigma,
                         u2, z2, xi2, failed2, var2, occ2)
            if failed2.any():
                raise ZeroMarginal("observation underflowed twice in one step")
            c[rows] = sub
            self.xi[rows] = xi2
            self.var_acc[rows] += var2
            self.occ_acc[rows] += occ2
        return self.xi


def step(spec: DynamicsSpec, state: StateVector, rng: np.random.Generator) -> StateVector:
    """One time step: ``exp(-i H dt)`` followed by a noisy ``L`` measurement."""
    c = spec.to_l_basis(state)[None, :].copy()
    u = np.array([rng.random()])
    z = np.array([rng.standard_normal()])
    _Stepper(spec, 1).advance(c, u, z, [rng])
    return StateVector.normalised(spec.from_l_basis(c[0]))


# -- trajectories -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One realisation: states (original basis) and per-time observables."""

    times: np.ndarray
    states: np.ndarray
    signals: np.ndarray
    exp_h: np.ndarray
    exp_l: np.ndarray
    var_l: np.ndarray
    max_occupation: np.ndarray

    def state(self, k: int) -> StateVector:
        return StateVector.normalised(self.states[k])


class _Batch:
    """Runs a batch of trajectories and accumulates what the caller asked for."""

    def __init__(self, spec: DynamicsSpec, c0: np.ndarray, gens, record_every: int, keep_states: bool):
        self.spec = spec
        self.gens = gens
        self.c = np.ascontiguousarray(np.tile(c0, (len(gens), 1)), dtype=complex)
        self.record_every = record_every
        self.keep_states = keep_states
        self.stepper = _Stepper(spec, len(gens))
        n_rec = spec.n_steps // record_every + 1
        n, b = spec.dim, len(gens)
        self.rho_sum = np.zeros((n_rec, n, n), dtype=complex)
        self.rho_abs2 = np.zeros((n_rec, n, n))
        self.occ_sum = np.zeros((n_rec, n))
        self.occ_sq = np.zeros((n_rec, n))
        self.var_sum = np.zeros(n_rec)
        if keep_states:
            self.states = np.zeros((spec.n_steps + 1, b, n), dtype=complex)
            self.signals = np.zeros((spec.n_steps, b))
            self.obs = np.zeros((4, spec.n_steps + 1, b))

    def _observe(self, k: int) -> None:
        if k % self.record_every and not self.keep_states:
            return
        spec, c = self.spec, self.c
        p = c.real**2 + c.imag**2
        ell = spec.levels
        mean_l = p @ ell
        var_l = np.maximum(p @ ell**2 - mean_l**2, 0.0)
        if k % self.record_every == 0:
            r = k // self.record_every
            self.rho_sum[r] = c.T @ c.conj()
            self.rho_abs2[r] = p.T @ p
            self.occ_sum[r] = p.sum(axis=0)
            self.occ_sq[r] = (p**2).sum(axis=0)
            self.var_sum[r] = var_l.sum()
        if self.keep_states:
            self.states[k] = spec.from_l_basis(c)
            exp_h = np.einsum("bi,ij,bj->b", c.conj(), spec._h_l, c).real
            self.obs[:, k] = exp_h, mean_l, var_l, p.max(axis=1)

    def run(self) -> _Batch:
        spec, stepper = self.spec, self.stepper
        p = self.c.real**2 + self.c.imag**2
        ell = spec.levels
        stepper.var_acc += np.maximum(p @ ell**2 - (p @ ell) ** 2, 0.0)
        stepper.occ_acc += p.max(axis=1)
        self._observe(0)
        k = 0
        for block in streams.chunk_sizes(spec.n_steps, DRAW_BLOCK):
            u = np.stack([g.random(block) for g in self.gens], axis=1)
            z = np.stack([g.standard_normal(block) for g in self.gens], axis=1)
            for j in range(block):
                xi = stepper.advance(self.c, u[j], z[j], self.gens)
                k += 1
                if self.keep_states:
                    self.signals[k - 1] = xi
                self._observe(k)
        self.var_tavg = stepper.var_acc / (spec.n_steps + 1)
        self.occ_tavg = stepper.occ_acc / (spec.n_steps + 1)
        return self


def simulate_trajectory(spec: DynamicsSpec, initial: StateVector, rng: np.random.Generator) -> Trajectory:
    """Simulate one trajectory on the full time grid.

    Draws from ``rng`` in the same block pattern as one trajectory of
    :func:`run_ensemble` does from its spawned stream.
    """
    batch = _Batch(spec, spec.to_l_basis(initial), [rng], 1, keep_states=True).run()
    times = np.arange(spec.n_steps + 1) * spec.dt
    exp_h, exp_l, var_l, max_occ = batch.obs[:, :, 0]
    return Trajectory(times, batch.states[:, 0], batch.signals[:, 0], exp_h, exp_l, var_l, max_occ)


# -- ensembles ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EnsembleSummary:
    """Ensemble averages over independent trajectories.

    Per-time arrays are sampled every ``record_every`` steps.  Matrices with
    an ``_l`` suffix are in the ``L`` eigenbasis (ordered as
    ``spec.levels``); ``mean_rho`` is in the original basis.
    """

    spec: DynamicsSpec
    n_traj: int
    times: np.ndarray
    mean_rho: np.ndarray
    mean_rho_l: np.ndarray
    rho_abs2_l: np.ndarray
    occupation_mean: np.ndarray
    occupation_se: np.ndarray
    mean_var_l: np.ndarray
    final_occupation: np.ndarray
    final_var_l: np.ndarray
    time_avg_var_l: np.ndarray
    time_avg_max_occupation: np.ndarray

    def coherence(self, i: int, j: int) -> np.ndarray:
        """``|mean rho_ij(t)|`` in the ``L`` eigenbasis."""
        return np.abs(self.mean_rho_l[:, i, j])

    def coherence_se(self, i: int, j: int) -> np.ndarray:
        """Standard error of the complex mean ``rho_ij(t)``."""
        var = self.rho_abs2_l[:, i, j] - self.coherence(i, j) ** 2
        return np.sqrt(np.maximum(var, 0.0) / max(self.n_traj - 1, 1))

    def collapsed(self, threshold: float = COLLAPSE_VAR) -> np.ndarray:
        return self.final_var_l < threshold * self.spec.span**2

    def collapse_outcomes(self) -> np.ndarray:
        """Distinct ``L`` level each trajectory ended closest to."""
        groups = self.spec.level_groups()
        occ = np.zeros((self.n_traj, groups.max() + 1))
        np.add.at(occ.T, groups, self.final_occupation.T)
        return occ.argmax(axis=1)


def run_ensemble(
    spec: DynamicsSpec,
    initial: StateVector,
    n_traj: int,
    rng: np.random.Generator,
    record_every: int = 1,
    threads: int | None = None,
) -> EnsembleSummary:
    """Simulate ``n_traj`` independent trajectories and aggregate them."""
    if n_traj < 1:
        raise InvalidParameter("n_traj must be >= 1")
    if record_every < 1:
        raise InvalidParameter("record_every must be >= 1")
    c0 = spec.to_l_basis(initial)
    gens = streams.substreams(rng, n_traj)
    starts = np.cumsum([0, *streams.chunk_sizes(n_traj, TRAJ_BATCH)])
    jobs = [gens[a:b] for a, b in zip(starts[:-1], starts[1:])]

    def run(batch_gens):
        return _Batch(spec, c0, batch_gens, record_every, keep_states=False).run()

    batches = streams.ordered_map(run, jobs, threads)
    first = batches[0]
    total = {name: sum(getattr(b, name) for b in batches[1:]) + getattr(first, name)
             for name in ("rho_sum", "rho_abs2", "occ_sum", "occ_sq", "var_sum")}
    rho_l = total["rho_sum"] / n_traj
    rho_l = 0.5 * (rho_l + np.conj(np.swapaxes(rho_l, 1, 2)))
    w = spec.l_basis
    mean_rho = w @ rho_l @ w.conj().T
    occ_mean = total["occ_sum"] / n_traj
    occ_var = np.maximum(total["occ_sq"] / n_traj - occ_mean**2, 0.0)
    occ_se = np.sqrt(occ_var / max(n_traj - 1, 1))
    final_c = np.concatenate([b.c for b in batches])
    final_p = final_c.real**2 + final_c.imag**2
    ell = spec.levels
    final_var = np.maximum(final_p @ ell**2 - (final_p @ ell) ** 2, 0.0)
    times = np.arange(0, spec.n_steps + 1, record_every) * spec.dt
    return EnsembleSummary(
        spec=spec,
        n_traj=n_traj,
        times=times,
        mean_rho=mean_rho,
        mean_rho_l=rho_l,
        rho_abs2_l=total["rho_abs2"] / n_traj,
        occupation_mean=occ_mean,
        occupation_se=occ_se,
        mean_var_l=total["var_sum"] / n_traj,
        final_occupation=final_p,
        final_var_l=final_var,
        time_avg_var_l=np.concatenate([b.var_tavg for b in batches]),
        time_avg_max_occupation=np.concatenate([b.occ_tavg for b in batches]),
    )


# -- collapse statistics -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CollapseStatistics:
    """Collapse frequencies per distinct ``L`` level against Born weights."""

    levels: np.ndarray
    frequencies: np.ndarray
    born: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    collapsed_fraction: float
    n_traj: int

    @property
    def within_ci(self) -> np.ndarray:
        return (self.frequencies >= self.ci_low) & (self.frequencies <= self.ci_high)


def born_interval(p: np.ndarray, n: int, confidence: float = 0.99) -> tuple[np.ndarray, np.ndarray]:
    """Central binomial interval for the frequency of an event of probability ``p``."""
    lo, hi = stats.binom.interval(confidence, n, np.clip(p, 0.0, 1.0))
    return lo / n, hi / n


def collapse_statistics(
    spec: DynamicsSpec,
    initial: StateVector,
    n_traj: int,
    rng: np.random.Generator,
    required_fraction: float = 0.99,
    confidence: float = 0.99,
    threads: int | None = None,
) -> CollapseStatistics:
    """Frequencies with which trajectories collapse onto each ``L`` level.

    Needs ``[H, L] = 0`` so that collapse onto ``L`` eigenstates is stable.
    Raises :class:`NonConverged` if fewer than ``required_fraction`` of the
    trajectories have collapsed by the horizon.
    """
    scale = max(1.0, np.linalg.norm(spec.hamiltonian), np.linalg.norm(spec.lindblad))
    if spec.commutator_norm > 1e-10 * scale**2:
        raise InvalidParameter("collapse statistics need commuting hamiltonian and lindblad")
    ens = run_ensemble(spec, initial, n_traj, rng, record_every=spec.n_steps, threads=threads)
    frac = float(ens.collapsed().mean())
    if frac < required_fraction:
        raise NonConverged(
            f"only {frac:.2%} of trajectories collapsed by T={spec.horizon}; need {required_fraction:.0%}"
        )
    groups = spec.level_groups()
    k = groups.max() + 1
    counts = np.bincount(ens.collapse_outcomes(), minlength=k)
    born = np.bincount(groups, weights=np.abs(spec.to_l_basis(initial)) ** 2, minlength=k)
    lo, hi = born_interval(born, n_traj, confidence)
    first = np.searchsorted(groups, np.arange(k))
    return CollapseStatistics(spec.levels[first], counts / n_traj, born, lo, hi, frac, n_traj)


# -- coherence decay -----------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    rate: float
    intercept: float
    n_points: int
    t_max: float


def coherence_decay_fit(
    ensemble: EnsembleSummary,
    i: int,
    j: int,
    floor_sigmas: float = 3.0,
    min_points: int = 5,
) -> DecayFit:
    """Least-squares fit of ``log|mean rho_ij(t)| = a - rate * t``.

    Only the leading stretch of the curve that stays above
    ``floor_sigmas`` standard errors is used; each point is weighted by its
    inverse variance on the log scale.  With ``H != 0`` the magnitudes are
    taken in the ``L`` eigenbasis, which removes the drift phase only when
    ``[H, L] = 0``.
    """
    coh = ensemble.coherence(i, j)
    se = ensemble.coherence_se(i, j)
    above = coh > floor_sigmas * se
    usable = int(np.argmin(above)) if not above.all() else above.size
    if coh[0] == 0 or usable < min_points:
        raise FitFailure(f"coherence ({i},{j}) reaches the noise floor after {usable} samples")
    t = ensemble.times[:usable]
    y = np.log(coh[:usable])
    rel = np.where(se[:usable] > 0, se[:usable] / coh[:usable], 0.0)
    # the first samples are nearly noise free; cap weights so they do not pin the fit
    rel = np.maximum(rel, 1e-3)
    wts = 1.0 / rel**2
    a = np.vstack([np.ones_like(t), -t]).T * np.sqrt(wts)[:, None]
    (intercept, rate), *_ = np.linalg.lstsq(a, y * np.sqrt(wts), rcond=None)
    return DecayFit(float(rate), float(intercept), usable, float(t[-1]))


def reduction_time(ensemble: EnsembleSummary, i: int, j: int) -> float:
    """First time ``|mean rho_ij|`` drops to ``1/e`` of its initial value."""
    coh = ensemble.coherence(i, j)
    if coh[0] == 0:
        raise FitFailure(f"coherence ({i},{j}) is zero initially")
    target = coh[0] / math.e
    below = np.flatnonzero(coh <= target)
    if below.size == 0:
        raise NonConverged(f"coherence ({i},{j}) never fell by a factor e within the horizon")
    k = below[0]
    t = ensemble.times
    y0, y1 = math.log(coh[k - 1]), math.log(max(coh[k], 1e-300))
    return float(t[k - 1] + (t[k] - t[k - 1]) * (y0 - math.log(target)) / (y0 - y1))


# -- regime diagnostics --------------------------------------------------------


@dataclass(frozen=True)
class RegimeRecord:
    h_scale: float
    relative_magnitude: float
    commutator_norm: float
    time_avg_var_l: float
    late_var_l: float
    collapsed_fraction: float
    time_avg_max_occupation: float


def regime_diagnostics(
    spec: DynamicsSpec,
    initial: StateVector,
    n_traj: int,
    rng: np.random.Generator,
    h_scales=(1.0,),
    threads: int | None = None,
) -> list[RegimeRecord]:
    """Descriptive statistics of the ``H``/``L`` competition.

    For each factor in ``h_scales`` the hamiltonian is rescaled and an
    ensemble is run.  ``relative_magnitude`` is
    ``||scale * H|| / ||L|| / s^2`` with Frobenius norms.  No phase boundary
    is inferred; the records just map the diagnostics.
    """
    out = []
    children = streams.substreams(rng, len(h_scales))
    l_norm = float(np.linalg.norm(spec.lindblad))
    for scale, child in zip(h_scales, children):
        sub = DynamicsSpec(spec.hamiltonian * scale, spec.lindblad, spec.coupling, spec.dt, spec.horizon)
        ens = run_ensemble(sub, initial, n_traj, child, record_every=sub.n_steps, threads=threads)
        denom = l_norm * spec.coupling**2
        rel = float(np.linalg.norm(sub.hamiltonian)) / denom if denom > 0 else math.inf
        out.append(
            RegimeRecord(
                h_scale=float(scale),
                relative_magnitude=rel,
                commutator_norm=sub.commutator_norm,
                time_avg_var_l=float(ens.time_avg_var_l.mean()),
                late_var_l=float(ens.final_var_l.mean()),
                collapsed_fraction=float(ens.collapsed().mean()),
                time_avg_max_occupation=float(ens.time_avg_max_occupation.mean()),
            )
        )
    return out
