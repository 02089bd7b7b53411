"""Experiment kinds runnable from a config file.

Each kind validates its ``params`` block into ready-built domain objects and
turns them into a :class:`~infodyn.results.ResultTable` plus a dict of
headline numbers for ``summary.json``.  CSV columns per kind are fixed:

posterior
    obs_index, xi, value_index, value, prior, posterior, marginal_density,
    posterior_mean, entropy_change_nats
mutual-info
    observation_entropy_nats, noise_entropy_nats, mutual_information_nats,
    mutual_information_bits, mc_samples, mc_mean_entropy_change_nats,
    mc_stderr_nats
decohere
    i, j, omega, lambda, analytic_real, mc_real, mc_imag, mc_stderr_real,
    mc_stderr_imag
unravel
    time, i, j, rho_real, rho_imag, coherence_stderr, mean_var_l
    (matrix entries in the eigenbasis of the monitored observable)
collapse
    level_index, level, born, frequency, ci_low, ci_high, within_ci
cuscuta
    run, true_bearing, growth_direction, bearing_error, cumulative_bits,
    final_entropy_bits, bits_erased, landauer_heat_j
heliotropism
    drift_rate, coupling, ratio, mean_error, stderr, baseline_error
ledger
    step, bits_erased, cumulative_bits, landauer_heat_j, efficiency
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from . import plant, quantum, signal, streams, unravel
from .config import Section
from .errors import InfodynError
from .results import ResultTable

_finite = math.isfinite


def _positive(x) -> bool:
    return _finite(x) and x > 0


def _nonnegative(x) -> bool:
    return _finite(x) and x >= 0


_NOISE_FIELDS = {"gaussian": "sigma", "uniform": "half_width", "laplace": "scale"}


def _noise(sec: Section, name: str = "noise"):
    ns = sec.section(name)
    if ns is None:
        return None
    kind = ns.string("kind", choices=signal.NOISE_KINDS)
    if kind is None:
        return None
    scale = ns.number(_NOISE_FIELDS[kind], check=_positive, rule="> 0")
    ns.finish()
    return None if scale is None else signal.NoiseDensity(kind, scale)


def _build(sec: Section, name: str, factory: Callable[[], Any]):
    """Construct a domain object, turning invariant violations into config errors."""
    try:
        return factory()
    except InfodynError as exc:
        sec.fail(name, str(exc))
        return None


def _signal_model(sec: Section):
    values = sec.numbers("values", check=_finite, rule="finite")
    prior = sec.numbers("prior", check=_nonnegative, rule=">= 0")
    noise = _noise(sec)
    if prior is not None:
        total = math.fsum(prior)
        if abs(total - 1.0) > 1e-12:
            sec.fail("prior", f"normalisation violated: sums to {total!r}, not 1")
            prior = None
    if None in (values, prior, noise):
        return None
    if len(values) != len(prior):
        sec.fail("prior", f"has {len(prior)} entries but values has {len(values)}")
        return None
    return _build(sec, "values", lambda: signal.SignalModel(values, prior, noise))


def _state(sec: Section, probs_name: str, n: int | None):
    probs = sec.numbers(probs_name, check=_nonnegative, rule=">= 0")
    phases = sec.numbers("initial_phases", default=None, check=_finite, rule="finite")
    if probs is None:
        return None
    total = math.fsum(probs)
    if abs(total - 1.0) > 1e-12:
        sec.fail(probs_name, f"normalisation violated: sums to {total!r}, not 1")
        return None
    if n is not None and len(probs) != n:
        sec.fail(probs_name, f"has {len(probs)} entries, system dimension is {n}")
        return None
    if phases is not None and len(phases) != len(probs):
        sec.fail("initial_phases", f"has {len(phases)} entries, expected {len(probs)}")
        return None
    return _build(sec, probs_name, lambda: quantum.StateVector.from_probabilities(probs, phases))


@dataclass(frozen=True)
class Kind:
    name: str
    description: str
    columns: tuple[str, ...]
    validate: Callable[[Section], dict]
    run: Callable[[dict, np.random.Generator, int], tuple[ResultTable, dict]]


# -- posterior -----------------------------------------------------------------


def _validate_posterior(sec: Section) -> dict:
    model = _signal_model(sec)
    obs = sec.numbers("observations", default=None, check=_finite, rule="finite")
    n_obs = sec.integer("n_observations", default=10, lo=1)
    return {"model": model, "observations": obs, "n_observations": n_obs}


def _run_posterior(p: dict, rng, threads) -> tuple[ResultTable, dict]:
    model = p["model"]
    xis = p["observations"]
    if xis is None:
        xis = signal.sample_observations(model, rng, p["n_observations"]).tolist()
    table = ResultTable(list(KINDS["posterior"].columns))
    changes = []
    for k, xi in enumerate(xis):
        post = signal.posterior(model, xi)
        marg = signal.marginal_density(model, xi)
        mean = float(post.probs @ model.values)
        ds = signal.entropy_change(model, post)
        changes.append(ds)
        for i in range(model.size):
            table.add(k, float(xi), i, float(model.values[i]), float(model.prior[i]),
                      float(post.probs[i]), marg, mean, ds)
    return table, {"n_observations": len(xis), "mean_entropy_change_nats": float(np.mean(changes))}


# -- mutual information ---------------------------------------------------------


def _validate_mi(sec: Section) -> dict:
    return {
        "model": _signal_model(sec),
        "mc_samples": sec.integer("mc_samples", default=100_000, lo=0),
        "tolerance": sec.number("tolerance", default=signal.QUAD_TOL, check=_positive, rule="> 0"),
    }


def _run_mi(p: dict, rng, threads) -> tuple[ResultTable, dict]:
    model, tol, n = p["model"], p["tolerance"], p["mc_samples"]
    s_xi = signal.observation_entropy(model, tol)
    s_eps = signal.noise_entropy(model.noise)
    j = signal.mutual_information(model, tol)
    mc_mean, mc_se = (math.nan, math.nan)
    if n > 1:
        mc_mean, mc_se = signal.mean_entropy_change(model, n, rng)
    table = ResultTable(list(KINDS["mutual-info"].columns))
    table.add(s_xi, s_eps, j, j / signal.LN2, n, mc_mean, mc_se)
    return table, {
        "mutual_information_nats": j,
        "mutual_information_bits": j / signal.LN2,
        "mc_mean_entropy_change_nats": mc_mean,
        "mc_stderr_nats": mc_se,
    }


# -- decoherence ---------------------------------------------------------------


def _validate_decohere(sec: Section) -> dict:
    energies = sec.numbers("energies", check=_finite, rule="finite")
    n = None if energies is None else len(energies)
    if n is not None and n < 2:
        sec.fail("energies", "need at least 2 levels")
    state = _state(sec, "probabilities", n)
    return {
        "system": None if energies is None else _build(sec, "energies", lambda: quantum.QuantumSystem(energies)),
        "state": state,
        "noise": _noise(sec),
        "n_samples": sec.integer("n_samples", default=100_000, lo=1),
        "n_bootstrap": sec.integer("n_bootstrap", default=200, lo=2),
    }


def _run_decohere(p: dict, rng, threads) -> tuple[ResultTable, dict]:
    system, state, noise = p["system"], p["state"], p["noise"]
    mc_rng, boot_rng = rng.spawn(2)
    amps = quantum.sample_updated_states(system, state, noise, p["n_samples"], mc_rng, threads)
    rho_mc = quantum.outer_mean(amps)
    se = quantum.bootstrap_stderr(amps, p["n_bootstrap"], boot_rng)
    lam = quantum.decoherence_matrix(system, noise)
    root = np.sqrt(state.probabilities)
    analytic = np.outer(root, root) * lam
    phased = bool(np.any(np.abs(state.amplitudes.imag) > 0) or np.any(state.amplitudes.real < 0))
    table = ResultTable(list(KINDS["decohere"].columns))
    n = system.dim
    for i in range(n):
        for j in range(n):
            table.add(i, j, float(system.gaps[i, j]), float(lam[i, j]),
                      math.nan if phased else float(analytic[i, j]),
                      float(rho_mc[i, j].real), float(rho_mc[i, j].imag),
                      float(se[i, j].real), float(se[i, j].imag))
    mc_dm = quantum.DensityMatrix(rho_mc / np.trace(rho_mc).real)
    head = {"von_neumann_entropy_mc_nats": quantum.von_neumann_entropy(mc_dm)}
    if not phased:
        an_dm = quantum.averaged_density_analytic(system, state, noise)
        head["von_neumann_entropy_analytic_nats"] = quantum.von_neumann_entropy(an_dm)
        z = np.abs(rho_mc.real - an_dm.entries.real) / np.where(se.real > 0, se.real, np.inf)
        head["max_stderr_deviation"] = float(z.max())
    return table, head


# -- unravelling ---------------------------------------------------------------


def _dynamics(sec: Section, h, l) -> unravel.DynamicsSpec | None:
    s = sec.number("coupling", check=_nonnegative, rule=">= 0")
    dt = sec.number("dt", check=_positive, rule="> 0")
    horizon = sec.number("horizon", check=_positive, rule="> 0")
    if None in (h, l, s, dt, horizon):
        return None
    return _build(sec, "coupling", lambda: unravel.DynamicsSpec(h, l, s, dt, horizon))


def _validate_unravel(sec: Section) -> dict:
    h = sec.matrix("hamiltonian")
    l = sec.matrix("lindblad")
    spec = _dynamics(sec, h, l)
    state = _state(sec, "initial_probabilities", None if spec is None else spec.dim)
    return {
        "spec": spec,
        "state": state,
        "n_traj": sec.integer("n_traj", default=1000, lo=1),
        "record_every": sec.integer("record_every", default=1, lo=1),
    }


def _run_unravel(p: dict, rng, threads) -> tuple[ResultTable, dict]:
    spec = p["spec"]
    ens = unravel.run_ensemble(spec, p["state"], p["n_traj"], rng, p["record_every"], threads)
    table = ResultTable(list(KINDS["unravel"].columns))
    n = spec.dim
    for k, t in enumerate(ens.times):
        for i in range(n):
            for j in range(n):
                r = ens.mean_rho_l[k, i, j]
                se = ens.coherence_se(i, j)[k]
                table.add(float(t), i, j, float(r.real), float(r.imag), float(se), float(ens.mean_var_l[k]))
    rates = {}
    for i in range(n):
        for j in range(i + 1, n):
            try:
                rates[f"{i},{j}"] = unravel.coherence_decay_fit(ens, i, j).rate
            except InfodynError:
                rates[f"{i},{j}"] = None
    return table, {
        "collapsed_fraction": float(ens.collapsed().mean()),
        "time_avg_var_l": float(ens.time_avg_var_l.mean()),
        "commutator_norm": spec.commutator_norm,
        "decay_rates": rates,
    }


# -- collapse ------------------------------------------------------------------


def _validate_collapse(sec: Section) -> dict:
    energies = sec.numbers("energies", check=_finite, rule="finite")
    h = None if energies is None else np.diag(energies).tolist()
    spec = _dynamics(sec, h, h)
    state = _state(sec, "probabilities", None if energies is None else len(energies))
    return {
        "spec": spec,
        "state": state,
        "n_traj": sec.integer("n_traj", default=10_000, lo=1),
        "confidence": sec.number("confidence", default=0.99, check=lambda x: 0 < x < 1, rule="in (0, 1)"),
        "required_fraction": sec.number(
            "required_fraction", default=0.99, check=lambda x: 0 < x <= 1, rule="in (0, 1]"
        ),
    }


def _run_collapse(p: dict, rng, threads) -> tuple[ResultTable, dict]:
    cs = unravel.collapse_statistics(
        p["spec"], p["state"], p["n_traj"], rng, p["required_fraction"], p["confidence"], threads
    )
    table = ResultTable(list(KINDS["collapse"].columns))
    for k in range(cs.levels.size):
        table.add(k, float(cs.levels[k]), float(cs.born[k]), float(cs.frequencies[k]),
                  float(cs.ci_low[k]), float(cs.ci_high[k]), bool(cs.within_ci[k]))
    return table, {"collapsed_fraction": cs.collapsed_fraction, "all_within_ci": bool(cs.within_ci.all())}


# -- cuscuta -------------------------------------------------------------------


def _validate_cuscuta(sec: Section) -> dict:
    out = {
        "n_bins": sec.integer("n_bins", default=64, lo=4),
        "kappa": sec.number("kappa", default=1.0, check=_positive, rule="> 0"),
        "sensor_sigma": sec.number("sensor_sigma", default=0.1, check=_positive, rule="> 0"),
        "sweep_period": sec.number("sweep_period", default=16.0, check=_positive, rule="> 0"),
        "n_steps": sec.integer("n_steps", default=100, lo=1),
        "n_runs": sec.integer("n_runs", default=1000, lo=1),
        "true_bearing": sec.number("true_bearing", default=None, check=_finite, rule="finite"),
        "temperature": sec.number("temperature", default=300.0, check=_positive, rule="> 0"),
        "memory_horizon": sec.number("memory_horizon", default=None, check=lambda x: x >= 1, rule=">= 1"),
        "erasure_fraction": sec.number(
            "erasure_fraction", default=1.0, check=lambda x: 0 <= x <= 1, rule="in [0, 1]"
        ),
        "direction": sec.string("direction", default="mean", choices=("mean", "argmax")),
    }
    return out


def _run_cuscuta(p: dict, rng, threads) -> tuple[ResultTable, dict]:
    table = ResultTable(list(KINDS["cuscuta"].columns))
    children = streams.substreams(rng, p["n_runs"])

    def one(child):
        bearing = child.uniform(0, 2 * math.pi) if p["true_bearing"] is None else p["true_bearing"]
        sc = plant.CircularScenario(
            p["n_bins"], bearing, p["kappa"], p["sensor_sigma"], p["sweep_period"],
            memory_horizon=p["memory_horizon"], erasure_fraction=p["erasure_fraction"],
        )
        return plant.run_cuscuta(sc, p["n_steps"], child, p["temperature"], p["direction"])

    runs = streams.ordered_map(one, children, threads)
    bin_width = 2 * math.pi / p["n_bins"]
    for k, r in enumerate(runs):
        final_bits = signal.shannon_entropy(r.posteriors[-1]) / signal.LN2
        table.add(k, float(r.true_bearing), r.growth_direction, r.bearing_error, r.cumulative_bits,
                  final_bits, r.ledger.bits_erased, r.ledger.landauer_heat)
    errors = np.array([r.bearing_error for r in runs])
    return table, {
        "fraction_within_one_bin": float(np.mean(errors <= bin_width)),
        "mean_cumulative_bits": float(np.mean([r.cumulative_bits for r in runs])),
        "total_landauer_heat_j": math.fsum(r.ledger.landauer_heat for r in runs),
    }


# -- heliotropism --------------------------------------------------------------


def _validate_helio(sec: Section) -> dict:
    return {
        "drift_rates": sec.numbers("drift_rates", check=_nonnegative, rule=">= 0"),
        "couplings": sec.numbers("couplings", check=_nonnegative, rule=">= 0"),
        "n_steps": sec.integer("n_steps", default=300, lo=1),
        "n_runs": sec.integer("n_runs", default=50, lo=2),
        "n_bins": sec.integer("n_bins", default=64, lo=4),
        "sweep_period": sec.number("sweep_period", default=16.0, check=_positive, rule="> 0"),
    }


def _run_helio(p: dict, rng, threads) -> tuple[ResultTable, dict]:
    table = ResultTable(list(KINDS["heliotropism"].columns))
    cells = [(d, c) for c in p["couplings"] for d in p["drift_rates"]]
    cell_streams = streams.substreams(rng, len(cells))
    jobs = [(d, c, g) for (d, c), cell in zip(cells, cell_streams) for g in cell.spawn(p["n_runs"])]

    def one(job):
        d, c, g = job
        rec = plant.run_heliotropism(d, c, p["n_steps"], g, p["n_bins"], p["sweep_period"])
        return rec.mean_error

    errs = np.array(streams.ordered_map(one, jobs, threads)).reshape(len(cells), p["n_runs"])
    means = {}
    for (d, c), e in zip(cells, errs):
        ratio = d / c if c > 0 else math.inf
        se = float(e.std(ddof=1) / math.sqrt(e.size))
        table.add(d, c, ratio, float(e.mean()), se, math.pi / 2)
        means.setdefault(c, []).append(float(e.mean()))
    monotone = {
        str(c): bool(np.all(np.diff([m for _, m in sorted(zip(p["drift_rates"], ms))]) >= 0))
        for c, ms in means.items()
    }
    return table, {"monotone_in_drift": monotone}


# -- ledger --------------------------------------------------------------------


def _validate_ledger(sec: Section) -> dict:
    return {
        "temperature": sec.number("temperature", default=300.0, check=_positive, rule="> 0"),
        "bits": sec.numbers("bits", check=_nonnegative, rule=">= 0"),
        "external_energy": sec.number("external_energy", default=None, check=_positive, rule="> 0"),
    }


def _run_ledger(p: dict, rng, threads) -> tuple[ResultTable, dict]:
    ledger = plant.InfoLedger(p["temperature"], external_energy=p["external_energy"])
    table = ResultTable(list(KINDS["ledger"].columns))
    for k, b in enumerate(p["bits"]):
        ledger = plant.landauer_update(ledger.record(b), b)
        eff = ledger.efficiency
        table.add(k, b, ledger.bits_processed, ledger.landauer_heat, math.nan if eff is None else eff)
    return table, {
        "bits_erased": ledger.bits_erased,
        "landauer_heat_j": ledger.landauer_heat,
        "efficiency": ledger.efficiency,
    }


KINDS: dict[str, Kind] = {
    k.name: k
    for k in [
        Kind("posterior", "Bayes posterior over a discrete signal for given or sampled observations",
             ("obs_index", "xi", "value_index", "value", "prior", "posterior", "marginal_density",
              "posterior_mean", "entropy_change_nats"),
             _validate_posterior, _run_posterior),
        Kind("mutual-info", "Mutual information S_xi - S_eps with a Monte Carlo entropy-change check",
             ("observation_entropy_nats", "noise_entropy_nats", "mutual_information_nats",
              "mutual_information_bits", "mc_samples", "mc_mean_entropy_change_nats", "mc_stderr_nats"),
             _validate_mi, _run_mi),
        Kind("decohere", "Observation-averaged density matrix: analytic overlap factors vs Monte Carlo",
             ("i", "j", "omega", "lambda", "analytic_real", "mc_real", "mc_imag",
              "mc_stderr_real", "mc_stderr_imag"),
             _validate_decohere, _run_decohere),
        Kind("unravel", "Ensemble of continuously monitored trajectories",
             ("time", "i", "j", "rho_real", "rho_imag", "coherence_stderr", "mean_var_l"),
             _validate_unravel, _run_unravel),
        Kind("collapse", "Collapse frequencies vs Born weights under energy monitoring",
             ("level_index", "level", "born", "frequency", "ci_low", "ci_high", "within_ci"),
             _validate_collapse, _run_collapse),
        Kind("cuscuta", "Host-bearing inference on a circle with Landauer accounting",
             ("run", "true_bearing", "growth_direction", "bearing_error", "cumulative_bits",
              "final_entropy_bits", "bits_erased", "landauer_heat_j"),
             _validate_cuscuta, _run_cuscuta),
        Kind("heliotropism", "Tracking error of a drifting source over a drift/coupling grid",
             ("drift_rate", "coupling", "ratio", "mean_error", "stderr", "baseline_error"),
             _validate_helio, _run_helio),
        Kind("ledger", "Landauer heat for a sequence of erasures",
             ("step", "bits_erased", "cumulative_bits", "landauer_heat_j", "efficiency"),
             _validate_ledger, _run_ledger),
    ]
}
