"""Monte-Carlo estimation of the stationary filtering error for finite models.

The exact optimal filter for a finite-state signal in white observation noise
is propagated by a splitting scheme: predict with the transition semigroup
over one grid step, correct by Bayes' rule with the Gaussian likelihood of the
observed increment, renormalize. Euler steps on the filter equation leave the
simplex at small kappa; the splitting scheme cannot.

The stationary error e(f, kappa) = E[(f(X_t) - E[f(X_t) | observations])^2]
is estimated by time-averaging after a burn-in and averaging over independent
trials. The error at kappa = 0 itself is never simulated (conditioning on the
noiseless observation field is not samplable); a sweep over decreasing kappa
is the proxy.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import DegenerateWeight
from .finite_analysis import finite_verdict
from .markov import FiniteStateModel, integrated_observation, sample_path, state_at
from .verdicts import SweepResult, SweepRow, TestFunction, classify_trend, consistency_flag

BLOCK_STEPS = 16384         # grid steps precomputed per vectorized block
CHUNK_TRIALS = 64           # trials per work item; fixed so results never depend on pool size
LOG_TINY = -700.0           # full log-likelihood below this in every state: weights underflowed
STEP_BUDGET = 50_000_000


@dataclass
class SimParams:
    """Knobs for the Monte-Carlo estimator; None means derive from the model."""

    trials: int = 32
    horizon: float = 200.0
    dt: float | None = None
    burn_in: float | None = None
    seed: int = 0
    dt_factor: float = 0.5
    dt_min: float = 1e-6


def auto_dt(model: FiniteStateModel, kappa: float, c: float = 0.5, dt_min: float = 1e-6) -> float:
    """Step size policy: dt <= c * kappa^2, capped by the fastest jump rate.

    The Bayes correction stiffens like kappa^-2, so dt must shrink with the
    noise; the floor keeps pathological kappas from freezing the sweep.
    """
    dt = c * kappa * kappa
    max_rate = float(np.max(-np.diag(model.Lambda), initial=0.0))
    if max_rate > 0:
        dt = min(dt, 0.2 / max_rate)
    return max(dt, dt_min)


def auto_burn_in(model: FiniteStateModel) -> float:
    """Burn-in of 10 relaxation times from the spectral gap of the generator."""
    eigs = np.linalg.eigvals(model.Lambda)
    decay = sorted(-eigs.real[(-eigs.real) > 1e-12])
    if decay:
        return 10.0 / decay[0]
    rates = -np.diag(model.Lambda)
    pos = rates[rates > 0]
    if pos.size:
        return 10.0 / float(np.min(pos))
    return 0.0


def _transition(model: FiniteStateModel, dt: float) -> np.ndarray:
    """One-step transition matrix exp(Lambda dt), clipped back onto row-stochastic form."""
    T = expm(model.Lambda * dt)
    T = np.clip(T, 0.0, None)
    return T / T.sum(axis=1, keepdims=True)


def _filter_block(
    mu: np.ndarray,
    T_dt: np.ndarray,
    weights: np.ndarray,
) -> np.ndarray:
    """Advance a batch of filters through one block of predict/correct steps in place.

    mu: (batch, d) current filter states; weights: (batch, steps, d)
    positive likelihood factors, already shifted per row for stability.
    Returns the (batch, steps, d) path of corrected filter states.
    """
    out = np.empty_like(weights)
    for k in range(weights.shape[1]):
        mu = mu @ T_dt
        mu = mu * weights[:, k, :]
        s = mu.sum(axis=1)
        if not np.all(s > 0.0) or not np.all(np.isfinite(s)):
            raise DegenerateWeight("filter mass vanished; refine dt for this kappa")
        mu /= s[:, None]
        out[:, k, :] = mu
    return out


def _log_weights(
    inc: np.ndarray, h: np.ndarray, kappa: float, dt: float
) -> tuple[np.ndarray, np.ndarray]:
    """Per-state log-likelihood of observation increments, up to a shared term.

    log p_i(dY) = -(dY - h_i dt)^2 / (2 kappa^2 dt) splits into a state part
    (dY . h_i) / kappa^2 - dt |h_i|^2 / (2 kappa^2) and a state-independent
    -|dY|^2 / (2 kappa^2 dt) that cancels in the normalization. The full value
    is still needed to detect underflow of every weight, so the shared term is
    returned separately.
    """
    state_part = (inc @ h.T) / (kappa * kappa) - (dt * np.sum(h * h, axis=1)) / (
        2.0 * kappa * kappa
    )
    shared = -np.einsum("...n,...n->...", inc, inc) / (2.0 * kappa * kappa * dt)
    return state_part, shared


def run_filter(
    model: FiniteStateModel,
    obs_increments: np.ndarray,
    kappa: float,
    dt: float,
    mu0: np.ndarray | None = None,
) -> np.ndarray:
    """Run the discretized optimal filter along one observation record.

    Returns the (steps + 1, d) path of filter states starting from mu0
    (default: the stationary law). Raises DegenerateWeight when the full
    likelihood underflows in every state, which signals that dt is too large
    for this kappa.
    """
    if kappa <= 0:
        raise ValueError("run_filter needs kappa > 0")
    inc = np.asarray(obs_increments, dtype=float)
    if inc.ndim == 1:
        inc = inc[:, None]
    if inc.shape[1] != model.n:
        raise ValueError(f"observation increments have {inc.shape[1]} coordinates, model has {model.n}")
    mu = np.asarray(model.pi if mu0 is None else mu0, dtype=float)[None, :].copy()
    T_dt = _transition(model, dt)
    steps = inc.shape[0]
    path = np.empty((steps + 1, model.d))
    path[0] = mu[0]
    for start in range(0, steps, BLOCK_STEPS):
        block = inc[None, start : start + BLOCK_STEPS]
        state_part, shared = _log_weights(block, model.h, kappa, dt)
        if np.any(state_part.max(axis=2) + shared < LOG_TINY):
            raise DegenerateWeight(
                "all likelihood weights underflowed; dt too large for this kappa"
            )
        w = np.exp(state_part - state_part.max(axis=2, keepdims=True))
        out = _filter_block(mu, T_dt, w)
        path[1 + start : 1 + start + out.shape[1]] = out[0]
        mu = out[:, -1, :].copy()
    return path


def _chunk_trial_means(
    model: FiniteStateModel,
    fvals: np.ndarray,
    kappa: float,
    dt: float,
    steps: int,
    burn_steps: int,
    seed: int,
    trial_indices: np.ndarray,
) -> np.ndarray:
    """Per-trial time-averaged squared error for one chunk of trials.

    Each trial owns two RNG substreams keyed by (seed, trial, stream): one for
    the signal path, one for observation noise. The keying makes results
    independent of chunking and pool size.
    """
    batch = len(trial_indices)
    horizon = steps * dt
    paths = []
    for t in trial_indices:
        path_rng = np.random.default_rng([seed, int(t), 0])
        x0 = int(path_rng.choice(model.d, p=model.pi))
        paths.append(sample_path(model.Lambda, x0, horizon, path_rng))
    obs_rngs = [np.random.default_rng([seed, int(t), 1]) for t in trial_indices]

    T_dt = _transition(model, dt)
    mu = np.tile(model.pi, (batch, 1))
    err_sum = np.zeros(batch)
    sqrt_dt = np.sqrt(dt)
    for start in range(0, steps, BLOCK_STEPS):
        blk = min(BLOCK_STEPS, steps - start)
        times = (start + np.arange(blk + 1)) * dt
        inc = np.empty((batch, blk, model.n))
        fX = np.empty((batch, blk))
        for b, (jt, st) in enumerate(paths):
            drift = np.diff(integrated_observation(jt, st, model.h, times), axis=0)
            inc[b] = drift + kappa * sqrt_dt * obs_rngs[b].standard_normal((blk, model.n))
            fX[b] = fvals[state_at(jt, st, times[1:])]
        state_part, shared = _log_weights(inc, model.h, kappa, dt)
        if np.any(state_part.max(axis=2) + shared < LOG_TINY):
            raise DegenerateWeight(
                "all likelihood weights underflowed; dt too large for this kappa"
            )
        w = np.exp(state_part - state_part.max(axis=2, keepdims=True))
        out = _filter_block(mu, T_dt, w)
        mu = out[:, -1, :].copy()
        first = max(burn_steps - start, 0)
        if first < blk:
            est = out[:, first:, :] @ fvals
            err_sum += np.sum((fX[:, first:] - est) ** 2, axis=1)
    return err_sum / (steps - burn_steps)


def estimate_stationary_error(
    model: FiniteStateModel,
    f: TestFunction | np.ndarray,
    kappa: float,
    trials: int = 32,
    horizon: float = 200.0,
    dt: float | None = None,
    burn_in: float | None = None,
    seed: int = 0,
    dt_factor: float = 0.5,
    dt_min: float = 1e-6,
) -> tuple[float, float]:
    """Estimate e(f, kappa) with a standard error from between-trial variance.

    Time-averages the squared filter error after burn_in, then averages over
    trials; the standard error is the between-trial standard deviation divided
    by sqrt(trials) (NaN for a single trial). Trials accumulate in fixed index
    order, so the result does not depend on how many workers ran them. The
    MAXACC_THREADS environment variable caps the worker pool.
    """
    fvals = f.values if isinstance(f, TestFunction) else np.asarray(f, dtype=float)
    if fvals.shape != (model.d,):
        raise ValueError(f"test function needs {model.d} values, got shape {fvals.shape}")
    if kappa <= 0:
        raise ValueError("estimate_stationary_error needs kappa > 0")
    if dt is None:
        dt = auto_dt(model, kappa, c=dt_factor, dt_min=dt_min)
    if burn_in is None:
        burn_in = auto_burn_in(model)
    steps = int(round(horizon / dt))
    burn_steps = int(np.floor(burn_in / dt + 1e-9))
    if burn_steps >= steps:
        raise ValueError(f"horizon {horizon} leaves no samples after burn-in {burn_in}")
    if steps > STEP_BUDGET:
        warnings.warn(
            f"{steps} grid steps exceed the step budget; consider a larger dt_min",
            stacklevel=2,
        )

    chunks = [np.arange(s, min(s + CHUNK_TRIALS, trials)) for s in range(0, trials, CHUNK_TRIALS)]
    workers = os.environ.get("MAXACC_THREADS")
    max_workers = int(workers) if workers else (os.cpu_count() or 1)
    max_workers = max(1, min(max_workers, len(chunks)))

    def work(idx: np.ndarray) -> np.ndarray:
        return _chunk_trial_means(model, fvals, kappa, dt, steps, burn_steps, seed, idx)

    if max_workers == 1 or len(chunks) == 1:
        results = [work(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(work, chunks))
    means = np.concatenate(results)
    estimate = float(np.mean(means))
    std_error = float(np.std(means, ddof=1) / np.sqrt(trials)) if trials > 1 else float("nan")
    return estimate, std_error


def kappa_sweep_finite(
    model: FiniteStateModel,
    f: TestFunction | np.ndarray,
    kappas: list[float],
    params: SimParams | None = None,
) -> SweepResult:
    """One Monte-Carlo error estimate per kappa, cross-referenced with the verdict.

    Rows are computed at kappas sorted in descending order. A per-row failure
    (for example weight underflow at an explicitly forced dt) is recorded in
    the row status and the remaining rows still run. The empirical trend is
    classified on the successful rows and flagged CONSISTENT or INCONSISTENT
    against the algebraic verdict.
    """
    params = params or SimParams()
    fv = f if isinstance(f, TestFunction) else TestFunction(np.asarray(f, dtype=float))
    verdict = finite_verdict(model)
    base = model.variance_of(fv.values)
    rows: list[SweepRow] = []
    for kappa in sorted(kappas, reverse=True):
        dt = params.dt if params.dt is not None else auto_dt(
            model, kappa, c=params.dt_factor, dt_min=params.dt_min
        )
        burn = params.burn_in if params.burn_in is not None else auto_burn_in(model)
        row = SweepRow(
            kappa=kappa,
            estimate=float("nan"),
            std_error=None,
            trials=params.trials,
            horizon=params.horizon,
            dt=dt,
            burn_in=burn,
        )
        try:
            est, se = estimate_stationary_error(
                model,
                fv,
                kappa,
                trials=params.trials,
                horizon=params.horizon,
                dt=dt,
                burn_in=burn,
                seed=params.seed,
            )
            row.estimate, row.std_error = est, se
        except (DegenerateWeight, ValueError) as exc:
            row.status = f"error: {type(exc).__name__}: {exc}"
        rows.append(row)
    trend = classify_trend(rows, base)
    return SweepResult(
        rows=rows,
        verdict_reference=verdict,
        base_variance=base,
        trend=trend,
        flag=consistency_flag(trend, verdict.maximal_accuracy),
    )
