"""Stochastic growth models under Euler-Maruyama discretization.

Paths of ``dA = a(A) dt + b(A) dW`` are simulated on a fixed grid with
per-path random streams derived as
``PCG64(SeedSequence(master_seed, spawn_key=(path_index,)))``, so any
path can be reproduced bit for bit in isolation, in a different chunk
split, or inside a vectorized batch: the draws depend only on the
master seed and the path's index.

Discretized self-accelerating growth behaves qualitatively differently
from its continuous limit: a path that wanders high enough takes one
huge Euler step and leaves through the explosion threshold (default
shared with the ODE engine, ``1e9``), while a path kicked to a
nonpositive level is absorbed.  Both terminations are tracked
separately; "exploded" here always means the discrete scheme crossed
the threshold, which for volatile hyperbolic growth happens at widely
dispersed times rather than at the deterministic blow-up.

The ergodicity utilities implement the standard variance-stabilizing
change of variable: ``u(A)`` with ``u'(A) = 1/b(A)`` turns the
diffusion coefficient into 1, and the transformed drift is
``a_u(A) = a(A)/b(A) - b'(A)/2``.  When ``a_u`` is constant in ``A``
the transformed process is a Brownian motion with drift, time averages
converge, and ensemble statistics can be read off a single long path;
geometric growth passes, self-referential (hyperbolic) growth does
not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, InsufficientDataError
from .ode import DEFAULT_BLOWUP_THRESHOLD

__all__ = [
    "StochasticModel",
    "PathResult",
    "ErgodicityReport",
    "em_path",
    "gbm_model",
    "gbm_time_average_exponent",
    "hyperbolic_sde_model",
    "ergodicity_check",
    "ergodic_drift",
    "pathwise_growth_slope",
]

_BLOCK_STEPS = 4096
_MIN_SLOPE_SAMPLES = 10


@dataclass(frozen=True)
class StochasticModel:
    """Drift and diffusion of a scalar SDE ``dA = drift dt + diffusion dW``.

    Both callables must accept floats and numpy arrays elementwise.
    """

    drift: Callable
    diffusion: Callable
    label: str = "custom"


@dataclass(frozen=True, eq=False)
class PathResult:
    """One simulated path.

    ``times``/``values`` hold the recorded samples, all finite and
    positive.  An exploded path ends with the sample that crossed the
    explosion threshold (when it is finite); an absorbed path ends with
    the last positive sample, and ``absorption_time`` marks the step
    that went nonpositive.  ``seed`` is the ``(master_seed,
    path_index)`` pair that reproduces the path exactly.
    """

    times: np.ndarray
    values: np.ndarray
    exploded: bool
    explosion_step_time: float | None
    absorbed: bool
    absorption_time: float | None
    seed: tuple[int, int]


@dataclass(frozen=True, eq=False)
class ErgodicityReport:
    """Outcome of the variance-stabilizing transform analysis.

    ``levels`` is the probe grid in the original variable, ``u_of_A``
    the transform sampled on it (anchored to 0 at the first level), and
    ``drift_of_u`` the transformed drift.  ``constancy_score`` is the
    largest deviation of the transformed drift from its grid mean,
    relative to that mean; the transform exists when the score stays
    below ``tolerance``.  ``reason`` is set when no transform could be
    constructed at all (for instance a vanishing diffusion).
    """

    transform_exists: bool
    levels: np.ndarray
    u_of_A: np.ndarray
    drift_of_u: np.ndarray
    constancy_score: float
    tolerance: float
    reason: str | None = None


def _normalize_seed(seed) -> tuple[int, int]:
    if isinstance(seed, tuple):
        if len(seed) != 2:
            raise DomainError(f"seed tuple must be (master_seed, path_index), got {seed!r}")
        master, index = seed
    else:
        master, index = seed, 0
    master = int(master)
    index = int(index)
    if master < 0 or index < 0:
        raise DomainError(f"seed components must be nonnegative, got {seed!r}")
    return master, index


def _derive_rng(master_seed: int, path_index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(master_seed, spawn_key=(path_index,))
    return np.random.Generator(np.random.PCG64(seq))


class _Batch:
    """Raw output of the vectorized Euler-Maruyama loop."""

    __slots__ = (
        "n_steps", "dt", "exploded", "absorbed", "event_time", "final_value",
        "alive", "terminal", "slopes", "slope_counts", "rec_steps", "series",
    )


def _simulate_paths(model: StochasticModel, A0: float, dt: float, n_steps: int,
                    rngs: Sequence[np.random.Generator], threshold: float,
                    record_stride: int | None = None) -> _Batch:
    """March ``len(rngs)`` paths in lockstep.

    The normal draws are taken per path in blocks of ``_BLOCK_STEPS``,
    which keeps each path's stream independent of how many other paths
    run alongside it.  Dead lanes keep their last value and consume
    draws like everyone else.
    """
    n = len(rngs)
    sqdt = math.sqrt(dt)
    a = np.full(n, float(A0))
    alive = np.ones(n, dtype=bool)
    exploded = np.zeros(n, dtype=bool)
    absorbed = np.zeros(n, dtype=bool)
    event_time = np.full(n, np.nan)
    final_value = np.full(n, np.nan)

    # slope accumulators for ln(value) against time; time is shifted by
    # half the horizon to keep the normal equations well conditioned
    t_shift = 0.5 * n_steps * dt
    cnt = np.zeros(n)
    st = np.zeros(n)
    stt = np.zeros(n)
    sy = np.zeros(n)
    sty = np.zeros(n)

    recording = record_stride is not None
    rec_steps = None
    series = None
    rec_pos = 0
    if recording:
        stride = max(1, int(record_stride))
        steps = list(range(0, n_steps + 1, stride))
        if steps[-1] != n_steps:
            steps.append(n_steps)
        rec_steps = np.array(steps, dtype=np.int64)
        series = np.full((n, len(rec_steps)), np.nan)
        series[:, 0] = a
        rec_pos = 1

    def accumulate(t_value: float) -> None:
        if not alive.any():
            return
        ts = t_value - t_shift
        y = np.where(alive, np.log(np.where(alive, a, 1.0)), 0.0)
        live = alive.astype(float)
        cnt[:] += live
        st[:] += live * ts
        stt[:] += live * ts * ts
        sy[:] += y
        sty[:] += y * ts

    step = 0
    while step < n_steps:
        block = min(_BLOCK_STEPS, n_steps - step)
        draws = np.empty((n, block))
        for i, rng in enumerate(rngs):
            draws[i] = rng.standard_normal(block)
        for j in range(block):
            accumulate(step * dt)
            if not alive.any():
                step = n_steps
                break
            with np.errstate(all="ignore"):
                drift = np.asarray(model.drift(a), dtype=float)
                diffusion = np.asarray(model.diffusion(a), dtype=float)
                a_next = a + drift * dt + diffusion * sqdt * draws[:, j]
            step += 1
            t_next = step * dt
            nonfinite = ~np.isfinite(a_next)
            newly_exploded = alive & (nonfinite | (a_next >= threshold))
            newly_absorbed = alive & ~newly_exploded & (a_next <= 0.0)
            if newly_exploded.any():
                exploded |= newly_exploded
                event_time[newly_exploded] = t_next
                with np.errstate(invalid="ignore"):
                    crossing_ok = newly_exploded & ~nonfinite
                final_value[crossing_ok] = a_next[crossing_ok]
            if newly_absorbed.any():
                absorbed |= newly_absorbed
                event_time[newly_absorbed] = t_next
            survivors = alive & ~newly_exploded & ~newly_absorbed
            a = np.where(survivors, a_next, a)
            alive = survivors
            if recording and rec_pos < len(rec_steps) and step == rec_steps[rec_pos]:
                series[:, rec_pos] = np.where(alive, a, np.nan)
                rec_pos += 1
        else:
            continue
        break
    if alive.any():
        accumulate(n_steps * dt)

    with np.errstate(all="ignore"):
        sxx = stt - st * st / np.maximum(cnt, 1.0)
        sxy = sty - st * sy / np.maximum(cnt, 1.0)
        slopes = np.where((cnt >= _MIN_SLOPE_SAMPLES) & (sxx > 0.0), sxy / sxx, np.nan)

    out = _Batch()
    out.n_steps = n_steps
    out.dt = dt
    out.exploded = exploded
    out.absorbed = absorbed
    out.event_time = event_time
    out.final_value = final_value
    out.alive = alive
    out.terminal = a.copy()
    out.slopes = slopes
    out.slope_counts = cnt
    out.rec_steps = rec_steps
    out.series = series
    return out


def _validate_grid(A0: float, dt: float, t_end: float) -> int:
    if not math.isfinite(A0) or A0 <= 0.0:
        raise DomainError(f"initial level must be positive, got {A0!r}")
    if not math.isfinite(dt) or dt <= 0.0:
        raise DomainError(f"dt must be positive, got {dt!r}")
    if not math.isfinite(t_end) or t_end <= 0.0:
        raise DomainError(f"t_end must be positive, got {t_end!r}")
    n_steps = int(round(t_end / dt))
    if n_steps < 1:
        raise DomainError(f"horizon {t_end!r} is shorter than one step {dt!r}")
    return n_steps


def em_path(model: StochasticModel, A0: float, dt: float, t_end: float, seed,
            *, record_every: int = 1,
            threshold: float = DEFAULT_BLOWUP_THRESHOLD) -> PathResult:
    """Simulate one Euler-Maruyama path, reproducibly.

    ``seed`` is either a master seed (path index 0) or a
    ``(master_seed, path_index)`` pair.  The effective horizon is
    ``round(t_end/dt)`` steps.  ``record_every`` thins the stored
    samples; termination samples are always kept (the threshold
    crossing if it is finite, the last positive level before
    absorption).
    """
    n_steps = _validate_grid(A0, dt, t_end)
    if record_every < 1:
        raise DomainError(f"record_every must be >= 1, got {record_every!r}")
    master, index = _normalize_seed(seed)
    batch = _simulate_paths(model, A0, dt, n_steps, [_derive_rng(master, index)],
                            threshold, record_stride=record_every)
    row = batch.series[0]
    keep = np.isfinite(row)
    times = batch.rec_steps[keep] * dt
    values = row[keep]
    exploded = bool(batch.exploded[0])
    absorbed = bool(batch.absorbed[0])
    event = float(batch.event_time[0]) if exploded or absorbed else None
    if exploded and np.isfinite(batch.final_value[0]):
        times = np.append(times, event)
        values = np.append(values, batch.final_value[0])
    return PathResult(
        times=times, values=values,
        exploded=exploded,
        explosion_step_time=event if exploded else None,
        absorbed=absorbed,
        absorption_time=event if absorbed else None,
        seed=(master, index),
    )


def pathwise_growth_slope(path: PathResult) -> float:
    """Least-squares slope of ``ln(value)`` against time for one path.

    Uses the recorded samples up to but excluding the explosion
    crossing; requires at least 10 of them.
    """
    times = path.times
    values = path.values
    if path.exploded and path.explosion_step_time is not None \
            and len(times) and times[-1] == path.explosion_step_time:
        times = times[:-1]
        values = values[:-1]
    if len(times) < _MIN_SLOPE_SAMPLES:
        raise InsufficientDataError(
            f"growth slope needs at least {_MIN_SLOPE_SAMPLES} samples, "
            f"got {len(times)}"
        )
    shift = 0.5 * (float(times[0]) + float(times[-1]))
    ts = times - shift
    y = np.log(values)
    tc = ts - ts.mean()
    denom = float(tc @ tc)
    if denom <= 0.0:
        raise InsufficientDataError("time grid is degenerate")
    return float(tc @ (y - y.mean())) / denom


def gbm_model(k: float, I: float, sigma: float) -> StochasticModel:
    """Geometric growth with proportional noise.

    ``dA = k*I*A dt + sigma*I*A dW``: the externally driven exponential
    phase with the driver's capability scaling both the push and the
    noise.
    """
    _check_rate("k", k)
    _check_rate("I", I)
    _check_sigma(sigma)
    mu = k * I
    vol = sigma * I
    return StochasticModel(
        drift=lambda a: mu * a,
        diffusion=lambda a: vol * a,
        label="gbm",
    )


def gbm_time_average_exponent(k: float, I: float, sigma: float) -> float:
    """Almost-sure exponential rate of a single geometric path.

    ``ln A(t) / t`` converges to ``k*I - (sigma*I)**2 / 2``: the noise
    correction subtracts half the squared total volatility, so a large
    ensemble can grow in the mean while almost every individual path
    decays.
    """
    _check_rate("k", k)
    _check_rate("I", I)
    _check_sigma(sigma)
    return k * I - 0.5 * (sigma * I) ** 2


def hyperbolic_sde_model(k: float, sigma: float) -> StochasticModel:
    """Self-referential growth with level-squared noise.

    ``dA = k*A**2 dt + sigma*A**2 dW``.  Deterministically this blows
    up at ``1/(k*A0)``; with noise the discretized paths explode at
    widely dispersed times or get absorbed near zero instead.
    """
    _check_rate("k", k)
    _check_sigma(sigma)
    return StochasticModel(
        drift=lambda a: k * a * a,
        diffusion=lambda a: sigma * a * a,
        label="hyperbolic-sde",
    )


def _check_rate(name: str, value: float) -> None:
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be positive and finite, got {value!r}")


def _check_sigma(sigma: float) -> None:
    if not math.isfinite(sigma) or sigma < 0.0:
        raise DomainError(f"sigma must be >= 0 and finite, got {sigma!r}")


def _central_derivative(fn, levels: np.ndarray, rel_step: float) -> np.ndarray:
    h = rel_step * np.abs(levels)
    upper = np.asarray(fn(levels + h), dtype=float)
    lower = np.asarray(fn(levels - h), dtype=float)
    return (upper - lower) / (2.0 * h)


def ergodicity_check(model: StochasticModel, levels: Sequence[float] | None = None,
                     *, rel_derivative_step: float = 1e-6,
                     tolerance: float = 1e-6) -> ErgodicityReport:
    """Probe whether the unit-diffusion transform has constant drift.

    Maps the process through ``u`` with ``u'(A) = 1/b(A)``; by Ito's
    formula the transformed drift is ``a(A)/b(A) - b'(A)/2`` with
    ``b'`` taken by central differences at relative step
    ``rel_derivative_step``.  The transform is declared to exist when
    the transformed drift is constant over ``levels`` (default
    ``1, 2, ..., 100``): its largest relative deviation from the grid
    mean stays below ``tolerance``.  Existence means time averages of
    one long path stand in for ensemble averages.

    A diffusion that vanishes somewhere on the grid admits no
    transform at all; that comes back as a report with
    ``transform_exists=False`` and ``reason`` set rather than an
    exception, because "no transformation" is a legitimate finding.
    """
    if levels is None:
        grid = np.arange(1.0, 101.0)
    else:
        grid = np.asarray(levels, dtype=float)
    if grid.ndim != 1 or len(grid) < 3:
        raise DomainError("levels must be a 1-d grid with at least 3 points")
    if np.any(~np.isfinite(grid)) or np.any(grid <= 0.0):
        raise DomainError("levels must be positive and finite")
    if np.any(np.diff(grid) <= 0.0):
        raise DomainError("levels must increase strictly")

    nan_grid = np.full(len(grid), math.nan)
    diffusion = np.asarray(model.diffusion(grid), dtype=float)
    if np.any(~np.isfinite(diffusion)) or np.any(diffusion < 0.0):
        raise DomainError(
            "diffusion must be nonnegative and finite on the probe grid"
        )
    if np.any(diffusion == 0.0):
        return ErgodicityReport(
            transform_exists=False,
            levels=grid,
            u_of_A=nan_grid,
            drift_of_u=nan_grid,
            constancy_score=math.inf,
            tolerance=tolerance,
            reason="diffusion vanishes on the grid; the transform divides by it",
        )
    drift = np.asarray(model.drift(grid), dtype=float)
    if np.any(~np.isfinite(drift)):
        raise DomainError("drift must be finite on the probe grid")

    derivative = _central_derivative(model.diffusion, grid, rel_derivative_step)
    drift_u = drift / diffusion - 0.5 * derivative

    u = np.zeros(len(grid))
    for i in range(1, len(grid)):
        segment, _ = quad(lambda x: 1.0 / float(model.diffusion(x)),
                          grid[i - 1], grid[i], limit=200)
        u[i] = u[i - 1] + segment

    mean = float(np.mean(drift_u))
    deviation = float(np.max(np.abs(drift_u - mean)))
    if deviation == 0.0:
        score = 0.0
    elif mean == 0.0:
        score = math.inf
    else:
        score = deviation / abs(mean)
    return ErgodicityReport(
        transform_exists=bool(score < tolerance),
        levels=grid,
        u_of_A=u,
        drift_of_u=drift_u,
        constancy_score=score,
        tolerance=tolerance,
    )


def ergodic_drift(diffusion, a_u: float, b_u: float = 1.0,
                  *, rel_derivative_step: float = 1e-6):
    """Build the drift that makes ``diffusion`` exactly transformable.

    Inverts the transform relation: the returned callable is
    ``a(A) = (a_u/b_u) * b(A) + b(A) * b'(A) / 2`` with ``b'`` taken by
    central differences.  An SDE with this drift and the given
    diffusion maps through the unit-diffusion transform to constant
    coefficients, so :func:`ergodicity_check` on it reports that the
    transform exists.
    """
    if not callable(diffusion):
        raise DomainError("diffusion must be callable")
    if float(b_u) == 0.0:
        raise DomainError(f"b_u must be nonzero, got {b_u!r}")
    ratio = float(a_u) / float(b_u)
    if not math.isfinite(ratio):
        raise DomainError(f"a_u/b_u must be finite, got {a_u!r}/{b_u!r}")

    def drift(level):
        values = np.asarray(level, dtype=float)
        b = np.asarray(diffusion(values), dtype=float)
        if np.any(~np.isfinite(b)) or np.any(b <= 0.0):
            raise DomainError("diffusion must be positive where the drift is evaluated")
        derivative = _central_derivative(diffusion, values, rel_derivative_step)
        result = ratio * b + 0.5 * b * derivative
        if np.ndim(level) == 0:
            return float(result)
        return result

    return drift
