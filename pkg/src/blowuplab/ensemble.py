"""Monte Carlo ensembles of growth paths with deterministic parallelism.

Each path's random stream is keyed by ``(master_seed, path_index)``
alone, so an ensemble's statistics are a pure function of its spec: the
paths can be simulated in one vectorized batch, split into chunks, or
spread over worker threads and the merged result is bit-for-bit the
same.  Pathwise log-growth slopes are accumulated with running sums
(count and first/second moments of time and log-level), which lets the
engine track a least-squares slope per path without storing the paths.

The volatility masking scan reruns one hyperbolic ensemble per noise
level with common random numbers and feeds every surviving path's
trailing window to the trend barometer: rising noise hides the
super-exponential curvature, so the flagged fraction falls even though
the drift, and the eventual singularity, is unchanged.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .analysis import barometer
from .errors import DomainError
from .ode import DEFAULT_BLOWUP_THRESHOLD
from .sde import StochasticModel, _derive_rng, _simulate_paths, hyperbolic_sde_model

__all__ = [
    "EnsembleSpec",
    "EnsembleStats",
    "MaskingPoint",
    "run_ensemble",
    "volatility_masking_scan",
]

_CHUNK_PATHS = 512
_QUANTILE_ORDERS = (5, 25, 50, 75, 95)


@dataclass(frozen=True)
class EnsembleSpec:
    """Everything that determines an ensemble, and nothing else.

    ``model`` may be ``None`` in templates that a scan fills in.
    The same spec always produces the same statistics.
    """

    model: StochasticModel | None
    A0: float
    dt: float
    t_end: float
    n_paths: int
    master_seed: int
    threshold: float = DEFAULT_BLOWUP_THRESHOLD

    def steps(self) -> int:
        if not math.isfinite(self.dt) or self.dt <= 0.0:
            raise DomainError(f"dt must be positive, got {self.dt!r}")
        if not math.isfinite(self.t_end) or self.t_end <= 0.0:
            raise DomainError(f"t_end must be positive, got {self.t_end!r}")
        n = int(round(self.t_end / self.dt))
        if n < 1:
            raise DomainError("horizon shorter than one step")
        return n

    def validate(self) -> None:
        if self.model is None:
            raise DomainError("ensemble spec has no model bound")
        if not math.isfinite(self.A0) or self.A0 <= 0.0:
            raise DomainError(f"A0 must be positive, got {self.A0!r}")
        if self.n_paths < 1:
            raise DomainError(f"n_paths must be >= 1, got {self.n_paths!r}")
        if int(self.master_seed) < 0:
            raise DomainError("master_seed must be nonnegative")
        if self.threshold <= 0.0:
            raise DomainError("threshold must be positive")
        self.steps()


@dataclass(frozen=True, eq=False)
class EnsembleStats:
    """Merged outcome statistics of one ensemble.

    ``blowup_times`` holds the explosion times of exploded paths in
    ascending order; ``quantiles`` maps the orders 5, 25, 50, 75, 95 to
    times (``None`` when nothing exploded).  ``terminal_values`` are
    the final levels of paths that neither exploded nor were absorbed,
    in path order.  ``slopes`` has one entry per path (``nan`` where a
    slope was not measurable); ``slope_mean``/``slope_std`` summarize
    the measurable ones.

    The remaining arrays are indexed by path: ``outcomes`` holds one of
    ``"exploded"``, ``"absorbed"``, ``"survived"``; ``event_times`` the
    explosion or absorption time (``nan`` for survivors);
    ``final_levels`` the last meaningful level (crossing sample for
    exploded paths, final value for survivors, ``nan`` for absorbed).
    """

    n_paths: int
    exploded_fraction: float
    absorbed_fraction: float
    blowup_times: np.ndarray
    quantiles: dict[int, float] | None
    terminal_values: np.ndarray
    slopes: np.ndarray
    slope_mean: float | None
    slope_std: float | None
    outcomes: np.ndarray
    event_times: np.ndarray
    final_levels: np.ndarray


def _chunk_ranges(n_paths: int, chunk: int) -> list[range]:
    return [range(lo, min(lo + chunk, n_paths))
            for lo in range(0, n_paths, chunk)]


def _simulate_chunk(spec: EnsembleSpec, indices: range,
                    record_stride: int | None = None):
    rngs = [_derive_rng(int(spec.master_seed), i) for i in indices]
    return _simulate_paths(spec.model, spec.A0, spec.dt, spec.steps(), rngs,
                           spec.threshold, record_stride=record_stride)


def _run_batches(spec: EnsembleSpec, workers: int,
                 record_stride: int | None = None):
    ranges = _chunk_ranges(spec.n_paths, _CHUNK_PATHS)
    if workers <= 1 or len(ranges) == 1:
        return [_simulate_chunk(spec, r, record_stride) for r in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_simulate_chunk, spec, r, record_stride)
                   for r in ranges]
        return [f.result() for f in futures]


def run_ensemble(spec: EnsembleSpec, workers: int = 1) -> EnsembleStats:
    """Simulate the ensemble and merge per-path outcomes into statistics.

    ``workers`` only sets the number of threads; the result is
    identical for any value because every path's draws are fixed by
    ``(master_seed, path_index)`` and chunks are merged in path order.
    """
    spec.validate()
    batches = _run_batches(spec, workers)

    exploded = np.concatenate([b.exploded for b in batches])
    absorbed = np.concatenate([b.absorbed for b in batches])
    event_time = np.concatenate([b.event_time for b in batches])
    alive = np.concatenate([b.alive for b in batches])
    terminal = np.concatenate([b.terminal for b in batches])
    slopes = np.concatenate([b.slopes for b in batches])
    crossing = np.concatenate([b.final_value for b in batches])

    outcomes = np.where(exploded, "exploded",
                        np.where(absorbed, "absorbed", "survived"))
    final_levels = np.full(spec.n_paths, math.nan)
    final_levels[exploded] = crossing[exploded]
    final_levels[alive] = terminal[alive]

    n = spec.n_paths
    blowup_times = np.sort(event_time[exploded])
    quantiles = None
    if blowup_times.size:
        quantiles = {q: float(np.quantile(blowup_times, q / 100.0))
                     for q in _QUANTILE_ORDERS}
    measurable = slopes[np.isfinite(slopes)]
    slope_mean = float(measurable.mean()) if measurable.size else None
    slope_std = float(measurable.std(ddof=1)) if measurable.size > 1 else None
    return EnsembleStats(
        n_paths=n,
        exploded_fraction=float(np.count_nonzero(exploded)) / n,
        absorbed_fraction=float(np.count_nonzero(absorbed)) / n,
        blowup_times=blowup_times,
        quantiles=quantiles,
        terminal_values=terminal[alive],
        slopes=slopes,
        slope_mean=slope_mean,
        slope_std=slope_std,
        outcomes=outcomes,
        event_times=event_time,
        final_levels=final_levels,
    )


@dataclass(frozen=True)
class MaskingPoint:
    """Barometer outcome for one noise level of the masking scan."""

    sigma: float
    n_paths: int
    n_analyzed: int
    n_flagged: int
    flagged_fraction: float
    exploded_fraction: float
    absorbed_fraction: float


def volatility_masking_scan(k: float, sigmas: Sequence[float],
                            template: EnsembleSpec, *,
                            window: int = 64,
                            z_threshold: float = 3.0,
                            record_points: int = 256,
                            workers: int = 1) -> list[MaskingPoint]:
    """Measure how noise hides super-exponential growth from the barometer.

    For each noise level the template ensemble is rerun with the
    hyperbolic model ``dA = k*A**2 dt + sigma*A**2 dW`` and the same
    master seed (common random numbers), and every path still alive at
    the horizon is tested: its trailing ``window`` recorded samples go
    through :func:`~blowuplab.analysis.barometer`.  Returned points
    follow the order of ``sigmas``; ``flagged_fraction`` is ``nan``
    when no path survived to be analyzed.  Paths absorbed before the
    horizon have no complete log-trajectory to test; they are excluded
    from the fraction and counted in ``absorbed_fraction`` instead.
    """
    if window < 8:
        raise DomainError(f"window must be at least 8, got {window!r}")
    if record_points < window:
        raise DomainError(
            f"record_points={record_points!r} cannot support window={window!r}"
        )
    levels = [float(s) for s in sigmas]
    if not levels:
        raise DomainError("sigmas must not be empty")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise DomainError("sigmas must increase strictly")
    points: list[MaskingPoint] = []
    for sigma in levels:
        spec = replace(template, model=hyperbolic_sde_model(k, sigma))
        spec.validate()
        n_steps = spec.steps()
        stride = max(1, n_steps // record_points)
        batches = _run_batches(spec, workers, record_stride=stride)

        n_analyzed = 0
        n_flagged = 0
        n_exploded = 0
        n_absorbed = 0
        for batch in batches:
            n_exploded += int(np.count_nonzero(batch.exploded))
            n_absorbed += int(np.count_nonzero(batch.absorbed))
            live = np.flatnonzero(batch.alive)
            if not live.size:
                continue
            times = batch.rec_steps * spec.dt
            if len(times) < window:
                raise DomainError(
                    f"recorded grid has {len(times)} samples, window needs {window}"
                )
            for lane in live:
                series = batch.series[lane]
                report = barometer(times, series, window, z_threshold)
                n_analyzed += 1
                n_flagged += int(report.flagged)
        fraction = (n_flagged / n_analyzed) if n_analyzed else math.nan
        points.append(MaskingPoint(
            sigma=sigma,
            n_paths=spec.n_paths,
            n_analyzed=n_analyzed,
            n_flagged=n_flagged,
            flagged_fraction=fraction,
            exploded_fraction=n_exploded / spec.n_paths,
            absorbed_fraction=n_absorbed / spec.n_paths,
        ))
    return points
