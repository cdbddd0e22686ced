"""Reverse-task analysis: read the fate of a growth law from its form.

Given an autonomous rate ``dA/dt = F(A)``, the time to reach infinity
from ``A0`` is ``integral dA / F(A)``.  :func:`classify_growth_law`
decides whether that integral converges using two independent routes
and only commits to a verdict when both agree:

1. a quadrature ladder: the integral is accumulated over the segments
   ``[A0*10^(j-1), A0*10^j]``; geometrically shrinking increments mean
   convergence (with a geometric tail estimate), non-decreasing ones
   mean divergence, and the polynomial middle ground is decided by the
   decay order of the increments (summable only above order 1);
2. a tail exponent probe: ``p(A) = ln(F(e*A)/F(A))`` measures the local
   power ``F ~ A**p``.  Clearly above 1 means finite time, at or below
   1 means infinite time.  The delicate strip just above 1 is resolved
   by fitting ``p(A) - 1 ~ a + beta/ln(A)``: a vanishing intercept with
   slope ``beta`` indicates ``F ~ A * ln(A)**beta``, which converges
   only for ``beta > 1``.  The fitted ``beta`` separates
   ``A*ln(A)`` (infinite) from ``A*ln(A)**2`` (finite), which the raw
   margin rule alone cannot do.

:func:`barometer` is the online counterpart: a quadratic trend test on
``ln(value)`` over a trailing window, flagging super-exponential
curvature when its t-statistic clears a threshold.  Exactly
exponential data fits the quadratic term at machine-epsilon size with
machine-epsilon residuals, which can produce huge spurious
t-statistics; a tiny absolute curvature floor filters those.

:func:`compose_phases` stitches the externally driven exponential
phase to a self-referential second phase at the exact switching level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

import numpy as np
from scipy.integrate import quad

from . import dsl
from .closedform import calibrate_k
from .errors import DomainError, InsufficientDataError
from .ode import BlowUpEvent, IntegrationOptions, VectorField, estimate_blowup_time, integrate

__all__ = [
    "FINITE_TIME",
    "INFINITE_TIME",
    "INCONCLUSIVE",
    "GrowthLaw",
    "ClassifierOptions",
    "MethodReading",
    "ConvergenceVerdict",
    "BarometerReport",
    "PhasePlan",
    "classify_growth_law",
    "barometer",
    "compose_phases",
]

FINITE_TIME = "finite-time"
INFINITE_TIME = "infinite-time"
INCONCLUSIVE = "inconclusive"

# A growth law is a rate expression in one level variable: DSL source,
# a parsed DSL expression, or any float-to-float callable.
GrowthLaw = Union[str, dsl.Expr, Callable]


@dataclass(frozen=True)
class ClassifierOptions:
    """Tunables for :func:`classify_growth_law`.

    The defaults implement the standard configuration: an eight-decade
    initial ladder, geometric ratio cutoff 0.9, exponent margin 0.05,
    and the probe grid ``1e4 ... 1e8``.  ``max_ladder_decades`` bounds
    how far the ladder may extend for slowly decaying increments while
    staying inside double range.
    """

    ladder_decades: int = 8
    max_ladder_decades: int = 280
    extension_block: int = 8
    geometric_ratio: float = 0.9
    exponent_margin: float = 0.05
    exponent_grid: tuple[float, ...] = (1e4, 1e5, 1e6, 1e7, 1e8)
    log_order_infinite: float = 1.1
    log_order_finite: float = 1.5
    intercept_slack: float = 0.01
    tail_target: float = 0.02
    quad_rtol: float = 1e-10

    def __post_init__(self) -> None:
        if self.ladder_decades < 3:
            raise DomainError("ladder needs at least 3 decades")
        if not 0.0 < self.geometric_ratio < 1.0:
            raise DomainError("geometric_ratio must be in (0, 1)")
        if self.exponent_margin <= 0.0:
            raise DomainError("exponent_margin must be positive")
        if len(self.exponent_grid) < 3:
            raise DomainError("exponent_grid needs at least 3 points")


@dataclass(frozen=True)
class MethodReading:
    """One sub-method's verdict with its numbers."""

    verdict: str
    estimate: float | None
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ConvergenceVerdict:
    """Joint classification of a growth law.

    The overall ``verdict`` is non-inconclusive only when both
    sub-methods agree.  ``singularity_time_estimate`` measures from
    ``A0`` and is present for finite-time verdicts;
    ``tail_exponent`` is the fitted asymptotic power of the rate.
    """

    verdict: str
    singularity_time_estimate: float | None
    tail_exponent: float | None
    evidence: dict[str, MethodReading]


@dataclass(frozen=True)
class BarometerReport:
    """Trend-test outcome over a trailing window.

    ``window`` is the analyzed time range ``(start, end)``;
    ``quadratic_coeff`` is the fitted second-order coefficient of
    ``ln(value)`` in original time units; ``flagged`` requires positive
    curvature, a t-statistic above the threshold, and curvature above
    the numeric floor.
    """

    window: tuple[float, float]
    n_samples: int
    quadratic_coeff: float
    z_score: float
    flagged: bool


@dataclass(frozen=True, eq=False)
class PhasePlan:
    """A two-phase scenario stitched at the switching level.

    ``times``/``levels`` hold the combined trajectory with the switch
    sample shared exactly; ``total_blowup_time`` is on the combined
    clock and ``None`` when phase 2 never blows up (or its asymptote
    cannot be pinned down).
    """

    switch_time: float
    switch_level: float
    phase1_label: str
    phase2_label: str
    times: np.ndarray
    levels: np.ndarray
    total_blowup_time: float | None
    blowup: BlowUpEvent | None


# --------------------------------------------------------------------------
# growth-law coercion


def _as_rate(law: GrowthLaw, parameters: Mapping[str, float] | None = None):
    """Coerce a growth law to ``(scalar_callable, label)``."""
    if isinstance(law, str):
        parsed = dsl.parse(law)
        if isinstance(parsed, dsl.SystemSpec):
            if len(parsed.equations) != 1:
                raise DomainError(
                    "growth-law classification works on a single equation; "
                    f"got {len(parsed.equations)}"
                )
            law = parsed.equations[0][1]
        else:
            law = parsed
    if isinstance(law, (dsl.Num, dsl.Name, dsl.Neg, dsl.BinOp, dsl.Call)):
        params = dict(parameters or {})
        free = sorted(dsl.free_names(law) - set(params))
        if len(free) > 1:
            raise DomainError(
                f"rate expression has several free names {free}; bind all "
                "but the level variable via parameters"
            )
        var = free[0] if free else "A"
        fn = dsl.as_function(law, var=var, parameters=params)
        return fn, dsl.pretty_print(law)
    if callable(law):
        label = getattr(law, "__name__", None) or "callable"
        return law, label
    raise DomainError(f"cannot interpret {law!r} as a growth law")


def _safe_rate(fn: Callable) -> Callable[[float], float]:
    """Scalar evaluation that maps overflow to inf instead of raising."""

    def call(level: float) -> float:
        try:
            value = float(fn(level))
        except (OverflowError, DomainError):
            return math.inf
        return value

    return call


# --------------------------------------------------------------------------
# method 1: quadrature ladder


def _ladder_segment(rate, x0: float, x1: float, rtol: float) -> float:
    # integrate dA/F(A) in x = ln A to tame the huge range
    def integrand(x: float) -> float:
        level = math.exp(x)
        f = rate(level)
        if not f > 0.0:
            return math.inf
        if math.isinf(f):
            return 0.0
        return level / f

    value, _ = quad(integrand, x0, x1, epsabs=0.0, epsrel=rtol, limit=200)
    return value


def _fit_decay_order(increments: Sequence[float]) -> float:
    """Least-squares order of ``d_j ~ j**(-alpha)`` over the tail rungs."""
    count = len(increments)
    take = max(6, min(16, count // 2))
    idx = np.arange(count - take + 1, count + 1, dtype=float)
    vals = np.array(increments[-take:])
    lx = np.log(idx)
    ly = np.log(vals)
    lxc = lx - lx.mean()
    return -float(lxc @ (ly - ly.mean())) / float(lxc @ lxc)


def _quadrature_method(rate, A0: float, opts: ClassifierOptions) -> MethodReading:
    log10 = math.log(10.0)
    x0 = math.log(A0)
    increments: list[float] = []
    x_top_limit = math.log(1e306)

    def add_rung() -> bool:
        j = len(increments)
        lo = x0 + j * log10
        hi = lo + log10
        if hi > x_top_limit:
            return False
        increments.append(_ladder_segment(rate, lo, hi, opts.quad_rtol))
        return True

    for _ in range(opts.ladder_decades):
        if not add_rung():
            break
    if len(increments) < 3 or not all(map(math.isfinite, increments)):
        return MethodReading(INCONCLUSIVE, None,
                             {"reason": "ladder not computable", "rungs": len(increments)})

    def tail_state() -> str:
        d = increments
        if d[-1] <= 0.0:
            # the integrand vanished: nothing left beyond this rung
            return "geometric"
        if d[-1] >= d[-2] * (1.0 - 1e-12) and d[-2] >= d[-3] * (1.0 - 1e-12):
            return "non-decreasing"
        # true geometric decay keeps the rung ratio constant; polynomial
        # or log-corrected decay drifts toward 1 and must be order-fitted
        tail = d[-min(len(d), 6):]
        ratios = [tail[i + 1] / tail[i] for i in range(len(tail) - 1)]
        if ratios[-1] < opts.geometric_ratio and \
                max(ratios) - min(ratios) <= 1e-6 * max(ratios):
            return "geometric"
        return "polynomial"

    state = tail_state()
    while state == "polynomial":
        alpha = _fit_decay_order(increments)
        total = math.fsum(increments)
        tail = increments[-1] * len(increments) / (alpha - 1.0) if alpha > 1.0 else math.inf
        deep_enough = len(increments) >= 3 * opts.ladder_decades
        if deep_enough and alpha <= opts.log_order_infinite:
            return MethodReading(INFINITE_TIME, None, {
                "mode": "polynomial", "decay_order": alpha,
                "rungs": len(increments),
            })
        if deep_enough and alpha > opts.log_order_infinite and tail <= opts.tail_target * total:
            return MethodReading(FINITE_TIME, total + tail, {
                "mode": "polynomial", "decay_order": alpha,
                "rungs": len(increments), "tail": tail,
            })
        if len(increments) >= opts.max_ladder_decades:
            # could not push the tail below target inside double range
            if alpha > 1.0 + (opts.log_order_infinite - 1.0) / 2.0:
                return MethodReading(FINITE_TIME, total + tail, {
                    "mode": "polynomial-truncated", "decay_order": alpha,
                    "rungs": len(increments), "tail": tail,
                })
            return MethodReading(INCONCLUSIVE, None, {
                "mode": "polynomial-truncated", "decay_order": alpha,
                "rungs": len(increments),
            })
        for _ in range(opts.extension_block):
            if not add_rung():
                break
        state = tail_state()

    if state == "non-decreasing":
        return MethodReading(INFINITE_TIME, None, {
            "mode": "non-decreasing", "rungs": len(increments),
            "last_ratio": increments[-1] / increments[-2],
        })

    # geometric decay: the remaining tail is a convergent geometric series
    ratio = increments[-1] / increments[-2]
    total = math.fsum(increments)
    tail = increments[-1] * ratio / (1.0 - ratio)
    return MethodReading(FINITE_TIME, total + tail, {
        "mode": "geometric", "ratio": ratio,
        "rungs": len(increments), "tail": tail,
    })


# --------------------------------------------------------------------------
# method 2: tail exponent probe


def _exponent_method(rate, A0: float, opts: ClassifierOptions) -> MethodReading:
    scale = max(A0, 1.0)
    points = []
    for base in opts.exponent_grid:
        level = base * scale
        f_lo = rate(level)
        f_hi = rate(level * math.e)
        if 0.0 < f_lo < math.inf and 0.0 < f_hi < math.inf:
            points.append((level, math.log(f_hi / f_lo)))
    if len(points) < 3:
        return MethodReading(INCONCLUSIVE, None,
                             {"reason": "rate not evaluable on the probe grid"})
    levels = np.array([lvl for lvl, _ in points])
    p = np.array([pv for _, pv in points])
    x = 1.0 / np.log(levels)
    xc = x - x.mean()
    slope = float(xc @ (p - p.mean())) / float(xc @ xc)
    intercept = float(p.mean() - 1.0 - slope * x.mean())
    p_limit = 1.0 + intercept

    details = {
        "p_values": tuple(float(v) for v in p),
        "p_limit": p_limit,
        "log_order": slope,
    }
    s = opts.exponent_margin
    if float(np.max(p)) <= 1.0 + 1e-9:
        return MethodReading(INFINITE_TIME, None, {**details, "mode": "subcritical"})
    if p_limit >= 1.0 + s and float(np.min(p)) >= 1.0 + s:
        return MethodReading(FINITE_TIME, None, {**details, "mode": "supercritical"})
    if abs(intercept) < opts.intercept_slack:
        if slope >= opts.log_order_finite:
            return MethodReading(FINITE_TIME, None, {**details, "mode": "log-corrected"})
        if slope <= opts.log_order_infinite:
            return MethodReading(INFINITE_TIME, None, {**details, "mode": "log-corrected"})
    return MethodReading(INCONCLUSIVE, None, {**details, "mode": "boundary"})


def _validate_rate_shape(rate, A0: float, opts: ClassifierOptions) -> None:
    # positivity and monotonicity are assumptions of the whole method;
    # sample them instead of trusting the caller
    top = min(1e12 * max(A0, 1.0), 1e300)
    grid = np.exp(np.linspace(math.log(A0), math.log(top), 49))
    previous = None
    for level in grid:
        level = float(level)
        value = float(rate(level))
        if math.isinf(value):
            break
        if not value > 0.0:
            raise DomainError(
                f"rate must be strictly positive on [A0, inf); "
                f"found {value!r} at level {level!r}"
            )
        if previous is not None and value < previous * (1.0 - 1e-9):
            raise DomainError(
                f"rate must be monotone non-decreasing; it drops near level {level!r}"
            )
        previous = value


def classify_growth_law(law: GrowthLaw, A0: float = 1.0,
                        opts: ClassifierOptions | None = None,
                        parameters: Mapping[str, float] | None = None) -> ConvergenceVerdict:
    """Decide whether ``dA/dt = F(A)`` reaches infinity in finite time.

    Runs the quadrature ladder and the tail exponent probe
    independently; the overall verdict is their agreement and
    ``inconclusive`` otherwise.  For finite-time verdicts the ladder's
    integral supplies the singularity time measured from ``A0``.

    The law must be positive and monotone non-decreasing on
    ``[A0, inf)``; both are validated by sampling.
    """
    opts = opts or ClassifierOptions()
    if not math.isfinite(A0) or A0 <= 0.0:
        raise DomainError(f"A0 must be positive and finite, got {A0!r}")
    fn, label = _as_rate(law, parameters)
    rate = _safe_rate(fn)
    _validate_rate_shape(rate, A0, opts)

    quadrature = _quadrature_method(rate, A0, opts)
    exponent = _exponent_method(rate, A0, opts)

    if quadrature.verdict == exponent.verdict and quadrature.verdict != INCONCLUSIVE:
        verdict = quadrature.verdict
    else:
        verdict = INCONCLUSIVE
    estimate = quadrature.estimate if verdict == FINITE_TIME else None
    tail_exponent = exponent.details.get("p_limit")
    return ConvergenceVerdict(
        verdict=verdict,
        singularity_time_estimate=estimate,
        tail_exponent=tail_exponent,
        evidence={"quadrature": quadrature, "tail_exponent": exponent,
                  "law": MethodReading(verdict, None, {"label": label, "A0": A0})},
    )


# --------------------------------------------------------------------------
# online barometer


def barometer(times: Sequence[float], values: Sequence[float], window: int,
              z_threshold: float = 3.0,
              curvature_floor: float = 1e-12) -> BarometerReport:
    """Flag super-exponential curvature in the trailing window.

    Fits ``ln(value) ~ b0 + b1*t + b2*t**2`` over the last ``window``
    samples (time standardized for conditioning) and reports the
    curvature's t-statistic.  ``flagged`` requires ``b2`` positive,
    ``z > z_threshold``, and ``b2`` above a floor of
    ``curvature_floor * max(1, |b0|, |b1|)`` in standardized units;
    the floor suppresses machine-epsilon curvature that exact
    exponential data otherwise turns into an arbitrarily significant
    fit.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != v.shape:
        raise DomainError("times and values must be 1-d and equally long")
    if window < 8:
        raise DomainError(f"window must be at least 8 samples, got {window!r}")
    if len(t) < window:
        raise InsufficientDataError(
            f"need at least {window} samples, got {len(t)}"
        )
    tw = t[-window:]
    vw = v[-window:]
    if np.any(~np.isfinite(tw)) or np.any(np.diff(tw) <= 0.0):
        raise DomainError("window times must be finite and strictly increasing")
    if np.any(~np.isfinite(vw)) or np.any(vw <= 0.0):
        raise DomainError("window values must be positive and finite")

    y = np.log(vw)
    center = tw.mean()
    spread = tw.std()
    tau = (tw - center) / spread
    design = np.column_stack([np.ones_like(tau), tau, tau * tau])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = y - design @ coef
    dof = window - 3
    sigma2 = float(residual @ residual) / dof
    gram_inv = np.linalg.inv(design.T @ design)
    se = math.sqrt(max(sigma2 * gram_inv[2, 2], 0.0))

    b2 = float(coef[2])
    floor = curvature_floor * max(1.0, abs(float(coef[0])), abs(float(coef[1])))
    above_floor = b2 > floor
    if se == 0.0:
        z = math.inf if above_floor else 0.0
    else:
        z = b2 / se
    flagged = bool(above_floor and z > z_threshold)
    return BarometerReport(
        window=(float(tw[0]), float(tw[-1])),
        n_samples=window,
        quadratic_coeff=b2 / spread ** 2,
        z_score=float(z),
        flagged=flagged,
    )


# --------------------------------------------------------------------------
# phase composition


def compose_phases(R: float, I: float, phase2_law: GrowthLaw, *,
                   c: float = 1.0,
                   switch_level: float | None = None,
                   horizon: float = 1e4,
                   phase1_samples: int = 129,
                   integration: IntegrationOptions | None = None,
                   parameters: Mapping[str, float] | None = None) -> PhasePlan:
    """Stitch the driven exponential phase to a self-referential phase.

    Phase 1 grows as ``c * R**t`` until the switching level (default:
    the driver capability ``I``), which both phases share as the exact
    same float.  Phase 2 integrates ``phase2_law`` from that level; its
    blow-up, when one is found, is reported on the combined clock.
    """
    k = calibrate_k(R, I)
    if not math.isfinite(c) or c <= 0.0:
        raise DomainError(f"initial level c must be positive, got {c!r}")
    switch = float(I) if switch_level is None else float(switch_level)
    if not math.isfinite(switch) or switch <= c:
        raise DomainError(
            f"switch level must exceed the initial level {c!r}, got {switch!r}"
        )
    if phase1_samples < 2:
        raise DomainError("phase1_samples must be at least 2")

    t_switch = math.log(switch / c) / math.log(R)
    t1 = np.linspace(0.0, t_switch, phase1_samples)
    levels1 = c * np.exp(math.log(R) * t1)
    levels1[-1] = switch  # the boundary sample is shared bit for bit

    fn, label2 = _as_rate(phase2_law, parameters)

    def rate(state: np.ndarray) -> np.ndarray:
        return np.atleast_1d(np.asarray(fn(np.asarray(state[0])), dtype=float))

    field2 = VectorField(dimension=1, rate=rate, names=("A",))
    integration = integration or IntegrationOptions()
    trajectory = integrate(field2, [switch], horizon, integration)
    event = estimate_blowup_time(field2, [switch], horizon, integration)

    times2 = trajectory.times[1:] + t_switch
    levels2 = trajectory.states[1:, 0]
    times = np.concatenate([t1, times2])
    levels = np.concatenate([levels1, levels2])

    shifted = None
    total = None
    if event is not None:
        shifted = BlowUpEvent(
            t_low=event.t_low + t_switch,
            t_high=event.t_high + t_switch,
            estimate=event.estimate + t_switch,
            method=event.method,
        )
        total = shifted.estimate
    return PhasePlan(
        switch_time=t_switch,
        switch_level=switch,
        phase1_label=f"exponential(R={R!r}, c={c!r}, k={k!r})",
        phase2_label=label2,
        times=times,
        levels=levels,
        total_blowup_time=total,
        blowup=shifted,
    )
