"""Closed-form solutions for self-accelerating growth models.

The model family has two phases.  In phase 1 a level ``A`` grows
exponentially under an external driver of fixed capability ``I``:
``dA/dt = k*I*A``, so with ``A = 1`` at ``t1 = 0`` the level reaches the
driver's capability after ``ln(I)/ln(R)`` years, where ``R = exp(k*I)``
is the annual growth factor.  In phase 2 the driver is the level itself
and the dynamics turn self-referential.  Depending on how the growth
rate couples to the level, phase 2 is

* hyperbolic, ``dA/dt = k*A**2``, blowing up at ``t2 = 1/(k*I)``;
* a power law, ``dA/dt = k*A**n`` with ``n > 1``, blowing up at
  ``t2 = 1/((n-1)*k*I**(n-1))``;
* logarithmic, ``dA/dt = k*ln(A)*A``, doubly exponential and finite for
  every finite time;
* or a coupled pair ``dY = k1*Y*A``, ``dA = k2*Y*A`` whose balanced
  start ``Y0 = k1/k2`` with ``A0 = 1`` gives ``A(t) = 1/(1 - k1*t)``.

Two separate clocks are used on purpose.  Phase-1 time ``t1`` runs from
the moment ``A = 1``; phase-2 time ``t2`` runs from the moment ``A = I``.
Total elapsed time is the sum of the two segment readings, as in
:func:`total_singularity_time`.

Every function validates its inputs and raises
:class:`~blowuplab.errors.DomainError` on violations rather than
returning junk.  Evaluation within a relative guard band of ``1e-12``
around a blow-up time is rejected: so close to the pole the closed form
has no float accuracy left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, LevelOverflowError

__all__ = [
    "ScenarioParams",
    "BlowUpTime",
    "calibrate_k",
    "exp_phase_solution",
    "phase1_duration",
    "hyperbolic_solution",
    "hyperbolic_blowup_time",
    "total_singularity_time",
    "powerlaw_solution",
    "powerlaw_blowup_time",
    "loglaw_solution",
    "coupled_gdp_solution",
]

# Relative half-width of the rejection band around a blow-up time.
BLOWUP_GUARD = 1e-12

# Largest x with exp(exp(x)) still representable in a double.
_MAX_DOUBLE_EXP_ARG = math.log(math.log(1.7976931348623157e308))


@dataclass(frozen=True)
class ScenarioParams:
    """Parameter bundle for the growth scenarios.

    Unused fields stay ``None``; each operation validates only the
    fields it reads.  Rates ``k``, ``r``, ``k1``, ``k2`` are per year,
    ``sigma`` scales a unit-variance annual shock, and ``I``, ``A0``,
    ``Y0``, ``c`` are dimensionless levels.

    When both ``R`` and ``r`` are given they must satisfy
    ``r == ln(R)`` exactly; set one and derive the other instead of
    risking an inconsistent pair.
    """

    k: float | None = None
    I: float | None = None
    R: float | None = None
    r: float | None = None
    n_exp: float | None = None
    sigma: float | None = None
    c: float | None = None
    k1: float | None = None
    k2: float | None = None
    A0: float | None = None
    Y0: float | None = None

    def __post_init__(self) -> None:
        if self.R is not None and self.r is not None:
            if self.R <= 1.0:
                raise DomainError(f"growth factor R must exceed 1, got {self.R!r}")
            if self.r != math.log(self.R):
                raise DomainError(
                    f"inconsistent rates: r={self.r!r} but ln(R)={math.log(self.R)!r}; "
                    "set one of R, r and leave the other None"
                )
        if self.sigma is not None and self.sigma < 0.0:
            raise DomainError(f"volatility sigma must be >= 0, got {self.sigma!r}")

    def growth_coefficient(self) -> float:
        """Per-capability growth coefficient ``k``.

        Uses the explicit ``k`` when set, otherwise derives it from the
        annual growth factor via :func:`calibrate_k` (or from ``r`` as
        ``r / I``).
        """
        if self.k is not None:
            _require_positive("k", self.k)
            return self.k
        if self.R is not None:
            return calibrate_k(self.R, _get_positive("I", self.I))
        if self.r is not None:
            if self.r <= 0.0:
                raise DomainError(f"log growth rate r must be > 0, got {self.r!r}")
            return self.r / _get_positive("I", self.I)
        raise DomainError("no growth rate available: set k, R, or r")


@dataclass(frozen=True)
class BlowUpTime:
    """Outcome of a blow-up time computation.

    ``finite`` tells whether the model reaches infinity in finite time;
    ``t_star`` is the blow-up time when it does and ``None`` otherwise.
    Construct via :meth:`at` or :meth:`never`.
    """

    finite: bool
    t_star: float | None = None

    def __post_init__(self) -> None:
        if self.finite:
            if self.t_star is None or not math.isfinite(self.t_star) or self.t_star <= 0.0:
                raise DomainError(
                    f"finite blow-up requires a positive finite t_star, got {self.t_star!r}"
                )
        elif self.t_star is not None:
            raise DomainError("t_star must be None when no finite blow-up occurs")

    @classmethod
    def at(cls, t_star: float) -> "BlowUpTime":
        return cls(finite=True, t_star=t_star)

    @classmethod
    def never(cls) -> "BlowUpTime":
        return cls(finite=False, t_star=None)


def _require_positive(name: str, value: float) -> None:
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be positive and finite, got {value!r}")


def _get_positive(name: str, value: float | None) -> float:
    if value is None:
        raise DomainError(f"parameter {name} is required but unset")
    _require_positive(name, value)
    return value


def _check_before_blowup(t: float, t_star: float, what: str) -> None:
    if t >= t_star * (1.0 - BLOWUP_GUARD):
        raise DomainError(
            f"{what} is undefined at t={t!r}: blow-up at t_star={t_star!r} "
            f"(evaluation rejected within a relative guard of {BLOWUP_GUARD:g})"
        )


def calibrate_k(R: float, I: float) -> float:
    """Growth coefficient matching an observed annual growth factor.

    Solves ``exp(k*I) = R`` for ``k``, i.e. ``k = ln(R)/I``: the rate at
    which a driver of capability ``I`` must improve the level per unit
    of its own capability so the level grows by factor ``R`` a year.
    Requires ``R > 1`` and ``I > 0``.
    """
    _require_positive("I", I)
    if not math.isfinite(R) or R <= 1.0:
        raise DomainError(f"growth factor R must exceed 1, got {R!r}")
    return math.log(R) / I


def exp_phase_solution(params: ScenarioParams, t1: float) -> float:
    """Level after ``t1`` years of externally driven exponential growth.

    Evaluates ``c * exp(k*I*t1)`` with ``c`` defaulting to 1.  With
    ``k`` calibrated from the annual growth factor this equals
    ``c * R**t1``.
    """
    if not math.isfinite(t1) or t1 < 0.0:
        raise DomainError(f"phase-1 time must be >= 0, got {t1!r}")
    c = 1.0 if params.c is None else params.c
    _require_positive("c", c)
    k = params.growth_coefficient()
    I = _get_positive("I", params.I)
    exponent = k * I * t1
    if exponent > 709.0:
        raise LevelOverflowError(
            f"exp-phase level exceeds double range at t1={t1!r} (k*I*t1={exponent!r})"
        )
    return c * math.exp(exponent)


def phase1_duration(R: float, I: float) -> float:
    """Years for the level to climb from 1 to the driver capability ``I``.

    Equals ``ln(I)/ln(R)``.  ``I = 1`` means the phase is already over
    (returns 0); ``I < 1`` has no meaning here and is rejected.
    """
    if not math.isfinite(R) or R <= 1.0:
        raise DomainError(f"growth factor R must exceed 1, got {R!r}")
    if not math.isfinite(I) or I < 1.0:
        raise DomainError(f"capability ratio I must be >= 1 for phase 1, got {I!r}")
    if I == 1.0:
        return 0.0
    return math.log(I) / math.log(R)


def hyperbolic_solution(k: float, I: float, t2: float) -> float:
    """Level ``t2`` years into the self-referential hyperbolic phase.

    Solves ``dA/dt2 = k*A**2`` from ``A(0) = I``, giving
    ``A = I / (1 - k*I*t2)``.  This form keeps full precision near the
    pole, unlike ``1/(1/I - k*t2)`` whose subtraction cancels.
    Evaluation at or beyond ``t2 = 1/(k*I)`` raises
    :class:`~blowuplab.errors.DomainError`.
    """
    _require_positive("k", k)
    _require_positive("I", I)
    if not math.isfinite(t2) or t2 < 0.0:
        raise DomainError(f"phase-2 time must be >= 0, got {t2!r}")
    t_star = 1.0 / (k * I)
    _check_before_blowup(t2, t_star, "hyperbolic level")
    return I / (1.0 - k * I * t2)


def hyperbolic_blowup_time(k: float, I: float) -> BlowUpTime:
    """Blow-up time ``1/(k*I)`` of the hyperbolic phase."""
    _require_positive("k", k)
    _require_positive("I", I)
    return BlowUpTime.at(1.0 / (k * I))


def total_singularity_time(R: float, I: float) -> float:
    """Years from ``A = 1`` to the hyperbolic blow-up, both phases.

    Phase 1 contributes ``ln(I)/ln(R)``; phase 2, entered at ``A = I``
    with ``k`` calibrated to the same growth factor, contributes
    ``1/(k*I) = 1/ln(R)``.  Notably the phase-2 term does not depend on
    ``I``: a more capable driver shortens phase 1 only.
    """
    duration1 = phase1_duration(R, I)
    return duration1 + 1.0 / math.log(R)


def powerlaw_solution(k: float, I: float, n_exp: float, t2: float) -> float:
    """Level ``t2`` years into a power-law phase ``dA/dt2 = k*A**n``.

    For ``n > 1`` the solution is
    ``A = (I**(1-n) - (n-1)*k*t2) ** (-1/(n-1))``, blowing up when the
    bracket reaches zero.  ``n <= 1`` does not blow up and is rejected
    here; use :func:`powerlaw_blowup_time` to probe finiteness without
    an exception.  ``n = 2`` reproduces :func:`hyperbolic_solution`.
    """
    _require_positive("k", k)
    _require_positive("I", I)
    if not math.isfinite(n_exp) or n_exp <= 1.0:
        raise DomainError(
            f"power-law solution requires exponent n > 1, got {n_exp!r} "
            "(no finite-time blow-up otherwise)"
        )
    if not math.isfinite(t2) or t2 < 0.0:
        raise DomainError(f"phase-2 time must be >= 0, got {t2!r}")
    m = n_exp - 1.0
    head = I ** (-m)
    t_star = head / (m * k)
    _check_before_blowup(t2, t_star, "power-law level")
    bracket = head - m * k * t2
    return bracket ** (-1.0 / m)


def powerlaw_blowup_time(k: float, I: float, n_exp: float) -> BlowUpTime:
    """Blow-up time of the power-law phase, finite only for ``n > 1``.

    Returns ``1/((n-1)*k*I**(n-1))`` wrapped in a finite
    :class:`BlowUpTime`; exponents ``n <= 1`` yield the not-finite
    outcome instead of an exception, so callers can scan exponent
    ranges without try/except.
    """
    _require_positive("k", k)
    _require_positive("I", I)
    if not math.isfinite(n_exp):
        raise DomainError(f"exponent must be finite, got {n_exp!r}")
    if n_exp <= 1.0:
        return BlowUpTime.never()
    m = n_exp - 1.0
    return BlowUpTime.at(I ** (-m) / (m * k))


def loglaw_solution(c: float, k: float, t: float) -> float:
    """Level under logarithmic rate coupling, ``dA/dt = k*ln(A)*A``.

    The solution ``A = exp(exp(c + k*t))`` grows doubly exponentially
    yet stays finite for every finite ``t``: there is no blow-up.  What
    it can do is leave double precision, around ``c + k*t > 6.565``;
    that raises :class:`~blowuplab.errors.LevelOverflowError`, which is
    a representation limit, not a singularity.
    """
    # any finite (c, k, t) is fine: k = 0 freezes the level and k < 0
    # decays it toward 1; only overflow needs guarding
    if not math.isfinite(k):
        raise DomainError(f"growth coefficient must be finite, got {k!r}")
    if not math.isfinite(c):
        raise DomainError(f"integration constant must be finite, got {c!r}")
    if not math.isfinite(t):
        raise DomainError(f"time must be finite, got {t!r}")
    inner = c + k * t
    if inner > _MAX_DOUBLE_EXP_ARG:
        raise LevelOverflowError(
            f"doubly exponential level exceeds double range at t={t!r} "
            f"(c + k*t = {inner!r} > {_MAX_DOUBLE_EXP_ARG:.6f}); this is an "
            "overflow of the representation, not a blow-up"
        )
    return math.exp(math.exp(inner))


def coupled_gdp_solution(k1: float, t: float) -> float:
    """Level of the balanced coupled economy, ``A(t) = 1/(1 - k1*t)``.

    In the pair ``dY/dt = k1*Y*A``, ``dA/dt = k2*Y*A`` the combination
    ``Y - (k1/k2)*A`` is conserved.  Starting from ``A0 = 1`` with the
    balanced co-factor ``Y0 = k1/k2`` it vanishes, ``Y`` stays
    proportional to ``A``, and the level follows the hyperbola above,
    blowing up at ``t = 1/k1``.  Evaluation at or beyond the pole is
    rejected.
    """
    _require_positive("k1", k1)
    if not math.isfinite(t) or t < 0.0:
        raise DomainError(f"time must be >= 0, got {t!r}")
    t_star = 1.0 / k1
    _check_before_blowup(t, t_star, "coupled-economy level")
    return 1.0 / (1.0 - k1 * t)
