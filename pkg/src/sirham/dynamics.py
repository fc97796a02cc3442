"""Right-hand sides of the epidemic flow in its different guises.

The basic model for the infectious and susceptible fractions reads

    dI/dt = beta*S*I - gamma*I,      dS/dt = -beta*S*I,

with the recovered fraction closed by R = 1 - S - I.  Three equivalent
reshapings of the same flow are provided alongside it:

* *rescaled time*: with the intrinsic clock ``dtau = S*I dt`` the rates
  become ``dI/dtau = beta - gamma/S`` and ``dS/dtau = -beta``;
* *logarithmic chart*: for ``(i, s) = (ln I, ln S)`` ordinary time already
  yields polynomial-in-exponentials rates ``di/dt = beta*exp(s) - gamma``
  and ``ds/dt = -beta*exp(i)``;
* *second-order reductions*: eliminating the partner variable gives one
  scalar equation per chart, whose right-hand sides are the ``*_accel``
  functions below.

All functions take plain ``(float, float)`` tuples and already-resolved
parameters, and are pure: schedule lookup happens in the caller.
"""

from __future__ import annotations

import math

from .core import EpidemicParams
from .errors import NonFiniteInput, NonPositiveCoordinate, SingularDenominator

__all__ = [
    "log_accel",
    "log_forcing",
    "rescaled_accel",
    "rescaled_forcing",
    "sir_rhs",
    "time_dilation",
]


def sir_rhs(
    state: tuple[float, float], params: EpidemicParams
) -> tuple[float, float]:
    """Ordinary-time rates ``(dI/dt, dS/dt)`` at ``state = (I, S)``."""
    i, s = state
    if not (math.isfinite(i) and math.isfinite(s)):
        raise NonFiniteInput(f"state must be finite, got {state}")
    flux = params.beta * s * i
    return (flux - params.gamma * i, -flux)


def time_dilation(state: tuple[float, float]) -> float:
    """Rate of the intrinsic clock, ``dtau/dt = S*I``, at ``(I, S)``."""
    return state[1] * state[0]


def rescaled_forcing(
    z: tuple[float, float], params: EpidemicParams
) -> tuple[float, float]:
    """Rescaled-time rates ``(dI/dtau, dS/dtau)`` at ``z = (I, S)``.

    The susceptible equation integrates to a straight line in tau; all the
    nonlinearity sits in the gamma/S term of the infectious equation.
    """
    i, s = z
    if not (math.isfinite(i) and math.isfinite(s)):
        raise NonFiniteInput(f"state must be finite, got {z}")
    if s == 0.0:
        raise SingularDenominator("gamma/S undefined at S = 0")
    if s < 0.0:
        raise NonPositiveCoordinate(f"susceptible fraction must be positive, got {s}")
    return (params.beta - params.gamma / s, -params.beta)


def rescaled_accel(i_rate: float, params: EpidemicParams) -> float:
    """Second derivative of I in rescaled time, given its first derivative.

    This is the right-hand side of the scalar reduction in the direct
    chart: the partner variable has been eliminated, so the acceleration
    depends on the rate alone.
    """
    if not math.isfinite(i_rate):
        raise NonFiniteInput(f"rate must be finite, got {i_rate}")
    d = params.beta - i_rate
    return -params.r0 * d * d


def log_forcing(
    z: tuple[float, float], params: EpidemicParams
) -> tuple[float, float]:
    """Ordinary-time rates ``(di/dt, ds/dt)`` at ``z = (ln I, ln S)``."""
    li, ls = z
    if not (math.isfinite(li) and math.isfinite(ls)):
        raise NonFiniteInput(f"state must be finite, got {z}")
    return (params.beta * math.exp(ls) - params.gamma, -params.beta * math.exp(li))


def log_accel(i_log: float, i_rate: float, params: EpidemicParams) -> float:
    """Second derivative of ln I in ordinary time: scalar reduction, log chart."""
    if not (math.isfinite(i_log) and math.isfinite(i_rate)):
        raise NonFiniteInput(f"inputs must be finite, got ({i_log}, {i_rate})")
    return -params.beta * math.exp(i_log) * (i_rate + params.gamma)
