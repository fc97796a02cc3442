"""Conserved energies and canonical right-hand sides of the epidemic flow.

Both charts carry the same first integral.  In the direct chart

    H(I, S) = beta*(I + S) - gamma*ln(S),

which is conserved by the ordinary-time flow and is the canonical
Hamiltonian of the rescaled-time flow: with ``J = [[0, 1], [-1, 0]]``,

    d(I, S)/dtau = J grad H.

In the logarithmic chart ``(i, s) = (ln I, ln S)`` the conserved quantity

    h(i, s) = beta*(exp(i) + exp(s)) - gamma*s

generates the flow in *ordinary* time with the same constant J, which is
what makes that chart attractive for structure-preserving stepping.

The extended phase space doubles each chart with conjugate momenta.  The
price of the doubling is a constraint: momenta are not free but pinned to
the coordinates by ``C(Q, P) = Q + 2 J P = 0``.  The flow

    dQ = J grad H(Q),      dP = -(1/2) grad H(Q)

keeps C exactly constant, so a consistent start stays consistent; the
Lagrange multiplier enforcing this is ``-(1/2) grad H`` and is recomputed
on demand rather than stored.
"""

from __future__ import annotations

import math

from .core import Chart, EpidemicParams, ExtendedPhasePoint, apply_J
from .errors import (
    ConstraintViolation,
    NonFiniteInput,
    NonPositiveCoordinate,
    SingularDenominator,
)

__all__ = [
    "consistent_momenta",
    "dirac_constraint",
    "dirac_multiplier",
    "extended_hamiltonian",
    "extended_rhs",
    "gradient_direct",
    "gradient_log",
    "hamilton_rhs_direct",
    "hamilton_rhs_log",
    "hamilton_rhs_ordinary",
    "hamiltonian_direct",
    "hamiltonian_log",
]

#: default ceiling on the constraint norm accepted by extended_rhs
DEFAULT_CONSTRAINT_TOL = 1e-9


# ---------------------------------------------------------------------------
# direct chart

def hamiltonian_direct(z: tuple[float, float], params: EpidemicParams) -> float:
    """Conserved energy at ``z = (I, S)``."""
    i, s = z
    if not (math.isfinite(i) and math.isfinite(s)):
        raise NonFiniteInput(f"state must be finite, got {z}")
    if s <= 0.0:
        raise NonPositiveCoordinate(f"ln(S) undefined for S = {s}")
    return params.beta * (i + s) - params.gamma * math.log(s)


def gradient_direct(
    z: tuple[float, float], params: EpidemicParams
) -> tuple[float, float]:
    """Gradient of the direct-chart energy, ``(beta, beta - gamma/S)``."""
    i, s = z
    if not (math.isfinite(i) and math.isfinite(s)):
        raise NonFiniteInput(f"state must be finite, got {z}")
    if s == 0.0:
        raise SingularDenominator("gamma/S undefined at S = 0")
    if s < 0.0:
        raise NonPositiveCoordinate(f"susceptible fraction must be positive, got {s}")
    return (params.beta, params.beta - params.gamma / s)


def hamilton_rhs_direct(
    z: tuple[float, float], params: EpidemicParams
) -> tuple[float, float]:
    """Canonical rescaled-time rates ``J grad H`` at ``z = (I, S)``."""
    return apply_J(gradient_direct(z, params))


def hamilton_rhs_ordinary(
    z: tuple[float, float], params: EpidemicParams
) -> tuple[float, float]:
    """Ordinary-time rates ``(S*I) J grad H``; equals the basic model rates."""
    gi, gs = gradient_direct(z, params)
    dil = z[1] * z[0]
    return (dil * gs, -dil * gi)


# ---------------------------------------------------------------------------
# logarithmic chart

def hamiltonian_log(z: tuple[float, float], params: EpidemicParams) -> float:
    """Conserved energy at ``z = (ln I, ln S)``; equals the direct-chart value."""
    li, ls = z
    if not (math.isfinite(li) and math.isfinite(ls)):
        raise NonFiniteInput(f"state must be finite, got {z}")
    return params.beta * (math.exp(li) + math.exp(ls)) - params.gamma * ls


def gradient_log(
    z: tuple[float, float], params: EpidemicParams
) -> tuple[float, float]:
    """Gradient of the log-chart energy, ``(beta*I, beta*S - gamma)``."""
    li, ls = z
    if not (math.isfinite(li) and math.isfinite(ls)):
        raise NonFiniteInput(f"state must be finite, got {z}")
    return (params.beta * math.exp(li), params.beta * math.exp(ls) - params.gamma)


def hamilton_rhs_log(
    z: tuple[float, float], params: EpidemicParams
) -> tuple[float, float]:
    """Canonical ordinary-time rates ``J grad h`` at ``z = (ln I, ln S)``."""
    return apply_J(gradient_log(z, params))


def _gradient(z: tuple[float, float], params: EpidemicParams, chart: Chart):
    if chart is Chart.DIRECT:
        return gradient_direct(z, params)
    return gradient_log(z, params)


# ---------------------------------------------------------------------------
# extended phase space

def consistent_momenta(coords: tuple[float, float]) -> tuple[float, float]:
    """Momenta pinned to the coordinates, ``P = (1/2) J Q``.

    Works in either chart; the degenerate structure is the same.
    """
    jq = apply_J(coords)
    return (0.5 * jq[0], 0.5 * jq[1])


def dirac_constraint(point: ExtendedPhasePoint) -> tuple[float, float]:
    """Constraint residual ``C = Q + 2 J P``; zero on the physical manifold."""
    q = point.coords
    jp = apply_J(point.momenta)
    return (q[0] + 2.0 * jp[0], q[1] + 2.0 * jp[1])


def dirac_multiplier(
    coords: tuple[float, float], params: EpidemicParams, chart: Chart
) -> tuple[float, float]:
    """Multiplier enforcing the constraint, ``-(1/2) grad H`` at the point."""
    g = _gradient(coords, params, chart)
    return (-0.5 * g[0], -0.5 * g[1])


def extended_hamiltonian(
    point: ExtendedPhasePoint,
    multiplier: tuple[float, float],
    params: EpidemicParams,
) -> float:
    """Energy of the extended space, ``H(Q) + multiplier . C(Q, P)``.

    On the constraint manifold the second term vanishes and the value
    reduces to the chart energy.
    """
    if point.chart is Chart.DIRECT:
        h = hamiltonian_direct(point.coords, params)
    else:
        h = hamiltonian_log(point.coords, params)
    c = dirac_constraint(point)
    return h + multiplier[0] * c[0] + multiplier[1] * c[1]


def _extended_rates(
    y: tuple[float, float, float, float],
    params: EpidemicParams,
    chart: Chart,
    constraint_tol: float,
) -> tuple[float, float, float, float]:
    """Rates for the flattened extended state ``(q0, q1, p0, p1)``.

    Shared by :func:`extended_rhs` and the integration loop, which cannot
    afford to build a dataclass per stage evaluation.
    """
    q = (y[0], y[1])
    c0 = y[0] + 2.0 * y[3]
    c1 = y[1] - 2.0 * y[2]
    if max(abs(c0), abs(c1)) > constraint_tol:
        raise ConstraintViolation(
            f"constraint norm {max(abs(c0), abs(c1)):.3e} exceeds "
            f"tolerance {constraint_tol:.3e} at coords {q}"
        )
    g = _gradient(q, params, chart)
    return (g[1], -g[0], -0.5 * g[0], -0.5 * g[1])


def extended_rhs(
    point: ExtendedPhasePoint,
    params: EpidemicParams,
    constraint_tol: float = DEFAULT_CONSTRAINT_TOL,
) -> tuple[tuple[float, float], tuple[float, float]]:
    """Extended-space rates ``(dQ, dP) = (J grad H, -(1/2) grad H)``.

    The coordinate block is closed in Q, and the momentum rate is J applied
    to the coordinate rate halved, so the constraint residual is constant
    along the flow.  Evaluation refuses points that have already drifted
    off the manifold further than ``constraint_tol``.
    """
    y = (*point.coords, *point.momenta)
    r = _extended_rates(y, params, point.chart, constraint_tol)
    return ((r[0], r[1]), (r[2], r[3]))
