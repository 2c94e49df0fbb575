"""Helpers for evaluating analytic functions next to their singularities.

All evaluators in the package are meromorphic in ``s``. Close to a pole the
regular part is recovered by averaging over a small circle (mean-value
property), close to a removable point the function itself is averaged.
Derivatives and limits are taken by central differences with Richardson
extrapolation.
"""
from typing import Callable, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import factorial

from .common import PoleError, PoleInfo, ZetaValue, pole_info

Number = Union[complex, ZetaValue]

NEAR_POLE_RADIUS = 1e-3
CIRCLE_RADIUS = 0.05
CIRCLE_NODES = 32
POLE_EXACT = 1e-13


def _value(x: Number) -> complex:
    return x.value if isinstance(x, ZetaValue) else complex(x)


def _error(x: Number) -> float:
    return x.err_estimate if isinstance(x, ZetaValue) else 0.0


def circle_average(
    fn: Callable[[complex], Number],
    center: complex,
    radius: float = CIRCLE_RADIUS,
    nodes: int = CIRCLE_NODES,
) -> ZetaValue:
    """Mean of ``fn`` over a circle, equal to its value at the center when
    ``fn`` is analytic on the closed disk.

    The error estimate compares the full rule with the rule on every other
    node and adds the largest reported error of the samples.
    """
    angles = 2 * np.pi * (np.arange(nodes) + 0.5) / nodes
    points = complex(center) + radius * np.exp(1j * angles)
    samples = [fn(complex(z)) for z in points]
    values = np.array([_value(x) for x in samples])
    errors = np.array([_error(x) for x in samples])
    full = values.mean()
    coarse = values[::2].mean()
    terms = sum(getattr(x, "terms_used", 0) for x in samples)
    return ZetaValue(
        full,
        abs(full - coarse) + errors.max(),
        terms_used=terms,
    )


def regular_average(fn: Callable[[complex], Number], center: complex) -> ZetaValue:
    """Circle averages of ``fn`` at two radii.

    Both equal the value at the center. Their difference exposes
    evaluation errors of ``fn`` that vary along the circle, such as the
    cancellation between singular terms of a representation.
    """
    outer = circle_average(fn, center, CIRCLE_RADIUS)
    inner = circle_average(fn, center, CIRCLE_RADIUS / 2)
    return ZetaValue(
        inner.value,
        inner.err_estimate + abs(inner.value - outer.value),
        terms_used=inner.terms_used + outer.terms_used,
    )


def evaluate_with_poles(
    raw: Callable[[complex], ZetaValue],
    s: complex,
    poles: Iterable[Tuple[complex, complex]] = (),
    removable: Iterable[complex] = (),
    what: str = "function",
    near: float = NEAR_POLE_RADIUS,
) -> ZetaValue:
    """Evaluate ``raw`` at ``s`` with pole bookkeeping.

    Parameters
    ----------
    raw
        the plain evaluator, only ever called at points farther than
        ``near`` from the listed singular points
    poles
        (location, residue) pairs of genuine simple poles close to ``s``
    removable
        locations where the representation used by ``raw`` is singular but
        the function is not
    what
        name used in the PoleError message
    """
    s = complex(s)
    poles = [(complex(loc), complex(res)) for loc, res in poles]
    nearest: Optional[PoleInfo] = None
    for loc, res in poles:
        if abs(s - loc) <= POLE_EXACT * max(1.0, abs(loc)):
            raise PoleError(loc, res, what)
        info = pole_info(s, loc, res)
        if info is not None and (nearest is None or info.distance < nearest.distance):
            nearest = info

    for loc, res in poles:
        if abs(s - loc) < near:

            def deflated(z, loc=loc, res=res):
                inner = raw(z)
                return ZetaValue(
                    inner.value - res / (z - loc),
                    inner.err_estimate,
                    terms_used=inner.terms_used,
                )

            regular = regular_average(deflated, s)
            return ZetaValue(
                res / (s - loc) + regular.value,
                regular.err_estimate,
                nearest_pole=nearest,
                terms_used=regular.terms_used,
            )

    for loc in removable:
        if abs(s - complex(loc)) < near:
            return regular_average(raw, s).with_pole(nearest)

    return raw(s).with_pole(nearest)


def richardson(
    estimates: Sequence, ratio: float, power: float, step: float = 1.0
) -> Tuple[np.ndarray, float]:
    """Extrapolate ``estimates[i]``, computed with step ``h / ratio**i``,
    to zero step size.

    The leading error is assumed proportional to ``h**power`` with the
    following terms increasing by ``step`` in the exponent. Returns the
    extrapolated value and the distance to the best value of the previous
    level as error estimate.
    """
    table = [np.asarray(e, dtype=complex) for e in estimates]
    previous = table
    order = power
    while len(table) > 1:
        factor = ratio ** order
        previous = table
        table = [
            (factor * table[i + 1] - table[i]) / (factor - 1)
            for i in range(len(table) - 1)
        ]
        order += step
    result = table[0]
    return result, float(np.max(np.abs(result - previous[-1])))


def derivative(
    fn: Callable[[complex], Number], s: complex, h: float = 1e-3, levels: int = 3
) -> Tuple[complex, float]:
    """First derivative by central differences and Richardson extrapolation."""
    s = complex(s)
    estimates = []
    errors = []
    for i in range(levels):
        step = h / 2 ** i
        plus, minus = fn(s + step), fn(s - step)
        estimates.append((_value(plus) - _value(minus)) / (2 * step))
        errors.append((_error(plus) + _error(minus)) / (2 * step))
    value, err = richardson(estimates, 2.0, 2.0, 2.0)
    return complex(value), err + max(errors)


def extract_residue(
    fn: Callable[[complex], Number],
    location: complex,
    steps: Sequence[float] = (1e-3, 1e-4, 1e-5, 1e-6),
) -> Tuple[complex, float]:
    """lim (s - location) fn(s) from the right, extrapolated in the step."""
    location = complex(location)
    estimates = [h * _value(fn(location + h)) for h in steps]
    ratio = steps[0] / steps[1]
    value, err = richardson(estimates, ratio, 1.0, 1.0)
    return complex(value), err


def central_difference_weights(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the second-order central stencil for the
    ``order``-th derivative.

    >>> nodes, weights = central_difference_weights(2)
    >>> nodes.tolist(), np.round(weights, 12).tolist()
    ([-1, 0, 1], [1.0, -2.0, 1.0])
    """
    if order < 1:
        raise ValueError(f"derivative order must be positive, got {order}")
    half = order // 2 if order % 2 == 0 else (order + 1) // 2
    nodes = np.arange(-half, half + 1)
    vandermonde = np.vander(nodes, increasing=True).T.astype(float)
    rhs = np.zeros(len(nodes))
    rhs[order] = factorial(order, exact=True)
    return nodes, np.linalg.solve(vandermonde, rhs)


def nth_derivative_at_zero(fn: Callable[[float], np.ndarray], order: int, h: float):
    """Stencil approximation of the ``order``-th derivative of ``fn`` at 0."""
    nodes, weights = central_difference_weights(order)
    total = None
    for k, w in zip(nodes, weights):
        if w == 0:
            continue
        term = w * np.asarray(fn(k * h))
        total = term if total is None else total + term
    return total / h ** order
