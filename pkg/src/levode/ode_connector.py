"""Numeric continuation of the original system Y' = A(x) Y.

The coefficient matrix stays symbolic; every integrator stage evaluates
the exact rational entries afresh at the requested point.  Integration
uses an adaptive embedded Runge-Kutta 5(4) pair, which is enough because
continuation targets are regular points and the interval excludes poles
by an exact root count before any numerics start.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp

from . import poly
from .symexpr import SymMatrix

METHOD_INFO = {"method": "RK45", "order": 5}

_DENSE_POINTS = 201


class PoleInInterval(ValueError):
    """A coefficient entry has a pole inside the integration interval."""


class StepSizeUnderflow(RuntimeError):
    """The adaptive integrator failed to meet the tolerance."""


@dataclass(frozen=True)
class LinearSystem:
    A: SymMatrix
    domain: tuple[Fraction, Fraction]


def _check_no_poles(A: SymMatrix, lo: Fraction, hi: Fraction) -> None:
    for i, row in enumerate(A.entries):
        for j, entry in enumerate(row):
            den = entry.den
            if poly.degree(den) < 1:
                continue
            if poly.eval_at(den, lo) == 0 or poly.count_roots_in(den, lo, hi) > 0:
                raise PoleInInterval(
                    f"entry ({i + 1},{j + 1}) has a pole in [{lo}, {hi}]"
                )


def linear_system(A: SymMatrix, lo, hi) -> LinearSystem:
    lo, hi = Fraction(lo), Fraction(hi)
    if hi < lo:
        lo, hi = hi, lo
    _check_no_poles(A, lo, hi)
    return LinearSystem(A=A, domain=(lo, hi))


def integrate(
    system: LinearSystem,
    y0,
    x_from,
    x_to,
    rtol: float,
    atol: float,
    dense_path=None,
    max_step=None,
) -> tuple[float, ...]:
    """Value of the solution at x_to; supports decreasing x.

    With dense_path set, writes an evenly spaced (x, components) CSV
    sampled from the integrator's dense output.
    """
    lo = Fraction(min(x_from, x_to))
    hi = Fraction(max(x_from, x_to))
    if lo < system.domain[0] or hi > system.domain[1]:
        raise ValueError(
            f"[{lo}, {hi}] leaves the system domain [{system.domain[0]}, {system.domain[1]}]"
        )
    _check_no_poles(system.A, lo, hi)
    y0 = np.asarray(y0, dtype=float)
    if x_from == x_to:
        if dense_path is not None:
            _write_dense(dense_path, [float(x_from)], [tuple(y0)])
        return tuple(float(v) for v in y0)

    A = system.A

    def rhs(x, y):
        return np.asarray(A.eval_float(x), dtype=float) @ y

    sol = solve_ivp(
        rhs,
        (float(x_from), float(x_to)),
        y0,
        method="RK45",
        rtol=rtol,
        atol=atol,
        dense_output=dense_path is not None,
        max_step=np.inf if max_step is None else max_step,
    )
    if not sol.success:
        raise StepSizeUnderflow(sol.message)
    if dense_path is not None:
        xs = np.linspace(float(x_from), float(x_to), _DENSE_POINTS)
        _write_dense(dense_path, xs, [tuple(sol.sol(x)) for x in xs])
    return tuple(float(v) for v in sol.y[:, -1])


def _write_dense(path, xs, rows) -> None:
    n = len(rows[0]) if rows else 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x"] + [f"y{i + 1}" for i in range(n)])
        for x, row in zip(xs, rows):
            writer.writerow([repr(float(x))] + [repr(float(v)) for v in row])
