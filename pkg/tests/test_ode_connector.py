from __future__ import annotations

import csv
import math
from fractions import Fraction

import pytest

from levode import (
    PoleInInterval,
    RationalFn,
    StepSizeUnderflow,
    SymMatrix,
    integrate,
    linear_system,
)
from levode.fixtures import hypergeometric_companion
from levode.ode_connector import METHOD_INFO, LinearSystem


def const_matrix(rows):
    return SymMatrix([[RationalFn.const(v) for v in row] for row in rows])


def test_method_info_names_the_integrator():
    assert METHOD_INFO["method"] == "RK45"
    assert METHOD_INFO["order"] == 5


def test_equal_endpoints_return_input():
    system = linear_system(const_matrix([[0, 1], [-1, 0]]), Fraction(0), Fraction(5))
    y = integrate(system, (3.0, 4.0), 2.0, 2.0, rtol=1e-10, atol=1e-12)
    assert y == (3.0, 4.0)


def test_polynomial_solution_is_propagated_exactly():
    # y = x solves the underlying third-order equation, so Y = (x, 1, 0)
    # should ride through the companion system untouched
    system = linear_system(hypergeometric_companion(), Fraction(1), Fraction(10))
    y = integrate(system, (10.0, 1.0, 0.0), 10.0, 5.0, rtol=1e-10, atol=1e-12)
    assert y[0] == pytest.approx(5.0, abs=1e-9)
    assert y[1] == pytest.approx(1.0, abs=1e-9)
    assert y[2] == pytest.approx(0.0, abs=1e-9)


def test_propagation_is_linear():
    system = linear_system(hypergeometric_companion(), Fraction(1), Fraction(10))
    a = integrate(system, (1.0, 0.0, 0.0), 10.0, 5.0, rtol=1e-10, atol=1e-12)
    b = integrate(system, (0.0, 1.0, 0.0), 10.0, 5.0, rtol=1e-10, atol=1e-12)
    both = integrate(system, (2.0, 3.0, 0.0), 10.0, 5.0, rtol=1e-10, atol=1e-12)
    scale = max(abs(v) for v in both)
    for i in range(3):
        assert both[i] == pytest.approx(2 * a[i] + 3 * b[i],
                                        abs=10 * 1e-10 * scale)


def test_fifth_order_convergence():
    # one full circle; with tolerances slack the capped step controls
    # the error, which must shrink like h^5 (ratio 32 for halving)
    system = linear_system(const_matrix([[0, 1], [-1, 0]]), Fraction(0), Fraction(7))
    end = 2 * math.pi
    errors = []
    for h in (0.2, 0.1):
        y = integrate(system, (1.0, 0.0), 0.0, end,
                      rtol=1e6, atol=1e6, max_step=h)
        errors.append(max(abs(y[0] - 1.0), abs(y[1])))
    assert errors[0] / errors[1] >= 16.0


def test_pole_rejected_at_construction():
    A = SymMatrix([[RationalFn.parse("(1)/(x - 5)")]])
    with pytest.raises(PoleInInterval, match="entry"):
        linear_system(A, Fraction(0), Fraction(10))


def test_pole_rejected_when_integrating():
    # the system object can be built on a safe domain statement, but the
    # integrator re-screens the actual interval
    A = SymMatrix([[RationalFn.parse("(1)/(x - 5)")]])
    system = LinearSystem(A, (Fraction(0), Fraction(10)))
    with pytest.raises(PoleInInterval):
        integrate(system, (1.0,), 0.0, 10.0, rtol=1e-8, atol=1e-10)


def test_interval_outside_domain_rejected():
    system = linear_system(const_matrix([[0]]), Fraction(0), Fraction(5))
    with pytest.raises(ValueError, match="domain"):
        integrate(system, (1.0,), 0.0, 6.0, rtol=1e-8, atol=1e-10)


def test_runaway_growth_reported():
    # y' = 1e5 y over [0, 100] overflows any double long before the end
    system = linear_system(const_matrix([[100000]]), Fraction(0), Fraction(100))
    with pytest.raises(StepSizeUnderflow):
        integrate(system, (1.0,), 0.0, 100.0, rtol=1e-10, atol=1e-12)


def test_dense_output_file(tmp_path):
    system = linear_system(const_matrix([[0, 1], [-1, 0]]), Fraction(0), Fraction(7))
    path = tmp_path / "trace.csv"
    y = integrate(system, (1.0, 0.0), 0.0, 2.0, rtol=1e-10, atol=1e-12,
                  dense_path=str(path))
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "y1", "y2"]
    assert len(rows) == 202
    assert float(rows[1][0]) == 0.0
    assert float(rows[-1][0]) == 2.0
    assert float(rows[-1][1]) == pytest.approx(y[0], rel=1e-12)
    assert float(rows[-1][2]) == pytest.approx(y[1], rel=1e-12)
    # the trace should actually follow the cosine
    mid = rows[101]
    assert float(mid[1]) == pytest.approx(math.cos(float(mid[0])), abs=1e-8)


def test_dense_output_for_empty_interval(tmp_path):
    system = linear_system(const_matrix([[0]]), Fraction(0), Fraction(5))
    path = tmp_path / "point.csv"
    integrate(system, (2.5,), 1.0, 1.0, rtol=1e-8, atol=1e-10,
              dense_path=str(path))
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows == [["x", "y1"], ["1.0", "2.5"]]
