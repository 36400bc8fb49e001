"""Random well-posed problems for property tests.

Small diagonal entries are drawn from {-3/8, ..., 3/8}, so any pairwise
difference stays below 1; with integer decay steps a >= 1 every
elimination denominator d_j - d_i - s (s >= a) is nonzero, which keeps
inverse-x sampling resonance-free by construction.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .symexpr import RationalFn, SymMatrix
from .system_model import (
    INVERSE_X,
    STANDARD,
    Monomial,
    ProblemSpec,
    validate,
)

_SMALL_POOL = [Fraction(k, 8) for k in range(-3, 4)]
_LARGE_POOL = [Fraction(1), Fraction(2), Fraction(1, 2), Fraction(-1), Fraction(3, 2)]
_COEFFS = [Fraction(1), Fraction(-1), Fraction(2), Fraction(-2), Fraction(3),
           Fraction(1, 2), Fraction(-3, 2)]


def _random_matrix(
    rng: random.Random,
    n: int,
    max_exponent: int,
    density: float,
    zero_diagonal: bool,
    force_off_diagonal: bool,
) -> SymMatrix:
    zero = RationalFn.const(0)
    rows = [[zero] * n for _ in range(n)]
    placed = False
    for i in range(n):
        for j in range(n):
            if zero_diagonal and i == j:
                continue
            if rng.random() < density:
                c = rng.choice(_COEFFS)
                e = max_exponent + rng.choice((0, 1, 2))
                rows[i][j] = RationalFn.monomial(c, -e)
                if i != j:
                    placed = True
    if force_off_diagonal and not placed and n >= 2:
        i = rng.randrange(n)
        j = rng.choice([t for t in range(n) if t != i])
        rows[i][j] = RationalFn.monomial(rng.choice(_COEFFS), -max_exponent)
    return SymMatrix(tuple(map(tuple, rows)))


def random_problem(rng: random.Random) -> ProblemSpec:
    n = rng.choice((2, 3, 4))
    N = rng.choice((0, 1))
    a = rng.choice((1, 2, 3))
    M = rng.choice((2, 3, 4))
    mode = rng.choice((STANDARD, INVERSE_X))

    d_large = tuple(rng.sample(_LARGE_POOL, N))
    d_small = tuple(rng.sample(_SMALL_POOL, n - N))

    if mode == INVERSE_X:
        K = 0
        rho = Monomial(Fraction(1), -1)
    else:
        K = rng.choice((1, 2))
        rho = Monomial(rng.choice((Fraction(1), Fraction(2), Fraction(1, 2))),
                       K * a - 1 + rng.choice((0, 1)))
    L = rng.choice((1, 2))
    lam = Monomial(rng.choice((Fraction(1), Fraction(2), Fraction(1, 2), Fraction(3))),
                   L * a + rng.choice((0, 1)))

    phi1_large = []
    for _ in range(N):
        entry = RationalFn.const(rng.choice((Fraction(1), Fraction(-1), Fraction(2))))
        if rng.random() < 0.5:
            entry = entry + RationalFn.monomial(
                rng.choice(_COEFFS), -a * rng.choice((1, 2))
            )
        phi1_large.append(entry)
    phi1_small = []
    for _ in range(n - N):
        if rng.random() < 0.5:
            phi1_small.append(
                RationalFn.monomial(rng.choice(_COEFFS), -(a + rng.choice((0, 1))))
            )
        else:
            phi1_small.append(RationalFn.const(0))

    ladder = []
    for j in range(1, M):
        if j == 1 or rng.random() < 0.6:
            mat = _random_matrix(
                rng,
                n,
                max_exponent=j * a,
                density=0.4,
                zero_diagonal=(j == 1),
                force_off_diagonal=(j == 1),
            )
            if not mat.is_zero:
                ladder.append((j, mat))

    zero = RationalFn.const(0)
    e1_rows = [[zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            roll = rng.random()
            if roll < 0.2:
                e1_rows[i][j] = RationalFn.monomial(
                    rng.choice(_COEFFS), -(M * a + rng.choice((0, 1, 2)))
                )
            elif roll < 0.3:
                # a non-Laurent remainder entry, still inside accuracy
                e1_rows[i][j] = RationalFn.monomial(rng.choice(_COEFFS), -M * a) / (
                    RationalFn.x_power(1) + RationalFn.const(1)
                )
    E1 = SymMatrix(tuple(map(tuple, e1_rows)))

    spec = ProblemSpec(
        n=n,
        N=N,
        d_large=d_large,
        d_small=d_small,
        rho=rho,
        lam=lam,
        phi1_large=tuple(phi1_large),
        phi1_small=tuple(phi1_small),
        ladder=tuple(ladder),
        E1=E1,
        a=Fraction(a),
        K=K,
        L=L,
        M=M,
        mode=mode,
        X=Fraction(rng.choice((5, 10))),
    )
    return validate(spec)
