"""Rigorous bounds for the committed error and the asymptotic deviation.

The reduction commits errors in stages: the input remainder E_1, then one
truncation matrix per iteration.  Each stage's contribution reaches the
final system conjugated by accumulated factors (I + P_1)...(I + P_j) and
their inverse.  ``total_error_bound`` turns the stored symbolic matrices
into a single number using half-line sup bounds and the max-entry norm.
The norm costs a factor n per matrix product, so inverses are bounded via
the identity inverse(I + P) = I - P*inverse(I + P) rather than by norm
products, which keeps every correction factor at 1 + O(n*norm) instead of
n**2 per stage.

``eta_bound`` bounds the deviation eta of the asymptotic solutions from
the unit coordinate vectors: with I >= integral over [X, inf) of
|rho|*norm(R_M), the bound is I/(1 - n*I).  The integral is bounded in
closed form by C*X**(1-w)/(w-1) where every entry of rho*R_M is O(t**-w)
and C bounds sup |entry|*t**w.

All inputs are exact; both functions evaluate exactly and round only on
return.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .symexpr import RationalFn, SymMatrix, sup_bound


class ContractionFailure(ValueError):
    """A norm that the bound needs below 1/n is too large; X is too small."""


class DivergentIntegral(ValueError):
    """The error integral over [X, infinity) does not converge."""


@dataclass(frozen=True)
class LedgerEntry:
    """Error committed at a stage, without its implicit inverse factor.

    stage 1 is the input remainder; stage j >= 2 holds the truncation
    terms of iteration j - 1, whose left factor inverse(I + P_{j-1}) is
    kept implicit and bounded numerically here.
    """

    stage: int
    matrix: SymMatrix
    via_iteration: int | None


@dataclass(frozen=True)
class ErrorLedger:
    entries: tuple[LedgerEntry, ...]
    p_matrices: tuple[SymMatrix, ...]
    X: Fraction
    n: int


def matrix_norm_bound(mat: SymMatrix, X) -> Fraction:
    """Upper bound for the max-entry norm of mat on [X, infinity)."""
    best = Fraction(0)
    for row in mat.entries:
        for e in row:
            if not e.is_zero:
                best = max(best, sup_bound(e, X))
    return best


def _inverse_deviation(p: Fraction, n: int, what: str) -> Fraction:
    """Bound for norm(inverse(I+P) - I) given p >= norm(P)."""
    if n * p >= 1:
        raise ContractionFailure(
            f"n*norm({what}) = {float(n * p):.3g} >= 1; "
            "move the evaluation point X outward"
        )
    return n * p * (1 + p / (1 - n * p))


def total_error_bound(ledger: ErrorLedger) -> float:
    """Bound for the max-entry norm of the total committed error on [X, inf).

    Each stage contributes alpha * norm(E_j) * (1 + n*s) * (1 + n*D(s)),
    where s bounds the accumulated product norm(P_1 ... up to stage),
    D(s) bounds the deviation of its inverse from I, and alpha covers the
    single implicit inverse factor carried by truncation entries.
    """
    n, X = ledger.n, ledger.X
    identity = SymMatrix.identity(n)
    prefix_norms: list[Fraction] = []
    single_norms: list[Fraction] = []
    acc = identity
    for P in ledger.p_matrices:
        acc = acc * (identity + P)
        prefix_norms.append(matrix_norm_bound(acc - identity, X))
        single_norms.append(matrix_norm_bound(P, X))

    total = Fraction(0)
    for entry in ledger.entries:
        e_norm = matrix_norm_bound(entry.matrix, X)
        if e_norm == 0:
            continue
        cap = min(entry.stage, len(prefix_norms))
        s = prefix_norms[cap - 1] if cap >= 1 else Fraction(0)
        dev = _inverse_deviation(s, n, f"accumulated transform at stage {entry.stage}")
        alpha = Fraction(1)
        if entry.via_iteration is not None:
            q = single_norms[entry.via_iteration - 1]
            alpha = 1 + n * _inverse_deviation(q, n, f"P_{entry.via_iteration}")
        total += alpha * e_norm * (1 + n * s) * (1 + n * dev)
    return float(total)


def eta_bound(R_M: SymMatrix, spec, X=None) -> float:
    """Bound for the Levinson deviation eta from the final residual R_M.

    Requires the accuracy exponent to beat the rho weight: M*a > p_rho + 1,
    otherwise the defining integral diverges.
    """
    X = Fraction(spec.X if X is None else X)
    if spec.M * spec.a <= spec.rho.exponent + 1:
        raise DivergentIntegral(
            f"M*a = {spec.M * spec.a} must exceed p_rho + 1 = {spec.rho.exponent + 1}"
        )
    weighted = spec.rho_fn * R_M
    lo = weighted.max_leading_order()
    if lo is None:
        return 0.0
    w = -lo
    if w <= 1:
        raise DivergentIntegral(
            f"rho * R_M decays like x^{lo}; the integral over [{X}, inf) diverges"
        )
    integral = integral_tail_bound_from_weight(weighted, w, X)
    if spec.n * integral >= 1:
        raise ContractionFailure(
            f"n * integral = {float(spec.n * integral):.3g} >= 1; "
            "move the evaluation point X outward"
        )
    return float(integral / (1 - spec.n * integral))


def integral_tail_bound(f: RationalFn, X) -> Fraction:
    """Exact-rational bound for integral of |f| over [X, infinity)."""
    if f.is_zero:
        return Fraction(0)
    lo = f.leading_order()
    if lo >= -1:
        raise DivergentIntegral(f"integrand decays like x^{lo}; integral diverges")
    X = Fraction(X)
    w = -lo
    C = sup_bound(f * RationalFn.x_power(w), X)
    return C * X ** (1 - w) / (w - 1)


def integral_tail_bound_from_weight(mat: SymMatrix, w: int, X: Fraction) -> Fraction:
    """Bound integral of the max-entry norm of mat, all entries O(x**-w)."""
    xw = RationalFn.x_power(w)
    C = Fraction(0)
    for row in mat.entries:
        for e in row:
            if not e.is_zero:
                C = max(C, sup_bound(e * xw, X))
    return C * X ** (1 - w) / (w - 1)
