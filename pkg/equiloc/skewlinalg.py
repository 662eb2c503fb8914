"""
Pfaffians of complex skew-symmetric matrices and of matrices of even mixed forms.

Both Pfaffians are the signed sum over perfect matchings,

    Pf(A) = sum_M sign(M) prod_{(i, j) in M} A_ij,

which is exact, branch-free, and works unchanged when the entries are commuting even
forms multiplied with the wedge product. Sizes are small (normal bundles of desk-scale
manifolds), so the factorial growth of the matching count is not a concern up to 8.
"""

import functools
import logging

import numpy as np

from .errors import AsymmetryError, DegeneratePfaffianError, OddRankError
from .forms_engine import MixedForm, ScalarField, wedge

logger = logging.getLogger(__name__)

# Largest matrix the matching sum is used for (105 matchings)
MAX_SIZE = 8

# Tolerated |A + A^T| before a matrix is refused as skew
ASYMMETRY_GUARD = 1e-9


def all_pairings(items):
    """Yield every partition of ``items`` into ordered pairs ``(first, later)``."""
    items = list(items)
    if len(items) == 0:
        yield []
        return

    first_item = items.pop(0)
    for i, item in enumerate(items):
        first_pair = (first_item, item)
        for pairing in all_pairings(items[:i] + items[i + 1:]):
            yield [first_pair] + pairing


def _pairing_sign(pairing):
    """Sign of the permutation ``(i1, j1, i2, j2, ...)`` of ``0 .. 2m-1``."""
    flat = [index for pair in pairing for index in pair]
    inversions = sum(1 for a in range(len(flat)) for b in range(a + 1, len(flat)) if flat[a] > flat[b])
    return -1 if inversions % 2 else 1


@functools.lru_cache(maxsize=None)
def perfect_matchings(size):
    """Signed perfect matchings of ``range(size)``.

    Parameters
    ----------
    size : `int`
        Even matrix size.

    Returns
    -------
    matchings : `tuple` of (`int`, `tuple`)
        ``(sign, pairs)`` for each matching; ``size == 0`` gives the single empty matching.
    """
    if size % 2:
        raise OddRankError(f"no perfect matchings of an odd set of size {size}")
    return tuple((_pairing_sign(p), tuple(p)) for p in all_pairings(range(size)))


class SkewMatrix:
    """A complex skew-symmetric matrix of even size.

    Input is skew-symmetrized as ``(A - A^T) / 2`` after checking that ``|A + A^T|`` stays
    below `ASYMMETRY_GUARD`.

    Parameters
    ----------
    entries : array_like
        Square matrix.
    """

    def __init__(self, entries):
        entries = np.asarray(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"a skew matrix must be square, got shape {entries.shape}")
        if entries.shape[0] % 2:
            raise OddRankError(f"Pfaffian of an odd-size ({entries.shape[0]}) matrix is undefined")
        asymmetry = float(np.max(np.abs(entries + entries.T), initial=0.0))
        if asymmetry > ASYMMETRY_GUARD:
            raise AsymmetryError(f"matrix is not skew-symmetric: max |A + A^T| = {asymmetry:.3e}")
        self.entries = 0.5 * (entries - entries.T)

    @property
    def size(self):
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


def pfaffian(matrix):
    """Pfaffian of a complex skew-symmetric matrix (size <= 8).

    Parameters
    ----------
    matrix : `SkewMatrix` or array_like
        Validated through `SkewMatrix` when given as an array.

    Returns
    -------
    value : `complex`
        Satisfies ``Pf(A)**2 == det(A)``; the empty matrix gives 1.
    """
    if not isinstance(matrix, SkewMatrix):
        matrix = SkewMatrix(matrix)
    return complex(pfaffian_batch(matrix.entries[None])[0])


def pfaffian_batch(stack):
    """Pfaffians of a stack of skew matrices, shape ``(npoints, 2m, 2m)``.

    The stack is trusted to be skew; use `SkewMatrix` to validate single matrices.
    """
    stack = np.asarray(stack, dtype=complex)
    size = stack.shape[-1]
    if size > MAX_SIZE:
        raise ValueError(f"matching-sum Pfaffian limited to size {MAX_SIZE}, got {size}")
    total = np.zeros(stack.shape[:-2], dtype=complex)
    for sign, pairs in perfect_matchings(size):
        term = np.full(stack.shape[:-2], float(sign), dtype=complex)
        for i, j in pairs:
            term = term * stack[..., i, j]
        total += term
    return total


def pfaffian_of_form_matrix(matrix, normalization=1.0, chart=None):
    """Pfaffian of a skew matrix whose entries are even mixed forms.

    Parameters
    ----------
    matrix : `list` of `list` of `equiloc.forms_engine.MixedForm`
        Entries of degrees 0 and 2 (more generally even), skew-adjoint entrywise.
    normalization : `float`, optional
        Every pair factor is divided by it, so the result carries ``normalization**-m``.
    chart : `equiloc.geometry.Chart`, optional
        Needed only for the empty matrix, whose Pfaffian is the constant 1.

    Returns
    -------
    pf : `equiloc.forms_engine.MixedForm`
        The matching sum with products replaced by wedges.
    """
    size = len(matrix)
    if size % 2:
        raise OddRankError(f"Pfaffian of an odd-rank ({size}) form matrix is undefined")
    if size == 0:
        if chart is None:
            raise ValueError("the Pfaffian of an empty form matrix needs its chart")
        return MixedForm.scalar(chart, 1.0)
    chart = matrix[0][1].chart
    total = MixedForm.zero(chart)
    for sign, pairs in perfect_matchings(size):
        term = MixedForm.scalar(chart, float(sign))
        for i, j in pairs:
            term = wedge(term, matrix[i][j] * (1.0 / normalization))
            if not term.components:
                break
        total = total + term
    return total


def _guarded_reciprocal(field, tolerance):
    def rule(sample):
        jet = field.evaluate(sample)
        smallest = float(np.min(np.abs(jet.value)))
        if smallest < tolerance:
            raise DegeneratePfaffianError(
                f"0-form part of the denominator vanishes (min modulus {smallest:.3e}) on chart {field.chart.name}"
            )
        return 1 / jet

    return ScalarField(field.chart, rule)


def inverse_of_mixed_form(form, tolerance=1e-12):
    """Multiplicative inverse of a mixed form with invertible 0-form part.

    ``u = u0 (1 + N)`` with N nilpotent, so ``u^-1 = u0^-1 sum_k (-N)^k`` stops at ``k = dim``.

    Raises
    ------
    DegeneratePfaffianError
        When evaluated where ``|u0| < tolerance``.
    """
    chart = form.chart
    u0 = form.scalar_part()
    if u0.is_zero:
        raise DegeneratePfaffianError(f"mixed form on {chart.name} has no 0-form part to invert")
    if u0.is_constant:
        inverse_u0 = ScalarField.constant(chart, 1 / u0.constant_value)
    else:
        inverse_u0 = _guarded_reciprocal(u0, tolerance)
    ratio = -(form - MixedForm.scalar(chart, u0)) * inverse_u0
    series = MixedForm.scalar(chart, 1.0)
    power = MixedForm.scalar(chart, 1.0)
    for _ in range(chart.dim):
        power = wedge(power, ratio)
        if not power.components:
            break
        series = series + power
    return series * inverse_u0
