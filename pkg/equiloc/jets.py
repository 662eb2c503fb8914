"""
Truncated multivariate Taylor expansions ("jets") evaluated over a batch of points.

A `Jet` stores, for every point of a batch, the Taylor coefficients c_alpha of a
complex-valued function for all multi-indices ``|alpha| <= order``. Arithmetic is the
truncated Cauchy product, and elementary functions are applied by composing their
derivative stack at the constant term with powers of the nilpotent remainder. Partial
derivatives are read off as ``alpha! * c_alpha``.
"""

import functools
import itertools
import logging
import math

import numpy as np

from .errors import JetOrderError

logger = logging.getLogger(__name__)

# Curvature needs two metric derivatives and the Bianchi residual one more
ORDER = 3


def _multi_indices(nvars, order):
    """All multi-indices in ``nvars`` variables graded by total degree.

    Within a degree the ordering is reverse lexicographic, so the first-degree block is
    ``e_0, e_1, ...`` and the coefficient of ``x_i`` sits at position ``1 + i``.
    """
    indices = []
    for total in range(order + 1):
        block = [
            alpha
            for alpha in itertools.product(range(total + 1), repeat=nvars)
            if sum(alpha) == total
        ]
        indices.extend(sorted(block, reverse=True))
    return indices


class JetSpace:
    """Multi-index bookkeeping shared by every jet in ``nvars`` variables.

    Parameters
    ----------
    nvars : `int`
        Number of chart coordinates.
    order : `int`, optional
        Truncation order. Default: `ORDER`.

    Attributes
    ----------
    multi_indices : `list` of `tuple`
        The coefficient index set, graded by degree.
    size : `int`
        Number of coefficients.
    factorials : `numpy.ndarray`
        ``alpha!`` for every multi-index.
    product_table : `numpy.ndarray`
        ``product_table[k, j]`` is the position of ``alpha_k - alpha_j`` or ``size`` when the
        difference has a negative entry (an extra zero slot).
    """

    def __init__(self, nvars, order=ORDER):
        self.nvars = nvars
        self.order = order
        self.multi_indices = _multi_indices(nvars, order)
        self.index = {alpha: k for k, alpha in enumerate(self.multi_indices)}
        self.size = len(self.multi_indices)
        self.degrees = np.array([sum(alpha) for alpha in self.multi_indices])
        self.factorials = np.array(
            [math.prod(math.factorial(a) for a in alpha) for alpha in self.multi_indices],
            dtype=float,
        )

        table = np.full((self.size, self.size), self.size, dtype=int)
        for k, alpha_k in enumerate(self.multi_indices):
            for j, alpha_j in enumerate(self.multi_indices):
                difference = tuple(a - b for a, b in zip(alpha_k, alpha_j))
                if min(difference, default=0) >= 0:
                    table[k, j] = self.index[difference]
        self.product_table = table

        # d/dx_i maps c_{beta + e_i} * (beta_i + 1) onto beta; the top degree has no source
        self.shift_source = np.full((nvars, self.size), self.size, dtype=int)
        self.shift_scale = np.zeros((nvars, self.size))
        for i in range(nvars):
            for k, beta in enumerate(self.multi_indices):
                if sum(beta) == order:
                    continue
                raised = tuple(b + (1 if axis == i else 0) for axis, b in enumerate(beta))
                self.shift_source[i, k] = self.index[raised]
                self.shift_scale[i, k] = beta[i] + 1

    def unit(self, i):
        """Position of the first-degree coefficient of variable ``i``."""
        return 1 + i

    def __repr__(self):
        return f"JetSpace(nvars={self.nvars}, order={self.order})"


@functools.lru_cache(maxsize=None)
def jet_space(nvars, order=ORDER):
    """Shared `JetSpace` instance for ``nvars`` variables."""
    return JetSpace(nvars, order)


def _extend(coeffs):
    return np.concatenate([coeffs, np.zeros_like(coeffs[:, :1])], axis=1)


def _cauchy(a, b, table):
    """Truncated Cauchy product of two coefficient arrays of shape (npoints, size)."""
    a_ext = _extend(a)
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=complex)
    for j in range(table.shape[1]):
        column = b[:, j]
        if not column.any():
            continue
        out += a_ext[:, table[:, j]] * column[:, None]
    return out


class Jet:
    """Truncated Taylor expansion of a complex function at each point of a batch.

    Parameters
    ----------
    space : `JetSpace`
        Multi-index bookkeeping.
    coeffs : `numpy.ndarray`
        Complex coefficients of shape ``(npoints, space.size)``.
    order : `int`, optional
        Highest degree whose coefficients are exact. Differentiation lowers it by one and
        products keep the smaller order. Default: ``space.order``.
    """

    __slots__ = ("space", "coeffs", "order")
    # numpy scalars must defer to the reflected Jet operators
    __array_ufunc__ = None

    def __init__(self, space, coeffs, order=None):
        self.space = space
        self.coeffs = np.asarray(coeffs, dtype=complex)
        self.order = space.order if order is None else order

    @classmethod
    def constant(cls, space, npoints, value):
        """Jet of a constant (scalar or one value per point)."""
        coeffs = np.zeros((npoints, space.size), dtype=complex)
        coeffs[:, 0] = value
        return cls(space, coeffs)

    @classmethod
    def variable(cls, space, points, i):
        """Jet of the coordinate function ``x_i`` at each row of ``points``."""
        points = np.asarray(points, dtype=float)
        coeffs = np.zeros((points.shape[0], space.size), dtype=complex)
        coeffs[:, 0] = points[:, i]
        coeffs[:, space.unit(i)] = 1.0
        return cls(space, coeffs)

    @property
    def npoints(self):
        return self.coeffs.shape[0]

    @property
    def value(self):
        """Function values, one per point."""
        return self.coeffs[:, 0]

    def partial(self, alpha):
        """Partial derivative ``d^alpha f`` at every point.

        Parameters
        ----------
        alpha : `tuple` of `int`
            Multi-index of the derivative.

        Returns
        -------
        values : `numpy.ndarray`
            Complex values, one per point.
        """
        alpha = tuple(alpha)
        if sum(alpha) > self.order:
            raise JetOrderError(
                f"derivative of total order {sum(alpha)} requested from a jet exact to order {self.order}"
            )
        k = self.space.index[alpha]
        return self.space.factorials[k] * self.coeffs[:, k]

    def derivative(self, i):
        """Jet of ``df/dx_i``, exact to one order less."""
        if self.order == 0:
            raise JetOrderError(f"cannot differentiate a jet exact only to order 0 (variable {i})")
        ext = _extend(self.coeffs)
        coeffs = ext[:, self.space.shift_source[i]] * self.space.shift_scale[i]
        return Jet(self.space, coeffs, self.order - 1)

    def _lift(self, other):
        if isinstance(other, Jet):
            if other.space is not self.space:
                raise ValueError(f"cannot combine jets from {self.space} and {other.space}")
            return other
        return Jet.constant(self.space, self.npoints, other)

    def __add__(self, other):
        if isinstance(other, Jet):
            other = self._lift(other)
            return Jet(self.space, self.coeffs + other.coeffs, min(self.order, other.order))
        coeffs = self.coeffs.copy()
        coeffs[:, 0] += other
        return Jet(self.space, coeffs, self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.coeffs, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            other = self._lift(other)
            coeffs = _cauchy(self.coeffs, other.coeffs, self.space.product_table)
            return Jet(self.space, coeffs, min(self.order, other.order))
        return Jet(self.space, self.coeffs * other, self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * reciprocal(other)
        return Jet(self.space, self.coeffs / other, self.order)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, exponent):
        if isinstance(exponent, Jet):
            return exp(exponent * log(self))
        return power(self, exponent)

    def __rpow__(self, base):
        return exp(self * np.log(complex(base)))

    def __repr__(self):
        return f"Jet(nvars={self.space.nvars}, npoints={self.npoints}, order={self.order})"


def compose(jet, derivatives):
    """Apply a function given by its derivative stack at the constant term.

    Parameters
    ----------
    jet : `Jet`
        The argument.
    derivatives : `list` of `numpy.ndarray`
        ``[f(a0), f'(a0), f''(a0), ...]`` evaluated pointwise, at least ``order + 1`` entries.

    Returns
    -------
    result : `Jet`
        ``sum_k f^(k)(a0) / k! * (a - a0)^k`` truncated at the jet order.
    """
    delta_coeffs = jet.coeffs.copy()
    delta_coeffs[:, 0] = 0.0
    delta = Jet(jet.space, delta_coeffs, jet.order)

    coeffs = np.zeros_like(jet.coeffs)
    coeffs[:, 0] = derivatives[0]
    term = None
    for k in range(1, jet.space.order + 1):
        term = delta if term is None else term * delta
        coeffs += term.coeffs * (derivatives[k] / math.factorial(k))[:, None]
    return Jet(jet.space, coeffs, jet.order)


# Derivative stacks (value, first, second, third) of the elementary functions
def _exp_stack(x):
    value = np.exp(x)
    return [value, value, value, value]


def _log_stack(x):
    return [np.log(x), 1 / x, -1 / x**2, 2 / x**3]


def _sin_stack(x):
    s, c = np.sin(x), np.cos(x)
    return [s, c, -s, -c]


def _cos_stack(x):
    s, c = np.sin(x), np.cos(x)
    return [c, -s, -c, s]


def _reciprocal_stack(x):
    return [1 / x, -1 / x**2, 2 / x**3, -6 / x**4]


def _power_stack(p):
    def stack(x):
        return [
            x**p,
            p * x ** (p - 1),
            p * (p - 1) * x ** (p - 2),
            p * (p - 1) * (p - 2) * x ** (p - 3),
        ]

    return stack


def _elementary(name, stack, numeric):
    def function(x):
        if not isinstance(x, Jet):
            return numeric(x)
        return compose(x, stack(x.value))

    function.__name__ = name
    function.__doc__ = f"Jet-aware ``{name}``; plain numbers fall through to numpy."
    return function


exp = _elementary("exp", _exp_stack, np.exp)
log = _elementary("log", _log_stack, np.log)
sin = _elementary("sin", _sin_stack, np.sin)
cos = _elementary("cos", _cos_stack, np.cos)
reciprocal = _elementary("reciprocal", _reciprocal_stack, lambda x: 1 / x)


def tan(x):
    return sin(x) / cos(x)


def cot(x):
    return cos(x) / sin(x)


def power(x, p):
    """``x**p`` for a jet ``x``; integer exponents use exact repeated products."""
    if not isinstance(x, Jet):
        return np.power(x, p)
    if float(p).is_integer():
        n = int(p)
        if n < 0:
            return reciprocal(power(x, -n))
        result = Jet.constant(x.space, x.npoints, 1.0)
        result.order = x.order
        base = x
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result
    return compose(x, _power_stack(p)(x.value))


def sqrt(x):
    if not isinstance(x, Jet):
        return np.sqrt(x)
    return power(x, 0.5)


# Name table handed to sympy.lambdify when scenario expressions are compiled
JET_FUNCTIONS = {
    "exp": exp,
    "log": log,
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "cot": cot,
    "sqrt": sqrt,
}
