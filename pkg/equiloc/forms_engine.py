"""
Complex exterior algebra on a single coordinate chart.

Scalar functions are lazy: a `ScalarField` is a rule that turns a `Sample` (a batch of
chart points) into a `equiloc.jets.Jet`. Differential forms are dictionaries from strictly
increasing coordinate-index tuples to scalar fields, so a `MixedForm` can carry every
degree from 0 to n at once. The operators of the equivariant complex (wedge, d, i_K and
the Cartan Lie derivative) build new lazy forms; nothing is computed until a form is
evaluated on a sample.
"""

import itertools
import logging
import numbers

import numpy as np
import sympy

from . import config
from . import jets
from .errors import ChartMismatchError, ScenarioSchemaError

logger = logging.getLogger(__name__)


def check_same_chart(*objects):
    """Raise `ChartMismatchError` unless every object lives on the same chart."""
    names = {obj.chart.name for obj in objects}
    if len(names) > 1:
        raise ChartMismatchError(f"objects live on different charts: {sorted(names)}")


class Sample:
    """A batch of points of one chart with their coordinate jets.

    Evaluation results are memoised per sample, keyed on the identity of the lazy object
    that produced them, so shared sub-expressions are computed once per batch. A sample is
    meant to be used by one thread; distinct samples share nothing.

    Parameters
    ----------
    chart : `equiloc.geometry.Chart`
        The chart the points belong to.
    points : `numpy.ndarray`
        Real coordinates, shape ``(npoints, chart.dim)`` (a single point is promoted).
    """

    def __init__(self, chart, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != chart.dim:
            raise ChartMismatchError(
                f"points of dimension {points.shape[1]} given for chart {chart.name} of dimension {chart.dim}"
            )
        self.chart = chart
        self.points = points
        self.space = jets.jet_space(chart.dim)
        self.coordinates = [jets.Jet.variable(self.space, points, i) for i in range(chart.dim)]
        self._cache = {}

    @classmethod
    def random(cls, chart, count=config.SAMPLE_POINTS, seed=config.SEED, margin=config.SAMPLE_MARGIN):
        """Uniformly distributed points inside the chart box, away from its excluded set."""
        rng = np.random.default_rng(seed)
        return cls(chart, chart.random_points(rng, count, margin=margin))

    @property
    def npoints(self):
        return self.points.shape[0]

    def constant(self, value):
        return jets.Jet.constant(self.space, self.npoints, value)

    def memo(self, owner, compute):
        """Value of ``compute(self)`` cached against ``owner``.

        The owner is stored alongside the value so its id cannot be recycled while cached.
        """
        hit = self._cache.get(id(owner))
        if hit is not None and hit[0] is owner:
            return hit[1]
        value = compute(self)
        self._cache[id(owner)] = (owner, value)
        return value


def as_sample(chart, sample_or_points):
    """Accept either a `Sample` or raw points of ``chart``."""
    if isinstance(sample_or_points, Sample):
        check_same_chart(sample_or_points, _ChartHolder(chart))
        return sample_or_points
    return Sample(chart, sample_or_points)


class _ChartHolder:
    __slots__ = ("chart",)

    def __init__(self, chart):
        self.chart = chart


class ScalarField:
    """A smooth complex function on a chart, evaluated lazily to jets.

    Parameters
    ----------
    chart : `equiloc.geometry.Chart`
        The chart the field is expressed on.
    rule : callable
        ``rule(sample) -> Jet``. Must be deterministic.
    constant : `complex`, optional
        Set for constant fields, which enables structural zero/one folding.
    label : `str`, optional
        Text used in ``repr``.
    """

    __slots__ = ("chart", "_rule", "constant_value", "label")
    __array_ufunc__ = None

    def __init__(self, chart, rule, constant=None, label=None):
        self.chart = chart
        self._rule = rule
        self.constant_value = constant
        self.label = label

    @classmethod
    def constant(cls, chart, value):
        value = complex(value)
        return cls(chart, lambda sample: sample.constant(value), constant=value, label=f"{value}")

    @classmethod
    def zero(cls, chart):
        return cls.constant(chart, 0.0)

    @classmethod
    def coordinate(cls, chart, i):
        return cls(chart, lambda sample: sample.coordinates[i], label=chart.coordinates[i])

    @classmethod
    def from_expression(cls, chart, text, parameters=None):
        """Compile a sympy-readable expression in the chart coordinates.

        Parameters
        ----------
        chart : `equiloc.geometry.Chart`
            Supplies the coordinate names.
        text : `str` or number
            The expression, e.g. ``"sin(theta)**2"``.
        parameters : `dict`, optional
            Numerical values substituted for named parameters (e.g. ``{"a": 1.0}``).

        Returns
        -------
        field : `ScalarField`
        """
        symbols = sympy.symbols(list(chart.coordinates))
        local_names = {name: symbol for name, symbol in zip(chart.coordinates, symbols)}
        try:
            expr = sympy.sympify(text, locals=local_names)
        except (sympy.SympifyError, SyntaxError, TypeError) as error:
            raise ScenarioSchemaError(f"cannot parse expression {text!r}: {error}") from error
        if parameters:
            expr = expr.subs({sympy.Symbol(name): value for name, value in parameters.items()})
        unknown = expr.free_symbols - set(symbols)
        if unknown:
            raise ScenarioSchemaError(
                f"expression {text!r} uses symbols {sorted(map(str, unknown))} not in chart {chart.name}"
            )
        if expr.is_number:
            return cls.constant(chart, complex(expr))
        function = sympy.lambdify(symbols, expr, modules=[jets.JET_FUNCTIONS, "numpy"])

        def rule(sample):
            return function(*sample.coordinates)

        return cls(chart, rule, label=str(text))

    @property
    def is_constant(self):
        return self.constant_value is not None

    @property
    def is_zero(self):
        return self.constant_value == 0

    def evaluate(self, sample):
        """Jet of the field at every point of ``sample``."""
        if sample.chart.name != self.chart.name:
            raise ChartMismatchError(f"field on {self.chart.name} evaluated on a sample of {sample.chart.name}")
        return sample.memo(self, self._rule)

    def values(self, sample):
        return self.evaluate(sample).value

    def _coerce(self, other):
        if isinstance(other, ScalarField):
            check_same_chart(self, other)
            return other
        if isinstance(other, numbers.Number):
            return ScalarField.constant(self.chart, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.is_constant and other.is_constant:
            return ScalarField.constant(self.chart, self.constant_value + other.constant_value)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        return ScalarField(self.chart, lambda s: self.evaluate(s) + other.evaluate(s))

    __radd__ = __add__

    def __neg__(self):
        if self.is_constant:
            return ScalarField.constant(self.chart, -self.constant_value)
        return ScalarField(self.chart, lambda s: -self.evaluate(s))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.is_constant and other.is_constant:
            return ScalarField.constant(self.chart, self.constant_value * other.constant_value)
        if self.is_zero or other.is_zero:
            return ScalarField.zero(self.chart)
        if self.constant_value == 1:
            return other
        if other.constant_value == 1:
            return self
        if other.is_constant:
            factor = other.constant_value
            return ScalarField(self.chart, lambda s: self.evaluate(s) * factor)
        if self.is_constant:
            factor = self.constant_value
            return ScalarField(self.chart, lambda s: other.evaluate(s) * factor)
        return ScalarField(self.chart, lambda s: self.evaluate(s) * other.evaluate(s))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.is_constant:
            return self * (1 / other.constant_value)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other * self.reciprocal()

    def __pow__(self, exponent):
        if self.is_constant:
            return ScalarField.constant(self.chart, self.constant_value**exponent)
        return ScalarField(self.chart, lambda s: jets.power(self.evaluate(s), exponent))

    def apply(self, function):
        """Field of ``function(jet)`` for a jet-aware elementary ``function``."""
        if self.is_constant:
            return ScalarField.constant(self.chart, function(self.constant_value))
        return ScalarField(self.chart, lambda s: function(self.evaluate(s)))

    def exp(self):
        return self.apply(jets.exp)

    def sin(self):
        return self.apply(jets.sin)

    def cos(self):
        return self.apply(jets.cos)

    def sqrt(self):
        return self.apply(jets.sqrt)

    def reciprocal(self):
        return self.apply(jets.reciprocal)

    def derivative(self, i):
        """Partial derivative along coordinate ``i``."""
        if self.is_constant:
            return ScalarField.zero(self.chart)
        return ScalarField(self.chart, lambda s: self.evaluate(s).derivative(i))

    def __repr__(self):
        return f"ScalarField({self.label or 'lazy'} on {self.chart.name})"


class ComplexVectorField:
    """A complexified vector field ``X + sqrt(-1) Y`` in chart components.

    Parameters
    ----------
    chart : `equiloc.geometry.Chart`
    real : `list` of `ScalarField`
        Components of the real part X.
    imag : `list` of `ScalarField`, optional
        Components of the imaginary part Y. Default: zero.
    """

    def __init__(self, chart, real, imag=None):
        if len(real) != chart.dim or (imag is not None and len(imag) != chart.dim):
            raise ChartMismatchError(f"vector field needs {chart.dim} components on chart {chart.name}")
        self.chart = chart
        self.real = [self._field(c) for c in real]
        self.imag = [self._field(c) for c in imag] if imag is not None else [ScalarField.zero(chart)] * chart.dim
        for field in self.real + self.imag:
            check_same_chart(self, field)

    def _field(self, component):
        if isinstance(component, ScalarField):
            return component
        return ScalarField.constant(self.chart, component)

    @classmethod
    def from_expressions(cls, chart, real, imag=None, parameters=None):
        real = [ScalarField.from_expression(chart, text, parameters) for text in real]
        if imag is not None:
            imag = [ScalarField.from_expression(chart, text, parameters) for text in imag]
        return cls(chart, real, imag)

    @classmethod
    def zero(cls, chart):
        return cls(chart, [ScalarField.zero(chart)] * chart.dim)

    @property
    def dim(self):
        return self.chart.dim

    @property
    def is_real(self):
        return all(c.is_zero for c in self.imag)

    @property
    def is_zero(self):
        return self.is_real and all(c.is_zero for c in self.real)

    def components(self):
        """Complex components ``X^i + sqrt(-1) Y^i``."""
        return [x + 1j * y for x, y in zip(self.real, self.imag)]

    def real_part(self):
        return ComplexVectorField(self.chart, self.real)

    def imag_part(self):
        return ComplexVectorField(self.chart, self.imag)

    def scaled(self, factor):
        """``factor * self`` for a complex number ``factor``."""
        factor = complex(factor)
        real = [factor.real * x - factor.imag * y for x, y in zip(self.real, self.imag)]
        imag = [factor.imag * x + factor.real * y for x, y in zip(self.real, self.imag)]
        return ComplexVectorField(self.chart, real, imag)

    def __add__(self, other):
        check_same_chart(self, other)
        return ComplexVectorField(
            self.chart,
            [a + b for a, b in zip(self.real, other.real)],
            [a + b for a, b in zip(self.imag, other.imag)],
        )

    def apply_to(self, field):
        """Directional derivative ``K(f) = K^i d_i f`` of a scalar field."""
        check_same_chart(self, field)
        return _sum_fields(self.chart, [k * field.derivative(i) for i, k in enumerate(self.components())])

    def __repr__(self):
        return f"ComplexVectorField(on {self.chart.name})"


def _sum_fields(chart, fields):
    total = ScalarField.zero(chart)
    for field in fields:
        total = total + field
    return total


def _is_increasing(key):
    return all(a < b for a, b in zip(key, key[1:]))


class MixedForm:
    """Inhomogeneous complex differential form on one chart.

    Coefficients are stored for strictly increasing index tuples only (``()`` is the
    0-form part); the full antisymmetric tensor is their antisymmetrization. Structurally
    zero coefficients are dropped.

    Parameters
    ----------
    chart : `equiloc.geometry.Chart`
    components : `dict`, optional
        Map from index tuple to `ScalarField` or number.
    """

    def __init__(self, chart, components=None):
        self.chart = chart
        self.components = {}
        for key, coefficient in (components or {}).items():
            key = tuple(key)
            if not _is_increasing(key) or any(not 0 <= i < chart.dim for i in key):
                raise ValueError(f"index tuple {key} is not strictly increasing within dimension {chart.dim}")
            if not isinstance(coefficient, ScalarField):
                coefficient = ScalarField.constant(chart, coefficient)
            check_same_chart(self, coefficient)
            if not coefficient.is_zero:
                self.components[key] = coefficient

    @classmethod
    def zero(cls, chart):
        return cls(chart)

    @classmethod
    def scalar(cls, chart, value):
        """0-form from a `ScalarField` or number."""
        return cls(chart, {(): value})

    @classmethod
    def differential(cls, chart, i):
        """The coordinate 1-form ``dx^i``."""
        return cls(chart, {(i,): 1.0})

    @classmethod
    def from_expressions(cls, chart, expressions, parameters=None):
        """Form from ``{index tuple: expression text}``."""
        return cls(
            chart,
            {key: ScalarField.from_expression(chart, text, parameters) for key, text in expressions.items()},
        )

    @property
    def dim(self):
        return self.chart.dim

    @property
    def degrees(self):
        return sorted({len(key) for key in self.components})

    def coefficient(self, key):
        return self.components.get(tuple(key), ScalarField.zero(self.chart))

    def part(self, degree):
        """Homogeneous component of the given degree."""
        return MixedForm(self.chart, {k: v for k, v in self.components.items() if len(k) == degree})

    def scalar_part(self):
        """The 0-form coefficient as a `ScalarField`."""
        return self.coefficient(())

    def top(self):
        """Coefficient of ``dx^0 ^ ... ^ dx^(n-1)``."""
        return self.coefficient(tuple(range(self.dim)))

    def _coerce(self, other):
        if isinstance(other, MixedForm):
            check_same_chart(self, other)
            return other
        return MixedForm.scalar(self.chart, other)

    def __add__(self, other):
        other = self._coerce(other)
        components = dict(self.components)
        for key, coefficient in other.components.items():
            components[key] = components[key] + coefficient if key in components else coefficient
        return MixedForm(self.chart, components)

    __radd__ = __add__

    def __neg__(self):
        return MixedForm(self.chart, {k: -v for k, v in self.components.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, factor):
        """Multiplication by a number or a `ScalarField` (a 0-form)."""
        if isinstance(factor, MixedForm):
            return wedge(self, factor)
        return MixedForm(self.chart, {k: v * factor for k, v in self.components.items()})

    __rmul__ = __mul__

    def __truediv__(self, factor):
        if isinstance(factor, ScalarField):
            return self * factor.reciprocal()
        return self * (1 / factor)

    def evaluate(self, sample):
        """``{index tuple: Jet}`` for every stored coefficient."""
        return {key: coefficient.evaluate(sample) for key, coefficient in self.components.items()}

    def values(self, sample):
        """``{index tuple: complex values}`` at every point of ``sample``."""
        return {key: coefficient.values(sample) for key, coefficient in self.components.items()}

    def max_norm(self, sample):
        """Largest coefficient modulus over the sample (0 for the zero form)."""
        norms = [np.max(np.abs(values)) for values in self.values(sample).values()]
        return float(max(norms, default=0.0))

    def __repr__(self):
        keys = ", ".join("d" + "".join(map(str, k)) if k else "1" for k in sorted(self.components, key=len))
        return f"MixedForm({keys} on {self.chart.name})"


def _merge_sign(left, right):
    """Sign of the permutation sorting ``left + right`` (disjoint increasing tuples)."""
    inversions = sum(1 for i in left for j in right if i > j)
    return -1 if inversions % 2 else 1


def wedge(a, b):
    """Exterior product of two mixed forms.

    Parameters
    ----------
    a, b : `MixedForm`
        Forms on the same chart.

    Returns
    -------
    product : `MixedForm`
        Degree ``p + q`` parts are the wedges of the degree-p and degree-q parts.
    """
    check_same_chart(a, b)
    components = {}
    for left, f in a.components.items():
        for right, h in b.components.items():
            if set(left) & set(right):
                continue
            key = tuple(sorted(left + right))
            term = f * h if _merge_sign(left, right) > 0 else -(f * h)
            components[key] = components[key] + term if key in components else term
    return MixedForm(a.chart, components)


def exterior_derivative(form):
    """``d`` of a mixed form: ``d(f dx^I) = sum_k d_k f dx^k ^ dx^I``."""
    components = {}
    for key, f in form.components.items():
        for k in range(form.dim):
            if k in key:
                continue
            before = sum(1 for i in key if i < k)
            term = f.derivative(k)
            if term.is_zero:
                continue
            if before % 2:
                term = -term
            new_key = tuple(sorted(key + (k,)))
            components[new_key] = components[new_key] + term if new_key in components else term
    return MixedForm(form.chart, components)


def interior_product(field, form):
    """Contraction of ``field`` into the first slot of ``form``.

    The contraction is complex-bilinear: ``i_{X + sqrt(-1) Y} = i_X + sqrt(-1) i_Y``.
    """
    check_same_chart(field, form)
    vector = field.components()
    components = {}
    for key, f in form.components.items():
        for position, axis in enumerate(key):
            if vector[axis].is_zero:
                continue
            term = vector[axis] * f
            if position % 2:
                term = -term
            new_key = key[:position] + key[position + 1:]
            components[new_key] = components[new_key] + term if new_key in components else term
    return MixedForm(form.chart, components)


def lie_derivative(field, form):
    """Cartan formula ``L_V = d i_V + i_V d``."""
    return exterior_derivative(interior_product(field, form)) + interior_product(field, exterior_derivative(form))


def exp_form(form):
    """Exponential of a mixed form.

    ``exp(u0 + N) = exp(u0) * sum_k N^k / k!`` where N (positive degrees) is nilpotent, so
    the series stops at ``k = dim``.
    """
    u0 = form.scalar_part()
    nilpotent = form - MixedForm.scalar(form.chart, u0)
    series = MixedForm.scalar(form.chart, 1.0)
    power = MixedForm.scalar(form.chart, 1.0)
    factorial = 1.0
    for k in range(1, form.dim + 1):
        power = wedge(power, nilpotent)
        if not power.components:
            break
        factorial *= k
        series = series + power * (1.0 / factorial)
    return series * u0.exp()


def _real_bracket(x, y):
    """Components of ``[x, y]^i = x^j d_j y^i - y^j d_j x^i``."""
    n = len(x)
    chart = x[0].chart
    return [
        _sum_fields(chart, [x[j] * y[i].derivative(j) - y[j] * x[i].derivative(j) for j in range(n)])
        for i in range(n)
    ]


def lie_bracket(a, b):
    """Lie bracket of two complexified vector fields, extended complex-bilinearly."""
    check_same_chart(a, b)
    xx = _real_bracket(a.real, b.real)
    yy = _real_bracket(a.imag, b.imag)
    xy = _real_bracket(a.real, b.imag)
    yx = _real_bracket(a.imag, b.real)
    real = [p - q for p, q in zip(xx, yy)]
    imag = [p + q for p, q in zip(xy, yx)]
    return ComplexVectorField(a.chart, real, imag)


def vector_max_norm(field, sample):
    """Largest component modulus of a complex vector field over the sample."""
    norms = [np.max(np.abs(c.values(sample))) for c in field.components() if not c.is_zero]
    return float(max(norms, default=0.0))


def commutator_residual(x, y, sample):
    """Max modulus of ``[X, Y]`` over the sample; zero for commuting fields."""
    return vector_max_norm(lie_bracket(x, y), sample)


def random_scalar_field(chart, rng, terms=3):
    """A reproducible analytic test function on ``chart``.

    Sums of ``c * sin(k.x + p) * exp(cos(m.x) / 2)`` with small integer wave vectors, so the
    function is periodic along every periodic chart axis of period 2 pi.
    """
    coordinates = [ScalarField.coordinate(chart, i) for i in range(chart.dim)]
    field = ScalarField.constant(chart, complex(rng.normal(), rng.normal()))
    for _ in range(terms):
        k = rng.integers(-2, 3, size=chart.dim)
        m = rng.integers(-2, 3, size=chart.dim)
        phase = rng.uniform(0, 2 * np.pi)
        scale = complex(rng.normal(), rng.normal())
        wave = _sum_fields(chart, [int(ki) * x for ki, x in zip(k, coordinates)]) + phase
        envelope = _sum_fields(chart, [int(mi) * x for mi, x in zip(m, coordinates)])
        field = field + scale * wave.sin() * (envelope.cos() * 0.5).exp()
    return field


def random_mixed_form(chart, rng, degrees=None):
    """A form with a random analytic coefficient on every index tuple of the given degrees."""
    degrees = range(chart.dim + 1) if degrees is None else degrees
    components = {}
    for degree in degrees:
        for key in itertools.combinations(range(chart.dim), degree):
            components[key] = random_scalar_field(chart, rng)
    return MixedForm(chart, components)
