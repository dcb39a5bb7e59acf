"""Pure scalar fields over a chart.

A field wraps a small expression graph.  Nodes evaluate vectorized over
arrays of chart coordinates, either in float64 or in multiprecision
(gmpy2 object arrays), and differentiate symbolically.  Opaque leaves
(quadratures, splines, inverse maps) plug in through `Leaf`.
"""
import math
import operator
from functools import reduce

import numpy as np
import gmpy2

AXES = ("x2", "x3", "v", "chi")
ALL_AXES = frozenset(AXES)
VARIABLES = ("x1", "x2", "x3", "v", "y5", "chi")


# ---------------------------------------------------------------- backends

class FloatBackend:
    name = "double"

    def asarray(self, x):
        return np.asarray(x, dtype=float)

    def to_float(self, x):
        return np.asarray(x, dtype=float)

    def const(self, c):
        return float(c)

    @property
    def pi(self):
        return math.pi

    def context(self):
        return _NullContext()

    exp = staticmethod(np.exp)
    log = staticmethod(np.log)
    sin = staticmethod(np.sin)
    cos = staticmethod(np.cos)
    tan = staticmethod(np.tan)
    atan = staticmethod(np.arctan)
    sqrt = staticmethod(np.sqrt)
    abs = staticmethod(np.abs)
    sinh = staticmethod(np.sinh)
    cosh = staticmethod(np.cosh)
    tanh = staticmethod(np.tanh)
    sign = staticmethod(np.sign)

    @staticmethod
    def sech(x):
        return 1.0 / np.cosh(x)

    @staticmethod
    def pow(a, b):
        return np.power(a, b)


class _NullContext:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def _ufunc(f):
    return np.frompyfunc(f, 1, 1)


class MPBackend:
    """gmpy2 mpfr object arrays; used for convergence measurements."""

    name = "mp"

    def __init__(self, bits=128):
        self.bits = int(bits)
        self._mpfr = _ufunc(gmpy2.mpfr)
        self._float = _ufunc(float)
        self.exp = _ufunc(gmpy2.exp)
        self.log = _ufunc(gmpy2.log)
        self.sin = _ufunc(gmpy2.sin)
        self.cos = _ufunc(gmpy2.cos)
        self.tan = _ufunc(gmpy2.tan)
        self.atan = _ufunc(gmpy2.atan)
        self.sqrt = _ufunc(gmpy2.sqrt)
        self.abs = _ufunc(abs)
        self.sinh = _ufunc(gmpy2.sinh)
        self.cosh = _ufunc(gmpy2.cosh)
        self.tanh = _ufunc(gmpy2.tanh)
        self.sech = _ufunc(gmpy2.sech)
        self.sign = _ufunc(lambda x: gmpy2.mpfr((x > 0) - (x < 0)))

    def context(self):
        return gmpy2.context(gmpy2.get_context(), precision=self.bits)

    def asarray(self, x):
        a = np.asarray(x)
        if a.dtype == object:
            return a
        return np.asarray(self._mpfr(a.astype(float)), dtype=object)

    def to_float(self, x):
        a = np.asarray(x)
        if a.dtype == object:
            return np.asarray(self._float(a), dtype=float)
        return a.astype(float)

    def const(self, c):
        return gmpy2.mpfr(c)

    @property
    def pi(self):
        return gmpy2.const_pi()

    @staticmethod
    def pow(a, b):
        return a ** b


DOUBLE = FloatBackend()


# ---------------------------------------------------------------- nodes

class Node:
    """Immutable expression node.  Subclasses implement _ev and _d."""

    free = frozenset()
    rough = False  # True if finite differences across this node are unreliable

    def ev(self, env, bk, memo):
        key = id(self)
        if key in memo:
            return memo[key]
        val = self._ev(env, bk, memo)
        memo[key] = val
        return val

    def d(self, axis):
        if axis not in self.free:
            return ZERO
        cache = self.__dict__.setdefault("_dcache", {})
        if axis not in cache:
            cache[axis] = self._d(axis)
        return cache[axis]

    def subs(self, name, value):
        if name not in self.free:
            return self
        return self._subs(name, value)

    def _subs(self, name, value):
        return Pinned(self, name, value)

    def is_const(self):
        return isinstance(self, Const)


class Const(Node):
    def __init__(self, value):
        self.value = float(value)

    def _ev(self, env, bk, memo):
        return bk.const(self.value)

    def __repr__(self):
        return repr(self.value)


ZERO = Const(0.0)
ONE = Const(1.0)


class Pi(Node):
    def _ev(self, env, bk, memo):
        return bk.pi

    def __repr__(self):
        return "pi"


class Var(Node):
    def __init__(self, name):
        if name not in VARIABLES:
            raise ValueError(f"unknown coordinate {name!r}")
        self.name = name
        self.free = frozenset([name])

    def _ev(self, env, bk, memo):
        return env[self.name]

    def _d(self, axis):
        return ONE

    def _subs(self, name, value):
        return Const(value)

    def __repr__(self):
        return self.name


class Add(Node):
    def __init__(self, terms):
        self.terms = tuple(terms)
        self.free = frozenset().union(*(t.free for t in self.terms))
        self.rough = any(t.rough for t in self.terms)

    def _ev(self, env, bk, memo):
        return reduce(operator.add, (t.ev(env, bk, memo) for t in self.terms))

    def _d(self, axis):
        return add(*(t.d(axis) for t in self.terms))

    def _subs(self, name, value):
        return add(*(t.subs(name, value) for t in self.terms))

    def __repr__(self):
        return "(" + " + ".join(map(repr, self.terms)) + ")"


class Mul(Node):
    def __init__(self, factors):
        self.factors = tuple(factors)
        self.free = frozenset().union(*(f.free for f in self.factors))
        self.rough = any(f.rough for f in self.factors)

    def _ev(self, env, bk, memo):
        return reduce(operator.mul, (f.ev(env, bk, memo) for f in self.factors))

    def _d(self, axis):
        out = []
        fs = self.factors
        for i, f in enumerate(fs):
            df = f.d(axis)
            if df is ZERO:
                continue
            out.append(mul(*(fs[:i] + (df,) + fs[i + 1:])))
        return add(*out)

    def _subs(self, name, value):
        return mul(*(f.subs(name, value) for f in self.factors))

    def __repr__(self):
        return "(" + "*".join(map(repr, self.factors)) + ")"


class Pow(Node):
    def __init__(self, base, expo):
        self.base, self.expo = base, expo
        self.free = base.free | expo.free
        self.rough = base.rough or expo.rough

    def _ev(self, env, bk, memo):
        b = self.base.ev(env, bk, memo)
        e = self.expo
        if isinstance(e, Const) and e.value.is_integer() and abs(e.value) <= 8:
            n = int(e.value)
            if n > 0:
                return reduce(operator.mul, [b] * n)
            if n < 0:
                return 1 / reduce(operator.mul, [b] * (-n))
        return bk.pow(b, e.ev(env, bk, memo))

    def _d(self, axis):
        b, e = self.base, self.expo
        if isinstance(e, Const):
            return mul(e, power(b, Const(e.value - 1)), b.d(axis))
        return mul(self, add(mul(e.d(axis), func("log", b)),
                             mul(e, b.d(axis), power(b, Const(-1)))))

    def _subs(self, name, value):
        return power(self.base.subs(name, value), self.expo.subs(name, value))

    def __repr__(self):
        return f"({self.base!r})^({self.expo!r})"


def _dfunc(name, a):
    """d name(a)/da as a node in a."""
    if name == "exp":
        return func("exp", a)
    if name == "log":
        return power(a, Const(-1))
    if name == "sin":
        return func("cos", a)
    if name == "cos":
        return neg(func("sin", a))
    if name == "tan":
        return add(ONE, power(func("tan", a), Const(2)))
    if name == "atan":
        return power(add(ONE, power(a, Const(2))), Const(-1))
    if name == "sqrt":
        return mul(Const(0.5), power(func("sqrt", a), Const(-1)))
    if name == "abs":
        return func("sign", a)
    if name == "sinh":
        return func("cosh", a)
    if name == "cosh":
        return func("sinh", a)
    if name == "tanh":
        return power(func("sech", a), Const(2))
    if name == "sech":
        return neg(mul(func("sech", a), func("tanh", a)))
    if name == "sign":
        return ZERO
    raise KeyError(name)


FUNCTIONS = ("exp", "log", "sin", "cos", "tan", "atan", "sqrt", "abs",
             "sinh", "cosh", "tanh", "sech", "sign")

_FOLD = {"exp": math.exp, "log": math.log, "sin": math.sin, "cos": math.cos,
         "tan": math.tan, "atan": math.atan, "sqrt": math.sqrt, "abs": abs,
         "sinh": math.sinh, "cosh": math.cosh, "tanh": math.tanh,
         "sech": lambda x: 1.0 / math.cosh(x),
         "sign": lambda x: float((x > 0) - (x < 0))}


class Func(Node):
    def __init__(self, name, arg):
        if name not in FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        self.name, self.arg = name, arg
        self.free = arg.free
        self.rough = arg.rough

    def _ev(self, env, bk, memo):
        return getattr(bk, self.name)(self.arg.ev(env, bk, memo))

    def _d(self, axis):
        return mul(_dfunc(self.name, self.arg), self.arg.d(axis))

    def _subs(self, name, value):
        return func(self.name, self.arg.subs(name, value))

    def __repr__(self):
        return f"{self.name}({self.arg!r})"


class Leaf(Node):
    """Opaque leaf.  Subclasses set `free`, `rough` and implement
    `compute(env, bk)` and `_d(axis)`."""

    label = "leaf"

    def _ev(self, env, bk, memo):
        return self.compute(env, bk)

    def __repr__(self):
        return f"<{self.label}>"


class Pinned(Node):
    """Child evaluated with one coordinate frozen to a constant."""

    def __init__(self, child, name, value):
        self.child, self.name, self.value = child, name, float(value)
        self.free = child.free - {name}
        self.rough = child.rough

    def _ev(self, env, bk, memo):
        env2 = dict(env)
        ref = next(iter(env.values()))
        env2[self.name] = ref * 0 + bk.const(self.value)
        return self.child.ev(env2, bk, {})

    def _d(self, axis):
        return Pinned(self.child.d(axis), self.name, self.value)

    def __repr__(self):
        return f"{self.child!r}|{self.name}={self.value}"


# ---------------------------------------------------------------- smart constructors

def _node(x):
    if isinstance(x, Node):
        return x
    if isinstance(x, ScalarField):
        return x.node
    if float(x) == 0.0:
        return ZERO
    return Const(x)


def add(*terms):
    flat, c = [], 0.0
    for t in map(_node, terms):
        if isinstance(t, Add):
            for s in t.terms:
                if isinstance(s, Const):
                    c += s.value
                else:
                    flat.append(s)
        elif isinstance(t, Const):
            c += t.value
        else:
            flat.append(t)
    if c != 0.0 or not flat:
        flat.append(Const(c))
    return flat[0] if len(flat) == 1 else Add(flat)


def mul(*factors):
    flat, c = [], 1.0
    for f in map(_node, factors):
        if isinstance(f, Mul):
            parts = f.factors
        else:
            parts = (f,)
        for p in parts:
            if isinstance(p, Const):
                c *= p.value
            else:
                flat.append(p)
    if c == 0.0:
        return ZERO
    if c != 1.0 or not flat:
        flat.insert(0, Const(c))
    return flat[0] if len(flat) == 1 else Mul(flat)


def neg(a):
    return mul(Const(-1.0), a)


def power(base, expo):
    base, expo = _node(base), _node(expo)
    if isinstance(expo, Const):
        if expo.value == 0.0:
            return ONE
        if expo.value == 1.0:
            return base
        if isinstance(base, Const):
            try:
                return Const(base.value ** expo.value)
            except (OverflowError, ZeroDivisionError):
                pass
        if isinstance(base, Pow) and isinstance(base.expo, Const) and expo.value.is_integer():
            return power(base.base, Const(base.expo.value * expo.value))
    return Pow(base, expo)


def func(name, arg):
    arg = _node(arg)
    if isinstance(arg, Const):
        try:
            return Const(_FOLD[name](arg.value))
        except (ValueError, OverflowError):
            pass
    return Func(name, arg)


# ---------------------------------------------------------------- ChartPoint

class ChartPoint:
    """A point (or a batch of points) of the chart.

    Coordinates may be scalars or equally shaped arrays.  Immutable.
    """

    __slots__ = ("x1", "x2", "x3", "v", "y5", "chi")

    def __init__(self, x1=0.0, x2=0.0, x3=0.0, v=0.0, y5=0.0, chi=0.0):
        vals = dict(x1=x1, x2=x2, x3=x3, v=v, y5=y5, chi=chi)
        arrs = {k: np.asarray(a) for k, a in vals.items()}
        shape = np.broadcast_shapes(*(a.shape for a in arrs.values()))
        for k, a in arrs.items():
            a = np.broadcast_to(a, shape)
            if a.dtype != object:
                a = a.astype(float)
            if a.dtype != object and np.any(a[...] < 0) and k == "chi":
                raise ValueError("chi must be >= 0")
            a = np.array(a, copy=True)
            a.setflags(write=False)
            object.__setattr__(self, k, a)

    def __setattr__(self, k, v):
        raise AttributeError("ChartPoint is immutable")

    @property
    def shape(self):
        return self.x2.shape

    @property
    def size(self):
        return self.x2.size

    def coords(self):
        return {k: getattr(self, k) for k in VARIABLES}

    def replace(self, **kw):
        c = self.coords()
        c.update(kw)
        return ChartPoint(**c)

    def shifted(self, axis, delta):
        return self.replace(**{axis: getattr(self, axis) + delta})

    def take(self, idx):
        return ChartPoint(**{k: np.asarray(v)[idx] for k, v in self.coords().items()})

    def converted(self, bk):
        return ChartPoint(**{k: bk.asarray(v) for k, v in self.coords().items()})

    def as_float(self):
        return ChartPoint(**{k: DOUBLE.to_float(v) if np.asarray(v).dtype == object else v
                             for k, v in self.coords().items()})

    def __repr__(self):
        if self.size == 1:
            f = self.as_float()
            return "ChartPoint(" + ", ".join(f"{k}={float(getattr(f, k).reshape(-1)[0]):.6g}"
                                             for k in VARIABLES) + ")"
        return f"ChartPoint(batch of {self.size})"


# ---------------------------------------------------------------- ScalarField

class ScalarField:
    """Pure real function of (x2, x3, v, chi).

    `exact_axes` lists the axes along which the verifier takes symbolic
    (exact) partials instead of finite differences.  `symbol` documents
    which quantity the instance carries.
    """

    __slots__ = ("node", "exact_axes", "symbol", "smoothness")

    def __init__(self, node, exact_axes=(), symbol=None, smoothness=None):
        node = _node(node)
        axes = frozenset(exact_axes)
        if node.rough:
            axes = ALL_AXES
        object.__setattr__(self, "node", node)
        object.__setattr__(self, "exact_axes", axes)
        object.__setattr__(self, "symbol", symbol)
        object.__setattr__(self, "smoothness", smoothness)

    def __setattr__(self, k, v):
        raise AttributeError("ScalarField is immutable")

    # evaluation
    def __call__(self, point, bk=DOUBLE):
        if not isinstance(point, ChartPoint):
            raise TypeError("expected ChartPoint")
        if bk is DOUBLE:
            with np.errstate(all="ignore"):
                val = self.node.ev(point.coords(), bk, {})
            return np.broadcast_to(np.asarray(val, dtype=float), point.shape).copy()
        with bk.context():
            p = point.converted(bk)
            val = self.node.ev(p.coords(), bk, {})
            out = np.empty(point.shape, dtype=object)
            out[...] = val
            return out

    def at(self, **coords):
        """Convenience scalar evaluation."""
        return float(self(ChartPoint(**coords)))

    # structure
    @property
    def free(self):
        return self.node.free

    def depends_on(self, axis):
        return axis in self.node.free

    def carries(self, axis):
        return axis in self.exact_axes

    def with_exact(self, axes=ALL_AXES):
        return ScalarField(self.node, axes, self.symbol, self.smoothness)

    def named(self, symbol):
        return ScalarField(self.node, self.exact_axes, symbol, self.smoothness)

    def diff(self, axis, order=1):
        n = self.node
        for _ in range(order):
            n = n.d(axis)
        return ScalarField(n, self.exact_axes, None, self.smoothness)

    def subs(self, name, value):
        return ScalarField(self.node.subs(name, value), self.exact_axes, self.symbol)

    def __repr__(self):
        s = f" [{self.symbol}]" if self.symbol else ""
        return f"ScalarField({self.node!r}){s}"

    # arithmetic (results carry no exact partials unless forced by rough leaves)
    def __add__(self, o):
        return ScalarField(add(self, o))

    __radd__ = __add__

    def __sub__(self, o):
        return ScalarField(add(self, neg(_node(o))))

    def __rsub__(self, o):
        return ScalarField(add(o, neg(self.node)))

    def __mul__(self, o):
        return ScalarField(mul(self, o))

    __rmul__ = __mul__

    def __truediv__(self, o):
        return ScalarField(mul(self, power(o, -1.0)))

    def __rtruediv__(self, o):
        return ScalarField(mul(o, power(self.node, -1.0)))

    def __pow__(self, o):
        return ScalarField(power(self, o))

    def __rpow__(self, o):
        return ScalarField(power(o, self))

    def __neg__(self):
        return ScalarField(neg(self.node))

    def __pos__(self):
        return self


def field(x, **kw):
    """Coerce a number, node or field into a ScalarField."""
    if isinstance(x, ScalarField):
        return x
    return ScalarField(_node(x), **kw)


def const(c):
    return ScalarField(Const(c), ALL_AXES)


def coord(name):
    return ScalarField(Var(name), ALL_AXES, symbol=name)


def _wrap(name):
    def f(x):
        return ScalarField(func(name, _node(x)))
    f.__name__ = name
    return f


exp = _wrap("exp")
log = _wrap("log")
sin = _wrap("sin")
cos = _wrap("cos")
tan = _wrap("tan")
atan = _wrap("atan")
sqrt = _wrap("sqrt")
fabs = _wrap("abs")
sinh = _wrap("sinh")
cosh = _wrap("cosh")
tanh = _wrap("tanh")
sech = _wrap("sech")
sign = _wrap("sign")
PI = ScalarField(Pi(), ALL_AXES, symbol="pi")

X2, X3, V, CHI = coord("x2"), coord("x3"), coord("v"), coord("chi")
