"""Adaptive quadrature.

`simpson_batch` integrates many independent rows at once: every row
refines its own intervals, so a row's value never depends on what else
is in the batch (bit-identical re-evaluation).
"""
import numpy as np

from . import fields as F
from .errors import QuadratureError

DEFAULT_TOL = 1e-10


def simpson_batch(fn, a, b, tol=DEFAULT_TOL, max_depth=48, initial_panels=4):
    """Integrate fn over [a_k, b_k] for each row k.

    fn(s, rows) evaluates the integrand of row `rows[j]` at abscissa s[j].
    Absolute tolerance per row.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    nrow = a.size
    a, b = a.ravel(), b.ravel()
    result = np.zeros(nrow)

    m = initial_panels
    rows = np.repeat(np.arange(nrow), m)
    k = np.tile(np.arange(m), nrow)
    width = (b - a)[rows] / m
    lo = a[rows] + k * width
    hi = np.where(k == m - 1, b[rows], lo + width)
    keep = hi != lo
    rows, lo, hi = rows[keep], lo[keep], hi[keep]
    tol_i = np.full(rows.size, tol / m)
    mid = 0.5 * (lo + hi)
    s3 = np.concatenate([lo, mid, hi])
    f3 = np.asarray(fn(s3, np.concatenate([rows, rows, rows])), dtype=float)
    n = rows.size
    flo, fmid, fhi = f3[:n], f3[n:2 * n], f3[2 * n:]
    whole = (hi - lo) / 6.0 * (flo + 4 * fmid + fhi)
    depth = 0
    while rows.size:
        if depth > max_depth:
            raise QuadratureError(f"adaptive Simpson did not reach tol {tol:g} within depth {max_depth}")
        if not np.all(np.isfinite(whole)):
            raise QuadratureError("non-finite integrand value")
        mid = 0.5 * (lo + hi)
        ql, qr = 0.5 * (lo + mid), 0.5 * (mid + hi)
        f2 = np.asarray(fn(np.concatenate([ql, qr]), np.concatenate([rows, rows])), dtype=float)
        fql, fqr = f2[:rows.size], f2[rows.size:]
        left = (mid - lo) / 6.0 * (flo + 4 * fql + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4 * fqr + fhi)
        err = left + right - whole
        ok = np.abs(err) <= 15.0 * tol_i
        if np.any(ok):
            np.add.at(result, rows[ok], (left + right + err / 15.0)[ok])
        bad = ~ok
        # children interleaved (left, right) per parent keeps per-row order stable
        r2 = np.repeat(rows[bad], 2)
        lo2 = np.column_stack([lo[bad], mid[bad]]).ravel()
        hi2 = np.column_stack([mid[bad], hi[bad]]).ravel()
        flo2 = np.column_stack([flo[bad], fmid[bad]]).ravel()
        fmid2 = np.column_stack([fql[bad], fqr[bad]]).ravel()
        fhi2 = np.column_stack([fmid[bad], fhi[bad]]).ravel()
        whole2 = np.column_stack([left[bad], right[bad]]).ravel()
        tol2 = np.repeat(tol_i[bad] / 2.0, 2)
        rows, lo, hi, flo, fmid, fhi, whole, tol_i = r2, lo2, hi2, flo2, fmid2, fhi2, whole2, tol2
        depth += 1
    return result


def adaptive_simpson(f, a, b, tol=DEFAULT_TOL, max_depth=48):
    """Scalar convenience wrapper; f must accept numpy arrays."""
    return float(simpson_batch(lambda s, rows: f(s), a, b, tol, max_depth)[0])


class RunningIntegral(F.Leaf):
    """Q(x) = integral of `integrand` along `axis` from `lower` to x[axis].

    Partials: along `axis` the integrand; along other axes the running
    integral of the integrand's partial (fixed lower limit).
    """

    label = "running-integral"
    rough = True

    def __init__(self, integrand, axis="v", lower=0.0, tol=DEFAULT_TOL):
        self.integrand = F._node(integrand)
        self.axis = axis
        self.lower = float(lower)
        self.tol = tol
        self.free = self.integrand.free | {axis}

    def compute(self, env, bk):
        fenv = {k: np.asarray(F.DOUBLE.to_float(v)) for k, v in env.items()}
        shape = np.broadcast_shapes(*(v.shape for v in fenv.values()))
        flat = {k: np.broadcast_to(v, shape).ravel() for k, v in fenv.items()}
        upper = flat[self.axis]

        def fn(s, rows):
            e = {k: v[rows] for k, v in flat.items()}
            e[self.axis] = s
            with np.errstate(all="ignore"):
                val = self.integrand.ev(e, F.DOUBLE, {})
            return np.broadcast_to(np.asarray(val, dtype=float), s.shape)

        out = simpson_batch(fn, np.full(upper.shape, self.lower), upper, self.tol).reshape(shape)
        return bk.asarray(out) if bk is not F.DOUBLE else out

    def _d(self, axis):
        if axis == self.axis:
            return self.integrand
        return RunningIntegral(self.integrand.d(axis), self.axis, self.lower, self.tol)

    def _subs(self, name, value):
        if name == self.axis:
            return F.Pinned(self, name, value)
        return RunningIntegral(self.integrand.subs(name, value), self.axis, self.lower, self.tol)


def running_integral(integrand, axis="v", lower=0.0, tol=DEFAULT_TOL, symbol=None):
    """ScalarField of the running integral; carries exact partials on all axes."""
    return F.ScalarField(RunningIntegral(integrand, axis, lower, tol), F.ALL_AXES, symbol=symbol)


# Gauss-Legendre nodes for short-segment refinement
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


class MonotoneMap:
    """X(r) = integral of g from r0 to r, tabulated eagerly, with inverse.

    `g(r)` is a positive numpy function.  The table stores X at nodes
    (adaptive Simpson per segment); evaluation between nodes uses a
    16-point Gauss-Legendre rule on the partial segment.
    """

    def __init__(self, g, r0, r_lo, r_hi, nodes=1025, tol=1e-12):
        if not r_lo < r_hi:
            raise ValueError("empty radial range")
        self.g = g
        self.r0 = float(r0)
        self.r_lo, self.r_hi = float(r_lo), float(r_hi)
        grid = np.unique(np.concatenate([np.linspace(r_lo, r_hi, nodes), [self.r0]]))
        seg = simpson_batch(lambda s, rows: g(s), grid[:-1], grid[1:], tol)
        X = np.concatenate([[0.0], np.cumsum(seg)])
        X -= X[np.searchsorted(grid, self.r0)]
        self.r_nodes, self.X_nodes = grid, X

    def _piece(self, k, r):
        a = self.r_nodes[k]
        half = 0.5 * (r - a)
        s = a[..., None] + half[..., None] * (_GL_X + 1.0)
        return half * np.sum(_GL_W * self.g(s), axis=-1)

    def forward(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.r_lo) or np.any(r > self.r_hi):
            raise QuadratureError("radius outside tabulated range")
        k = np.clip(np.searchsorted(self.r_nodes, r) - 1, 0, self.r_nodes.size - 2)
        return self.X_nodes[k] + self._piece(k, r)

    def inverse(self, X):
        X = np.asarray(X, dtype=float)
        if np.any(X < self.X_nodes[0] - 1e-12) or np.any(X > self.X_nodes[-1] + 1e-12):
            raise QuadratureError("coordinate outside tabulated range")
        k = np.clip(np.searchsorted(self.X_nodes, X) - 1, 0, self.r_nodes.size - 2)
        a, b = self.r_nodes[k], self.r_nodes[k + 1]
        r = a + (b - a) * (X - self.X_nodes[k]) / (self.X_nodes[k + 1] - self.X_nodes[k])
        for _ in range(8):
            step = (self.X_nodes[k] + self._piece(k, r) - X) / self.g(r)
            r = r - step
            if np.all(np.abs(step) <= 1e-15 * np.maximum(1.0, np.abs(r))):
                break
        return r


class InverseMapLeaf(F.Leaf):
    """r as a function of the chart coordinate `var` through a MonotoneMap.

    `g_node(node)` builds dX/dr as an expression of a radius node, which
    gives the exact derivative dr/dX = 1/g(r).
    """

    label = "inverse-map"
    rough = True

    def __init__(self, mapping, var, g_node):
        self.mapping, self.var, self.g_node = mapping, var, g_node
        self.free = frozenset([var])

    def compute(self, env, bk):
        x = F.DOUBLE.to_float(env[self.var]) if bk is not F.DOUBLE else env[self.var]
        r = self.mapping.inverse(x)
        return bk.asarray(r) if bk is not F.DOUBLE else r

    def _d(self, axis):
        return F.power(self.g_node(self), -1.0)
