"""5-point Poisson solver for the h-potential psi on a rectangle."""
import math

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import RectBivariateSpline
from scipy.sparse.linalg import cg

from .. import fields as F
from ..errors import SolverError


class SplineLeaf(F.Leaf):
    """Bicubic interpolant of grid data in (x2, x3) with exact spline partials."""

    label = "bicubic"
    rough = True

    def __init__(self, spline, dx=0, dy=0, values=None, nodes=None):
        self.spline, self.dx, self.dy = spline, dx, dy
        self.values, self.nodes = values, nodes
        self.free = frozenset(["x2", "x3"])

    def compute(self, env, bk):
        x = F.DOUBLE.to_float(env["x2"]) if bk is not F.DOUBLE else np.asarray(env["x2"])
        y = F.DOUBLE.to_float(env["x3"]) if bk is not F.DOUBLE else np.asarray(env["x3"])
        x, y = np.broadcast_arrays(x, y)
        out = self.spline.ev(x.ravel(), y.ravel(), dx=self.dx, dy=self.dy).reshape(x.shape)
        return out if bk is F.DOUBLE else bk.asarray(out)

    def _d(self, axis):
        if self.dx + self.dy >= 4:
            return F.ZERO
        if axis == "x2":
            return SplineLeaf(self.spline, self.dx + 1, self.dy)
        return SplineLeaf(self.spline, self.dx, self.dy + 1)


def laplacian_matrix(nx, ny, hx, hy):
    """Negative 5-point Laplacian on the (nx-2)*(ny-2) interior, C-order (x major)."""
    mx, my = nx - 2, ny - 2
    Tx = sp.diags([-np.ones(mx - 1), 2 * np.ones(mx), -np.ones(mx - 1)], [-1, 0, 1]) / hx ** 2
    Ty = sp.diags([-np.ones(my - 1), 2 * np.ones(my), -np.ones(my - 1)], [-1, 0, 1]) / hy ** 2
    return (sp.kron(Tx, sp.identity(my)) + sp.kron(sp.identity(mx), Ty)).tocsr()


def solve_psi_poisson(rhs, grid, boundary, tol=1e-8, maxiter=20000):
    """Solve psi.. + psi'' = rhs (constant) with Dirichlet data from `boundary`.

    grid: GridSpec whose x2 and x3 axes give the rectangle and node counts.
    Returns a ScalarField (bicubic interpolant with exact spline partials);
    the node values are on `field.node.values`.
    """
    x0, x1, nx = grid.axes["x2"]
    y0, y1, ny = grid.axes["x3"]
    if nx < 5 or ny < 5:
        raise ValueError("Poisson grid needs at least 5 nodes per axis")
    xs, ys = np.linspace(x0, x1, nx), np.linspace(y0, y1, ny)
    hx, hy = xs[1] - xs[0], ys[1] - ys[0]
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    bnd = F.field(boundary)(F.ChartPoint(x2=X, x3=Y))
    U = np.zeros((nx, ny))
    U[0, :], U[-1, :], U[:, 0], U[:, -1] = bnd[0, :], bnd[-1, :], bnd[:, 0], bnd[:, -1]
    A = laplacian_matrix(nx, ny, hx, hy)
    b = np.full((nx - 2, ny - 2), -float(rhs))
    b[0, :] += U[0, 1:-1] / hx ** 2
    b[-1, :] += U[-1, 1:-1] / hx ** 2
    b[:, 0] += U[1:-1, 0] / hy ** 2
    b[:, -1] += U[1:-1, -1] / hy ** 2
    b = b.ravel()
    # solve to a residual well inside the contract tolerance
    sol, info = cg(A, b, rtol=0.0, atol=tol * 1e-3, maxiter=maxiter)
    if info != 0:
        raise SolverError(f"Poisson CG did not converge within {maxiter} iterations")
    U[1:-1, 1:-1] = sol.reshape(nx - 2, ny - 2)
    lap = ((U[2:, 1:-1] - 2 * U[1:-1, 1:-1] + U[:-2, 1:-1]) / hx ** 2
           + (U[1:-1, 2:] - 2 * U[1:-1, 1:-1] + U[1:-1, :-2]) / hy ** 2)
    res = float(np.max(np.abs(lap - rhs))) if lap.size else 0.0
    if res > tol:
        raise SolverError(f"Poisson interior residual {res:.3g} exceeds {tol:g}")
    spline = RectBivariateSpline(xs, ys, U, kx=3, ky=3, s=0)
    leaf = SplineLeaf(spline, values=U, nodes=(xs, ys))
    return F.ScalarField(leaf, F.ALL_AXES, symbol="psi (Poisson)")


def particular_psi(lam, axis="x2"):
    """psi = lam x^2/2 along one axis solves psi.. + psi'' = lam."""
    c = F.X2 if axis == "x2" else F.X3
    return (0.5 * lam * c * c).with_exact().named("psi (particular)")


def liouville_psi(lam, s=-1, m=1, var="x2", c=1.0, x0=0.0):
    """h-potential with r_h = 0 for g2 = g3 = s e^{m psi}.

    u = m psi must solve Lap u = a e^u, a = 2 lam s; one-dimensional
    closed forms: e^u = (2c^2/-a) sech^2(c(x - x0)) for a < 0,
    e^u = (2c^2/a) / sinh^2(c(x - x0)) for a > 0 (keep x0 outside the
    domain), u = 0 for a = 0.
    """
    a = 2.0 * lam * s
    x = F.coord(var) - x0
    if a == 0:
        return F.const(0.0)
    if a < 0:
        u = math.log(2 * c * c / -a) + 2.0 * F.log(F.sech(c * x))
    else:
        u = math.log(2 * c * c / a) - 2.0 * F.log(F.fabs(F.sinh(c * x)))
    return (u / m).with_exact().named("psi (Liouville)")
