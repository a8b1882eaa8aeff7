"""Structured meshes and discrete calculus on curved domains.

Two meshes are provided:

* ``InteriorMesh`` covers the whole domain with the star-shaped map
  x(theta, s) = s rho(theta) (cos theta, sin theta), theta uniform-periodic,
  s on a shifted cell-centered grid s_j = (j + 1/2) h, h = 2/(2 ns - 1):
  no node at the coordinate-singular center and the last node exactly on the
  boundary (needed for tangential traces and projections).
* ``CollarMesh`` covers the two-sided tubular collar |y2| <= r1 of a
  ``TangentNormalChart`` with uniform-periodic y1 and a symmetric
  cell-centered y2 grid (mirror pairs share |y2|; no node on the boundary
  line y2 = 0).

Differentiation is FFT-spectral along the periodic direction (Nyquist mode
zeroed, so the operator matrix is real skew-symmetric and its adjoint is its
negative) and 2nd-order finite differences along the transverse direction
(centered stencils inside, 3-point one-sided at the two edge rows). Cartesian
derivatives follow by inverting the 2x2 chart Jacobian at every node.
Quadrature is the Jacobian-weighted midpoint/trapezoid rule on the same grid.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .geometry import TWO_PI


# -- 1D operators ------------------------------------------------------------

def spectral_derivative(f, axis, period):
    """Derivative along a uniform periodic axis via FFT (exact on band-limited data)."""
    f = np.asarray(f, dtype=float)
    n = f.shape[axis]
    k = np.fft.rfftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k = k.copy()
        k[-1] = 0.0  # zero the Nyquist derivative: keeps the operator skew-symmetric
    mult = 1j * k * (TWO_PI / period)
    shape = [1] * f.ndim
    shape[axis] = -1
    F = np.fft.rfft(f, axis=axis) * mult.reshape(shape)
    return np.fft.irfft(F, n=n, axis=axis)


def fd_matrix(n, h):
    """Dense 2nd-order differentiation matrix on a uniform grid: centered inside,
    3-point one-sided at both ends (exact on quadratics everywhere)."""
    if n < 3:
        raise ValueError("need at least 3 transverse nodes")
    D = np.zeros((n, n))
    for j in range(1, n - 1):
        D[j, j - 1] = -0.5 / h
        D[j, j + 1] = 0.5 / h
    D[0, 0], D[0, 1], D[0, 2] = -1.5 / h, 2.0 / h, -0.5 / h
    D[-1, -1], D[-1, -2], D[-1, -3] = 1.5 / h, -2.0 / h, 0.5 / h
    return D


def _periodic_spline(grid1, grid2, values, pad=4):
    """Bicubic spline with the first (periodic) axis wrap-padded."""
    period = grid1[-1] + (grid1[1] - grid1[0])
    g1 = np.concatenate([grid1[-pad:] - period, grid1, grid1[:pad] + period])
    v = np.concatenate([values[-pad:], values, values[:pad]], axis=0)
    return RectBivariateSpline(g1, grid2, v, kx=3, ky=3)


# -- interior mesh -----------------------------------------------------------

class InteriorMesh:
    """Tensor-product mesh on a star-shaped domain. See module docstring."""

    def __init__(self, curve, ntheta, ns):
        if ntheta < 8 or ntheta % 2:
            raise ValueError("ntheta must be even and >= 8")
        if ns < 4:
            raise ValueError("ns must be >= 4")
        self.curve = curve
        self.ntheta = int(ntheta)
        self.ns = int(ns)

        self.theta = np.arange(ntheta) * (TWO_PI / ntheta)
        self.hs = 2.0 / (2 * ns - 1)
        self.s = (np.arange(ns) + 0.5) * self.hs   # s[-1] == 1 exactly up to rounding
        self.dtheta = TWO_PI / ntheta

        r = curve.rho(self.theta)
        dr = curve.rho(self.theta, 1)
        c, sn = np.cos(self.theta), np.sin(self.theta)
        S = self.s[None, :]
        R, dR = r[:, None], dr[:, None]
        C, SN = c[:, None], sn[:, None]

        self.x = np.stack([S * R * C, S * R * SN], axis=-1)

        # chart Jacobian d(x)/d(theta, s); det = -s rho^2 analytically
        xth = S * (dR * C - R * SN)
        yth = S * (dR * SN + R * C)
        xs = R * C
        ys = R * SN
        det = xth * ys - yth * xs
        self.grad_theta = np.stack([ys / det, -xs / det], axis=-1)
        self.grad_s = np.stack([-yth / det, xth / det], axis=-1)

        ws = np.full(ns, self.hs)
        ws[-1] = 0.5 * self.hs
        self.weights = np.abs(det) * self.dtheta * ws[None, :]

        self.Ds = fd_matrix(ns, self.hs)
        # boundary frame at the s = 1 nodes (theta parametrization)
        self.boundary_tau, self.boundary_nu, self.boundary_kappa = curve.frame_theta(
            self.theta
        )
        sp = curve.speed(self.theta)
        self.h = max(self.hs * np.max(r), self.dtheta * np.max(sp))

    # 1D derivative actions on (ntheta, ns, ...) arrays
    def d_theta(self, f):
        return spectral_derivative(f, axis=0, period=TWO_PI)

    def d_s(self, f):
        return np.einsum("jk,ik...->ij...", self.Ds, np.asarray(f, dtype=float))

    def d_theta_adjoint(self, f):
        return -self.d_theta(f)

    def d_s_adjoint(self, f):
        return np.einsum("kj,ik...->ij...", self.Ds, np.asarray(f, dtype=float))

    def scalar_gradient(self, f):
        """Cartesian gradient of a scalar nodal field, shape (ntheta, ns, 2)."""
        ft = self.d_theta(f)
        fs = self.d_s(f)
        return self.grad_theta * ft[..., None] + self.grad_s * fs[..., None]

    def scalar_gradient_adjoint(self, g):
        """Adjoint of scalar_gradient (as a map R^{nodes} -> R^{nodes x 2})."""
        a = (self.grad_theta * g).sum(-1)
        b = (self.grad_s * g).sum(-1)
        return self.d_theta_adjoint(a) + self.d_s_adjoint(b)

    def chart_coords(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        th = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), TWO_PI)
        s = np.hypot(pts[:, 0], pts[:, 1]) / self.curve.rho(th)
        return th, s

    def interpolate(self, field, points):
        """Bicubic interpolation of nodal data at Cartesian points.

        ``field`` has shape (ntheta, ns) or (ntheta, ns, m); returns (N,) or (N, m).
        """
        field = np.asarray(field, dtype=float)
        th, s = self.chart_coords(points)
        if field.ndim == 2:
            return _periodic_spline(self.theta, self.s, field).ev(th, s)
        out = np.stack(
            [
                _periodic_spline(self.theta, self.s, field[..., m]).ev(th, s)
                for m in range(field.shape[-1])
            ],
            axis=-1,
        )
        return out


def build_interior_mesh(curve, ntheta, ns):
    return InteriorMesh(curve, ntheta, ns)


def discrete_gradient(mesh, field):
    """Gradient of a scalar field (-> shape + (2,)) or Jacobian of a vector
    field (-> shape + (2, 2) with [..., c, d] = d u_c / d x_d)."""
    field = np.asarray(field, dtype=float)
    if field.ndim == 2:
        return mesh.scalar_gradient(field)
    if field.ndim == 3 and field.shape[-1] == 2:
        return np.stack(
            [mesh.scalar_gradient(field[..., 0]), mesh.scalar_gradient(field[..., 1])],
            axis=-2,
        )
    raise ValueError(f"expected (ntheta, ns) or (ntheta, ns, 2), got {field.shape}")


def discrete_divergence(mesh, field):
    field = np.asarray(field, dtype=float)
    if field.ndim != 3 or field.shape[-1] != 2:
        raise ValueError("divergence needs a vector field (ntheta, ns, 2)")
    g1 = mesh.scalar_gradient(field[..., 0])
    g2 = mesh.scalar_gradient(field[..., 1])
    return g1[..., 0] + g2[..., 1]


def integrate(mesh, field):
    """Quadrature of a scalar nodal field over the mesh."""
    return float(np.sum(mesh.weights * np.asarray(field, dtype=float)))


def interpolate(mesh, field, points):
    return mesh.interpolate(field, points)


# -- collar mesh -------------------------------------------------------------

class CollarMesh:
    """Two-sided collar mesh around the boundary. See module docstring.

    Node (i, j) has coordinates (y1_i, y2_j) with y2_j = -r1 + (j + 1/2) d2;
    mirror pairs are (i, j) <-> (i, n2 - 1 - j). Cached per-node data:

    J         signed physical Jacobian 1 - y2 kappa (both sides)
    Jm        mirror-image Jacobian 1 - |y2| kappa
    D         reflection distortion J / Jm  (= 1 inside, > 1 outside convex parts)
    det_sigma |det grad sigma| = Jm / J     (= 1 inside)
    """

    def __init__(self, chart, n1, n2):
        if n1 < 8 or n1 % 2:
            raise ValueError("n1 must be even and >= 8")
        if n2 < 4 or n2 % 2:
            raise ValueError("n2 must be even and >= 4 (symmetric mirror pairs)")
        self.chart = chart
        self.curve = chart.curve
        self.n1, self.n2 = int(n1), int(n2)
        L = self.curve.perimeter
        self.period = L
        self.d1 = L / n1
        self.y1 = np.arange(n1) * self.d1
        self.d2 = 2.0 * chart.r1 / n2
        self.y2 = -chart.r1 + (np.arange(n2) + 0.5) * self.d2

        th = self.curve.theta_of_arclength(self.y1)
        self.tau, self.nu, self.kappa = self.curve.frame_theta(th)
        gam = self.curve.gamma(th)
        self.x = gam[:, None, :] + self.y2[None, :, None] * self.nu[:, None, :]

        Y2 = self.y2[None, :]
        K = self.kappa[:, None]
        self.J = 1.0 - Y2 * K
        self.Jm = 1.0 - np.abs(Y2) * K
        self.D = self.J / self.Jm
        self.det_sigma = self.Jm / self.J
        self.weights = np.abs(self.J) * self.d1 * self.d2
        self.interior = Y2 > 0  # broadcastable mask (1, n2)

        self.D2 = fd_matrix(n2, self.d2)

    def mirror(self, j=None):
        """Mirror index map j -> n2 - 1 - j (same |y2|, opposite side)."""
        if j is None:
            return self.n2 - 1 - np.arange(self.n2)
        return self.n2 - 1 - j

    def d_1(self, f):
        return spectral_derivative(f, axis=0, period=self.period)

    def d_2(self, f):
        return np.einsum("jk,ik...->ij...", self.D2, np.asarray(f, dtype=float))

    def scalar_gradient(self, f):
        """Cartesian gradient via the tubular chart: grad f = tau f_y1 / J + nu f_y2."""
        f1 = self.d_1(f) / self.J
        f2 = self.d_2(f)
        return self.tau[:, None, :] * f1[..., None] + self.nu[:, None, :] * f2[..., None]

    def frame_components(self, field):
        """Decompose a Cartesian vector field into (tangential, normal) parts."""
        wt = (field * self.tau[:, None, :]).sum(-1)
        wn = (field * self.nu[:, None, :]).sum(-1)
        return wt, wn

    def from_frame_components(self, wt, wn):
        return (
            wt[..., None] * self.tau[:, None, :] + wn[..., None] * self.nu[:, None, :]
        )

    def integrate(self, field):
        return float(np.sum(self.weights * np.asarray(field, dtype=float)))

    def interpolate(self, field, points):
        """Bicubic interpolation at Cartesian points inside the collar."""
        field = np.asarray(field, dtype=float)
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        c1, c2 = self.chart.to_chart(pts)
        if field.ndim == 2:
            return _periodic_spline(self.y1, self.y2, field).ev(c1, c2)
        return np.stack(
            [
                _periodic_spline(self.y1, self.y2, field[..., m]).ev(c1, c2)
                for m in range(field.shape[-1])
            ],
            axis=-1,
        )


def build_collar_mesh(chart, n1, n2):
    return CollarMesh(chart, n1, n2)
