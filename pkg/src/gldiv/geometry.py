"""Boundary geometry: radial Fourier curves, arclength frames, tubular charts.

Conventions used across the whole package:

* Curves are closed, simple, positively oriented (counterclockwise) and
  star-shaped about the origin:  gamma(theta) = rho(theta) (cos theta, sin theta)
  with rho a trigonometric polynomial, rho > 0.
* ``nu`` is the INWARD unit normal, nu = tau^perp with (x1, x2)^perp = (-x2, x1).
* The tubular chart is  X(y1, y2) = gamma(y1) + y2 nu(y1)  with y1 arclength;
  y2 > 0 lies inside the domain, y2 < 0 outside.
* The chart Jacobian is J(y1, y2) = 1 - y2 kappa(y1), positive on the collar
  |y2| <= r1 with r1 <= r0 = 0.5 / max|kappa|.

Curvature of a radial graph:  kappa = (rho^2 + 2 rho'^2 - rho rho'') /
(rho^2 + rho'^2)^{3/2}, positive where the domain is convex.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.spatial import cKDTree

TWO_PI = 2.0 * np.pi


def _as_points(x):
    """Normalize a point or point array to shape (N, 2); report if input was single."""
    x = np.asarray(x, dtype=float)
    if x.shape == (2,):
        return x[None, :], True
    if x.ndim == 2 and x.shape[1] == 2:
        return x, False
    raise ValueError(f"expected a point (2,) or points (N, 2), got shape {x.shape}")


class BoundaryCurve:
    """Closed boundary curve rho(theta) = a0 + sum c_m cos(m theta) + sum s_m sin(m theta).

    Parameters
    ----------
    a0 : float
        Mean radius (must keep rho > 0 everywhere).
    cos_coeffs, sin_coeffs : sequence of float
        Coefficients c_1..c_M and s_1..s_M.
    n_table : int
        Number of samples in the dense theta table used for arclength
        quadrature, curvature bounds and chart-inversion seeding.

    Raises
    ------
    ValueError
        If rho is not strictly positive or the cumulative arclength table
        fails to be strictly monotone.
    """

    def __init__(self, a0, cos_coeffs=(), sin_coeffs=(), n_table=4096):
        self.a0 = float(a0)
        self.cos_coeffs = np.asarray(cos_coeffs, dtype=float).reshape(-1)
        self.sin_coeffs = np.asarray(sin_coeffs, dtype=float).reshape(-1)

        n_modes = max(len(self.cos_coeffs), len(self.sin_coeffs), 1)
        self.n_table = max(int(n_table), 64 * n_modes)
        th = np.linspace(0.0, TWO_PI, self.n_table, endpoint=False)
        self._table_theta = th

        r = self.rho(th)
        if np.min(r) <= 0.0:
            raise ValueError(
                f"curve is not strictly positive: min rho = {np.min(r):.3e}"
            )

        # Arclength S(theta) = int_0^theta speed: integrate the Fourier series of
        # the (smooth, periodic) speed termwise so the map and its inverse are
        # accurate to machine precision rather than table resolution.
        sp = self.speed(th)
        coeffs = np.fft.rfft(sp) / self.n_table
        self._speed_mean = coeffs[0].real
        mags = np.abs(coeffs[1:])
        keep = np.nonzero(mags > 1e-15 * max(1.0, abs(self._speed_mean)))[0]
        self._speed_modes = keep + 1          # mode numbers m >= 1
        self._speed_coeffs = coeffs[keep + 1]  # complex amplitudes
        self.perimeter = self._speed_mean * TWO_PI

        table_s = self.arclength_of_theta(th)
        if np.any(np.diff(table_s) <= 0.0):
            raise ValueError("cumulative arclength table is not strictly monotone")
        # cubic seed for the arclength -> theta inversion (Newton-polished later)
        self._theta_of_s_seed = PchipInterpolator(
            np.append(table_s, self.perimeter), np.append(th, TWO_PI)
        )

        gam = self.gamma(th)
        self._table_gamma = gam
        self._seed_tree = cKDTree(gam)
        self.max_curvature = float(np.max(np.abs(self.curvature_theta(th))))

    # -- radial function and derivatives ------------------------------------

    def rho(self, theta, d=0):
        """d-th derivative of rho at theta (d in {0, 1, 2})."""
        theta = np.asarray(theta, dtype=float)
        t = theta[..., None]
        out = np.full(theta.shape, self.a0 if d == 0 else 0.0)
        if len(self.cos_coeffs):
            m = np.arange(1, len(self.cos_coeffs) + 1, dtype=float)
            if d == 0:
                out = out + (self.cos_coeffs * np.cos(m * t)).sum(-1)
            elif d == 1:
                out = out - (self.cos_coeffs * m * np.sin(m * t)).sum(-1)
            elif d == 2:
                out = out - (self.cos_coeffs * m**2 * np.cos(m * t)).sum(-1)
            else:
                raise ValueError("rho derivatives implemented for d <= 2")
        if len(self.sin_coeffs):
            m = np.arange(1, len(self.sin_coeffs) + 1, dtype=float)
            if d == 0:
                out = out + (self.sin_coeffs * np.sin(m * t)).sum(-1)
            elif d == 1:
                out = out + (self.sin_coeffs * m * np.cos(m * t)).sum(-1)
            elif d == 2:
                out = out - (self.sin_coeffs * m**2 * np.sin(m * t)).sum(-1)
            else:
                raise ValueError("rho derivatives implemented for d <= 2")
        return out

    # -- pointwise geometry in the theta parametrization --------------------

    def gamma(self, theta):
        theta = np.asarray(theta, dtype=float)
        r = self.rho(theta)
        return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)

    def speed(self, theta):
        """|gamma'(theta)| = sqrt(rho^2 + rho'^2) > 0."""
        return np.sqrt(self.rho(theta) ** 2 + self.rho(theta, 1) ** 2)

    def frame_theta(self, theta):
        """Unit tangent, inward normal and curvature at parameter theta."""
        theta = np.asarray(theta, dtype=float)
        r, dr = self.rho(theta), self.rho(theta, 1)
        c, s = np.cos(theta), np.sin(theta)
        gx = dr * c - r * s
        gy = dr * s + r * c
        sp = np.sqrt(gx**2 + gy**2)
        tau = np.stack([gx / sp, gy / sp], axis=-1)
        nu = np.stack([-tau[..., 1], tau[..., 0]], axis=-1)
        return tau, nu, self.curvature_theta(theta)

    def curvature_theta(self, theta):
        r, dr, ddr = self.rho(theta), self.rho(theta, 1), self.rho(theta, 2)
        return (r**2 + 2 * dr**2 - r * ddr) / (r**2 + dr**2) ** 1.5

    # -- arclength parametrization -------------------------------------------

    def arclength_of_theta(self, theta):
        """S(theta) = int_0^theta |gamma'|, evaluated from the speed Fourier series."""
        theta = np.asarray(theta, dtype=float)
        s = self._speed_mean * theta
        if len(self._speed_modes):
            m = self._speed_modes
            e = np.exp(1j * m * theta[..., None])
            s = s + 2.0 * ((self._speed_coeffs * (e - 1.0)) / (1j * m)).real.sum(-1)
        return s

    def theta_of_arclength(self, y1):
        """Invert the arclength map; cubic table seed plus Newton polish."""
        y1 = np.asarray(y1, dtype=float)
        scalar = y1.ndim == 0
        y = np.mod(np.atleast_1d(y1), self.perimeter)
        th = np.asarray(self._theta_of_s_seed(y), dtype=float)
        tol = 1e-13 * max(1.0, self.perimeter)
        for _ in range(40):
            res = self.arclength_of_theta(th) - y
            if np.max(np.abs(res)) < tol:
                break
            th = th - res / self.speed(th)
        else:
            raise RuntimeError(
                f"arclength inversion stalled: max residual "
                f"{np.max(np.abs(self.arclength_of_theta(th) - y)):.3e}"
            )
        if scalar:
            return float(th[0])
        return np.reshape(th, y1.shape)


def unit_disk():
    return BoundaryCurve(1.0)


def fourier_fit_radial(fn, n_modes, n_samples=4096):
    """Project a positive radial function theta -> rho onto the Fourier family.

    Returns (a0, cos_coeffs, sin_coeffs) suitable for BoundaryCurve. Used to
    bring non-polynomial shapes (e.g. ellipses) into the curve class; the
    truncation error decays geometrically for analytic rho.
    """
    th = np.linspace(0.0, TWO_PI, n_samples, endpoint=False)
    c = np.fft.rfft(fn(th)) / n_samples
    a0 = c[0].real
    cos_coeffs = 2.0 * c[1 : n_modes + 1].real
    sin_coeffs = -2.0 * c[1 : n_modes + 1].imag
    return a0, cos_coeffs, sin_coeffs


def boundary_point(curve, y1):
    """Point gamma(y1) on the curve at arclength y1 (wraps modulo perimeter)."""
    return curve.gamma(curve.theta_of_arclength(y1))


def frame(curve, y1):
    """(tau, nu, kappa) at arclength y1: unit tangent, inward normal, curvature."""
    return curve.frame_theta(curve.theta_of_arclength(y1))


class TangentNormalChart:
    """Tubular-neighborhood chart X(y1, y2) = gamma(y1) + y2 nu(y1).

    ``r0`` is the reach bound 0.5/max|kappa| and ``r1 <= r0`` (default r0/2)
    is the half-width of the collar |y2| <= r1 on which the chart is used.
    Inside the collar J = 1 - y2 kappa >= 1 - r1 max|kappa| >= 1/2 > 0, so the
    chart is a diffeomorphism there.
    """

    def __init__(self, curve, r0=None, r1=None):
        self.curve = curve
        kmax = curve.max_curvature
        reach = 0.5 / kmax if kmax > 0 else np.inf
        self.r0 = reach if r0 is None else float(r0)
        if self.r0 > reach * (1.0 + 1e-12):
            raise ValueError(f"r0 = {self.r0} exceeds the reach bound {reach}")
        self.r1 = 0.5 * self.r0 if r1 is None else float(r1)
        if self.r1 > self.r0:
            raise ValueError(f"r1 = {self.r1} > r0 = {self.r0}")

    def _check_band(self, y2):
        if np.max(np.abs(y2)) > self.r1 * (1.0 + 1e-9):
            raise ValueError(
                f"normal coordinate |y2| = {np.max(np.abs(y2)):.6g} outside the "
                f"collar half-width r1 = {self.r1:.6g}"
            )

    def to_cartesian(self, y1, y2):
        y1 = np.asarray(y1, dtype=float)
        y2 = np.asarray(y2, dtype=float)
        self._check_band(y2)
        th = self.curve.theta_of_arclength(y1)
        _, nu, _ = self.curve.frame_theta(th)
        return self.curve.gamma(th) + np.asarray(y2)[..., None] * nu

    def to_chart(self, x):
        """Invert the chart by damped Newton iteration (residual tol 1e-12).

        Accepts one point (2,) or many (N, 2); returns (y1, y2) scalars or
        arrays. Raises if a point fails to converge or lands outside |y2| <= r1.
        """
        pts, single = _as_points(x)
        crv = self.curve
        _, idx = crv._seed_tree.query(pts)
        th = crv._table_theta[idx]
        tau, nu, kap = crv.frame_theta(th)
        y2 = ((pts - crv._table_gamma[idx]) * nu).sum(-1)

        tol = 1e-12 * (1.0 + np.linalg.norm(pts, axis=1))
        res = np.inf * np.ones(len(pts))
        th_prev, y2_prev = th.copy(), y2.copy()
        for _ in range(60):
            tau, nu, kap = crv.frame_theta(th)
            F = crv.gamma(th) + y2[:, None] * nu - pts
            res_new = np.linalg.norm(F, axis=1)
            # damp: re-halve the step for any point whose residual grew
            bad = res_new > res
            halvings = 0
            while np.any(bad) and halvings < 30:
                th[bad] = 0.5 * (th[bad] + th_prev[bad])
                y2[bad] = 0.5 * (y2[bad] + y2_prev[bad])
                tau_b, nu_b, _ = crv.frame_theta(th[bad])
                Fb = crv.gamma(th[bad]) + y2[bad, None] * nu_b - pts[bad]
                F[bad], res_new[bad] = Fb, np.linalg.norm(Fb, axis=1)
                bad = res_new > res
                halvings += 1
            res = res_new
            if np.all(res < tol):
                break
            sp = crv.speed(th)
            jac = sp * (1.0 - y2 * kap)
            th_prev, y2_prev = th.copy(), y2.copy()
            th = th - (F * tau).sum(-1) / jac
            y2 = y2 - (F * nu).sum(-1)
        if not np.all(res < tol):
            k = int(np.argmax(res))
            raise RuntimeError(
                f"chart inversion did not converge: point {pts[k]} residual {res[k]:.3e}"
            )
        self._check_band(y2)
        y1 = crv.arclength_of_theta(np.mod(th, TWO_PI))
        if single:
            return float(y1[0]), float(y2[0])
        return y1, y2

    def jacobian(self, y1, y2):
        """J(y1, y2) = 1 - y2 kappa(y1) (y2 signed; > 0 throughout the collar)."""
        kap = self.curve.curvature_theta(self.curve.theta_of_arclength(y1))
        return 1.0 - np.asarray(y2, dtype=float) * kap


def chart_to_cartesian(chart, y1, y2):
    return chart.to_cartesian(y1, y2)


def cartesian_to_chart(chart, x):
    return chart.to_chart(x)


def chart_jacobian(chart, y1, y2):
    return chart.jacobian(y1, y2)
