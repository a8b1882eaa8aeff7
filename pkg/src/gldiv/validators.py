"""Closed-form analytic oracles used to validate the discrete machinery.

Two families:

* A quadratic null field of the linear operator -Lap u - k grad(div u)
  (no bulk potential):  u(x, y) = (alpha/2 (x^2 + y^2) - beta, -gamma x y)
  with alpha = k gamma / (k + 2) for k != -2 (for k = -2 the family needs
  gamma = 0 and alpha is free).  Because the field is quadratic, both the
  analytic residual (pure algebra) and the residual of the composed discrete
  operators (second-order stencils are exact on quadratics) vanish to
  rounding, which pins the operator conventions end to end.  For suitable
  parameters |u| attains its maximum strictly inside a small disk even though
  the field solves the system there -- the behaviour ``interior_max_check``
  searches for.

* The exact energy of the unit-disk vortex ansatz with linear core profile
  min(r/eps, 1): dirichlet = pi log(1/eps) + pi, divergence = 0, potential =
  pi/12, against which the quadrature + minimizer stack is cross-checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energy import EnergyBreakdown
from .mesh import discrete_divergence


@dataclass(frozen=True)
class PolyaParams:
    """Parameters (k, beta, gamma, alpha) of the quadratic null field.

    ``alpha`` is derived as k gamma / (k + 2) when omitted; an explicit
    inconsistent alpha is storable (so the residual functions can demonstrate
    detection) but rejected by ``polya_field``.  k = -2 requires gamma = 0
    and an explicit alpha.
    """

    k: float
    beta: float
    gamma: float
    alpha: float = None

    def __post_init__(self):
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "gamma", float(self.gamma))
        if self.k == -2.0:
            if self.gamma != 0.0:
                raise ValueError("k = -2 admits no consistent field unless gamma = 0")
            if self.alpha is None:
                raise ValueError("k = -2 leaves alpha free: pass it explicitly")
        if self.alpha is None:
            object.__setattr__(self, "alpha", self.k * self.gamma / (self.k + 2.0))
        else:
            object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def consistent(self):
        """Whether alpha (k + 2) = k gamma holds (always true for k = -2)."""
        if self.k == -2.0:
            return True
        lhs, rhs = self.alpha * (self.k + 2.0), self.k * self.gamma
        return abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


class PolyaField:
    """Closed-form evaluator of u = (alpha/2 (x^2+y^2) - beta, -gamma x y)
    and its analytic derivatives. Jacobian convention matches
    ``discrete_gradient``: grad[..., c, d] = d u_c / d x_d."""

    def __init__(self, params):
        self.params = params

    def u(self, points):
        pts = np.asarray(points, dtype=float)
        p = self.params
        x, y = pts[..., 0], pts[..., 1]
        return np.stack([0.5 * p.alpha * (x**2 + y**2) - p.beta, -p.gamma * x * y], -1)

    def grad(self, points):
        pts = np.asarray(points, dtype=float)
        p = self.params
        x, y = pts[..., 0], pts[..., 1]
        row1 = np.stack([p.alpha * x, p.alpha * y], -1)
        row2 = np.stack([-p.gamma * y, -p.gamma * x], -1)
        return np.stack([row1, row2], -2)

    def laplacian(self, points):
        pts = np.asarray(points, dtype=float)
        p = self.params
        out = np.zeros(pts.shape)
        out[..., 0] = 2.0 * p.alpha
        return out

    def div(self, points):
        pts = np.asarray(points, dtype=float)
        p = self.params
        return (p.alpha - p.gamma) * pts[..., 0]

    def grad_div(self, points):
        pts = np.asarray(points, dtype=float)
        p = self.params
        out = np.zeros(pts.shape)
        out[..., 0] = p.alpha - p.gamma
        return out

    def operator_residual(self, points):
        """-Lap u - k grad(div u), a constant vector for this family."""
        p = self.params
        return -self.laplacian(points) - p.k * self.grad_div(points)


def polya_field(params):
    """Validated evaluator; raises ValueError when alpha breaks the
    consistency relation alpha (k + 2) = k gamma."""
    if not params.consistent:
        raise ValueError(
            "inconsistent parameters: alpha (k + 2) = k gamma fails "
            f"(alpha={params.alpha}, k={params.k}, gamma={params.gamma})"
        )
    return PolyaField(params)


def _sample_points(n_points, radius, seed):
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, n_points))
    t = rng.uniform(0.0, 2.0 * np.pi, n_points)
    return np.stack([r * np.cos(t), r * np.sin(t)], -1)


def polya_residual(
    params, points=None, mode="analytic", mesh=None, n_points=1000, radius=2.0, seed=0
):
    """Max |(-Lap u - k grad div u)(x)| over sample points.

    ``analytic`` evaluates the closed-form derivatives (pure algebra, ~1e-16
    for consistent parameters); ``discrete`` overrides ``points`` with the
    nodes of ``mesh`` and applies the composed discrete operators to the
    nodal field (exact on this quadratic family up to rounding, <= 1e-10).
    Deliberately skips the consistency validation so that inconsistent
    parameters are *detected* by a nonzero residual rather than rejected.
    """
    field = PolyaField(params)
    if mode == "analytic":
        if points is None:
            points = _sample_points(n_points, radius, seed)
        res = field.operator_residual(points)
        return float(np.sqrt((res**2).sum(-1)).max())
    if mode == "discrete":
        if mesh is None:
            raise ValueError("discrete mode needs a mesh")
        u = field.u(mesh.x)
        lap = np.empty_like(u)
        for c in range(2):
            g = mesh.scalar_gradient(u[..., c])
            lap[..., c] = (
                mesh.scalar_gradient(g[..., 0])[..., 0]
                + mesh.scalar_gradient(g[..., 1])[..., 1]
            )
        gdiv = mesh.scalar_gradient(discrete_divergence(mesh, u))
        res = -lap - params.k * gdiv
        return float(np.sqrt((res**2).sum(-1)).max())
    raise ValueError(f"mode must be 'analytic' or 'discrete', got {mode!r}")


# -- interior-maximum search ---------------------------------------------------

def _refine_max(fn, center, half, rounds=4, n=41):
    """Shrinking-grid ascent of fn around center; returns (point, value)."""
    best = np.asarray(center, dtype=float)
    best_val = float(fn(best[None, :])[0])
    for _ in range(rounds):
        gx = np.linspace(best[0] - half, best[0] + half, n)
        gy = np.linspace(best[1] - half, best[1] + half, n)
        X, Y = np.meshgrid(gx, gy, indexing="ij")
        pts = np.stack([X, Y], -1).reshape(-1, 2)
        vals = fn(pts)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best, best_val = pts[i], float(vals[i])
        half /= 10.0
    return best, best_val


def interior_max_check(params, radius, n=241, refine_rounds=4):
    """Search |u| over the closed disk B_radius(0) and report whether the
    maximum is attained in the interior.

    Returns {"alpha", "argmax", "interior", "max", "boundary_max"}; the
    interior flag demands distance > 2h from the boundary, h the coarse grid
    spacing. Grid argmax resolves ties at the first index.
    """
    r = float(radius)
    if r <= 0.0:
        raise ValueError("radius must be positive")
    field = PolyaField(params)
    h = 2.0 * r / (n - 1)

    def mag_in_disk(pts):
        m = np.sqrt((field.u(pts) ** 2).sum(-1))
        outside = pts[..., 0] ** 2 + pts[..., 1] ** 2 > r * r * (1.0 + 1e-14)
        return np.where(outside, -np.inf, m)

    g = np.linspace(-r, r, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    pts = np.stack([X, Y], -1).reshape(-1, 2)
    vals = mag_in_disk(pts)
    i = int(np.argmax(vals))
    best, best_val = _refine_max(mag_in_disk, pts[i], h, rounds=refine_rounds)

    # boundary restriction, same shrinking-grid search in the angle
    def bmag(phi):
        b = np.stack([r * np.cos(phi), r * np.sin(phi)], -1)
        return np.sqrt((field.u(b) ** 2).sum(-1))

    phis = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
    bvals = bmag(phis)
    j = int(np.argmax(bvals))
    phi, dphi = phis[j], phis[1] - phis[0]
    bbest = float(bvals[j])
    for _ in range(refine_rounds):
        local = np.linspace(phi - dphi, phi + dphi, 41)
        lv = bmag(local)
        jj = int(np.argmax(lv))
        if lv[jj] > bbest:
            phi, bbest = float(local[jj]), float(lv[jj])
        dphi /= 10.0

    if bbest > best_val:
        best = np.array([r * np.cos(phi), r * np.sin(phi)])
        best_val = bbest
    interior = bool(np.hypot(best[0], best[1]) < r - 2.0 * h)
    return {
        "alpha": params.alpha,
        "argmax": [float(best[0]), float(best[1])],
        "interior": interior,
        "max": best_val,
        "boundary_max": bbest,
    }


def interior_max_radius(params, r_lo=0.1, r_hi=3.0, tol=1e-4, **kwargs):
    """Bisect for the threshold radius below which the maximum is interior.

    Requires the interior flag to differ at the two endpoints.
    """
    lo, hi = float(r_lo), float(r_hi)
    flag_lo = interior_max_check(params, lo, **kwargs)["interior"]
    flag_hi = interior_max_check(params, hi, **kwargs)["interior"]
    if flag_lo == flag_hi:
        raise ValueError(
            f"no interiority transition in [{lo}, {hi}] (flags {flag_lo}/{flag_hi})"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if interior_max_check(params, mid, **kwargs)["interior"] == flag_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- closed-form ansatz energy ---------------------------------------------------

def ansatz_energy_closed_form(eps, k=1.0):
    """Exact energy of the centered vortex ansatz on the unit disk.

    dirichlet = pi log(1/eps) + pi (core contributes exactly pi), divergence
    vanishes identically (rotational field, radial profile), potential =
    (pi/2) int_0^1 (1-t^2)^2 t dt = pi/12.
    """
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    dirichlet = float(np.pi * np.log(1.0 / eps) + np.pi)
    potential = np.pi / 12.0
    return EnergyBreakdown(
        dirichlet=dirichlet,
        divergence=0.0,
        potential=potential,
        total=dirichlet + potential,
    )
