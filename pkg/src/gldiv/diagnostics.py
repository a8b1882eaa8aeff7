"""Solution diagnostics and the epsilon-sweep driver.

``sup_norm`` / ``lipschitz_proxy`` / ``winding_number`` quantify the pointwise
bound, the interior gradient scale and the vortex count of a minimizer;
``rescale_window`` / ``l4_norm`` measure the field in core-scale windows (the
quantity expected to stay bounded above and below along eps -> 0).

``sweep`` minimizes a family of eps values on a standard mesh policy and
returns flat per-case records.  Cases are independent and each one is computed
by the same deterministic code path whatever the pool size, so the records --
and any file written from them -- do not depend on the ``jobs`` setting.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .energy import EnergyParams
from .geometry import TWO_PI, BoundaryCurve
from .mesh import build_interior_mesh, discrete_gradient
from .minimizer import minimize, vortex_ansatz

#: Column order of the delimited sweep output (frozen schema; extra record
#: fields such as convergence flags and window norms are not part of it).
CSV_COLUMNS = (
    "eps",
    "sup_u",
    "eps_lip",
    "e_dir",
    "e_div",
    "e_pot",
    "e_total",
    "excess",
    "combo",
    "degree",
    "iters",
)


def sup_norm(field):
    """Maximum Euclidean magnitude of a nodal vector field."""
    field = np.asarray(field, dtype=float)
    return float(np.sqrt((field**2).sum(-1)).max())


def lipschitz_proxy(mesh, field):
    """Maximum Frobenius norm of the discrete Jacobian, excluding the
    boundary row (the one-sided stencil there would otherwise contaminate
    the interior gradient-scale estimate)."""
    g = discrete_gradient(mesh, field)
    frob = np.sqrt((g**2).sum((-2, -1)))
    return float(frob[:, :-1].max())


def winding_number(mesh, field, offset=None, n_samples=1024):
    """Degree of the field along the closed offset contour gamma + offset nu.

    The default offset is half the collar half-width 0.25/max|kappa|, deep
    enough inside that minimizers have |u| close to 1 there. Raises
    ValueError if min |u| < 0.5 on the contour (angle not trustworthy).
    """
    curve = mesh.curve
    if offset is None:
        offset = 0.5 * (0.25 / curve.max_curvature)
    th = np.arange(n_samples) * (TWO_PI / n_samples)
    _, nu, _ = curve.frame_theta(th)
    pts = curve.gamma(th) + offset * nu
    u = mesh.interpolate(field, pts)
    mag = np.hypot(u[:, 0], u[:, 1])
    if mag.min() < 0.5:
        raise ValueError(
            f"winding number not well-defined: min |u| = {mag.min():.3f} < 0.5 "
            "on the offset contour"
        )
    ang = np.arctan2(u[:, 1], u[:, 0])
    steps = np.diff(np.concatenate([ang, ang[:1]]))
    steps = (steps + np.pi) % TWO_PI - np.pi
    return int(round(steps.sum() / TWO_PI))


# -- core-scale windows --------------------------------------------------------

@dataclass
class WindowSample:
    """Field sampled on the rescaled grid x = center + eps z, z in [-hw, hw]^2.
    Points outside the closed domain are masked (values zeroed)."""

    z: np.ndarray        # (n,) rescaled 1D grid
    values: np.ndarray   # (n, n, 2)
    inside: np.ndarray   # (n, n) bool
    dz: float


def rescale_window(mesh, field, center, eps, half_width=3.0, n=49, ball=False):
    """``ball=True`` restricts the mask to |z| <= half_width (the rescaled
    ball) instead of the full square."""
    z = np.linspace(-half_width, half_width, n)
    Z1, Z2 = np.meshgrid(z, z, indexing="ij")
    pts = np.stack(
        [center[0] + eps * Z1, center[1] + eps * Z2], axis=-1
    ).reshape(-1, 2)
    _, s = mesh.chart_coords(pts)
    inside = s <= 1.0
    if ball:
        inside &= (Z1**2 + Z2**2).reshape(-1) <= half_width**2
    vals = np.zeros_like(pts)
    if np.any(inside):
        vals[inside] = mesh.interpolate(field, pts[inside])
    return WindowSample(z, vals.reshape(n, n, 2), inside.reshape(n, n), z[1] - z[0])


def l4_norm(window):
    """Scale-invariant window norm (sum |u|^4 dz^2)^(1/4) in the rescaled
    coordinates; masked points contribute zero."""
    mag4 = (window.values**2).sum(-1) ** 2
    return float((mag4.sum() * window.dz**2) ** 0.25)


# -- sweep driver --------------------------------------------------------------

@dataclass
class SweepRecord:
    """Flat per-eps diagnostics. ``row`` selects the frozen delimited schema;
    ``converged`` and the window norms are extra fields for programmatic use."""

    eps: float
    sup_u: float
    eps_lip: float
    e_dir: float
    e_div: float
    e_pot: float
    e_total: float
    excess: float       # e_total - pi log(1/eps)
    combo: float        # e_div + 0.5 e_pot (the eps-uniformly bounded combination)
    degree: int
    iters: int
    converged: bool
    l4_center: float
    l4_boundary: float

    def row(self):
        return {c: getattr(self, c) for c in CSV_COLUMNS}


def sweep_mesh_sizes(eps, ntheta=64):
    """Standard sweep mesh: radial resolution tracks the core scale."""
    return int(ntheta), max(64, int(np.ceil(4.0 / eps)))


def run_case(curve, eps, k=1.0, ntheta=64, ns=None, max_iter=8000, tol_factor=1e-6):
    """Minimize a single eps from the centered vortex ansatz on the standard
    sweep mesh; returns (record, mesh, result)."""
    if ns is None:
        _, ns = sweep_mesh_sizes(eps, ntheta)
    mesh = build_interior_mesh(curve, ntheta, ns)
    params = EnergyParams(eps=eps, k=k)
    res = minimize(
        mesh,
        vortex_ansatz(mesh, (0.0, 0.0), eps),
        params,
        max_iter=max_iter,
        tol_factor=tol_factor,
    )
    u = res.field
    eb = res.energy
    boundary_pt = curve.gamma(np.array([0.0]))[0]
    record = SweepRecord(
        eps=float(eps),
        sup_u=sup_norm(u),
        eps_lip=float(eps) * lipschitz_proxy(mesh, u),
        e_dir=eb.dirichlet,
        e_div=eb.divergence,
        e_pot=eb.potential,
        e_total=eb.total,
        excess=float(eb.total - np.pi * np.log(1.0 / eps)),
        combo=eb.divergence + 0.5 * eb.potential,
        degree=winding_number(mesh, u),
        iters=res.iterations,
        converged=res.converged,
        l4_center=l4_norm(
            rescale_window(mesh, u, (0.0, 0.0), eps, half_width=1.0, ball=True)
        ),
        l4_boundary=l4_norm(
            rescale_window(mesh, u, boundary_pt, eps, half_width=1.0, ball=True)
        ),
    )
    return record, mesh, res


def resolve_jobs(jobs=None):
    """Worker count: explicit argument, else the GLDIV_JOBS environment
    variable, else serial."""
    if jobs is None:
        jobs = int(os.environ.get("GLDIV_JOBS", "0")) or 1
    return max(1, int(jobs))


def _sweep_worker(task):
    a0, cos_coeffs, sin_coeffs, eps, k, ntheta, max_iter = task
    curve = BoundaryCurve(a0, cos_coeffs, sin_coeffs)
    record, _, _ = run_case(curve, eps, k=k, ntheta=ntheta, max_iter=max_iter)
    return record


def sweep(curve, eps_values, k=1.0, ntheta=64, max_iter=8000, jobs=None, on_record=None):
    """One SweepRecord per eps, in the order given.

    ``on_record`` is called with each record as it completes (in eps order),
    so callers can flush partial results if a later case fails.
    """
    tasks = [
        (
            curve.a0,
            tuple(curve.cos_coeffs),
            tuple(curve.sin_coeffs),
            float(e),
            float(k),
            int(ntheta),
            int(max_iter),
        )
        for e in eps_values
    ]
    jobs = resolve_jobs(jobs)
    records = []

    def collect(iterator):
        for rec in iterator:
            records.append(rec)
            if on_record is not None:
                on_record(rec)
        return records

    if jobs == 1 or len(tasks) <= 1:
        return collect(_sweep_worker(t) for t in tasks)
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return collect(pool.map(_sweep_worker, tasks))
