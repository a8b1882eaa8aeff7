"""Reflection-extension of tangential fields across a curved boundary.

A field u on the domain side of the collar is extended to the outside by
folding points across the boundary and reflecting the vector values in the
boundary frame of the foot point:

    sigma(x)  = x                        inside,
                X(y1, -y2)               outside  (x = X(y1, y2), y2 < 0),
    R(x, z)   = (z . tau) tau - (z . nu) nu        at the foot of x,
    U(x)      = R(x, u(sigma(x))).

In chart components the extension is even in y2 for the tangential part and
odd for the normal part; ``reflect_extend`` stores the frame components with
that parity holding bitwise on mirrored node pairs.

Sign conventions for the pulled-back geometry on the collar (y2 signed,
kappa >= 0 on convex parts):

    J         = 1 - y2 kappa          physical chart Jacobian, both sides
    Jm        = 1 - |y2| kappa        Jacobian at the mirror image
    D         = J / Jm                distortion of sigma (1 inside)
    det_sigma = Jm / J = 1/D          |det grad sigma| (1 inside)

``grad sigma`` at an exterior point is D tau tau' - nu nu' in the foot frame,
so grad sigma grad sigma' = D^2 tau tau' + nu nu' and the glued inner product
<a, b> = det_sigma a' (grad sigma grad sigma') b has matrix
D tau tau' + D^{-1} nu nu' (identity inside). The first chart-frame diagonal
entry of the pulled-back metric is 1/(1 - |y2| kappa)^2 (``m_diag``).

``div_j`` realizes the glued divergence with metric-compatible derivatives:

    div_j(w) = sqrt(det_sigma) [ d_y1(w_tau)/Jm + d_y2(w_nu) - sign(y2) kappa w_nu / Jm ]

On the domain side (Jm = J) this IS the exact curvilinear divergence; on the
outside it reproduces the disk polar expressions to leading order, and the
gluing identity  div_j(U)(x) = sqrt(det_sigma(x)) div_j(u)(sigma(x))  holds
node-by-node on mirror pairs, which is tested to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import _as_points
from .mesh import CollarMesh


@dataclass
class CollarField:
    """Vector field on a CollarMesh: Cartesian values plus frame components.

    ``wt``/``wn`` (tangential/normal chart components) are the primary data
    for the glued operators; ``values`` is their Cartesian assembly.
    """

    mesh: CollarMesh
    values: np.ndarray
    wt: np.ndarray
    wn: np.ndarray

    @classmethod
    def from_frame(cls, mesh, wt, wn):
        return cls(mesh, mesh.from_frame_components(wt, wn), np.asarray(wt), np.asarray(wn))

    @classmethod
    def from_cartesian(cls, mesh, values):
        wt, wn = mesh.frame_components(np.asarray(values, dtype=float))
        return cls(mesh, np.asarray(values, dtype=float), wt, wn)


def fold_point(chart, x):
    """sigma: fold exterior collar points across the boundary; fix interior ones.

    Interior inputs are returned unchanged (bitwise), so the map is
    idempotent by construction.
    """
    pts, single = _as_points(x)
    y1, y2 = chart.to_chart(pts)
    out = pts.copy()
    outside = y2 < 0
    if np.any(outside):
        out[outside] = chart.to_cartesian(y1[outside], -y2[outside])
    return out[0] if single else out


def reflect_vector(chart, x, z):
    """R(x, .): flip the normal component of z in the boundary frame at the
    foot point of x (an involution)."""
    pts, single = _as_points(x)
    zz, _ = _as_points(z)
    if zz.shape[0] != pts.shape[0]:
        raise ValueError("x and z must carry the same number of rows")
    y1, _ = chart.to_chart(pts)
    tau, nu, _ = chart.curve.frame_theta(chart.curve.theta_of_arclength(y1))
    zt = (zz * tau).sum(-1)
    zn = (zz * nu).sum(-1)
    out = zt[:, None] * tau - zn[:, None] * nu
    return out[0] if single else out


def distortion(chart, y1, y2):
    """D = J/Jm: volume distortion of the fold (1 inside; (1+|y2|k)/(1-|y2|k)
    outside on convex parts)."""
    y2 = np.asarray(y2, dtype=float)
    kap = chart.curve.curvature_theta(chart.curve.theta_of_arclength(y1))
    return (1.0 - y2 * kap) / (1.0 - np.abs(y2) * kap)


@dataclass
class GluedMetric:
    """Pulled-back metric data at one or more collar points."""

    m_diag: np.ndarray    # chart-frame diagonal (1/(1-|y2|k)^2, 1)
    matrix: np.ndarray    # Cartesian grad sigma grad sigma^T = D^2 tau tau^T + nu nu^T
    det_sigma: np.ndarray


def glued_metric(chart, y1, y2):
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    th = chart.curve.theta_of_arclength(y1)
    tau, nu, kap = chart.curve.frame_theta(th)
    J = 1.0 - y2 * kap
    Jm = 1.0 - np.abs(y2) * kap
    D = J / Jm
    m_diag = np.stack([1.0 / Jm**2, np.ones_like(Jm)], axis=-1)
    outer_t = tau[..., :, None] * tau[..., None, :]
    outer_n = nu[..., :, None] * nu[..., None, :]
    matrix = (D**2)[..., None, None] * outer_t + outer_n
    return GluedMetric(m_diag, matrix, Jm / J)


def reflect_extend(interior_mesh, field, collar_mesh):
    """Extend an interior nodal field to the full collar by fold-and-reflect.

    Every collar node (interior or exterior) takes its value from the single
    interior sample at X(y1, |y2|); mirrored pairs therefore share the same
    tangential component and carry opposite normal components bitwise.
    """
    m = collar_mesh
    half = m.n2 // 2
    pts = m.x[:, half:, :].reshape(-1, 2)
    uh = interior_mesh.interpolate(np.asarray(field, dtype=float), pts)
    uh = uh.reshape(m.n1, half, 2)
    ut = (uh * m.tau[:, None, :]).sum(-1)
    un = (uh * m.nu[:, None, :]).sum(-1)

    wt = np.empty((m.n1, m.n2))
    wn = np.empty((m.n1, m.n2))
    wt[:, half:] = ut
    wt[:, :half] = ut[:, ::-1]
    wn[:, half:] = un
    wn[:, :half] = -un[:, ::-1]
    return CollarField.from_frame(m, wt, wn)


def div_j(collar_field):
    """Glued divergence (see module docstring); shape (n1, n2)."""
    cf = collar_field
    m = cf.mesh
    cnu = -np.sign(m.y2)[None, :] * m.kappa[:, None] / m.Jm
    bracket = m.d_1(cf.wt) / m.Jm + m.d_2(cf.wn) + cnu * cf.wn
    return np.sqrt(m.det_sigma) * bracket


def even_part(collar_field):
    """Symmetrize to the even class: tangential part averaged across mirror
    pairs, normal part anti-averaged (so it vanishes on the boundary)."""
    cf = collar_field
    mj = cf.mesh.mirror()
    wt = 0.5 * (cf.wt + cf.wt[:, mj])
    wn = 0.5 * (cf.wn - cf.wn[:, mj])
    return CollarField.from_frame(cf.mesh, wt, wn)


def legendre_hadamard_form(chart, y1, y2, k, xi, eta):
    """Rank-one ellipticity form of the glued operator at a collar point.

    Evaluates, with q = 1 + y2 kappa(y1) (y2 signed):

        (1+k) xi1^2 eta1^2 / q^2 + xi1^2 eta2^2 / q^2
        + 2 k xi1 xi2 eta1 eta2 / q + xi2^2 eta1^2 + (1+k) xi2^2 eta2^2

    which reduces to |xi|^2 |eta|^2 + k (xi.eta)^2 on the boundary and is
    bounded below by min{1/q^2, 1} |xi|^2 |eta|^2 for k >= 0.
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    kap = chart.curve.curvature_theta(chart.curve.theta_of_arclength(y1))
    q = 1.0 + np.asarray(y2, dtype=float) * kap
    x1, x2 = xi[..., 0], xi[..., 1]
    e1, e2 = eta[..., 0], eta[..., 1]
    return (
        (1.0 + k) * x1**2 * e1**2 / q**2
        + x1**2 * e2**2 / q**2
        + 2.0 * k * x1 * x2 * e1 * e2 / q
        + x2**2 * e1**2
        + (1.0 + k) * x2**2 * e2**2
    )


def ellipticity_audit(chart, k=1.0, n_samples=10000, seed=0):
    """Sample the rank-one form against the bound min{1/(1+|y2|k)^2, 1}.

    Returns {"samples", "min_ratio", "violations"}; on convex charts the
    ratio is >= 1 up to rounding.
    """
    rng = np.random.default_rng(seed)
    L = chart.curve.perimeter
    y1 = rng.uniform(0.0, L, n_samples)
    y2 = rng.uniform(-chart.r1, chart.r1, n_samples)
    ang = rng.uniform(0.0, 2 * np.pi, (2, n_samples))
    xi = np.stack([np.cos(ang[0]), np.sin(ang[0])], axis=-1)
    eta = np.stack([np.cos(ang[1]), np.sin(ang[1])], axis=-1)
    form = legendre_hadamard_form(chart, y1, y2, k, xi, eta)
    kap = chart.curve.curvature_theta(chart.curve.theta_of_arclength(y1))
    bound = np.minimum(1.0 / (1.0 + np.abs(y2) * kap) ** 2, 1.0)
    ratio = form / bound
    return {
        "samples": int(n_samples),
        "min_ratio": float(np.min(ratio)),
        "violations": int(np.sum(ratio < 1.0 - 1e-12)),
    }


# -- glued weak form ----------------------------------------------------------

def bump_field(collar_mesh, center, radius, direction="tau"):
    """Tensor-product bump test field in chart coordinates.

    b(t) = (1 - t^2)^3 on |t| < 1 in each coordinate (C^2, compact support);
    periodic distance in y1. ``direction`` selects the frame component.
    """
    m = collar_mesh
    c1, c2 = center
    r1b, r2b = radius
    d1 = np.abs(m.y1 - c1)
    d1 = np.minimum(d1, m.period - d1) / r1b
    d2 = np.abs(m.y2 - c2) / r2b
    b1 = np.where(d1 < 1.0, (1.0 - d1**2) ** 3, 0.0)
    b2 = np.where(d2 < 1.0, (1.0 - d2**2) ** 3, 0.0)
    prof = b1[:, None] * b2[None, :]
    zero = np.zeros_like(prof)
    if direction == "tau":
        return CollarField.from_frame(m, prof, zero)
    if direction == "nu":
        return CollarField.from_frame(m, zero, prof)
    raise ValueError(f"direction must be 'tau' or 'nu', got {direction!r}")


def standard_test_fields(collar_mesh):
    """The 16 deterministic bump fields used by the weak-form audit:
    4 tangential centers x 2 normal offsets x 2 frame directions."""
    m = collar_mesh
    L = m.period
    r1 = m.chart.r1
    fields = []
    for c1 in (0.0, 0.25 * L, 0.5 * L, 0.75 * L):
        for c2 in (-0.25 * r1, 0.25 * r1):
            for direction in ("tau", "nu"):
                fields.append(
                    bump_field(
                        m, (c1, c2), (L / 8.0, 0.35 * r1), direction=direction
                    )
                )
    return fields


@dataclass
class WeakFormParts:
    grad_term: float
    div_term: float
    reaction_interior: float
    reaction_exterior: float

    @property
    def residual(self):
        return (
            self.grad_term
            + self.div_term
            - self.reaction_interior
            - self.reaction_exterior
        )


def _check_supported(v):
    edge = np.abs(v.values[:, [0, -1], :])
    if np.max(edge) > 1e-12:
        raise ValueError(
            "test field must vanish on the outer collar rows "
            f"(max edge value {np.max(edge):.3e})"
        )


def weak_glued_parts(U, v, params):
    """Terms of the glued weak form tested against v (compactly supported).

    grad term:      sum_c int det_sigma (grad U_c)' (grad sigma grad sigma') grad v_c
    div term:       k int det_sigma^... div_j(U) div_j(v)   (metric folded into div_j)
    reaction terms: int U.v (1 - |U|^2)/eps^2, exterior side weighted by det_sigma.
    """
    m = U.mesh
    if v.mesh is not m:
        raise ValueError("U and v must live on the same collar mesh")
    _check_supported(v)
    w = m.weights
    tau, nu = m.tau[:, None, :], m.nu[:, None, :]

    grad_term = 0.0
    for c in range(2):
        gU = m.scalar_gradient(U.values[..., c])
        gv = m.scalar_gradient(v.values[..., c])
        tu, nuu = (gU * tau).sum(-1), (gU * nu).sum(-1)
        tv, nuv = (gv * tau).sum(-1), (gv * nu).sum(-1)
        grad_term += float(np.sum(w * (m.D * tu * tv + nuu * nuv / m.D)))

    div_term = params.k * float(np.sum(w * div_j(U) * div_j(v)))

    uv = U.wt * v.wt + U.wn * v.wn
    pre = (1.0 - (U.wt**2 + U.wn**2)) / params.eps**2
    inside = m.interior * np.ones_like(w, dtype=bool)
    r_in = float(np.sum((w * uv * pre)[inside]))
    r_ext = float(np.sum((w * m.det_sigma * uv * pre)[~inside]))
    return WeakFormParts(grad_term, div_term, r_in, r_ext)


def weak_glued_residual(U, v, params):
    """Signed remainder R(v) of the glued weak form (0 for an exact glued
    solution; O(h) for extended discrete minimizers)."""
    return weak_glued_parts(U, v, params).residual


def field_norms(cf):
    """(L2 norm, H1 seminorm) of a collar field under the collar quadrature."""
    m = cf.mesh
    l2 = np.sqrt(m.integrate((cf.values**2).sum(-1)))
    h1 = 0.0
    for c in range(2):
        g = m.scalar_gradient(cf.values[..., c])
        h1 += m.integrate((g**2).sum(-1))
    return float(l2), float(np.sqrt(h1))


def remainder_constant(U, params, fields=None):
    """Estimated growth constant of the weak remainder:

        C = max_v |R(v)| / ((1 + ||U|| + ||grad U||) ||v||_{W^{1,2}})

    over the standard bump fields; finite and refinement-stable when the
    extension machinery is consistent.
    """
    if fields is None:
        fields = standard_test_fields(U.mesh)
    uU = 1.0 + sum(field_norms(U))
    best = 0.0
    for v in fields:
        l2, h1 = field_norms(v)
        vnorm = np.sqrt(l2**2 + h1**2)
        best = max(best, abs(weak_glued_residual(U, v, params)) / (uU * vnorm))
    return float(best)
