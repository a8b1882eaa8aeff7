from functools import lru_cache

import numpy as np
import pytest

from gldiv.energy import EnergyParams
from gldiv.geometry import BoundaryCurve, fourier_fit_radial, unit_disk
from gldiv.mesh import build_interior_mesh
from gldiv.minimizer import minimize, vortex_ansatz


def ellipse_curve(a=2.0, b=1.0, n_modes=64):
    """Ellipse x^2/a^2 + y^2/b^2 = 1 as a (projected) radial Fourier curve.

    The radial function is analytic so the projection error is ~1e-15 at 64
    modes, far below every tolerance used against it.
    """
    def rho(t):
        return a * b / np.sqrt((b * np.cos(t)) ** 2 + (a * np.sin(t)) ** 2)

    a0, c, s = fourier_fit_radial(rho, n_modes)
    return BoundaryCurve(a0, c, s)


def wavy_curve():
    """rho = 1 + 0.1 cos(3 theta): convex (kappa >= 0), max curvature 200/121."""
    return BoundaryCurve(1.0, cos_coeffs=(0.0, 0.0, 0.1))


@pytest.fixture(scope="session")
def disk():
    return unit_disk()


@pytest.fixture(scope="session")
def ellipse():
    return ellipse_curve()


@pytest.fixture(scope="session")
def wavy():
    return wavy_curve()


@lru_cache(maxsize=None)
def cached_minimizer(domain, ntheta, ns, eps, k=1.0, max_iter=6000):
    """Minimize from the centered vortex ansatz once per parameter set;
    shared across test modules to keep the suite fast."""
    curve = {"disk": unit_disk, "wavy": wavy_curve, "ellipse": ellipse_curve}[domain]()
    mesh = build_interior_mesh(curve, ntheta, ns)
    params = EnergyParams(eps=eps, k=k)
    res = minimize(mesh, vortex_ansatz(mesh, (0.0, 0.0), eps), params, max_iter=max_iter)
    return mesh, res, params
