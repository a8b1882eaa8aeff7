"""Acceptance gate: the eight go/no-go checks for this package.

Each criterion is one test that prints a single visible PASS/FAIL line
(bypassing pytest capture), then asserts.  Criteria 5 and 7 share one
epsilon sweep; criterion 6 reuses the minimizers cached by the extension
tests when the full suite runs.

Run just the gate with:  python3 -m pytest tests/test_acceptance.py -v
"""

import hashlib
import os
import time

import numpy as np
import pytest

from conftest import cached_minimizer, wavy_curve
from gldiv import cli
from gldiv.diagnostics import sweep
from gldiv.energy import EnergyParams, energy, energy_gradient, project_tangential
from gldiv.extension import (
    bump_field,
    distortion,
    ellipticity_audit,
    fold_point,
    reflect_extend,
    reflect_vector,
    remainder_constant,
)
from gldiv.geometry import BoundaryCurve, TangentNormalChart
from gldiv.mesh import build_collar_mesh, build_interior_mesh
from gldiv.minimizer import vortex_ansatz
from gldiv.validators import (
    PolyaParams,
    ansatz_energy_closed_form,
    interior_max_check,
    polya_residual,
)

EPS_SWEEP = (0.1, 0.05, 0.025, 0.0125)


def _report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {n} failed: {detail}"


def _ratio(values):
    return max(values) / min(values)


@pytest.fixture(scope="module")
def sweep_records():
    jobs = int(os.environ.get("GLDIV_JOBS", "4"))
    t0 = time.time()
    records = sweep(BoundaryCurve(1.0), list(EPS_SWEEP), k=1.0, jobs=jobs)
    return records, time.time() - t0


def test_criterion_1_polya_exactness(capsys):
    t0 = time.time()
    p = PolyaParams(k=1.0, beta=1.0, gamma=1.0)
    res_analytic = polya_residual(p, n_points=1000, seed=0)
    mesh = build_interior_mesh(BoundaryCurve(1.0), 64, 32)
    res_discrete = polya_residual(p, mode="discrete", mesh=mesh)
    dt = time.time() - t0
    ok = res_analytic < 1e-12 and res_discrete < 1e-10 and dt < 1.0
    _report(
        capsys, 1, ok,
        f"analytic residual {res_analytic:.2e} (<1e-12), "
        f"discrete 64x32 residual {res_discrete:.2e} (<1e-10), {dt:.2f}s (<1s)",
    )


def test_criterion_2_polya_interior_maximum(capsys):
    t0 = time.time()
    p = PolyaParams(k=1.0, beta=1.0, gamma=1.0)
    rep = interior_max_check(p, 0.4)
    dt = time.time() - t0
    argmax_dist = float(np.hypot(*rep["argmax"]))
    ok = (
        rep["interior"]
        and argmax_dist < 1e-6
        and abs(rep["max"] - 1.0) < 1e-6
        and rep["boundary_max"] < 0.98
        and dt < 5.0
    )
    _report(
        capsys, 2, ok,
        f"argmax at distance {argmax_dist:.1e} from origin, max {rep['max']:.9f}, "
        f"boundary max {rep['boundary_max']:.6f} (<0.98), {dt:.2f}s (<5s)",
    )


def test_criterion_3_ansatz_energy_law(capsys):
    t0 = time.time()
    mesh = build_interior_mesh(BoundaryCurve(1.0), 256, 128)
    rels, divs = [], []
    for eps in (0.1, 0.05):
        u = vortex_ansatz(mesh, (0.0, 0.0), eps)
        eb = energy(mesh, u, EnergyParams(eps=eps))
        exact = ansatz_energy_closed_form(eps).total
        rels.append(abs(eb.total - exact) / exact)
        divs.append(abs(eb.divergence) / eb.total)
    dt = time.time() - t0
    ok = max(rels) < 0.01 and max(divs) < 1e-6 and dt < 30.0
    _report(
        capsys, 3, ok,
        f"rel err {rels[0]:.4%} @ eps=0.1, {rels[1]:.4%} @ eps=0.05 (<1%), "
        f"divergence fraction {max(divs):.1e} (<1e-6), {dt:.1f}s (<30s)",
    )


def test_criterion_4_gradient_gate(capsys):
    t0 = time.time()
    mesh = build_interior_mesh(BoundaryCurve(1.0), 32, 16)
    p = EnergyParams(eps=0.3, k=1.0)
    rng = np.random.default_rng(0)
    u = project_tangential(mesh, rng.uniform(-1, 1, (32, 16, 2)))
    g = energy_gradient(mesh, u, p)
    h = 1e-6
    worst = 0.0
    for _ in range(20):
        d = project_tangential(mesh, rng.standard_normal((32, 16, 2)))
        ep = energy(mesh, project_tangential(mesh, u + h * d), p).total
        em = energy(mesh, project_tangential(mesh, u - h * d), p).total
        fd = (ep - em) / (2 * h)
        an = float(np.sum(g * d))
        worst = max(worst, abs(fd - an) / max(abs(an), 1e-12))
    dt = time.time() - t0
    ok = worst < 1e-6 and dt < 10.0
    _report(
        capsys, 4, ok,
        f"worst rel err {worst:.2e} over 20 directions (<1e-6), {dt:.2f}s (<10s)",
    )


def test_criterion_5_scaling_sweep(capsys, sweep_records):
    records, dt = sweep_records
    sup_ratio = _ratio([r.sup_u for r in records])
    lip_ratio = _ratio([r.eps_lip for r in records])
    combo_ratio = _ratio([r.combo for r in records])
    lg = np.log(1.0 / np.array([r.eps for r in records]))
    slope = float(np.polyfit(lg, [r.e_total for r in records], 1)[0])
    degrees = [r.degree for r in records]
    ok = (
        sup_ratio < 1.10
        and lip_ratio < 1.25
        and abs(slope - np.pi) / np.pi < 0.05
        and combo_ratio < 3.0
        and all(d == 1 for d in degrees)
        and dt < 1800.0
    )
    _report(
        capsys, 5, ok,
        f"sup|u| ratio {sup_ratio:.4f} (<1.10), eps*lip ratio {lip_ratio:.4f} "
        f"(<1.25), slope {slope:.4f} vs pi ({abs(slope - np.pi) / np.pi:.2%}, <5%), "
        f"combo ratio {combo_ratio:.3f} (<3), degrees {degrees} (all 1), "
        f"{dt:.0f}s (<1800s)",
    )


def test_criterion_6_reflection_gluing_suite(capsys):
    t0 = time.time()
    # (a) parity of the reflection extension at mirrored nodes, exact
    mesh, res, params = cached_minimizer("disk", 96, 48, 0.25)
    chart = TangentNormalChart(mesh.curve)
    collar = build_collar_mesh(chart, 96, 24)
    U = reflect_extend(mesh, res.field, collar)
    mj = collar.mirror()
    parity = max(
        float(np.max(np.abs(U.wt - U.wt[:, mj]))),
        float(np.max(np.abs(U.wn + U.wn[:, mj]))),
    )

    # (b) fold idempotence and reflection involution, exact
    phi = np.linspace(0.0, 2 * np.pi, 37)[:, None]
    pts = (1.0 + np.linspace(0.01, 0.2, 37)[:, None]) * np.stack(
        [np.cos(phi[:, 0]), np.sin(phi[:, 0])], -1
    )
    once = fold_point(chart, pts)
    idem = np.array_equal(fold_point(chart, once), once)
    rng = np.random.default_rng(1)
    z = rng.standard_normal(pts.shape)
    # the involution composes frame dot products, so its floor is rounding
    invol_err = float(
        np.max(np.abs(reflect_vector(chart, pts, reflect_vector(chart, pts, z)) - z))
    )
    invol = invol_err < 1e-14

    # (c) disk distortion at exterior distance 0.1
    d_err = abs(distortion(chart, 0.0, -0.1) - 11.0 / 9.0)

    # (d) Legendre-Hadamard audit on a non-circular chart, 10^4 samples
    wavy_chart = TangentNormalChart(wavy_curve())
    audit = ellipticity_audit(wavy_chart, k=1.0, n_samples=10000, seed=0)

    # (e) interior-supported test fields: remainder -> 0 at order >= 1
    # (f) full-collar remainder constant refinement-stable
    wparams = EnergyParams(eps=0.25)

    def interior_bumps(m):
        L, r1 = m.period, m.chart.r1
        return [
            bump_field(m, (c1, 0.5 * r1), (L / 8.0, 0.35 * r1), direction=d)
            for c1 in (0.0, 0.5 * L)
            for d in ("tau", "nu")
        ]

    c_int, c_full = [], []
    for (ntheta, ns), (n1, n2) in (((64, 48), (128, 32)), ((128, 96), (256, 64))):
        m2, r2, _ = cached_minimizer("disk", ntheta, ns, 0.25, max_iter=4000)
        col = build_collar_mesh(TangentNormalChart(m2.curve), n1, n2)
        U2 = reflect_extend(m2, r2.field, col)
        c_int.append(remainder_constant(U2, wparams, fields=interior_bumps(col)))
        c_full.append(remainder_constant(U2, wparams))
    int_order = np.log2(c_int[0] / c_int[1])  # resolution doubles between runs
    stable = c_full[1] <= 1.3 * c_full[0]

    dt = time.time() - t0
    ok = (
        parity == 0.0
        and idem
        and invol
        and d_err < 1e-12
        and audit["violations"] == 0
        and int_order >= 1.0
        and stable
        and dt < 300.0
    )
    _report(
        capsys, 6, ok,
        f"parity max {parity:.1e} (exact), fold idempotent {idem}, reflection "
        f"involution err {invol_err:.1e} (<1e-14), distortion err {d_err:.1e} "
        f"(<1e-12), LH violations "
        f"{audit['violations']}/10000, interior remainder order {int_order:.2f} "
        f"(>=1), full remainder {c_full[0]:.2e}->{c_full[1]:.2e} (stable {stable}), "
        f"{dt:.0f}s (<300s)",
    )


def test_criterion_7_rescaled_window_audit(capsys, sweep_records):
    records, _ = sweep_records
    center_ratio = _ratio([r.l4_center for r in records])
    boundary_ratio = _ratio([r.l4_boundary for r in records])
    ok = center_ratio < 3.0 and boundary_ratio < 3.0
    _report(
        capsys, 7, ok,
        f"L4 window norm max/min: center {center_ratio:.3f}, "
        f"boundary {boundary_ratio:.3f} (both <3)",
    )


def test_criterion_8_reproducibility(capsys, tmp_path, monkeypatch):
    monkeypatch.delenv("GLDIV_JOBS", raising=False)
    digests = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        rc = cli.main(
            ["sweep", "--eps", "0.1,0.05", "--jobs", "1", "--out", str(out)]
        )
        assert rc == 0
        digests.append(
            hashlib.sha256((out / "sweep.csv").read_bytes()).hexdigest()
        )
    ok = digests[0] == digests[1]
    _report(
        capsys, 8, ok,
        f"sweep.csv sha256 run1 {digests[0][:16]}... == run2 {digests[1][:16]}...",
    )
