"""Command-line front end.

Subcommands: ``minimize | sweep | extend-check | polya | ansatz | mesh-info``.
Every run writes its artifacts (CSV/JSON plus illustrative figures) into an
output directory together with a ``manifest.json`` recording the resolved
configuration and a sha256 checksum of each artifact.

Exit codes: 0 success; 2 bad configuration or parameters (a machine-readable
JSON record goes to stderr); 3 numerical failure (partial records are flushed
first).  All randomness is seeded from the configuration (default seed 0), so
repeated runs with the same settings and ``--jobs 1`` produce byte-identical
delimited output.  The ``GLDIV_JOBS`` environment variable overrides
``--jobs``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, reporting
from .config import DEFAULTS, ConfigError, load_config, validate_config
from .diagnostics import (
    lipschitz_proxy,
    run_case,
    sup_norm,
    sweep,
    sweep_mesh_sizes,
    winding_number,
)
from .energy import EnergyParams, energy
from .extension import (
    div_j,
    ellipticity_audit,
    reflect_extend,
    remainder_constant,
)
from .geometry import TangentNormalChart
from .mesh import build_collar_mesh, build_interior_mesh, integrate
from .minimizer import NumericalError, minimize, random_init, vortex_ansatz
from .validators import (
    PolyaParams,
    ansatz_energy_closed_form,
    interior_max_check,
    polya_field,
    polya_residual,
)


def _emit_error(record):
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def _resolve_config(args):
    """Config file (if any) with per-flag overrides; defaults to the unit disk."""
    if getattr(args, "config", None):
        cfg = load_config(args.config)
    else:
        cfg = validate_config({"domain": {"a0": 1.0}})
    for name in ("ntheta", "ns", "k", "seed", "max_iter", "tol_factor"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, name, v)
    if getattr(args, "eps", None) is not None and not isinstance(args.eps, str):
        cfg.eps = args.eps
    return cfg


def _out_dir(args, cfg, command):
    out = getattr(args, "out", None) or cfg.output_dir or f"gldiv-out/{command}"
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _resolve_jobs(args):
    env = os.environ.get("GLDIV_JOBS")
    if env:
        return max(1, int(env))
    return max(1, args.jobs)


def _need_eps(cfg):
    if cfg.eps is None:
        raise ConfigError("this command needs eps (flag --eps or config key 'eps')")
    if not cfg.eps > 0:
        raise ConfigError(f"eps must be positive, got {cfg.eps}")
    return float(cfg.eps)


# -- subcommand handlers ---------------------------------------------------------

def cmd_minimize(args):
    cfg = _resolve_config(args)
    eps = _need_eps(cfg)
    out = _out_dir(args, cfg, "minimize")
    curve = cfg.curve()
    mesh = build_interior_mesh(curve, cfg.ntheta, cfg.ns)
    params = EnergyParams(eps=eps, k=cfg.k)
    if args.init == "ansatz":
        init = vortex_ansatz(mesh, (0.0, 0.0), eps)
    else:
        init = random_init(mesh, seed=cfg.seed)
    res = minimize(
        mesh, init, params, max_iter=cfg.max_iter, tol_factor=cfg.tol_factor
    )
    try:
        degree = winding_number(mesh, res.field)
    except ValueError:
        degree = None

    reporting.write_field_csv(out / "field.csv", mesh, res.field)
    reporting.write_history_csv(out / "history.csv", res.energy_history)
    result = {
        "eps": eps,
        "k": cfg.k,
        "ntheta": cfg.ntheta,
        "ns": cfg.ns,
        "init": args.init,
        "seed": cfg.seed,
        "energy": res.energy.as_dict(),
        "iterations": res.iterations,
        "converged": res.converged,
        "grad_norm": res.grad_norm,
        "degree": degree,
        "sup_u": sup_norm(res.field),
        "eps_lip": eps * lipschitz_proxy(mesh, res.field),
    }
    reporting.write_json(out / "result.json", result)
    reporting.field_figure(out / "field.png", mesh, res.field, title=f"eps={eps}")
    reporting.convergence_figure(out / "convergence.png", res.energy_history)
    reporting.write_manifest(
        out,
        "minimize",
        cfg.resolved(),
        ["field.csv", "history.csv", "result.json", "field.png", "convergence.png"],
    )
    print(
        f"minimize: eps={eps} energy={res.energy.total:.6f} "
        f"iterations={res.iterations} converged={res.converged} degree={degree}"
    )
    return 0


def _parse_eps_list(args, cfg):
    if args.eps:
        try:
            values = [float(tok) for tok in args.eps.split(",") if tok.strip()]
        except ValueError as err:
            raise ConfigError(f"bad --eps list {args.eps!r}: {err}") from None
    elif cfg.eps_list:
        values = [float(e) for e in cfg.eps_list]
    else:
        raise ConfigError(
            "sweep needs eps values (flag --eps 0.1,0.05,... or config 'eps_list')"
        )
    if not values or any(e <= 0 for e in values):
        raise ConfigError(f"eps values must be positive, got {values}")
    return values


def cmd_sweep(args):
    cfg = _resolve_config(args)
    eps_values = _parse_eps_list(args, cfg)
    out = _out_dir(args, cfg, "sweep")
    jobs = _resolve_jobs(args)
    # the sweep policy picks ns per eps; ntheta: flag > config mesh > 64
    if args.ntheta is not None:
        ntheta = args.ntheta
    elif "mesh" in cfg.raw and "ntheta" in cfg.raw["mesh"]:
        ntheta = cfg.ntheta
    else:
        ntheta = 64
    # keep the manifest honest: ns is chosen per eps by sweep_mesh_sizes
    cfg.ntheta, cfg.ns = ntheta, None
    cfg.eps_list = eps_values
    curve = cfg.curve()

    partial = []
    try:
        records = sweep(
            curve,
            eps_values,
            k=cfg.k,
            ntheta=ntheta,
            max_iter=cfg.max_iter,
            jobs=jobs,
            on_record=partial.append,
        )
    except NumericalError as err:
        reporting.write_sweep_csv(out / "sweep.csv", partial)
        record = {
            "error": "numerical",
            "message": str(err),
            "completed": [r.eps for r in partial],
            "requested": eps_values,
        }
        reporting.write_json(out / "error.json", record)
        reporting.write_manifest(
            out, "sweep", cfg.resolved(), ["sweep.csv", "error.json"]
        )
        _emit_error(record)
        return 3

    reporting.write_sweep_csv(out / "sweep.csv", records)
    lg = np.log(1.0 / np.array(eps_values))
    totals = np.array([r.e_total for r in records])
    slope = float(np.polyfit(lg, totals, 1)[0]) if len(records) >= 2 else None
    reporting.write_json(
        out / "sweep.json",
        {
            "k": cfg.k,
            "ntheta": ntheta,
            "jobs": jobs,
            "energy_slope_vs_log": slope,
            "records": [r.__dict__ for r in records],
        },
    )
    reporting.sweep_figure(out / "sweep.png", records)
    reporting.write_manifest(
        out, "sweep", cfg.resolved(), ["sweep.csv", "sweep.json", "sweep.png"]
    )
    degrees = [r.degree for r in records]
    print(
        f"sweep: {len(records)} cases, slope={slope if slope is None else round(slope, 4)} "
        f"degrees={degrees} jobs={jobs}"
    )
    return 0


def cmd_extend_check(args):
    cfg = _resolve_config(args)
    eps = _need_eps(cfg)
    out = _out_dir(args, cfg, "extend-check")
    curve = cfg.curve()
    mesh = build_interior_mesh(curve, cfg.ntheta, cfg.ns)
    params = EnergyParams(eps=eps, k=cfg.k)
    res = minimize(
        mesh,
        vortex_ansatz(mesh, (0.0, 0.0), eps),
        params,
        max_iter=cfg.max_iter,
        tol_factor=cfg.tol_factor,
    )
    chart = TangentNormalChart(curve)
    collar = build_collar_mesh(chart, args.n1, args.n2)
    U = reflect_extend(mesh, res.field, collar)

    mj = collar.mirror()
    parity_t = float(np.max(np.abs(U.wt - U.wt[:, mj])))
    parity_n = float(np.max(np.abs(U.wn + U.wn[:, mj])))
    dj = div_j(U)
    ext = ~(collar.interior * np.ones_like(dj, dtype=bool))
    gluing = float(np.max(np.abs(dj - np.sqrt(collar.det_sigma) * dj[:, mj])[ext]))
    audit = ellipticity_audit(chart, k=cfg.k, n_samples=args.samples, seed=cfg.seed)
    c_rem = remainder_constant(U, params)

    report = {
        "eps": eps,
        "k": cfg.k,
        "interior_mesh": [cfg.ntheta, cfg.ns],
        "collar": {
            "n1": args.n1,
            "n2": args.n2,
            "r0": chart.r0,
            "r1": chart.r1,
        },
        "minimize": {"iterations": res.iterations, "converged": res.converged},
        "parity_max": {"tangential": parity_t, "normal": parity_n},
        "gluing_identity_max": gluing,
        "ellipticity": audit,
        "remainder_constant": c_rem,
    }
    reporting.write_json(out / "extend.json", report)
    reporting.write_extension_csv(out / "extension.csv", U)
    reporting.collar_figure(
        out / "extension.png", collar, dj, title="glued divergence of the extension"
    )
    reporting.write_manifest(
        out,
        "extend-check",
        cfg.resolved(),
        ["extend.json", "extension.csv", "extension.png"],
    )
    print(
        f"extend-check: parity=({parity_t:.1e},{parity_n:.1e}) "
        f"gluing={gluing:.1e} ellipticity_violations={audit['violations']} "
        f"remainder_constant={c_rem:.3e}"
    )
    return 0


def cmd_polya(args):
    try:
        p = PolyaParams(k=args.k, beta=args.beta, gamma=args.gamma, alpha=args.alpha)
        field = polya_field(p)
    except ValueError as err:
        raise ConfigError(f"bad parameters: {err}") from err
    if args.radius <= 0:
        raise ConfigError(f"radius must be positive, got {args.radius}")
    out = Path(args.out or "gldiv-out/polya")
    out.mkdir(parents=True, exist_ok=True)

    report = interior_max_check(p, args.radius)
    mesh = build_interior_mesh(validate_config({"domain": {"a0": 1.0}}).curve(), 64, 32)
    report["residuals"] = {
        "analytic": polya_residual(p),
        "discrete_64x32": polya_residual(p, mode="discrete", mesh=mesh),
    }
    report["params"] = {
        "k": p.k,
        "beta": p.beta,
        "gamma": p.gamma,
        "alpha": p.alpha,
        "radius": args.radius,
    }
    reporting.write_json(out / "polya.json", report)
    reporting.polya_figure(out / "polya.png", field, args.radius, report)
    reporting.write_manifest(
        out,
        "polya",
        report["params"],
        ["polya.json", "polya.png"],
    )
    print(
        f"polya: interior={report['interior']} max={report['max']:.6f} "
        f"boundary_max={report['boundary_max']:.6f} "
        f"residual={report['residuals']['analytic']:.2e}"
    )
    return 0


def cmd_ansatz(args):
    cfg = _resolve_config(args)
    eps = _need_eps(cfg)
    if not eps < 1.0:
        raise ConfigError(f"the closed form needs eps < 1, got {eps}")
    out = _out_dir(args, cfg, "ansatz")
    # the quadrature comparison is only meaningful on a fine grid, so the
    # fallback here is finer than the global default
    if args.ntheta is None and "mesh" not in cfg.raw:
        cfg.ntheta, cfg.ns = 256, 128
    mesh = build_interior_mesh(cfg.curve(), cfg.ntheta, cfg.ns)
    u = vortex_ansatz(mesh, (0.0, 0.0), eps)
    measured = energy(mesh, u, EnergyParams(eps=eps, k=cfg.k))
    closed = ansatz_energy_closed_form(eps, k=cfg.k)
    report = {
        "eps": eps,
        "k": cfg.k,
        "ntheta": cfg.ntheta,
        "ns": cfg.ns,
        "closed_form": closed.as_dict(),
        "measured": measured.as_dict(),
        "total_rel_err": abs(measured.total - closed.total) / closed.total,
        "divergence_fraction": abs(measured.divergence) / measured.total,
    }
    reporting.write_json(out / "ansatz.json", report)

    # radial |u| profile vs the exact core profile min(r/eps, 1)
    r = np.linspace(0.0, 1.0, 512)
    pts = np.stack([r, np.zeros_like(r)], -1)
    mag = np.sqrt((mesh.interpolate(u, pts) ** 2).sum(-1))
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(r, mag, label="|u| on the mesh")
    ax.plot(r, np.minimum(r / eps, 1.0), "--", label="min(r/eps, 1)")
    ax.set_xlabel("r")
    ax.set_ylabel("|u|")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "ansatz.png", dpi=120)
    plt.close(fig)

    reporting.write_manifest(
        out, "ansatz", cfg.resolved(), ["ansatz.json", "ansatz.png"]
    )
    print(
        f"ansatz: eps={eps} measured={measured.total:.6f} "
        f"closed={closed.total:.6f} rel_err={report['total_rel_err']:.2e}"
    )
    return 0


def cmd_mesh_info(args):
    cfg = _resolve_config(args)
    out = _out_dir(args, cfg, "mesh-info")
    curve = cfg.curve()
    mesh = build_interior_mesh(curve, cfg.ntheta, cfg.ns)
    area = integrate(mesh, np.ones((cfg.ntheta, cfg.ns)))
    report = {
        "ntheta": cfg.ntheta,
        "ns": cfg.ns,
        "area": area,
        "perimeter": curve.perimeter,
        "max_curvature": curve.max_curvature,
        "reach_r0": 0.5 / curve.max_curvature,
        "collar_r1": 0.25 / curve.max_curvature,
        "h": mesh.h,
    }
    reporting.write_json(out / "mesh.json", report)

    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5.4, 5.0))
    st, ss = max(1, cfg.ntheta // 48), max(1, cfg.ns // 24)
    for i in range(0, cfg.ntheta, st):
        ax.plot(mesh.x[i, :, 0], mesh.x[i, :, 1], "b-", lw=0.3)
    for j in range(0, cfg.ns, ss):
        ring = np.concatenate([mesh.x[:, j, :], mesh.x[:1, j, :]], axis=0)
        ax.plot(ring[:, 0], ring[:, 1], "b-", lw=0.3)
    ax.set_aspect("equal")
    ax.set_title(f"{cfg.ntheta} x {cfg.ns} mesh, area {area:.6f}")
    fig.tight_layout()
    fig.savefig(out / "mesh.png", dpi=120)
    plt.close(fig)

    reporting.write_manifest(
        out, "mesh-info", cfg.resolved(), ["mesh.json", "mesh.png"]
    )
    print(
        f"mesh-info: {cfg.ntheta} x {cfg.ns} area={area:.8f} "
        f"perimeter={curve.perimeter:.8f} max_curvature={curve.max_curvature:.6f}"
    )
    return 0


# -- parser ------------------------------------------------------------------------

def _add_common(p, *, mesh=True, energy=True):
    p.add_argument("--config", help="JSON config file (flags override its values)")
    p.add_argument("--out", help="output directory (default gldiv-out/<command>)")
    if mesh:
        p.add_argument(
            "--ntheta",
            type=int,
            help=f"periodic resolution (default {DEFAULTS['ntheta']})",
        )
        p.add_argument(
            "--ns", type=int, help=f"radial resolution (default {DEFAULTS['ns']})"
        )
    if energy:
        p.add_argument(
            "--k", type=float, help=f"divergence modulus (default {DEFAULTS['k']})"
        )
        p.add_argument("--seed", type=int, help="RNG seed (default 0)")
        p.add_argument(
            "--max-iter", dest="max_iter", type=int, help="iteration cap (default 4000)"
        )
        p.add_argument(
            "--tol-factor",
            dest="tol_factor",
            type=float,
            help="gradient tolerance = tol_factor / eps^2 (default 1e-6)",
        )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gldiv",
        description=(
            "Minimize the divergence-penalized Ginzburg-Landau energy under "
            "tangential anchoring, and audit the reflection-extension and "
            "scaling claims."
        ),
    )
    parser.add_argument("--version", action="version", version=f"gldiv {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("minimize", help="minimize one eps and save the field")
    _add_common(p)
    p.add_argument("--eps", type=float, help="core scale (required unless in config)")
    p.add_argument(
        "--init",
        choices=("ansatz", "random"),
        default="ansatz",
        help="initial field (default: centered vortex ansatz)",
    )
    p.set_defaults(handler=cmd_minimize)

    p = sub.add_parser("sweep", help="minimize a list of eps values")
    _add_common(p, mesh=False)
    p.add_argument("--ntheta", type=int, help="periodic resolution (default 64)")
    p.add_argument("--eps", help="comma-separated eps list, e.g. 0.1,0.05,0.025")
    p.add_argument(
        "--jobs",
        type=int,
        default=1,
        help="parallel workers (GLDIV_JOBS overrides; default 1)",
    )
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser(
        "extend-check", help="reflection-extension identities and weak-form audit"
    )
    _add_common(p)
    p.add_argument("--eps", type=float, help="core scale (required unless in config)")
    p.add_argument("--n1", type=int, default=128, help="collar periodic nodes")
    p.add_argument("--n2", type=int, default=32, help="collar transverse nodes (even)")
    p.add_argument(
        "--samples", type=int, default=10000, help="ellipticity audit sample count"
    )
    p.set_defaults(handler=cmd_extend_check)

    p = sub.add_parser("polya", help="closed-form interior-maximum example")
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=None, help="override derived alpha")
    p.add_argument("--radius", type=float, default=0.4)
    p.add_argument("--out", help="output directory")
    p.set_defaults(handler=cmd_polya)

    p = sub.add_parser("ansatz", help="vortex-ansatz energy vs the closed form")
    _add_common(p)
    p.add_argument("--eps", type=float, help="core scale in (0, 1)")
    p.set_defaults(handler=cmd_ansatz)

    p = sub.add_parser("mesh-info", help="mesh quadrature / geometry report")
    _add_common(p, energy=False)
    p.set_defaults(handler=cmd_mesh_info)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as err:
        _emit_error(err.record)
        return 2
    except NumericalError as err:
        _emit_error({"error": "numerical", "message": str(err)})
        return 3


if __name__ == "__main__":
    sys.exit(main())
