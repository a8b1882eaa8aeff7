"""Artifact writers: delimited text, JSON mirrors, manifest, figures.

CSV files are the byte-reproducible record: fixed column order, floats
rendered with %.17g (exact round-trip), LF endings. JSON mirrors carry the
same data plus auxiliary fields for programmatic consumers. Figures use the
Agg backend (headless) and are illustrative only -- nothing downstream parses
them, and they are listed in the manifest like every other artifact.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .diagnostics import CSV_COLUMNS  # noqa: E402


def format_value(v):
    """Fixed text form: ints verbatim, floats as %.17g."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_csv(path, columns, rows):
    """rows: iterable of mappings column -> value."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_value(row[c]) for c in columns))
    Path(path).write_text("\n".join(lines) + "\n")


def write_json(path, obj):
    def default(o):
        if isinstance(o, (np.integer,)):
            return int(o)
        if isinstance(o, (np.floating,)):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        raise TypeError(f"not JSON-serializable: {type(o)!r}")

    Path(path).write_text(
        json.dumps(obj, indent=2, sort_keys=True, default=default) + "\n"
    )


def sha256_path(path):
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def write_manifest(out_dir, command, resolved_config, artifact_names):
    """manifest.json: resolved config plus sha256/size of every artifact."""
    out = Path(out_dir)
    artifacts = {}
    for name in sorted(artifact_names):
        p = out / name
        artifacts[name] = {"sha256": sha256_path(p), "bytes": p.stat().st_size}
    write_json(
        out / "manifest.json",
        {"command": command, "config": resolved_config, "artifacts": artifacts},
    )


# -- delimited artifact layouts -------------------------------------------------

def write_field_csv(path, mesh, field):
    """Nodal vector field, columns x,y,u1,u2, theta-major row order."""
    x = mesh.x.reshape(-1, 2)
    u = np.asarray(field, dtype=float).reshape(-1, 2)
    rows = (
        {"x": x[i, 0], "y": x[i, 1], "u1": u[i, 0], "u2": u[i, 1]}
        for i in range(x.shape[0])
    )
    write_csv(path, ("x", "y", "u1", "u2"), rows)


def write_history_csv(path, history):
    rows = ({"iter": i, "total": e} for i, e in enumerate(history))
    write_csv(path, ("iter", "total"), rows)


def write_extension_csv(path, collar_field):
    """Collar extension nodes: chart coords, position, values, fold data."""
    m = collar_field.mesh
    cols = ("y1", "y2", "x", "y", "U1", "U2", "D", "detSigma")
    rows = []
    for i in range(m.n1):
        for j in range(m.n2):
            rows.append(
                {
                    "y1": m.y1[i],
                    "y2": m.y2[j],
                    "x": m.x[i, j, 0],
                    "y": m.x[i, j, 1],
                    "U1": collar_field.values[i, j, 0],
                    "U2": collar_field.values[i, j, 1],
                    "D": m.D[i, j],
                    "detSigma": m.det_sigma[i, j],
                }
            )
    write_csv(path, cols, rows)


def write_sweep_csv(path, records):
    write_csv(path, CSV_COLUMNS, (r.row() for r in records))


# -- figures ---------------------------------------------------------------------

def _closed(arr):
    """Append the first row for closed-curve plotting."""
    return np.concatenate([arr, arr[:1]], axis=0)


def field_figure(path, mesh, field, title="minimizer"):
    """|u| heatmap with a sparse direction quiver and the boundary outline."""
    u = np.asarray(field, dtype=float)
    mag = np.sqrt((u**2).sum(-1))
    fig, ax = plt.subplots(figsize=(6.0, 5.2))
    pc = ax.pcolormesh(
        _closed(mesh.x[..., 0]),
        _closed(mesh.x[..., 1]),
        _closed(mag),
        shading="gouraud",
        cmap="viridis",
        vmin=0.0,
    )
    st, ss = max(1, mesh.ntheta // 24), max(1, mesh.ns // 12)
    ax.quiver(
        mesh.x[::st, ::ss, 0],
        mesh.x[::st, ::ss, 1],
        u[::st, ::ss, 0],
        u[::st, ::ss, 1],
        color="white",
        scale=30.0,
        width=0.003,
    )
    b = _closed(mesh.x[:, -1, :])
    ax.plot(b[:, 0], b[:, 1], "k-", lw=1.0)
    ax.set_aspect("equal")
    ax.set_title(title)
    fig.colorbar(pc, ax=ax, label="|u|")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def convergence_figure(path, history):
    h = np.asarray(history, dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(h, lw=1.0)
    ax.set_xlabel("iteration")
    ax.set_ylabel("energy")
    if h.size > 1 and h.max() > h.min():
        axi = ax.twinx()
        gap = h - h.min() + 1e-17
        axi.semilogy(gap, lw=0.8, color="tab:orange", alpha=0.7)
        axi.set_ylabel("energy - best (log)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def sweep_figure(path, records):
    eps = np.array([r.eps for r in records])
    total = np.array([r.e_total for r in records])
    lg = np.log(1.0 / eps)
    fig, axes = plt.subplots(1, 2, figsize=(10.0, 4.0))
    axes[0].plot(lg, total, "o-", label="energy")
    if len(records) >= 2:
        slope, intercept = np.polyfit(lg, total, 1)
        axes[0].plot(
            lg, slope * lg + intercept, "--", label=f"fit slope {slope:.4f}"
        )
        axes[0].plot(
            lg,
            np.pi * lg + (total - np.pi * lg).mean(),
            ":",
            label="slope pi",
        )
    axes[0].set_xlabel("log(1/eps)")
    axes[0].set_ylabel("energy")
    axes[0].legend()
    for name in ("sup_u", "eps_lip", "combo"):
        axes[1].semilogx(eps, [getattr(r, name) for r in records], "o-", label=name)
    axes[1].set_xlabel("eps")
    axes[1].invert_xaxis()
    axes[1].legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def collar_figure(path, collar_mesh, scalar, title):
    """Chart-coordinate heatmap of a collar scalar (e.g. glued divergence)."""
    m = collar_mesh
    fig, ax = plt.subplots(figsize=(8.0, 3.2))
    pc = ax.pcolormesh(
        np.append(m.y1, m.period),
        m.y2,
        np.concatenate([scalar, scalar[:1]], axis=0).T,
        shading="gouraud",
        cmap="RdBu_r",
    )
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("y1 (arclength)")
    ax.set_ylabel("y2 (signed distance)")
    ax.set_title(title)
    fig.colorbar(pc, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def polya_figure(path, field_eval, radius, report):
    g = np.linspace(-radius, radius, 201)
    X, Y = np.meshgrid(g, g, indexing="ij")
    pts = np.stack([X, Y], -1)
    mag = np.sqrt((field_eval.u(pts) ** 2).sum(-1))
    mag = np.where(X**2 + Y**2 <= radius**2, mag, np.nan)
    fig, ax = plt.subplots(figsize=(5.4, 4.8))
    pc = ax.pcolormesh(X, Y, mag, shading="gouraud", cmap="magma")
    ax.plot(*report["argmax"], "c*", ms=14, label="argmax |u|")
    phi = np.linspace(0, 2 * np.pi, 256)
    ax.plot(radius * np.cos(phi), radius * np.sin(phi), "k-", lw=1.0)
    ax.set_aspect("equal")
    ax.legend(loc="upper right")
    ax.set_title(f"interior max: {report['interior']}")
    fig.colorbar(pc, ax=ax, label="|u|")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
