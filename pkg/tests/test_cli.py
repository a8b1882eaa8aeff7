"""End-to-end tests of the command-line interface.

Each happy-path command runs once (in-process via ``cli.main``) into a shared
directory; several tests then assert on its artifacts.  Error paths check the
exit-code contract: 2 for bad configuration, 3 for numerical failure with
partial records flushed.
"""

import hashlib
import json

import numpy as np
import pytest

from gldiv import cli
from gldiv.diagnostics import CSV_COLUMNS
from gldiv.minimizer import NumericalError

BOUNDARY_MAX_04 = np.sqrt((1.0 - 0.16 / 6.0) ** 2 + 0.0064)


def check_manifest(out, command):
    """Verify every artifact listed in the manifest exists and checksums match."""
    m = json.loads((out / "manifest.json").read_text())
    assert m["command"] == command
    assert m["artifacts"], "manifest lists no artifacts"
    for name, meta in m["artifacts"].items():
        data = (out / name).read_bytes()
        assert hashlib.sha256(data).hexdigest() == meta["sha256"]
        assert len(data) == meta["bytes"]
    return m


# -- shared happy-path runs --------------------------------------------------------


@pytest.fixture(scope="module")
def polya_out(tmp_path_factory):
    out = tmp_path_factory.mktemp("polya")
    rc = cli.main(
        ["polya", "--k", "1", "--beta", "1", "--gamma", "1", "--radius", "0.4",
         "--out", str(out)]
    )
    assert rc == 0
    return out


@pytest.fixture(scope="module")
def minimize_out(tmp_path_factory):
    out = tmp_path_factory.mktemp("minimize")
    rc = cli.main(
        ["minimize", "--eps", "0.25", "--ntheta", "64", "--ns", "32",
         "--max-iter", "3000", "--out", str(out)]
    )
    assert rc == 0
    return out


@pytest.fixture(scope="module")
def sweep_outs(tmp_path_factory):
    """The same one-case sweep run twice, for the byte-identity check."""
    outs = []
    for tag in ("a", "b"):
        out = tmp_path_factory.mktemp(f"sweep_{tag}")
        rc = cli.main(
            ["sweep", "--eps", "0.3", "--jobs", "1", "--max-iter", "4000",
             "--out", str(out)]
        )
        assert rc == 0
        outs.append(out)
    return outs


# -- polya -------------------------------------------------------------------------


def test_polya_report_contract(polya_out):
    report = json.loads((polya_out / "polya.json").read_text())
    for key in ("alpha", "argmax", "interior", "max", "boundary_max"):
        assert key in report
    assert report["interior"] is True
    assert report["max"] == pytest.approx(1.0, abs=1e-9)
    assert report["boundary_max"] == pytest.approx(BOUNDARY_MAX_04, rel=1e-6)
    assert report["residuals"]["analytic"] < 1e-12
    assert report["residuals"]["discrete_64x32"] < 1e-10
    check_manifest(polya_out, "polya")


def test_polya_bad_params_exit_2(tmp_path, capsys):
    rc = cli.main(
        ["polya", "--k", "-2", "--beta", "1", "--gamma", "0",
         "--out", str(tmp_path)]
    )
    assert rc == 2
    record = json.loads(capsys.readouterr().err.strip())
    assert record["error"] == "config"
    assert "alpha" in record["message"]


def test_polya_bad_radius_exit_2(tmp_path, capsys):
    rc = cli.main(
        ["polya", "--k", "1", "--beta", "1", "--gamma", "1",
         "--radius", "-1", "--out", str(tmp_path)]
    )
    assert rc == 2
    assert "radius" in json.loads(capsys.readouterr().err.strip())["message"]


# -- minimize ----------------------------------------------------------------------


def test_minimize_artifacts(minimize_out):
    result = json.loads((minimize_out / "result.json").read_text())
    assert result["converged"] is True
    assert result["degree"] == 1
    assert result["sup_u"] <= 1.0 + 1e-9
    assert result["energy"]["total"] == pytest.approx(5.5857, rel=1e-3)
    hist = (minimize_out / "history.csv").read_text().splitlines()
    assert hist[0] == "iter,total"
    assert len(hist) - 1 == result["iterations"] + 1  # history includes iter 0
    field = (minimize_out / "field.csv").read_text().splitlines()
    assert field[0] == "x,y,u1,u2"
    assert len(field) - 1 == 64 * 32
    check_manifest(minimize_out, "minimize")


def test_minimize_missing_eps_exit_2(tmp_path, capsys):
    rc = cli.main(["minimize", "--out", str(tmp_path)])
    assert rc == 2
    assert "eps" in json.loads(capsys.readouterr().err.strip())["message"]


def test_minimize_random_init_is_seeded(tmp_path):
    # same seed twice -> identical result record (determinism of the RNG path)
    results = []
    for tag in ("r1", "r2"):
        out = tmp_path / tag
        rc = cli.main(
            ["minimize", "--eps", "0.4", "--ntheta", "32", "--ns", "16",
             "--init", "random", "--seed", "7", "--max-iter", "1500",
             "--out", str(out)]
        )
        assert rc == 0
        results.append((out / "field.csv").read_bytes())
    assert results[0] == results[1]


# -- sweep -------------------------------------------------------------------------


def test_sweep_csv_contract(sweep_outs):
    lines = (sweep_outs[0] / "sweep.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 2
    row = dict(zip(CSV_COLUMNS, lines[1].split(",")))
    assert float(row["eps"]) == pytest.approx(0.3)
    assert int(row["degree"]) == 1
    assert float(row["sup_u"]) <= 1.0 + 1e-9
    meta = json.loads((sweep_outs[0] / "sweep.json").read_text())
    assert meta["records"][0]["converged"] is True
    assert meta["jobs"] == 1
    check_manifest(sweep_outs[0], "sweep")


def test_sweep_byte_identical_reruns(sweep_outs):
    a = (sweep_outs[0] / "sweep.csv").read_bytes()
    b = (sweep_outs[1] / "sweep.csv").read_bytes()
    assert a == b


def test_sweep_env_overrides_jobs_flag(tmp_path, monkeypatch):
    calls = {}

    def fake_sweep(curve, eps_values, k, ntheta, max_iter, jobs, on_record):
        calls["jobs"] = jobs
        return []

    monkeypatch.setattr(cli, "sweep", fake_sweep)
    monkeypatch.setenv("GLDIV_JOBS", "3")
    rc = cli.main(["sweep", "--eps", "0.3", "--jobs", "1", "--out", str(tmp_path)])
    assert rc == 0
    assert calls["jobs"] == 3
    monkeypatch.delenv("GLDIV_JOBS")
    rc = cli.main(["sweep", "--eps", "0.3", "--jobs", "2", "--out", str(tmp_path)])
    assert calls["jobs"] == 2


def test_sweep_bad_eps_exit_2(tmp_path, capsys):
    rc = cli.main(["sweep", "--eps", "0.1,-0.2", "--out", str(tmp_path)])
    assert rc == 2
    assert "positive" in json.loads(capsys.readouterr().err.strip())["message"]
    rc = cli.main(["sweep", "--eps", "0.1,zebra", "--out", str(tmp_path)])
    assert rc == 2
    rc = cli.main(["sweep", "--out", str(tmp_path)])
    assert rc == 2


def test_sweep_numerical_failure_flushes_partial(tmp_path, monkeypatch, capsys):
    from gldiv.diagnostics import run_case
    from gldiv.geometry import BoundaryCurve

    rec, _, _ = run_case(BoundaryCurve(1.0), 0.4, ntheta=32, ns=16, max_iter=1500)

    def fake_sweep(curve, eps_values, k, ntheta, max_iter, jobs, on_record):
        on_record(rec)
        raise NumericalError("energy diverged at eps=0.2")

    monkeypatch.setattr(cli, "sweep", fake_sweep)
    rc = cli.main(["sweep", "--eps", "0.4,0.2", "--out", str(tmp_path)])
    assert rc == 3
    record = json.loads(capsys.readouterr().err.strip())
    assert record["error"] == "numerical"
    assert record["completed"] == [0.4]
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 2  # the completed record was flushed
    assert json.loads((tmp_path / "error.json").read_text())["requested"] == [0.4, 0.2]
    check_manifest(tmp_path, "sweep")


def test_minimize_numerical_failure_exit_3(tmp_path, monkeypatch, capsys):
    def boom(*a, **kw):
        raise NumericalError("non-finite energy")

    monkeypatch.setattr(cli, "minimize", boom)
    rc = cli.main(["minimize", "--eps", "0.25", "--out", str(tmp_path)])
    assert rc == 3
    assert json.loads(capsys.readouterr().err.strip())["error"] == "numerical"


# -- ansatz ------------------------------------------------------------------------


def test_ansatz_matches_closed_form(tmp_path):
    out = tmp_path / "ansatz"
    rc = cli.main(["ansatz", "--eps", "0.1", "--out", str(out)])
    assert rc == 0
    report = json.loads((out / "ansatz.json").read_text())
    assert report["ntheta"] == 256 and report["ns"] == 128
    assert report["total_rel_err"] < 0.01
    assert report["divergence_fraction"] < 1e-6
    assert report["closed_form"]["total"] == pytest.approx(
        np.pi * np.log(10.0) + 13.0 * np.pi / 12.0, rel=1e-12
    )
    check_manifest(out, "ansatz")


def test_ansatz_eps_out_of_range_exit_2(tmp_path, capsys):
    rc = cli.main(["ansatz", "--eps", "1.5", "--out", str(tmp_path)])
    assert rc == 2
    assert "eps" in json.loads(capsys.readouterr().err.strip())["message"]


# -- mesh-info and config files ----------------------------------------------------


def test_mesh_info_disk_area(tmp_path):
    out = tmp_path / "mesh"
    rc = cli.main(["mesh-info", "--ntheta", "64", "--ns", "32", "--out", str(out)])
    assert rc == 0
    report = json.loads((out / "mesh.json").read_text())
    assert report["area"] == pytest.approx(np.pi, rel=1e-3)
    assert report["perimeter"] == pytest.approx(2 * np.pi, rel=1e-12)
    assert report["max_curvature"] == pytest.approx(1.0, rel=1e-12)
    check_manifest(out, "mesh-info")


def test_config_file_defines_domain_and_mesh(tmp_path):
    cfgf = tmp_path / "wavy.json"
    cfgf.write_text(json.dumps({
        "domain": {"a0": 1.0, "cos_coeffs": [0.0, 0.0, 0.1]},
        "mesh": {"ntheta": 96, "ns": 48},
    }))
    out = tmp_path / "out"
    rc = cli.main(["mesh-info", "--config", str(cfgf), "--out", str(out)])
    assert rc == 0
    report = json.loads((out / "mesh.json").read_text())
    # area of rho = 1 + 0.1 cos(3 theta): (1/2) int rho^2 = pi (1 + 0.01/2)
    assert report["area"] == pytest.approx(np.pi * 1.005, rel=1e-3)
    assert report["ntheta"] == 96 and report["ns"] == 48


def test_flag_overrides_config_value(tmp_path):
    cfgf = tmp_path / "c.json"
    cfgf.write_text(json.dumps({
        "domain": {"a0": 1.0},
        "eps": 0.5,
        "mesh": {"ntheta": 48, "ns": 24},
    }))
    out = tmp_path / "out"
    rc = cli.main(["ansatz", "--config", str(cfgf), "--eps", "0.3", "--out", str(out)])
    assert rc == 0
    report = json.loads((out / "ansatz.json").read_text())
    assert report["eps"] == 0.3           # flag wins over the config value
    assert report["ntheta"] == 48         # config mesh wins over the 256x128 fallback
    assert report["ns"] == 24


def test_empty_config_exit_2(tmp_path, capsys):
    cfgf = tmp_path / "empty.json"
    cfgf.write_text("")
    rc = cli.main(["mesh-info", "--config", str(cfgf), "--out", str(tmp_path)])
    assert rc == 2
    record = json.loads(capsys.readouterr().err.strip())
    assert record["error"] == "config"
    assert "domain" in record["message"]


def test_unknown_config_key_exit_2(tmp_path, capsys):
    cfgf = tmp_path / "bad.json"
    cfgf.write_text(json.dumps({"domain": {"a0": 1.0}, "bogus": 3}))
    rc = cli.main(["mesh-info", "--config", str(cfgf), "--out", str(tmp_path)])
    assert rc == 2
    assert "bogus" in json.loads(capsys.readouterr().err.strip())["message"]


def test_malformed_json_reports_line(tmp_path, capsys):
    cfgf = tmp_path / "broken.json"
    cfgf.write_text('{"domain": {"a0": 1.0},}\n')
    rc = cli.main(["mesh-info", "--config", str(cfgf), "--out", str(tmp_path)])
    assert rc == 2
    record = json.loads(capsys.readouterr().err.strip())
    assert record["error"] == "config"
    assert "line" in record and record["line"] == 1


def test_missing_config_file_exit_2(tmp_path, capsys):
    rc = cli.main(
        ["mesh-info", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]
    )
    assert rc == 2
    assert json.loads(capsys.readouterr().err.strip())["error"] == "config"


def test_version_and_usage():
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2


# -- extend-check ------------------------------------------------------------------


def test_extend_check_identities(tmp_path):
    out = tmp_path / "ext"
    rc = cli.main(
        ["extend-check", "--eps", "0.3", "--ntheta", "64", "--ns", "32",
         "--n1", "64", "--n2", "16", "--samples", "2000",
         "--max-iter", "2500", "--out", str(out)]
    )
    assert rc == 0
    report = json.loads((out / "extend.json").read_text())
    assert report["parity_max"]["tangential"] == 0.0
    assert report["parity_max"]["normal"] == 0.0
    assert report["gluing_identity_max"] < 1e-13
    assert report["ellipticity"]["violations"] == 0
    assert report["remainder_constant"] < 0.01
    ext_lines = (out / "extension.csv").read_text().splitlines()
    assert ext_lines[0] == "y1,y2,x,y,U1,U2,D,detSigma"
    assert len(ext_lines) - 1 == 64 * 16
    check_manifest(out, "extend-check")
