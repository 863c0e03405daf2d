import json

import pytest

from bigjump import cli, harness as hs
from bigjump.errors import ParseError, ValidationError

MINI = """
[scan_a]
kind = "deviation_scan"
marginal = "shifted(pareto(alpha=2, scale=1), offset=2)"
dependence = "fgm_chain(theta=0.5)"
gamma = 1.0
n_list = [10]
x_multipliers = [2, 4]
samples = 20000
method = "CrudeMC"
seed = 101

[ruin_b]
kind = "ruin"
claim_marginal = "pareto(alpha=2, scale=1)"
inter_marginal = "exponential(rate=1)"
premium_rate = 2.2
x = 30.0
t = 20.0
samples = 20000
seed = 102

[g_c]
kind = "dominating_estimate"
dependence = "fgm_pair(theta=0.5)"
marginal = "exponential(rate=1)"
n = 2
thresholds = [[0.6931, 0.6931], [2.3026, 2.3026]]
samples = 20000
seed = 103
"""


def test_parse_and_roundtrip():
    cfgs = hs.parse_config(MINI)
    assert [c.id for c in cfgs] == ["scan_a", "ruin_b", "g_c"]
    text = hs.serialize_config(cfgs)
    assert hs.parse_config(text) == cfgs


def test_missing_seed_names_the_field():
    bad = '[s]\nkind = "diagnostics"\nmarginal = "pareto(alpha=2, scale=1)"\n'
    with pytest.raises(ValidationError, match=r"s\.seed"):
        hs.parse_config(bad)


def test_unknown_kind_and_bad_subspec_are_located():
    bad = ('[s1]\nkind = "mystery"\nseed = 1\n\n'
           '[s2]\nkind = "diagnostics"\nseed = 1\nmarginal = "pareto(alpha=-2)"\n')
    with pytest.raises(ValidationError) as err:
        hs.parse_config(bad)
    assert any("s1.kind" in e for e in err.value.errors)
    assert any("s2.marginal" in e for e in err.value.errors)


def test_toml_syntax_error_is_parse_error():
    with pytest.raises(ParseError):
        hs.parse_config("[broken\nkind=")


def test_defaults_fill_in():
    cfgs = hs.parse_config(MINI)
    scan = cfgs[0]
    assert scan.opt("tol_c", 0.2) == 0.2
    ruin = cfgs[1]
    assert ruin.opt("q1", 1.0) == 1.0


def test_thread_count_never_changes_outputs(tmp_path):
    cfgs = hs.parse_config(MINI)
    out1, out8 = tmp_path / "p1", tmp_path / "p8"
    hs.emit_outputs(hs.run_config(cfgs, parallelism=1), out1, config_text=MINI)
    hs.emit_outputs(hs.run_config(cfgs, parallelism=8), out8, config_text=MINI)
    for f1 in sorted(out1.glob("*.csv")):
        assert f1.read_bytes() == (out8 / f1.name).read_bytes()
    assert (out1 / "summary.json").read_bytes() == (out8 / "summary.json").read_bytes()


def test_scenario_order_does_not_change_numbers():
    cfgs = hs.parse_config(MINI)
    fwd = {r.config.id: r.rows for r in hs.run_config(cfgs)}
    rev = {r.config.id: r.rows for r in hs.run_config(list(reversed(cfgs)))}
    assert fwd == rev


def test_error_isolation(tmp_path):
    text = MINI + """
[bad_scan]
kind = "deviation_scan"
marginal = "pareto(alpha=1, scale=1)"
dependence = "independent"
gamma = 1.0
n_list = [5]
x_multipliers = [2]
samples = 20000
seed = 9
"""
    results = hs.run_config(hs.parse_config(text))
    by_id = {r.config.id: r for r in results}
    assert by_id["bad_scan"].verdict == "Error"
    assert "PreconditionViolated" in by_id["bad_scan"].error
    assert by_id["scan_a"].error is None
    files = hs.emit_outputs(results, tmp_path / "iso", config_text=text)
    manifest = json.loads((tmp_path / "iso" / "manifest.json").read_text())
    entries = {s["id"]: s for s in manifest["scenarios"]}
    assert entries["bad_scan"]["verdict"] == "Error"
    assert entries["scan_a"]["substreams"]


def test_seed_override_changes_draws():
    cfgs = hs.parse_config(MINI)[:1]
    a = hs.run_config(cfgs)[0]
    b = hs.run_config(cfgs, seed_override=777)[0]
    assert a.rows != b.rows
    assert b.config.seed == 777


def test_samples_scale(tmp_path):
    cfgs = hs.parse_config(MINI)[:1]
    res = hs.run_config(cfgs, samples_scale=0.5)[0]
    assert res.rows[0][hs._RATIO_COLUMNS.index("samples")] == 10_000


def test_emit_handles_empty_results(tmp_path):
    files = hs.emit_outputs([], tmp_path / "empty", config_text="")
    names = {f.name for f in files}
    assert names == {"summary.json", "manifest.json"}


def test_schema_version_in_every_file(tmp_path):
    cfgs = hs.parse_config(MINI)
    files = hs.emit_outputs(hs.run_config(cfgs), tmp_path / "sv", config_text=MINI)
    for f in files:
        if f.suffix == ".csv":
            assert f.read_text().splitlines()[0].startswith("schema_version")
        else:
            assert json.loads(f.read_text())["schema_version"] == hs.SCHEMA_VERSION


# ---------------------------------------------------------------------------
# CLI

def test_cli_list_and_run(tmp_path, capsys):
    cfg_path = tmp_path / "mini.toml"
    cfg_path.write_text(MINI)
    assert cli.main(["list-scenarios", "--config", str(cfg_path)]) == 0
    out = capsys.readouterr().out
    assert "scan_a" in out and "deviation_scan" in out

    out_dir = tmp_path / "cli_out"
    rc = cli.main(["run", "--config", str(cfg_path), "--out", str(out_dir),
                   "--threads", "2", "--samples-scale", "0.5",
                   "--scenario", "scan_a"])
    assert rc == 0
    assert (out_dir / "scan_a.deviation_scan.csv").exists()
    assert (out_dir / "manifest.json").exists()


def test_cli_estimate_g_filter(tmp_path, capsys):
    cfg_path = tmp_path / "mini.toml"
    cfg_path.write_text(MINI)
    out_dir = tmp_path / "g_out"
    rc = cli.main(["estimate-g", "--config", str(cfg_path), "--out", str(out_dir)])
    assert rc == 0
    files = {f.name for f in out_dir.glob("*.csv")}
    assert files == {"g_c.dominating_estimate.csv"}


def test_cli_unknown_scenario(tmp_path, capsys):
    cfg_path = tmp_path / "mini.toml"
    cfg_path.write_text(MINI)
    rc = cli.main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "x"),
                   "--scenario", "nope"])
    assert rc == 2
