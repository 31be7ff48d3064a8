import csv

import pytest

from kuramoto_agents import cli
from kuramoto_agents.config import PRESETS, RunConfig, load_config, parse_config, preset
from kuramoto_agents.errors import ConfigError
from kuramoto_agents.experiments import read_table
from kuramoto_agents.topology import load_adjacency

SMALL = """
[topology]
kind = all-to-all
size = 4
[simulate]
epsilon = 2.0
sigma = 0.3
seed = 9
[sweep]
epsilon = 0, 2
sigma = 0.2
replicates = 2
seed = 3
[integration]
t_end = 5
"""


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(SMALL)
    return path


def test_presets_parse():
    assert set(PRESETS) >= {"fig3", "fig6", "all2all_paper", "scalefree_paper"}
    fig3 = preset("fig3")
    assert fig3.topology.kind == "all-to-all" and fig3.topology.size == 10
    assert len(fig3.epsilon_grid) == 26 and fig3.epsilon_grid[-1] == 5.0
    assert fig3.sigma_list == (0.1, 0.5, 1.0, 2.0)
    assert fig3.replicates == 10 and fig3.lam == 1.0
    fig6 = preset("fig6")
    assert fig6.topology.build().n == 81
    assert len(fig6.epsilon_grid) == 31 and fig6.epsilon_grid[-1] == 30.0
    assert fig6.sigma_list == (0.05, 0.1, 0.15, 0.2)
    sf = preset("scalefree_paper")
    assert (sf.simulate_epsilon, sf.simulate_sigma) == (30.0, 0.05)
    a2a = preset("all2all_paper")
    assert (a2a.simulate_epsilon, a2a.simulate_sigma) == (5.0, 0.5)


def test_defaults_and_round_trip():
    cfg = parse_config("")
    assert cfg == RunConfig()
    for name in PRESETS:
        c = preset(name)
        assert parse_config(c.to_ini()) == c


def test_file_topology_relative_to_config(tmp_path):
    (tmp_path / "g.edges").write_text("0 1\n1 2\n")
    path = tmp_path / "c.ini"
    path.write_text("[topology]\nkind = file\npath = g.edges\n")
    assert load_config(path).topology.build().n == 3


@pytest.mark.parametrize(
    "text, field, line",
    [
        ("[model]\nlambda = abc\n", "model.lambda", 2),
        ("[model]\nlambda = 1\nbogus = 2\n", "model.bogus", 3),
        ("[sweep]\n\nreplicates = 0\n", "sweep.replicates", 3),
        ("[sweep]\nsigma = 0.1, -2\n", "sweep.sigma", 2),
        ("[topology]\nkind = ring\n", "topology.kind", 2),
    ],
)
def test_config_errors_name_field_and_line(text, field, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text, source="x.ini")
    assert info.value.field == field
    assert f"x.ini:{line}:" in str(info.value)


def test_config_syntax_and_section_errors():
    with pytest.raises(ConfigError):
        parse_config("lambda = 1\n")
    with pytest.raises(ConfigError):
        parse_config("[physics]\nx = 1\n")
    with pytest.raises(ConfigError):
        parse_config("[integration]\ndt = 0\n")


def test_list_presets(capsys):
    assert cli.main(["--list-presets"]) == 0
    out = capsys.readouterr().out
    for name in ("fig3", "fig6", "all2all_paper", "scalefree_paper"):
        assert name in out
    assert cli.main(["sweep", "--list-presets"]) == 0


def test_gen_network_scale_free(tmp_path, capsys):
    out = tmp_path / "sf.edges"
    assert cli.main(["gen-network", "scale-free", "--iterations", "4", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "nodes: 81" in text and "edges: 130" in text and "max degree: 30" in text
    adj = load_adjacency(out)
    assert adj.n == 81 and adj.edge_count == 130


def test_gen_network_all_to_all(tmp_path, capsys):
    out = tmp_path / "k.edges"
    assert cli.main(["gen-network", "all-to-all", "--n", "10", "--out", str(out)]) == 0
    assert "edges: 45" in capsys.readouterr().out


def test_gen_network_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as info:
        cli.main(["gen-network", "small-world", "--n", "4"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["gen-network", "all-to-all", "--out", str(tmp_path / "x")])
    assert info.value.code == 2


def test_no_command_is_usage_error():
    assert cli.main([]) == 2


def test_simulate_writes_trajectory(small_config, tmp_path, capsys):
    out = tmp_path / "traj.csv"
    assert cli.main(["simulate", "--config", str(small_config), "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["t"] + [f"theta_{i}" for i in range(4)] + [f"r_{i}" for i in range(4)] + ["R_raw", "R_normalized"]
    assert len(rows) == 1 + 51
    assert float(rows[-1][0]) == 5.0
    assert "final R_raw" in capsys.readouterr().out


def test_simulate_missing_config(tmp_path):
    out = tmp_path / "never.csv"
    assert cli.main(["simulate", "--config", str(tmp_path / "nope.ini"), "--out", str(out)]) == 2
    assert not out.exists()


def test_simulate_bad_config_exit_2(tmp_path):
    p = tmp_path / "bad.ini"
    p.write_text("[model]\nlambda = x\n")
    assert cli.main(["simulate", "--config", str(p), "--out", str(tmp_path / "o.csv")]) == 2


def test_simulate_divergence_exit_1(tmp_path):
    p = tmp_path / "div.ini"
    p.write_text("[topology]\nsize = 3\n[model]\nlambda = 1e13\n[integration]\nt_end = 2\n")
    out = tmp_path / "o.csv"
    assert cli.main(["simulate", "--config", str(p), "--out", str(out)]) == 1
    assert not out.exists()


def test_unknown_preset_exit_2(tmp_path):
    assert cli.main(["sweep", "--preset", "fig99", "--out", str(tmp_path / "x.csv")]) == 2


def test_sweep_single_point(tmp_path, capsys):
    p = tmp_path / "one.ini"
    p.write_text("[sweep]\nepsilon = 1.0\nsigma = 0.5\nreplicates = 1\n[integration]\nt_end = 5\n")
    out = tmp_path / "s.csv"
    assert cli.main(["sweep", "--config", str(p), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 2
    assert "1 runs, 0 failed" in capsys.readouterr().out


def test_sweep_failure_exit_1(tmp_path, capsys):
    p = tmp_path / "f.ini"
    p.write_text(
        "[sweep]\nepsilon = 0, 200\nsigma = 0.1\nreplicates = 1\n[integration]\nmethod = euler\ndt = 0.2\nt_end = 20\n"
    )
    out = tmp_path / "s.csv"
    assert cli.main(["sweep", "--config", str(p), "--out", str(out)]) == 1
    recs = read_table(out)
    assert [r.status == "ok" for r in recs] == [True, False]
    assert "2 runs, 1 failed" in capsys.readouterr().out


def test_seed_override(small_config, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cli.main(["sweep", "--config", str(small_config), "--out", str(a), "--seed", "3"])
    cli.main(["sweep", "--config", str(small_config), "--out", str(b), "--seed", "4"])
    ra, rb = read_table(a), read_table(b)
    assert ra[0].seed != rb[0].seed
    c = tmp_path / "c.csv"
    cli.main(["sweep", "--config", str(small_config), "--out", str(c)])
    assert c.read_bytes() == a.read_bytes()


def test_dumped_config_reproduces_output(small_config, tmp_path):
    dump = tmp_path / "effective.ini"
    first, second = tmp_path / "1.csv", tmp_path / "2.csv"
    assert cli.main(["sweep", "--config", str(small_config), "--out", str(first), "--dump-config", str(dump), "--seed", "11"]) == 0
    assert cli.main(["sweep", "--config", str(dump), "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    t1, t2 = tmp_path / "t1.csv", tmp_path / "t2.csv"
    cli.main(["simulate", "--config", str(small_config), "--out", str(t1), "--dump-config", str(dump)])
    cli.main(["simulate", "--config", str(dump), "--out", str(t2)])
    assert t1.read_bytes() == t2.read_bytes()


def test_threads_flag(small_config, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cli.main(["sweep", "--config", str(small_config), "--out", str(a)])
    cli.main(["sweep", "--config", str(small_config), "--out", str(b), "--threads", "2"])
    assert a.read_bytes() == b.read_bytes()


def _columns(path):
    rows = list(csv.DictReader(path.open()))
    return rows


@pytest.mark.parametrize("name, n", [("all2all_paper", 10), ("scalefree_paper", 81)])
def test_single_run_presets(name, n, tmp_path):
    out = tmp_path / f"{name}.csv"
    assert cli.main(["simulate", "--preset", name, "--out", str(out)]) == 0
    rows = _columns(out)
    last = rows[-1]
    assert float(last["t"]) == 100.0
    radii = [float(last[f"r_{i}"]) for i in range(n)]
    # radii rise above the intrinsic equilibrium of one under coupling
    assert sum(radii) / n > 1.0
    tail = [float(r["R_normalized"]) for r in rows[len(rows) // 2 :]]
    assert min(tail) > 0.9
    assert max(tail) - min(tail) < 0.05
    first = float(rows[0]["R_normalized"])
    assert first < min(tail)
