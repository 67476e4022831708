import json
import subprocess
import sys
import time

import pytest

from fpplab import cli
from fpplab.experiments import EXPERIMENTS

# reduced parameters that keep every subcommand well under 10 s
SMOKE = {
    "constants": ["--eps", "0.1"],
    "simulate": ["--n", "300"],
    "hops": ["--n", "40", "--trials", "3"],
    "verify-spt-tail": ["--n", "1000", "--trials", "500"],
    "verify-rrt-height": ["--n", "1000", "--trials", "500"],
    "verify-max-tail": ["--n", "60", "--trials", "5"],
    "count-pairs": ["--n", "5", "--k", "2"],
    "light-paths": ["--n", "12", "--k", "2", "--trials", "50"],
    "lightest-given-light": ["--n", "200", "--k", "2", "--trials", "20"],
    "predicates": ["--n", "60", "--k", "4", "--trials", "5"],
    "key-lemma": ["--n", "5", "--trials", "3"],
    "coupling": ["--n", "200", "--trials", "100"],
    "order-stats": ["--n", "50", "--trials", "100"],
    "estimate-alpha": ["--n-grid", "20,40,80", "--trials", "3"],
}


def test_smoke_covers_every_subcommand():
    assert set(SMOKE) == set(EXPERIMENTS) == set(cli.COMMANDS)


@pytest.mark.parametrize("name", sorted(SMOKE))
def test_subcommand_smoke(name, tmp_path, capsys):
    out = tmp_path / "out.dat"
    t0 = time.perf_counter()
    code = cli.parse_and_dispatch([name, *SMOKE[name], "--seed", "7", "--out", str(out)])
    assert time.perf_counter() - t0 < 10
    assert code in (cli.EXIT_OK, cli.EXIT_CHECK_FAILED)
    text = capsys.readouterr().out
    assert text.startswith("config: ")
    echoed = json.loads(text.splitlines()[0][len("config: "):])
    assert echoed["master_seed"] == 7 and echoed["experiment"] == name
    assert out.exists()


def test_constants_output(capsys):
    assert cli.parse_and_dispatch(["constants", "--eps", "0.1"]) == cli.EXIT_OK
    text = capsys.readouterr().out
    assert "alpha* = 3.5911" in text and "alpha_eps = 3.309" in text


def test_hops_n2(tmp_path):
    out = tmp_path / "h.csv"
    assert cli.parse_and_dispatch(["hops", "--n", "2", "--trials", "1", "--seed", "7", "--out", str(out)]) == 0
    header, row = out.read_text().splitlines()
    rec = dict(zip(header.split(","), row.split(",")))
    assert rec["hops_12"] == rec["max_hops_from_1"] == rec["max_hops_all_pairs"] == "1"
    summary = json.loads((tmp_path / "h.summary.json").read_text())
    assert "workers" not in summary["config"]


def test_usage_errors(capsys):
    assert cli.parse_and_dispatch(["hops", "--bogus"]) == cli.EXIT_USAGE
    assert cli.parse_and_dispatch(["nope"]) == cli.EXIT_USAGE
    assert cli.parse_and_dispatch(["hops", "--n", "1"]) == cli.EXIT_USAGE
    assert cli.parse_and_dispatch(["hops", "--seed", str(2**64)]) == cli.EXIT_USAGE
    assert cli.parse_and_dispatch(["light-paths", "--n", "10", "--k", "0"]) == cli.EXIT_USAGE
    assert cli.parse_and_dispatch(["estimate-alpha", "--n-grid", "10,20"]) == cli.EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_resource_guards(capsys):
    assert cli.parse_and_dispatch(["hops", "--n", "5000"]) == cli.EXIT_GUARD
    assert "would need about" in capsys.readouterr().err
    assert cli.parse_and_dispatch(["key-lemma", "--n", "9"]) == cli.EXIT_GUARD
    assert cli.parse_and_dispatch(["light-paths", "--n", "100", "--k", "2"]) == cli.EXIT_GUARD


def test_check_failure_exit_code():
    # the counting rule is violated at n = 6, k = 3
    assert cli.parse_and_dispatch(["count-pairs", "--n", "6", "--k", "3"]) == cli.EXIT_CHECK_FAILED


def test_load_config(tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    cfg = cli.load_config(empty)
    assert cfg.n == cli.DEFAULTS["hops"]["n"] and cfg.trials == cli.DEFAULTS["hops"]["trials"]
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 1}')
    with pytest.raises(cli.ConfigError, match="n must be >= 2"):
        cli.load_config(bad)
    broken = tmp_path / "broken.json"
    broken.write_text('{\n  "n": [10,\n}')
    with pytest.raises(cli.ConfigError, match="line 3"):
        cli.load_config(broken)
    unknown = tmp_path / "unknown.json"
    unknown.write_text('{"colour": 1}')
    with pytest.raises(cli.ConfigError, match="unknown keys"):
        cli.load_config(unknown)
    hexseed = tmp_path / "hex.json"
    hexseed.write_text('{"seed": "0x10", "n": 30}')
    cfg = cli.load_config(hexseed)
    assert cfg.master_seed == 16 and cfg.n == (30,)


def test_flags_override_config(tmp_path, capsys):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"n": [30], "trials": 9, "seed": 3}))
    assert cli.parse_and_dispatch(["hops", "--config", str(conf), "--trials", "2"]) == 0
    echoed = json.loads(capsys.readouterr().out.splitlines()[0][len("config: "):])
    assert echoed["trials"] == 2 and echoed["n"] == [30] and echoed["master_seed"] == 3


def test_worker_count_does_not_change_output(tmp_path):
    outs = []
    for w in (1, 3):
        out = tmp_path / f"h{w}.csv"
        cli.parse_and_dispatch(["hops", "--n-grid", "30,50", "--trials", "4", "--workers", str(w),
                                "--seed", "11", "--out", str(out)])
        outs.append((out.read_bytes(), (tmp_path / f"h{w}.summary.json").read_bytes()))
    assert outs[0] == outs[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fpplab", "hops", "--n", "2", "--trials", "1"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0 and "config:" in proc.stdout
