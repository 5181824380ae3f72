import csv
import io

import pytest

from pielm.cli import main
from pielm.config import ConfigError, ExperimentConfig, Seeds, parse_config
from pielm.experiments import CSV_COLUMNS, table_configs


def write(tmp_path, text, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_minimal_heat_config_gets_benchmark_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, "problem: heat\nd: 5\n"))
    assert (cfg.width, cfg.n_int, cfg.n_sb, cfg.n_tb) == (800, 8192, 2048, 6144)
    assert cfg.weight_range == (-0.01, 0.01)
    assert cfg.activation.value == "tanh"


def test_override_beats_file(tmp_path):
    path = write(tmp_path, "problem: heat\nd: 5\nwidth: 1600\nseeds: {weights: 7, test: 8}\n")
    cfg = parse_config(path, {"width": 3200, "seeds": {"test": 9, "oracle": None}})
    assert cfg.width == 3200
    assert cfg.seeds == Seeds(weights=7, test=9)


def test_misspelled_key_named(tmp_path):
    with pytest.raises(ConfigError, match="widht"):
        parse_config(write(tmp_path, "problem: heat\nd: 5\nwidht: 10\n"))
    with pytest.raises(ConfigError, match="seeds.wieghts"):
        parse_config(write(tmp_path, "problem: heat\nd: 5\nseeds: {wieghts: 1}\n"))


@pytest.mark.parametrize(
    "text, field",
    [
        ("d: 5\n", "problem"),
        ("problem: heat\n", "d"),
        ("problem: heston\nd: 3\n", "d"),
        ("problem: heat\nd: 5\nactivation: relu\n", "activation"),
        ("problem: heat\nd: 5\nweight_range: [1, -1]\n", "weight_range"),
        ("problem: heat\nd: 5\nbeta1: 0\n", "beta1"),
        ("problem: heat\nd: 0\n", "d"),
        ("problem: wave\nd: 2\n", "problem"),
    ],
)
def test_invalid_values_name_the_field(tmp_path, text, field):
    with pytest.raises(ConfigError, match=f"^{field}"):
        parse_config(write(tmp_path, text))


def test_problem_specific_defaults():
    bs = ExperimentConfig.for_problem("black_scholes", 1)
    assert (bs.beta1, bs.beta2) == (5.0, 10.0)
    assert bs.n_s == 16384
    assert ExperimentConfig.for_problem("heston", 2).beta1 == 800.0
    assert ExperimentConfig.for_problem("heat", 5).beta2 == 1.0


def test_repeat_seeds_differ_only_in_training_streams():
    cfg = ExperimentConfig.for_problem("heat", 2)
    r = cfg.for_repeat(3)
    assert r.seeds.weights != cfg.seeds.weights and r.seeds.collocation != cfg.seeds.collocation
    assert r.seeds.test == cfg.seeds.test and r.seeds.oracle == cfg.seeds.oracle


def test_table_grids():
    t1 = table_configs("T1", "desk")
    assert sorted({c.d for c in t1}) == [5, 10, 20]
    assert sorted({c.width for c in t1}) == [800, 1600]
    assert len(t1) == 6
    t5 = table_configs("T5", "full")
    assert len(t5) == 6
    assert [c.d for c in t5] == [2, 4, 10, 30, 50, 100]
    assert all(c.n_test == 100_000 for c in t5)
    assert len({c.seeds for c in t5}) == 6
    desk_bs = table_configs("T3", "desk")
    assert all(c.n_s == 4096 for c in desk_bs)
    with pytest.raises(ValueError):
        table_configs("T9")


def test_unknown_table_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["table", "T9"])
    assert exc.value.code == 2


def test_bad_config_exit_code(tmp_path, capsys):
    assert main(["run", "--config", str(write(tmp_path, "problem: heat\nd: 5\nwidht: 3\n"))]) == 2
    assert "widht" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.yaml")]) == 2


def run_csv(tmp_path, name, extra=()):
    cfg = write(
        tmp_path, "problem: heat\nd: 2\nwidth: 30\nn_int: 200\nn_sb: 60\nn_tb: 60\nweight_range: [-1, 1]\n"
    )
    out = tmp_path / name
    assert main(["run", "--config", str(cfg), "--n-test", "500", "--out", str(out), *extra]) == 0
    return list(csv.DictReader(io.StringIO(out.read_text(encoding="utf-8"))))


def test_run_is_deterministic_modulo_wall_time(tmp_path):
    a = run_csv(tmp_path, "a.csv")
    b = run_csv(tmp_path, "b.csv")
    assert list(a[0]) == CSV_COLUMNS
    for row in a + b:
        row.pop("wall_time")
    assert a == b
    assert float(a[0]["relative_l2"]) < 0.1
    c = run_csv(tmp_path, "c.csv", ["--seed-weights", "99"])
    assert c[0]["seed_weights"] == "99" and c[0]["relative_l2"] != a[0]["relative_l2"]


def test_run_to_stdout_and_rates(tmp_path, capsys):
    cfg = write(tmp_path, "problem: heat\nd: 1\nn_int: 200\nn_sb: 20\nn_tb: 60\nweight_range: [-1, 1]\n")
    assert main(["run", "--config", str(cfg), "--width", "10", "--n-test", "200"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].split(",") == CSV_COLUMNS and len(out) == 2
    assert main(["rates", "--config", str(cfg), "--widths", "5,20", "--n-test", "200"]) == 0
    captured = capsys.readouterr()
    assert captured.out.splitlines()[0] == "width,median,iqr,errors"
    assert "slope:" in captured.err
