# tests/test_experiment_service.py

import pytest
import sys
import os
import json

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def _config_text(experiment, params, output_path, seed=7):
    return json.dumps({
        "experiment": experiment,
        "params": params,
        "seed": seed,
        "output_path": str(output_path)
    })


def test_parse_config_fills_defaults(tmp_path):
    """Test parsing fills experiment defaults into params"""
    from dlab.services.experiment_service import parse_config

    config = parse_config(_config_text("norms", {"N_values": [10]}, tmp_path / "out.csv"))
    assert config.experiment == "norms"
    assert config.params["N_values"] == [10]
    assert config.params["samples"] == 20000
    assert config.seed == 7


def test_parse_config_unknown_experiment(tmp_path):
    """Test unknown experiment names list the valid ones"""
    from dlab.services.experiment_service import parse_config
    from dlab.core.exceptions import ValidationError

    with pytest.raises(ValidationError) as info:
        parse_config(_config_text("zeros", {}, tmp_path / "out.csv"))
    assert "hilbert" in str(info.value)


def test_parse_config_rejects_negative_samples(tmp_path):
    """Test negative sample counts fail validation"""
    from dlab.services.experiment_service import parse_config
    from dlab.core.exceptions import ValidationError

    with pytest.raises(ValidationError) as info:
        parse_config(_config_text("norms", {"N_values": [10], "samples": -5}, tmp_path / "out.csv"))
    assert "samples" in str(info.value)


def test_parse_config_missing_key_named(tmp_path):
    """Test a missing required param is named in the error"""
    from dlab.services.experiment_service import parse_config
    from dlab.core.exceptions import ValidationError

    with pytest.raises(ValidationError) as info:
        parse_config(_config_text("hilbert", {}, tmp_path / "out.csv"))
    assert "max_size" in str(info.value)


def test_parse_config_rejects_unknown_param(tmp_path):
    """Test unknown params are rejected"""
    from dlab.services.experiment_service import parse_config
    from dlab.core.exceptions import ValidationError

    with pytest.raises(ValidationError):
        parse_config(_config_text("hilbert", {"max_size": 3, "size": 4}, tmp_path / "out.csv"))


def test_parse_config_malformed_json():
    """Test malformed JSON reports its position"""
    from dlab.services.experiment_service import parse_config
    from dlab.core.exceptions import ConfigParseError

    with pytest.raises(ConfigParseError) as info:
        parse_config('{"experiment": "hilbert",\n "seed": }')
    assert "line 2" in str(info.value)


def test_parse_config_rejects_empty_window(tmp_path):
    """Test zetamax requires t_lo below t_hi"""
    from dlab.services.experiment_service import parse_config
    from dlab.core.exceptions import ValidationError

    params = {"N_values": [10], "t_lo": 5.0, "t_hi": 5.0}
    with pytest.raises(ValidationError):
        parse_config(_config_text("zetamax", params, tmp_path / "out.csv"))


def test_config_round_trip(tmp_path):
    """Test a serialized config parses back to itself"""
    from dlab.services.experiment_service import parse_config, serialize_config

    config = parse_config(_config_text("randmult", {"N_values": [5, 10]}, tmp_path / "out.csv"))
    assert parse_config(serialize_config(config)) == config


def test_list_experiments():
    """Test the registry lists every experiment once"""
    from dlab.services.experiment_service import ExperimentService

    infos = ExperimentService().list_experiments()
    names = [info.name for info in infos]
    assert len(names) == 9 and len(set(names)) == 9
    by_name = {info.name: info for info in infos}
    assert by_name["hilbert"].required_params == ["max_size"]
    assert by_name["field"].required_params == ["prime_limits"]
    assert "Helson" in by_name["helson"].description


def test_run_hilbert_writes_csv(tmp_path):
    """Test a hilbert run writes a preamble, header and one row per size"""
    from dlab import __version__
    from dlab.services.experiment_service import ExperimentService, parse_config
    from dlab.utils.csv_output import read_csv_rows

    output = tmp_path / "hilbert.csv"
    report = ExperimentService().run_experiment(parse_config(_config_text("hilbert", {"max_size": 5}, output)))
    assert report.rows_written == 5
    assert report.artifact_version == __version__

    lines = output.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith(f"# dirichlet-lab {__version__} config_sha256={report.config_hash}")
    rows = read_csv_rows(str(output))
    assert rows[0] == ["M", "norm"]
    assert [row[0] for row in rows[1:]] == ["1", "2", "3", "4", "5"]
    norms = [float(row[1]) for row in rows[1:]]
    assert norms == sorted(norms)


def test_run_is_byte_identical(tmp_path):
    """Test identical configs produce identical files"""
    from dlab.services.experiment_service import ExperimentService, parse_config

    output = tmp_path / "norms.csv"
    text = _config_text("norms", {"N_values": [6, 12], "p_values": [1.0, 4.0], "samples": 4000}, output)
    ExperimentService().run_experiment(parse_config(text))
    first = output.read_bytes()
    ExperimentService().run_experiment(parse_config(text))
    assert output.read_bytes() == first


def test_run_independent_of_threads(tmp_path, monkeypatch):
    """Test output bytes do not depend on DLAB_THREADS"""
    from dlab.core.config import get_settings
    from dlab.services.experiment_service import ExperimentService, parse_config

    output = tmp_path / "randmult.csv"
    text = _config_text("randmult", {"N_values": [20], "trials": 5000}, output)
    contents = []
    for threads in ("1", "4"):
        monkeypatch.setenv("DLAB_THREADS", threads)
        get_settings.cache_clear()
        ExperimentService().run_experiment(parse_config(text))
        contents.append(output.read_bytes())
    get_settings.cache_clear()
    assert contents[0] == contents[1]


def test_run_gcdsum_exhaustive(tmp_path):
    """Test a gcdsum run reports the optimal set"""
    from dlab.services.experiment_service import ExperimentService, parse_config
    from dlab.services.gcdsums import optimize_gamma
    from dlab.utils.csv_output import read_csv_rows

    output = tmp_path / "gcd.csv"
    params = {"N_values": [4], "universe_limit": 12, "alpha_values": [1.0]}
    ExperimentService().run_experiment(parse_config(_config_text("gcdsum", params, output)))

    rows = read_csv_rows(str(output))
    assert len(rows) == 2
    row = dict(zip(rows[0], rows[1]))
    best = optimize_gamma(4, 12, 1.0, "exhaustive")
    assert row["strategy"] == "exhaustive"
    assert [int(n) for n in row["set"].split()] == list(best.indices)
    assert float(row["gamma"]) == pytest.approx(best.gamma)
    assert row["reference"] == ""


def test_run_error_carries_experiment(tmp_path):
    """Test service failures are annotated with the experiment name"""
    from dlab.services.experiment_service import ExperimentService, parse_config
    from dlab.core.exceptions import BudgetError

    config = parse_config(_config_text("sidon", {"N_values": [7]}, tmp_path / "sidon.csv"))
    with pytest.raises(BudgetError) as info:
        ExperimentService().run_experiment(config)
    assert "experiment: sidon" in info.value.__notes__
    assert not (tmp_path / "sidon.csv").exists()


def test_cli_list(capsys):
    """Test the list command"""
    from dlab.api.cli import main

    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "partialsum" in out and "max_size" in out


def test_cli_run(tmp_path, capsys):
    """Test the run command prints a report"""
    from dlab.api.cli import main

    config = tmp_path / "config.json"
    output = tmp_path / "out.csv"
    config.write_text(_config_text("hilbert", {"max_size": 3}, output), encoding="utf-8")
    assert main(["run", str(config)]) == 0
    assert output.exists()
    assert '"rows_written": 3' in capsys.readouterr().out


def test_cli_invalid_config(tmp_path, capsys):
    """Test invalid configs exit with status 2"""
    from dlab.api.cli import main

    config = tmp_path / "config.json"
    config.write_text(_config_text("norms", {"N_values": [10], "samples": -5}, tmp_path / "o.csv"), encoding="utf-8")
    assert main(["run", str(config)]) == 2
    assert "ValidationError" in capsys.readouterr().err


def test_cli_unwritable_output(tmp_path):
    """Test an output path in a missing directory exits with status 5"""
    from dlab.api.cli import main

    config = tmp_path / "config.json"
    output = tmp_path / "missing" / "out.csv"
    config.write_text(_config_text("hilbert", {"max_size": 2}, output), encoding="utf-8")
    assert main(["run", str(config)]) == 5


def test_cli_missing_config(tmp_path, capsys):
    """Test an unreadable config file exits with status 5"""
    from dlab.api.cli import main

    assert main(["run", str(tmp_path / "nope.json")]) == 5
    assert "ConfigReadError" in capsys.readouterr().err


def test_cli_budget_exit_code(tmp_path, capsys):
    """Test a budget failure exits with status 3 and names the experiment"""
    from dlab.api.cli import main

    config = tmp_path / "config.json"
    config.write_text(_config_text("sidon", {"N_values": [7]}, tmp_path / "s.csv"), encoding="utf-8")
    assert main(["run", str(config)]) == 3
    assert "experiment: sidon" in capsys.readouterr().err


@pytest.fixture
def settings_env(monkeypatch):
    """Environment overrides with a fresh settings cache"""
    from dlab.core.config import get_settings

    get_settings.cache_clear()
    yield monkeypatch
    get_settings.cache_clear()


def _outputs_for_threads(settings_env, text, output, threads=("1", "4")):
    from dlab.core.config import get_settings
    from dlab.services.experiment_service import ExperimentService, parse_config

    contents = []
    for count in threads:
        settings_env.setenv("DLAB_THREADS", count)
        get_settings.cache_clear()
        ExperimentService().run_experiment(parse_config(text))
        contents.append(output.read_bytes())
    return contents


def test_parse_config_rejects_non_string_experiment(tmp_path):
    """Test list and object experiment names fail validation"""
    from dlab.services.experiment_service import parse_config
    from dlab.core.exceptions import ValidationError

    for name in (["hilbert"], {"name": "hilbert"}, 3, None):
        text = json.dumps({"experiment": name, "seed": 1, "output_path": str(tmp_path / "x.csv")})
        with pytest.raises(ValidationError) as info:
            parse_config(text)
        assert "valid names" in str(info.value)


def test_cli_non_string_experiment(tmp_path, capsys):
    """Test a list-valued experiment name exits with status 2"""
    from dlab.api.cli import main

    config = tmp_path / "config.json"
    config.write_text('{"experiment": ["hilbert"], "seed": 1, "output_path": "x"}', encoding="utf-8")
    assert main(["run", str(config)]) == 2
    assert "ValidationError" in capsys.readouterr().err


def test_service_reads_settings(settings_env):
    """Test the service keeps the settings it was built with"""
    from dlab.services.experiment_service import ExperimentService

    settings_env.setenv("DLAB_MC_BLOCK_SIZE", "512")
    service = ExperimentService()
    assert service.settings.mc_block_size == 512
    assert len(service.list_experiments()) == 9


def test_run_records_block_size(tmp_path, settings_env):
    """Test the preamble names the Monte Carlo block size"""
    from dlab.services.experiment_service import ExperimentService, parse_config

    settings_env.setenv("DLAB_MC_BLOCK_SIZE", "1024")
    output = tmp_path / "hilbert.csv"
    ExperimentService().run_experiment(parse_config(_config_text("hilbert", {"max_size": 2}, output)))
    assert "# mc_block_size=1024" in output.read_text(encoding="utf-8").splitlines()


def test_run_helson_columns(tmp_path):
    """Test helson rows carry the mean, its stderr and the ratio to sqrt(N)"""
    from dlab.services.experiment_service import ExperimentService, parse_config
    from dlab.services.randmult import moment_estimate
    from dlab.utils.csv_output import read_csv_rows

    output = tmp_path / "helson.csv"
    params = {"N_values": [100, 200, 400], "trials": 10000}
    report = ExperimentService().run_experiment(parse_config(_config_text("helson", params, output)))
    assert report.rows_written == 3

    rows = read_csv_rows(str(output))
    assert rows[0] == ["N", "mean_abs_sum", "stderr", "ratio_to_sqrtN"]
    for N, row in zip((100, 200, 400), rows[1:]):
        N_cell, mean, stderr, ratio = row
        assert int(N_cell) == N
        assert float(ratio) == pytest.approx(float(mean) / N ** 0.5, rel=1e-12)
        assert float(stderr) > 0
    direct = moment_estimate("steinhaus", 100, 1.0, 10000, 7)
    assert float(rows[1][1]) == direct.value


def test_run_helson_large_lengths(tmp_path):
    """Test the helson run at N up to 4000 with 10^4 trials"""
    from dlab.services.experiment_service import ExperimentService, parse_config
    from dlab.utils.csv_output import read_csv_rows

    output = tmp_path / "helson.csv"
    params = {"N_values": [1000, 2000, 4000], "trials": 10000}
    ExperimentService().run_experiment(parse_config(_config_text("helson", params, output)))

    rows = read_csv_rows(str(output))
    assert [int(row[0]) for row in rows[1:]] == [1000, 2000, 4000]
    for row in rows[1:]:
        # E|S_N| <= (E|S_N|^2)^(1/2) = sqrt(N)
        assert 0 < float(row[3]) < 1.05
    assert "inspection only" in output.read_text(encoding="utf-8")


def test_run_helson_independent_of_threads(tmp_path, settings_env):
    """Test helson output bytes do not depend on DLAB_THREADS"""
    output = tmp_path / "helson.csv"
    text = _config_text("helson", {"N_values": [50, 300], "trials": 3000}, output)
    contents = _outputs_for_threads(settings_env, text, output)
    assert contents[0] == contents[1]


def test_run_zetamax(tmp_path):
    """Test zetamax rows match max_abs_partial"""
    from dlab.services.experiment_service import ExperimentService, parse_config
    from dlab.services.zeta import max_abs_partial
    from dlab.utils.csv_output import read_csv_rows

    output = tmp_path / "zeta.csv"
    params = {"N_values": [1, 10], "t_lo": 0.0, "t_hi": 50.0, "gridpoints": 2001}
    ExperimentService().run_experiment(parse_config(_config_text("zetamax", params, output)))

    rows = read_csv_rows(str(output))
    assert rows[0] == ["N", "t_lo", "t_hi", "gridpoints", "t_star", "value"]
    first = dict(zip(rows[0], rows[1]))
    assert float(first["value"]) == pytest.approx(1)
    second = dict(zip(rows[0], rows[2]))
    result = max_abs_partial(10, 0.0, 50.0, 2001, refine=True)
    assert float(second["value"]) == result.value
    assert float(second["t_star"]) == result.t_star
    assert "# refine=true" in output.read_text(encoding="utf-8").splitlines()


def test_run_sidon(tmp_path):
    """Test sidon rows match sidon_constant under the run seed"""
    from dlab.services.experiment_service import ExperimentService, parse_config
    from dlab.services.zeta import sidon_constant
    from dlab.utils.csv_output import read_csv_rows

    output = tmp_path / "sidon.csv"
    params = {"N_values": [1, 3], "grid_per_dim": 16, "restarts": 2}
    ExperimentService().run_experiment(parse_config(_config_text("sidon", params, output)))

    rows = read_csv_rows(str(output))
    assert rows[0] == ["N", "S_N_estimate", "grid_per_dim", "restarts"]
    assert float(rows[1][1]) == 1
    assert float(rows[2][1]) == sidon_constant(3, 16, 2, seed=7)
    assert rows[2][2:] == ["16", "2"]


def test_run_field(tmp_path):
    """Test field rows hold one maximum per draw"""
    from dlab.services.experiment_service import ExperimentService, parse_config
    from dlab.services.randmult import field_max_draws
    from dlab.utils.csv_output import read_csv_rows

    output = tmp_path / "field.csv"
    params = {"prime_limits": [100], "draws": 20, "gridpoints": 257}
    report = ExperimentService().run_experiment(parse_config(_config_text("field", params, output)))
    assert report.rows_written == 20

    rows = read_csv_rows(str(output))
    assert rows[0] == ["prime_limit", "draw", "x_star", "m"]
    expected = field_max_draws(100, 257, 20, seed=7)
    for d, (row, result) in enumerate(zip(rows[1:], expected)):
        assert row[:2] == ["100", str(d)]
        assert 0 <= float(row[2]) <= 1
        assert float(row[3]) == result.m
    assert "overlay P=100" in output.read_text(encoding="utf-8")


def test_run_field_independent_of_threads(tmp_path, settings_env):
    """Test field output bytes do not depend on DLAB_THREADS"""
    output = tmp_path / "field.csv"
    text = _config_text("field", {"prime_limits": [50, 200], "draws": 12, "gridpoints": 129}, output)
    contents = _outputs_for_threads(settings_env, text, output)
    assert contents[0] == contents[1]


def test_run_partialsum(tmp_path):
    """Test partialsum rows with the exact p = 2 ratio"""
    from dlab.services.experiment_service import ExperimentService, parse_config
    from dlab.utils.csv_output import read_csv_rows

    output = tmp_path / "partial.csv"
    params = {"N_values": [5], "length_factor": 2, "p_values": [1.0, 2.0], "samples": 4000}
    ExperimentService().run_experiment(parse_config(_config_text("partialsum", params, output)))

    rows = read_csv_rows(str(output))
    assert rows[0] == ["N", "length", "p", "ratio", "stderr", "samples", "seed"]
    l1, l2 = (dict(zip(rows[0], row)) for row in rows[1:])
    assert l1["length"] == "10" and l1["samples"] == "4000" and l1["seed"] == "7"
    assert 0 < float(l1["ratio"]) < 2 and float(l1["stderr"]) > 0
    assert float(l2["ratio"]) == pytest.approx(0.5 ** 0.5)
    assert float(l2["stderr"]) == 0


def test_cli_invalid_thread_setting(tmp_path, settings_env, capsys):
    """Test DLAB_THREADS of 0 or a non-integer exits with status 2"""
    from dlab.api.cli import main
    from dlab.core.config import get_settings

    config = tmp_path / "config.json"
    config.write_text(_config_text("hilbert", {"max_size": 2}, tmp_path / "o.csv"), encoding="utf-8")
    for value in ("0", "abc"):
        settings_env.setenv("DLAB_THREADS", value)
        get_settings.cache_clear()
        assert main(["run", str(config)]) == 2
        err = capsys.readouterr().err
        assert "ValidationError" in err and "DLAB_THREADS" in err
    assert not (tmp_path / "o.csv").exists()
