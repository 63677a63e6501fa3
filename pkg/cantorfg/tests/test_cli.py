import json

import pytest

from cantorfg.core.exceptions import InvariantViolation, SpecError
from cantorfg.core.utils import Settings
from cantorfg.scripts.cli import EXIT_INVARIANT, EXIT_OK, EXIT_REJECTED, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


@pytest.mark.parametrize("base, primes", [("2", [2]), ("3", [3]), ("5", [5]), ("7", [7]),
                                          ("6", [2, 3]), ("2|3", [3])])
def test_fg_odometer(capsys, base, primes):
    code, report = run_json(capsys, "fg", "odometer", "--base", base)
    assert code == EXIT_OK
    assert report["schema"] == "cantor-fg/1"
    assert report["group"] == {"kind": "prime_generated", "primes": primes, "certified": True}


def test_fg_supernatural(capsys):
    code, report = run_json(capsys, "fg", "odometer", "--supernatural", "9^inf")
    assert code == EXIT_OK
    assert report["group"]["primes"] == [3]


def test_fg_odometer2(capsys):
    code, report = run_json(capsys, "fg", "odometer2", "--base1", "2", "--base2", "3")
    assert code == EXIT_OK
    assert report["group"]["primes"] == [2, 3]


def test_fg_denjoy_golden(capsys):
    code, report = run_json(capsys, "fg", "denjoy", "--theta", "(-1+sqrt(5))/2")
    assert code == EXIT_OK
    generator = report["group"]["generators"][0]
    assert report["group"]["kind"] == "cyclic"
    assert generator["minpoly"] == "x^2 - x - 1"
    assert generator["decimal"] == "1.618033988750"


def test_fg_denjoy_cubic_is_trivial(capsys):
    code, report = run_json(capsys, "fg", "denjoy", "--theta", "cbrt(2)-1")
    assert code == EXIT_OK
    assert report["group"]["kind"] == "trivial"


def test_fg_subgroup(capsys):
    code, report = run_json(capsys, "fg", "subgroup", "--lattice", "x^2-5; 1, a")
    assert code == EXIT_OK
    assert report["group"]["generators"][0]["decimal"] == "4.236067977500"


def test_rejected_input_gives_error_object(capsys):
    code, report = run_json(capsys, "fg", "denjoy", "--theta", "1/2")
    assert code == EXIT_REJECTED
    assert report["schema"] == "cantor-fg/1"
    assert report["error"]["type"] == "SpecError"
    assert "rational" in report["error"]["message"]


def test_usage_errors(capsys):
    assert main(["fg", "odometer", "--bogus"]) == EXIT_USAGE
    assert main(["fg", "odometer"]) == EXIT_USAGE
    assert main(["--format", "xml", "fg", "odometer", "--base", "2"]) == EXIT_USAGE


def test_invariant_violation_exit_code(capsys, mocker):
    mocker.patch("cantorfg.scripts.cli.odometer_group", side_effect=InvariantViolation("forced"))
    code, report = run_json(capsys, "fg", "odometer", "--base", "2")
    assert code == EXIT_INVARIANT
    assert report["error"]["type"] == "InvariantViolation"


def test_text_format(capsys):
    code, out = run(capsys, "--format", "text", "fg", "odometer", "--base", "2")
    assert code == EXIT_OK
    assert "schema: cantor-fg/1" in out.splitlines()


def test_config_defaults(capsys, tmp_path):
    config = tmp_path / "cantor.toml"
    config.write_text('[settings]\nsearch_bound = 500\n\n[fg.odometer]\nbase = "3"\n')
    code, report = run_json(capsys, "--config", str(config), "fg", "odometer")
    assert code == EXIT_OK
    assert report["group"]["primes"] == [3]


@pytest.mark.parametrize("text", ['[fg.odometer]\ncolour = "red"\n', '[settings]\nspeed = 3\n', '[plot]\nx = 1\n'])
def test_config_unknown_keys(capsys, tmp_path, text):
    config = tmp_path / "cantor.toml"
    config.write_text(text)
    assert main(["--config", str(config), "fg", "odometer", "--base", "2"]) == EXIT_USAGE


def test_bad_search_bound_env(capsys, monkeypatch):
    monkeypatch.setenv("CANTOR_FG_SEARCH_BOUND", "lots")
    assert main(["fg", "odometer", "--base", "2"]) == EXIT_USAGE


def test_verify_realizable(capsys):
    code, report = run_json(capsys, "verify", "realizable", "--group", "9")
    assert code == EXIT_OK
    assert report["realizable"] is False
    code, report = run_json(capsys, "verify", "realizable", "--group", "2, 3")
    assert report["realizable"] is True
    assert report["odometer"] == "odometer:6"


def test_verify_pell(capsys):
    code, report = run_json(capsys, "verify", "pell", "--dmax", "60")
    assert code == EXIT_OK
    assert report["all_agree"] is True
    first = report["rows"][0]
    assert (first["D"], first["t"], first["u"], first["agrees"]) == (5, 1, 1, True)
    assert first["epsilon0"] == "1.618033988750"


def test_verify_brown(capsys):
    code, report = run_json(capsys, "verify", "brown", "--system", "odometer:2", "--clopen", "[0]", "--levels", "3")
    assert code == EXIT_OK
    assert report["stages"]["1,2"] == "[0]"
    assert report["stages"]["1,1"] == "{}"
    fixed = [r for r in report["map"]["rules"] if r["target_level"] == [1, 1]]
    assert [r["source"] for r in fixed] == ["[0]"]


def test_verify_restriction_and_measure(capsys):
    code, report = run_json(capsys, "verify", "restriction", "--system", "odometer:3", "--clopen", "[0]",
                            "--depth", "3")
    assert code == EXIT_OK
    assert report["cover"] == [[0], [1], [-1]]
    code, report = run_json(capsys, "verify", "measure", "--system", "denjoy:sqrt(5)-2", "--depth", "4",
                            "--moves", "5")
    assert code == EXIT_OK
    assert report["checks"] == 25


def test_verify_scaling(capsys):
    code, report = run_json(capsys, "verify", "scaling", "--power", "2", "--depth", "4")
    assert code == EXIT_OK
    assert report["checks"][0]["witnessed"] is True
    assert report["checks"][0]["scale"] == "0.500000000000"


def test_verify_units(capsys):
    code, report = run_json(capsys, "verify", "units", "--field", "2*cos(2*pi/7)",
                            "--unit", "-1+2*cos(2*pi/7)+(2*cos(2*pi/7))^2", "--unit", "2-(2*cos(2*pi/7))^2")
    assert code == EXIT_OK
    assert report["discriminant"] == 49
    assert report["report"]["each_is_unit"] and report["report"]["independent"]


def test_describe_round_trips(capsys):
    code, report = run_json(capsys, "describe", "denjoy", "--theta", "(-1+sqrt(5))/2")
    assert code == EXIT_OK
    canonical = report["canonical"]
    code, again = run_json(capsys, "describe", "denjoy", "--theta", canonical.split(":", 1)[1])
    assert again["canonical"] == canonical
    code, report = run_json(capsys, "describe", "odometer", "--base", "2, 3 | 5")
    assert report["canonical"] == "odometer:2,3|5"


@pytest.mark.parametrize("system, clopen", [("odometer:2", "[a]"), ("odometer:2", "[0, x]"),
                                            ("denjoy:sqrt(5)-2", "[0, b)")])
def test_malformed_clopen_is_rejected(capsys, system, clopen):
    code, report = run_json(capsys, "verify", "brown", "--system", system, "--clopen", clopen)
    assert code == EXIT_REJECTED
    assert report["error"]["type"] == "SpecError"
    assert "bad clopen entry" in report["error"]["message"]


@pytest.mark.parametrize("bound", ["0", "-3", "ten"])
def test_search_bound_option_must_be_positive(capsys, bound):
    assert main(["--search-bound", bound, "fg", "odometer", "--base", "2"]) == EXIT_USAGE


@pytest.mark.parametrize("text", ['[settings]\nsearch_bound = 0\n', '[settings]\nsearch_bound = "many"\n',
                                  '[settings]\nsearch_bound = 2.5\n', '[settings]\nunit_box = true\n'])
def test_config_settings_are_type_checked(capsys, tmp_path, text):
    config = tmp_path / "cantor.toml"
    config.write_text(text)
    assert main(["--config", str(config), "fg", "odometer", "--base", "2"]) == EXIT_USAGE


def test_settings_update_accepts_numbers():
    updated = Settings().updated({"search_bound": 50, "independence_width": 1e-6})
    assert (updated.search_bound, updated.independence_width) == (50, 1e-6)
    with pytest.raises(SpecError):
        Settings().updated({"decimal_digits": "12"})
