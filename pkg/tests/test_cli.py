import numpy as np
import pytest

from chaindiff.cli import bundled_scenarios, emit_plotdata, main
from chaindiff.config import ConfigParseError, ConfigValidationError, parse_text
from chaindiff.errors import ValidationError
from chaindiff.odesim import TimeSeries

ESTIMATE = """
[scenario]
kind = estimate
[sim]
t_end = 0.5
h = 1e-3
[differentiator]
gains = {gains}
epsilon = 0.1
[signal]
kind = sinusoid
"""


def _summary(path):
    return dict(line.split(" = ", 1) for line in path.read_text().splitlines())


def test_list_scenarios(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    for name in ("noisy-tracking", "equivalence", "convergence-race", "epsilon-sweep"):
        assert name in out


@pytest.mark.parametrize("name", sorted(bundled_scenarios()))
def test_bundled_configs_validate(name):
    assert main(["validate", name, "--quiet"]) == 0


def test_tracking_scenario_run(tmp_path):
    assert main(["run", "noisy-tracking", "--out", str(tmp_path), "--quiet"]) == 0
    assert (tmp_path / "closed_loop_integral-chain-linear.csv").exists()
    assert (tmp_path / "closed_loop_high-gain-linear.csv").exists()
    s = _summary(tmp_path / "summary.txt")
    assert float(s["integral-chain-linear.rms_omega_err"]) < float(s["high-gain-linear.rms_omega_err"])
    assert s["primary_better_omega"] == "true"


def test_equivalence_scenario_passes(tmp_path):
    assert main(["run", "equivalence", "--out", str(tmp_path), "-q"]) == 0
    assert _summary(tmp_path / "summary.txt")["pass"] == "true"


def test_non_hurwitz_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text(ESTIMATE.format(gains="-1, 1, 1"))
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 3
    err = capsys.readouterr().err
    assert "Hurwitz" in err and "bad.ini:8" in err


def test_parse_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text(ESTIMATE.format(gains="1, two"))
    assert main(["validate", str(cfg)]) == 2
    assert "bad.ini:8" in capsys.readouterr().err
    assert main(["validate", str(tmp_path / "missing.ini")]) == 2


def test_integration_failure_exit_code(tmp_path):
    cfg = tmp_path / "coarse.ini"
    cfg.write_text(ESTIMATE.format(gains="1, 2").replace("t_end = 0.5", "t_end = 100")
                   .replace("h = 1e-3", "h = 0.1").replace("epsilon = 0.1", "epsilon = 0.001"))
    assert main(["run", str(cfg), "--out", str(tmp_path / "o"), "-q"]) == 4


def test_seed_override_changes_noise(tmp_path):
    outs = []
    for seed in ("1", "1", "2"):
        d = tmp_path / f"s{len(outs)}"
        assert main(["run", "estimate", "--seed", seed, "--out", str(d), "-q"]) == 0
        outs.append((d / "trajectory.csv").read_bytes())
    assert outs[0] == outs[1] != outs[2]
    assert _summary(tmp_path / "s2" / "summary.txt")["seed"] == "2"


@pytest.mark.parametrize("name", ["noisy-tracking", "equivalence", "epsilon-sweep", "estimate"])
def test_rerun_is_byte_identical(tmp_path, name):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", name, "--out", str(a), "-q"]) == 0
    assert main(["run", name, "--out", str(b), "-q"]) == 0
    files = sorted(p.name for p in a.iterdir())
    assert files == sorted(p.name for p in b.iterdir())
    for f in files:
        assert (a / f).read_bytes() == (b / f).read_bytes(), f


def test_plotdata_selection():
    ts = TimeSeries(["t", "e1", "u"], np.column_stack([np.arange(5.0), np.ones(5), np.zeros(5)]))
    text = emit_plotdata(ts, ["t", "e1"])
    lines = text.splitlines()
    assert lines[0] == "# t e1"
    assert len(lines) == 6 and all(len(l.split()) == 2 for l in lines[1:])
    assert emit_plotdata(ts, ["e1"]).splitlines()[0] == "# t e1"
    with pytest.raises(ValidationError):
        emit_plotdata(ts, [])
    with pytest.raises(ValidationError):
        emit_plotdata(ts, ["t", "nope"])


def test_plotdata_loads_with_numpy(tmp_path):
    ts = TimeSeries(["t", "x"], np.column_stack([np.arange(3.0), [1e-20, 2.5, -3.0]]))
    emit_plotdata(ts, path=tmp_path / "x.dat")
    np.testing.assert_array_equal(np.loadtxt(tmp_path / "x.dat"), ts.data)


def test_config_unknown_kind():
    with pytest.raises(ConfigValidationError, match="unknown scenario kind"):
        parse_text("[scenario]\nkind = magic\n[sim]\nt_end = 1\n")


def test_config_missing_section():
    with pytest.raises(ConfigValidationError, match=r"\[differentiator\]"):
        parse_text("[scenario]\nkind = estimate\n[sim]\nt_end = 1\n")


def test_config_sum_signal_and_seed_override():
    text = ESTIMATE.format(gains="1, 2").replace("kind = sinusoid", "kind = sum\ncomponents = a, b")
    text += "[signal.a]\nkind = constant\nlevel = 1\n[signal.b]\nkind = polynomial\ncoefficients = 0, 1\n"
    text += "[noise]\nkind = uniform\nhalf_width = 0.01\nseed = 4\n"
    sc = parse_text(text, seed=9)
    assert sc.signal.eval(2.0, 0) == 3.0
    assert sc.noise.seed == 9


def test_config_bad_sweep():
    text = ESTIMATE.format(gains="1, 2").replace("estimate", "epsilon-sweep") + "[sweep]\nepsilons = 0.1, 0.05\n"
    with pytest.raises(ConfigValidationError, match="epsilons"):
        parse_text(text)


def test_config_parse_error_has_line():
    with pytest.raises(ConfigParseError, match=r"<string>:\d+"):
        parse_text("[scenario]\nkind = estimate\n[sim]\nt_end = abc\n")
