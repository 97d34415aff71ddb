import csv
import io
import math
import subprocess
import sys

import pytest

from afhos.cli import (
    CSV_HEADER,
    RunConfig,
    db_to_linear,
    dump_link_text,
    main,
    parse_link_text,
    parse_snr_range,
    z_score,
)
from afhos.errors import ConfigError
from afhos.fading import GammaHop, GeneralizedGammaHop, LinkConfig, deterministic_hop

DET = "[hop 1]\nmodel = deterministic\ngamma_bar = 10\n"
GG3 = "".join(f"[hop {i}]\nmodel = generalized_gamma\nm = 2.34\nxi = 1.23\ngamma_bar_db = 10\n\n" for i in (1, 2, 3))


@pytest.fixture
def write(tmp_path):
    def _write(text, name="link.ini"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return _write


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_parse_link_file_models_and_sections():
    text = GG3 + "[quadrature]\nrel_tol = 1e-9\n\n[gl]\ndelta = 0.02\nrichardson = false\n\n[montecarlo]\nseed = 7\n"
    cfg = parse_link_text(text)
    assert cfg.link == LinkConfig.repeat(GeneralizedGammaHop(2.34, 1.23, 10.0), 3)
    assert cfg.quadrature.rel_tol == 1e-9
    assert cfg.gl.delta == 0.02 and cfg.gl.richardson is False
    assert cfg.montecarlo == {"seed": 7}
    assert parse_link_text(DET).link == LinkConfig([deterministic_hop(10.0)])


@pytest.mark.parametrize(
    "text",
    [
        "[hop 1]\nmodel = gamma\nm = 2\ngamma_bar = 10\ntypo = 1\n",
        "[hop 1]\nmodel = gamma\ngamma_bar = 10\n",
        "[hop 1]\nmodel = rayleigh\ngamma_bar = 10\n",
        "[hop 1]\nmodel = gamma\nm = 2\ngamma_bar = 10\ngamma_bar_db = 10\n",
        "[hop 2]\nmodel = deterministic\ngamma_bar = 10\n",
        "[hop 1]\nmodel = gamma\nm = 0.3\ngamma_bar = 10\n",
        "[hop 1]\nmodel = gamma\nm = abc\ngamma_bar = 10\n",
        DET + "[extra]\nx = 1\n",
        DET + "[quadrature]\nrel_tol = -1\n",
        DET + "[gl]\nstep = 0.1\n",
        "",
        "not an ini file",
    ],
)
def test_parse_errors(text):
    with pytest.raises(ConfigError):
        parse_link_text(text)


def test_db_boundary_is_exact():
    assert db_to_linear(10.0) == 10.0
    assert parse_link_text("[hop 1]\nmodel = gamma\nm = 2\ngamma_bar_db = 10\n").link.hops[0].gamma_bar == 10.0


def test_dump_round_trip():
    link = LinkConfig([GammaHop(2.34, 10.0), GeneralizedGammaHop(1.7, 0.9, 3.3), deterministic_hop(math.pi), GammaHop(0.5, db_to_linear(13.0))])
    cfg = RunConfig(link, montecarlo={"seed": 3, "num_samples": 1000})
    again = parse_link_text(dump_link_text(cfg))
    assert again == cfg
    assert "gamma_bar_db = 13.0" in dump_link_text(cfg)


def test_snr_range_parsing():
    assert parse_snr_range("0:25:1") == [float(x) for x in range(26)]
    assert parse_snr_range("5:5:1") == [5.0]
    assert parse_snr_range("0:1:0.1")[-1] == 1.0


def test_z_score_zero_spread():
    assert z_score(2.0, 2.0, 0.0) == 0.0
    assert z_score(2.0 + 1e-9, 2.0, 0.0) == 0.0
    assert math.isinf(z_score(2.1, 2.0, 0.0))
    assert z_score(2.3, 2.0, 0.1) == pytest.approx(3.0)


def test_hos_deterministic(write, capsys):
    code, out, _ = run(["hos", "--link", write(DET), "--orders", "0,1"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["n", "mu", "mu_err"]
    assert float(rows[1][1]) == pytest.approx(1.0, abs=1e-8)
    assert float(rows[2][1]) == pytest.approx(math.log(11), rel=1e-12)


def test_hos_bits_conversion(write, capsys):
    _, nats, _ = run(["hos", "--link", write(DET), "--orders", "2"], capsys)
    _, bits, _ = run(["hos", "--link", write(DET), "--orders", "2", "--bits"], capsys)
    mu_nats = float(nats.splitlines()[1].split(",")[1])
    mu_bits = float(bits.splitlines()[1].split(",")[1])
    assert mu_bits == pytest.approx(mu_nats / math.log(2) ** 2, rel=1e-15)


def test_exit_code_parse_error(write, capsys):
    code, _, err = run(["hos", "--link", write("[hop 1]\nmodel = gamma\n")], capsys)
    assert code == 2 and "error" in err
    code, _, _ = run(["hos", "--link", "/nonexistent/link.ini"], capsys)
    assert code == 2
    with pytest.raises(SystemExit) as info:
        main(["hos"])
    assert info.value.code == 2


def test_exit_code_convergence_failure(write, capsys):
    text = "[hop 1]\nmodel = gamma\nm = 2.34\ngamma_bar = 10\n\n[quadrature]\nrel_tol = 1e-16\nabs_tol = 0\nmax_refinements = 2\n"
    code, _, err = run(["hos", "--link", write(text), "--orders", "1,2"], capsys)
    assert code == 3
    assert "partial" in err


def test_sweep_csv(write, capsys, tmp_path):
    out = tmp_path / "sweep.csv"
    code, _, _ = run(["sweep", "--link", write(GG3), "--snr-db", "0:10:5", "--hops", "1,3", "--orders", "1,2", "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == CSV_HEADER
    assert rows[0][:7] == ["snr_db", "hops", "n", "mu", "mu_err", "aod", "reliability_pct"]
    assert len(rows) == 1 + 3 * 2 * 2
    for r in rows[1:]:
        assert r[-1] == ""
        assert float(r[6]) == pytest.approx(100 - 100 * float(r[5]), abs=1e-12)
    assert rows[1][:3] == ["0.0", "1", "1"]


def test_sweep_single_point(write, capsys):
    code, out, _ = run(["sweep", "--link", write(GG3), "--snr-db", "7:7:1", "--hops", "3", "--orders", "4"], capsys)
    assert code == 0
    assert len(out.strip().splitlines()) == 2


def test_sweep_failed_points_are_marked(write, capsys):
    text = GG3 + "[quadrature]\nrel_tol = 1e-16\nabs_tol = 0\nmax_refinements = 2\n"
    code, out, _ = run(["sweep", "--link", write(text), "--snr-db", "10:10:1", "--hops", "1", "--orders", "1"], capsys)
    assert code == 3
    row = out.strip().splitlines()[1].split(",")
    assert row[-1] == "ConvergenceError" and row[3] == ""


def test_verify_deterministic_and_order_zero(write, capsys):
    code, out, _ = run(["verify", "--link", write(DET), "--orders", "0,1,4", "--mc-samples", "1000"], capsys)
    assert code == 0
    table = [line.split(",") for line in out.splitlines() if line[:2] in ("0,", "1,", "4,")]
    assert [float(r[4]) for r in table] == [0.0, 0.0, 0.0]
    assert "result: PASS" in out


def test_verify_failure_exit_code(write, capsys):
    # a deliberately wrong analytic kernel step makes the comparison fail
    text = GG3 + "[gl]\ndelta = 0.5\nrichardson = false\n"
    code, out, _ = run(["verify", "--link", write(text), "--orders", "4", "--mc-samples", "200000", "--seed", "1"], capsys)
    assert code == 4
    assert "result: FAIL" in out


def test_verify_is_byte_identical(write, tmp_path):
    link = write(GG3)
    outs = []
    for i in range(2):
        path = tmp_path / f"v{i}.txt"
        assert main(["verify", "--link", link, "--mc-samples", "20000", "--seed", "99", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_dump_config_command_round_trips(write, capsys):
    code, out, _ = run(["dump-config", "--link", write(GG3), "--delta", "0.02"], capsys)
    assert code == 0
    cfg = parse_link_text(out)
    assert cfg.link == parse_link_text(GG3).link and cfg.gl.delta == 0.02


def test_module_entry_point(write):
    proc = subprocess.run([sys.executable, "-m", "afhos", "hos", "--link", write(DET), "--orders", "1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1].startswith("1,2.397895272798")
