import json

import numpy as np
import pytest
from click.testing import CliRunner

import krausfold.service.app as service_app
from krausfold.channel import kraus_to_json_dict, load_kraus, save_kraus
from krausfold.cli import main
from krausfold.emit import CSV_HEADER
from krausfold.sampler import SamplerConfig, sample_channel
from krausfold.tables import QUTRIT_SIO15


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def sio_file(tmp_path):
    s = sample_channel(SamplerConfig(regime=QUTRIT_SIO15, seed=0))
    path = tmp_path / "sio.json"
    save_kraus(s, path)
    return path


@pytest.fixture
def hadamard_file(tmp_path):
    h = np.ones((2, 2), dtype=complex) / np.sqrt(2.0)
    h[1, 1] *= -1.0
    path = tmp_path / "h.json"
    path.write_text(
        json.dumps(
            {"dim": 2, "operators": [[[[x.real, 0.0] for x in row] for row in h]]}
        )
    )
    return path


def test_verify_pass(runner, sio_file):
    result = runner.invoke(main, ["verify", str(sio_file)])
    assert result.exit_code == 0
    assert "dim: 3  operators: 15" in result.output
    assert "channel: yes" in result.output
    assert result.output.rstrip().endswith("PASS")


def test_verify_fail_on_coherent_set(runner, hadamard_file):
    result = runner.invoke(main, ["verify", str(hadamard_file)])
    assert result.exit_code == 1
    assert "incoherent=NO" in result.output
    assert "FAIL" in result.output


def test_verify_missing_file(runner):
    result = runner.invoke(main, ["verify", "/nonexistent/kraus.json"])
    assert result.exit_code == 2
    assert "cannot read" in result.output


def test_verify_malformed_json(runner, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"dim": 3,\n "operators": [}\n')
    result = runner.invoke(main, ["verify", str(path)])
    assert result.exit_code == 2
    assert "invalid JSON at line 2 column 16" in result.output


def test_verify_wrong_schema(runner, tmp_path):
    path = tmp_path / "wrong.json"
    path.write_text('{"dim": 3}')
    result = runner.invoke(main, ["verify", str(path)])
    assert result.exit_code == 2
    assert "dim" in result.output and "operators" in result.output


def test_reduce_writes_output_and_report(runner, sio_file, tmp_path):
    out = tmp_path / "reduced.json"
    result = runner.invoke(
        main,
        ["reduce", str(sio_file), "--regime", "qutrit-sio", "--out", str(out)],
    )
    assert result.exit_code == 0
    report = json.loads(result.output)
    assert report["op_count_before"] == 15
    assert report["op_count_after"] <= 13
    assert report["choi_distance"] <= 1e-9
    assert report["status"] in ("Reduced", "FallbackUsed")
    reduced = load_kraus(out)
    assert len(reduced) == report["op_count_after"]


def test_reduce_regime_mismatch(runner, sio_file):
    result = runner.invoke(main, ["reduce", str(sio_file), "--regime", "qubit-io"])
    assert result.exit_code == 2


def test_reduce_rejects_unknown_regime_choice(runner, sio_file):
    result = runner.invoke(main, ["reduce", str(sio_file), "--regime", "qudit-io"])
    assert result.exit_code == 2


def test_reduce_not_reduced_exit_code(runner, sio_file, monkeypatch):
    class Stuck:
        op_count_before = 15
        op_count_after = 15
        choi_distance = 0.0
        all_incoherent = True
        strictly_incoherent = True
        status = "NotReduced"
        log = ()

        def __init__(self, s):
            self.result = s

    monkeypatch.setitem(
        service_app._REDUCERS,
        "qutrit-sio",
        (lambda s, force_fallback=False: Stuck(s), QUTRIT_SIO15),
    )
    result = runner.invoke(main, ["reduce", str(sio_file), "--regime", "qutrit-sio"])
    assert result.exit_code == 3
    assert json.loads(result.output)["status"] == "NotReduced"


def test_region_writes_csv_and_svg(runner, tmp_path):
    csv_path = tmp_path / "r.csv"
    svg_path = tmp_path / "r.svg"
    result = runner.invoke(
        main,
        [
            "region",
            "--section", "1,8",
            "--n", "6",
            "--seed", "3",
            "--csv", str(csv_path),
            "--svg", str(svg_path),
        ],
    )
    assert result.exit_code == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 7
    first = lines[1].split(",")
    assert first[0] == "0"
    assert float(first[1]) == 0.5
    assert svg_path.read_text().startswith("<svg")
    assert "condition 1: violations=0" in result.output


def test_region_header_only_when_empty(runner, tmp_path):
    csv_path = tmp_path / "empty.csv"
    result = runner.invoke(
        main, ["region", "--section", "1,8", "--n", "0", "--csv", str(csv_path)]
    )
    assert result.exit_code == 0
    assert csv_path.read_text() == CSV_HEADER + "\n"


def test_region_deterministic(runner, tmp_path):
    args = ["region", "--section", "1,4", "--kind", "io", "--n", "5", "--seed", "11"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert runner.invoke(main, args + ["--csv", str(a)]).exit_code == 0
    assert runner.invoke(main, args + ["--csv", str(b)]).exit_code == 0
    assert a.read_text() == b.read_text()


def test_region_diagonal_section_populates_margin2(runner, tmp_path):
    csv_path = tmp_path / "diag.csv"
    result = runner.invoke(
        main, ["region", "--section", "7,8", "--n", "3", "--csv", str(csv_path)]
    )
    assert result.exit_code == 0
    header = CSV_HEADER.split(",")
    rows = [line.split(",") for line in csv_path.read_text().splitlines()[1:]]
    col = {name: i for i, name in enumerate(header)}
    for row in rows:
        assert row[col["cond2"]] in ("0", "1")
        assert row[col["margin2"]] != ""
        assert row[col["cond1"]] == ""
        assert row[col["margin1"]] == ""
    identity_residual = float(rows[0][col["margin2"]])
    assert identity_residual == pytest.approx(-1.5207259421636898, abs=1e-12)


def test_region_bad_section(runner, tmp_path):
    result = runner.invoke(
        main, ["region", "--section", "1,9", "--csv", str(tmp_path / "x.csv")]
    )
    assert result.exit_code != 0
    assert "within 1..8" in result.output


def test_choi_rank_command(runner, sio_file, tmp_path):
    result = runner.invoke(main, ["choi-rank", str(sio_file)])
    assert result.exit_code == 0
    assert result.output.startswith("choi rank: ")
    assert "spectrum (descending):" in result.output


def test_choi_rank_rejects_non_channel(runner, tmp_path):
    path = tmp_path / "half.json"
    path.write_text(
        json.dumps(
            {
                "dim": 2,
                "operators": [[[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]],
            }
        )
    )
    result = runner.invoke(main, ["choi-rank", str(path)])
    assert result.exit_code == 1


def test_remote_url_connection_failure(runner, sio_file):
    result = runner.invoke(
        main, ["verify", str(sio_file), "--url", "http://127.0.0.1:1"]
    )
    assert result.exit_code == 2
    assert "request to" in result.output
