import csv
import io
import json

import numpy as np
import pytest

from h4iqpe import cli
from h4iqpe.config import ExperimentConfig, parse_config_text, validate
from h4iqpe.errors import ConfigError, ScfNotConverged, UnsupportedPlot
from h4iqpe.experiments import build_system
from h4iqpe.molsys import read_fcidump
from h4iqpe.plots import emit_plot, read_artifact
from h4iqpe.qham import QubitHamiltonian


def run(tmp_path, *argv):
    return cli.main([*argv, "--out", str(tmp_path)])


def header(path):
    return [l for l in path.read_text().splitlines() if l.startswith("#")]


def body_columns(path):
    _, rows = read_artifact(path)
    return list(rows[0]) if rows else []


# --- config -------------------------------------------------------------------------

def test_config_round_trip():
    cfg = ExperimentConfig(betas=(80.0, 89.8), preps=("hf", "uccd-min(24)"), shots=(25, 100), seed=2 ** 64 - 1,
                           plots=True)
    assert parse_config_text(cfg.to_text()) == cfg


def test_config_parse_errors():
    with pytest.raises(ConfigError):
        parse_config_text("nonsense = 1")
    with pytest.raises(ConfigError):
        parse_config_text("seed = 1\nseed = 2")
    with pytest.raises(ConfigError):
        parse_config_text("seed 1")
    with pytest.raises(ConfigError):
        parse_config_text("bits = many")
    text = "# comment\n\nbetas = 80, 85\nplots = yes\n"
    cfg = parse_config_text(text)
    assert cfg.betas == (80.0, 85.0) and cfg.plots is True


@pytest.mark.parametrize("kw", [dict(betas=(90.0,)), dict(betas=(79.0,)), dict(betas=(80.0,), bits=25),
                                dict(betas=(80.0,), seed=-1), dict(betas=(80.0,), threads=0),
                                dict(betas=(80.0,), shots=(0,)), dict(betas=(80.0,), window="left"),
                                dict(betas=(80.0,), methods=("ccsd",)), dict(betas=())])
def test_validate_rejects(kw):
    with pytest.raises(ConfigError):
        validate(ExperimentConfig(**kw), "pes")


@pytest.mark.parametrize("argv", [["pes", "--beta", "90"], ["shot-stats", "--seed", "-1"],
                                  ["iqpe-conv", "--set", "bits_max=99"], ["pes", "--set", "colour=red"],
                                  ["shot-stats", "--set", "preps=bogus"], ["pes", "--threads", "x"],
                                  ["pes", "--config", "/nonexistent/file"]])
def test_exit_code_config(tmp_path, argv):
    assert run(tmp_path, *argv) == cli.EXIT_CONFIG


def test_exit_code_numerical(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise ScfNotConverged("forced")
    monkeypatch.setattr(cli, "build_system", boom)
    assert run(tmp_path, "fcidump-export") == cli.EXIT_NUMERIC


def test_exit_code_assertion(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "quantization_bound", lambda m, w: -1.0)
    assert run(tmp_path, "iqpe-conv", "--beta", "80", "--set", "bits_max=6") == cli.EXIT_ASSERT


# --- subcommands --------------------------------------------------------------------

def test_pes(tmp_path):
    assert run(tmp_path, "pes", "--beta", "80,100", "--set", "vqe_evals=300", "--plot") == 0
    p = tmp_path / "pes.csv"
    h = header(p)
    assert h[0] == "# schema: pes/v1"
    assert "# betas = 80.0, 100.0" in h
    assert body_columns(p) == ["beta_deg", "hf_hartree", "vqe_hartree", "iqpe_over_vqe_hartree", "fci_hartree"]
    doc = json.loads((tmp_path / "pes_npe.json").read_text())
    assert doc["schema"] == "pes-npe/v1" and set(doc["methods"]) == {"hf", "vqe", "iqpe_over_vqe"}
    svg = (tmp_path / "pes.svg").read_text()
    assert svg.count('class="series"') == 4
    _, rows = read_artifact(p)
    for r in rows:
        assert float(r["hf_hartree"]) >= float(r["vqe_hartree"]) >= float(r["fci_hartree"]) - 1e-9


def test_pes_method_subset(tmp_path):
    assert run(tmp_path, "pes", "--beta", "85", "--set", "methods=hf,fci") == 0
    assert body_columns(tmp_path / "pes.csv") == ["beta_deg", "hf_hartree", "fci_hartree"]


def test_iqpe_conv(tmp_path):
    assert run(tmp_path, "iqpe-conv", "--beta", "80", "--set", "bits_max=8", "--plot") == 0
    p = tmp_path / "iqpe_conv.csv"
    assert header(p)[0] == "# schema: iqpe-conv/v1"
    _, rows = read_artifact(p)
    assert [int(r["m_bits"]) for r in rows] == list(range(4, 9))
    assert all(len(r["bits"]) == int(r["m_bits"]) for r in rows)
    assert (tmp_path / "iqpe_conv.svg").exists()


def test_overlap_scan(tmp_path):
    argv = ["overlap-scan", "--set", "vqe_evals=100", "--set", "checkpoints=0,10,100", "--plot"]
    assert run(tmp_path, *argv) == 0
    p = tmp_path / "overlap_scan.csv"
    _, rows = read_artifact(p)
    assert len(rows) == 6
    assert body_columns(p) == ["beta_deg", "guess", "eval_index", "energy_hartree", "GS", "ES1", "ES2", "ES3"]
    first = [r for r in rows if r["eval_index"] == "0"]
    s = build_system(89.8)
    for r in first:
        assert float(r["energy_hartree"]) == pytest.approx(s.scf.E_hf, abs=1e-9)
    svg = (tmp_path / "overlap_scan.svg").read_text()
    assert svg.count('class="series"') == 8


def test_shot_stats_and_replay(tmp_path):
    argv = ["shot-stats", "--set", "shots=5,20", "--set", "repetitions=6", "--set", "bits=8",
            "--set", "preps=hf,uccd-min(24)", "--seed", "11"]
    assert run(tmp_path / "a", *argv) == 0
    a = tmp_path / "a" / "shot_stats.csv"
    assert header(a)[0] == "# schema: shot-stats/v1"
    _, rows = read_artifact(a)
    assert len(rows) == 4
    assert all(0 < int(r["modal_frequency"]) <= 6 for r in rows)
    doc = json.loads((tmp_path / "a" / "shot_stats.json").read_text())
    assert doc["config"]["seed"] == 11 and len(doc["blocks"]) == 4
    hist = tmp_path / "a" / "shot_stats_hist.csv"
    assert header(hist)[0] == "# schema: shot-hist/v1"
    # the artifact header reproduces the run
    assert cli.main(["shot-stats", "--config", str(a), "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "b" / "shot_stats.csv").read_text().replace(str(tmp_path / "b"), "X") == \
        a.read_text().replace(str(tmp_path / "a"), "X")


def test_fcidump_export(tmp_path):
    assert run(tmp_path, "fcidump-export", "--beta", "80,89.8") == 0
    s = build_system(80.0)
    h1, eri, e_nuc, head = read_fcidump(tmp_path / "FCIDUMP_beta80")
    assert head["NORB"] == 4 and head["NELEC"] == 4
    assert np.allclose(h1, s.so.h1_mo, atol=1e-14)
    assert np.allclose(eri, s.so.eri_mo, atol=1e-14)
    occ = range(2)
    e = e_nuc + sum(2 * h1[i, i] for i in occ) + sum(2 * eri[i, i, j, j] - eri[i, j, j, i] for i in occ for j in occ)
    assert e == pytest.approx(s.scf.E_hf, abs=1e-10)
    assert (tmp_path / "FCIDUMP_beta89p8").exists()


def test_hamiltonian_dump(tmp_path):
    assert run(tmp_path, "hamiltonian-dump", "--beta", "89.8") == 0
    p = tmp_path / "hamiltonian_beta89p8.txt"
    assert header(p)[0] == "# schema: hamiltonian/v1"
    H = QubitHamiltonian.load(p.read_text())
    ref = build_system(89.8).H
    assert len(H) == len(ref) == 97
    for term, c in ref.terms.items():
        assert H.terms[term] == pytest.approx(c, abs=1e-12)


def test_threads_match_serial(tmp_path):
    argv = ["pes", "--beta", "80,85", "--set", "methods=hf,fci"]
    assert run(tmp_path / "s", *argv) == 0
    assert run(tmp_path / "p", *argv, "--threads", "2") == 0
    a = read_artifact(tmp_path / "s" / "pes.csv")[1]
    b = read_artifact(tmp_path / "p" / "pes.csv")[1]
    assert a == b


# --- plots --------------------------------------------------------------------------

def test_plot_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("# schema: pes/v1\nbeta_deg,hf_hartree,fci_hartree\n")
    with pytest.raises(UnsupportedPlot):
        emit_plot(empty)
    other = tmp_path / "other.csv"
    other.write_text("# schema: unknown/v9\na,b\n1,2\n")
    with pytest.raises(UnsupportedPlot):
        emit_plot(other)
    with pytest.raises(UnsupportedPlot):
        emit_plot(other, kind="pie")
    with pytest.raises(UnsupportedPlot):
        emit_plot(other, kind="pes")


def test_version(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["--version"])
    assert e.value.code == 0
    assert capsys.readouterr().out.strip() == cli.__version__
