import csv
import subprocess
import sys

import pytest

from greechie.canon import canonical_form
from greechie.cli import EXIT_INPUT, EXIT_OK, EXIT_USAGE, main
from greechie.diagram import parse_diagram

MODULAR = "(av(b^(avc)))=((avb)^(avc))"


@pytest.fixture
def mgre(tmp_path):
    p = tmp_path / "m.gre"
    p.write_text("123,345.\n123,345,567.\n")
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_beta5(capsys):
    code, out, err = run(capsys, "gen", "-b", "5")
    assert code == EXIT_OK
    assert len(out.splitlines()) == 9
    assert err.strip() == "9 diagrams"


def test_gen_foot_free(capsys):
    code, out, err = run(capsys, "gen", "-b", "5", "--foot-free")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert len(lines) == 1
    assert parse_diagram(lines[0]).alpha == 10


def test_gen_to_file(capsys, tmp_path):
    target = tmp_path / "out.gre"
    code, out, err = run(capsys, "gen", "-b", "4", "-o", str(target))
    assert code == EXIT_OK and out == ""
    assert len(target.read_text().splitlines()) == 4


@pytest.mark.parametrize("k", [2, 5])
def test_gen_parts_cover_everything(capsys, k):
    _, whole, _ = run(capsys, "gen", "-b", "7")
    pieces = []
    for r in range(k):
        _, out, _ = run(capsys, "gen", "-b", "7", "--part", f"{r}/{k}")
        pieces += out.splitlines()
    key = lambda lines: sorted(canonical_form(parse_diagram(s)) for s in lines)  # noqa: E731
    assert key(pieces) == key(whole.splitlines())


def test_check_transcript(capsys, mgre):
    code, out, _ = run(capsys, "check", "-i", mgre, MODULAR)
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "The input file has 2 lattices."
    assert lines[1] == "Passed #1 (5/2/12)"
    assert lines[2].startswith("FAILED #2 (7/3/16) at ")


def test_check_law_and_verbose(capsys, mgre):
    code, out, err = run(capsys, "check", "-i", mgre, "--law", "godowski:3", "-v")
    assert code == EXIT_OK
    assert out.splitlines()[1:] == ["Passed #1 (5/2/12)", "Passed #2 (7/3/16)"]
    assert err.count("evaluations") == 2


def test_check_jobs_same_output(capsys, mgre):
    _, a, _ = run(capsys, "check", "-i", mgre, "--law", "modular")
    _, b, _ = run(capsys, "check", "-i", mgre, "--law", "modular", "--jobs", "2")
    assert a == b


def test_usage_errors(capsys, mgre):
    assert run(capsys, "gen")[0] == EXIT_USAGE
    assert run(capsys, "gen", "-b", "0")[0] == EXIT_USAGE
    assert run(capsys, "gen", "-b", "3", "--part", "3/2")[0] == EXIT_USAGE
    assert run(capsys, "check", "-i", mgre)[0] == EXIT_USAGE
    assert run(capsys, "check", "-i", mgre, MODULAR, "--law", "modular")[0] == EXIT_USAGE
    assert run(capsys, "frobnicate")[0] == EXIT_USAGE


def test_input_errors(capsys, mgre, tmp_path):
    code, _, err = run(capsys, "check", "-i", mgre, "(avb")
    assert code == EXIT_INPUT and "column 5" in err
    code, _, err = run(capsys, "check", "-i", mgre, "--law", "noa:2")
    assert code == EXIT_INPUT
    code, _, err = run(capsys, "check", "-i", str(tmp_path / "missing.gre"), MODULAR)
    assert code == EXIT_INPUT
    bad = tmp_path / "bad.gre"
    bad.write_text("123.\n12%.\n")
    code, out, _ = run(capsys, "check", "-i", str(bad), MODULAR)
    assert code == EXIT_INPUT
    assert out.splitlines()[1] == "Passed #1 (3/1/8)"
    assert out.splitlines()[2].startswith("ERROR #2 line 2: unknown")


def test_table_csv_and_plot(capsys, tmp_path):
    png = tmp_path / "t.png"
    table = tmp_path / "t.csv"
    code, out, err = run(capsys, "table", "--max-beta", "6", "--csv", str(table), "--plot", str(png))
    assert code == EXIT_OK
    rows = list(csv.DictReader(table.open()))
    assert rows[0] == {"atoms": "3", "blocks": "1", "total": "1", "foot_free": "1"}
    assert sum(int(r["total"]) for r in rows if r["blocks"] == "6") == 22
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert "blocks 5: 9 diagrams, 1 foot-free" in err


def test_help_documents_grammar(capsys):
    with pytest.raises(SystemExit) as e:
        main(["check", "--help"])
    assert e.value.code == 0
    assert "biconditional" in capsys.readouterr().out


def test_byte_identical_across_processes(mgre):
    cmd = [sys.executable, "-m", "greechie.cli", "check", "-i", mgre, MODULAR]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a.count(b"\n") == 3
