import subprocess
import sys
from pathlib import Path

import pytest

from linlog.cli import FALSE, OK, PARSE, UNDECIDED, USAGE, main
from linlog.proof import check_proof, proofs_from_sexpr

DATA = Path(__file__).parent / "data"


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_prove_emits_a_checked_proof(tmp_path, capsys):
    f = write(tmp_path, "a.seq", "# comment\np1, (p1 -o p2) |- p2\n")
    assert main(["prove", "--budget-depth", "12", f]) == OK
    out = capsys.readouterr().out
    (d,) = proofs_from_sexpr(out)
    assert check_proof(d) is None


def test_prove_exit_codes(tmp_path):
    assert main(["prove", write(tmp_path, "r.seq", "p1 |- p2\n")]) == FALSE
    both = write(tmp_path, "b.seq", "p1 |- p1\np1 |- p2\n")
    assert main(["prove", both]) == FALSE
    loop = write(tmp_path, "l.seq", "p1, !(p1 -o (p1 * p1)) |- (p2 * p1)\n")
    assert main(["prove", "--budget-depth", "3", loop]) in (FALSE, UNDECIDED)


def test_output_is_deterministic(tmp_path):
    f = write(tmp_path, "a.seq", "(p1 * p2) |- (p2 * p1)\n")
    o1, o2 = str(tmp_path / "o1"), str(tmp_path / "o2")
    main(["prove", "--out", o1, f])
    main(["prove", "--out", o2, f])
    assert Path(o1).read_bytes() == Path(o2).read_bytes()


def test_balance(tmp_path, capsys):
    assert main(["balance", "--N", "9", write(tmp_path, "b.seq", "bot |-\n")]) == OK
    assert main(["balance", "--N", "9", write(tmp_path, "c.seq", "(bot * bot) |-\n")]) == FALSE
    assert main(["balance", write(tmp_path, "d.seq", "p1 |- p1\n")]) == UNDECIDED


def test_check_proof_on_corpora():
    assert main(["check-proof", str(DATA / "golden_proofs.sexp")]) == OK
    assert main(["check-proof", str(DATA / "corrupted_proofs.sexp")]) == FALSE


def test_program_commands(tmp_path, capsys):
    prog = write(tmp_path, "p.prog", "(vertex 0 (edge (horn (p1) (p3)) (vertex 1)))\n")
    seq = write(tmp_path, "s.nseq", "(p1 * p2), (p1 -o p3) |- (p2 * p3)\n")
    assert main(["run-program", prog, "--input", "(p1 * p2)"]) == OK
    assert "1: (p2 * p3) []" in capsys.readouterr().out
    assert main(["check-solution", prog, seq]) == OK
    proof = str(tmp_path / "d.sexp")
    assert main(["to-proof", "--out", proof, prog, seq]) == OK
    assert main(["check-proof", proof]) == OK
    capsys.readouterr()
    assert main(["to-program", proof]) == OK
    assert "(horn (p1) (p3))" in capsys.readouterr().out
    wrong = write(tmp_path, "w.nseq", "(p1 * p2) |- (p2 * p3)\n")
    assert main(["check-solution", prog, wrong]) == FALSE


def test_encode_and_roundtrip(tmp_path, capsys):
    f = write(tmp_path, "s.nseq", "p2 |- p2\np2, (p2 -o (p2 * p2)) |- (p2 * p2)\n")
    assert main(["encode", "--N", "9", "--target", "one-literal", f]) == OK
    assert "p1" in capsys.readouterr().out
    assert main(["roundtrip", "--N", "9", f]) == OK
    out = capsys.readouterr().out
    assert out.count(": ok") == 2


def test_fairness(tmp_path, capsys):
    f = write(tmp_path, "s.nseq", "p2 |- p2\n")
    assert main(["fairness", "--N", "9", "--p", "1", f]) == OK
    assert "consistent" in capsys.readouterr().out


def test_parse_errors(tmp_path):
    assert main(["parse", write(tmp_path, "e.seq", "(p1 * |- p1\n")]) == PARSE
    assert main(["encode", write(tmp_path, "n.seq", "(p1 -o p2) |- p2\n")]) == PARSE
    assert main(["prove", str(tmp_path / "missing.seq")]) == USAGE


def test_usage_errors():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == USAGE
    with pytest.raises(SystemExit) as info:
        main(["prove", "--budget-depth", "x", "f"])
    assert info.value.code == USAGE


def test_module_entry_point(tmp_path):
    f = write(tmp_path, "a.seq", "bot |-\n")
    r = subprocess.run([sys.executable, "-m", "linlog", "prove", f], capture_output=True, text=True)
    assert r.returncode == 0 and "(rule Lbot" in r.stdout
