"""Command-line front end.

Exit codes: 0 success (proved, holds, true), 1 refuted or false or violated,
2 budget exhausted or not applicable, 3 usage error, 4 parse error.
With several inputs in one file the status is the largest per-item code.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Iterator, Optional

from .balance import Balance, BangUnsupported, balance_report
from .encoding import EncodingError, EncodingParams, Target, default_params, encode_sequent
from .formula import FormulaSyntaxError, NormalizedSequent, NotNormalized, SimpleProduct, parse_formula, parse_sequent
from .programs import (
    NotAStrongSolution,
    ProgramError,
    check_strong_solution,
    program_from_proof,
    program_from_sexpr,
    program_to_proof,
    run_strong,
)
from .proof import ProofFormatError, check_proof, proof_to_sexpr, proofs_from_sexpr
from .prover import BudgetExhausted, Proved, Refuted, SearchBudget, prove
from .transform import RegularityViolation, TransformError, extract_program, fairness_check, ttobot_transform

OK, FALSE, UNDECIDED, USAGE, PARSE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse exits with 2 by default
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(USAGE)


class _Out:
    def __init__(self, path: Optional[str]):
        self.path = path
        self.chunks: list[str] = []

    def write(self, text: str) -> None:
        if not text.endswith("\n"):
            text += "\n"
        self.chunks.append(text)

    def flush(self) -> None:
        data = "".join(self.chunks)
        if self.path:
            Path(self.path).write_text(data, encoding="utf-8")
        else:
            sys.stdout.write(data)


def _lines(path: str) -> Iterator[tuple[int, str]]:
    text = Path(path).read_text(encoding="utf-8")
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if line and not line.startswith("#"):
            yield n, line


def _budget(args) -> SearchBudget:
    return SearchBudget(max_depth=args.budget_depth,
                        max_contractions_per_bang_formula=args.budget_contractions,
                        balance_pruning=not args.no_balance_pruning)


def _params(s: NormalizedSequent, args, target: Optional[Target] = None) -> EncodingParams:
    return default_params(s, target or Target(args.target), args.N, args.p)


def _status(result) -> tuple[str, int]:
    if isinstance(result, Proved):
        return "proved", OK
    if isinstance(result, Refuted):
        return "refuted", FALSE
    return f"exhausted ({result.reason})" if result.reason else "exhausted", UNDECIDED


# ---------------------------------------------------------------------------
# Subcommands; each returns an exit code


def cmd_parse(args, out: _Out) -> int:
    for _, line in _lines(args.file):
        if "|-" in line:
            out.write(parse_sequent(line).text)
        else:
            out.write(parse_formula(line).text)
    return OK


def cmd_prove(args, out: _Out) -> int:
    code = OK
    for _, line in _lines(args.file):
        s = parse_sequent(line)
        result = prove(s, _budget(args))
        label, c = _status(result)
        code = max(code, c)
        out.write(f"; {s.text} : {label}")
        if isinstance(result, Proved):
            out.write(proof_to_sexpr(result.proof))
    return code


def cmd_check_proof(args, out: _Out) -> int:
    code = OK
    for i, d in enumerate(proofs_from_sexpr(Path(args.file).read_text(encoding="utf-8"))):
        bad = check_proof(d)
        if bad is None:
            out.write(f"proof {i}: ok {d.conclusion.text}")
        else:
            code = FALSE
            out.write(f"proof {i}: invalid: {bad}")
    return code


def cmd_encode(args, out: _Out) -> int:
    for _, line in _lines(args.file):
        s = NormalizedSequent.parse(line)
        out.write(encode_sequent(s, _params(s, args)).text)
    return OK


def _read_program(path: str):
    return program_from_sexpr(Path(path).read_text(encoding="utf-8"))


def _one_sequent(path: str) -> NormalizedSequent:
    items = [line for _, line in _lines(path)]
    if len(items) != 1:
        raise UsageError(f"{path}: expected exactly one sequent, found {len(items)}")
    return NormalizedSequent.parse(items[0])


def cmd_run_program(args, out: _Out) -> int:
    program = _read_program(args.program)
    w = SimpleProduct.from_formula(parse_formula(args.input))
    trace = run_strong(program, w)
    code = OK
    for vid in sorted(trace.out):
        value = trace.out[vid]
        if value is None:
            code = FALSE
            out.write(f"{vid}: undefined")
        else:
            stack = " ".join(x.text for x in trace.stack[vid])
            out.write(f"{vid}: {value.text} [{stack}]")
    return code


def cmd_check_solution(args, out: _Out) -> int:
    program = _read_program(args.program)
    s = _one_sequent(args.sequent)
    ok = check_strong_solution(program, s)
    out.write("strong solution" if ok else "not a strong solution")
    return OK if ok else FALSE


def cmd_to_proof(args, out: _Out) -> int:
    program = _read_program(args.program)
    s = _one_sequent(args.sequent)
    try:
        d = program_to_proof(program, s)
    except NotAStrongSolution as exc:
        sys.stderr.write(f"error: {exc}\n")
        return FALSE
    out.write(proof_to_sexpr(d))
    return OK


def cmd_to_program(args, out: _Out) -> int:
    for d in proofs_from_sexpr(Path(args.file).read_text(encoding="utf-8")):
        bad = check_proof(d)
        if bad is not None:
            sys.stderr.write(f"error: invalid proof: {bad}\n")
            return FALSE
        out.write(program_from_proof(d).to_sexpr())
    return OK


def cmd_balance(args, out: _Out) -> int:
    code = OK
    for _, line in _lines(args.file):
        s = parse_sequent(line)
        rep = balance_report(s, args.N)
        c = {Balance.HOLDS: OK, Balance.VIOLATED: FALSE, Balance.NOT_APPLICABLE: UNDECIDED}[rep.verdict]
        code = max(code, c)
        out.write(f"{s.text}")
        if rep.verdict is Balance.NOT_APPLICABLE:
            out.write(f"  not-applicable: {rep.reason}")
            continue
        counts = " ".join("!" if c is None else str(c) for c in rep.lhs_counts) or "-"
        out.write(f"  lhs counts: {counts}")
        out.write(f"  rhs counts: {' '.join(str(c) for c in rep.rhs_counts) or '-'}")
        mod = "exact" if rep.modulus is None else f"mod {rep.modulus}"
        lhs_r, rhs_r = rep.residues()
        out.write(f"  residues ({mod}): {lhs_r} vs {rhs_r} -> {rep.verdict.value}")
    return code


def cmd_roundtrip(args, out: _Out) -> int:
    code = OK
    for _, line in _lines(args.file):
        s = NormalizedSequent.parse(line)
        params = _params(s, args, Target.BOT_ONLY)
        result = prove(s.to_sequent(), _budget(args))
        if not isinstance(result, Proved):
            label, c = _status(result)
            out.write(f"{s.text}: source {label}")
            code = max(code, c)
            continue
        try:
            d = ttobot_transform(result.proof, params)
            program = extract_program(d, s, params)
            ok = check_strong_solution(program, s)
            back = program_to_proof(program, s)
            ok = ok and check_proof(back) is None
        except (TransformError, RegularityViolation, NotAStrongSolution) as exc:
            out.write(f"{s.text}: failed: {exc}")
            code = max(code, FALSE)
            continue
        out.write(f"{s.text}: {'ok' if ok else 'failed'} (encoded proof {d.size()} nodes, "
                  f"program {program.edge_count()} edges)")
        out.write(program.to_sexpr())
        code = max(code, OK if ok else FALSE)
    return code


def cmd_fairness(args, out: _Out) -> int:
    code = OK
    for _, line in _lines(args.file):
        s = NormalizedSequent.parse(line)
        report = fairness_check(s, _params(s, args), _budget(args))
        out.write(str(report))
        if report.violation:
            code = FALSE
    return code


COMMANDS = {
    "parse": cmd_parse,
    "prove": cmd_prove,
    "check-proof": cmd_check_proof,
    "encode": cmd_encode,
    "run-program": cmd_run_program,
    "check-solution": cmd_check_solution,
    "to-proof": cmd_to_proof,
    "to-program": cmd_to_program,
    "balance": cmd_balance,
    "roundtrip": cmd_roundtrip,
    "fairness": cmd_fairness,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="linlog", description="Linear logic workbench.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget-depth", type=int, default=15)
    common.add_argument("--budget-contractions", type=int, default=4)
    common.add_argument("--no-balance-pruning", action="store_true")
    common.add_argument("--target", choices=[t.value for t in Target], default=Target.BOT_ONLY.value)
    common.add_argument("--N", type=int, default=None)
    common.add_argument("--p", type=int, default=None)
    common.add_argument("--out", default=None)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("parse", "prove", "check-proof", "encode", "to-program", "balance", "roundtrip", "fairness"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("file")
    sp = sub.add_parser("run-program", parents=[common])
    sp.add_argument("program")
    sp.add_argument("--input", required=True, help="input product W, e.g. '(p1*p2)'")
    for name in ("check-solution", "to-proof"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("program")
        sp.add_argument("sequent")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    out = _Out(args.out)
    try:
        code = COMMANDS[args.command](args, out)
    except (FormulaSyntaxError, ProofFormatError, ProgramError, NotNormalized) as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return PARSE
    except (UsageError, EncodingError, BangUnsupported, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return USAGE
    out.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
