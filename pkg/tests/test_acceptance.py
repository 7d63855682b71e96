"""Acceptance checks 1-8.

Each check prints one PASS/FAIL line with its measurements.  The file runs
under pytest or directly as `python tests/test_acceptance.py`.
"""

from __future__ import annotations

import itertools
import random
import re
import sys
import time
from functools import lru_cache
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import planted_sequent, rand_sequent  # noqa: E402
from linlog.balance import Balance, balance_check, bot_count, lcost_verify  # noqa: E402
from linlog.encoding import (  # noqa: E402
    EncodingParams,
    Target,
    bot_power,
    c00,
    default_params,
    encode_sequent,
    h00,
    h1,
)
from linlog.formula import (  # noqa: E402
    Bottom,
    Literal,
    Lollipop,
    NormalizedSequent,
    Sequent,
    parse_sequent,
)
from linlog.proof import check_proof, proofs_from_sexpr  # noqa: E402
from linlog.programs import check_strong_solution, find_strong_solution, program_to_proof  # noqa: E402
from linlog.prover import Proved, Refuted, SearchBudget, prove  # noqa: E402
from linlog.transform import RegularityViolation, extract_program, fairness_check, ttobot_transform  # noqa: E402

DATA = Path(__file__).parent / "data"


def report(n: int, ok: bool, detail: str, elapsed: float, limit: float) -> bool:
    within = elapsed < limit
    verdict = "PASS" if ok and within else "FAIL"
    print(f"criterion {n}: {verdict}  {detail}; {elapsed:.2f}s (limit {limit:g}s)", flush=True)
    return ok and within


def criterion_1() -> bool:
    t = time.perf_counter()
    golden = proofs_from_sexpr((DATA / "golden_proofs.sexp").read_text())
    good = sum(check_proof(d) is None for d in golden)
    rules = {q.rule for d in golden for q in d.nodes()}
    text = (DATA / "corrupted_proofs.sexp").read_text()
    want = re.findall(r"^; expect (\S+):", text, re.M)
    named = 0
    for rule, d in zip(want, proofs_from_sexpr(text)):
        v = check_proof(d)
        named += v is not None and v.rule == rule
    ok = len(golden) == good == 25 and len(rules) == 21 and len(want) == named == 10
    return report(1, ok, f"golden {good}/{len(golden)} valid covering {len(rules)} rules, "
                         f"corrupted {named}/{len(want)} named", time.perf_counter() - t, 1)


def criterion_2() -> bool:
    t = time.perf_counter()
    rows = [line.split(" ", 1) for line in (DATA / "prover_corpus.txt").read_text().splitlines()
            if line.strip() and not line.startswith("#")]
    hits = 0
    for want, text in rows:
        res = prove(parse_sequent(text), SearchBudget(max_depth=15))
        got = "proved" if isinstance(res, Proved) else "refuted" if isinstance(res, Refuted) else "exhausted"
        if isinstance(res, Proved) and check_proof(res.proof) is not None:
            got = "bad-proof"
        hits += got == want
    ok = len(rows) == hits == 30
    return report(2, ok, f"{hits}/{len(rows)} verdicts match", time.perf_counter() - t, 10)


def criterion_3() -> bool:
    t = time.perf_counter()
    exact = all(bot_count(h00(N)) == -N and bot_count(c00(N)) == -2 * N and bot_count(h1(N)) == 9 * N
                for N in range(9, 17))
    reports = [lcost_verify(N, samples=125, seed=N) for N in range(9, 17)]
    checked = sum(len(r.entries) for r in reports)
    failures = sum(len(r.failures()) for r in reports)
    ok = exact and failures == 0
    return report(3, ok, f"basic values exact={exact}, {checked} identities checked "
                         f"(1000 samples), {failures} failures", time.perf_counter() - t, 5)


def criterion_4() -> bool:
    t = time.perf_counter()
    powers = [bot_power(k) for k in range(1, 5)]
    sides = [c for n in range(3) for c in itertools.combinations_with_replacement(powers, n)]
    extras = [None] + [Lollipop(bot_power(a), bot_power(b)) for a in range(1, 4) for b in range(1, 4)] + [h00(9)]
    budget = SearchBudget(max_depth=12, balance_pruning=False)
    total = proved = violations = 0
    for lhs, rhs, f in itertools.product(sides, sides, extras):
        s = Sequent(tuple(lhs) + ((f,) if f is not None else ()), tuple(rhs))
        total += 1
        if isinstance(prove(s, budget), Proved):
            proved += 1
            N = 9 if f == h00(9) else None
            violations += balance_check(s, N) is not Balance.HOLDS
    return report(4, violations == 0, f"{total} sequents, {proved} proved, {violations} violations",
                  time.perf_counter() - t, 120)


def criterion_5(cases: int = 3000, seed: int = 2024) -> bool:
    t = time.perf_counter()
    rng = random.Random(seed)
    seen: set = set()
    sample = []
    while len(sample) < cases:
        s = planted_sequent(rng) if rng.random() < 0.5 else rand_sequent(rng)
        if s.text not in seen:
            seen.add(s.text)
            sample.append(s)
    budget = SearchBudget()
    agree = derivable = exhausted = rechecked = 0
    disagreements = []
    for s in sample:
        res = prove(s.to_sequent(), budget)
        program = find_strong_solution(s, max_edges=6, max_pushes=1)
        exhausted += not isinstance(res, (Proved, Refuted))
        if isinstance(res, Proved) == (program is not None):
            agree += 1
        else:
            disagreements.append(s.text)
        if program is not None:
            derivable += 1
            d = program_to_proof(program, s)
            rechecked += check_proof(d) is None and d.conclusion == s.to_sequent()
    for text in disagreements[:5]:
        # diagnostic only: does a program exist just past the bounds?
        wider = find_strong_solution(NormalizedSequent.parse(text), max_edges=10, max_pushes=2)
        extra = (f"solvable with {wider.edge_count()} edges and {wider.push_count()} push/pop pairs"
                 if wider is not None else "no program within 10 edges and 2 pushes either")
        print(f"  disagreement: {text} ({extra})")
    ok = agree == len(sample) and rechecked == derivable
    return report(5, ok, f"{agree}/{len(sample)} agree ({derivable} solvable, {exhausted} budget-limited "
                         f"counted as not proved), {rechecked}/{derivable} proofs re-check",
                  time.perf_counter() - t, 600)


@lru_cache(maxsize=None)
def _atoms(f) -> frozenset:
    # encodings share large subterms, so walk the formula as a DAG
    if isinstance(f, Literal):
        return frozenset([f.index])
    if isinstance(f, Bottom):
        return frozenset(["bot"])
    out: frozenset = frozenset()
    for c in f.children():
        out |= _atoms(c)
    return out


def _census(seq: Sequent):
    atoms = frozenset().union(*(_atoms(f) for f in seq.lhs + seq.rhs))
    return {a for a in atoms if a != "bot"}, "bot" in atoms


def criterion_6() -> bool:
    t = time.perf_counter()
    rng = random.Random(6)
    bad = 0
    for _ in range(200):
        s = rand_sequent(rng)
        lits, _ = _census(encode_sequent(s, default_params(s, Target.BOT_ONLY)))
        bad += bool(lits)
        lits, _ = _census(encode_sequent(s, default_params(s, Target.ONE_LITERAL)))
        bad += len(lits) != 1
        lits, bots = _census(encode_sequent(s, default_params(s, Target.UNIT_ONLY)))
        bad += bool(lits) or bots
    return report(6, bad == 0, f"200 sequents x 3 targets, {bad} census failures",
                  time.perf_counter() - t, 2)


ROUND_TRIP = [
    "p2 |- p2",
    "p2, (p2 -o (p2 * p2)) |- (p2 * p2)",
    "p2, (p2 -o (p2 + (p2 * p2))), !(p2 -o (p2 * p2)) |- (p2 * p2)",
]


def criterion_7() -> bool:
    t = time.perf_counter()
    params = EncodingParams(9, 1, Target.BOT_ONLY)
    done, irregular, worst = 0, 0, 0.0
    for text in ROUND_TRIP:
        c = time.perf_counter()
        s = NormalizedSequent.parse(text)
        res = prove(s.to_sequent())
        if not isinstance(res, Proved):
            continue
        try:
            d = ttobot_transform(res.proof, params)
            p = extract_program(d, s, params)
        except RegularityViolation as exc:
            irregular += 1
            print(f"  regularity violation: {exc}")
            continue
        back = program_to_proof(p, s)
        done += (check_proof(d) is None and d.conclusion == encode_sequent(s, params)
                 and check_strong_solution(p, s)
                 and check_proof(back) is None and back.conclusion == s.to_sequent())
        worst = max(worst, time.perf_counter() - c)
    ok = done == len(ROUND_TRIP) and irregular == 0 and worst < 300
    return report(7, ok, f"{done}/{len(ROUND_TRIP)} round trips, {irregular} regularity violations, "
                         f"slowest case {worst:.2f}s", time.perf_counter() - t, 900)


def criterion_8() -> bool:
    t = time.perf_counter()
    s = NormalizedSequent.parse("p2 |- p3")
    neg = fairness_check(s, default_params(s))
    encoded = [e.status for e in neg.entries if e.label != "a"]
    ok_neg = neg.status("a") == "refuted" and "proved" not in encoded
    s = NormalizedSequent.parse("p2 |- p2")
    pos = fairness_check(s, EncodingParams(9, 1))
    ok_pos = pos.status("a") == pos.status("c") == "proved" and not pos.violation
    detail = (f"p2|-p3: a={neg.status('a')} encoded={','.join(encoded)}; "
              f"p2|-p2: a={pos.status('a')} c={pos.status('c')}")
    return report(8, ok_neg and ok_pos, detail, time.perf_counter() - t, 300)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4,
            criterion_5, criterion_6, criterion_7, criterion_8]


@pytest.mark.parametrize("check", CRITERIA, ids=lambda f: f.__name__)
def test_acceptance(check, capsys):
    with capsys.disabled():
        print()
        assert check()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    sys.exit(0 if all(results) else 1)
