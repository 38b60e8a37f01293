from __future__ import annotations

import random

import pytest

from corpus import random_formula
from mc_cert.formula import (
    CnfXorFormula,
    FormulaError,
    Xor,
    add_xors,
    assignment_from_lits,
    ban_sol,
    check_sol,
    project,
)
from mc_cert.io_dimacs import format_dimacs_cnfxor, parse_dimacs_cnfxor
from mc_cert.oracle import brute_force_models, exact_projected_count

PAIRS_SOLUTION = [-1, 2, -3, -4, -5, 6, -7, -8, -9, -10]


# -----------------------------
# Parsing
# -----------------------------
def test_parse_tiny_unsat_folds_negated_xor_literal(tiny_unsat: CnfXorFormula) -> None:
    assert tiny_unsat.num_vars == 3
    assert tiny_unsat.clauses == ((1, 2), (-1, -2), (-3,))
    assert tiny_unsat.xors == (Xor((1, 2, 3), 0),)
    assert tiny_unsat.proj == (1, 2, 3)


def test_parse_pairs_projects_on_all_variables(pairs: CnfXorFormula) -> None:
    assert pairs.num_vars == 10
    assert len(pairs.clauses) == 7
    assert pairs.xors == ()
    assert pairs.proj == tuple(range(1, 11))


def test_parse_empty_formula_with_projection() -> None:
    F = parse_dimacs_cnfxor("p cnf 2 0\nc ind 1 0\n")
    assert F.num_vars == 2
    assert F.clauses == ()
    assert F.proj == (1,)


def test_projection_lines_are_unioned_in_order() -> None:
    F = parse_dimacs_cnfxor("c ind 3 1 0\np cnf 4 0\nc ind 1 4 0\nc a comment\n")
    assert F.proj == (3, 1, 4)


def test_clause_may_span_lines_and_keeps_duplicates() -> None:
    F = parse_dimacs_cnfxor("p cnf 3 2\n1 2\n 2 0 -3\n3 0\n")
    assert F.clauses == ((1, 2, 2), (-3, 3))


def test_xor_literals_cancel_in_pairs() -> None:
    F = parse_dimacs_cnfxor("p cnf 3 1\nx 1 2 -1 0\n")
    # x1 ^ x2 ^ ~x1 = 1  <=>  x2 = 0
    assert F.xors == (Xor((2,), 0),)


@pytest.mark.parametrize(
    "text",
    [
        "p cnf x 1\n1 0\n",
        "p cnf 0 0\n",
        "p cnf 2 1\n1 3 0\n",
        "p cnf 2 1\n1 2\n",
        "p cnf 2 1\nx 1 2\n",
        "1 2 0\n",
        "p cnf 2 1\nc ind 3 0\n",
        "p cnf 2 1\n1 a 0\n",
    ],
)
def test_parse_rejects_malformed_input(text: str) -> None:
    with pytest.raises(FormulaError):
        parse_dimacs_cnfxor(text)


def test_format_then_parse_is_identity_on_random_formulas() -> None:
    rng = random.Random(7)
    for _ in range(200):
        F = random_formula(rng, max_vars=9)
        assert parse_dimacs_cnfxor(format_dimacs_cnfxor(F)) == F


def test_format_writes_tautological_empty_xor() -> None:
    F = CnfXorFormula.build(2, [], [Xor((), 0), Xor((), 1)])
    text = format_dimacs_cnfxor(F)
    assert "x 1 -1 0" in text
    assert parse_dimacs_cnfxor(text).xors == F.xors


# -----------------------------
# Xor normalization
# -----------------------------
def test_xor_eval_invariant_under_literal_rewriting() -> None:
    rng = random.Random(11)
    for _ in range(300):
        n = rng.randint(1, 6)
        lits = [rng.choice([-1, 1]) * rng.randint(1, n) for _ in range(rng.randint(0, 6))]
        x = Xor.from_lits(lits)

        shuffled = lits[:]
        rng.shuffle(shuffled)
        assert Xor.from_lits(shuffled) == x

        # ~~v as v, and v ^ v inserted anywhere, change nothing.
        v = rng.randint(1, n)
        assert Xor.from_lits(shuffled + [v, -v, -v, v]) == x

        w = {u: rng.random() < 0.5 for u in range(1, n + 1)}
        assert x.evaluate(w) == (sum(w[abs(l)] != (l < 0) for l in lits) % 2 == 1)


def test_xor_rejects_unsorted_vars() -> None:
    with pytest.raises(FormulaError):
        Xor((2, 1), 0)
    with pytest.raises(FormulaError):
        Xor((1,), 2)


# -----------------------------
# Semantics
# -----------------------------
def test_check_sol_pairs_examples(pairs: CnfXorFormula) -> None:
    assert check_sol(pairs, assignment_from_lits(PAIRS_SOLUTION, 10))
    all_false = {v: False for v in range(1, 11)}
    assert not check_sol(pairs, all_false)


def test_check_sol_unit_xor() -> None:
    F = CnfXorFormula.build(1, [], [Xor((1,), 1)])
    assert not check_sol(F, {1: False})
    assert check_sol(F, {1: True})


def test_check_sol_partial_assignment_is_an_error(pairs: CnfXorFormula) -> None:
    with pytest.raises(FormulaError):
        check_sol(pairs, {1: True})


def test_check_sol_matches_brute_force() -> None:
    rng = random.Random(3)
    for _ in range(60):
        F = random_formula(rng, max_vars=7)
        models = {tuple(sorted(w.items())) for w in brute_force_models(F)}
        for bits in range(1 << F.num_vars):
            w = {v: bool(bits >> (v - 1) & 1) for v in range(1, F.num_vars + 1)}
            assert check_sol(F, w) == (tuple(sorted(w.items())) in models)


def test_project_examples(pairs: CnfXorFormula) -> None:
    w = assignment_from_lits(PAIRS_SOLUTION, 10)
    assert project(w, pairs.proj) == w
    assert project(w, [2, 6]) == {2: True, 6: True}
    w2 = dict(w)
    w2[3] = True
    assert project(w, [2, 6]) == project(w2, [2, 6])


def test_ban_sol_adds_negated_cube() -> None:
    F = CnfXorFormula.build(2, [], [], [1, 2])
    G = ban_sol(F, {1: True, 2: False})
    assert G.clauses == ((-1, 2),)
    assert not check_sol(G, {1: True, 2: False})


def test_ban_sol_domain_mismatch() -> None:
    F = CnfXorFormula.build(3, [], [], [1, 2])
    with pytest.raises(FormulaError):
        ban_sol(F, {1: True})


def test_ban_sol_changes_count_by_membership() -> None:
    rng = random.Random(5)
    for _ in range(40):
        F = random_formula(rng, max_vars=7)
        before = exact_projected_count(F).value
        for bits in range(min(1 << len(F.proj), 16)):
            p = {v: bool(bits >> i & 1) for i, v in enumerate(F.proj)}
            is_model = any(project(w, F.proj) == p for w in brute_force_models(F))
            after = exact_projected_count(ban_sol(F, p)).value
            assert after == before - (1 if is_model else 0)


def test_banning_every_projected_model_leaves_nothing() -> None:
    G = CnfXorFormula.build(4, [(1, 2), (-3, 4)], [], [1, 3])
    for w in brute_force_models(G):
        G = ban_sol(G, project(w, G.proj))
    assert exact_projected_count(G).value == 0


def test_add_xors_examples(pairs: CnfXorFormula) -> None:
    assert exact_projected_count(add_xors(pairs, [Xor((), 1)])).value == 0
    assert exact_projected_count(add_xors(pairs, [Xor((), 0)])).value == 180

    with_x1 = sum(1 for w in brute_force_models(pairs) if w[1])
    assert exact_projected_count(add_xors(pairs, [Xor((1,), 1)])).value == with_x1 == 65


def test_add_xors_range_check() -> None:
    F = CnfXorFormula.build(2)
    with pytest.raises(FormulaError):
        add_xors(F, [Xor((3,), 1)])
