import itertools
import json

import pytest

from ebcrn import fixtures
from ebcrn.compiler import compile_affine, compile_function, compile_predicate
from ebcrn.crn import Configuration, Crd, is_terminal
from ebcrn.semilinear import AffinePiece, PiecewiseFn, ThresholdAtom
from ebcrn.textio import parse_crn, parse_spec
from ebcrn.verifier import (Limits, check_stably_computes, check_stably_decides, explore,
                            longest_execution, verify_grid)
from conftest import random_crn


def crn(*rxns):
    return parse_crn("\n".join("rxn: " + r for r in rxns))


class TestExplore:
    def test_min_catalytic_witness(self):
        c = fixtures.load("min_catalytic_undo.crn")
        rep = explore(c, Configuration(X1=1, X2=1, X3=1))
        w = rep.self_covering
        assert w is not None and w.validate(c)
        assert w.path[w.i] == Configuration(Y=1, X2=1, X3=1)
        assert w.path[w.j] == w.path[w.i]
        assert Configuration(Z=1, X2=1) in w.path[w.i:w.j]
        assert rep.bounded is False

    def test_hand_enumeration(self):
        rep = explore(crn("X1 + X2 -> Y"), Configuration(X1=2, X2=1))
        assert rep.num_reached == 2
        assert rep.terminals == [Configuration(X1=1, Y=1)]
        assert rep.self_covering is None and rep.bounded is True
        assert rep.reached == {Configuration(X1=2, X2=1), Configuration(X1=1, Y=1)}

    def test_flip_flop(self):
        c = fixtures.load("flip_flop.crn")
        w = explore(c, Configuration(A=1)).self_covering
        assert w.path == (Configuration(A=1), Configuration(B=1), Configuration(A=1))

    def test_strict_growth(self):
        w = explore(crn("X -> 2 X"), Configuration(X=1)).self_covering
        assert w.path[0] <= w.path[1] and w.validate(crn("X -> 2 X"))

    def test_truncation_is_inconclusive(self):
        c = crn("A -> B + C", "B + C -> A")
        rep = explore(c, Configuration(A=3), Limits(max_configs=2))
        assert rep.truncated and rep.limit.startswith("max_configs")
        assert rep.bounded is None

    def test_depth_limit(self):
        rep = explore(crn("2 A -> A"), Configuration(A=50), Limits(max_depth=10))
        assert rep.truncated and rep.limit.startswith("max_depth")

    def test_limits_positive(self):
        with pytest.raises(ValueError):
            Limits(0, 5)

    def test_terminals_are_terminal(self):
        crd = fixtures.load("collapsing_majority.crd.crn")
        rep = explore(crd.crn, crd.initial((4, 3)))
        assert rep.terminals and all(is_terminal(crd.crn, t) for t in rep.terminals)
        assert set(rep.terminals) <= rep.reached

    def test_deterministic(self):
        crd = fixtures.load("collapsing_majority.crd.crn")
        a = explore(crd.crn, crd.initial((3, 3))).to_dict()
        b = explore(crd.crn, crd.initial((3, 3))).to_dict()
        assert json.dumps(a) == json.dumps(b)

    def test_invariant_violation_recorded(self):
        crd = fixtures.load("collapsing_majority.crd.crn")
        rep = explore(crd.crn, crd.initial((2, 2)), invariant=lambda c: c.size() >= 2)
        assert rep.invariant_violation is not None
        assert rep.invariant_violation[-1].size() < 2


def test_random_witnesses_replay(rng):
    found = 0
    for _ in range(300):
        c = random_crn(rng, max_species=3, max_reactions=3)
        for x in (Configuration({s: 2 for s in c.species}),):
            rep = explore(c, x, Limits(20_000))
            if rep.self_covering is not None:
                found += 1
                assert rep.self_covering.validate(c)
            elif not rep.truncated:
                assert longest_execution(c, x) >= 0
    assert found > 20


def test_reduction_preserves_terminals():
    exprs = ["(and (mod ((1 X1)) 1 2) (ge ((1 X2)) 2))", "(or (ge ((1 X1) (-1 X2)) 1) (mod ((1 X2)) 0 2))"]
    for e in exprs:
        p = parse_spec("vars: X1 X2\n" + e)
        crd = compile_predicate(p).crd
        for x in itertools.product(range(3), repeat=2):
            full = explore(crd.crn, crd.initial(x))
            red = explore(crd.crn, crd.initial(x), reduce=True)
            assert set(full.terminals) == set(red.terminals)
            assert red.num_reached <= full.num_reached


def test_reduction_keeps_unboundedness():
    c = fixtures.load("min_catalytic_undo.crn")
    rep = explore(c, Configuration(X1=2, X2=1, X3=2), reduce=True)
    assert rep.self_covering is not None and rep.self_covering.validate(c)


def test_longest_execution_rejects_unbounded():
    with pytest.raises(ValueError):
        longest_execution(fixtures.load("flip_flop.crn"), Configuration(A=1))


class TestDecides:
    parity = fixtures.load("parity.spec")

    def test_parity_four(self):
        v = check_stably_decides(compile_predicate(self.parity).crd, self.parity, (4,))
        assert v.passed and v.results[0].observed == (0,)

    def test_majority_tie(self):
        maj = fixtures.load("majority.spec")
        v = check_stably_decides(compile_predicate(maj).crd, maj, (3, 3))
        assert v.passed and v.results[0].observed == (1,)

    def test_swapped_voters_fail(self):
        crd = compile_predicate(self.parity).crd
        bad = Crd(crd.crn, crd.inputs, crd.no, crd.yes, crd.context)
        v = check_stably_decides(bad, self.parity, (4,))
        assert v.status == "fail"
        r = v.results[0]
        assert r.observed == (1,) and r.counterexample[0] == bad.initial((4,))
        assert is_terminal(bad.crn, r.counterexample[-1])

    def test_negative_control_grid(self):
        crd = compile_predicate(self.parity).crd
        bad = Crd(crd.crn, crd.inputs, crd.no, crd.yes, crd.context)
        v = verify_grid(bad, self.parity, [(x,) for x in range(5)])
        assert v.status == "fail" and len(v.failures()) == 5

    def test_unbounded_crd_fails_with_witness(self):
        crd = parse_crn("input: X\ncontext: Y\nyes: Y\nno: N\nrxn: Y + X -> N + X\nrxn: N -> Y")
        v = check_stably_decides(crd, self.parity, (1,))
        assert v.status == "fail" and "self-covering" in v.results[0].reason

    def test_inconclusive(self):
        crd = compile_predicate(self.parity).crd
        v = check_stably_decides(crd, self.parity, (10,), Limits(max_configs=3))
        assert v.status == "inconclusive"

    def test_collapsing_zero_input_undefined(self):
        crd = fixtures.load("collapsing_parity.crd.crn")
        v = check_stably_decides(crd, self.parity, (0,))
        assert v.status == "fail" and v.results[0].observed == (None,)

    def test_even_two_reactions(self):
        even = fixtures.load("even.spec")
        crd = fixtures.load("even_two_reactions.crd.crn")
        assert verify_grid(crd, even, [(x,) for x in range(9)]).passed

    def test_single_voting_flag(self):
        crd = fixtures.load("collapsing_parity.crd.crn")
        v = check_stably_decides(crd, self.parity, (3,), single_voting=True)
        assert v.status == "fail" and v.results[0].reason == "invariant violated"

    def test_table_and_json(self):
        v = verify_grid(compile_predicate(self.parity).crd, self.parity, [(1,), (2,)])
        assert v.to_table().splitlines()[-1] == "overall: pass"
        assert json.loads(v.to_json())["status"] == "pass"


class TestComputes:
    def test_x_minus_one(self):
        p = AffinePiece(ThresholdAtom((("X", 1),), 1, "ge"), 0, 1, (("X", 1),), (("X", 1),))
        f = PiecewiseFn(("X",), (p,))
        v = check_stably_computes(compile_affine(p, ("X",)).crc, f, (3,))
        assert v.passed and v.results[0].observed == (2,)

    def test_min(self):
        f = fixtures.load("min.spec")
        v = check_stably_computes(compile_function(f).crc, f, (2, 3), reduce=True)
        assert v.passed and v.results[0].observed == (2,)

    def test_half_grid(self):
        f = fixtures.load("half.spec")
        c = compile_function(f).crc
        v = verify_grid(c, f, [(x,) for x in range(13)], reduce=True)
        assert v.passed

    def test_wrong_function_fails(self):
        f = fixtures.load("half.spec")
        c = compile_function(f).crc
        g = PiecewiseFn(("X",), (AffinePiece(ThresholdAtom((("X", 1),), 0, "ge"), 0, 1, (("X", 1),)),))
        v = check_stably_computes(c, g, (3,), reduce=True)
        assert v.status == "fail" and v.results[0].observed == (1,)
