import pytest
from hypothesis import given, settings, strategies as st

from ebcrn import fixtures
from ebcrn.compiler import compile_function, compile_predicate, make_all_voting
from ebcrn.crn import Configuration, Crc, Crd, Crn
from ebcrn.semilinear import And, ModAtom, Not, Or, PiecewiseFn, Predicate, ThresholdAtom
from ebcrn.textio import CrnSyntaxError, format_crn, format_spec, parse_crn, parse_reaction, parse_spec


class TestReactions:
    def test_simple(self):
        crn = parse_crn("rxn: X1 + X2 -> Y")
        assert isinstance(crn, Crn)
        assert len(crn.reactions) == 1 and crn.species == ("X1", "X2", "Y")

    def test_coefficient(self):
        assert parse_reaction("2 X -> Y").reactants == Configuration(X=2)
        assert parse_reaction("2X -> Y").reactants == Configuration(X=2)

    def test_catalytic_verbatim(self):
        r = parse_reaction("Z + X2 -> X2 + X3 + Y")
        assert r.reactants == Configuration(Z=1, X2=1)
        assert r.products == Configuration(X2=1, X3=1, Y=1)

    def test_empty_side(self):
        assert parse_reaction("X2 + Y -> 0").products == Configuration()
        assert parse_reaction("X -> ∅").products == Configuration()

    @pytest.mark.parametrize("bad", ["0 -> 0", "A -> A", "A -> -> B", "A + -> B", "A B -> C", "A ->"])
    def test_rejected(self, bad):
        with pytest.raises(CrnSyntaxError):
            parse_crn("rxn: " + bad)

    def test_diagnostic_position(self):
        with pytest.raises(CrnSyntaxError) as e:
            parse_crn("species: A\n\nrxn: A -> B + %")
        assert e.value.line == 3 and e.value.col > 0


class TestDocuments:
    def test_duplicate_species(self):
        with pytest.raises(CrnSyntaxError):
            parse_crn("species: A, A")

    def test_voters_and_output_exclusive(self):
        with pytest.raises(CrnSyntaxError):
            parse_crn("input: X\nyes: Y\noutput: Z\nrxn: X -> Y")

    def test_unknown_directive(self):
        with pytest.raises(CrnSyntaxError):
            parse_crn("reaction: A -> B")

    def test_crd_fields(self):
        crd = fixtures.load("even_two_reactions.crd.crn")
        assert isinstance(crd, Crd)
        assert crd.inputs == ("X",) and crd.yes == {"Y"} and crd.no == {"N"}
        assert crd.context == Configuration(Y=1)

    def test_diff_output(self):
        crc = parse_crn("input: X\ncontext: 3 Y^P\noutput: Y^P - Y^C\nrxn: X -> Y^C")
        assert isinstance(crc, Crc) and crc.output == "Y^P" and crc.output_minus == "Y^C"
        assert crc.value(Configuration({"Y^P": 3, "Y^C": 1})) == 2

    def test_comments_and_blank_lines(self):
        crn = parse_crn("# title\n\nspecies: A, B  # trailing\nrxn: A -> B\n")
        assert crn.species == ("A", "B")

    def test_every_fixture_parses(self):
        for name in fixtures.names():
            assert fixtures.load(name) is not None


def _roundtrip(obj):
    again = parse_crn(format_crn(obj))
    assert again == obj
    assert format_crn(again) == format_crn(obj)


@pytest.mark.parametrize("name", [n for n in fixtures.names() if n.endswith(".crn")])
def test_fixture_roundtrip(name):
    _roundtrip(fixtures.load(name))


@pytest.mark.parametrize("spec", ["parity.spec", "majority.spec", "even.spec"])
def test_compiled_crd_roundtrip(spec):
    c = compile_predicate(fixtures.load(spec))
    _roundtrip(c.crd)
    _roundtrip(make_all_voting(c).crd)


@pytest.mark.parametrize("spec", ["min.spec", "half.spec"])
def test_compiled_crc_roundtrip(spec):
    _roundtrip(compile_function(fixtures.load(spec)).crc)


def test_combination_roundtrip():
    p = parse_spec("vars: X1 X2\n(or (and (ge ((1 X1) (-1 X2)) 0) (mod ((1 X1)) 1 2)) (not (le ((1 X2)) 2)))")
    _roundtrip(compile_predicate(p).crd)


class TestSpecs:
    def test_parity(self):
        p = parse_spec("(mod ((1 X)) 1 2)")
        assert p.expr == ModAtom((("X", 1),), 1, 2) and p.variables == ("X",)

    def test_majority(self):
        p = parse_spec("(ge ((1 X1) (-1 X2)) 0)")
        assert p.expr == ThresholdAtom((("X1", 1), ("X2", -1)), 0, "ge")

    def test_conjunction(self):
        p = parse_spec("(and (mod ((1 X)) 1 2) (ge ((1 X)) 3))")
        assert p.expr == And(ModAtom((("X", 1),), 1, 2), ThresholdAtom((("X", 1),), 3, "ge"))

    def test_strict_forms(self):
        assert parse_spec("(gt ((1 X)) 2)").expr == ThresholdAtom((("X", 1),), 3, "ge")
        assert parse_spec("(lt ((1 X)) 2)").expr == ThresholdAtom((("X", 1),), 1, "le")

    def test_nary_folds_left(self):
        a, b, c = (f"(ge ((1 X)) {k})" for k in range(3))
        p = parse_spec(f"(or {a} {b} {c})")
        assert isinstance(p.expr, Or) and isinstance(p.expr.left, Or)

    def test_vars_header_orders_inputs(self):
        p = parse_spec("vars: X2 X1\n(ge ((1 X1)) 0)")
        assert p.variables == ("X2", "X1")

    def test_undeclared_variable(self):
        with pytest.raises(Exception):
            parse_spec("vars: X\n(ge ((1 Z)) 0)")

    def test_function(self):
        f = parse_spec(fixtures.text("min.spec"))
        assert isinstance(f, PiecewiseFn) and len(f.pieces) == 2

    @pytest.mark.parametrize("bad", ["(ge ((1 X)) )", "(mod ((1 X)) 1)", "(foo ((1 X)) 1)", "(and", ")"])
    def test_malformed(self, bad):
        with pytest.raises(Exception):
            parse_spec(bad)


_atoms = st.one_of(
    st.builds(lambda w, t, s: ThresholdAtom((("X1", w),), t, s),
              st.integers(-3, 3), st.integers(-5, 5), st.sampled_from(["le", "ge"])),
    st.builds(lambda w, c, m: ModAtom((("X2", w),), c, m),
              st.integers(0, 6), st.integers(0, 6), st.integers(2, 5)),
)
_exprs = st.recursive(_atoms, lambda sub: st.one_of(
    st.builds(And, sub, sub), st.builds(Or, sub, sub), st.builds(Not, sub)), max_leaves=6)


@settings(max_examples=60)
@given(_exprs)
def test_spec_roundtrip(expr):
    p = Predicate(("X1", "X2"), expr)
    assert parse_spec(format_spec(p)) == p


def test_function_spec_roundtrip():
    f = parse_spec(fixtures.text("min.spec"))
    assert parse_spec(format_spec(f)) == f
