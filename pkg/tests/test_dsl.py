"""Language round-trips, parse errors, and evaluation plumbing."""
import random

import pytest

from trailset import dsl
from trailset.dsl import (
    Bang,
    FuncCall,
    ItemPh,
    Kwarg,
    Num,
    OpCall,
    ParseError,
    Pred,
    RelLookup,
    RelPathLit,
    SetLit,
    Source,
    Str,
    ValBin,
    parse,
    parse_script,
    print_ast,
)
from trailset.evaluator import EvaluationError, evaluate, evaluate_script
from trailset.ingest import demo_dataset
from trailset.session import Session


class TestParsing:
    def test_chained_refine(self):
        ast = parse("s0.refine(equals(:Author, a1))")
        assert isinstance(ast, OpCall)
        assert ast.op == "refine"
        assert ast.receiver == Source("s0")
        pred = ast.args[0]
        assert isinstance(pred, Pred) and pred.name == "equals"
        assert pred.args == (RelPathLit((":Author",)), Source("a1"))

    def test_empty_input_is_a_parse_error_at_origin(self):
        with pytest.raises(ParseError) as err:
            parse("")
        assert err.value.line == 1 and err.value.col == 1

    def test_rank_then_slice_chain(self):
        ast = parse("s6.rank(2, c(%item)).slice(0, 19)")
        assert isinstance(ast, OpCall) and ast.op == "slice"
        inner = ast.receiver
        assert isinstance(inner, OpCall) and inner.op == "rank"
        assert inner.args == (Num(2), FuncCall("c", (ItemPh(),)))

    def test_slice_suffix(self):
        ast = parse("s6.rank(2, :n[%item])[0..19]")
        assert isinstance(ast, OpCall) and ast.slice == (0, 19)

    def test_bang_suffix(self):
        ast = parse("s0.pivot(:A).refine(true())!")
        assert isinstance(ast, Bang)
        assert isinstance(ast.inner, OpCall) and ast.inner.op == "refine"

    def test_unknown_operator_rejected(self):
        with pytest.raises(ParseError) as err:
            parse("s0.frobnicate(:A)")
        assert "unknown operator" in str(err.value)

    def test_error_carries_position_and_expectations(self):
        with pytest.raises(ParseError) as err:
            parse("s0.refine(equals(:Author, a1)")
        assert err.value.line == 1
        assert err.value.expected

    def test_script_with_comments_and_separators(self):
        script = parse_script(
            "# a comment\n"
            "s1 = d.refine(matchAll(\"Semantic Web\")); s2 = s1.pivot(:cite)\n"
            "\n"
            "s3 = s2.ahmap(mean)\n"
        )
        assert [s.name for s in script.statements] == ["s1", "s2", "s3"]

    def test_inverse_relation_paths(self):
        ast = parse("s10.pivot(inverse(:isHeldBy), inverse(:isContextFor))")
        assert isinstance(ast, OpCall)
        first = ast.args[0]
        assert isinstance(first, RelPathLit) and first.inverted
        model = first.to_model()
        assert model.steps == ((":isHeldBy", True),)

    def test_inverse_of_composite_reverses(self):
        path = parse("s0.pivot(inverse(:A:B))").args[0].to_model()
        assert path.steps == ((":B", True), (":A", True))

    def test_setlit(self):
        assert parse("{p1, f1}") == SetLit(("p1", "f1"))

    def test_value_expression_precedence(self):
        ast = parse("s0.rank(2, :Year[%item] * -1 + 3)")
        score = ast.args[1]
        assert isinstance(score, ValBin) and score.op == "+"
        assert isinstance(score.left, ValBin) and score.left.op == "*"
        assert score.left.right == Num(-1)

    def test_kwargs(self):
        ast = parse("s5.ahmap(level=2, f=count)")
        assert ast.args == (Kwarg("level", Num(2)), Kwarg("f", Source("count")))


EXAMPLE_EXPRESSIONS = [
    "s0",
    "refine(refine(s0))",
    "s0.refine(equals(:Author, a1))",
    "branch(s0, refine(irs, equals(:VenueOf:Author, a1)), refine(irs, equals(:VenueOf:Author, a2)))",
    'refine(pivot(pivot(s0, :Author), :Affiliation), equals(:Abbr, "PUC-Rio"))!',
    'intersect(unite(refine(s0, equals(:Venue, ISWC)), refine(s0, equals(:Venue, ESWC))), '
    'unite(refine(s0, equals(:Author:Affiliation, PUC)), refine(s0, equals(:Author:Affiliation, UFRJ))))',
    "s6.rank(2, :citeCount[%item])[0..19]",
    "p.pivot(:isContextFor:isHeldBy)",
    "s1.refine(equals(:isContextFor:isHeldBy, s15))",
    "d.refine(and(equals(:type, Publication), equalsOne(:isContextFor:isHeldBy, s13)))",
    "s2.ahmap(mean)",
    "correlate({pol1}, {pol2}, maxLength=4)",
    "s0.thmap(1, round(%item * 3.5, 2))",
    "s0.tvmap(type_pair(:Type))",
]


class TestRoundTrip:
    @pytest.mark.parametrize("text", EXAMPLE_EXPRESSIONS)
    def test_named_examples_round_trip(self, text):
        ast = parse(text)
        assert parse(print_ast(ast)) == ast

    def test_print_is_canonical_fixed_point(self):
        for text in EXAMPLE_EXPRESSIONS:
            once = print_ast(parse(text))
            twice = print_ast(parse(once))
            assert once == twice

    def test_500_generated_asts_round_trip(self):
        rng = random.Random(99)
        for _ in range(500):
            ast = gen_expr(rng, depth=rng.randint(1, 4))
            printed = print_ast(ast)
            reparsed = parse(printed)
            assert reparsed == ast, printed

    def test_scripts_in_repo_round_trip(self):
        import glob

        paths = glob.glob("scripts/*.xpl")
        assert paths, "expected bundled scripts"
        for path in paths:
            with open(path, encoding="utf-8") as fh:
                script = parse_script(fh.read())
            assert parse_script(print_ast(script)) == script


# -- random AST generator ---------------------------------------------------

_IDENTS = ["s0", "s1", "d", "x1", "alpha"]
_RELS = [":Author", ":Affiliation", ":Year", ":cite"]
_PRED_VALUES = ["a1", "f2", "ISWC"]


def gen_relpath(rng: random.Random) -> RelPathLit:
    parts: list = [rng.choice(_RELS) for _ in range(rng.randint(1, 2))]
    if rng.random() < 0.25:
        return RelPathLit(tuple(parts), inverted=True)
    if rng.random() < 0.2:
        parts.append(RelPathLit((rng.choice(_RELS),), inverted=True))
    return RelPathLit(tuple(parts))


def gen_value(rng: random.Random, depth: int) -> dsl.Node:
    if depth <= 0:
        return rng.choice(
            [Num(rng.randint(-5, 20)), ItemPh(), Num(rng.randint(1, 9) + 0.5)]
        )
    pick = rng.random()
    if pick < 0.25:
        return RelLookup(gen_relpath(rng), ItemPh())
    if pick < 0.4:
        return FuncCall("c", (ItemPh(),))
    if pick < 0.55:
        return FuncCall("round", (gen_value(rng, depth - 1), Num(rng.randint(0, 3))))
    return ValBin(
        rng.choice("+-*"), gen_value(rng, depth - 1), gen_value(rng, depth - 1)
    )


def gen_pred(rng: random.Random, depth: int) -> Pred:
    pick = rng.random()
    if depth <= 0 or pick < 0.2:
        return Pred("true", ())
    if pick < 0.45:
        args = (gen_relpath(rng), Source(rng.choice(_PRED_VALUES)))
        return Pred("equals", args)
    if pick < 0.6:
        return Pred("matchAll", (Str("Semantic Web"), Str("survey")))
    if pick < 0.7:
        return Pred("not", (gen_pred(rng, depth - 1),))
    if pick < 0.85:
        return Pred("and", (gen_pred(rng, depth - 1), gen_pred(rng, depth - 1)))
    return Pred("greaterThan", (gen_value(rng, 1), Num(rng.randint(1990, 2020))))


def gen_expr(rng: random.Random, depth: int) -> dsl.Node:
    if depth <= 0:
        if rng.random() < 0.2:
            return SetLit(tuple(rng.sample(_IDENTS, rng.randint(1, 2))))
        return Source(rng.choice(_IDENTS))
    op = rng.choice(
        ["pivot", "refine", "group", "rank", "unite", "intersect", "diff",
         "ahmap", "thmap", "correlate", "slice"]
    )
    receiver = gen_expr(rng, depth - 1) if rng.random() < 0.6 else None
    args: list = []
    if receiver is None:
        args.append(gen_expr(rng, depth - 1))
    if op == "pivot" or op == "group":
        args.append(gen_relpath(rng))
    elif op == "refine":
        args.append(gen_pred(rng, depth - 1))
    elif op == "rank":
        args += [Num(2), gen_value(rng, depth - 1)]
    elif op in ("unite", "intersect", "diff", "correlate"):
        args.append(gen_expr(rng, depth - 1))
    elif op == "ahmap":
        args.append(Source(rng.choice(["count", "sum", "mean"])))
    elif op == "thmap":
        args += [Num(1), gen_value(rng, depth - 1)]
    elif op == "slice":
        args += [Num(0), Num(rng.randint(1, 30))]
    slc = (0, rng.randint(1, 20)) if op == "rank" and rng.random() < 0.4 else None
    node: dsl.Node = OpCall(op, receiver, tuple(args), slc)
    if depth >= 2 and rng.random() < 0.15 and op == "refine":
        node = Bang(node)
    return node


class TestEvaluation:
    def test_dataset_source(self):
        session = Session(demo_dataset())
        state = evaluate(session, "d")
        assert len(state.extension.leaves()) == len(session.dataset.entities)

    def test_item_singleton_source(self):
        session = Session(demo_dataset())
        state = evaluate(session, "p1")
        assert [i.id for i in state.extension.leaves()] == ["p1"]

    def test_statement_binding_and_reference(self):
        session = Session(demo_dataset())
        evaluate_script(session, "x = d.refine(equals(:Author, a3))\ny = x.pivot(:Author)")
        # x = {p3, p4}; their authors are a2 and a3
        assert sorted(i.id for i in session.states["y"].extension.leaves()) == ["a2", "a3"]

    def test_unbound_name(self):
        session = Session(demo_dataset())
        with pytest.raises(EvaluationError):
            evaluate(session, "nope.pivot(:Author)")

    def test_branch_produces_pair_with_common_parent(self):
        session = Session(demo_dataset())
        result = evaluate(
            session,
            "b = branch({p1, p2, p3, p4}, "
            "refine(irs, equals(:Author, a1)), refine(irs, equals(:Author, a2)))",
        )
        first, second = result
        assert sorted(i.id for i in first.extension.leaves()) == ["p1", "p2"]
        assert sorted(i.id for i in second.extension.leaves()) == ["p2", "p3"]
        parents_first = {a for a, b in session.deps if b == first.id}
        parents_second = {a for a, b in session.deps if b == second.id}
        assert parents_first == parents_second

    def test_branch_over_venue_sets(self):
        # venues of two researchers compared through one branched source
        from trailset.model import Dataset, Relation, entity

        p1, p2, p3 = entity("p1"), entity("p2"), entity("p3")
        a1, a2 = entity("a1"), entity("a2")
        iswc, www = entity("ISWC"), entity("WWW")
        ds = Dataset(
            [p1, p2, p3, a1, a2, iswc, www],
            [
                Relation(":Author", ((p1, a1), (p2, a2), (p3, a2))),
                Relation(":Venue", ((p1, iswc), (p2, iswc), (p3, www))),
            ],
        )
        session = Session(ds)
        first, second = evaluate(
            session,
            "v = branch({ISWC, WWW}, "
            "refine(irs, equals(:VenueOf:Author, a1)), "
            "refine(irs, equals(:VenueOf:Author, a2)))",
        )
        assert sorted(i.id for i in first.extension.leaves()) == ["ISWC"]
        assert sorted(i.id for i in second.extension.leaves()) == ["ISWC", "WWW"]

    def test_irs_outside_branch_fails(self):
        session = Session(demo_dataset())
        with pytest.raises(EvaluationError):
            evaluate(session, "irs.pivot(:Author)")

    def test_evaluation_is_deterministic(self):
        script = (
            "s1 = d.refine(equals(:Author, a1))\n"
            "s2 = s1.group(:Author)\n"
            "s3 = s2.rank(2, :Year[%item])\n"
        )
        extents = []
        for _ in range(2):
            session = Session(demo_dataset())
            evaluate_script(session, script)
            extents.append({k: session.states[k].extension for k in ("s1", "s2", "s3")})
        assert extents[0] == extents[1]
