"""Strategy grammars: which operator compositions a tool's interface allows.

An *expression skeleton* is an expression with every non-expression argument
(relations, filters, levels, literals) erased; sources abstract to the
terminal ``s0`` (``irs`` inside branch bodies).  A *strategy grammar* is a
context-free grammar over such skeletons, written one nonterminal per line::

    S -> branch(s0, S, S) | R
    R -> refine(R | s0)

Alternation may appear inside argument positions as shorthand.  A ``!``
suffix marks a production as back-propagation capable: it matches sentences
with or without the marker, and the marker itself is only admitted on the
outermost application, where back-propagation acts.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import dsl
from .model import TrailsetError

DEFAULT_DEPTH_CAP = 6


class GrammarError(TrailsetError):
    pass


# -- skeletons ------------------------------------------------------------


@dataclass(frozen=True)
class Skeleton:
    name: str
    children: tuple["Skeleton", ...] = ()
    bang: bool = False
    is_terminal: bool = False

    def render(self) -> str:
        if self.is_terminal:
            return self.name + ("!" if self.bang else "")
        inner = ", ".join(c.render() for c in self.children)
        return f"{self.name}({inner})" + ("!" if self.bang else "")

    def strip_bang(self) -> "Skeleton":
        return Skeleton(self.name, self.children, False, self.is_terminal)

    @property
    def depth(self) -> int:
        if self.is_terminal:
            return 0
        return 1 + max((c.depth for c in self.children), default=0)

    def __str__(self) -> str:
        return self.render()


def terminal(name: str, bang: bool = False) -> Skeleton:
    return Skeleton(name, (), bang, True)


# how many leading arguments of each operator are themselves expressions
_EXPR_ARITY = {
    "unite": 2,
    "intersect": 2,
    "diff": 2,
    "correlate": 2,
    "branch": 3,
}


def skeleton_of(node: dsl.Node) -> Skeleton:
    """Erase all non-expression arguments of a parsed expression.

    Chained calls normalise to nested form (``x.op(a)`` ≡ ``op(x, a)``);
    every plain source other than ``irs`` abstracts to ``s0``.
    """
    if isinstance(node, dsl.Bang):
        inner = skeleton_of(node.inner)
        return Skeleton(inner.name, inner.children, True, inner.is_terminal)
    if isinstance(node, dsl.Source):
        return terminal("irs" if node.name == "irs" else "s0")
    if isinstance(node, dsl.SetLit):
        return terminal("s0")
    if isinstance(node, dsl.OpCall):
        arity = _EXPR_ARITY.get(node.op, 1)
        exprs: list[dsl.Node] = []
        if node.receiver is not None:
            exprs.append(node.receiver)
        for arg in node.args:
            if len(exprs) >= arity:
                break
            if isinstance(arg, (dsl.Source, dsl.SetLit, dsl.OpCall, dsl.Bang)):
                exprs.append(arg)
        return Skeleton(node.op, tuple(skeleton_of(e) for e in exprs))
    if isinstance(node, dsl.Stmt):
        return skeleton_of(node.expr)
    raise GrammarError(f"no skeleton for {dsl.print_ast(node)!r}")


def parse_skeleton(text: str) -> Skeleton:
    """Parse an expression and take its skeleton."""
    return skeleton_of(dsl.parse(text))


def lint_skeleton(sk: Skeleton) -> list[str]:
    """Well-formedness warnings: stray ``irs`` outside branch bodies and
    non-root back-propagation markers."""
    warnings: list[str] = []

    def walk(node: Skeleton, in_branch_body: bool, is_root: bool) -> None:
        if node.is_terminal and node.name == "irs" and not in_branch_body:
            warnings.append("irs used outside a branch body")
        if node.bang and not is_root:
            warnings.append(f"'!' on a nested application: {node.render()}")
        for n, child in enumerate(node.children):
            child_in_body = in_branch_body or (node.name == "branch" and n > 0)
            walk(child, child_in_body, False)

    walk(sk, False, True)
    return warnings


# -- grammars --------------------------------------------------------------


@dataclass(frozen=True)
class Template:
    kind: str  # "nonterminal" | "terminal" | "op"
    name: str
    args: tuple["Template", ...] = ()
    bang: bool = False

    def render(self) -> str:
        if self.kind == "op":
            inner = ", ".join(a.render() for a in self.args)
            return f"{self.name}({inner})" + ("!" if self.bang else "")
        return self.name + ("!" if self.bang else "")


@dataclass
class StrategyGrammar:
    name: str
    start: str
    productions: dict[str, tuple[Template, ...]]
    source: str = ""

    def nonterminals(self) -> set[str]:
        return set(self.productions)

    def validate(self) -> None:
        def walk(t: Template) -> None:
            if t.kind == "nonterminal" and t.name not in self.productions:
                raise GrammarError(f"undeclared nonterminal {t.name!r}")
            for a in t.args:
                walk(a)

        if self.start not in self.productions:
            raise GrammarError(f"undeclared start symbol {self.start!r}")
        for alternatives in self.productions.values():
            for t in alternatives:
                walk(t)


_GRAMMAR_TOKEN = re.compile(r"->|[A-Za-z_][A-Za-z0-9_]*|[(),|!]|\S")


def _is_nonterminal(name: str) -> bool:
    return name[0].isupper()


def parse_grammar(text: str, name: str = "grammar") -> StrategyGrammar:
    """Parse the one-production-per-line text form; ``#`` comments allowed.

    Inline alternation within argument positions is expanded, so
    ``refine(R | s0)`` contributes both ``refine(R)`` and ``refine(s0)``.
    """
    productions: dict[str, tuple[Template, ...]] = {}
    start: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" not in line:
            raise GrammarError(f"line {lineno}: expected 'NT -> alternatives'")
        lhs, rhs = line.split("->", 1)
        nt = lhs.strip()
        if not nt or not _is_nonterminal(nt):
            raise GrammarError(f"line {lineno}: left side must be a nonterminal")
        tokens = _GRAMMAR_TOKEN.findall(rhs)
        alternatives = _parse_alternatives(tokens, lineno)
        if nt in productions:
            productions[nt] = productions[nt] + tuple(alternatives)
        else:
            productions[nt] = tuple(alternatives)
        if start is None:
            start = nt
    if start is None:
        raise GrammarError("empty grammar")
    g = StrategyGrammar(name, start, productions, source=text)
    g.validate()
    return g


def _parse_alternatives(tokens: list[str], lineno: int) -> list[Template]:
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def advance() -> str:
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    def parse_alt_list() -> list[Template]:
        alts = parse_templates()
        while peek() == "|":
            advance()
            alts.extend(parse_templates())
        return alts

    def parse_templates() -> list[Template]:
        # one template, possibly expanding inline argument alternation
        tok = peek()
        if tok is None or tok in (",", ")", "|"):
            raise GrammarError(f"line {lineno}: expected a symbol")
        advance()
        if not re.match(r"[A-Za-z_]", tok):
            raise GrammarError(f"line {lineno}: unexpected {tok!r}")
        results: list[Template]
        if peek() == "(":
            advance()
            arg_choices: list[list[Template]] = []
            if peek() != ")":
                arg_choices.append(parse_alt_list())
                while peek() == ",":
                    advance()
                    arg_choices.append(parse_alt_list())
            if peek() != ")":
                raise GrammarError(f"line {lineno}: missing ')'")
            advance()
            combos: list[tuple[Template, ...]] = [()]
            for choices in arg_choices:
                combos = [c + (choice,) for c in combos for choice in choices]
            results = [Template("op", tok, combo) for combo in combos]
        elif _is_nonterminal(tok):
            results = [Template("nonterminal", tok)]
        else:
            results = [Template("terminal", tok)]
        if peek() == "!":
            advance()
            results = [
                Template(t.kind, t.name, t.args, bang=True) for t in results
            ]
        return results

    alts = parse_alt_list()
    if pos != len(tokens):
        raise GrammarError(f"line {lineno}: trailing {tokens[pos]!r}")
    return alts


# -- membership -------------------------------------------------------------


@dataclass
class Derivation:
    symbol: str
    template: str
    children: list["Derivation"] = field(default_factory=list)

    def render(self, indent: int = 0) -> str:
        lines = [" " * indent + f"{self.symbol} -> {self.template}"]
        for c in self.children:
            lines.append(c.render(indent + 2))
        return "\n".join(lines)


def derivable(g: StrategyGrammar, sk: Skeleton) -> Derivation | None:
    """Top-down matching of a skeleton against the grammar; returns one
    derivation when the sentence is in the language."""
    g.validate()
    memo: dict[tuple[str, Skeleton, bool], Derivation | None] = {}
    in_progress: set[tuple[str, Skeleton, bool]] = set()

    def match_nt(nt: str, node: Skeleton, is_root: bool) -> Derivation | None:
        key = (nt, node, is_root)
        if key in memo:
            return memo[key]
        if key in in_progress:
            return None
        in_progress.add(key)
        result: Derivation | None = None
        for tmpl in g.productions[nt]:
            subd = match(tmpl, node, is_root)
            if subd is not None:
                result = Derivation(nt, tmpl.render(), [subd] if subd.symbol else [])
                if not subd.symbol:
                    result.children = subd.children
                break
        in_progress.discard(key)
        memo[key] = result
        return result

    def match(tmpl: Template, node: Skeleton, is_root: bool) -> Derivation | None:
        if node.bang:
            if not tmpl.bang and tmpl.kind != "nonterminal":
                return None
            if tmpl.bang:
                if not is_root:
                    return None
                node = node.strip_bang()
        if tmpl.kind == "nonterminal":
            return match_nt(tmpl.name, node, is_root)
        if tmpl.kind == "terminal":
            if not node.is_terminal or node.bang:
                return None
            ok = node.name == tmpl.name or (tmpl.name == "s0" and node.name == "irs")
            return Derivation("", node.name, []) if ok else None
        # op template
        if node.is_terminal or node.bang:
            return None
        if node.name != tmpl.name or len(node.children) != len(tmpl.args):
            return None
        children: list[Derivation] = []
        for arg_tmpl, child in zip(tmpl.args, node.children):
            sub = match(arg_tmpl, child, False)
            if sub is None:
                return None
            if sub.symbol:
                children.append(sub)
            else:
                children.extend(sub.children)
        return Derivation("", tmpl.render(), children)

    return match_nt(g.start, sk, True)


def accepts(g: StrategyGrammar, sk: Skeleton) -> bool:
    return derivable(g, sk) is not None


# -- enumeration -------------------------------------------------------------


def _closed_alternatives(g: StrategyGrammar) -> dict[str, tuple[Template, ...]]:
    """Replace unit (bare nonterminal) alternatives by their transitive
    op/terminal expansions, folding ``!`` markers along the way."""
    closed: dict[str, tuple[Template, ...]] = {}

    def close(nt: str, seen: frozenset[str]) -> list[Template]:
        out: list[Template] = []
        for tmpl in g.productions[nt]:
            if tmpl.kind == "nonterminal":
                if tmpl.name in seen:
                    continue
                for inner in close(tmpl.name, seen | {tmpl.name}):
                    if tmpl.bang and not inner.bang:
                        inner = Template(inner.kind, inner.name, inner.args, True)
                    if inner not in out:
                        out.append(inner)
            elif tmpl not in out:
                out.append(tmpl)
        return out

    for nt in g.productions:
        closed[nt] = tuple(close(nt, frozenset({nt})))
    return closed


def enumerate_language(
    g: StrategyGrammar,
    max_depth: int,
    depth_cap: int = DEFAULT_DEPTH_CAP,
) -> set[Skeleton]:
    """Exactly the sentences of nesting depth ≤ ``max_depth``.

    Inside branch bodies the source terminal materialises as ``irs``
    (the body's input is the branched set), elsewhere as ``s0``.
    """
    if max_depth > depth_cap:
        raise GrammarError(f"depth {max_depth} exceeds cap {depth_cap}")
    g.validate()
    closed = _closed_alternatives(g)
    memo: dict[tuple[str, int, bool, bool], frozenset[Skeleton]] = {}

    def sentences(nt: str, budget: int, in_body: bool, at_root: bool) -> frozenset[Skeleton]:
        key = (nt, budget, in_body, at_root)
        if key in memo:
            return memo[key]
        out: set[Skeleton] = set()
        # closed alternatives are op or terminal templates, so every
        # recursive call below strictly decreases the budget
        for tmpl in closed[nt]:
            out |= expand(tmpl, budget, in_body, at_root)
        result = frozenset(out)
        memo[key] = result
        return result

    def expand(tmpl: Template, budget: int, in_body: bool, at_root: bool) -> set[Skeleton]:
        if tmpl.kind == "terminal":
            name = "irs" if (tmpl.name == "s0" and in_body) else tmpl.name
            return {terminal(name)}
        if tmpl.kind == "nonterminal":
            base = set(sentences(tmpl.name, budget, in_body, at_root))
            if tmpl.bang and at_root:
                base |= {
                    Skeleton(s.name, s.children, True, s.is_terminal)
                    for s in base
                    if not s.is_terminal
                }
            return base
        if budget < 1:
            return set()
        child_sets: list[set[Skeleton]] = []
        for n, arg in enumerate(tmpl.args):
            child_body = in_body or (tmpl.name == "branch" and n > 0)
            child_sets.append(expand(arg, budget - 1, child_body, False))
        combos: list[tuple[Skeleton, ...]] = [()]
        for cs in child_sets:
            combos = [c + (s,) for c in combos for s in sorted(cs, key=str)]
        out = {Skeleton(tmpl.name, combo) for combo in combos}
        if tmpl.bang and at_root:
            out |= {Skeleton(s.name, s.children, True) for s in out}
        return out

    return set(sentences(g.start, max_depth, False, True))


@dataclass
class GrammarComparison:
    a: str
    b: str
    depth: int
    only_in_a: list[Skeleton]
    only_in_b: list[Skeleton]

    @property
    def verdict(self) -> str:
        if not self.only_in_a and not self.only_in_b:
            return "equal"
        if not self.only_in_a:
            return f"{self.a} ⊂ {self.b}"
        if not self.only_in_b:
            return f"{self.b} ⊂ {self.a}"
        return "incomparable"

    def render(self) -> str:
        lines = [
            f"comparing {self.a} and {self.b} at depth {self.depth}: {self.verdict}"
        ]
        if self.only_in_a:
            lines.append(f"only in {self.a}:")
            lines.extend(f"  {s.render()}" for s in self.only_in_a)
        if self.only_in_b:
            lines.append(f"only in {self.b}:")
            lines.extend(f"  {s.render()}" for s in self.only_in_b)
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "depth": self.depth,
            "verdict": self.verdict,
            "onlyInA": [s.render() for s in self.only_in_a],
            "onlyInB": [s.render() for s in self.only_in_b],
        }


def compare_grammars(
    ga: StrategyGrammar, gb: StrategyGrammar, max_depth: int
) -> GrammarComparison:
    la = enumerate_language(ga, max_depth)
    lb = enumerate_language(gb, max_depth)
    return GrammarComparison(
        ga.name,
        gb.name,
        max_depth,
        sorted(la - lb, key=str),
        sorted(lb - la, key=str),
    )


# -- presets -----------------------------------------------------------------

_PRESET_TEXTS: dict[str, str] = {
    "faceted-v1": "S -> refine(S | s0)",
    "faceted-v2": (
        "S -> branch(s0, S, S) | R\n"
        "R -> refine(R | s0)"
    ),
    "faceted-v3": (
        "S -> P | R | branch(s0 | S, S, S)\n"
        "R -> refine(R | P | s0)!\n"
        "P -> pivot(R | P | s0)"
    ),
    "faceted-v4": (
        "S -> branch(s0 | S, S, S) | O | R | R! | P\n"
        "O -> intersect(S, S) | unite(S, S)\n"
        "R -> refine(O | R | P | s0)\n"
        "P -> pivot(O | R | P | s0)"
    ),
    "humboldt-parallax": (
        "S -> P | R\n"
        "R -> refine(P | s0) | intersect(R, R)\n"
        "P -> pivot(R | s0 | P)"
    ),
}

_PRESET_ALIASES = {
    "v1": "faceted-v1",
    "v2": "faceted-v2",
    "v3": "faceted-v3",
    "v4": "faceted-v4",
    "flamenco-mspace-fws": "faceted-v1",
    "parallel-faceted-browser": "faceted-v2",
    "facet-gfacet-tfacet-rhizomer-browserdf": "faceted-v3",
    "sewelis-semfacet": "faceted-v4",
}


def grammar_preset_names() -> list[str]:
    return list(_PRESET_TEXTS)


def grammar_preset(name: str) -> StrategyGrammar:
    canonical = _PRESET_ALIASES.get(name, name)
    if canonical not in _PRESET_TEXTS:
        raise GrammarError(f"unknown grammar preset {name!r}")
    return parse_grammar(_PRESET_TEXTS[canonical], name=canonical)


def grammar_presets() -> dict[str, StrategyGrammar]:
    return {name: grammar_preset(name) for name in _PRESET_TEXTS}
