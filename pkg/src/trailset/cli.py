"""Command-line entry points; thin wrappers over the library and service."""
from __future__ import annotations

import sys

import click

from . import dsl, grammar
from .evaluator import EvaluationError, evaluate_script
from .ingest import (
    IngestError,
    build_citation_fixture,
    fingerprint,
    load_file,
    serialize,
)
from .model import SetNode, TrailsetError
from .session import Session


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _render_tree(node: SetNode, indent: int = 0, out: list[str] | None = None) -> list[str]:
    lines = out if out is not None else []
    label = node.item.display()
    shown = f"{node.item.id}" if label == node.item.id else f"{node.item.id}  {label}"
    lines.append("  " * indent + shown)
    for c in node.children:
        _render_tree(c, indent + 1, lines)
    return lines


def _print_state(state, limit: int) -> None:
    ext = state.extension
    children = ext.children
    for node in children[:limit]:
        for line in _render_tree(node):
            click.echo(line)
    if len(children) > limit:
        click.echo(f"... ({len(children) - limit} more)")


@click.group()
def main() -> None:
    """Explore nested item sets with composable operators."""


@main.command()
@click.argument("file", type=click.Path(exists=True))
def load(file: str) -> None:
    """Validate a dataset file and print its fingerprint."""
    try:
        dataset = load_file(file)
    except (IngestError, TrailsetError) as exc:
        _fail(str(exc))
        return
    click.echo(f"fingerprint: {fingerprint(dataset)}")
    click.echo(f"entities: {len(dataset.entities)}")
    click.echo(f"relations: {len(dataset.relations)}")
    for rel in dataset.relations.values():
        click.echo(f"  {rel.id}: {len(rel.pairs)} pairs")


@main.command(name="eval")
@click.option("-d", "--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("-f", "--file", "script_path", required=True, type=click.Path(exists=True))
@click.option("--show", default=25, help="Max top-level items to print.")
def eval_cmd(dataset_path: str, script_path: str, show: int) -> None:
    """Run a script and print the final state's items."""
    try:
        dataset = load_file(dataset_path)
        session = Session(dataset)
        with open(script_path, encoding="utf-8") as fh:
            results = evaluate_script(session, fh.read())
    except (IngestError, dsl.ParseError, EvaluationError, TrailsetError) as exc:
        _fail(str(exc))
        return
    if not results:
        return
    final = results[-1]
    states = final if isinstance(final, tuple) else (final,)
    for state in states:
        click.echo(f"# {state.text}")
        _print_state(state, show)


@main.command()
@click.option("-d", "--dataset", "dataset_path", required=True, type=click.Path(exists=True))
def repl(dataset_path: str) -> None:
    """Interactive statement loop; :trail lists the session, :quit exits."""
    try:
        dataset = load_file(dataset_path)
    except (IngestError, TrailsetError) as exc:
        _fail(str(exc))
        return
    session = Session(dataset)
    click.echo("type statements, :trail for the session trail, :quit to leave")
    while True:
        try:
            line = input("xpl> ").strip()
        except EOFError:
            break
        if not line:
            continue
        if line in (":quit", ":q"):
            break
        if line == ":trail":
            for node in session.trail()["nodes"]:
                click.echo(f"{node['id']}: {node['intentionText']}")
            continue
        try:
            results = evaluate_script(session, line)
        except (dsl.ParseError, EvaluationError, TrailsetError) as exc:
            click.echo(f"error: {exc}")
            continue
        for result in results:
            for state in result if isinstance(result, tuple) else (result,):
                click.echo(f"{state.id}:")
                _print_state(state, 15)


@main.group(name="grammar")
def grammar_group() -> None:
    """Strategy-grammar analysis."""


def _load_grammar(spec: str) -> grammar.StrategyGrammar:
    try:
        if spec in grammar.grammar_preset_names() or spec in ("v1", "v2", "v3", "v4"):
            return grammar.grammar_preset(spec)
        with open(spec, encoding="utf-8") as fh:
            return grammar.parse_grammar(fh.read(), name=spec)
    except FileNotFoundError:
        _fail(f"no such grammar preset or file: {spec}")
        raise
    except grammar.GrammarError as exc:
        _fail(str(exc))
        raise


@grammar_group.command()
@click.option("--grammar", "grammar_spec", required=True, help="Preset name or grammar file.")
@click.option("--expr", required=True, help="Expression to check.")
def check(grammar_spec: str, expr: str) -> None:
    """Check whether an expression's skeleton is derivable."""
    g = _load_grammar(grammar_spec)
    try:
        sk = grammar.parse_skeleton(expr)
    except (dsl.ParseError, grammar.GrammarError) as exc:
        _fail(str(exc))
        return
    for warning in grammar.lint_skeleton(sk):
        click.echo(f"warning: {warning}", err=True)
    derivation = grammar.derivable(g, sk)
    if derivation is None:
        click.echo(f"reject {sk.render()}")
    else:
        click.echo(f"accept {sk.render()}")
        click.echo(derivation.render())


@grammar_group.command()
@click.option("--a", "spec_a", required=True)
@click.option("--b", "spec_b", required=True)
@click.option("--depth", default=3, type=int)
def compare(spec_a: str, spec_b: str, depth: int) -> None:
    """Enumerate both languages and report the differences."""
    ga = _load_grammar(spec_a)
    gb = _load_grammar(spec_b)
    try:
        report = grammar.compare_grammars(ga, gb, depth)
    except grammar.GrammarError as exc:
        _fail(str(exc))
        return
    click.echo(report.render())


@main.command()
@click.option("-d", "--dataset", "dataset_paths", multiple=True, type=click.Path(exists=True))
@click.option("--port", default=8000, type=int)
@click.option("--host", default="127.0.0.1")
@click.option("--reject-busy", is_flag=True, help="409 instead of queueing concurrent evals.")
def serve(dataset_paths: tuple[str, ...], port: int, host: str, reject_busy: bool) -> None:
    """Start the HTTP service; datasets are named after their files."""
    import os

    import uvicorn

    from .ingest import demo_dataset
    from .service import create_app

    datasets = {}
    for path in dataset_paths:
        try:
            name = os.path.splitext(os.path.basename(path))[0]
            datasets[name] = load_file(path)
        except (IngestError, TrailsetError) as exc:
            _fail(str(exc))
            return
    if not datasets:
        datasets["demo"] = demo_dataset()
    app = create_app(datasets, queue_writes=not reject_busy)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--seed", default=1, type=int)
@click.option("--scale", default=200, type=int)
@click.option("-o", "--out", "out_path", required=True, type=click.Path())
def fixture(seed: int, scale: int, out_path: str) -> None:
    """Write a synthetic citation corpus and print its planted statistics."""
    try:
        fx = build_citation_fixture(seed, scale)
    except IngestError as exc:
        _fail(str(exc))
        return
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(serialize(fx.dataset))
    click.echo(f"wrote {out_path}")
    click.echo(f"paper: {fx.paper_id}")
    click.echo(f"citations: {len(fx.citation_ids)}")
    click.echo(f"mean citation year: {fx.mean_citation_year}")
    click.echo(f"self citations: {fx.self_citation_count}")
    click.echo(f"same venue citations: {fx.same_venue_citation_count}")


if __name__ == "__main__":
    main()
