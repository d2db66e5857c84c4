"""Command line: parse/render terms, batch-apply rules, run the HTTP service.

Errors exit nonzero after printing one machine-readable JSON line on stderr,
so scripts can tell exactly what went wrong.
"""

from __future__ import annotations

import json
import sys

import click

from .parser import ParseError, parse_term
from .render import FORMATS, render
from .service import RULES_ENV_VAR, ServiceError, batch_apply, create_app
from .standard import standard_registry


def _die(code: str, message: str, **details) -> None:
    payload = {"error": dict({"code": code, "message": message}, **details)}
    click.echo(json.dumps(payload), err=True)
    sys.exit(1)


@click.group()
def main() -> None:
    """Interactive term-rewriting workbench."""


@main.command("parse")
@click.argument("term")
@click.option("--format", "fmt", default="ascii", type=click.Choice(FORMATS),
              help="Output format.")
def parse_command(term: str, fmt: str) -> None:
    """Parse TERM and print it back in the chosen format."""
    registry = standard_registry()
    try:
        parsed = parse_term(term, registry)
    except ParseError as exc:
        _die("parse_error", exc.reason, line=exc.line, column=exc.column)
    click.echo(render(parsed, fmt, registry))


@main.command("apply")
@click.argument("term")
@click.option("--rule", required=True, help="Rule name to apply.")
@click.option("--site", type=int, default=None,
              help="Apply at exactly this site (0-based).")
@click.option("--all", "all_sites", is_flag=True,
              help="Apply at every site, each independently.")
@click.option("--format", "fmt", default="ascii", type=click.Choice(FORMATS),
              help="Output format.")
@click.option("--rules", "rules_file", default=None, envvar=RULES_ENV_VAR,
              help="Rule file (defaults to $%s, then the builtin rules)." % RULES_ENV_VAR)
def apply_command(term: str, rule: str, site, all_sites: bool, fmt: str, rules_file) -> None:
    """Apply RULE to TERM and print one result term per line."""
    if (site is None) == (not all_sites):
        _die("bad_request", "choose exactly one of --site K or --all")
    try:
        results = batch_apply(
            term, rule,
            site="all" if all_sites else site,
            formats=(fmt,),
            rules_file=rules_file,
        )
    except ServiceError as exc:
        _die(exc.code, exc.message, **exc.details)
    for result in results:
        click.echo(result["renderings"][fmt])


@main.command("serve")
@click.option("--port", default=8000, type=int)
@click.option("--host", default="127.0.0.1")
@click.option("--rules", "rules_file", default=None, envvar=RULES_ENV_VAR,
              help="Rule file used for new sessions (overrides the builtin set).")
def serve_command(port: int, host: str, rules_file) -> None:
    """Run the HTTP session service."""
    import os

    import uvicorn

    if rules_file:
        os.environ[RULES_ENV_VAR] = rules_file
    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
