"""Command-line interface.

Exit status is 0 on success, 1 on a domain error or a failed check, and 2
on a usage error. With --json every subcommand writes one JSON document to
stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import json
import logging
import sys
from typing import Any

import click

from nilcap import analysis, collect, hall, nilprod, oracle
from nilcap.exceptions import NilcapError
from nilcap.term import parse_expr

logger = logging.getLogger(__name__)

_UNBOUNDED = 10**6


class NilcapGroup(click.Group):
    """Maps library errors to exit status 1."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except NilcapError as exc:
            raise click.ClickException(str(exc)) from exc


def _parse_orders(ctx: click.Context, param: click.Parameter, value: str | None) -> tuple[int, ...] | None:
    if value is None:
        return None
    try:
        return tuple(int(part) for part in value.split(","))
    except ValueError:
        raise click.BadParameter("expected comma-separated integers, e.g. 1,2") from None


def _emit(as_json: bool, payload: dict, lines: list[str]) -> None:
    if as_json:
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in lines:
            click.echo(line)


def _group(p: int, k: int, orders: tuple[int, ...], no_cache: bool) -> nilprod.PcPresentation:
    spec = nilprod.GroupSpec(p, k, orders)
    return nilprod.cached_build_group(spec, use_cache=not no_cache)


def _bare_basic(text: str, r: int) -> hall.BasicCommutator:
    return hall.from_expr(parse_expr(text, r or _UNBOUNDED))


json_option = click.option("--json", "as_json", is_flag=True, help="Write JSON to stdout.")
prime_option = click.option("-p", "p", type=int, required=True, help="Prime p.")
class_option = click.option("-k", "k", type=int, required=True, help="Nilpotency class bound.")
orders_option = click.option(
    "--orders", callback=_parse_orders, required=True, help="Comma-separated exponents alpha_1..alpha_r."
)
cache_option = click.option("--no-cache", is_flag=True, help="Do not read or write the presentation cache.")


@click.group(cls=NilcapGroup)
@click.option("-v", "--verbose", is_flag=True, help="Debug logging on stderr.")
def cli(verbose: bool) -> None:
    """Hall commutators, nilpotent products of cyclic p-groups, centers and capability."""
    if verbose:
        logging.basicConfig(level=logging.DEBUG, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@click.option("-r", "r", type=int, required=True, help="Number of generators.")
@class_option
@json_option
def basis(r: int, k: int, as_json: bool) -> None:
    """List the basic commutators of weight <= k on x1..xr."""
    table = hall.generate_basis(r, k)
    payload = {
        "r": r,
        "k": k,
        "basis": [{"index": i + 1, "weight": c.weight, "commutator": str(c)} for i, c in enumerate(table)],
    }
    _emit(as_json, payload, [str(c) for c in table])


@cli.command()
@click.argument("u")
@click.argument("v")
@click.option("-r", "r", type=int, default=0, help="Bound on generator indices (default: none).")
@json_option
def shove(u: str, v: str, r: int, as_json: bool) -> None:
    """Shove the smaller of two basic commutators into the larger."""
    a, b = _bare_basic(u, r), _bare_basic(v, r)
    result = hall.shove(a, b)
    _emit(as_json, {"u": str(a), "v": str(b), "shove": str(result)}, [str(result)])


@cli.command("collect")
@click.argument("expr")
@click.option("-r", "r", type=int, required=True, help="Number of generators.")
@class_option
@json_option
def collect_command(expr: str, r: int, k: int, as_json: bool) -> None:
    """Collected normal form of EXPR in the free nilpotent group F/F_{k+1}."""
    value = collect.embed(parse_expr(expr, r), hall.generate_basis(r, k))
    _emit(as_json, {"r": r, "k": k, "normal_form": value.to_dict()}, [str(value)])


@cli.command()
@click.argument("expr")
@prime_option
@class_option
@orders_option
@cache_option
@json_option
def nf(expr: str, p: int, k: int, orders: tuple[int, ...], no_cache: bool, as_json: bool) -> None:
    """Normal form of EXPR in the k-nilpotent product of cyclic p-groups."""
    g = _group(p, k, orders, no_cache)
    value = nilprod.normal_form(parse_expr(expr, g.spec.r), g)
    beta = nilprod.struik_form(value, g)
    payload = {"normal_form": str(value), "exponents": list(beta), "terms": value.to_dict()}
    _emit(as_json, payload, [str(value), f"exponents: {' '.join(map(str, beta))}"])


@cli.command()
@click.argument("expr")
@prime_option
@class_option
@orders_option
@cache_option
@json_option
def order(expr: str, p: int, k: int, orders: tuple[int, ...], no_cache: bool, as_json: bool) -> None:
    """Order of EXPR, or of the group itself when EXPR is 'G'."""
    g = _group(p, k, orders, no_cache)
    if expr == "G":
        n = g.order
    else:
        n = nilprod.order_of(nilprod.normal_form(parse_expr(expr, g.spec.r), g), g)
    _emit(as_json, {"expr": expr, "order": n}, [str(n)])


@cli.command()
@prime_option
@class_option
@orders_option
@click.option("--brute", is_flag=True, help="Also enumerate the center and compare.")
@cache_option
@json_option
def center(p: int, k: int, orders: tuple[int, ...], brute: bool, no_cache: bool, as_json: bool) -> None:
    """Center of the k-nilpotent product from its closed formula."""
    g = _group(p, k, orders, no_cache)
    report = analysis.center_report(g, brute=brute)
    lines = [f"formula: {report.formula.describe()}", f"order: {len(report.formula_elements)}"]
    if report.brute is not None:
        verdict = "agree" if report.match else "DISAGREE"
        lines.append(f"brute force: {len(report.brute)} central elements, {verdict}")
    _emit(as_json, report.to_dict(), lines)
    if report.match is False:
        click.get_current_context().exit(1)


@cli.command()
@prime_option
@click.option("-k", "k", type=int, default=None, help="Nilpotency class (default: p).")
@orders_option
@json_option
def capable(p: int, k: int | None, orders: tuple[int, ...], as_json: bool) -> None:
    """Decide capability of the k-nilpotent product."""
    # validates p and the exponents
    nilprod.GroupSpec(p, k or p, tuple(sorted(orders)))
    verdict = analysis.capability_verdict(p, k or p, orders)
    payload = {"p": p, "k": k or p, "alphas": list(orders), "capable": verdict.capable, "rule": verdict.rule.value}
    _emit(as_json, payload, [verdict.describe()])


@cli.command()
@prime_option
@orders_option
@json_option
def witness(p: int, orders: tuple[int, ...], as_json: bool) -> None:
    """Build K with K/Z(K) isomorphic to the p-nilpotent product."""
    report = analysis.capability_witness(p, orders)
    lines = [
        f"K: order {report.order_k}",
        f"Z(K): order {report.center_order}",
        f"K/Z(K): order {report.quotient_order}",
        f"verified: {str(report.verified).lower()}",
        *report.failures,
    ]
    _emit(as_json, report.to_dict(), lines)
    if not report.verified:
        click.get_current_context().exit(1)


@cli.command()
@prime_option
@class_option
@orders_option
@click.option("--level", type=click.Choice(["sampled", "full"]), default="sampled", show_default=True)
@cache_option
@json_option
def verify(p: int, k: int, orders: tuple[int, ...], level: str, no_cache: bool, as_json: bool) -> None:
    """Check the presentation's consistency; full level also checks the table."""
    g = _group(p, k, orders, no_cache)
    report = nilprod.verify_consistency(g, level)
    payload = {"consistency": report.to_dict()}
    lines = [f"consistency ({level}): {'pass' if report.passed else 'FAIL'} after {report.checks} checks"]
    if not report.passed:
        lines.append(f"  {report.failure}: {report.witness}")
    passed = report.passed
    if level == "full" and passed:
        table = oracle.full_table_check(g)
        payload["table"] = table.to_dict()
        lines.append(f"table: {'pass' if table.passed else 'FAIL'} after {table.checks} checks")
        if not table.passed:
            lines.append(f"  {table.failure}: {', '.join(table.witness or ())}")
        passed = table.passed
    _emit(as_json, payload, lines)
    if not passed:
        click.get_current_context().exit(1)


def main() -> None:
    cli()
