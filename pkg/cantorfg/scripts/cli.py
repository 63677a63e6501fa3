#!/usr/bin/env python3
"""
cantor-fg: fundamental groups of Cantor minimal systems and the clopen constructions behind them.

    cantor-fg fg odometer --base "2,3|5"
    cantor-fg fg denjoy --theta "(-1+sqrt(5))/2"
    cantor-fg verify brown --system "odometer:2" --clopen "[0]" --levels 4
    cantor-fg describe subgroup --lattice "x^2-5; 1, a"

Reports go to stdout as JSON (or ``key: value`` text), logs to stderr.
Exit status: 0 success, 1 rejected input, 2 failed internal check, 64 usage error.
"""
import json
import logging
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import click

from cantorfg.core.clopen import amplify_invariant, brown_homeomorphism, measure_invariance, restrict, scaling_group_check
from cantorfg.core.denjoy import DenjoySpec
from cantorfg.core.denjoy import fundamental_group as denjoy_group
from cantorfg.core.denjoy import value_group as denjoy_value_group
from cantorfg.core.exceptions import CantorFGError, InvariantViolation, SpecError
from cantorfg.core.lattice import Lattice, RationalRankOne, im_plus, ring_realizable
from cantorfg.core.odometer import OdometerSpec, induced_conjugacy, product_group, ring_realization
from cantorfg.core.odometer import fundamental_group as odometer_group
from cantorfg.core.odometer import value_group as odometer_value_group
from cantorfg.core.parser import (
    parse_base,
    parse_clopen,
    parse_number,
    parse_rationals,
    parse_subgroup,
    parse_supernatural,
    parse_system,
)
from cantorfg.core.units import order_from_lattice, pell_suite, verify_unit_system
from cantorfg.core.utils import SCHEMA, Settings, dump_json, load_config, render_text, report, resolve_settings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_INVARIANT = 2
EXIT_USAGE = 64

CONFIG_SECTIONS = ("settings", "fg", "verify", "describe")


@dataclass
class State:
    settings: Settings
    fmt: str


def _emit(ctx: click.Context, body: Dict[str, Any]):
    state: State = ctx.obj
    data = report(body)
    click.echo(dump_json(data) if state.fmt == "json" else render_text(data))


def _odometer_spec(text: str) -> OdometerSpec:
    preperiod, period = parse_base(text)
    return OdometerSpec(preperiod, period)


def _check_defaults(config: Dict[str, Any]) -> Dict[str, Any]:
    """Turn the per-command tables of a config file into a click default_map."""
    unknown = set(config) - set(CONFIG_SECTIONS)
    if unknown:
        raise click.UsageError(f"unknown config tables: {', '.join(sorted(unknown))}")
    default_map = {}
    for section in CONFIG_SECTIONS[1:]:
        group = cli.commands[section]
        tables = config.get(section, {})
        for name, values in tables.items():
            command = group.commands.get(name)
            if command is None or not isinstance(values, dict):
                raise click.UsageError(f"unknown config table [{section}.{name}]")
            params = {p.name for p in command.params}
            extra = set(values) - params
            if extra:
                raise click.UsageError(f"unknown keys in [{section}.{name}]: {', '.join(sorted(extra))}")
        default_map[section] = tables
    return default_map


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json", show_default=True)
@click.option("--config", type=click.Path(exists=True, dir_okay=False), help="TOML file with [settings] and per-command tables.")
@click.option("--search-bound", type=click.IntRange(min=1), default=None, help="Cover and unit search ceiling (also CANTOR_FG_SEARCH_BOUND).")
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for search details.")
@click.pass_context
def cli(ctx, fmt, config, search_bound, verbose):
    level = logging.WARNING if verbose == 0 else (logging.INFO if verbose == 1 else logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    raw = load_config(config) if config else {}
    try:
        settings = resolve_settings(raw, search_bound)
    except SpecError as e:
        raise click.UsageError(str(e))
    ctx.default_map = _check_defaults(raw)
    ctx.obj = State(settings, fmt)


@cli.group()
def fg():
    """Fundamental groups."""


@fg.command()
@click.option("--base", help="Odometer base: 'preperiod|period', e.g. '2,3|5'.")
@click.option("--supernatural", help="Denominators, e.g. '2^inf*3^2'.")
@click.pass_context
def odometer(ctx, base, supernatural):
    """Odometer, or the rational rank one group of a supernatural number."""
    settings = ctx.obj.settings
    if (base is None) == (supernatural is None):
        raise click.UsageError("give exactly one of --base and --supernatural")
    if base is not None:
        spec = _odometer_spec(base)
        E, group = odometer_value_group(spec), odometer_group(spec, settings)
        system = f"odometer:{spec.describe()}"
    else:
        E = RationalRankOne(parse_supernatural(supernatural))
        group, system = im_plus(E, settings), E.describe()
    _emit(ctx, {"command": "fg odometer", "system": system, "value_group": E.to_dict(),
                "group": group.to_dict(settings.decimal_digits)})


@fg.command()
@click.option("--base1", required=True)
@click.option("--base2", required=True)
@click.pass_context
def odometer2(ctx, base1, base2):
    """Z^2-odometer given by two bases."""
    first, second = _odometer_spec(base1), _odometer_spec(base2)
    E, group = product_group(first, second, ctx.obj.settings)
    _emit(ctx, {"command": "fg odometer2", "system": f"odometer2:{first.describe()};{second.describe()}",
                "value_group": E.to_dict(), "group": group.to_dict(ctx.obj.settings.decimal_digits)})


def _denjoy_report(ctx, name: str, spec: DenjoySpec):
    settings = ctx.obj.settings
    group = denjoy_group(spec, settings)
    _emit(ctx, {"command": name, "system": spec.describe(),
                "value_group": denjoy_value_group(spec).to_dict(settings.decimal_digits),
                "group": group.to_dict(settings.decimal_digits)})


@fg.command()
@click.option("--theta", required=True, help="Irrational rotation number, e.g. '(-1+sqrt(5))/2'.")
@click.pass_context
def denjoy(ctx, theta):
    _denjoy_report(ctx, "fg denjoy", DenjoySpec((parse_number(theta),)))


@fg.command()
@click.option("--theta1", required=True)
@click.option("--theta2", required=True)
@click.pass_context
def denjoy2(ctx, theta1, theta2):
    _denjoy_report(ctx, "fg denjoy2", DenjoySpec((parse_number(theta1), parse_number(theta2))))


@fg.command()
@click.option("--lattice", "text", required=True, help="'x^2-5; 1, a' or 'supernatural: 2^inf'.")
@click.pass_context
def subgroup(ctx, text):
    """IM+ of an explicit additive subgroup."""
    settings = ctx.obj.settings
    E = parse_subgroup(text)
    group = im_plus(E, settings)
    _emit(ctx, {"command": "fg subgroup", "subgroup": E.describe(),
                "value_group": E.to_dict() if isinstance(E, RationalRankOne) else E.to_dict(settings.decimal_digits),
                "group": group.to_dict(settings.decimal_digits)})


@cli.group()
def verify():
    """Exact verification suites."""


@verify.command()
@click.option("--dmax", type=int, default=500, show_default=True)
@click.option("--dmin", type=int, default=5, show_default=True)
@click.pass_context
def pell(ctx, dmax, dmin):
    """Continued fraction Pell solutions against exhaustive search."""
    frame = pell_suite(dmax, dmin)
    agree = bool(frame["agrees"].all())
    if not agree:
        bad = frame.loc[~frame["agrees"], "D"].tolist()
        raise InvariantViolation(f"Pell solvers disagree for D in {bad}")
    _emit(ctx, {"command": "verify pell", "dmin": dmin, "dmax": dmax, "count": len(frame),
                "all_agree": agree, "rows": json.loads(frame.to_json(orient="records"))})


@verify.command()
@click.option("--system", "system_text", required=True, help="'odometer:2', 'denjoy:sqrt(5)-2', ...")
@click.option("--clopen", required=True, help="'[0] [1,1]' for odometers, '[0,1)' for Denjoy arcs.")
@click.option("--levels", type=int, default=4, show_default=True)
@click.pass_context
def brown(ctx, system_text, clopen, levels):
    """Homeomorphism X × N ≅ U × N built level by level."""
    system = parse_system(system_text)
    U = parse_clopen(system, clopen)
    phi, stages = brown_homeomorphism(system, U, levels, ctx.obj.settings)
    _emit(ctx, {"command": "verify brown", "system": system.describe(), "clopen": U.describe(),
                "levels": levels, "map": phi.to_dict(),
                "stages": {f"{s},{j}": S.describe() for (s, j), S in sorted(stages.items())}})


@verify.command()
@click.option("--system", "system_text", required=True)
@click.option("--clopen", required=True)
@click.option("--depth", type=int, default=6, show_default=True)
@click.pass_context
def restriction(ctx, system_text, clopen, depth):
    """Transport checks for the restriction to a clopen set."""
    settings = ctx.obj.settings
    system = parse_system(system_text)
    U = parse_clopen(system, clopen)
    result = restrict(system, U, depth, settings)
    value_group = result.value_group
    _emit(ctx, {
        "command": "verify restriction", "system": system.describe(), "clopen": U.describe(), "depth": depth,
        "cover": [list(g) for g in result.cover.elements],
        "test_sets": result.test_sets, "transport_checks": result.transport_checks,
        "value_group": value_group.to_dict(settings.decimal_digits) if isinstance(value_group, Lattice)
        else value_group.to_dict(),
        "first_return": result.first_return.to_dict() if result.first_return is not None else None,
    })


@verify.command()
@click.option("--system", "system_text", required=True)
@click.option("--depth", type=int, default=6, show_default=True)
@click.option("--moves", type=int, default=25, show_default=True)
@click.pass_context
def measure(ctx, system_text, depth, moves):
    """mu(gV) = mu(V) on the atoms of a depth."""
    system = parse_system(system_text)
    checks = measure_invariance(system, depth, moves)
    _emit(ctx, {"command": "verify measure", "system": system.describe(), "depth": depth, "checks": checks})


def _default_candidates(system, settings: Settings) -> List[Any]:
    group = system.fundamental_group(settings)
    if group.kind == "prime_generated":
        return [Fraction(1, p) for p in group.primes]
    return list(group.generators)


@verify.command()
@click.option("--power", type=int, help="Shorthand for --system odometer:<power>.")
@click.option("--system", "system_text")
@click.option("--depth", type=int, default=6, show_default=True)
@click.option("--candidate", "candidates", multiple=True, help="Scale to witness; repeatable.")
@click.pass_context
def scaling(ctx, power, system_text, depth, candidates):
    """Measure-scaling automorphisms against the computed fundamental group."""
    settings = ctx.obj.settings
    if (power is None) == (system_text is None):
        raise click.UsageError("give exactly one of --power and --system")
    system = parse_system(system_text or f"odometer:{power}")
    values = [parse_number(c) for c in candidates] or _default_candidates(system, settings)
    witness_factory = getattr(system, "scaling_witnesses", None)
    witnesses = witness_factory(depth, settings) if witness_factory is not None else []
    checks = scaling_group_check(system, values, witnesses, depth, settings)
    _emit(ctx, {"command": "verify scaling", "system": system.describe(), "depth": depth,
                "group": system.fundamental_group(settings).to_dict(settings.decimal_digits),
                "checks": [c.to_dict(settings.decimal_digits) for c in checks]})


@verify.command()
@click.option("--field", "field_text", required=True, help="Field generator, e.g. '2*cos(2*pi/7)'.")
@click.option("--unit", "units", multiple=True, required=True, help="Candidate unit; repeatable.")
@click.pass_context
def units(ctx, field_text, units):
    """Unit and independence checks in the order Z[a] of the given generator."""
    a = parse_number(field_text)
    if a.field is None:
        raise SpecError(f"{field_text!r} is rational")
    order = order_from_lattice(Lattice.from_generators(a.field, [a ** k for k in range(a.field.degree)]))
    candidates = [parse_number(u, field=a.field) for u in units]
    result = verify_unit_system(order, candidates, ctx.obj.settings)
    if not (result.each_is_unit and result.independent):
        logger.warning(f"units {list(units)}: each_is_unit={result.each_is_unit} independent={result.independent}")
    _emit(ctx, {"command": "verify units", "field": a.field.minpoly_text, "discriminant": order.discriminant,
                "units": list(units), "report": result.to_dict()})


@verify.command()
@click.option("--group", "group_text", required=True, help="Comma separated positive rationals, e.g. '9'.")
@click.pass_context
def realizable(ctx, group_text):
    """Whether a rational group is the positive unit group of some Z[1/N]."""
    ok, primes = ring_realizable(parse_rationals(group_text))
    body = {"command": "verify realizable", "group": group_text, "primes": list(primes), "realizable": ok}
    if ok and primes:
        spec, _ = ring_realization(math.prod(primes), ctx.obj.settings)
        body["odometer"] = f"odometer:{spec.describe()}"
    _emit(ctx, body)


@verify.command()
@click.option("--base", required=True)
@click.option("--depth", type=int, default=6, show_default=True)
@click.pass_context
def conjugacy(ctx, base, depth):
    """The prepend-block map conjugates φ to the first return map of [0^l]."""
    _emit(ctx, {"command": "verify conjugacy", **induced_conjugacy(_odometer_spec(base), depth, ctx.obj.settings)})


@verify.command()
@click.option("--system", "system_text", required=True)
@click.option("-n", "copies", type=int, default=2, show_default=True)
@click.pass_context
def amplify(ctx, system_text, copies):
    """Value group and unit class of the n-fold amplification."""
    system = parse_system(system_text)
    _emit(ctx, {"command": "verify amplify", "system": system.describe(), "n": copies,
                **amplify_invariant(system, copies).to_dict()})


@cli.group()
def describe():
    """Canonical spec text; it parses back to an equal spec."""


@describe.command(name="odometer")
@click.option("--base", required=True)
@click.pass_context
def describe_odometer(ctx, base):
    _emit(ctx, {"command": "describe odometer", "canonical": f"odometer:{_odometer_spec(base).describe()}"})


@describe.command(name="odometer2")
@click.option("--base1", required=True)
@click.option("--base2", required=True)
@click.pass_context
def describe_odometer2(ctx, base1, base2):
    _emit(ctx, {"command": "describe odometer2",
                "canonical": [f"odometer:{_odometer_spec(b).describe()}" for b in (base1, base2)]})


@describe.command(name="denjoy")
@click.option("--theta", required=True)
@click.pass_context
def describe_denjoy(ctx, theta):
    _emit(ctx, {"command": "describe denjoy", "canonical": DenjoySpec((parse_number(theta),)).describe()})


@describe.command(name="denjoy2")
@click.option("--theta1", required=True)
@click.option("--theta2", required=True)
@click.pass_context
def describe_denjoy2(ctx, theta1, theta2):
    spec = DenjoySpec((parse_number(theta1), parse_number(theta2)))
    _emit(ctx, {"command": "describe denjoy2", "canonical": spec.describe()})


@describe.command(name="subgroup")
@click.option("--lattice", "text", required=True)
@click.pass_context
def describe_subgroup(ctx, text):
    _emit(ctx, {"command": "describe subgroup", "canonical": parse_subgroup(text).describe()})


def _error(e: CantorFGError) -> str:
    return dump_json({"schema": SCHEMA, "error": {"type": type(e).__name__, "message": str(e)}})


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cli.main(args=list(argv) if argv is not None else None, prog_name="cantor-fg", standalone_mode=False)
    except click.exceptions.UsageError as e:
        e.show()
        return EXIT_USAGE
    except click.exceptions.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        return EXIT_REJECTED
    except InvariantViolation as e:
        logger.error(f"internal check failed: {e}")
        click.echo(_error(e))
        return EXIT_INVARIANT
    except CantorFGError as e:
        click.echo(_error(e))
        return EXIT_REJECTED
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
