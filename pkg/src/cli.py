"""Command-line front end: ``python -m src.cli <command>``.

Exit codes: 0 on success, 1 when certification is exhausted or an axiom
check fails, 2 on malformed input (click's usage-error code).
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import click

from .approx_engine import (
    BoostSpec,
    OrthogonalSpec,
    PlanarRotation,
    PoincareSpec,
    approx_boost,
    approx_orthogonal,
    approx_poincare,
    observer_with_velocity,
)
from .axiom_harness import AXIOMS, HarnessConfig, run_suite, verify_thexp_witness, witness_axthexp_minus
from .errors import SearchExhaustedError, SpecRelError
from .exact_core import format_fraction, format_fractions, parse_fraction, parse_fraction_list
from .minkowski_linalg import SpacetimeVec
from .rational_sphere import nearest_rational_direction
from .specrel_model import Model, default_model, load_scenario
from .utils import AppConfig, load_yaml, setup_logging

logger = logging.getLogger(__name__)


class FractionType(click.ParamType):
    name = "p/q"

    def __init__(self, positive: bool = False) -> None:
        self.positive = positive

    def convert(self, value, param, ctx):
        try:
            result = parse_fraction(value)
        except SpecRelError as exc:
            self.fail(str(exc), param, ctx)
        if self.positive and result <= 0:
            self.fail(f"{value!r} must be positive", param, ctx)
        return result


class FractionListType(click.ParamType):
    name = "p/q,..."

    def convert(self, value, param, ctx):
        try:
            return parse_fraction_list(value)
        except SpecRelError as exc:
            self.fail(str(exc), param, ctx)


class PlaneType(click.ParamType):
    name = "i,j"

    def convert(self, value, param, ctx):
        parts = [p.strip() for p in str(value).split(",")]
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            self.fail(f"Expected two axis numbers like 1,2, got {value!r}", param, ctx)
        return int(parts[0]), int(parts[1])


FRACTION = FractionType()
EPS = FractionType(positive=True)
FRACTIONS = FractionListType()
PLANE = PlaneType()


def _guard(flag: str, fn: Callable[..., Any], *args: Any, **kwargs: Any) -> Any:
    """Run ``fn``; domain and usage errors become a usage error naming ``flag``."""

    try:
        return fn(*args, **kwargs)
    except SearchExhaustedError as exc:
        click.echo(f"Error: {exc}", err=True)
        click.get_current_context().exit(1)
    except SpecRelError as exc:
        raise click.BadParameter(str(exc), param_hint=f"'{flag}'") from exc


def _emit(ctx: click.Context, document: Dict[str, Any], lines: Sequence[str]) -> None:
    if ctx.obj["output"] == "json":
        click.echo(json.dumps(document, indent=2, sort_keys=True))
    else:
        for line in lines:
            click.echo(line)


def _matrix_lines(rows: Sequence[Sequence[str]]) -> List[str]:
    return ["  [" + ", ".join(row) + "]" for row in rows]


@click.group()
@click.option("--output", type=click.Choice(["human", "json"]), envvar="SPECREL_OUTPUT", default=None,
              help="Output mode (default from settings; env SPECREL_OUTPUT).")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
              help="Settings file (YAML or JSON).")
@click.option("--log-level", default=None, help="Override the configured log level.")
@click.pass_context
def cli(ctx: click.Context, output: Optional[str], config_path: Optional[Path], log_level: Optional[str]) -> None:
    """Certified rational approximations and the rational SpecRel model."""

    config = AppConfig.load(config_path)
    setup_logging(config.settings, log_level)
    ctx.obj = {"config": config, "output": output or config.default_output()}


def _dim(ctx: click.Context, dim: Optional[int]) -> int:
    return dim if dim is not None else ctx.obj["config"].default_dim()


def _max_bits(ctx: click.Context) -> int:
    return ctx.obj["config"].max_denominator_bits()


@cli.command()
@click.option("--target", type=FRACTIONS, required=True, help="Target direction, e.g. 1,1.")
@click.option("--eps", type=EPS, required=True)
@click.pass_context
def sphere(ctx: click.Context, target, eps) -> None:
    """Rational unit vector close to the direction of TARGET."""

    point = _guard("--target", nearest_rational_direction, target, eps, _max_bits(ctx))
    document = {
        "command": "sphere",
        "inputs": {"target": format_fractions(target), "eps": format_fraction(eps)},
        "point": point.to_list(),
    }
    _emit(ctx, document, [f"point: ({', '.join(point.to_list())})"])


@cli.command()
@click.option("--speed", type=FRACTION, required=True)
@click.option("--eps", type=EPS, required=True)
@click.option("--dim", type=click.IntRange(min=2), default=None)
@click.pass_context
def boost(ctx: click.Context, speed, eps, dim) -> None:
    """Rational boost approximating B_v."""

    spec = _guard("--speed", BoostSpec, speed)
    d = _dim(ctx, dim)
    result, cert = _guard("--speed", approx_boost, spec, eps, d, _max_bits(ctx))
    document = {
        "command": "boost",
        "inputs": {"speed": format_fraction(speed), "eps": format_fraction(eps), "dim": d},
        "speed": result.to_dict(),
        "certificate": cert.to_dict(),
    }
    lines = [f"w = {format_fraction(result.w)}", "matrix:"] + _matrix_lines(cert.output.to_json())
    lines.append(f"error bound: {format_fraction(cert.error_bound)}")
    _emit(ctx, document, lines)


def _orthogonal_spec(planes, towards, flips: Sequence[int], n: int) -> OrthogonalSpec:
    if len(planes) != len(towards):
        raise click.BadParameter("each --plane needs a matching --toward", param_hint="'--toward'")
    rotations = []
    for plane, toward in zip(planes, towards):
        if len(toward) != 2:
            raise click.BadParameter(f"expected two fractions, got {len(toward)}", param_hint="'--toward'")
        rotations.append(_guard("--toward", PlanarRotation, plane, tuple(toward)))
    mask = None
    if flips:
        if any(axis < 1 or axis > n for axis in flips):
            raise click.BadParameter(f"axes must lie in 1..{n}", param_hint="'--flip'")
        mask = tuple(axis in flips for axis in range(1, n + 1))
    spec = OrthogonalSpec(tuple(rotations), mask)
    _guard("--plane", spec.validate, n)
    return spec


@cli.command()
@click.option("--plane", type=PLANE, multiple=True, help="Rotation plane i,j (1-based spatial axes).")
@click.option("--toward", type=FRACTIONS, multiple=True, help="Direction a,b that axis i rotates toward.")
@click.option("--flip", type=int, multiple=True, help="Spatial axis to reflect.")
@click.option("--eps", type=EPS, required=True)
@click.option("--dim", type=click.IntRange(min=1), default=None, help="Size of the orthogonal matrix.")
@click.pass_context
def ortho(ctx: click.Context, plane, toward, flip, eps, dim) -> None:
    """Exactly orthogonal rational matrix near a product of planar rotations."""

    n = dim if dim is not None else _dim(ctx, None) - 1
    spec = _orthogonal_spec(plane, toward, flip, n)
    matrix, cert = _guard("--toward", approx_orthogonal, spec, eps, n, _max_bits(ctx))
    document = {
        "command": "ortho",
        "inputs": {"eps": format_fraction(eps), "dim": n},
        "certificate": cert.to_dict(),
    }
    lines = ["matrix:"] + _matrix_lines(matrix.to_json()) + [f"error bound: {format_fraction(cert.error_bound)}"]
    _emit(ctx, document, lines)


@cli.command()
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
              help="JSON/YAML factored target (overrides the flags).")
@click.option("--translation", type=FRACTIONS, default=None)
@click.option("--speed", type=FRACTION, default=None)
@click.option("--plane", type=PLANE, default=None, help="Plane of the boost-direction rotation.")
@click.option("--toward", type=FRACTIONS, default=None, help="Boost direction within --plane.")
@click.option("--eps", type=EPS, required=True)
@click.option("--dim", type=click.IntRange(min=2), default=None)
@click.pass_context
def poincare(ctx: click.Context, spec_path, translation, speed, plane, toward, eps, dim) -> None:
    """Rational Poincare map near post . B_v . pre + translation."""

    if spec_path is not None:
        spec = _guard("--spec", PoincareSpec.from_dict, load_yaml(spec_path))
        d = spec.translation.dim
    else:
        if speed is None:
            raise click.BadParameter("required unless --spec is given", param_hint="'--speed'")
        d = len(translation) if translation else _dim(ctx, dim)
        origin = _guard("--translation", SpacetimeVec, tuple(translation) if translation else (0,) * d)
        if plane is not None or toward is not None:
            if plane is None or toward is None or len(toward) != 2:
                raise click.BadParameter("needs --plane i,j and --toward a,b together", param_hint="'--toward'")
            spec = _guard("--toward", PoincareSpec.boost_toward, origin, speed, plane, tuple(toward))
        else:
            spec = PoincareSpec(origin, _guard("--speed", BoostSpec, speed))
    if dim is not None and dim != d:
        raise click.BadParameter(f"translation has dimension {d}", param_hint="'--dim'")
    mapping, cert = _guard("--spec" if spec_path else "--speed", approx_poincare, spec, eps, d, _max_bits(ctx))
    document = {
        "command": "poincare",
        "inputs": {"eps": format_fraction(eps), "dim": d},
        "map": mapping.to_dict(),
        "certificate": cert.to_dict(),
    }
    lines = ["matrix:"] + _matrix_lines(mapping.matrix.to_json())
    lines += [f"translation: ({', '.join(mapping.translation.to_list())})", f"error bound: {format_fraction(cert.error_bound)}"]
    _emit(ctx, document, lines)


def _velocity_dim(velocity, dim: Optional[int]) -> int:
    d = len(velocity) + 1
    if dim is not None and dim != d:
        raise click.BadParameter(f"velocity has {len(velocity)} components, expected {dim - 1}", param_hint="'--velocity'")
    return d


@cli.command()
@click.option("--velocity", type=FRACTIONS, required=True)
@click.option("--eps", type=EPS, required=True)
@click.option("--dim", type=click.IntRange(min=2), default=None)
@click.pass_context
def observer(ctx: click.Context, velocity, eps, dim) -> None:
    """Rational observer moving with velocity within EPS of VELOCITY."""

    d = _velocity_dim(velocity, dim)
    mapping, achieved, cert = _guard("--velocity", observer_with_velocity, velocity, eps, d, _max_bits(ctx))
    document = {
        "command": "observer",
        "inputs": {"velocity": format_fractions(velocity), "eps": format_fraction(eps), "dim": d},
        "achieved_velocity": format_fractions(achieved),
        "map": mapping.to_dict(),
        "certificate": cert.to_dict(),
    }
    lines = [f"achieved velocity: ({', '.join(format_fractions(achieved))})", "matrix:"]
    lines += _matrix_lines(mapping.matrix.to_json()) + [f"error bound: {format_fraction(cert.error_bound)}"]
    _emit(ctx, document, lines)


def _model(ctx: click.Context, scenario: Optional[Path], d: int) -> Model:
    if scenario is None:
        return default_model(d)
    return _guard("--scenario", load_scenario, scenario)


@cli.command()
@click.option("--velocity", type=FRACTIONS, required=True)
@click.option("--eps", type=EPS, required=True)
@click.option("--observer", "observer_name", default="Id", show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=None)
@click.option("--scenario", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.pass_context
def witness(ctx: click.Context, velocity, eps, observer_name, seed, scenario) -> None:
    """AxThExp- witness: an observer seen by OBSERVER moving with about VELOCITY."""

    harness = HarnessConfig.from_settings(ctx.obj["config"].settings)
    seed = harness.seed if seed is None else seed
    model = _model(ctx, scenario, len(velocity) + 1)
    if model.dimension != len(velocity) + 1:
        raise click.BadParameter(f"expected {model.dimension - 1} components", param_hint="'--velocity'")
    m = _guard("--observer", model.body, observer_name)
    if not m.is_observer:
        raise click.BadParameter(f"{observer_name!r} is a photon", param_hint="'--observer'")
    result = _guard("--velocity", witness_axthexp_minus, model, m, velocity, eps, seed, harness.coordinate_bits, harness.max_bits)
    violation = verify_thexp_witness(model, m, result, velocity, eps)
    document = {
        "command": "witness",
        "inputs": {"velocity": format_fractions(velocity), "eps": format_fraction(eps), "observer": observer_name, "seed": seed},
        "witness": result.to_dict(),
        "verified": violation is None,
    }
    lines = [
        f"x = ({', '.join(result.x.to_list())})",
        f"y = ({', '.join(result.y.to_list())})",
        f"w = ({', '.join(format_fractions(result.velocity))})",
        f"verified: {'yes' if violation is None else violation}",
    ]
    _emit(ctx, document, lines)
    if violation is not None:
        ctx.exit(1)


@cli.group()
def model() -> None:
    """Rational SpecRel model commands."""


@model.command("check")
@click.option("--scenario", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--samples", type=click.IntRange(min=1), default=None, help="Samples per axiom (default from settings).")
@click.option("--seed", type=click.IntRange(min=0), default=None)
@click.option("--axiom", "axioms", type=click.Choice(list(AXIOMS)), multiple=True)
@click.option("--dim", type=click.IntRange(min=2), default=None, help="Dimension of the built-in scenario.")
@click.pass_context
def check(ctx: click.Context, scenario, samples, seed, axioms, dim) -> None:
    """Run the axiom checkers against a scenario (built-in default if omitted)."""

    config = ctx.obj["config"]
    spec_model = _model(ctx, scenario, _dim(ctx, dim))
    harness = HarnessConfig.from_settings(config.settings).with_overrides(seed, samples, axioms)
    reports = _guard("--axiom", run_suite, spec_model, harness)
    document = {
        "command": "model check",
        "inputs": {"dimension": spec_model.dimension, "seed": harness.seed, "scenario": str(scenario) if scenario else None},
        "reports": [r.to_dict() for r in reports],
        "passed": all(r.passed for r in reports),
    }
    lines = []
    for report in reports:
        extra = f" c={format_fraction(report.light_speed)}" if report.light_speed is not None else ""
        lines.append(f"{report.axiom:<9} {report.status:<4} samples={report.samples}{extra}")
        if report.witness is not None:
            lines.append(f"  witness: {json.dumps(report.witness, sort_keys=True)}")
    _emit(ctx, document, lines)
    if not document["passed"]:
        ctx.exit(1)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line and return its exit code instead of exiting."""

    try:
        cli.main(args=list(argv) if argv is not None else None, prog_name="specrel")
    except SystemExit as exc:
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else 1
    return 0


def main(argv: Optional[Sequence[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
