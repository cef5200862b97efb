# Copyright 2024 The FSL Interferometry Authors. All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Command line of the FSL Interferometry engine."""

import functools
import math
from functools import partial
from pathlib import Path
from typing import Any, Callable, List, Optional, Sequence

import click
import numpy as np
from loguru import logger
from pydantic import ValidationError

from fsl_interferometry.closed_forms import reference_phase, reference_terms
from fsl_interferometry.config import settings
from fsl_interferometry.exceptions import ComputationError, ScenarioValidationError
from fsl_interferometry.light_field import (
    envelope,
    figure_preset,
    phase_effective,
)
from fsl_interferometry.logging import configure_logging, time_and_tell
from fsl_interferometry.models import (
    BeamDirection,
    ExceptionSource,
    FringeUnknown,
    LaserBeam,
    MechanismKind,
    OutputFormat,
    PHASE_TERMS,
    ProcessException,
    PulseEnvelope,
    SweepScale,
    SweepSpec,
)
from fsl_interferometry.scenario import (
    apply_param,
    build_scenario,
    format_validation_error,
    load_scenario_file,
)
from fsl_interferometry.services.concurrency_services import run_grid
from fsl_interferometry.services.gravimetry_service import (
    error_budget,
    solve_zero_fringe,
)
from fsl_interferometry.services.oracle_service import (
    check_grid,
    check_light_speeds,
    exact_arm_events,
    exact_phase_difference,
    fit_series,
    rescale_scenario,
)
from fsl_interferometry.services.perturbation_service import total_phase
from fsl_interferometry.trajectory import interaction_delay, propagate_idealized
from fsl_interferometry.utils import (
    csv_text,
    format_table,
    parse_float_list,
    precise_context,
    write_csv,
)

EXIT_COMPUTATION = 1
EXIT_VALIDATION = 2

SWEEP_HEADER = ("param_value",) + PHASE_TERMS + ("total",)
ORACLE_HEADER = ("c_tilde", "exact_phase", "model_phase", "residual")
PHASE_HEADER = ("term", "symbol", "value_rad", "reference_rad")
GRAVIMETRY_HEADER = (
    "mechanism",
    "unknown",
    "root",
    "gamma_numeric",
    "gamma_analytic",
    "accuracy_m_s2",
    "accuracy_microgal",
    "compensated",
    "delta_phi",
    "delta_v0",
    "Gamma",
    "phase_term",
    "velocity_term",
    "delta_g",
)
EVENTS_HEADER = (
    "pulse_index",
    "arm",
    "nominal_time_s",
    "delay_s",
    "exact_time_s",
    "position_m",
)

SYMBOLS = {
    "unperturbed": "φ_un",
    "fsl_clock": "φ_FSL,clock",
    "fsl_doppler": "φ_FSL,Doppler",
    "chirp": "φ_chirp",
    "time_dilation": "φ_TD",
    "ts_clock": "φ_TS,clock",
    "ts_doppler": "φ_TS,Doppler",
    "ts_chirp": "φ_TS,chirp",
    "total": "φ_AI",
}


def _fail(message: str, code: int) -> None:
    click.echo(f"Error: {message}", err=True)
    raise SystemExit(code)


def handle_errors(func: Callable) -> Callable:
    """Map validation failures to exit code 2 and numerical failures to 1."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ValidationError as e:
            _fail(format_validation_error(e), EXIT_VALIDATION)
        except ValueError as e:
            _fail(str(e), EXIT_VALIDATION)
        except ComputationError as e:
            _fail(str(e), EXIT_COMPUTATION)

    return wrapper


def _raise_failures(results: Sequence[Any], label: str) -> None:
    failures = [r for r in results if isinstance(r, ProcessException)]
    if not failures:
        return

    for failure in failures:
        click.echo(f"Error: {label}={failure.value}: {failure.message}", err=True)
    validation = any(f.source is ExceptionSource.validation for f in failures)
    raise SystemExit(EXIT_VALIDATION if validation else EXIT_COMPUTATION)


def _emit(
    header: Sequence[str],
    rows: Sequence[Sequence[Any]],
    output_format: OutputFormat,
    out: Optional[str],
) -> None:
    if out is not None:
        write_csv(header, rows, out)
        logger.info(f"Wrote {len(rows)} rows to {out}")

    if output_format is OutputFormat.csv:
        click.echo(csv_text(header, rows), nl=False)
    else:
        click.echo(format_table(header, rows))


def scenario_option(func: Callable) -> Callable:
    """Add `--scenario`."""
    return click.option(
        "--scenario",
        "scenario_path",
        type=click.Path(dir_okay=False),
        default=None,
        help="Scenario JSON file (default: the configured default scenario).",
    )(func)


def output_options(func: Callable) -> Callable:
    """Add `--out` and `--format`."""
    func = click.option(
        "--format",
        "output_format",
        type=click.Choice([f.value for f in OutputFormat]),
        default=OutputFormat.table.value,
        show_default=True,
        help="Rendering on standard output.",
    )(func)
    return click.option(
        "--out",
        type=click.Path(dir_okay=False, writable=True),
        default=None,
        help="Also write the rows to this CSV file.",
    )(func)


def _load(scenario_path: Optional[str]):
    return load_scenario_file(scenario_path or settings.default_scenario)


@click.group(name="fsl-interferometry", help=settings.description)
@click.version_option(settings.version, prog_name=settings.project_name)
@click.option("--debug/--no-debug", default=None, help="Emit debug records on stderr.")
@click.pass_context
def main(ctx: click.Context, debug: Optional[bool]) -> None:
    """Finite-speed-of-light phases of light-pulse atom interferometers."""
    debug_mode = settings.debug if debug is None else debug
    configure_logging(debug_mode)
    ctx.obj = {"debug": debug_mode}


@main.command()
@scenario_option
@output_options
@click.pass_context
@handle_errors
def phase(
    ctx: click.Context,
    scenario_path: Optional[str],
    output_format: str,
    out: Optional[str],
) -> None:
    """Print the phase breakdown of a scenario."""
    scenario = build_scenario(_load(scenario_path))
    breakdown, _ = time_and_tell(
        lambda: total_phase(scenario), "total_phase", ctx.obj["debug"]
    )

    terms = reference_terms(scenario) or {}
    rows: List[List[Any]] = [
        [name, SYMBOLS[name], getattr(breakdown, name), terms.get(name)]
        for name in PHASE_TERMS
    ]
    rows.append(["total", SYMBOLS["total"], breakdown.total, reference_phase(scenario)])

    _emit(PHASE_HEADER, rows, OutputFormat(output_format), out)


@main.command()
@scenario_option
@output_options
@click.option("--delta-phi", type=float, default=0.0, show_default=True, help="Phase uncertainty in rad.")
@click.option("--delta-v0", type=float, default=0.0, show_default=True, help="Launch velocity spread in m/s.")
@click.option(
    "--unknown",
    type=click.Choice([u.value for u in FringeUnknown]),
    default=FringeUnknown.g.value,
    show_default=True,
    help="Quantity solved for at the zero fringe.",
)
@click.pass_context
@handle_errors
def gravimetry(
    ctx: click.Context,
    scenario_path: Optional[str],
    output_format: str,
    out: Optional[str],
    delta_phi: float,
    delta_v0: float,
    unknown: str,
) -> None:
    """Solve the zero fringe and report the offset and the error budget."""
    scenario = build_scenario(_load(scenario_path))
    report, _ = time_and_tell(
        lambda: solve_zero_fringe(scenario, FringeUnknown(unknown)),
        "solve_zero_fringe",
        ctx.obj["debug"],
    )

    budget = None
    if scenario.mechanism.kind is MechanismKind.spt:
        budget = error_budget(
            scenario,
            delta_phi,
            delta_v0,
            compensated=scenario.compensated,
            Gamma=scenario.compensation_gamma or 0.0,
        )
    else:
        logger.info("Error budgets are only derived for single-photon transitions.")

    row = [
        report.mechanism.value,
        report.unknown.value,
        report.root,
        report.gamma_numeric,
        report.gamma_analytic,
        report.accuracy,
        report.accuracy_microgal,
        report.compensated,
        delta_phi,
        delta_v0,
        budget.Gamma if budget else None,
        budget.phase_term if budget else None,
        budget.velocity_term if budget else None,
        budget.delta_g if budget else None,
    ]
    _emit(GRAVIMETRY_HEADER, [row], OutputFormat(output_format), out)


def _sweep_point(scenario_file, param: str, value: float) -> List[float]:
    breakdown = total_phase(build_scenario(apply_param(scenario_file, param, value)))
    return [value] + [getattr(breakdown, name) for name in PHASE_TERMS] + [breakdown.total]


@main.command()
@scenario_option
@output_options
@click.option("--param", required=True, help="Dotted scenario key, e.g. atom.v0_m_s.")
@click.option("--start", type=float, required=True, help="First grid value.")
@click.option("--stop", type=float, required=True, help="Last grid value.")
@click.option("--count", type=int, default=11, show_default=True, help="Number of grid points.")
@click.option(
    "--scale",
    type=click.Choice([s.value for s in SweepScale]),
    default=SweepScale.linear.value,
    show_default=True,
)
@click.pass_context
@handle_errors
def sweep(
    ctx: click.Context,
    scenario_path: Optional[str],
    output_format: str,
    out: Optional[str],
    param: str,
    start: float,
    stop: float,
    count: int,
    scale: str,
) -> None:
    """Evaluate the phase breakdown over a grid of one scenario key."""
    spec = SweepSpec(param=param, start=start, stop=stop, count=count, scale=scale)
    scenario_file = _load(scenario_path)
    apply_param(scenario_file, param, spec.start)

    results = run_grid(
        partial(_sweep_point, scenario_file, param),
        spec.values(),
        settings.max_workers,
        ctx.obj["debug"],
    )
    _raise_failures(results, param)

    _emit(SWEEP_HEADER, results, OutputFormat(output_format), out)


@main.command()
@scenario_option
@output_options
@click.option(
    "--ctilde",
    default=None,
    help="Comma separated reduced light speeds in m/s (default: ORACLE_C_TILDE).",
)
@click.pass_context
@handle_errors
def oracle(
    ctx: click.Context,
    scenario_path: Optional[str],
    output_format: str,
    out: Optional[str],
    ctilde: Optional[str],
) -> None:
    """Validate the engine against exact propagation at reduced light speeds."""
    scenario = build_scenario(_load(scenario_path))
    values = check_grid(
        parse_float_list(ctilde) if ctilde else settings.oracle_c_tilde
    )
    check_light_speeds(scenario, values)

    phases = run_grid(
        partial(exact_phase_difference, scenario, precise=True),
        values,
        settings.max_workers,
        ctx.obj["debug"],
    )
    _raise_failures(phases, "c_tilde")

    run = fit_series(scenario, values, phases)
    rows = list(
        zip(run.c_tilde_values, run.exact_phases, run.model_phases, run.residuals)
    )
    _emit(ORACLE_HEADER, rows, OutputFormat(output_format), out)

    a0, a1, a2 = run.coefficients
    to_stderr = OutputFormat(output_format) is OutputFormat.csv
    click.echo(
        f"a0={a0!r} a1={a1!r} a2={a2!r} engine_a0={run.engine_a0!r}"
        f" engine_a1={run.engine_a1!r} slope={run.order_slope!r}",
        err=to_stderr,
    )
    for message in run.messages:
        click.echo(message, err=to_stderr)
    click.echo("PASS" if run.passed else "FAIL", err=to_stderr)

    if not run.passed:
        raise SystemExit(EXIT_COMPUTATION)


def _parse_range(text: Optional[str], default: Sequence[float], name: str) -> List[float]:
    if text is None:
        return list(default)

    values = parse_float_list(text)
    if len(values) != 2:
        raise ScenarioValidationError(f"--{name} takes two numbers, got {text!r}.")

    return values


def _events(scenario) -> List[List[Any]]:
    ideal = propagate_idealized(
        scenario.geometry,
        scenario.mechanism,
        scenario.species,
        scenario.initial,
        scenario.g,
        scenario.constants,
    )
    ctx = precise_context(settings.working_precision)
    reduced = rescale_scenario(scenario, scenario.constants.c)

    rows = []
    for arm in (1, 2):
        _, exact = exact_arm_events(reduced, arm, ctx)
        exact_by_time = {float(event.nominal_time): event for event in exact}
        for index, pulse in enumerate(scenario.geometry.pulses):
            if pulse.weight(arm) == 0:
                continue
            event = exact_by_time[pulse.time]
            delay = interaction_delay(ideal[arm - 1], pulse.time, scenario.constants)
            rows.append(
                [index, arm, pulse.time, delay, float(event.time), float(event.position)]
            )

    return rows


@main.command()
@scenario_option
@click.option("--out", type=click.Path(dir_okay=False, writable=True), required=True, help="CSV file of the phase grid.")
@click.option("--z-range", default=None, help="zmin,zmax in m.")
@click.option("--t-range", default=None, help="tmin,tmax in s.")
@click.option("--points", type=int, default=101, show_default=True, help="Grid points per axis.")
@click.option("--sigma-omega", type=float, default=None, help="Envelope bandwidth in rad/s; adds an envelope column.")
@click.option(
    "--preset",
    type=click.Choice(["scenario", "dimensionless"]),
    default="scenario",
    show_default=True,
    help="Field of the scenario file, or the dimensionless chirped field.",
)
@handle_errors
def diagram(
    scenario_path: Optional[str],
    out: str,
    z_range: Optional[str],
    t_range: Optional[str],
    points: int,
    sigma_omega: Optional[float],
    preset: str,
) -> None:
    """Export the effective light phase on a (t, z) grid and the interaction events."""
    if points < 2:
        raise ScenarioValidationError(f"--points must be at least 2, got {points}.")

    if preset == "dimensionless":
        field, consts, g = figure_preset()
        scenario, L = None, 1.0
        defaults_t, defaults_z = (0.0, 100.0), (-50.0, 50.0)
    else:
        scenario_file = _load(scenario_path)
        scenario, L = build_scenario(scenario_file), scenario_file.lasers.L_m
        field, consts, g = scenario.field, scenario.constants, scenario.g
        defaults_t, defaults_z = (0.0, scenario.geometry.total_time), (-1.0, 1.0)

    t_lo, t_hi = _parse_range(t_range, defaults_t, "t-range")
    z_lo, z_hi = _parse_range(z_range, defaults_z, "z-range")
    bounds = [t_lo, t_hi, z_lo, z_hi]
    if not all(math.isfinite(b) for b in bounds) or t_lo >= t_hi or z_lo >= z_hi:
        raise ScenarioValidationError(f"Degenerate diagram grid {bounds}.")

    train = []
    if sigma_omega is not None:
        env = PulseEnvelope(sigma_omega=sigma_omega)
        times = scenario.geometry.times if scenario is not None else [0.0]
        train = [
            LaserBeam.from_frequency(
                BeamDirection.up, consts.c * field.K or 1.0, field.sigma, L, consts,
                t_init=T - L / consts.c,
            )
            for T in times
        ]

    header = ["t_s", "z_m", "phi_eff_rad"] + (["envelope"] if train else [])
    rows = []
    for t in np.linspace(t_lo, t_hi, points):
        for z in np.linspace(z_lo, z_hi, points):
            phi_l, delta_phi = phase_effective(field, g, float(z), float(t), consts)
            row = [float(t), float(z), phi_l + delta_phi]
            if train:
                row.append(
                    math.fsum(
                        envelope(beam, env, float(z), float(t), consts) for beam in train
                    )
                )
            rows.append(row)

    write_csv(header, rows, out)
    click.echo(f"Wrote {len(rows)} grid samples to {out}")

    if scenario is None:
        logger.info("The dimensionless preset has no atoms; no events are written.")
        return

    events_path = Path(out).with_name(f"{Path(out).stem}_events.csv")
    event_rows = _events(scenario)
    write_csv(EVENTS_HEADER, event_rows, events_path)
    click.echo(f"Wrote {len(event_rows)} events to {events_path}")
