import json
import logging
import sys
from datetime import datetime

from rich.console import Console
from rich.progress import Progress

from dsii.Dsii import Dsii
from dsii.command_line.ParseArguments import parse_arguments
from dsii.command_line.PrettyReport import (pretty_blowup_map, pretty_data, pretty_exceptional_scan, pretty_metrics,
                                            pretty_solve_reports, pretty_verdicts)
from dsii.lib.Errors import (BlowupDetected, ConfigError, ContourTooSmall, ExceptionalOnBoundary, FormatError,
                             GridError, GridTooSmall, Inconclusive, MissingBoundaryBlock, NearSingular, NoConvergence,
                             OverflowRisk)
from dsii.lib.config.RunConfig import RunConfig
from dsii.lib.grid.ComplexGrid import ComplexField
from dsii.lib.io.DataFormats import write_data, write_manifest
from dsii.lib.io.FieldFormats import read_field, write_field, write_mask
from dsii.lib.tools.Logging import setup_logging
from dsii.lib.validation.RunValidation import make_verdict, validate_run

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VALIDATION = 2
EXIT_SOLVER = 3

INPUT_ERRORS = (ConfigError, FormatError, FileNotFoundError, GridError, OverflowRisk, MissingBoundaryBlock, ValueError)
SOLVER_ERRORS = (NoConvergence, NearSingular, ExceptionalOnBoundary, BlowupDetected, GridTooSmall, ContourTooSmall)


def main(argv=None):
    """
    Entry Point if this script is run as a script instead of a library
    :param argv: Argument list (sys.argv[1:] when None)
    :return: None
    """
    try:
        code = run(argv)
    except KeyboardInterrupt:
        print("\nInterrupted")
        code = EXIT_INPUT

    sys.exit(code)


def load_config(args):
    config = RunConfig.load(args.config) if args.config is not None else RunConfig()
    config = config.with_environment()
    return config.with_overrides(threads=args.threads, io_format=getattr(args, "format", None))


def run(argv=None):
    """
    Run the Console Interface for dsii
    :param argv: Argument list (sys.argv[1:] when None)
    :return: Exit code
    """
    sys.tracebacklimit = 0

    try:
        args = parse_arguments(argv)
    except SystemExit as exit_request:
        # argparse exits with 2 on usage errors, which is reserved for failed validations here
        return EXIT_OK if exit_request.code == 0 else EXIT_INPUT
    except OSError as error:
        Console(stderr=True).print(f"[red]Error:[/red] {error}")
        return EXIT_INPUT

    console = Console()

    if args.debug:
        sys.tracebacklimit = 1000

    setup_logging(args.debug, console)

    try:
        config = load_config(args)
        start_time = datetime.today()
        code = COMMANDS[args.command](Dsii(config), args, console)
    except Inconclusive as error:
        console.print(f"[yellow]Inconclusive:[/yellow] {error}")
        if error.blowup_map is not None and hasattr(args, "output"):
            _write_blowup(error.blowup_map, args, config, console)
        return EXIT_VALIDATION
    except SOLVER_ERRORS as error:
        _report_error(console, error, args.debug)
        return EXIT_SOLVER
    except INPUT_ERRORS as error:
        _report_error(console, error, args.debug)
        return EXIT_INPUT

    console.print(f"\n[green]Finished in {datetime.today() - start_time}[/green]")
    return code


def _report_error(console, error, debug):
    if debug:
        console.print_exception()
    console.print(f"[red]Error:[/red] {type(error).__name__}: {error}")


def _progress_handler(progress, task):
    def handler(current_val, total):
        progress.update(task, total=total, completed=current_val)

    return handler


def _prepare_output(args, config):
    args.output.mkdir(parents=True, exist_ok=True)
    return args.output, config["io.format"]


def _manifest(directory, config, command, **entries):
    write_manifest(directory, command=command, fingerprint=config.fingerprint(), config=config.serialize(),
                   created=datetime.today().isoformat(timespec="seconds"), **entries)


def command_forward(dsii, args, console):
    q = dsii.load_potential(args.potential)
    directory, fmt = _prepare_output(args, dsii.config)
    with Progress(console=console) as progress:
        task = progress.add_task("Computing scattering data...", total=1)
        data = dsii.forward(q, args.amplitude, on_progress_update=_progress_handler(progress, task))
    write_field(directory / f"potential.{fmt}", q, fmt)
    write_data(directory / "data", data, fmt)
    _manifest(directory, dsii.config, "forward", data="data", potential=f"potential.{fmt}", amplitude=args.amplitude)
    console.print(pretty_data(data))
    return EXIT_OK


def command_evolve(dsii, args, console):
    dsii.load_data(args.data)
    data_t = dsii.evolve(args.t)
    directory, fmt = _prepare_output(args, dsii.config)
    write_data(directory / "data", data_t, fmt)
    _manifest(directory, dsii.config, "evolve", data="data", source=str(args.data), t=args.t)
    console.print(pretty_data(data_t))
    return EXIT_OK


def command_invert(dsii, args, console):
    data = dsii.load_data(args.data)
    directory, fmt = _prepare_output(args, dsii.config)
    with Progress(console=console) as progress:
        task = progress.add_task("Reconstructing...", total=1)
        q, phi, reports, mask = dsii.invert(args.t, on_progress_update=_progress_handler(progress, task))
    write_data(directory / "data", data, fmt)
    write_field(directory / f"q.{fmt}", q, fmt)
    write_field(directory / f"phi.{fmt}", phi, fmt)
    write_mask(directory / f"mask.{fmt}", mask, q.grid, fmt)
    (directory / "reports.json").write_text(json.dumps([report.serialize() for report in reports], indent=2))
    _manifest(directory, dsii.config, "invert", data="data", q=f"q.{fmt}", phi=f"phi.{fmt}", mask=f"mask.{fmt}",
              t=args.t, near_singular_nodes=int(mask.sum()))
    console.print(pretty_solve_reports(reports))
    return EXIT_OK


def command_roundtrip(dsii, args, console):
    q = dsii.load_potential(args.potential)
    directory, fmt = _prepare_output(args, dsii.config)
    with Progress(console=console) as progress:
        forward_task = progress.add_task("Computing scattering data...", total=1)
        invert_task = progress.add_task("Reconstructing...", total=1)
        result = dsii.roundtrip(q, args.amplitude,
                                on_forward_progress_update=_progress_handler(progress, forward_task),
                                on_invert_progress_update=_progress_handler(progress, invert_task))
    passed = result.metrics["rel_l2"] <= args.tolerance
    write_field(directory / f"potential.{fmt}", q.with_values(args.amplitude * q.values), fmt)
    write_data(directory / "data", result.data, fmt)
    write_field(directory / f"q.{fmt}", result.q, fmt)
    write_field(directory / f"phi.{fmt}", result.phi, fmt)
    _manifest(directory, dsii.config, "roundtrip", data="data", q=f"q.{fmt}", phi=f"phi.{fmt}",
              potential=f"potential.{fmt}", t=0.0, metrics=result.metrics,
              verdicts={"roundtrip": make_verdict(result.metrics["rel_l2"], args.tolerance, q.grid, result.data.kgrid)})
    console.print(pretty_metrics(result.metrics, args.tolerance))
    console.print(pretty_solve_reports(result.reports))
    return EXIT_OK if passed else EXIT_VALIDATION


def command_scan_exceptional(dsii, args, console):
    q = dsii.load_potential(args.potential)
    directory, _ = _prepare_output(args, dsii.config)
    with Progress(console=console) as progress:
        task = progress.add_task("Scanning for exceptional points...", total=1)
        scan = dsii.scan_exceptional(q, args.amplitude, resolution=args.resolution or dsii.config["kgrid.n"],
                                     on_progress_update=_progress_handler(progress, task))
    (directory / "exceptional.json").write_text(json.dumps(scan.serialize(), indent=2))
    _manifest(directory, dsii.config, "scan-exceptional", amplitude=args.amplitude, scan="exceptional.json")
    console.print(pretty_exceptional_scan(scan))
    return EXIT_OK


def _write_blowup(blowup_map, args, config, console):
    directory, fmt = _prepare_output(args, config)
    for index in range(blowup_map.box.times.size):
        sigma_field = ComplexField(blowup_map.box.z_grid, blowup_map.sigma_min[index])
        write_field(directory / f"sigma_min_{index:03d}.{fmt}", sigma_field, fmt)
    (directory / "blowup.json").write_text(json.dumps(blowup_map.serialize(), indent=2))
    _manifest(directory, config, "scan-blowup", blowup="blowup.json",
              verdicts={"bounded": make_verdict(float(blowup_map.touches_boundary), 0.0, blowup_map.box.z_grid,
                                                config.kgrid())})
    console.print(pretty_blowup_map(blowup_map))


def command_scan_blowup(dsii, args, console):
    q = dsii.load_potential(args.potential)
    blowup_map = dsii.scan_blowup(q, args.t_max, args.n_z, args.n_t, args.z_extent)
    _write_blowup(blowup_map, args, dsii.config, console)
    return EXIT_OK


def command_simulate(dsii, args, console):
    q = dsii.load_potential(args.potential)
    directory, fmt = _prepare_output(args, dsii.config)
    with Progress(console=console) as progress:
        task = progress.add_task("Integrating...", total=1)
        trajectory = dsii.simulate(q.with_values(args.amplitude * q.values), args.t_end, args.dt,
                                   save_every=args.save_every, on_progress_update=_progress_handler(progress, task))
    slices, phi_slices = [], []
    for index, (q_slice, phi_slice) in enumerate(zip(trajectory.q, trajectory.phi)):
        slices.append(write_field(directory / f"q_{index:04d}.{fmt}", q_slice, fmt).name)
        phi_slices.append(write_field(directory / f"phi_{index:04d}.{fmt}", phi_slice, fmt).name)
    _manifest(directory, dsii.config, "simulate", slices=slices, phi_slices=phi_slices, times=trajectory.times,
              amplitude=args.amplitude)
    console.print(f"Stored {len(trajectory)} slices up to t={trajectory.times[-1]:.4g} in {directory}")
    return EXIT_OK


def command_compare(dsii, args, console):
    metrics = dsii.compare(read_field(args.candidate), read_field(args.reference))
    console.print(pretty_metrics(metrics, args.tolerance))
    if args.tolerance is not None and metrics["rel_l2"] > args.tolerance:
        return EXIT_VALIDATION
    return EXIT_OK


def command_validate(dsii, args, console):
    options = {"threads": dsii.config["threads"], "path": dsii.config["forward.path"],
               "phase": dsii.config["forward.phase"], "duality": not args.skip_duality,
               "ist_residual": args.ist_residual,
               "reconstruct_options": {**dsii.config.inverse_options(), "tol": dsii.config["solver.tol"]}}
    verdicts = validate_run(args.run_dir, **options)
    if not verdicts:
        console.print("[yellow]Nothing to validate in this run directory[/yellow]")
        return EXIT_VALIDATION
    console.print(pretty_verdicts(verdicts))
    return EXIT_OK if all(verdict["passed"] for verdict in verdicts.values()) else EXIT_VALIDATION


COMMANDS = {
    "forward": command_forward,
    "evolve": command_evolve,
    "invert": command_invert,
    "roundtrip": command_roundtrip,
    "scan-exceptional": command_scan_exceptional,
    "scan-blowup": command_scan_blowup,
    "simulate": command_simulate,
    "compare": command_compare,
    "validate": command_validate,
}
