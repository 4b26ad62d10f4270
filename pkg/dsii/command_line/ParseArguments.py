import argparse
from pathlib import Path


def convert_to_path(should_exist=True, should_parents_exist=True):
    """
    Sets options for the nested class
    :param should_exist: If the file needs to exists
    :param should_parents_exist: If the files parents need to exist
    :return: Nested Handle Function
    """

    def handle(s):
        """
        Checks whether the string s fulfils the options set earlier
        :param s: Input string
        :return: Path Object or None
        """
        path = Path(s).absolute()
        if not path.exists() and should_exist:
            raise FileNotFoundError("File does not exist")

        if not path.parent.exists() and should_parents_exist:
            raise IOError("Parent directory not found")

        return path

    return handle


def number_bigger_than_zero(s):
    """
    Returns the Number representation of s if it is bigger than zero, else an error occurs
    :param s: Input string
    :return: Integer or None
    """
    i = int(s)

    if i <= 0:
        raise ValueError("Value must be larger than 0")

    return i


def positive_float(s):
    value = float(s)

    if value <= 0:
        raise ValueError("Value must be larger than 0")

    return value


def amplitude(s):
    value = float(s)

    if not 0 < value <= 1:
        raise ValueError("Amplitude must lie in (0, 1]")

    return value


def _add_common_arguments(parser, writes_output=True):
    parser.add_argument("-c", "--config", type=convert_to_path(should_exist=True), default=None,
                        help="Path to a key = value run configuration")
    parser.add_argument("-t", "--threads", type=number_bigger_than_zero, default=None,
                        help="Number of worker threads (overrides the config and DSII_THREADS)")
    parser.add_argument("-d", "--debug", action="store_true",
                        help="Enable debug logging and full tracebacks")
    if writes_output:
        parser.add_argument("-o", "--output", type=convert_to_path(should_exist=False, should_parents_exist=True),
                            default=Path("dsii_run").absolute(), help="Output directory")
        parser.add_argument("-f", "--format", choices=["cfld", "csv"], default=None,
                            help="Field file format (overrides io.format)")


def parse_arguments(argv=None):
    """
    Parses console arguments for the dsii Console Interface
    :param argv: Argument list (sys.argv[1:] when None)
    :return: Namespace of Console Line Arguments
    """
    parser = argparse.ArgumentParser(
        prog="dsii",
        description="Inverse scattering transform solver for the focusing Davey-Stewartson II system",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_parser(name, help_text, writes_output=True):
        sub = subparsers.add_parser(name, help=help_text, description=help_text,
                                    formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        _add_common_arguments(sub, writes_output)
        return sub

    forward = add_parser("forward", "Compute the scattering data of a potential")
    forward.add_argument("potential", type=convert_to_path(should_exist=True), help="Potential field file")
    forward.add_argument("-a", "--amplitude", type=amplitude, default=1.0, help="Amplitude a the potential is scaled by")

    evolve = add_parser("evolve", "Evolve scattering data to a time t")
    evolve.add_argument("data", type=convert_to_path(should_exist=True), help="Scattering data directory")
    evolve.add_argument("--t", type=float, required=True, help="Target time")

    invert = add_parser("invert", "Reconstruct q and phi from scattering data at a time t")
    invert.add_argument("data", type=convert_to_path(should_exist=True), help="Scattering data directory")
    invert.add_argument("--t", type=float, required=True, help="Time")

    roundtrip = add_parser("roundtrip", "Forward transform followed by reconstruction at t = 0")
    roundtrip.add_argument("potential", type=convert_to_path(should_exist=True), help="Potential field file")
    roundtrip.add_argument("-a", "--amplitude", type=amplitude, default=1.0, help="Amplitude a")
    roundtrip.add_argument("--tolerance", type=positive_float, default=5e-3,
                           help="Largest accepted relative L2 error")

    scan_exceptional = add_parser("scan-exceptional", "Scan the k-plane for exceptional points")
    scan_exceptional.add_argument("potential", type=convert_to_path(should_exist=True), help="Potential field file")
    scan_exceptional.add_argument("-a", "--amplitude", type=amplitude, default=1.0, help="Amplitude a")
    scan_exceptional.add_argument("-r", "--resolution", type=number_bigger_than_zero, default=None,
                                  help="Samples per side (default kgrid.n)")

    scan_blowup = add_parser("scan-blowup", "Map near-singular points of I+T over a space-time box")
    scan_blowup.add_argument("potential", type=convert_to_path(should_exist=True), help="Potential field file")
    scan_blowup.add_argument("--t-max", type=positive_float, required=True, help="Largest scanned time")
    scan_blowup.add_argument("--n-z", type=number_bigger_than_zero, default=16, help="Cells per side")
    scan_blowup.add_argument("--n-t", type=number_bigger_than_zero, default=5, help="Time slices")
    scan_blowup.add_argument("--z-extent", type=positive_float, default=None,
                             help="Half width of the box (default grid.extent)")

    simulate = add_parser("simulate", "Integrate the system directly with the split-step oracle")
    simulate.add_argument("potential", type=convert_to_path(should_exist=True), help="Potential field file")
    simulate.add_argument("--t-end", type=positive_float, required=True, help="Final time")
    simulate.add_argument("--dt", type=positive_float, required=True, help="Time step")
    simulate.add_argument("-a", "--amplitude", type=amplitude, default=1.0, help="Amplitude a")
    simulate.add_argument("--save-every", type=number_bigger_than_zero, default=1, help="Store every n-th step")

    compare = add_parser("compare", "Compare two fields", writes_output=False)
    compare.add_argument("candidate", type=convert_to_path(should_exist=True), help="Field to check (e.g. IST output)")
    compare.add_argument("reference", type=convert_to_path(should_exist=True), help="Reference field (e.g. oracle)")
    compare.add_argument("--tolerance", type=positive_float, default=None,
                         help="Largest accepted relative L2 error (exit 2 above it)")

    validate = add_parser("validate", "Re-run the property checks on a run directory", writes_output=False)
    validate.add_argument("run_dir", type=convert_to_path(should_exist=True), help="Run directory with manifest.json")
    validate.add_argument("--skip-duality", action="store_true", help="Skip the (expensive) duality check")
    validate.add_argument("--ist-residual", action="store_true",
                          help="Reconstruct at t - 1e-3, t, t + 1e-3 and check the PDE residual (invert runs)")

    return parser.parse_args(argv)
