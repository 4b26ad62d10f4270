import numpy as np
from rich.table import Table


def _table(*columns):
    table = Table(show_header=True, header_style="bold magenta")
    for column in columns:
        table.add_column(column)
    return table


def pretty_metrics(metrics: dict, tolerance: float | None = None):
    """
    Generates a rich.table.Table object from a compare_fields result
    :param metrics: dict from compare_fields
    :param tolerance: Accepted relative L2 error, marks the row green or red
    :return: rich.table.Table object
    """
    table = _table("Metric", "Value")
    rel_l2 = f"{metrics['rel_l2']:.3e}"
    if tolerance is not None:
        color = "green" if metrics["rel_l2"] <= tolerance else "red"
        rel_l2 = f"[{color}]{rel_l2}[/{color}] (tolerance {tolerance:.1e})"
    table.add_row("relative L2 error", rel_l2)
    table.add_row("max abs error", f"{metrics['max_abs']:.3e}")
    table.add_row("reference L2 norm", f"{metrics['reference_l2']:.3e}")
    table.add_row("compared nodes", str(metrics["nodes"]))
    return table


def pretty_solve_reports(reports):
    """
    Summary of the SolveReports of a reconstruction
    """
    table = _table("Nodes", "Flagged", "min sigma_min", "max residual", "max iterations")
    sigma = [report.sigma_min_estimate for report in reports if np.isfinite(report.sigma_min_estimate)]
    residual = [report.residual for report in reports if np.isfinite(report.residual)]
    flagged = sum(report.condition_flag for report in reports)
    table.add_row(
        str(len(reports)),
        f"[red]{flagged}[/red]" if flagged else "[green]0[/green]",
        f"{min(sigma):.3e}" if sigma else "-",
        f"{max(residual):.2e}" if residual else "-",
        str(max((report.iterations for report in reports), default=0)),
    )
    return table


def pretty_data(data):
    table = _table("k-grid", "Disk radius", "Boundary nodes", "t", "Invalid samples", "max |h|")
    summary = data.serialize()
    table.add_row(f"{data.kgrid.n_per_side}^2 on [-{data.kgrid.extent:g}, {data.kgrid.extent:g}]^2",
                  f"{data.disk.radius:g}", str(data.disk.n_boundary if data.has_boundary_block else 0),
                  f"{data.time:g}", str(summary["invalid_samples"]), f"{data.max_abs():.3e}")
    return table


def pretty_exceptional_scan(scan):
    table = _table("Samples", "tau", "Flagged", "Covering radius", "sigma_min range")
    summary = scan.serialize()
    low, high = summary["sigma_min_range"] or [float("nan"), float("nan")]
    table.add_row(str(summary["samples"]), f"{scan.tau_exc:.3e}", str(len(summary["flagged"])),
                  f"{scan.covering_radius:.3g}", f"{low:.3e} .. {high:.3e}")
    return table


def pretty_blowup_map(blowup_map):
    table = _table("t", "Flagged cells", "Components", "min sigma_min")
    for index, t in enumerate(blowup_map.box.times):
        table.add_row(f"{t:.4g}", str(int(np.sum(blowup_map.flagged[index]))),
                      str(blowup_map.components[index].count), f"{np.min(blowup_map.sigma_min[index]):.3e}")
    return table


def _resolution_text(resolution):
    return "-" if not resolution else f"{resolution['n']} over +-{resolution['extent']:g}"


def pretty_verdicts(verdicts: dict):
    table = _table("Check", "Value", "Tolerance", "Grid", "K-grid", "Verdict")
    for name, verdict in verdicts.items():
        result = "[green]passed[/green]" if verdict["passed"] else "[red]failed[/red]"
        table.add_row(name, f"{verdict['value']:.3e}", f"{verdict['tolerance']:.1e}",
                      _resolution_text(verdict.get("grid")), _resolution_text(verdict.get("kgrid")), result)
    return table
