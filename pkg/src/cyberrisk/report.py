"""Report serialization: table, CSV and JSON views of a RiskReport.

All three views list metrics as rows and risk levels as columns, in the
fixed row order E(P1), Prob(Shortfall), E(Shortfall), VAR(rho)...,
CTE(rho)..., margin ratios, premium pool. Monetary figures serialize as
decimal strings with exactly six fraction digits so reports diff cleanly
across platforms; probabilities and ratios serialize as shortest
round-trip floats. Output is locale-independent ('.' decimal separator,
no thousands grouping outside the human table view) and never includes
wall-clock timing, so identical specs give identical bytes.
"""

from __future__ import annotations

import csv
import io
import json

from .engine import LevelReport, RiskReport

__all__ = ["render_json", "render_csv", "render_table", "report_rows", "REPORT_VERSION"]

REPORT_VERSION = 1


def _money(value: float) -> str:
    return f"{value:.6f}"


def _ratio(value: float) -> float:
    return float(value)


def _level_payload(item: LevelReport) -> dict:
    metrics = item.metrics
    payload = {
        "level": item.level.name.lower(),
        "label": item.level.label,
        "intensity_multiplier": item.intensity_multiplier,
        "mitigation": item.mitigation,
        "expected_present_loss": _money(item.expected_present_loss),
        "expected_loss": _money(metrics.expected_loss),
        "premium_pool": _money(item.premium_pool),
        "shortfall_probability": _ratio(metrics.shortfall_probability),
        "expected_shortfall": _money(metrics.expected_shortfall),
        "var": {repr(rho): _money(metrics.var[rho]) for rho in sorted(metrics.var)},
        "cte": {repr(rho): _money(metrics.cte[rho]) for rho in sorted(metrics.cte)},
        "margin_ratio": {
            "var": {repr(rho): _ratio(metrics.margin_ratio[("var", rho)])
                    for rho in sorted(metrics.var) if ("var", rho) in metrics.margin_ratio},
            "cte": {repr(rho): _ratio(metrics.margin_ratio[("cte", rho)])
                    for rho in sorted(metrics.cte) if ("cte", rho) in metrics.margin_ratio},
        },
        "cap_events": item.cap_events,
    }
    return payload


def render_json(report: RiskReport) -> str:
    """Canonical JSON view; a pure function of the spec and seed."""
    document = {
        "report_version": REPORT_VERSION,
        "provenance": {
            "seed": report.seed,
            "repetitions": report.repetitions,
            "portfolio_size": report.portfolio_size,
            "confidence_levels": list(report.confidence_levels),
            "engine_version": report.engine_version,
            "stream_format_version": report.stream_format_version,
            "draw_layout_version": report.draw_layout_version,
            "baseline_expected_device_loss": _money(report.baseline_expected_device_loss),
            "config": report.spec_echo,
        },
        "levels": [_level_payload(item) for item in report.levels],
    }
    return json.dumps(document, indent=2) + "\n"


def report_rows(report: RiskReport, formatted: bool = False):
    """(metric name, [cell per level]) rows in the fixed report order.

    With ``formatted`` the cells carry human formatting (thousands
    grouping, percent signs); otherwise they are the machine-stable
    strings used by the CSV view.
    """
    rows = []
    levels = report.levels
    rhos = sorted(report.confidence_levels)

    def money(value):
        return f"{value:,.1f}" if formatted else _money(value)

    def prob(value):
        return f"{100.0 * value:.3f}%" if formatted else repr(float(value))

    def ratio_cell(metrics, key):
        if key not in metrics.margin_ratio:
            return ""
        value = metrics.margin_ratio[key]
        return f"{value:.4f}" if formatted else repr(float(value))

    rows.append(("E(P1)", [money(it.expected_present_loss) for it in levels]))
    rows.append(("Prob(Shortfall)", [prob(it.metrics.shortfall_probability) for it in levels]))
    rows.append(("E(Shortfall)", [money(it.metrics.expected_shortfall) for it in levels]))
    for rho in rhos:
        rows.append((f"VAR({_rho_text(rho)})", [money(it.metrics.var[rho]) for it in levels]))
    for rho in rhos:
        rows.append((f"CTE({_rho_text(rho)})", [money(it.metrics.cte[rho]) for it in levels]))
    for rho in rhos:
        rows.append((f"Margin VAR({_rho_text(rho)})",
                     [ratio_cell(it.metrics, ("var", rho)) for it in levels]))
    for rho in rhos:
        rows.append((f"Margin CTE({_rho_text(rho)})",
                     [ratio_cell(it.metrics, ("cte", rho)) for it in levels]))
    rows.append(("Premium pool", [money(it.premium_pool) for it in levels]))
    return rows


def _rho_text(rho: float) -> str:
    """.90-style confidence labels: .90, .95, .99, .975."""
    text = f"{rho:.10g}"
    if text.startswith("0."):
        frac = text[2:]
        if len(frac) == 1:
            frac += "0"
        return "." + frac
    return text


def render_csv(report: RiskReport) -> str:
    """CSV view: provenance in leading comment lines, then metric rows."""
    buffer = io.StringIO()
    buffer.write(f"# report_version={REPORT_VERSION}\n")
    buffer.write(f"# seed={report.seed}\n")
    buffer.write(f"# repetitions={report.repetitions}\n")
    buffer.write(f"# portfolio_size={report.portfolio_size}\n")
    buffer.write(f"# engine_version={report.engine_version}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["metric"] + [item.level.label for item in report.levels])
    for name, cells in report_rows(report, formatted=False):
        writer.writerow([name] + cells)
    return buffer.getvalue()


def render_table(report: RiskReport) -> str:
    """Human table view (thousands grouping allowed here)."""
    headers = ["Risk calculation metrics"] + [item.level.label for item in report.levels]
    body = report_rows(report, formatted=True)
    widths = [len(h) for h in headers]
    for name, cells in body:
        widths[0] = max(widths[0], len(name))
        for i, cell in enumerate(cells, start=1):
            widths[i] = max(widths[i], len(cell))

    def fmt_row(first, cells):
        parts = [first.ljust(widths[0])]
        parts += [cell.rjust(widths[i + 1]) for i, cell in enumerate(cells)]
        return "  ".join(parts)

    lines = [
        fmt_row(headers[0], headers[1:]),
        "-" * (sum(widths) + 2 * len(widths) - 2),
    ]
    for name, cells in body:
        lines.append(fmt_row(name, cells))
    lines.append("")
    lines.append(f"seed={report.seed}  repetitions={report.repetitions:,}  "
                 f"portfolio={report.portfolio_size:,}  engine={report.engine_version}")
    return "\n".join(lines) + "\n"
