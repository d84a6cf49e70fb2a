import io
from typing import List

from rich.console import Console, Group
from rich.table import Table
from rich.text import Text

from models.report_models import DiagnosticValue, InferenceReport

VERSION = "0.1.0"


class ReportFormat:
    @staticmethod
    def value(v: DiagnosticValue) -> str:
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, float):
            return repr(v)
        if isinstance(v, list):
            return " ".join(repr(float(x)) for x in v)
        if v is None:
            return "none"
        return " ".join(str(v).split())

    @staticmethod
    def to_records(report: InferenceReport) -> str:
        """One key=value per line; the first line is the version header."""
        lines: List[str] = [f"recognet_version={VERSION}", f"structure={report.structure}"]
        for node_id, state in report.evidence.items():
            lines.append(f"evidence.{node_id}={state}")
        for run in report.runs:
            lines.append(f"solver={run.solver}")
            for node_id, belief in run.beliefs.items():
                lines.append(f"belief.{run.solver}.{node_id}={ReportFormat.value(belief)}")
            for key, value in run.diagnostics.items():
                lines.append(f"diagnostic.{run.solver}.{key}={ReportFormat.value(value)}")
            for check in run.expectations:
                lines.append(f"expect.{run.solver}.{check.node}={check.status}")
        for row in report.divergence or []:
            lines.append(f"divergence.{row.solver_a}.{row.solver_b}.{row.node}={repr(row.l1)}")
        for note in report.notes:
            lines.append(f"note={ReportFormat.value(note)}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def to_text(report: InferenceReport, width: int = 120) -> str:
        console = Console(width=width, record=True, file=io.StringIO(), color_system=None)
        console.print(ReportFormat._renderable(report))
        return console.export_text()

    @staticmethod
    def _renderable(report: InferenceReport) -> Group:
        parts = [Text(f"structure: {report.structure}")]
        if report.evidence:
            parts.append(Text("evidence: " + ", ".join(f"{k}={v}" for k, v in report.evidence.items())))
        for run in report.runs:
            beliefs = Table(title=f"{run.solver} beliefs", title_justify="left")
            beliefs.add_column("node")
            beliefs.add_column("belief")
            for node_id, belief in run.beliefs.items():
                beliefs.add_row(node_id, "(" + ", ".join(f"{b:.4f}" for b in belief) + ")")
            parts.append(beliefs)
            if run.diagnostics:
                diag = Table(title=f"{run.solver} diagnostics", title_justify="left")
                diag.add_column("key")
                diag.add_column("value")
                for key, value in run.diagnostics.items():
                    diag.add_row(key, ReportFormat.value(value))
                parts.append(diag)
            for check in run.expectations:
                parts.append(Text(f"expect {run.solver} {check.node}: {check.status}"))
        if report.divergence:
            div = Table(title="divergence (L1)", title_justify="left")
            for col in ("node", "solver a", "solver b", "L1"):
                div.add_column(col)
            for row in report.divergence:
                div.add_row(row.node, row.solver_a, row.solver_b, f"{row.l1:.3e}")
            parts.append(div)
        for note in report.notes:
            parts.append(Text(f"note: {note}"))
        return Group(*parts)

