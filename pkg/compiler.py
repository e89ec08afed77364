"""
Report Compiler module for the Lagrangian product toolkit.
Writes run reports as JSON, plain text and PDF.
"""

import json
import math
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from reportlab.lib.colors import HexColor
from reportlab.lib.enums import TA_CENTER
from reportlab.lib.pagesizes import letter
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import inch
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from config import Config

SIGNIFICANT_DIGITS = 17


# ==========================================================================
# JSON WITH FIXED PRECISION
# ==========================================================================

def _number(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return format(x, f".{SIGNIFICANT_DIGITS}g")


def to_json(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """Serialize with sorted keys and every float at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(obj[k], indent, _level + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = [f"{pad}{to_json(v, indent, _level + 1)}" for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _number(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return to_json([obj.real, obj.imag], indent, _level)
    return json.dumps(str(obj))


class ReportCompiler:
    """Writes a run report to the requested formats."""

    WIDTH = 72

    def __init__(self, output_dir: Optional[Path] = None):
        self.output_dir = Path(output_dir) if output_dir else Config.OUTPUT_DIR
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def default_path(self, report: Dict[str, Any], fmt: str) -> Path:
        name = report.get("config", {}).get("name", "run")
        safe = "".join(c for c in str(name) if c.isalnum() or c in "-_").strip() or "run"
        return self.output_dir / f"{report.get('command', 'run')}_{safe}.{fmt}"

    @staticmethod
    def run_date(report: Dict[str, Any]) -> str:
        """Date the run started, read from the report so reruns render identically."""
        started = (report.get("timing") or {}).get("started")
        if not started:
            return "an unrecorded date"
        try:
            return datetime.fromisoformat(started).strftime("%B %d, %Y")
        except ValueError:
            return str(started)

    # ==========================================================================
    # JSON
    # ==========================================================================

    def compile_to_json(self, report: Dict[str, Any], path: Optional[Path] = None) -> str:
        filepath = Path(path) if path else self.default_path(report, "json")
        filepath.parent.mkdir(parents=True, exist_ok=True)
        with open(filepath, "w", encoding="utf-8") as f:
            f.write(to_json(report) + "\n")
        return str(filepath)

    # ==========================================================================
    # TXT
    # ==========================================================================

    def render_text(self, report: Dict[str, Any]) -> str:
        width = self.WIDTH
        lines = [
            "=" * width,
            f"{report.get('command', '').upper()} REPORT".center(width),
            "=" * width,
            "",
            f"Construction: {report.get('config', {}).get('construction', {}).get('kind', '?')}",
            f"Verdict:      {report.get('verdict', '?')}",
            f"Version:      {report.get('artifact_version', '?')}",
            "",
            "-" * width,
            "CHECKS".center(width),
            "-" * width,
        ]
        for check in report.get("checks", []):
            mark = "PASS" if check["pass"] else "FAIL"
            lines.append(f"  [{mark}] {check['name']:<36} {check['max_residual']:.3e} <= {check['tolerance']:.1e}")
        classification = report.get("classification")
        if classification:
            lines += ["", "-" * width, "CLASSIFICATION".center(width), "-" * width]
            lines.append(f"  kind:      {classification['kind']}")
            lines.append(f"  lambdas:   {', '.join(f'{x:.10f}' for x in classification['lambdas'])}")
            lines.append(f"  constancy: {classification['constancy']}")
            lines.append(f"  minimal:   {classification['minimal']}")
        lines += ["", "=" * width, ""]
        return "\n".join(lines)

    def compile_to_txt(self, report: Dict[str, Any], path: Optional[Path] = None) -> str:
        filepath = Path(path) if path else self.default_path(report, "txt")
        with open(filepath, "w", encoding="utf-8") as f:
            f.write(self.render_text(report))
        return str(filepath)

    # ==========================================================================
    # PDF
    # ==========================================================================

    def compile_to_pdf(self, report: Dict[str, Any], path: Optional[Path] = None) -> str:
        filepath = Path(path) if path else self.default_path(report, "pdf")
        doc = SimpleDocTemplate(str(filepath), pagesize=letter,
                                rightMargin=72, leftMargin=72, topMargin=72, bottomMargin=72, invariant=True)
        styles = getSampleStyleSheet()
        title_style = ParagraphStyle("ReportTitle", parent=styles["Heading1"], fontSize=20,
                                     alignment=TA_CENTER, spaceAfter=12, textColor=HexColor("#2C3E50"))
        body_style = ParagraphStyle("ReportBody", parent=styles["Normal"], fontSize=10, leading=14)

        story = [
            Paragraph(f"{report.get('command', '').title()} report", title_style),
            Paragraph(f"Generated on {self.run_date(report)}", body_style),
            Spacer(1, 0.2 * inch),
            Paragraph(f"Verdict: <b>{report.get('verdict', '?')}</b>", body_style),
            Spacer(1, 0.2 * inch),
        ]
        rows: List[List[str]] = [["check", "max residual", "tolerance", "pass"]]
        for check in report.get("checks", []):
            rows.append([check["name"], f"{check['max_residual']:.3e}", f"{check['tolerance']:.1e}",
                         "yes" if check["pass"] else "no"])
        table = Table(rows, hAlign="LEFT")
        table.setStyle(TableStyle([
            ("BACKGROUND", (0, 0), (-1, 0), HexColor("#34495E")),
            ("TEXTCOLOR", (0, 0), (-1, 0), HexColor("#FFFFFF")),
            ("FONTSIZE", (0, 0), (-1, -1), 9),
            ("GRID", (0, 0), (-1, -1), 0.25, HexColor("#7F8C8D")),
        ]))
        story.append(table)
        classification = report.get("classification")
        if classification:
            story.append(Spacer(1, 0.2 * inch))
            lambdas = ", ".join(f"{x:.10f}" for x in classification["lambdas"])
            story.append(Paragraph(f"Classification: {classification['kind']} ({lambdas})", body_style))
        doc.build(story)
        return str(filepath)

    # ==========================================================================
    # COMPILE ALL FORMATS
    # ==========================================================================

    def compile_report(self, report: Dict[str, Any], formats: List[str] = None,
                       json_path: Optional[Path] = None) -> Dict[str, str]:
        """Write the report in every format; failures are recorded as "Error: ..." strings."""
        if formats is None:
            formats = ["json"]

        results = {}
        for fmt in formats:
            print(f"📄 Compiling to {fmt.upper()}...")
            try:
                if fmt == "json":
                    results["json"] = self.compile_to_json(report, json_path)
                elif fmt == "txt":
                    target = Path(json_path).with_suffix(".txt") if json_path else None
                    results["txt"] = self.compile_to_txt(report, target)
                elif fmt == "pdf":
                    target = Path(json_path).with_suffix(".pdf") if json_path else None
                    results["pdf"] = self.compile_to_pdf(report, target)
                else:
                    raise ValueError(f"unknown format {fmt!r}")
                print(f"   ✅ {results[fmt]}")
            except Exception as e:
                print(f"   ❌ Error: {e}")
                results[fmt] = f"Error: {e}"
        return results
