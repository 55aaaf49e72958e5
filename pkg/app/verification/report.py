"""Report files: the JSON record array and a plain-text summary."""
import json
from pathlib import Path
from typing import Dict

from app.models.report_models import VerificationReport

RECORDS_FILE = "records.json"
SUMMARY_FILE = "summary.txt"


def records_json(report: VerificationReport) -> str:
    return json.dumps([record.to_json_dict() for record in report.records], indent=2, ensure_ascii=False) + "\n"


def summary_text(report: VerificationReport) -> str:
    lines = [f"{'suite':<12} {'total':>6} {'passed':>7} {'failed':>7} {'seconds':>9}"]
    for summary in report.summaries:
        lines.append(
            f"{summary.suite:<12} {summary.total:>6} {summary.passed:>7} {summary.failed:>7} "
            f"{summary.runtime_ms / 1000.0:>9.2f}"
        )
    failures = [record for record in report.records if not record.passed]
    if failures:
        lines.append("")
        lines.append("Failed records:")
        for record in failures:
            reason = record.error or f"measured {record.measured:.6g} > bound {record.bound:.6g}"
            lines.append(f"  [{record.system or '-'}] {record.property}: {reason}")
    lines.append("")
    lines.append("PASS" if report.exit_code == 0 else "FAIL")
    return "\n".join(lines) + "\n"


def write_report(report: VerificationReport, out_dir: str) -> Dict[str, Path]:
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {"records": directory / RECORDS_FILE, "summary": directory / SUMMARY_FILE}
    paths["records"].write_text(records_json(report), encoding="utf-8")
    paths["summary"].write_text(summary_text(report), encoding="utf-8")
    return paths
