"""File formats: frames as JSON or CSV, reports and solver output as JSON.

Frames carry an explicit (d, n) header in both formats and preserve vector
order. Floats are written so that reading them back reproduces the exact
double (JSON uses Python's shortest round-trip representation, CSV prints
17 significant digits); round-trips are bit-faithful.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .frames import Frame, FrameMetrics
from .repair import REPORT_SCHEMA, AuditRecord, PerturbationBudget, RepairReport
from .scaling import ScalingSolution

_CSV_HEADER = re.compile(r"#\s*frame\s+d=(\d+)\s+n=(\d+)\s*$")


def frame_to_dict(frame: Frame) -> dict:
    return {"d": frame.d, "n": frame.n, "vectors": frame.vectors.tolist()}


def frame_from_dict(data: dict) -> Frame:
    try:
        d, n, vectors = int(data["d"]), int(data["n"]), data["vectors"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed frame object: {exc}") from exc
    frame = Frame(np.array(vectors, dtype=float))
    if frame.d != d or frame.n != n:
        raise ValueError(
            f"frame header (d={d}, n={n}) disagrees with vectors ({frame.d}, {frame.n})"
        )
    return frame


def write_frame_json(path: str | Path, frame: Frame) -> None:
    Path(path).write_text(json.dumps(frame_to_dict(frame), indent=2) + "\n")


def read_frame_json(path: str | Path) -> Frame:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON: {exc}") from exc
    return frame_from_dict(data)


def write_frame_csv(path: str | Path, frame: Frame) -> None:
    lines = [f"# frame d={frame.d} n={frame.n}"]
    for row in frame.vectors:
        lines.append(",".join(format(v, ".17g") for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_frame_csv(path: str | Path) -> Frame:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty frame file")
    header = _CSV_HEADER.match(lines[0])
    if header is None:
        raise ValueError(f"{path}: missing '# frame d=<d> n=<n>' header")
    d, n = int(header.group(1)), int(header.group(2))
    rows = [[float(cell) for cell in ln.split(",")] for ln in lines[1:]]
    frame = Frame(np.array(rows, dtype=float))
    if frame.d != d or frame.n != n:
        raise ValueError(f"{path}: header (d={d}, n={n}) disagrees with rows ({frame.d}, {frame.n})")
    return frame


def write_frame(path: str | Path, frame: Frame, fmt: str = "json") -> None:
    if fmt == "json":
        write_frame_json(path, frame)
    elif fmt == "csv":
        write_frame_csv(path, frame)
    else:
        raise ValueError(f"unknown frame format {fmt!r}")


def read_frame(path: str | Path) -> Frame:
    """Load a frame, dispatching on extension (.csv) with JSON fallback."""
    if str(path).endswith(".csv"):
        return read_frame_csv(path)
    return read_frame_json(path)


def metrics_to_dict(metrics: FrameMetrics) -> dict:
    return {"eps_op": metrics.eps_op, "eps_norm": metrics.eps_norm, "eps": metrics.eps}


def scaling_to_dict(solution: ScalingSolution, d: int) -> dict:
    return {
        "d": d,
        "t": solution.t.tolist(),
        "A": solution.A.reshape(-1).tolist(),
        "residual_inf": solution.residual_inf,
        "iterations": solution.iterations,
        "converged": solution.converged,
        "stationarity_gap": solution.stationarity_gap,
    }


def _scaling_from_dict(data: dict) -> ScalingSolution:
    d = int(data["d"])
    A = np.array(data["A"], dtype=float).reshape(d, d)
    return ScalingSolution(
        t=np.array(data["t"], dtype=float),
        A=A,
        residual=np.zeros((d, d)),
        residual_inf=float(data["residual_inf"]),
        iterations=int(data["iterations"]),
        converged=bool(data["converged"]),
        stationarity_gap=float(data.get("stationarity_gap", 0.0)),
    )


def audit_to_dict(audit: AuditRecord) -> dict:
    return {
        "passed": audit.passed,
        "checks": [
            {
                "name": c.name,
                "lhs": c.lhs,
                "rhs": c.rhs,
                "slack": c.slack,
                "passed": c.passed,
                "detail": c.detail,
            }
            for c in audit.checks
        ],
    }


def report_to_dict(report: RepairReport, audit: AuditRecord | None = None) -> dict:
    data = {
        "schema": REPORT_SCHEMA,
        "d": report.d,
        "n": report.n,
        "seed": report.seed,
        "delta": report.delta,
        "delta_solver": report.delta_solver,
        "eps": report.eps,
        "eps_op": report.eps_op,
        "eps_norm": report.eps_norm,
        "frames": {
            "input": frame_to_dict(report.input_frame),
            "perturbed": frame_to_dict(report.perturbed_frame),
            "output": frame_to_dict(report.output_frame),
        },
        "distances": {
            "vw": report.dist_sq_vw,
            "vu": report.dist_sq_vu,
            "uw": report.dist_sq_uw,
        },
        "bound": report.bound,
        "budget": {
            "eta_max": report.budget.eta_max,
            "gamma": report.budget.gamma,
            "gamma_prime": report.budget.gamma_prime,
            "gamma_prime_effective": report.gamma_prime_effective,
        },
        "scaling": scaling_to_dict(report.scaling, report.d),
        "output_eps": report.output_eps,
        "certified": report.certified,
    }
    if audit is not None:
        data["audit"] = audit_to_dict(audit)
    return data


def report_from_dict(data: dict) -> RepairReport:
    if data.get("schema") != REPORT_SCHEMA:
        raise ValueError(f"unsupported report schema {data.get('schema')!r}")
    frames = data["frames"]
    budget = data["budget"]
    return RepairReport(
        input_frame=frame_from_dict(frames["input"]),
        perturbed_frame=frame_from_dict(frames["perturbed"]),
        output_frame=frame_from_dict(frames["output"]),
        eps=float(data["eps"]),
        eps_op=float(data["eps_op"]),
        eps_norm=float(data["eps_norm"]),
        dist_sq_vw=float(data["distances"]["vw"]),
        dist_sq_vu=float(data["distances"]["vu"]),
        dist_sq_uw=float(data["distances"]["uw"]),
        bound=float(data["bound"]),
        budget=PerturbationBudget(
            eta_max=float(budget["eta_max"]),
            gamma=float(budget["gamma"]),
            gamma_prime=float(budget["gamma_prime"]),
        ),
        gamma_prime_effective=float(budget["gamma_prime_effective"]),
        scaling=_scaling_from_dict(data["scaling"]),
        delta=float(data["delta"]),
        delta_solver=float(data["delta_solver"]),
        seed=int(data["seed"]),
        output_eps=float(data["output_eps"]),
        certified=bool(data["certified"]),
    )


def write_report(path: str | Path, report: RepairReport, audit: AuditRecord | None = None) -> None:
    Path(path).write_text(json.dumps(report_to_dict(report, audit), indent=2) + "\n")


def read_report(path: str | Path) -> RepairReport:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON: {exc}") from exc
    return report_from_dict(data)
