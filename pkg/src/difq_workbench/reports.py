"""
Reports Module

Structured pass/fail output shared by every verification suite, plus the
versioned run report written by the command line front end.
"""
import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field

from .version import __version__

SCHEMA_VERSION = 1
MAX_WITNESSES = 10


def _jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays and other values into JSON-safe data."""
    if hasattr(value, "tolist"):
        value = value.tolist()
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return str(value)
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (int, str, bool)) or value is None:
        return value
    return str(value)


class CheckResult(BaseModel):
    """Outcome of one named property check."""

    name: str
    passed: bool = True
    trials: int = 0
    failures: int = 0
    worst_residual: Optional[float] = None
    witnesses: List[Dict[str, Any]] = Field(default_factory=list)
    note: Optional[str] = None

    def record(self, ok: bool, residual: Optional[float] = None,
               witness: Optional[Dict[str, Any]] = None) -> None:
        """
        Record one trial.

        Args:
            ok: Whether the trial satisfied the property
            residual: Residual measured by the trial, if any
            witness: Replay data stored when the trial failed
        """
        self.trials += 1
        if residual is not None and math.isfinite(residual):
            if self.worst_residual is None or residual > self.worst_residual:
                self.worst_residual = float(residual)
        if not ok:
            self.failures += 1
            self.passed = False
            if witness is not None and len(self.witnesses) < MAX_WITNESSES:
                self.witnesses.append(_jsonable(witness))


class VerificationReport(BaseModel):
    """Ordered collection of checks for one suite run."""

    title: str
    seed: Optional[int] = None
    notes: List[str] = Field(default_factory=list)
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def check(self, name: str) -> CheckResult:
        """Return the check called name, creating it on first use."""
        for existing in self.checks:
            if existing.name == name:
                return existing
        created = CheckResult(name=name)
        self.checks.append(created)
        return created

    def merge(self, other: "VerificationReport") -> "VerificationReport":
        """Append another report's checks, prefixed by its title."""
        for check in other.checks:
            copy = check.model_copy(deep=True)
            copy.name = f"{other.title}/{check.name}"
            self.checks.append(copy)
        self.notes.extend(other.notes)
        return self

    def merge_checks(self, other: "VerificationReport") -> "VerificationReport":
        """Fold another report's checks into same-named checks of this one."""
        for check in other.checks:
            target = self.check(check.name)
            target.trials += check.trials
            target.failures += check.failures
            target.passed = target.passed and check.passed
            if check.worst_residual is not None and (
                    target.worst_residual is None or check.worst_residual > target.worst_residual):
                target.worst_residual = check.worst_residual
            room = MAX_WITNESSES - len(target.witnesses)
            target.witnesses.extend(check.witnesses[:max(room, 0)])
        for note in other.notes:
            if note not in self.notes:
                self.notes.append(note)
        return self

    def summary_lines(self) -> List[str]:
        lines = []
        for check in self.checks:
            mark = "✓" if check.passed else "✗"
            worst = "" if check.worst_residual is None else f" worst={check.worst_residual:.3e}"
            lines.append(f"{mark} {check.name}: {check.trials - check.failures}/{check.trials}{worst}")
        return lines


class RunReport(BaseModel):
    """The report.json document written by a CLI run."""

    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(default=SCHEMA_VERSION, serialization_alias="schema")
    version: str = __version__
    command: List[str] = Field(default_factory=list)
    seed: Optional[int] = None
    inputs: Dict[str, Any] = Field(default_factory=dict)
    results: List[Any] = Field(default_factory=list)
    residuals: List[Optional[float]] = Field(default_factory=list)
    converged: List[bool] = Field(default_factory=list)
    iterations: List[int] = Field(default_factory=list)
    verification: Optional[VerificationReport] = None

    def to_json(self) -> str:
        """Deterministic JSON text (sorted keys, fixed indentation)."""
        payload = _jsonable(self.model_dump(mode="json", by_alias=True))
        if self.verification is not None:
            payload["verification"]["passed"] = self.verification.passed
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def atomic_write_text(path: Path, text: str) -> Path:
    """
    Write text to path through a temporary file and a rename.

    Args:
        path: Destination path (parent directories are created)
        text: File content

    Returns:
        The destination path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """CSV document with a header row; floats written with repr precision."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return buffer.getvalue()


def dat_text(xs: Sequence[float], ys: Sequence[float]) -> str:
    """Two-column whitespace separated data for external plotters."""
    return "".join(f"{float(x):.17g} {float(y):.17g}\n" for x, y in zip(xs, ys))


def json_text(payload: Any) -> str:
    """Sorted, indented JSON for auxiliary output files."""
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"
