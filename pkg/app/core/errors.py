"""Exception hierarchy shared by the forensic services.

Every error carries the name of the module that raised it so the CLI and the
HTTP layer can report where in the battery a run failed.
"""
from typing import List, Optional


class ForensicsError(Exception):
    module = "forensics"

    def __init__(self, message: str, module: Optional[str] = None):
        super().__init__(message)
        if module is not None:
            self.module = module

    def __str__(self) -> str:
        return f"[{self.module}] {self.args[0]}"


class DatasetFormatError(ForensicsError):
    """Raised when CSV input cannot be turned into a Dataset."""

    module = "data-model"

    def __init__(self, kind: str, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.kind = kind
        self.line = line


class DatasetValidationError(ForensicsError):
    module = "data-model"

    def __init__(self, issues: List["ValidationIssue"]):  # noqa: F821
        summary = "; ".join(f"point {i.point_index}: {i.kind}" for i in issues)
        super().__init__(f"dataset failed validation ({summary})")
        self.issues = issues


class SampleTooSmallError(ForensicsError):
    pass


class DegenerateSampleError(ForensicsError):
    pass


class InvalidProbabilityError(ForensicsError):
    module = "dispersion-forensics"


class InvalidConfigError(ForensicsError):
    module = "null-simulator"


class PlotOutputError(ForensicsError):
    module = "report-cli"
