"""Exception hierarchy. Every error carries a machine-readable code."""

from __future__ import annotations

from typing import Any


class LabError(Exception):
    code = "lab-error"

    def __init__(self, message: str, **context: Any) -> None:
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "context": self.context}


class InvalidSpec(LabError):
    code = "invalid-spec"


class InsufficientDepth(LabError):
    code = "insufficient-depth"


class PrecisionExhausted(LabError):
    code = "precision-exhausted"


class DegreeOverflow(LabError):
    code = "degree-overflow"


class DegreeOutOfRange(LabError):
    code = "degree-out-of-range"


class InsufficientCandidates(LabError):
    code = "insufficient-candidates"


class OutOfRange(LabError):
    code = "out-of-range"


class PsiOutOfDomain(LabError):
    code = "psi-out-of-domain"


class InsufficientRange(LabError):
    code = "insufficient-range"


class GridMismatch(LabError):
    code = "grid-mismatch"


class Degenerate(LabError):
    code = "degenerate"


class SegmentationFailed(LabError):
    code = "segmentation-failed"


class EmptySequence(LabError):
    code = "empty-sequence"


class InsufficientRoyEntries(LabError):
    code = "insufficient-roy-entries"


class NoIrreducibleCandidate(LabError):
    code = "no-irreducible-candidate"


class InvalidConfig(LabError):
    code = "invalid-config"
