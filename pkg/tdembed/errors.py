from __future__ import annotations
from typing import Any, Dict, Optional


class TDEmbedError(Exception):
    """Base error. `exit_code` plays the role an HTTP status code plays for a web API."""

    exit_code = 1

    def __init__(self, detail: str, witness: Optional[Dict[str, Any]] = None):
        super().__init__(detail)
        self.detail = detail
        self.witness = witness or {}

    def to_payload(self) -> Dict[str, Any]:
        return {
            "error": type(self).__name__,
            "detail": self.detail,
            "witness": self.witness,
            "exit_code": self.exit_code,
        }


# ---------- exit 2: bad input ----------
class InputError(TDEmbedError):
    exit_code = 2

class DescriptorMismatch(InputError): pass
class UnknownDescriptor(InputError): pass
class UnknownPreset(InputError): pass
class PresetNotConstructed(InputError): pass
class FormatError(InputError): pass
class SideTooSmall(InputError): pass
class SideMismatch(InputError): pass
class NotBlockSize3(InputError): pass
class DegenerateInput(InputError): pass


# ---------- exit 1: a mathematical check failed ----------
class ValidationFailure(TDEmbedError):
    exit_code = 1

class DivisionByZero(ValidationFailure): pass
class SingularSystem(ValidationFailure): pass
class NotOrthogonal(ValidationFailure): pass
class NotFinite(ValidationFailure): pass
class GroupNotCertified(ValidationFailure): pass
class CharZeroNoFiniteAdditiveSubgroup(ValidationFailure): pass
class CharZeroConcurrentImpossible(ValidationFailure): pass
class GroupTooSmall(ValidationFailure): pass
class DimensionTooSmall(ValidationFailure): pass
class LineInHyperplane(ValidationFailure): pass
class PointOnPartHyperplane(ValidationFailure): pass
class NonStandardFrame(ValidationFailure): pass
class NotInCanonicalFrame(ValidationFailure): pass
class NotATransversalPoint(ValidationFailure): pass
class WrongClassification(ValidationFailure): pass
class NothingToExtend(ValidationFailure): pass
class ExtensionUndefined(ValidationFailure): pass
class PartRejected(ValidationFailure): pass


# ---------- exit 3: too big for exhaustive treatment ----------
class SizeError(TDEmbedError):
    exit_code = 3

class UnsupportedSize(SizeError): pass
class SearchSpaceTooLarge(SizeError): pass
