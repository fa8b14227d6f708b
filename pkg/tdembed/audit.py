from __future__ import annotations
from typing import Any, Dict

from .errors import FormatError
from .models import ClassificationReport
from .digest import payload_digest


def human_readable_explanation(r: ClassificationReport) -> str:
    where = "lines" if r.d == 2 else "hyperplanes"
    summary = (f"TD({r.k},{r.n}) in P^{r.d} over a field of characteristic {r.characteristic}: "
               f"the {where} of the parts meet in a {r.flat_dim}-flat ({r.shape}), "
               f"and the embedding is {'proper' if r.proper else 'improper'}. ")
    if r.loop_associative:
        summary += f"The loop is an associative {'abelian' if r.loop_abelian else 'nonabelian'} group"
    else:
        summary += "The loop is not associative"
    summary += " (elementary abelian). " if r.loop_elementary_abelian else ". "
    parts = [f"{c.rule}: {'ok' if c.holds else 'FAILS'} ({c.detail})" for c in r.conclusions]
    if parts:
        summary += "; ".join(parts) + "."
    else:
        summary += "No rule applies to this flat dimension."
    return summary


def seal(report: Dict[str, Any]) -> Dict[str, Any]:
    """Attach the digest of the report body."""
    body = {k: v for k, v in report.items() if k != "digest"}
    body["digest"] = payload_digest(body)
    return body


def get_audit_payload(document: Dict[str, Any]) -> Dict[str, Any]:
    """Recompute the digest of an emitted report and compare it with the stored one."""
    if not isinstance(document, dict):
        raise FormatError("only JSON objects carry a digest")
    stored = document.get("digest")
    recreated = payload_digest(document)
    return {
        "stored_digest": stored,
        "recomputed_digest": recreated,
        "is_verified": stored == recreated,
        "keys": sorted(k for k in document if k != "digest"),
    }
