from __future__ import annotations
import hashlib
import json
from typing import Any


def canonical_json(obj: Any, indent: int | None = None) -> str:
    """
    Deterministic JSON text.
    - sort_keys: stable key order
    - separators: compact unless indent is given
    - default=str: stray non-JSON values degrade to their text form
    """
    if indent is None:
        return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str, ensure_ascii=False)
    return json.dumps(obj, sort_keys=True, indent=indent, default=str, ensure_ascii=False)


def payload_digest(obj: Any) -> str:
    """SHA-256 over the canonical JSON of `obj`; a `digest` key at top level is ignored."""
    if isinstance(obj, dict) and "digest" in obj:
        obj = {k: v for k, v in obj.items() if k != "digest"}
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()
