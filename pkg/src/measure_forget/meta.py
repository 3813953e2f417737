"""Self-description helpers: code version hash for output provenance."""

from __future__ import annotations

import hashlib
from pathlib import Path

_PKG_DIR = Path(__file__).parent


def code_version() -> str:
    """Content hash over the package sources, git-object style."""
    h = hashlib.sha1()
    for path in sorted(_PKG_DIR.glob("*.py")):
        data = path.read_bytes()
        h.update(f"blob {len(data)}\0".encode())
        h.update(data)
    return h.hexdigest()
