import hashlib
from typing import Optional, Union

import numpy as np


def stable_sha256(*parts: Optional[Union[str, bytes]]) -> str:
    m = hashlib.sha256()
    for p in parts:
        if p is None:
            p = ""  # normalize
        if not isinstance(p, (bytes, bytearray)):
            p = str(p).encode("utf-8", errors="ignore")
        m.update(p)
        m.update(b"\x1e")  # record separator
    return m.hexdigest()


def array_digest(*arrays: np.ndarray) -> str:
    """Digest of float arrays by shape and little-endian float64 bytes."""
    parts: list[bytes] = []
    for a in arrays:
        a = np.ascontiguousarray(a, dtype="<f8")
        parts.append(repr(a.shape).encode())
        parts.append(a.tobytes())
    return stable_sha256(*parts)
