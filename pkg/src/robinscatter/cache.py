"""Append-only cache of kernel evaluations.

One record per line: ``<64 hex key> <re> <im> <err>`` with the floats in
``%.17e`` so values round-trip bit-exactly.  Keys hash the medium, the two
points, the quadrature signature and the kernel convention version, so a
convention bump invalidates every old record.
"""
import hashlib
import logging
import os
import threading
from pathlib import Path

import numpy as np

from .green import CONVENTION_VERSION

log = logging.getLogger(__name__)
_LOCK = threading.Lock()


def cache_key(d, k, theta, x, y, signature="", version=CONVENTION_VERSION):
    theta = complex(theta)
    parts = [f"v{version}", f"d{int(d)}", float(k).hex(), theta.real.hex(), theta.imag.hex(),
             *[float(v).hex() for v in np.ravel(x)], "|", *[float(v).hex() for v in np.ravel(y)],
             str(signature)]
    return hashlib.sha256(" ".join(parts).encode()).hexdigest()


class EvaluationCache:
    def __init__(self, path=None):
        self.path = None if path is None else Path(path)
        self._table = None

    @property
    def enabled(self):
        return self.path is not None

    def _load(self):
        if self._table is not None:
            return self._table
        table = {}
        if self.path.exists():
            try:
                for line in self.path.read_text().splitlines():
                    key, re_, im_, err = line.split(" ")
                    if len(key) != 64:
                        raise ValueError(line)
                    int(key, 16)
                    table[key] = (complex(float(re_), float(im_)), float(err))
            except (ValueError, UnicodeDecodeError):
                log.warning("cache file %s is corrupt; rebuilding it from scratch", self.path)
                self.path.write_text("")
                table = {}
        self._table = table
        return table

    def lookup_or_compute(self, key, compute):
        """Return (value, error); ``compute()`` must return the same pair."""
        if not self.enabled:
            return compute()
        with _LOCK:
            table = self._load()
            if key in table:
                return table[key]
        value, err = compute()
        value, err = complex(value), float(err)
        with _LOCK:
            if key not in self._table:
                line = f"{key} {value.real:.17e} {value.imag:.17e} {err:.17e}\n"
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.path, "a") as fh:
                    fh.write(line)
                    fh.flush()
                    os.fsync(fh.fileno())
                self._table[key] = (value, err)
            return self._table[key]


def cache_lookup_or_compute(key, compute, cache: EvaluationCache = None):
    if cache is None:
        return compute()
    return cache.lookup_or_compute(key, compute)
