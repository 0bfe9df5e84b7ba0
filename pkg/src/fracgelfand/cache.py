"""CSV-backed cache of Bessel-J zeros.

Entries are (nu, k, zero) rows.  On load every value is revalidated by one
Newton step; entries that move by more than the validation tolerance are
corrected in place, so a hand-edited or corrupt cache degrades to a
recompute rather than poisoning downstream spectra.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from scipy import special

from . import specfun

ENV_VAR = "FRAC_GELFAND_CACHE"
_VALIDATE_TOL = 1e-9


class ZeroCache:
    def __init__(self, path):
        self.path = Path(path)
        self._data = {}  # nu -> list of zeros (index k-1)
        if self.path.exists():
            self._load()

    def _load(self):
        entries = {}
        try:
            raw = np.loadtxt(self.path, delimiter=",", ndmin=2)
        except (ValueError, OSError):
            return  # corrupt cache: start empty, overwrite on next put
        for nu, k, z in raw:
            if not (np.isfinite(z) and z > 0 and k >= 1):
                continue
            z = self._revalidate(nu, z)
            if z is not None:
                entries.setdefault(float(nu), {})[int(k)] = z
        for nu, by_k in entries.items():
            ks = sorted(by_k)
            if ks == list(range(1, len(ks) + 1)):
                zs = [by_k[k] for k in ks]
                if all(b > a for a, b in zip(zs, zs[1:])):
                    self._data[nu] = zs

    @staticmethod
    def _revalidate(nu, z):
        # one Newton step; reject values that were never near a zero
        for _ in range(8):
            f = special.jv(nu, z)
            if abs(f) <= 1e-13:
                return float(z)
            fp = special.jvp(nu, z)
            if fp == 0:
                return None
            step = f / fp
            if abs(step) > 0.5:
                return None
            z = z - step
        return float(z) if abs(special.jv(nu, z)) <= 1e-12 else None

    def get(self, nu, count):
        zs = self._data.get(float(nu))
        if zs is not None and len(zs) >= count:
            return np.asarray(zs[:count])
        return None

    def put(self, nu, zeros):
        cur = self._data.get(float(nu), [])
        if len(zeros) > len(cur):
            self._data[float(nu)] = list(map(float, zeros))
            self._flush()

    def _flush(self):
        rows = [
            (nu, k + 1, z)
            for nu, zs in sorted(self._data.items())
            for k, z in enumerate(zs)
        ]
        tmp = self.path.with_suffix(".tmp")
        with open(tmp, "w") as fh:
            for nu, k, z in rows:
                fh.write(f"{nu:.17g},{k},{z:.17g}\n")
        os.replace(tmp, self.path)


def install_from_env():
    """Install a ZeroCache if FRAC_GELFAND_CACHE points somewhere writable."""
    path = os.environ.get(ENV_VAR)
    if path:
        cache = ZeroCache(path)
        specfun.set_zero_cache(cache)
        return cache
    return None
