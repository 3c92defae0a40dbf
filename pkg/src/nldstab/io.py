"""Persistence: profile files (JSON header line plus little-endian float64
arrays), CSV export, and a content-addressed on-disk cache."""
from __future__ import annotations

import csv
import hashlib
import json
import os
from pathlib import Path

import numpy as np

from .grid import Grid
from .model import make_model
from .profile import WaveProfile

PROFILE_FORMAT = "nldstab-profile-v1"


def profile_key_hash(key: tuple) -> str:
    return hashlib.sha256(repr(tuple(key)).encode()).hexdigest()[:24]


def _header(profile: WaveProfile) -> dict:
    g = profile.grid
    return {
        "format": PROFILE_FORMAT,
        "family": profile.model.family.value, "k": profile.model.k, "m": profile.model.m,
        "omega": profile.omega, "R": g.R, "M": g.M, "scheme": g.scheme.value,
        "stretch": g.stretch, "residual": profile.residual,
        "first_integral_drift": profile.first_integral_drift,
        "s_sign_changes": profile.s_sign_changes,
    }


def save_profile(profile: WaveProfile, path) -> Path:
    """Write ``header\\n`` followed by ``x, v, u`` as little-endian float64."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(json.dumps(_header(profile), sort_keys=True).encode() + b"\n")
        for arr in (profile.x, profile.v, profile.u):
            fh.write(np.asarray(arr, dtype="<f8").tobytes())
    os.replace(tmp, path)
    return path


def load_profile(path) -> WaveProfile:
    with open(path, "rb") as fh:
        head = json.loads(fh.readline())
        if head.get("format") != PROFILE_FORMAT:
            raise ValueError(f"{path}: not a profile file")
        data = np.frombuffer(fh.read(), dtype="<f8")
    M = int(head["M"])
    if data.size != 3 * M:
        raise ValueError(f"{path}: expected {3 * M} values, found {data.size}")
    grid = Grid(head["R"], M, head["scheme"], head["stretch"])
    if not np.allclose(grid.x, data[:M], rtol=0, atol=1e-12 * max(1.0, grid.R)):
        raise ValueError(f"{path}: stored nodes disagree with the grid")
    model = make_model(head["family"], head["k"], head["m"])
    return WaveProfile(model, head["omega"], grid, data[M:2 * M].copy(), data[2 * M:].copy(),
                       residual=head["residual"], first_integral_drift=head["first_integral_drift"],
                       s_sign_changes=head["s_sign_changes"])


def export_profile_csv(profile: WaveProfile, path, header: dict | None = None) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        for key, val in {**_header(profile), **(header or {})}.items():
            fh.write(f"# {key}: {val}\n")
        w = csv.writer(fh)
        w.writerow(["x", "v", "u"])
        for row in zip(profile.x, profile.v, profile.u):
            w.writerow([repr(float(t)) for t in row])
    return path


class ProfileCache:
    """Directory of profile files named by a hash of the profile key."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path_for(self, key: tuple) -> Path:
        return self.root / f"{profile_key_hash(key)}.prof"

    def get(self, key: tuple):
        p = self.path_for(key)
        if not p.exists():
            return None
        try:
            return load_profile(p)
        except (ValueError, OSError):
            return None

    def put(self, profile: WaveProfile) -> Path:
        return save_profile(profile, self.path_for(profile.key()))

    def solve(self, model, omega, grid):
        """Cached equivalent of :func:`solve_profile`; returns ``(profile, hit)``."""
        from .profile import solve_profile
        key = (model.family.value, model.k, model.m, float(omega)) + grid.key()
        hit = self.get(key)
        if hit is not None:
            return hit, True
        prof = solve_profile(model, omega, grid)
        self.put(prof)
        return prof, False
