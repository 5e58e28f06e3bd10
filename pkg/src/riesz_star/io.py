"""Run configuration and deterministic, atomic file output."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .kernel import RieszParams
from .scheme import SchemeConfig
from .steady import SteadyProfile

PROFILE_COLUMNS = ("x", "rho", "rho_gamma")
SNAPSHOT_COLUMNS = ("t", "k", "x_k", "eta_k", "v_k", "stretch_k", "rho_eulerian_k")


@dataclass(frozen=True)
class SteadySettings:
    n_grid: int = 400
    tol: float = 1e-10
    relax: float = 0.5


@dataclass(frozen=True)
class OutputSettings:
    directory: str = "out"
    snapshot_every: float = 0.25
    formats: tuple = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    params: RieszParams = field(default_factory=RieszParams)
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    steady: SteadySettings = field(default_factory=SteadySettings)
    outputs: OutputSettings = field(default_factory=OutputSettings)
    seed: int = 0

    def to_dict(self, include_paths: bool = True) -> dict:
        """Plain dict; ``include_paths=False`` drops the output directory so
        that manifests and run ids do not depend on where files go."""
        outputs = {**asdict(self.outputs), "formats": list(self.outputs.formats)}
        if not include_paths:
            del outputs["directory"]
        return {
            "params": self.params.to_dict(),
            "scheme": self.scheme.to_dict(),
            "steady": asdict(self.steady),
            "outputs": outputs,
            "seed": int(self.seed),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        sch = dict(d["scheme"])
        sch["guard"] = tuple(sch.get("guard", (0.25, 4.0)))
        out = {"directory": OutputSettings.directory, **d["outputs"]}
        out["formats"] = tuple(out.get("formats", ("csv", "json")))
        return cls(params=RieszParams(**d["params"]), scheme=SchemeConfig(**sch),
                   steady=SteadySettings(**d["steady"]), outputs=OutputSettings(**out),
                   seed=int(d["seed"]))

    def run_id(self, extra: str = "") -> str:
        """Content hash of the configuration, stable across processes."""
        blob = canonical_json(self.to_dict(include_paths=False)) + extra
        return hashlib.sha1(blob.encode()).hexdigest()[:12]


def canonical_json(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=True) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v) + 0.0)               # folds -0.0 into 0.0


def write_atomic(path, text: str) -> None:
    """Write through a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        os.chmod(tmp, 0o666 & ~_umask())
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(columns)
    for r in rows:
        wr.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def write_csv(path, columns, rows) -> None:
    write_atomic(path, csv_text(columns, rows))


def write_json(path, obj) -> None:
    write_atomic(path, canonical_json(obj))


def read_csv(path) -> dict:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        data = [[float(v) for v in row] for row in rd if row]
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    return {name: arr[:, i] for i, name in enumerate(header)}


def profile_header(profile: SteadyProfile) -> dict:
    return {"s": profile.s, "gamma": profile.gamma, "radius": profile.radius,
            "mass": profile.mass, "residual": profile.residual,
            "iterations": profile.iterations, "n": profile.n, "digest": profile.digest()}


def save_profile(profile: SteadyProfile, directory, stem: str = "profile") -> tuple:
    d = Path(directory)
    rows = zip(profile.grid, profile.rho, profile.rho_gamma)
    write_csv(d / f"{stem}.csv", PROFILE_COLUMNS, rows)
    write_json(d / f"{stem}.json", profile_header(profile))
    return d / f"{stem}.csv", d / f"{stem}.json"


def load_profile(csv_path, json_path=None) -> SteadyProfile:
    csv_path = Path(csv_path)
    json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
    cols = read_csv(csv_path)
    with open(json_path) as fh:
        hd = json.load(fh)
    return SteadyProfile(grid=cols["x"], rho=cols["rho"], radius=float(hd["radius"]),
                         mass=float(hd["mass"]), s=float(hd["s"]), gamma=float(hd["gamma"]),
                         residual=float(hd["residual"]), iterations=int(hd["iterations"]))
