"""Snapshot, trajectory, and graph persistence.

Everything on disk is plain CSV or JSON meant for external plotting
tools.  Floats are written with 17 significant digits so that write
followed by read reproduces every value bit for bit, and identical
inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import subprocess
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ParseError, ShapeMismatch
from .field import Domain, QField
from .qtensor import BulkParams

__all__ = [
    "write_field",
    "read_field",
    "write_trajectory",
    "write_profile",
    "write_path_nodes",
    "write_mep_summary",
    "write_landscape",
    "write_branches",
    "write_hedgehog",
    "RunConfig",
    "load_config",
    "build_id",
    "write_manifest",
]


def _g17(x: float) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# field snapshots


def write_field(path, f: QField) -> None:
    """One node per row: i,j,x,y,q1..q5 under a "# nx,ny,lambda2,a,b,c" header."""
    d = f.domain
    lines = [
        "# "
        + ",".join(
            [str(d.nx), str(d.ny), _g17(d.lambda2), _g17(d.bulk.a), _g17(d.bulk.b), _g17(d.bulk.c)]
        )
    ]
    xs, ys = d.xs, d.ys
    for i in range(d.nx):
        for j in range(d.ny):
            q = f.values[i, j]
            lines.append(
                ",".join([str(i), str(j), _g17(xs[i]), _g17(ys[j])] + [_g17(v) for v in q])
            )
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_float(token: str, line_no: int, column: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"bad float {token!r}", line=line_no, column=column) from None


def _parse_int(token: str, line_no: int, column: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"bad integer {token!r}", line=line_no, column=column) from None


def read_field(path, domain: Domain | None = None) -> QField:
    """Inverse of write_field.

    When ``domain`` is given the header must agree with it exactly;
    otherwise a fresh Domain is built from the header (L2 = L3 = 0,
    tangent boundary - the header does not carry those).
    """
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ParseError("missing '# nx,ny,lambda2,a,b,c' header", line=1)
    head = lines[0][1:].strip().split(",")
    if len(head) != 6:
        raise ParseError(f"header needs 6 fields, got {len(head)}", line=1)
    nx = _parse_int(head[0], 1, 1)
    ny = _parse_int(head[1], 1, 2)
    lam2, a, b, c = (_parse_float(tok, 1, k + 3) for k, tok in enumerate(head[2:]))
    if domain is None:
        domain = Domain(nx=nx, ny=ny, lambda2=lam2, bulk=BulkParams(a, b, c))
    else:
        header = (nx, ny, lam2, a, b, c)
        expected = (
            domain.nx,
            domain.ny,
            domain.lambda2,
            domain.bulk.a,
            domain.bulk.b,
            domain.bulk.c,
        )
        if header != expected:
            raise ShapeMismatch(f"snapshot header {header} does not match domain {expected}")

    values = np.full(domain.shape, np.nan)
    n_rows = 0
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        tokens = line.split(",")
        if len(tokens) != 9:
            raise ParseError(f"expected 9 fields, got {len(tokens)}", line=line_no)
        i = _parse_int(tokens[0], line_no, 1)
        j = _parse_int(tokens[1], line_no, 2)
        if not (0 <= i < domain.nx and 0 <= j < domain.ny):
            raise ParseError(f"node ({i},{j}) outside {domain.nx}x{domain.ny} grid", line=line_no)
        _parse_float(tokens[2], line_no, 3)
        _parse_float(tokens[3], line_no, 4)
        values[i, j] = [_parse_float(tok, line_no, k + 5) for k, tok in enumerate(tokens[4:])]
        n_rows += 1
    if n_rows != domain.nx * domain.ny or np.isnan(values).any():
        raise ParseError(
            f"expected {domain.nx * domain.ny} node rows, got {n_rows}",
            line=len(lines) + 1,
        )
    return QField(domain, values)


# ---------------------------------------------------------------------------
# flat tables


def _write_table(path, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(cells) for cells in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def write_trajectory(path, rows) -> None:
    """rows of (step, time, energy, modified_energy, grad_inf_norm)."""
    _write_table(
        path,
        "step,time,energy,modified_energy,grad_inf_norm",
        ([str(int(s)), _g17(t), _g17(e), _g17(me), _g17(g)] for s, t, e, me, g in rows),
    )


def write_profile(path, mep_path) -> None:
    """Energy profile along a path: node,alpha,energy."""
    _write_table(
        path,
        "node,alpha,energy",
        (
            [str(k), _g17(mep_path.alpha[k]), _g17(mep_path.energies[k])]
            for k in range(mep_path.n_nodes)
        ),
    )


def write_branches(path, alpha: float, points) -> None:
    """Maier-Saupe critical points: alpha,eta,branch,stable,s2,s4."""
    _write_table(
        path,
        "alpha,eta,branch,stable,s2,s4",
        (
            [
                _g17(alpha),
                _g17(p.eta),
                p.branch,
                "true" if p.stable else "false",
                _g17(p.s2),
                _g17(p.s4),
            ]
            for p in points
        ),
    )


def write_hedgehog(path, profile) -> None:
    _write_table(
        path,
        "r,h",
        ([_g17(r), _g17(h)] for r, h in zip(profile.r, profile.h)),
    )


def _write_vector_csv(path, vec: np.ndarray) -> None:
    # generic snapshot for systems without a grid interpretation
    _write_table(path, "k,value", ([str(k), _g17(v)] for k, v in enumerate(vec)))


def _snapshot(path: Path, vec: np.ndarray, domain: Domain | None) -> None:
    if domain is not None:
        write_field(path, QField.from_flat(domain, vec))
    else:
        _write_vector_csv(path, vec)


def write_path_nodes(out_dir, mep_path, domain: Domain | None = None) -> list[str]:
    """profile.csv plus one snapshot per node; returns the file names."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = ["profile.csv"]
    write_profile(out / "profile.csv", mep_path)
    for k in range(mep_path.n_nodes):
        name = f"node_{k:03d}.csv"
        _snapshot(out / name, mep_path.nodes[k], domain)
        names.append(name)
    return names


def write_mep_summary(path, result) -> None:
    payload = {
        "barrier_forward": result.barrier_forward,
        "barrier_backward": result.barrier_backward,
        "ts_lambda1": result.ts_lambda1,
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def write_landscape(out_dir, graph, domain: Domain | None = None) -> list[str]:
    """landscape.json plus one snapshot CSV per stationary point.

    Returns the emitted file names (landscape.json first).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = ["landscape.json"]
    nodes = []
    for rec in graph.nodes:
        fname = f"node_{rec.id:03d}.csv"
        _snapshot(out / fname, rec.field, domain)
        names.append(fname)
        nodes.append(
            {"id": rec.id, "index": rec.morse_index, "energy": rec.energy, "file": fname}
        )
    edges = [
        {"from": e.source, "to": e.target, "kind": e.kind, "sign": e.sign} for e in graph.edges
    ]
    payload = {"nodes": nodes, "edges": edges, "truncated": graph.truncated}
    (out / "landscape.json").write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return names


# ---------------------------------------------------------------------------
# run configuration


@dataclass
class RunConfig:
    """One JSON document driving a CLI run; unknown keys are rejected."""

    nx: int
    ny: int
    lambda2: float
    a: float
    b: float
    c: float
    L2: float = 0.0
    L3: float = 0.0
    boundary: str = "tangent"
    seed: int = 0
    tol: float = 1e-8
    dt: float = 0.1
    scheme: str = "sav"
    init: str = "isotropic"
    out_dir: str = "out"
    max_steps: int = 100_000
    n_nodes: int = 16
    k: int = 1
    max_nodes: int = 200
    max_searches: int = 2000
    max_index: int | None = None

    def domain(self) -> Domain:
        return Domain(
            nx=self.nx,
            ny=self.ny,
            lambda2=self.lambda2,
            bulk=BulkParams(self.a, self.b, self.c),
            l2=self.L2,
            l3=self.L3,
            boundary=self.boundary,
        )

    def to_dict(self) -> dict:
        return asdict(self)


_REQUIRED_KEYS = ("nx", "ny", "lambda2", "a", "b", "c")
_ALLOWED_KEYS = frozenset(RunConfig.__dataclass_fields__)
_INT_KEYS = frozenset(
    {"nx", "ny", "seed", "max_steps", "n_nodes", "k", "max_nodes", "max_searches", "max_index"}
)
_REAL_KEYS = frozenset({"lambda2", "a", "b", "c", "L2", "L3", "tol", "dt"})


def load_config(path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    for key in raw:
        if key not in _ALLOWED_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
    for key in _REQUIRED_KEYS:
        if key not in raw:
            raise ConfigError(f"missing required config key {key!r}")
    for key, value in raw.items():
        if key in _INT_KEYS:
            if value is None and key == "max_index":
                continue
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"config key {key!r} must be an integer, got {value!r}")
        elif key in _REAL_KEYS:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"config key {key!r} must be a number, got {value!r}")
        elif not isinstance(value, str):
            raise ConfigError(f"config key {key!r} must be a string, got {value!r}")
    cfg = RunConfig(**raw)
    if cfg.scheme not in ("sav", "semi_implicit"):
        raise ConfigError(f"config key 'scheme' must be 'sav' or 'semi_implicit', got {cfg.scheme!r}")
    if cfg.boundary not in ("tangent", "planar", "zero"):
        raise ConfigError(
            f"config key 'boundary' must be 'tangent', 'planar' or 'zero', got {cfg.boundary!r}"
        )
    return cfg


# ---------------------------------------------------------------------------
# manifest


def build_id() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            cwd=Path(__file__).resolve().parent,
            timeout=10,
        )
    except Exception:
        return "unknown"
    tag = out.stdout.strip()
    return tag if out.returncode == 0 and tag else "unknown"


def write_manifest(
    out_dir,
    command: str,
    inputs: dict,
    tolerances: dict,
    wall_time_s: float,
    outputs: list[str],
) -> None:
    """run.json: every emitted file must appear in ``outputs``."""
    payload = {
        "command": command,
        "inputs": inputs,
        "tolerances": tolerances,
        "wall_time_s": wall_time_s,
        "build_id": build_id(),
        "outputs": sorted(outputs),
    }
    Path(Path(out_dir) / "run.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n"
    )
