"""Problem files in, CSV / PGM / JSON out.

Problem files are JSON::

    {
      "dimension": 2,
      "operators": [
        {"j": 0.5, "theta": 1.5707963, "phi": 0, "normalization": "pauli", "label": "Sx"},
        {"matrix": [[[0, 0], [0, -1]], [[0, 1], [0, 0]]], "label": "Sy"}
      ],
      "state": {"kind": "eigenstate", "axis": "z", "sign": 1}
    }

Complex entries are ``[re, im]`` pairs (a bare number is a real entry).
States are ``"maximally-mixed"``, ``{"kind": "eigenstate", "axis": k | "x" |
"y" | "z", "sign": +-1}`` or ``{"kind": "explicit", "matrix": ...}``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .measure import SignedDiscreteMeasure, signed_measure
from .operators import (
    DensityMatrix,
    HermitianOperator,
    Normalization,
    OperatorTuple,
    eigenstate,
    make_density,
    make_hermitian,
    maximally_mixed,
    spin_operator,
)
from .wigner_reg import DensityGrid, GridSpec

__all__ = [
    "ProblemSpec",
    "parse_problem",
    "problem_from_mapping",
    "format_float",
    "measure_to_csv",
    "write_measure_csv",
    "read_measure_csv",
    "density_to_csv",
    "write_density_csv",
    "density_to_pgm",
    "write_pgm",
    "read_pgm",
    "pgm_to_values",
    "ConvergenceRow",
    "convergence_to_csv",
    "CheckResult",
    "RunReport",
]

_AXES = {"x": (math.pi / 2, 0.0), "y": (math.pi / 2, math.pi / 2), "z": (0.0, 0.0)}


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    ops: OperatorTuple
    rho: DensityMatrix
    descriptors: tuple = ()

    @property
    def dimension(self) -> int:
        return self.ops.dim

    @property
    def labels(self) -> tuple:
        return self.ops.labels


def _number(value, where) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"expected a number, got {value!r}", field=where)
    if not math.isfinite(value):
        raise ParseError("number is not finite", field=where)
    return float(value)


def _complex(value, where) -> complex:
    if isinstance(value, list):
        if len(value) != 2:
            raise ParseError("complex entries are [re, im] pairs", field=where)
        return complex(_number(value[0], f"{where}[0]"), _number(value[1], f"{where}[1]"))
    return complex(_number(value, where))


def _matrix(value, where) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(row, list) for row in value):
        raise ParseError("matrix must be a non-empty list of rows", field=where)
    d = len(value)
    if any(len(row) != d for row in value):
        raise ParseError(f"matrix must be square ({d} rows)", field=where)
    return np.array([[_complex(x, f"{where}[{i}][{k}]") for k, x in enumerate(row)] for i, row in enumerate(value)])


def _operator(desc, where) -> tuple:
    if not isinstance(desc, dict):
        raise ParseError("operator must be an object", field=where)
    label = desc.get("label")
    if "matrix" in desc:
        return make_hermitian(_matrix(desc["matrix"], f"{where}.matrix")), label
    missing = [key for key in ("j", "theta", "phi") if key not in desc]
    if missing:
        raise ParseError(f"spin descriptor lacks {', '.join(missing)}", field=where)
    norm = desc.get("normalization", Normalization.HBAR.value)
    op = spin_operator(
        _number(desc["j"], f"{where}.j"),
        _number(desc["theta"], f"{where}.theta"),
        _number(desc["phi"], f"{where}.phi"),
        norm,
    )
    return op, label


def _spin_of(descs):
    for desc in descs:
        if isinstance(desc, dict) and "j" in desc:
            return desc["j"], desc.get("normalization", Normalization.HBAR.value)
    return None


def _state(desc, ops: OperatorTuple, op_descs) -> DensityMatrix:
    if desc == "maximally-mixed" or desc is None:
        return maximally_mixed(ops.dim)
    if not isinstance(desc, dict):
        raise ParseError(f"unknown state {desc!r}", field="state")
    kind = desc.get("kind", "explicit" if "matrix" in desc else None)
    if kind == "maximally-mixed":
        return maximally_mixed(ops.dim)
    if kind == "explicit":
        if "matrix" not in desc:
            raise ParseError("explicit state needs a matrix", field="state")
        return make_density(_matrix(desc["matrix"], "state.matrix"))
    if kind == "eigenstate":
        axis = desc.get("axis")
        sign = desc.get("sign", 1)
        if sign not in (1, -1):
            raise ParseError("sign must be 1 or -1", field="state.sign")
        if isinstance(axis, int) and not isinstance(axis, bool):
            if not 0 <= axis < ops.n:
                raise ParseError(f"axis {axis} is not an operator index", field="state.axis")
            return eigenstate(ops[axis], sign)
        if axis in _AXES:
            spin = _spin_of(op_descs)
            if spin is None:
                raise ParseError("named axes need at least one spin descriptor", field="state.axis")
            theta, phi = _AXES[axis]
            return eigenstate(spin_operator(spin[0], theta, phi, spin[1]), sign)
        raise ParseError(f"axis must be an operator index or x/y/z, got {axis!r}", field="state.axis")
    raise ParseError(f"unknown state kind {kind!r}", field="state.kind")


def problem_from_mapping(data) -> ProblemSpec:
    if not isinstance(data, dict):
        raise ParseError("problem must be a JSON object")
    descs = data.get("operators")
    if not isinstance(descs, list) or not descs:
        raise ParseError("need a non-empty list", field="operators")
    parsed = [_operator(desc, f"operators[{k}]") for k, desc in enumerate(descs)]
    labels = data.get("labels") or [lab or f"A{k + 1}" for k, (_, lab) in enumerate(parsed)]
    if len(labels) != len(parsed):
        raise ParseError("one label per operator", field="labels")
    ops = OperatorTuple.of(*(op for op, _ in parsed), labels=[str(lab) for lab in labels])
    if "dimension" in data and data["dimension"] != ops.dim:
        raise ParseError(f"declared dimension {data['dimension']} but operators are {ops.dim}x{ops.dim}", field="dimension")
    rho = _state(data.get("state"), ops, descs)
    if rho.dim != ops.dim:
        raise ValidationError(f"state dimension {rho.dim} differs from operator dimension {ops.dim}")
    return ProblemSpec(ops, rho, tuple(descs))


def parse_problem(path) -> ProblemSpec:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    return problem_from_mapping(data)


def format_float(x) -> str:
    # 17 significant digits round-trip any double; +0.0 folds away -0.0
    return "%.17g" % (float(x) + 0.0)


def measure_to_csv(mu: SignedDiscreteMeasure) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"x{k + 1}" for k in range(mu.ndim)] + ["weight"])
    for point, w in mu:
        writer.writerow([format_float(c) for c in point] + [format_float(w)])
    return buf.getvalue()


def write_measure_csv(mu: SignedDiscreteMeasure, path) -> Path:
    path = Path(path)
    path.write_text(measure_to_csv(mu))
    return path


def read_measure_csv(path) -> SignedDiscreteMeasure:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError("empty file", line=1)
    header = rows[0]
    n = len(header) - 1
    if n < 1 or header != [f"x{k + 1}" for k in range(n)] + ["weight"]:
        raise ParseError("header must be x1,...,xn,weight", line=1)
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != n + 1:
            raise ParseError(f"expected {n + 1} columns, got {len(row)}", line=lineno)
        try:
            values.append([float(v) for v in row])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from exc
    arr = np.array(values, dtype=float).reshape(-1, n + 1)
    return signed_measure(arr[:, :n], arr[:, n], keep_zero=True)


def density_to_csv(grid: DensityGrid) -> str:
    x1, x2 = grid.axes()
    lines = ["x1,x2,value"]
    for i, a in enumerate(x1):
        for k, b in enumerate(x2):
            lines.append(f"{format_float(a)},{format_float(b)},{format_float(grid.values[i, k])}")
    return "\n".join(lines) + "\n"


def write_density_csv(grid: DensityGrid, path) -> Path:
    path = Path(path)
    path.write_text(density_to_csv(grid))
    return path


def density_to_pgm(grid: DensityGrid) -> tuple:
    """(P2 text, sidecar dict).  Image rows run from the top x2 value down,
    columns along x1; grey level is linear in value over [min, max]."""
    v = grid.values
    lo, hi = float(v.min()), float(v.max())
    span = hi - lo
    pix = np.zeros(v.shape, dtype=int) if span == 0 else np.rint((v - lo) / span * 255).astype(int)
    image = pix.T[::-1]
    rows, cols = image.shape
    lines = ["P2", f"{cols} {rows}", "255"]
    lines += [" ".join(str(p) for p in row) for row in image]
    sidecar = {
        "min": lo,
        "max": hi,
        "extent": [list(map(float, pair)) for pair in grid.extent],
        "resolution": [int(r) for r in grid.resolution],
        "epsilon": grid.epsilon,
        "kernel": grid.kernel,
    }
    return "\n".join(lines) + "\n", sidecar


def write_pgm(grid: DensityGrid, path) -> tuple:
    path = Path(path)
    text, sidecar = density_to_pgm(grid)
    path.write_text(text)
    side = path.with_suffix(".json")
    side.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return path, side


def read_pgm(path) -> tuple:
    """(pixels in grid orientation, sidecar dict or None)."""
    path = Path(path)
    tokens = []
    for line in path.read_text().splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    if not tokens or tokens[0] != "P2":
        raise ParseError("not an ASCII PGM (P2) file", line=1)
    cols, rows, top = int(tokens[1]), int(tokens[2]), int(tokens[3])
    data = np.array([int(t) for t in tokens[4:]], dtype=int)
    if data.size != rows * cols or top != 255:
        raise ParseError("pixel count or depth does not match the header")
    pixels = data.reshape(rows, cols)[::-1].T
    side = path.with_suffix(".json")
    sidecar = json.loads(side.read_text()) if side.exists() else None
    return pixels, sidecar


def pgm_to_values(pixels, sidecar) -> np.ndarray:
    lo, hi = sidecar["min"], sidecar["max"]
    return lo + np.asarray(pixels, dtype=float) / 255 * (hi - lo)


def grid_from_sidecar(sidecar) -> GridSpec:
    return GridSpec(tuple(tuple(p) for p in sidecar["extent"]), tuple(sidecar["resolution"]))


@dataclass(frozen=True)
class ConvergenceRow:
    m: int
    sup_distance: float
    trotter_bound: float
    smeared_distance: float


def convergence_to_csv(rows) -> str:
    lines = ["m,sup_qcf_distance,trotter_bound,smeared_sup_distance"]
    for r in rows:
        lines.append(
            f"{r.m},{format_float(r.sup_distance)},{format_float(r.trotter_bound)},{format_float(r.smeared_distance)}"
        )
    return "\n".join(lines) + "\n"


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    runtime: float = 0.0
    detail: str = ""

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"


@dataclass
class RunReport:
    suite: str
    checks: list = field(default_factory=list)

    def add(self, result: CheckResult):
        if any(c.name == result.name for c in self.checks):
            raise ValueError(f"check {result.name!r} recorded twice")
        self.checks.append(result)

    def run(self, name, fn, tolerance, compare="le"):
        """Time ``fn()`` and record value against tolerance (``le``: value <= tol)."""
        t0 = time.perf_counter()
        try:
            value = float(fn())
            passed = value <= tolerance if compare == "le" else value >= tolerance
            detail = ""
        except Exception as exc:  # a crashing check is a failed check
            value, passed, detail = math.nan, False, f"{type(exc).__name__}: {exc}"
        self.add(CheckResult(name, bool(passed), value, tolerance, time.perf_counter() - t0, detail))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        checks = []
        for c in self.checks:
            d = asdict(c)
            d["status"] = c.status
            d["value"] = None if math.isnan(c.value) else c.value
            checks.append(d)
        return {"suite": self.suite, "passed": self.passed, "checks": checks}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"
