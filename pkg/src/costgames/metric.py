"""Distance matrices over a depot and n players: validation, generation, closure, I/O.

Node 0 is always the depot; players sit at indices 1..n.  All comparisons use
the absolute tolerance TOL_METRIC.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .errors import EmptyInstanceError, MetricError, ShapeError

TOL_METRIC = 1e-9
INSTANCE_FORMAT = "tsg-instance/v1"


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Square (n+1) x (n+1) matrix of nonnegative travel costs; row 0 is the depot.

    The symmetric flag records whether entries[i][j] == entries[j][i] within
    TOL_METRIC; asymmetric matrices are first-class citizens, but spanning-tree
    operations refuse them.
    """

    entries: np.ndarray
    symmetric: bool

    @classmethod
    def from_entries(cls, entries: Any, tol: float = TOL_METRIC) -> "DistanceMatrix":
        arr = np.array(entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ShapeError(f"distance matrix must be square, got shape {arr.shape}")
        if arr.shape[0] < 2:
            raise EmptyInstanceError("need the depot plus at least one player")
        if not np.all(np.isfinite(arr)):
            raise MetricError("distance matrix entries must be finite")
        arr.flags.writeable = False
        symmetric = bool(np.max(np.abs(arr - arr.T)) <= tol)
        return cls(arr, symmetric)

    @property
    def size(self) -> int:
        return int(self.entries.shape[0])

    @property
    def n(self) -> int:
        """Number of players (depot excluded)."""
        return self.size - 1

    def d(self, i: int, j: int) -> float:
        return float(self.entries[i, j])


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the metric axioms scan.

    Each violation is (kind, indices, magnitude): kind "diagonal" with (i,),
    kind "negative" with (i, j), or kind "triangle" with (i, k, j) meaning
    d[i][j] exceeds d[i][k] + d[k][j] by magnitude.
    """

    valid: bool
    violations: tuple[tuple[str, tuple[int, ...], float], ...]


def validate_metric(m: DistanceMatrix | Any, tol: float = TOL_METRIC) -> ValidationReport:
    """Exhaustively check nonnegativity, zero diagonal and every triangle.

    Accepts a DistanceMatrix or anything array-like; a non-square input raises
    ShapeError.  Violations are reported in deterministic (row-major) order.
    """
    if isinstance(m, DistanceMatrix):
        arr = m.entries
    else:
        arr = np.asarray(m, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ShapeError(f"distance matrix must be square, got shape {arr.shape}")
    violations: list[tuple[str, tuple[int, ...], float]] = []
    size = arr.shape[0]
    for i in range(size):
        if abs(arr[i, i]) > tol:
            violations.append(("diagonal", (i,), float(abs(arr[i, i]))))
    neg = np.argwhere(arr < -tol)
    for i, j in neg:
        violations.append(("negative", (int(i), int(j)), float(-arr[i, j])))
    # excess[i, k, j] = d[i][j] - d[i][k] - d[k][j]
    excess = arr[:, None, :] - arr[:, :, None] - arr[None, :, :]
    bad = np.argwhere(excess > tol)
    for i, k, j in bad:
        violations.append(("triangle", (int(i), int(k), int(j)), float(excess[i, k, j])))
    return ValidationReport(valid=not violations, violations=tuple(violations))


def metric_closure(entries: Any, tol: float = TOL_METRIC) -> DistanceMatrix:
    """Shortest-path (Floyd-Warshall) closure of a nonnegative matrix.

    Requires nonnegative entries and a zero diagonal.  The result is entrywise
    <= the input, satisfies the triangle inequality, and is a bit-exact fixed
    point: closing the output again returns it unchanged.
    """
    if isinstance(entries, DistanceMatrix):
        entries = entries.entries
    arr = np.array(entries, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"matrix must be square, got shape {arr.shape}")
    if np.any(arr < 0):
        raise MetricError("metric closure requires nonnegative entries")
    if np.any(np.diagonal(arr) != 0.0):
        raise MetricError("metric closure requires a zero diagonal")
    size = arr.shape[0]
    while True:
        before = arr.copy()
        for k in range(size):
            np.minimum(arr, np.add.outer(arr[:, k], arr[k, :]), out=arr)
        if np.array_equal(before, arr):
            break
    return DistanceMatrix.from_entries(arr, tol=tol)


def gen_euclidean(n: int, seed: int, box: float = 100.0) -> DistanceMatrix:
    """Euclidean instance: depot plus n points drawn uniformly from [0, box]^2.

    Deterministic for a fixed (n, seed); distances are exactly symmetric.
    """
    if n < 1:
        raise EmptyInstanceError(f"need at least one player, got n={n}")
    if box <= 0:
        raise ValueError(f"box side must be positive, got {box}")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, box, size=(n + 1, 2))
    diff = pts[:, None, :] - pts[None, :, :]
    arr = np.sqrt(np.sum(diff * diff, axis=2))
    return DistanceMatrix.from_entries(arr)


def gen_asymmetric_metric(n: int, seed: int, low: float = 1.0, high: float = 100.0) -> DistanceMatrix:
    """Asymmetric instance: uniform entries in [low, high], then shortest-path closure."""
    if n < 1:
        raise EmptyInstanceError(f"need at least one player, got n={n}")
    if not 0 <= low <= high:
        raise ValueError(f"need 0 <= low <= high, got [{low}, {high}]")
    rng = np.random.default_rng(seed)
    arr = rng.uniform(low, high, size=(n + 1, n + 1))
    np.fill_diagonal(arr, 0.0)
    return metric_closure(arr)


def save_instance(m: DistanceMatrix, path: str | Path, seed: int | None = None,
                  generator: str | None = None) -> Path:
    """Write an instance file; regenerating with the same inputs is byte-identical."""
    path = Path(path)
    doc: dict[str, Any] = {
        "format": INSTANCE_FORMAT,
        "n": m.n,
        "symmetric": m.symmetric,
        "seed": seed,
        "matrix": [[float(x) for x in row] for row in m.entries],
    }
    if generator is not None:
        doc["generator"] = generator
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


def load_instance(path: str | Path) -> tuple[DistanceMatrix, dict[str, Any]]:
    """Read and validate an instance file; invalid metrics are rejected, never repaired.

    Returns the matrix plus the raw metadata dict (format, n, symmetric, seed, ...).
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise MetricError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or doc.get("format") != INSTANCE_FORMAT:
        raise MetricError(f"{path}: expected format {INSTANCE_FORMAT!r}")
    try:
        n = int(doc["n"])
        matrix = doc["matrix"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MetricError(f"{path}: missing or malformed fields ({exc})") from exc
    m = DistanceMatrix.from_entries(matrix)
    if m.n != n:
        raise MetricError(f"{path}: matrix is {m.size}x{m.size} but n={n}")
    report = validate_metric(m)
    if not report.valid:
        first = report.violations[0]
        raise MetricError(
            f"{path}: not a metric ({len(report.violations)} violations; "
            f"first: {first[0]} at {first[1]}, magnitude {first[2]:.3g})")
    if bool(doc.get("symmetric")) != m.symmetric:
        raise MetricError(f"{path}: symmetric flag does not match the matrix")
    return m, doc
