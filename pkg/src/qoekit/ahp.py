"""Pairwise-comparison weighting of quality criteria.

Multiple evaluators judge the relative importance of criteria pair by
pair on the 9-level intensity scale.  Their judgment sets are aggregated
into one positive comparison matrix, criterion weights are derived from
it (column-normalize-and-average by default, principal eigenvector as the
alternative) and judgment coherence is summarized as a consistency ratio.

Aggregated matrices need not be reciprocal: the arithmetic mean of
reciprocal matrices generally is not, and the default aggregation keeps
that property on purpose so published non-reciprocal tables can be
reproduced.  The geometric mean preserves reciprocity.

All operations are pure functions on immutable values.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

SAATY_MIN = 1.0 / 9.0
SAATY_MAX = 9.0

#: Random-index table for the consistency ratio, by matrix order.
RANDOM_INDEX = {
    1: 0.00, 2: 0.00, 3: 0.58, 4: 0.90, 5: 1.12,
    6: 1.24, 7: 1.32, 8: 1.41, 9: 1.45, 10: 1.49,
}

#: Conventional acceptance threshold for the consistency ratio.
CR_THRESHOLD = 0.1

AGGREGATION_METHODS = ("arithmetic-mean", "geometric-mean")
WEIGHT_METHODS = ("column-average", "eigenvector")

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000


class ConvergenceError(RuntimeError):
    """Raised when power iteration fails to converge within its budget."""


def _check_criteria(criteria: tuple[str, ...]) -> None:
    if not criteria:
        raise ValueError("criteria must be non-empty")
    for c in criteria:
        if not isinstance(c, str) or not c:
            raise ValueError(f"criterion labels must be non-empty strings, got {c!r}")
    if len(set(criteria)) != len(criteria):
        raise ValueError(f"criterion labels must be unique, got {criteria}")


@dataclass(frozen=True)
class JudgmentSet:
    """One evaluator's pairwise importance judgments.

    ``judgments`` holds exactly one value per unordered criterion pair, in
    either orientation; the reciprocal orientation is implied.  Values must
    lie within [1/9, 9].
    """

    evaluator_id: str
    criteria: tuple[str, ...]
    judgments: dict[tuple[str, str], float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "criteria", tuple(self.criteria))
        object.__setattr__(
            self,
            "judgments",
            {(str(a), str(b)): float(v) for (a, b), v in self.judgments.items()},
        )
        _check_criteria(self.criteria)
        seen: set[frozenset[str]] = set()
        for (a, b), value in self.judgments.items():
            if a not in self.criteria or b not in self.criteria or a == b:
                raise ValueError(f"judgment pair ({a!r}, {b!r}) is not a valid pair")
            key = frozenset((a, b))
            if key in seen:
                raise ValueError(f"duplicate judgment for pair {a!r}/{b!r}")
            seen.add(key)
            if not SAATY_MIN <= value <= SAATY_MAX:
                raise ValueError(
                    f"judgment {a!r} vs {b!r} is {value}, outside [1/9, 9]"
                )
        expected = {frozenset(p) for p in combinations(self.criteria, 2)}
        missing = expected - seen
        if missing:
            pair = sorted(next(iter(missing)))
            raise ValueError(f"missing judgment for pair {pair[0]!r}/{pair[1]!r}")

    def value(self, a: str, b: str) -> float:
        """Judged importance of ``a`` relative to ``b`` (reciprocal implied)."""
        if (a, b) in self.judgments:
            return self.judgments[(a, b)]
        return 1.0 / self.judgments[(b, a)]

    def matrix(self) -> "PairwiseMatrix":
        """Expand to a full reciprocal comparison matrix."""
        n = len(self.criteria)
        cells = np.ones((n, n))
        for i, a in enumerate(self.criteria):
            for j, b in enumerate(self.criteria):
                if i != j:
                    cells[i, j] = self.value(a, b)
        return PairwiseMatrix(self.criteria, cells)


@dataclass(frozen=True)
class PairwiseMatrix:
    """Square positive criterion-importance matrix with unit diagonal.

    Reciprocity is not required; aggregated matrices usually lack it.
    """

    criteria: tuple[str, ...]
    cells: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "criteria", tuple(self.criteria))
        _check_criteria(self.criteria)
        cells = np.array(self.cells, dtype=float)
        n = len(self.criteria)
        if cells.shape != (n, n):
            raise ValueError(
                f"cells must be {n}x{n} for {n} criteria, got {cells.shape}"
            )
        if not np.all(cells > 0):
            raise ValueError("all matrix cells must be positive")
        if not np.all(np.diag(cells) == 1.0):
            raise ValueError("matrix diagonal must be exactly 1")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def n(self) -> int:
        return len(self.criteria)

    def cell(self, a: str, b: str) -> float:
        return float(self.cells[self.criteria.index(a), self.criteria.index(b)])

    def permuted(self, order: tuple[str, ...]) -> "PairwiseMatrix":
        """Reindex rows and columns to the given criteria order."""
        idx = [self.criteria.index(c) for c in order]
        return PairwiseMatrix(tuple(order), self.cells[np.ix_(idx, idx)])


@dataclass(frozen=True)
class WeightVector:
    """Normalized per-criterion coefficients: nonnegative, summing to 1."""

    criteria: tuple[str, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "criteria", tuple(self.criteria))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        _check_criteria(self.criteria)
        if len(self.values) != len(self.criteria):
            raise ValueError("one weight per criterion required")
        if any(v < 0 for v in self.values):
            raise ValueError(f"weights must be nonnegative, got {self.values}")
        total = sum(self.values)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1 within 1e-9, got {total!r}")

    def __getitem__(self, criterion: str) -> float:
        return self.values[self.criteria.index(criterion)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.criteria, self.values))


@dataclass(frozen=True)
class ConsistencyReport:
    """Judgment-coherence summary: principal eigenvalue, CI, CR, verdict."""

    lambda_max: float
    consistency_index: float
    consistency_ratio: float
    acceptable: bool


def aggregate_judgments(
    sets: list[JudgmentSet], method: str = "arithmetic-mean"
) -> PairwiseMatrix:
    """Combine evaluators' judgment sets into one comparison matrix.

    Each evaluator's judgments are first expanded to a full reciprocal
    matrix, then cells are averaged element-wise.  The arithmetic mean
    (default) does not preserve reciprocity; the geometric mean does.
    """
    if method not in AGGREGATION_METHODS:
        raise ValueError(
            f"method must be one of {AGGREGATION_METHODS}, got {method!r}"
        )
    if not sets:
        raise ValueError("at least one judgment set is required")
    criteria = sets[0].criteria
    stack = []
    for js in sets:
        if set(js.criteria) != set(criteria):
            raise ValueError(
                f"evaluator {js.evaluator_id!r} covers criteria "
                f"{sorted(js.criteria)}, expected {sorted(criteria)}"
            )
        m = js.matrix()
        if js.criteria != criteria:
            m = m.permuted(criteria)
        stack.append(m.cells)
    arr = np.stack(stack)
    if method == "arithmetic-mean":
        cells = arr.mean(axis=0)
    else:
        cells = np.exp(np.log(arr).mean(axis=0))
    np.fill_diagonal(cells, 1.0)
    return PairwiseMatrix(criteria, cells)


def column_average_weights(
    matrix: PairwiseMatrix,
) -> tuple[WeightVector, np.ndarray]:
    """Derive weights by normalizing each column to sum 1 and averaging rows.

    Returns the weight vector and the column-normalized table it was
    averaged from (same shape and ordering as the input matrix).
    """
    normalized = matrix.cells / matrix.cells.sum(axis=0)
    weights = normalized.mean(axis=1)
    weights = weights / weights.sum()
    return WeightVector(matrix.criteria, tuple(weights)), normalized


def _power_iteration(
    cells: np.ndarray, tol: float, max_iter: int
) -> tuple[np.ndarray, float]:
    """Principal right eigenvector and eigenvalue of a positive matrix."""
    n = cells.shape[0]
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        y = cells @ x
        lam = float(y.sum())  # x is L1-normalized, so sum(Ax)/sum(x) = sum(y)
        y = y / y.sum()
        if float(np.max(np.abs(y - x))) < tol:
            return y, lam
        x = y
    raise ConvergenceError(
        f"power iteration did not converge within {max_iter} iterations (tol={tol})"
    )


def eigenvector_weights(
    matrix: PairwiseMatrix,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> WeightVector:
    """Derive weights as the normalized principal right eigenvector.

    Power iteration converges for any positive matrix, reciprocal or not.
    Raises :class:`ConvergenceError` if the iteration budget is exhausted.
    """
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    vec, _ = _power_iteration(matrix.cells, tol, max_iter)
    return WeightVector(matrix.criteria, tuple(vec))


def consistency(
    matrix: PairwiseMatrix,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> ConsistencyReport:
    """Consistency ratio of a comparison matrix.

    CI = (lambda_max - n)/(n - 1), CR = CI/RI(n) against the standard
    random-index table; acceptable at CR <= 0.1.  For n = 2 the random
    index is 0 and CR is reported as 0 (always acceptable).
    """
    n = matrix.n
    if n < 2:
        raise ValueError("consistency requires at least 2 criteria")
    _, lam = _power_iteration(matrix.cells, tol, max_iter)
    ci = (lam - n) / (n - 1)
    ri = RANDOM_INDEX.get(n, RANDOM_INDEX[10])
    cr = 0.0 if ri == 0.0 else ci / ri
    return ConsistencyReport(
        lambda_max=lam,
        consistency_index=ci,
        consistency_ratio=cr,
        acceptable=cr <= CR_THRESHOLD,
    )


# ---------------------------------------------------------------------------
# File formats: judgment sets as JSON, matrices and weight tables as CSV.

def read_judgments(path: str | Path) -> JudgmentSet:
    """Read a judgment set from its JSON layout.

    Expected shape: {"evaluator_id": ..., "criteria": [...],
    "judgments": [{"a": ..., "b": ..., "value": ...}, ...]}.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid judgment JSON: {exc}") from exc
    try:
        judgments = {
            (str(j["a"]), str(j["b"])): float(j["value"]) for j in data["judgments"]
        }
        return JudgmentSet(
            evaluator_id=str(data["evaluator_id"]),
            criteria=tuple(data["criteria"]),
            judgments=judgments,
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: malformed judgment document: {exc}") from exc


def judgments_to_dict(js: JudgmentSet) -> dict:
    return {
        "evaluator_id": js.evaluator_id,
        "criteria": list(js.criteria),
        "judgments": [
            {"a": a, "b": b, "value": v} for (a, b), v in sorted(js.judgments.items())
        ],
    }


def write_judgments(js: JudgmentSet, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(judgments_to_dict(js), fh, indent=2)
        fh.write("\n")


def read_matrix_csv(path: str | Path) -> PairwiseMatrix:
    """Read a comparison matrix from CSV: header row of criteria, one
    labeled row per criterion."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if len(rows) < 2:
        raise ValueError(f"{path}: matrix CSV needs a header and data rows")
    criteria = tuple(c.strip() for c in rows[0][1:])
    n = len(criteria)
    cells = np.ones((n, n))
    if len(rows) - 1 != n:
        raise ValueError(f"{path}: expected {n} data rows, got {len(rows) - 1}")
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != n + 1:
            raise ValueError(f"{path}: line {i}: expected {n + 1} columns")
        label = row[0].strip()
        if label != criteria[i - 2]:
            raise ValueError(
                f"{path}: line {i}: row label {label!r} does not match "
                f"column order {criteria}"
            )
        for j, text in enumerate(row[1:]):
            try:
                cells[i - 2, j] = float(text)
            except ValueError as exc:
                raise ValueError(f"{path}: line {i}: bad cell {text!r}") from exc
    return PairwiseMatrix(criteria, cells)


def matrix_to_csv_text(matrix: PairwiseMatrix, corner: str = "Importance") -> str:
    """Render a matrix as CSV with labeled rows and columns, full precision."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow([corner, *matrix.criteria])
    for label, row in zip(matrix.criteria, matrix.cells):
        writer.writerow([label, *[repr(float(v)) for v in row]])
    return buf.getvalue()


def write_matrix_csv(
    matrix: PairwiseMatrix, path: str | Path, corner: str = "Importance"
) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(matrix_to_csv_text(matrix, corner))


def weight_table_to_csv_text(
    criteria: tuple[str, ...],
    normalized: np.ndarray,
    weights: WeightVector,
    corner: str = "Weight",
) -> str:
    """Render the normalized table plus a trailing per-row Average column."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow([corner, *criteria, "Average"])
    for label, row, w in zip(criteria, normalized, weights.values):
        writer.writerow([label, *[repr(float(v)) for v in row], repr(float(w))])
    return buf.getvalue()


def write_weight_table_csv(
    criteria: tuple[str, ...],
    normalized: np.ndarray,
    weights: WeightVector,
    path: str | Path,
    corner: str = "Weight",
) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(weight_table_to_csv_text(criteria, normalized, weights, corner))
