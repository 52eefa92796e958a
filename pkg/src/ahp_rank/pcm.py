"""Data model, validation and file I/O for incomplete pairwise-comparison matrices.

A matrix entry ``a[i, j] > 0`` is the stated ratio of importance of alternative
``i`` over alternative ``j``; an exact ``0.0`` encodes a missing comparison.
Present pairs must be reciprocal (``a[i, j] * a[j, i] = 1``) and the diagonal
must be 1. Reciprocity is validated, never silently repaired.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    BadDiagonalError,
    NegativeEntryError,
    NonSquareError,
    OneSidedComparisonError,
    ParseError,
    ReciprocityViolationError,
    SaatyRangeWarning,
)

RECIPROCITY_RTOL = 1e-9
SAATY_MIN, SAATY_MAX = 1.0 / 9.0, 9.0

SUM_ONE = "sum-one"
COMPONENT_ONE_FIXED = "component-one-fixed"

# Serialized numbers carry 12 significant digits everywhere.
SIGNIFICANT_DIGITS = 12


def format_number(x: float) -> str:
    return f"{float(x):.{SIGNIFICANT_DIGITS}g}"


def _frozen_array(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class IncompletePCM:
    """A validated incomplete pairwise-comparison matrix.

    Immutable after construction; safe to share across threads. Use
    :func:`validate` to build one from raw data.
    """

    n: int
    entries: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", _frozen_array(self.entries))

    @property
    def present(self) -> np.ndarray:
        """Boolean mask of compared off-diagonal pairs."""
        return (self.entries > 0) & ~np.eye(self.n, dtype=bool)

    def edges(self) -> list[tuple[int, int]]:
        """Compared unordered pairs as (i, j) with i < j, in index order."""
        mask = self.present
        return [(i, j) for i in range(self.n) for j in range(i + 1, self.n) if mask[i, j]]

    def is_complete(self) -> bool:
        return bool(self.present.sum() == self.n * (self.n - 1))

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels else f"a{i + 1}"


@dataclass(frozen=True)
class PriorityVector:
    """A positive weight vector together with its log-domain image.

    ``normalization`` is either ``"sum-one"`` (weights sum to one) or
    ``"component-one-fixed"`` (some component equals one).
    """

    weights: np.ndarray
    normalization: str = SUM_ONE
    log_weights: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a nonempty vector")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("all weights must be finite and strictly positive")
        if self.normalization not in (SUM_ONE, COMPONENT_ONE_FIXED):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if self.normalization == SUM_ONE and abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("sum-one vector does not sum to one within 1e-12")
        y = np.log(w) if self.log_weights is None else np.asarray(self.log_weights, dtype=float)
        # exp(log_weights) must be proportional to weights.
        ratio = np.exp(y) / w
        if np.max(np.abs(ratio / ratio[0] - 1.0)) > 1e-12:
            raise ValueError("log_weights are not proportional to weights")
        object.__setattr__(self, "weights", _frozen_array(w))
        object.__setattr__(self, "log_weights", _frozen_array(y))

    @property
    def n(self) -> int:
        return int(self.weights.size)

    @staticmethod
    def from_weights(w: np.ndarray, normalization: str = SUM_ONE) -> "PriorityVector":
        w = np.asarray(w, dtype=float)
        if normalization == SUM_ONE:
            w = w / w.sum()
        return PriorityVector(weights=w, normalization=normalization)

    @staticmethod
    def from_log_weights(y: np.ndarray) -> "PriorityVector":
        """Sum-one vector from unnormalized log-weights, keeping the raw logs."""
        y = np.asarray(y, dtype=float)
        w = np.exp(y - y.max())  # overflow guard; scale drops out below
        return PriorityVector(weights=w / w.sum(), normalization=SUM_ONE, log_weights=y)

    def rescaled(self, c: float) -> "PriorityVector":
        return PriorityVector(
            weights=self.weights * c,
            normalization=COMPONENT_ONE_FIXED,
            log_weights=self.log_weights + math.log(c),
        )


def validate(raw, labels: tuple[str, ...] | None = None) -> IncompletePCM:
    """Validate a raw square array into an :class:`IncompletePCM`.

    Missing pairs are exactly the zero entries. NaN is rejected, not treated
    as missing. Present ratios outside the conventional [1/9, 9] scale raise
    a :class:`SaatyRangeWarning` but are accepted.
    """
    a = np.asarray(raw, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonSquareError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n < 2:
        raise NonSquareError("need at least two alternatives")
    if labels is not None and len(labels) != n:
        raise NonSquareError(f"{len(labels)} labels for {n} alternatives")

    for i in range(n):
        for j in range(n):
            v = a[i, j]
            if not np.isfinite(v) or v < 0:
                raise NegativeEntryError(i, j, v)

    for i in range(n):
        if abs(a[i, i] - 1.0) > RECIPROCITY_RTOL:
            raise BadDiagonalError(i, a[i, i])

    out_of_scale = []
    for i in range(n):
        for j in range(i + 1, n):
            pij, pji = a[i, j] > 0, a[j, i] > 0
            if pij != pji:
                raise OneSidedComparisonError(i, j)
            if pij:
                prod = a[i, j] * a[j, i]
                if abs(prod - 1.0) > RECIPROCITY_RTOL:
                    raise ReciprocityViolationError(i, j, prod)
                if not (SAATY_MIN - 1e-12 <= a[i, j] <= SAATY_MAX + 1e-12):
                    out_of_scale.append((i, j))
    if out_of_scale:
        warnings.warn(
            f"{len(out_of_scale)} ratio(s) outside [1/9, 9], first at {out_of_scale[0]}",
            SaatyRangeWarning,
            stacklevel=2,
        )
    return IncompletePCM(n=n, entries=a, labels=tuple(labels) if labels else None)


def _parse_cell(cell: str, line: int, column: int) -> float:
    text = cell.strip()
    if text == "":
        return 0.0
    if "/" in text:
        num, _, den = text.partition("/")
        try:
            return float(Fraction(int(num.strip()), int(den.strip())))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad rational {text!r}: {exc}", line, column) from None
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"bad number {text!r}", line, column) from None


def parse_matrix(text: str, fmt: str = "csv", labels: tuple[str, ...] | None = None) -> IncompletePCM:
    """Parse and validate a matrix from CSV or JSON text.

    CSV: one row per line, comma-separated cells that are decimals or
    rationals like ``"1/2"``; empty cells and ``0`` both mean missing.
    Lines starting with ``#`` are skipped. JSON: an object with ``n``,
    optional ``labels`` and ``entries``.
    """
    if fmt == "csv":
        rows: list[list[float]] = []
        width = None
        for lineno, line in enumerate(text.splitlines(), start=1):
            if line.strip() == "" or line.lstrip().startswith("#"):
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise ParseError(f"expected {width} cells, got {len(cells)}", lineno)
            rows.append([_parse_cell(c, lineno, k + 1) for k, c in enumerate(cells)])
        if not rows:
            raise ParseError("no data rows")
        return validate(np.array(rows, dtype=float), labels=labels)
    if fmt == "json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
        if not isinstance(doc, dict) or "entries" not in doc:
            raise ParseError("JSON matrix must be an object with an 'entries' field")
        entries = doc["entries"]
        n = doc.get("n", len(entries))
        if n != len(entries):
            raise ParseError(f"declared n={n} but {len(entries)} rows present")
        raw_labels = doc.get("labels")
        return validate(
            np.array(entries, dtype=float),
            labels=tuple(raw_labels) if raw_labels else labels,
        )
    raise ValueError(f"unknown format {fmt!r}")


def serialize_matrix(pcm: IncompletePCM, fmt: str = "csv") -> str:
    """Deterministic text form; round-trips through :func:`parse_matrix`."""
    if fmt == "csv":
        lines = []
        for i in range(pcm.n):
            lines.append(
                ",".join(
                    format_number(pcm.entries[i, j]) if pcm.entries[i, j] != 0 else "0"
                    for j in range(pcm.n)
                )
            )
        return "\n".join(lines) + "\n"
    if fmt == "json":
        doc = {
            "n": pcm.n,
            "labels": list(pcm.labels) if pcm.labels else None,
            "entries": [
                [float(format_number(pcm.entries[i, j])) for j in range(pcm.n)]
                for i in range(pcm.n)
            ],
        }
        return json.dumps(doc, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def serialize_weights(pv: PriorityVector, fmt: str = "csv") -> str:
    """Deterministic text form of a priority vector, 12 significant digits."""
    if fmt == "csv":
        header = f"# normalization={pv.normalization}"
        return header + "\n" + ",".join(format_number(w) for w in pv.weights) + "\n"
    if fmt == "json":
        doc = {
            "normalization": pv.normalization,
            "weights": [float(format_number(w)) for w in pv.weights],
        }
        return json.dumps(doc, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def parse_weights(text: str, fmt: str = "csv") -> PriorityVector:
    """Inverse of :func:`serialize_weights` up to 12 significant digits."""
    if fmt == "csv":
        normalization = SUM_ONE
        values: list[float] | None = None
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if stripped == "":
                continue
            if stripped.startswith("#"):
                if "normalization=" in stripped:
                    normalization = stripped.split("normalization=", 1)[1].strip()
                continue
            if values is not None:
                raise ParseError("multiple weight rows", lineno)
            values = [_parse_cell(c, lineno, k + 1) for k, c in enumerate(stripped.split(","))]
        if not values:
            raise ParseError("no weight row found")
        w = np.asarray(values, dtype=float)
        if np.any(w <= 0):
            raise ParseError("weights must be strictly positive")
        if normalization == SUM_ONE:
            w = w / w.sum()  # absorb serialization rounding
        return PriorityVector(weights=w, normalization=normalization)
    if fmt == "json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
        w = np.asarray(doc["weights"], dtype=float)
        normalization = doc.get("normalization", SUM_ONE)
        if normalization == SUM_ONE:
            w = w / w.sum()
        return PriorityVector(weights=w, normalization=normalization)
    raise ValueError(f"unknown format {fmt!r}")
