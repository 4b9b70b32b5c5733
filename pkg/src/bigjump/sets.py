"""Polyhedral rare-set geometry for non-negative risk vectors.

A rare set is stored as a finite family of non-negative directions
``p_1, ..., p_m`` and stands for the open increasing set
``{y >= 0 : max_k p_k . y > 1}``.  Scaled membership ``y in x*A`` is
equivalent to ``projection(S, y) > x``, so every tail probability in the
package reduces to a scalar exceedance event of the projection.  Thresholds
are folded into the directions; the complement of the set is convex and the
origin never belongs to its closure (directions are nonzero).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "Direction",
    "RareSet",
    "RuinSetPreset",
    "ValidationIssue",
    "projection",
    "contains",
    "preset_a1",
    "preset_a2",
    "preset_a3",
    "from_ruin_set",
    "validate",
]

Direction = tuple[float, ...]


def _as_direction(vec: Sequence[float]) -> Direction:
    return tuple(float(v) for v in vec)


@dataclass(frozen=True)
class RareSet:
    """Immutable polyhedral rare set ``{y : max_k p_k . y > 1}``.

    Parameters
    ----------
    directions :
        Non-empty tuple of equal-length non-negative direction vectors.
        Each must have at least one strictly positive coordinate.
    """

    directions: tuple[Direction, ...]

    def __post_init__(self) -> None:
        dirs = tuple(_as_direction(p) for p in self.directions)
        object.__setattr__(self, "directions", dirs)
        issues = validate(self)
        if issues:
            raise ValueError("invalid rare set: " + "; ".join(i.message for i in issues))

    @property
    def dim(self) -> int:
        return len(self.directions[0])

    def matrix(self) -> np.ndarray:
        """Directions as an (m, d) float array."""
        return np.asarray(self.directions, dtype=float)


@dataclass(frozen=True)
class RuinSetPreset:
    """Capital-allocation preset for ruin runs.

    ``kind`` is ``"per_line"`` (ruin when any line's discounted deficit beats
    its own allocation ``x * l_j``) or ``"aggregate"`` (ruin when the summed
    deficit beats the total allocation ``x * sum(l)``).
    """

    kind: str
    l: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.kind not in ("per_line", "aggregate"):
            raise ValueError(f"unknown ruin preset kind {self.kind!r}")
        l = tuple(float(v) for v in self.l)
        object.__setattr__(self, "l", l)
        if not l:
            raise ValueError("ruin preset needs a non-empty allocation vector l")
        if any(not np.isfinite(v) or v <= 0.0 for v in l):
            raise ValueError("allocation vector l must be strictly positive and finite")


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    message: str


def validate(S: RareSet) -> list[ValidationIssue]:
    """Collect structural defects of a direction family without raising.

    Returns an empty list when the set is well formed.  Checks: at least one
    direction, consistent dimensions, finite non-negative coordinates, and no
    all-zero direction (which would put the origin in the set's closure).
    """
    issues: list[ValidationIssue] = []
    dirs = tuple(getattr(S, "directions", S))
    if len(dirs) == 0:
        return [ValidationIssue("empty", "direction family is empty")]
    d0 = len(dirs[0])
    if d0 == 0:
        issues.append(ValidationIssue("zero_dim", "directions have dimension zero"))
    for k, p in enumerate(dirs):
        if len(p) != d0:
            issues.append(
                ValidationIssue(
                    "dim_mismatch",
                    f"direction {k} has dimension {len(p)}, expected {d0}",
                )
            )
            continue
        arr = np.asarray(p, dtype=float)
        if not np.all(np.isfinite(arr)):
            issues.append(ValidationIssue("non_finite", f"direction {k} has non-finite coordinates"))
        elif np.any(arr < 0.0):
            issues.append(ValidationIssue("negative", f"direction {k} has negative coordinates"))
        elif not np.any(arr > 0.0):
            issues.append(ValidationIssue("all_zero", f"direction {k} is identically zero"))
    return issues


def _check_point(S: RareSet, z: Sequence[float]) -> np.ndarray:
    arr = np.asarray(z, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != S.dim:
        raise ValueError(
            f"point has dimension {arr.shape[0] if arr.ndim == 1 else arr.shape}, "
            f"set has dimension {S.dim}"
        )
    neg = np.nonzero(arr < 0.0)[0]
    if neg.size:
        raise ValueError(f"point has negative coordinate at index {int(neg[0])}")
    return arr


def projection(S: RareSet, z: Sequence[float]) -> float:
    """Support-style projection ``max_k p_k . z`` of a non-negative point.

    ``projection(S, z) > x`` if and only if ``z`` lies in the scaled set
    ``x * A``.  Raises ``ValueError`` on dimension mismatch or a negative

    coordinate.
    """
    arr = _check_point(S, z)
    return float(np.max(S.matrix() @ arr))


def contains(S: RareSet, z: Sequence[float], x: float) -> bool:
    """Strict membership test ``z in x * A`` at scale ``x > 0``."""
    if not (x > 0.0):
        raise ValueError("scale x must be strictly positive")
    return projection(S, z) > x


def preset_a1(b: Sequence[float]) -> RareSet:
    """Per-component exceedance set: some ``y_j > x * b_j``.

    Directions are the scaled axes ``e_j / b_j``; ``b`` must be strictly
    positive.
    """
    arr = np.asarray(b, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("b must be a non-empty vector")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ValueError("b must be strictly positive and finite")
    dirs = tuple(tuple(row) for row in np.diag(1.0 / arr))
    return RareSet(directions=dirs)


def preset_a2(l: Sequence[float], b: float) -> RareSet:
    """Weighted aggregate exceedance set: ``l . y > x * b``.

    ``l`` collects non-negative weights summing to one (violations beyond
    1e-9 are rejected); ``b`` is a strictly positive scalar threshold folded
    into the single direction ``l / b``.
    """
    arr = np.asarray(l, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("l must be a non-empty vector")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise ValueError("l must be non-negative and finite")
    total = float(np.sum(arr))
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"weights l must sum to 1 (got {total!r})")
    if not (np.isfinite(b) and b > 0.0):
        raise ValueError("b must be a strictly positive scalar")
    return RareSet(directions=(tuple(arr / float(b)),))


def preset_a3(l: Sequence[float]) -> RareSet:
    """Mean-exceedance set: average of ``l``-weighted coordinates beats x.

    Special case of :func:`preset_a2` with the divisor equal to the
    dimension, e.g. equal weights in dimension 2 give the single direction
    (0.25, 0.25).
    """
    arr = np.asarray(l, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("l must be a non-empty vector")
    return preset_a2(arr, float(arr.size))


def from_ruin_set(preset: RuinSetPreset) -> RareSet:
    """Rare set whose scaled membership reproduces the ruin event.

    ``per_line``: deficit vector in ``x * A`` iff some line j exceeds its
    allocation ``x * l_j`` (axis directions ``e_j / l_j``).  ``aggregate``:
    summed deficit exceeds the pooled allocation ``x * sum(l)`` (single
    all-ones direction scaled by ``1 / sum(l)``).  Aggregate ruin implies
    per-line ruin for the same ``l``, so the estimates are ordered.
    """
    l = np.asarray(preset.l, dtype=float)
    if preset.kind == "per_line":
        return preset_a1(l)
    ones = np.ones_like(l) / float(np.sum(l))
    return RareSet(directions=(tuple(ones),))
