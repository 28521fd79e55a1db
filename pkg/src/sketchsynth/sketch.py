"""Sketch data model, JSON serialization and temporal truncation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1


class SketchError(ValueError):
    """Raised when a sketch file or object violates the sketch invariants."""


class VersionError(SketchError):
    pass


@dataclass(eq=False)
class Stroke:
    points: np.ndarray
    id: int = 0

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)

    def __len__(self):
        return len(self.points)

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    def reversed(self) -> "Stroke":
        return Stroke(self.points[::-1].copy(), self.id)

    def __eq__(self, other):
        if not isinstance(other, Stroke):
            return NotImplemented
        return self.id == other.id and np.array_equal(self.points, other.points)

    def __repr__(self):
        return f"Stroke(id={self.id}, n_points={len(self)})"


@dataclass(eq=False)
class Sketch:
    """Temporally ordered strokes with points in the unit cube.

    Stroke ids are renumbered to match their temporal rank.
    """

    strokes: list[Stroke]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.strokes = [
            Stroke(getattr(s, "points", s), rank) for rank, s in enumerate(self.strokes)
        ]

    def __len__(self):
        return len(self.strokes)

    @property
    def n_points(self) -> int:
        return sum(len(s) for s in self.strokes)

    @property
    def stroke_lengths(self) -> list[int]:
        return [len(s) for s in self.strokes]

    def points(self) -> np.ndarray:
        """All points flattened in drawing order."""
        if not self.strokes:
            return np.zeros((0, 3))
        return np.concatenate([s.points for s in self.strokes])

    def validate(self) -> None:
        if not self.strokes:
            raise SketchError("sketch has no strokes")
        for s in self.strokes:
            if len(s) < 2:
                raise SketchError(f"stroke {s.id} has fewer than 2 points")
            if not np.all(np.isfinite(s.points)):
                raise SketchError(f"stroke {s.id} has non-finite coordinates")
            if s.points.min() < 0 or s.points.max() > 1:
                raise SketchError(f"stroke {s.id} leaves the unit cube")

    def __eq__(self, other):
        if not isinstance(other, Sketch):
            return NotImplemented
        return (
            len(self.strokes) == len(other.strokes)
            and all(a == b for a, b in zip(self.strokes, other.strokes))
            and self.meta == other.meta
        )

    def __repr__(self):
        return f"Sketch(n_strokes={len(self)}, n_points={self.n_points})"


def to_json(sketch: Sketch) -> str:
    doc = {
        "version": FORMAT_VERSION,
        "strokes": [s.points.tolist() for s in sketch.strokes],
        "meta": sketch.meta,
    }
    # float repr is the shortest decimal that round-trips, so saving is lossless
    return json.dumps(doc, separators=(",", ":"), sort_keys=True)


def from_json(text: str) -> Sketch:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SketchError(f"not valid JSON: {exc}") from exc
    if doc.get("version") != FORMAT_VERSION:
        raise VersionError(f"unsupported sketch version {doc.get('version')!r}")
    try:
        strokes = [Stroke(np.array(pts, dtype=np.float64)) for pts in doc["strokes"]]
    except (KeyError, ValueError, TypeError) as exc:
        raise SketchError(f"malformed strokes: {exc}") from exc
    sketch = Sketch(strokes, doc.get("meta", {}))
    sketch.validate()
    return sketch


def save_sketch(sketch: Sketch, path) -> None:
    sketch.validate()
    Path(path).write_text(to_json(sketch) + "\n")


def load_sketch(path) -> Sketch:
    return from_json(Path(path).read_text())


def truncate(sketch: Sketch, keep_fraction: float) -> Sketch:
    """Keep the first ceil(keep_fraction * total) points in drawing order.

    A stroke cut part-way stays as a shorter stroke; a single surviving
    point is dropped. At least two points are kept so the result is never
    empty.
    """
    if not 0 < keep_fraction <= 1:
        raise ValueError("keep_fraction must be in (0, 1]")
    budget = max(2, math.ceil(keep_fraction * sketch.n_points))
    out = []
    for s in sketch.strokes:
        if budget <= 0:
            break
        take = min(budget, len(s))
        budget -= take
        if take >= 2:
            out.append(Stroke(s.points[:take].copy()))
    meta = dict(sketch.meta, keep_fraction=keep_fraction) if keep_fraction < 1 else dict(sketch.meta)
    return Sketch(out, meta)
