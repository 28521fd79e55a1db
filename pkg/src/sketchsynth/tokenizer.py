"""Sketch token sequences, training augmentations and completion-mask inputs."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .sketch import Sketch, SketchError, Stroke

POINT, SEP, EOS, MASK = 0, 1, 2, 3
KIND_NAMES = ("POINT", "SEP", "EOS", "MASK")
TOKENS_VERSION = 1


@dataclass(eq=False)
class TokenSequence:
    """Column-wise token storage.

    ``kind`` uses POINT=0, SEP=1, EOS=2, MASK=3. ``coords`` is zero for
    every non-POINT token. ``stroke`` and ``point`` are 1-based indices.
    """

    kind: np.ndarray
    coords: np.ndarray
    stroke: np.ndarray
    point: np.ndarray

    def __post_init__(self):
        self.kind = np.asarray(self.kind, dtype=np.int8)
        self.coords = np.asarray(self.coords, dtype=np.float64).reshape(-1, 3)
        self.stroke = np.asarray(self.stroke, dtype=np.int64)
        self.point = np.asarray(self.point, dtype=np.int64)

    def __len__(self):
        return len(self.kind)

    @property
    def stroke_count(self) -> int:
        return int(np.count_nonzero(self.kind == SEP))

    def __eq__(self, other):
        if not isinstance(other, TokenSequence):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("kind", "coords", "stroke", "point")
        )

    def copy(self) -> "TokenSequence":
        return TokenSequence(self.kind.copy(), self.coords.copy(), self.stroke.copy(), self.point.copy())

    def take(self, idx) -> "TokenSequence":
        return TokenSequence(self.kind[idx], self.coords[idx], self.stroke[idx], self.point[idx])

    def blocks(self) -> list[np.ndarray]:
        """Token positions of each stroke, its SEP included."""
        ends = np.flatnonzero(self.kind == SEP)
        starts = np.concatenate([[0], ends[:-1] + 1])
        return [np.arange(a, b + 1) for a, b in zip(starts, ends)]

    def __repr__(self):
        return f"TokenSequence(n_tokens={len(self)}, strokes={self.stroke_count})"


def tokenize(sketch: Sketch) -> TokenSequence:
    """Flatten strokes into POINT..., SEP per stroke, then one EOS.

    Point i of stroke s carries (s, i); a stroke's SEP carries (s, n_s + 1);
    EOS carries (S, n_S + 1).
    """
    kinds, coords, strokes, points = [], [], [], []
    for s, st in enumerate(sketch.strokes, 1):
        n = len(st)
        kinds += [POINT] * n + [SEP]
        coords.append(st.points)
        coords.append(np.zeros((1, 3)))
        strokes += [s] * (n + 1)
        points += list(range(1, n + 2))
    last = len(sketch.strokes[-1]) if sketch.strokes else 0
    kinds.append(EOS)
    coords.append(np.zeros((1, 3)))
    strokes.append(len(sketch.strokes))
    points.append(last + 1)
    return TokenSequence(np.array(kinds), np.concatenate(coords), np.array(strokes), np.array(points))


def detokenize(seq: TokenSequence, meta: dict | None = None) -> Sketch:
    if np.any(seq.kind == MASK):
        raise SketchError("cannot detokenize a sequence containing MASK tokens")
    if len(seq) == 0 or seq.kind[-1] != EOS or np.count_nonzero(seq.kind == EOS) != 1:
        raise SketchError("sequence must end with exactly one EOS")
    strokes = []
    for block in seq.blocks():
        pts = seq.coords[block[seq.kind[block] == POINT]]
        strokes.append(Stroke(pts.copy()))
    return Sketch(strokes, dict(meta or {}))


def _reindex(seq: TokenSequence) -> None:
    """Renumber stroke/point indices from the current SEP layout, in place."""
    for s, block in enumerate(seq.blocks(), 1):
        seq.stroke[block] = s
        seq.point[block] = np.arange(1, len(block) + 1)
    eos = np.flatnonzero(seq.kind == EOS)
    if len(eos):
        seq.stroke[eos] = seq.stroke_count
        seq.point[eos] = seq.point[eos[0] - 1] if eos[0] > 0 else 1


@dataclass
class AugmentPlan:
    dropped_strokes: np.ndarray  # (S,) bool
    dropped_points: np.ndarray  # (P,) bool over POINT tokens in order; never set inside dropped strokes
    swap_selected: np.ndarray  # (S,) bool
    permutation: np.ndarray  # slot -> original stroke


DEFAULT_RATES = {"stroke_drop": 0.15, "point_drop": 0.30, "stroke_swap": 0.20}


def draw_augmentation(stroke_lengths, rates: dict, rng) -> AugmentPlan:
    lengths = np.asarray(stroke_lengths, dtype=np.int64)
    S = len(lengths)
    r = {**dict.fromkeys(DEFAULT_RATES, 0.0), **rates}
    for name, v in r.items():
        if not 0 <= v < 1:
            raise ValueError(f"{name} rate must be in [0, 1)")
    dropped = rng.random(S) < r["stroke_drop"]
    owner = np.repeat(np.arange(S), lengths)
    points = (rng.random(len(owner)) < r["point_drop"]) & ~dropped[owner]
    selected = rng.random(S) < r["stroke_swap"]
    perm = np.arange(S)
    if S > 1:
        for i in np.flatnonzero(selected):
            j = int(rng.integers(S - 1))
            j += j >= i
            perm[i], perm[j] = perm[j], perm[i]
    return AugmentPlan(dropped, points, selected, perm)


def apply_augmentation(seq: TokenSequence, plan: AugmentPlan) -> TokenSequence:
    out = seq.copy()
    is_point = np.flatnonzero(out.kind == POINT)
    blocks = out.blocks()
    masked = plan.dropped_points.copy()
    for s in np.flatnonzero(plan.dropped_strokes):
        masked[np.isin(is_point, blocks[s])] = True
    pos = is_point[masked]
    out.kind[pos] = MASK
    out.coords[pos] = 0.0
    if not np.array_equal(plan.permutation, np.arange(len(blocks))):
        order = np.concatenate([blocks[k] for k in plan.permutation] + [np.arange(blocks[-1][-1] + 1, len(out))])
        out = out.take(order)
        _reindex(out)
    return out


def augment(seq: TokenSequence, rates: dict | None = None, seed: int | None = 0) -> TokenSequence:
    """Stroke dropping, point dropping and stroke swapping.

    Dropped tokens become MASK with their indices kept. Swapped strokes
    trade whole token blocks and are renumbered for their new slots.
    Sequence length never changes; SEP and EOS are never masked.
    """
    rates = DEFAULT_RATES if rates is None else rates
    lengths = [int(np.count_nonzero(seq.kind[b] != SEP)) for b in seq.blocks()]
    plan = draw_augmentation(lengths, rates, np.random.default_rng(seed))
    return apply_augmentation(seq, plan)


def kept_stroke_lengths(prefix: TokenSequence) -> list[int]:
    """Point counts of the strokes closed by a SEP inside ``prefix``; the open tail if none closed."""
    lengths = [int(len(b) - 1) for b in prefix.blocks()]
    if not lengths:
        lengths = [int(np.count_nonzero(prefix.kind != SEP))]
    return [n for n in lengths if n > 0] or [1]


def build_completion_input(
    seq: TokenSequence, keep_fraction: float, pad_to: int | None = None, seed: int | None = 0
) -> TokenSequence:
    """Partial-sketch input: kept prefix, MASK padding with sampled SEPs, then EOS.

    The prefix is the first ceil(keep_fraction * n) tokens of the sequence
    without its EOS. SEPs in the padding are spaced by stroke lengths
    resampled from the strokes completed inside the prefix.
    """
    if not 0 < keep_fraction < 1:
        raise ValueError("keep_fraction must be in (0, 1)")
    body = seq.take(slice(0, len(seq) - 1)) if len(seq) and seq.kind[-1] == EOS else seq.copy()
    kept = max(1, math.ceil(keep_fraction * len(body)))
    prefix = body.take(slice(0, kept))
    pad_to = kept + 100 if pad_to is None else pad_to
    if pad_to < kept:
        raise ValueError("pad_to must be >= the kept token count")
    rng = np.random.default_rng(seed)
    lengths = np.array(kept_stroke_lengths(prefix))

    kinds, strokes, points = [], [], []
    s, i = int(prefix.stroke[-1]), int(prefix.point[-1])
    if prefix.kind[-1] == SEP:
        s, i = s + 1, 0
    remaining = pad_to - kept
    while remaining > 0:
        run = int(rng.choice(lengths))
        for _ in range(min(run, remaining)):
            i += 1
            kinds.append(MASK)
            strokes.append(s)
            points.append(i)
        remaining -= min(run, remaining)
        if remaining > 0:
            kinds.append(SEP)
            strokes.append(s)
            points.append(i + 1)
            remaining -= 1
            s, i = s + 1, 0
    kinds.append(EOS)
    strokes.append(s)
    points.append(i + 1)
    tail = TokenSequence(np.array(kinds), np.zeros((len(kinds), 3)), np.array(strokes), np.array(points))
    return TokenSequence(
        np.concatenate([prefix.kind, tail.kind]),
        np.concatenate([prefix.coords, tail.coords]),
        np.concatenate([prefix.stroke, tail.stroke]),
        np.concatenate([prefix.point, tail.point]),
    )


def to_json(seq: TokenSequence) -> str:
    doc = {
        "version": TOKENS_VERSION,
        "kind": [KIND_NAMES[k] for k in seq.kind.tolist()],
        "coords": seq.coords.tolist(),
        "stroke": seq.stroke.tolist(),
        "point": seq.point.tolist(),
    }
    return json.dumps(doc, separators=(",", ":"))


def from_json(text: str) -> TokenSequence:
    doc = json.loads(text)
    if doc.get("version") != TOKENS_VERSION:
        raise ValueError(f"unsupported token file version {doc.get('version')!r}")
    kind = np.array([KIND_NAMES.index(k) for k in doc["kind"]])
    return TokenSequence(kind, np.array(doc["coords"], dtype=np.float64), doc["stroke"], doc["point"])


def save_tokens(seq: TokenSequence, path) -> None:
    Path(path).write_text(to_json(seq) + "\n")


def load_tokens(path) -> TokenSequence:
    return from_json(Path(path).read_text())
