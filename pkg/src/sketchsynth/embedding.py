"""Fourier spatial features, sinusoidal index encodings and the summed token embedding.

Weights are never trained here. They are loaded from a weight file, or
taken from :func:`reference_config`, a fixed seeded set of orthonormal
projections with zero special-token vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .tokenizer import POINT, SEP, EOS, MASK, TokenSequence

WEIGHTS_MAGIC = "SKETCH-WEIGHTS 1"


class WeightShapeError(ValueError):
    pass


def phi_spatial(t, L: int = 10) -> np.ndarray:
    """[sin(2^l pi t), cos(2^l pi t)] for l = 0..L-1, sin/cos interleaved per band.

    Works elementwise: input shape (...) gives output (..., 2L).
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    t = np.asarray(t, dtype=np.float64)
    ang = t[..., None] * (np.pi * 2.0 ** np.arange(L))
    out = np.empty(t.shape + (2 * L,))
    out[..., 0::2] = np.sin(ang)
    out[..., 1::2] = np.cos(ang)
    return out


def phi_sequence(t, D: int = 256) -> np.ndarray:
    """Transformer sinusoidal encoding: pairs [sin(t / 10000^(2d/D)), cos(...)] for d = 0..D/2-1."""
    if D % 2:
        raise ValueError("D must be even")
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError("indices must be >= 0")
    freq = 1.0 / 10000.0 ** (2.0 * np.arange(D // 2) / D)
    ang = t[..., None] * freq
    out = np.empty(t.shape + (D,))
    out[..., 0::2] = np.sin(ang)
    out[..., 1::2] = np.cos(ang)
    return out


@dataclass
class EmbeddingConfig:
    """Projection weights. The spatial MLP is Linear-ReLU-Linear, 6L -> hidden -> D."""

    L: int
    D: int
    spa_w1: np.ndarray
    spa_b1: np.ndarray
    spa_w2: np.ndarray
    spa_b2: np.ndarray
    stroke_w: np.ndarray
    stroke_b: np.ndarray
    point_w: np.ndarray
    point_b: np.ndarray
    sep: np.ndarray
    eos: np.ndarray
    mask: np.ndarray

    BLOCKS = ("spa_w1", "spa_b1", "spa_w2", "spa_b2", "stroke_w", "stroke_b",
              "point_w", "point_b", "sep", "eos", "mask")

    @property
    def hidden(self) -> int:
        return self.spa_w1.shape[0]

    def expected_shapes(self, hidden: int | None = None) -> dict:
        h = self.hidden if hidden is None else hidden
        D, L = self.D, self.L
        return {
            "spa_w1": (h, 6 * L), "spa_b1": (h,), "spa_w2": (D, h), "spa_b2": (D,),
            "stroke_w": (D, D), "stroke_b": (D,), "point_w": (D, D), "point_b": (D,),
            "sep": (D,), "eos": (D,), "mask": (D,),
        }

    def validate(self) -> None:
        if self.D % 2:
            raise WeightShapeError("D must be even")
        for name, shape in self.expected_shapes().items():
            got = np.shape(getattr(self, name))
            if got != shape:
                raise WeightShapeError(f"{name}: expected shape {shape}, got {got}")

    def __post_init__(self):
        for name in self.BLOCKS:
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        self.validate()


def _orthonormal(rng, rows: int, cols: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((max(rows, cols), min(rows, cols))))
    q = q * np.sign(np.diag(r))
    return q if rows >= cols else q.T


def reference_config(L: int = 10, D: int = 256, hidden: int = 256, seed: int = 0) -> EmbeddingConfig:
    """Deterministic orthonormal projections, zero biases and zero special vectors.

    Values are rounded to float32 so a save/load round trip is exact.
    """
    rng = np.random.default_rng(seed)
    f32 = lambda a: np.asarray(a, dtype=np.float32).astype(np.float64)  # noqa: E731
    zero = np.zeros(D)
    return EmbeddingConfig(
        L=L, D=D,
        spa_w1=f32(_orthonormal(rng, hidden, 6 * L)), spa_b1=np.zeros(hidden),
        spa_w2=f32(_orthonormal(rng, D, hidden)), spa_b2=zero.copy(),
        stroke_w=f32(_orthonormal(rng, D, D)), stroke_b=zero.copy(),
        point_w=f32(_orthonormal(rng, D, D)), point_b=zero.copy(),
        sep=zero.copy(), eos=zero.copy(), mask=zero.copy(),
    )


def save_weights(cfg: EmbeddingConfig, path) -> None:
    """Text header naming each block and its shape, then little-endian float32 data in header order."""
    lines = [WEIGHTS_MAGIC, f"L {cfg.L}", f"D {cfg.D}"]
    for name in cfg.BLOCKS:
        shape = np.shape(getattr(cfg, name))
        lines.append(f"block {name} " + " ".join(map(str, shape)))
    lines.append("end")
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode("ascii"))
        for name in cfg.BLOCKS:
            fh.write(np.asarray(getattr(cfg, name), dtype="<f4").tobytes())


def load_weights(path) -> EmbeddingConfig:
    raw = Path(path).read_bytes()
    marker = b"\nend\n"
    cut = raw.find(marker)
    if cut < 0:
        raise WeightShapeError("weight file header is not terminated")
    header = raw[:cut].decode("ascii").splitlines()
    if header[0] != WEIGHTS_MAGIC:
        raise WeightShapeError(f"not a weight file: {header[0]!r}")
    data = raw[cut + len(marker):]
    fields, blocks, offset = {}, {}, 0
    for line in header[1:]:
        parts = line.split()
        if parts[0] in ("L", "D"):
            fields[parts[0]] = int(parts[1])
        elif parts[0] == "block":
            shape = tuple(int(x) for x in parts[2:])
            count = int(np.prod(shape)) if shape else 1
            chunk = data[offset : offset + 4 * count]
            if len(chunk) != 4 * count:
                raise WeightShapeError(f"block {parts[1]} is truncated")
            blocks[parts[1]] = np.frombuffer(chunk, dtype="<f4").reshape(shape).astype(np.float64)
            offset += 4 * count
    if offset != len(data):
        raise WeightShapeError("trailing bytes after the last block")
    missing = set(EmbeddingConfig.BLOCKS) - set(blocks)
    if missing or set(fields) != {"L", "D"}:
        raise WeightShapeError(f"weight file is missing {sorted(missing) or 'L/D'}")
    return EmbeddingConfig(L=fields["L"], D=fields["D"], **blocks)


def spatial_embedding(coords: np.ndarray, cfg: EmbeddingConfig) -> np.ndarray:
    feats = phi_spatial(np.asarray(coords), cfg.L).reshape(len(coords), 6 * cfg.L)
    h = np.maximum(feats @ cfg.spa_w1.T + cfg.spa_b1, 0.0)
    return h @ cfg.spa_w2.T + cfg.spa_b2


def embed(seq: TokenSequence, cfg: EmbeddingConfig) -> np.ndarray:
    """Token embedding matrix of shape (len(seq), D).

    Each row sums a content term (spatial MLP for POINT tokens, the learned
    vector for SEP/EOS/MASK) with the projected stroke- and point-index
    encodings.
    """
    cfg.validate()
    out = np.empty((len(seq), cfg.D))
    pts = seq.kind == POINT
    if pts.any():
        out[pts] = spatial_embedding(seq.coords[pts], cfg)
    for kind, vec in ((SEP, cfg.sep), (EOS, cfg.eos), (MASK, cfg.mask)):
        out[seq.kind == kind] = vec
    out += phi_sequence(seq.stroke, cfg.D) @ cfg.stroke_w.T + cfg.stroke_b
    out += phi_sequence(seq.point, cfg.D) @ cfg.point_w.T + cfg.point_b
    return out
