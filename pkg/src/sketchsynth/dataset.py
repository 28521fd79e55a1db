"""Dataset manifests and the resumable batch driver."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .mesh import load_mesh
from .pipeline import PipelineParams, run_pipeline
from .sketch import save_sketch

log = logging.getLogger(__name__)

SPLITS = ("synthetic-train", "real-finetune", "real-eval")
MANIFEST_VERSION = 1
MANIFEST_FIELDS = ["mesh_path", "sketch_path", "category", "split"]
REPORT_FIELDS = ["mesh_path", "sketch_path", "category", "split", "status", "seconds", "strokes", "points", "seed", "error"]


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class ManifestEntry:
    mesh_path: str
    sketch_path: str
    category: str
    split: str


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry]
    root: Path = Path(".")
    version: int = MANIFEST_VERSION

    def __post_init__(self):
        self.root = Path(self.root)
        for attr in ("mesh_path", "sketch_path"):
            paths = [getattr(e, attr) for e in self.entries]
            if len(set(paths)) != len(paths):
                raise ManifestError(f"duplicate {attr} in manifest")
        for e in self.entries:
            if e.split not in SPLITS:
                raise ManifestError(f"unknown split {e.split!r} (expected one of {', '.join(SPLITS)})")

    def resolve(self, rel: str) -> Path:
        p = Path(rel)
        return p if p.is_absolute() else self.root / p


def read_manifest(path) -> DatasetManifest:
    """Read a CSV manifest; relative paths resolve against the manifest's directory.

    An optional first line ``# version: N`` declares the format version.
    """
    path = Path(path)
    lines = path.read_text().splitlines()
    version = MANIFEST_VERSION
    if lines and lines[0].startswith("#"):
        head = lines.pop(0).lstrip("#").strip()
        if head.startswith("version:"):
            version = int(head.split(":", 1)[1])
    if version != MANIFEST_VERSION:
        raise ManifestError(f"unsupported manifest version {version}")
    reader = csv.DictReader(lines)
    if reader.fieldnames != MANIFEST_FIELDS:
        raise ManifestError(f"manifest header must be {','.join(MANIFEST_FIELDS)}")
    entries = [ManifestEntry(**row) for row in reader]
    return DatasetManifest(entries, root=path.parent, version=version)


def write_manifest(manifest: DatasetManifest, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# version: {manifest.version}\n")
        w = csv.DictWriter(fh, fieldnames=MANIFEST_FIELDS, lineterminator="\n")
        w.writeheader()
        for e in manifest.entries:
            w.writerow(asdict(e))


def derive_seed(global_seed: int, mesh_id: str) -> int:
    """Per-mesh seed from the global seed and the mesh id, independent of batch order."""
    h = hashlib.blake2b(f"{int(global_seed)}:{mesh_id}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little") >> 1


@dataclass
class RunReport:
    rows: list[dict] = field(default_factory=list)

    @property
    def generated(self) -> int:
        return sum(r["status"] == "ok" for r in self.rows)

    @property
    def skipped(self) -> int:
        return sum(r["status"] == "skipped" for r in self.rows)

    @property
    def failed(self) -> int:
        return sum(r["status"] == "failed" for r in self.rows)

    def summary(self) -> dict:
        times = [r["seconds"] for r in self.rows if r["status"] == "ok"]
        return {
            "entries": len(self.rows),
            "generated": self.generated,
            "skipped": self.skipped,
            "failed": self.failed,
            "total_seconds": sum(times),
            "max_seconds": max(times, default=0.0),
            "mean_seconds": sum(times) / len(times) if times else 0.0,
        }

    def write(self, directory) -> tuple[Path, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        csv_path, json_path = directory / "report.csv", directory / "report.json"
        with open(csv_path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=REPORT_FIELDS, lineterminator="\n")
            w.writeheader()
            w.writerows(self.rows)
        json_path.write_text(json.dumps({"summary": self.summary(), "rows": self.rows}, indent=2) + "\n")
        return csv_path, json_path


def _process(job) -> dict:
    entry, mesh_file, sketch_file, params, seed = job
    row = {**asdict(entry), "status": "ok", "seconds": 0.0, "strokes": 0, "points": 0, "seed": seed, "error": ""}
    t0 = time.perf_counter()
    try:
        result = run_pipeline(load_mesh(mesh_file), params, seed, mesh_id=entry.mesh_path)
        result.sketch.meta["category"] = entry.category
        Path(sketch_file).parent.mkdir(parents=True, exist_ok=True)
        save_sketch(result.sketch, sketch_file)
        row.update(strokes=len(result.sketch), points=result.sketch.n_points)
    except Exception as exc:  # per-entry isolation: record and keep going
        row.update(status="failed", error=f"{type(exc).__name__}: {exc}")
        log.warning("failed on %s: %s", entry.mesh_path, exc)
    row["seconds"] = time.perf_counter() - t0
    return row


def generate_dataset(
    manifest: DatasetManifest,
    params: PipelineParams | None = None,
    seed: int = 0,
    force: bool = False,
    workers: int = 1,
) -> RunReport:
    """Generate one sketch per manifest entry.

    Existing sketch files are skipped unless ``force``. Failures are
    recorded in the report and do not stop the run.
    """
    params = params or PipelineParams()
    jobs, rows = [], {}
    for k, e in enumerate(manifest.entries):
        out = manifest.resolve(e.sketch_path)
        s = derive_seed(seed, e.mesh_path)
        if out.exists() and not force:
            rows[k] = {**asdict(e), "status": "skipped", "seconds": 0.0, "strokes": 0, "points": 0, "seed": s, "error": ""}
            continue
        jobs.append((k, (e, manifest.resolve(e.mesh_path), out, params, s)))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for (k, _), row in zip(jobs, pool.map(_process, [j for _, j in jobs])):
                rows[k] = row
    else:
        for k, job in jobs:
            rows[k] = _process(job)
    return RunReport([rows[k] for k in sorted(rows)])
