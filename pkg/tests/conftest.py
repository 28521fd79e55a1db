import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sketchsynth import shapes  # noqa: E402
from sketchsynth.mesh import normalize  # noqa: E402
from sketchsynth.sketch import Sketch, Stroke  # noqa: E402


@pytest.fixture
def unit_cube():
    return normalize(shapes.cube())


@pytest.fixture
def cube_obj(tmp_path):
    text = "\n".join(
        ["v 0 0 0", "v 1 0 0", "v 1 1 0", "v 0 1 0", "v 0 0 1", "v 1 0 1", "v 1 1 1", "v 0 1 1",
         "f 1 3 2", "f 1 4 3", "f 5 6 7", "f 5 7 8", "f 1 2 6", "f 1 6 5",
         "f 2 3 7", "f 2 7 6", "f 3 4 8", "f 3 8 7", "f 4 1 5", "f 4 5 8"]
    )
    path = tmp_path / "cube.obj"
    path.write_text(text + "\n")
    return path


def random_sketch(rng, n_strokes=None, max_len=12) -> Sketch:
    n_strokes = n_strokes or int(rng.integers(1, 8))
    return Sketch([Stroke(rng.random((int(rng.integers(2, max_len + 1)), 3))) for _ in range(n_strokes)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def record_criterion(request):
    """Log one pass/fail line per acceptance criterion; printed in the terminal summary."""
    lines = request.config.__dict__.setdefault("_acceptance_lines", [])

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.__dict__.get("_acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
