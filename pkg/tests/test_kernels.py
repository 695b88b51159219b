"""Contact-kernel equivalence: numba path, numpy path, env selection."""

import numpy as np
import pytest

from cogsim import _kernels


def random_walk_positions(rng, steps, nodes, box=200.0, step=2.0):
    pos = np.empty((steps + 1, nodes, 2))
    pos[0] = rng.uniform(0, box, size=(nodes, 2))
    moves = rng.uniform(-step, step, size=(steps, nodes, 2))
    pos[1:] = np.clip(pos[0] + np.cumsum(moves, axis=0), 0, box)
    return pos


def as_tuples(events):
    return [tuple(row) for row in events]


class TestPathEquivalence:
    @pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba unavailable")
    def test_numba_equals_numpy(self):
        rng = np.random.default_rng(42)
        for trial in range(10):
            steps = int(rng.integers(50, 400))
            nodes = int(rng.integers(2, 12))
            pos = random_walk_positions(rng, steps, nodes)
            duration = float(steps)
            got_nb = _kernels._extract_contacts_numba(
                np.ascontiguousarray(pos), 30.0 * 30.0, 1.0, duration
            )
            got_np = _kernels.extract_contacts_numpy(pos, 30.0, 1.0, duration)
            key = lambda r: (r[2], r[0], r[1])
            assert sorted(as_tuples(got_nb), key=key) == sorted(as_tuples(got_np), key=key)

    def test_numpy_chunking_boundaries(self):
        rng = np.random.default_rng(7)
        pos = random_walk_positions(rng, 300, 6)
        whole = _kernels.extract_contacts_numpy(pos, 30.0, 1.0, 300.0)
        for chunk in (1, 7, 64, 299):
            chunked = _kernels.extract_contacts_numpy(pos, 30.0, 1.0, 300.0, chunk_steps=chunk)
            assert as_tuples(whole) == as_tuples(chunked)

    def test_sorted_output(self):
        rng = np.random.default_rng(3)
        pos = random_walk_positions(rng, 200, 8)
        events = _kernels.extract_contacts(pos, 25.0, 1.0, 200.0)
        keys = [(r[2], r[0], r[1]) for r in events]
        assert keys == sorted(keys)


class TestEnvFlag:
    def test_flag_parsing(self, monkeypatch):
        for off in ("0", "false", "no", "OFF"):
            monkeypatch.setenv("COGSIM_NUMBA", off)
            assert not _kernels.numba_requested()
        for on in ("1", "true", ""):
            monkeypatch.setenv("COGSIM_NUMBA", on)
            assert _kernels.numba_requested()
        monkeypatch.delenv("COGSIM_NUMBA")
        assert _kernels.numba_requested()

    def test_numpy_fallback_selected_in_subprocess(self):
        import json
        import subprocess
        import sys

        code = (
            "import json\n"
            "from cogsim import _kernels\n"
            "print(json.dumps(_kernels.HAVE_NUMBA))\n"
        )
        out = subprocess.run(
            [sys.executable, "-c", code],
            capture_output=True,
            text=True,
            env={"COGSIM_NUMBA": "0", "PATH": "/usr/bin:/bin"},
        )
        assert json.loads(out.stdout) is False
