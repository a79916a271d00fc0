import itertools
import os
import subprocess
import sys

import numpy as np
import pytest

from ksdioph import kernels


@pytest.fixture(scope="module")
def scan_inputs(field_sqrt2):
    rng = np.random.default_rng(77)
    E = field_sqrt2._embed_f64
    Einv = field_sqrt2._inv_embed_f64
    X = rng.uniform(0, 1, size=(2, 2))
    coords = rng.integers(-6, 7, size=(500, 4)).astype(np.int64)
    coords = coords[np.any(coords != 0, axis=1)]
    offsets = np.array(list(itertools.product((-1, 0, 1), repeat=2)),
                       dtype=np.int64)
    return coords, E, X, Einv, offsets


def test_backends_agree_on_affine_scan(scan_inputs):
    nb = kernels.get_backend("numba")
    npb = kernels.get_backend("numpy")
    v1, i1, q1 = nb.affine_min_scan(*scan_inputs)
    v2, i2, q2 = npb.affine_min_scan(*scan_inputs)
    assert v1 == pytest.approx(v2, rel=1e-12)
    assert i1 == i2
    assert list(q1) == list(q2)


def test_backends_agree_on_collect(scan_inputs):
    coords, E, X, Einv, offsets = scan_inputs
    thresh = 0.05
    nb = kernels.get_backend("numba")
    npb = kernels.get_backend("numpy")
    i1, v1, q1 = nb.affine_collect_below(coords, E, X, Einv, offsets, thresh)
    i2, v2, q2 = npb.affine_collect_below(coords, E, X, Einv, offsets, thresh)
    assert list(i1) == list(i2)
    assert np.allclose(v1, v2)
    assert np.array_equal(q1, q2)


def test_backends_agree_on_content(field_sqrt2):
    rng = np.random.default_rng(5)
    Y = rng.normal(size=(200, 2, 3))
    v1, a1 = kernels.get_backend("numba").content_scan(Y)
    v2, a2 = kernels.get_backend("numpy").content_scan(Y)
    assert np.allclose(v1, v2)
    assert a1 == a2


def test_env_flag_selects_backend():
    env = dict(os.environ, KSDIOPH_BACKEND="numpy")
    proc = subprocess.run(
        [sys.executable, "-c",
         "from ksdioph import kernels; print(kernels.backend_name())"],
        capture_output=True, text=True, env=env)
    assert proc.stdout.strip() == "numpy"


def test_default_backend_is_numba_when_available():
    assert kernels.backend_name() in ("numba", "numpy")
