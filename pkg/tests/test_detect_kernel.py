import numpy as np
import pytest

from secbeam.detect import ml_argmin, ml_argmin_numpy

try:
    from secbeam.detect import ml_argmin_compiled
    ml_argmin_compiled(np.zeros((1, 1), complex), np.zeros((1, 1), complex))
    HAVE_COMPILED = True
except (ImportError, RuntimeError):
    HAVE_COMPILED = False

needs_compiled = pytest.mark.skipif(not HAVE_COMPILED,
                                    reason="compiled kernel not built")


def brute_force(received, signatures):
    out = np.empty(len(received), dtype=np.int64)
    for i, y in enumerate(received):
        dists = [np.sum(np.abs(y - s) ** 2) for s in signatures]
        out[i] = int(np.argmin(dists))
    return out


def test_numpy_path_matches_brute_force(rng):
    y = rng.standard_normal((40, 4)) + 1j * rng.standard_normal((40, 4))
    s = rng.standard_normal((8, 4)) + 1j * rng.standard_normal((8, 4))
    assert np.array_equal(ml_argmin_numpy(y, s), brute_force(y, s))


def test_numpy_path_chunked_rows(rng):
    y = rng.standard_normal((5000, 3)) + 1j * rng.standard_normal((5000, 3))
    s = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    full = ml_argmin_numpy(y, s)  # crosses the internal chunk boundary
    assert np.array_equal(full[:100], brute_force(y[:100], s))
    assert np.array_equal(full[4090:4110], brute_force(y[4090:4110], s))


@needs_compiled
def test_compiled_matches_numpy_on_separated_instances(rng):
    y = rng.standard_normal((500, 4)) + 1j * rng.standard_normal((500, 4))
    s = rng.standard_normal((16, 4)) + 1j * rng.standard_normal((16, 4))
    a = ml_argmin_numpy(y, s)
    b = ml_argmin_compiled(y, s)
    # both evaluate the same squared distances; disagreement is only possible
    # on near-exact ties, so require a separated runner-up before comparing
    d2 = (np.abs(y[:, None, :] - s[None, :, :]) ** 2).sum(axis=2)
    part = np.partition(d2, 1, axis=1)
    separated = part[:, 1] - part[:, 0] > 1e-9
    assert separated.mean() > 0.99
    assert np.array_equal(a[separated], b[separated])


@needs_compiled
def test_tie_breaks_to_lowest_index():
    sig = np.array([[1.0 + 0j, 0.0], [1.0 + 0j, 0.0], [5.0 + 0j, 0.0]])
    y = np.array([[1.0 + 0j, 0.0]])
    assert ml_argmin_numpy(y, sig)[0] == 0
    assert ml_argmin_compiled(y, sig)[0] == 0


def test_dispatcher_returns_valid_indices(rng):
    y = rng.standard_normal((64, 4)) + 1j * rng.standard_normal((64, 4))
    s = rng.standard_normal((8, 4)) + 1j * rng.standard_normal((8, 4))
    idx = ml_argmin(y, s)
    assert idx.shape == (64,)
    assert idx.min() >= 0 and idx.max() < 8
    assert np.array_equal(idx, brute_force(y, s))


def test_pure_python_env_var_selects_fallback():
    import os
    import subprocess
    import sys

    code = ("import secbeam.detect as d; "
            "print(d.using_compiled_kernel())")
    env = dict(os.environ, SECBEAM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"
