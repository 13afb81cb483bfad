import os
import subprocess
import sys

import numpy as np
import pytest

from specular import _backend, _fallback

compiled = pytest.importorskip("specular._kernels")


def test_env_forces_fallback():
    env = dict(os.environ, SPECULAR_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "import specular; print(specular.backend)"],
                         env=env, capture_output=True, text=True, check=True).stdout
    assert out.strip() == "python"


def test_default_is_compiled():
    env = {k: v for k, v in os.environ.items() if k != "SPECULAR_BACKEND"}
    out = subprocess.run([sys.executable, "-c", "import specular; print(specular.backend)"],
                         env=env, capture_output=True, text=True, check=True).stdout
    assert out.strip() == "cython"


def test_use_rejects_unknown():
    with pytest.raises(ValueError):
        _backend.use("fortran")


@pytest.mark.parametrize("n", [0, 1, 7, 500])
def test_shadow_profiles_agree(rng, n):
    segs = rng.uniform(-1, 1, (n, 4))
    th = np.sort(rng.uniform(0, np.pi, 64))
    a = compiled.shadow_profile(segs, th, 0.7)
    b = _fallback.shadow_profile(segs, th, 0.7)
    assert np.allclose(a[0], b[0], atol=1e-12) and np.allclose(a[1], b[1], atol=1e-12)


def test_shadow_profile_far_from_sorted(rng):
    # angle jumps force the full-sort path in the compiled kernel
    segs = rng.uniform(-1, 1, (3000, 4))
    th = np.array([0.1, 2.9, 0.2, 3.0, 1.5])
    a = compiled.shadow_profile(segs, th, 1.0)
    b = _fallback.shadow_profile(segs, th, 1.0)
    assert np.allclose(a[0], b[0], atol=1e-12)
