import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lindblad_scars.algebra import Geometry
from lindblad_scars.liouville import majorana_jumps, spin_jumps, vectorize_majorana, vectorize_spin
from lindblad_scars.models import SykParams, XxzParams, build_complex_syk, build_majorana_syk, build_xxz, sample_couplings

settings.register_profile("default", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

REPO = Path(__file__).resolve().parents[1]
CACHE = Path(os.environ.get("LINDBLAD_SCARS_CACHE", REPO / ".cache" / "acceptance"))


def majorana_liouvillian(N, q=4, mu=0.1, scheme="pseudo", realization=0, complex_model=False):
    geom = Geometry.majorana(N)
    H = build_majorana_syk(sample_couplings(SykParams(N, q, 0, realization)), geom)
    if complex_model:
        H = build_complex_syk(H, geom)
    model = "complex-syk" if complex_model else "majorana-syk"
    return vectorize_majorana(H, majorana_jumps(geom, mu), scheme, geom, model=model, q=q), H


def xxz_liouvillian(n, mu=0.1, realization=0):
    geom = Geometry.spin(n)
    H = build_xxz(XxzParams(n, realization=realization), geom)
    return vectorize_spin(H, spin_jumps(geom, mu), geom), H


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
