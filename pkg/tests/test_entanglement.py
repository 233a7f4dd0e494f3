import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lindblad_scars.algebra import Geometry
from lindblad_scars.entanglement import (
    Partition,
    coefficient_matrix,
    entropy_record,
    page_value,
    partition_dims,
    reduced_density_matrix,
    schmidt_entropies,
    schmidt_entropy,
    schmidt_spectrum,
    von_neumann,
)
from lindblad_scars.liouville import tfd_state


def _random_state(seed, dim):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


@pytest.mark.parametrize("geom", [Geometry.majorana(12), Geometry.majorana(8), Geometry.spin(6), Geometry.spin(3)])
def test_tfd_fixed_points(geom):
    v = tfd_state(geom, "pseudo")
    assert schmidt_entropy(v, "intersite", geom) == pytest.approx(math.log(geom.dim), abs=1e-10)
    assert abs(schmidt_entropy(v, "intrasite", geom)) < 1e-10


def test_tfd_majorana_value():
    geom = Geometry.majorana(12)
    assert schmidt_entropy(tfd_state(geom, "pseudo"), Partition.INTERSITE, geom) == pytest.approx(6 * math.log(2), abs=1e-12)


def test_product_state_has_zero_entropy():
    geom = Geometry.spin(2)
    a, b = _random_state(0, 4), _random_state(1, 4)
    v = np.kron(a, b)
    assert abs(schmidt_entropy(v, "intersite", geom)) < 1e-10


@given(st.integers(0, 10**6), st.sampled_from(["intersite", "intrasite"]), st.sampled_from([Geometry.majorana(8), Geometry.spin(3)]))
def test_svd_matches_partial_trace(seed, part, geom):
    v = _random_state(seed, geom.dim**2)
    rho = reduced_density_matrix(v, part, geom)
    assert np.trace(rho).real == pytest.approx(1)
    assert schmidt_entropy(v, part, geom) == pytest.approx(von_neumann(rho), abs=1e-10)
    w = schmidt_spectrum(v, part, geom)
    np.testing.assert_allclose(np.sort(w)[::-1][: rho.shape[0]], np.sort(np.linalg.eigvalsh(rho))[::-1], atol=1e-12)


@given(st.integers(0, 10**6))
def test_entropy_bounds(seed):
    geom = Geometry.spin(3)
    v = _random_state(seed, 64)
    for part in Partition:
        da, db = partition_dims(part, geom)
        s = schmidt_entropy(v, part, geom)
        assert -1e-12 <= s <= math.log(min(da, db)) + 1e-12


def test_batched_matches_single():
    geom = Geometry.majorana(8)
    V = np.column_stack([_random_state(s, 256) for s in range(7)])
    for part in Partition:
        batch = schmidt_entropies(V, part, geom, chunk=3)
        single = [schmidt_entropy(V[:, k], part, geom) for k in range(7)]
        np.testing.assert_allclose(batch, single, atol=1e-13)
        assert coefficient_matrix(V, part, geom).shape == (7, *partition_dims(part, geom))


def test_intrasite_reshape_by_hand():
    # spin(2): qubits (L1, L2, R1, R2); intrasite groups (L1, R1) against (L2, R2)
    geom = Geometry.spin(2)
    v = np.zeros(16)
    v[int("1001", 2)] = 1.0  # L1=1, L2=0, R1=0, R2=1
    C = coefficient_matrix(v, "intrasite", geom)
    assert C[int("10", 2), int("01", 2)] == 1.0


def test_rejects_unnormalized():
    geom = Geometry.spin(2)
    with pytest.raises(ValueError):
        schmidt_entropy(2 * _random_state(0, 16), "intersite", geom)


def test_page_value():
    # harmonic sum evaluated independently with exact fractions
    from fractions import Fraction

    exact = sum(Fraction(1, j) for j in range(65, 64 * 64 + 1)) - Fraction(63, 128)
    assert page_value(64) == pytest.approx(float(exact), rel=1e-14)
    assert page_value(64) == pytest.approx(math.log(64) - 0.5, abs=0.01)
    assert page_value(2) == pytest.approx(1 / 3 + 1 / 4 - 1 / 4)
    with pytest.raises(ValueError):
        page_value(1)


def test_entropy_record():
    geom = Geometry.spin(2)
    v = tfd_state(geom, "pseudo")
    rec = entropy_record(v, 0.0, geom)
    assert rec.entropy_intersite == pytest.approx(math.log(4))
    assert rec.schmidt_spectrum.sum() == pytest.approx(1)
