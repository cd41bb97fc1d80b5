import numpy as np
import pytest

from kseparability.probes import (
    Probe,
    catalog,
    expand,
    load_probe,
    parse_probe,
    probe_45,
    probe_anticomputational,
    probe_computational,
    probe_custom,
    probe_phase_flip,
    random_probe,
    save_probe,
)
from kseparability.states import ghz
from kseparability.tensor import ValidationError

S = 1 / np.sqrt(2)


def basis(D, i):
    v = np.zeros(D)
    v[i] = 1
    return v


def test_computational_expansion_n3():
    pv = expand(probe_computational([2, 2, 2]))
    assert np.allclose(pv.phi, basis(8, 0))
    assert np.allclose(pv.singles, [basis(8, 4), basis(8, 2), basis(8, 1)])
    assert pv.pairs == ((0, 1), (0, 2), (1, 2))
    assert np.allclose(pv.doubles, [basis(8, 6), basis(8, 5), basis(8, 3)])
    assert pv.count == 7
    assert pv.stacked.shape == (7, 8)


def test_anticomputational_is_bit_flip():
    pv = expand(probe_anticomputational([2, 2, 2]))
    assert np.allclose(pv.phi, basis(8, 7))
    assert np.allclose(pv.singles, [basis(8, 3), basis(8, 5), basis(8, 6)])


def test_45_and_phase_flip_examples():
    pv = expand(probe_45([2, 2]))
    assert np.allclose(pv.phi, np.full(4, 0.5))
    assert np.allclose(pv.doubles[0], [0.5, -0.5, -0.5, 0.5])
    pf = expand(probe_phase_flip([2, 2, 2]))
    g = ghz(3)
    assert abs(np.vdot(pf.phi, g)) < 1e-15
    assert np.allclose(np.abs(pf.singles.conj() @ g), 0.5)
    assert np.allclose(pf.doubles.conj() @ g, 0, atol=1e-15)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_vector_counts(n):
    pv = expand(random_probe([2] * n, seed=n))
    assert pv.count == 1 + n + n * (n - 1) // 2
    norms = np.linalg.norm(pv.stacked, axis=1)
    assert np.allclose(norms, 1, atol=1e-12)


def test_orthogonal_probe_gives_orthonormal_family():
    for probe in catalog([2, 3, 2], n_random=3):
        M = expand(probe).stacked
        assert np.allclose(M.conj() @ M.T, np.eye(len(M)), atol=1e-12)


def test_random_probe_deterministic_and_orthonormal():
    a, b = random_probe([2, 3], 5), random_probe([2, 3], 5)
    for x, y in zip(a.base + a.flipped, b.base + b.flipped):
        assert np.array_equal(x, y)
    for x, y in zip(a.base, a.flipped):
        assert abs(np.vdot(x, y)) < 1e-12
    assert a.label == "random:5"
    c = random_probe([2, 3], 6)
    assert not np.allclose(a.base[0], c.base[0])


def test_probe_validation():
    with pytest.raises(ValidationError, match="normalized"):
        probe_custom([[1, 1], [1, 0]], [[0, 1], [0, 1]])
    with pytest.raises(ValidationError, match="parallel"):
        probe_custom([[1, 0], [1, 0]], [[1j, 0], [0, 1]])
    with pytest.raises(ValidationError):
        Probe([2, 2], ([1, 0],), ([0, 1],))
    # non-orthogonal but non-parallel is fine
    p = probe_custom([[1, 0], [1, 0]], [[S, S], [0, 1]])
    assert p.n == 2


def test_catalog_contents():
    labels = [p.label for p in catalog([2, 2, 2], n_random=2, seed=10)]
    assert labels == ["computational", "anticomputational", "45", "phase-flip", "random:10", "random:11"]


def test_parse_probe(tmp_path):
    assert parse_probe("45", [2, 2]).label == "45"
    assert parse_probe("random:3", [2, 2]).label == "random:3"
    p = random_probe([2, 2, 2], 4)
    save_probe(p, tmp_path / "p.json")
    q = parse_probe(f"file:{tmp_path / 'p.json'}", [2, 2, 2])
    for x, y in zip(p.base + p.flipped, q.base + q.flipped):
        assert np.array_equal(x, y)
    assert load_probe(tmp_path / "p.json").label == "random:4"
    with pytest.raises(ValidationError):
        parse_probe(f"file:{tmp_path / 'p.json'}", [2, 2])
    with pytest.raises(ValidationError):
        parse_probe("random:x", [2, 2])
    with pytest.raises(ValidationError):
        parse_probe("bogus", [2, 2])
