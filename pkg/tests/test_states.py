import itertools
from collections import Counter

import numpy as np
import pytest

from kseparability.states import (
    FamilyPoint,
    Partition,
    anti_w,
    biseparable_triple,
    family_state,
    ghz,
    random_density,
    random_k_separable,
    random_partition,
    w_state,
)
from kseparability.tensor import ValidationError, matrix_element, validate_density_matrix


def basis(D, i):
    v = np.zeros(D)
    v[i] = 1
    return v


def set_partitions(items, k):
    """All partitions of ``items`` into exactly k nonempty blocks (brute force)."""
    items = list(items)
    for labels in itertools.product(range(k), repeat=len(items)):
        if len(set(labels)) != k:
            continue
        # canonical: first occurrence order
        seen = []
        for lab in labels:
            if lab not in seen:
                seen.append(lab)
        if seen != list(range(k)):
            continue
        yield [tuple(x for x, lab in zip(items, labels) if lab == b) for b in range(k)]


def is_product_across(vec, dims, blocks):
    """True if ``vec`` is a product over ``blocks`` (rank one across every block/rest cut)."""
    n = len(dims)
    tensor = vec.reshape(dims)
    for block in blocks:
        rest = [s for s in range(n) if s not in block]
        mat = tensor.transpose(list(block) + rest).reshape(int(np.prod([dims[s] for s in block])), -1)
        sv = np.linalg.svd(mat, compute_uv=False)
        if sv[1:].sum() > 1e-10 if len(sv) > 1 else False:
            return False
    return True


def test_ghz_examples():
    s = 1 / np.sqrt(2)
    assert np.allclose(ghz(2), [s, 0, 0, s])
    g3 = ghz(3)
    assert np.allclose(g3[[0, 7]], s) and np.allclose(g3[1:7], 0)
    for n in range(2, 11):
        assert np.linalg.norm(ghz(n)) == pytest.approx(1, abs=1e-14)
    with pytest.raises(ValidationError):
        ghz(1)


def test_w_and_anti_w_examples():
    s2, s3 = 1 / np.sqrt(2), 1 / np.sqrt(3)
    assert np.allclose(w_state(2), [0, s2, s2, 0])
    w3 = np.zeros(8)
    w3[[1, 2, 4]] = s3
    assert np.allclose(w_state(3), w3)
    aw3 = np.zeros(8)
    aw3[[3, 5, 6]] = s3
    assert np.allclose(anti_w(3), aw3)
    for n in range(2, 9):
        assert abs(np.vdot(w_state(n), ghz(n))) < 1e-15
    assert abs(np.vdot(anti_w(3), w_state(3))) < 1e-15
    assert np.allclose(anti_w(2), w_state(2))


def test_family_state_examples():
    for n in (2, 3, 5):
        rho = family_state(FamilyPoint("w-noise", n, (0.0,)))
        assert np.allclose(rho.to_dense(), np.eye(2**n) / 2**n)
    rho = family_state(FamilyPoint("w-noise", 3, (1.0,)))
    assert matrix_element(rho, basis(8, 1), basis(8, 2)) == pytest.approx(1 / 3, abs=1e-14)
    rho = family_state(FamilyPoint("gw", 4, (1.0, 0.0)))
    assert rho.purity() == pytest.approx(1, abs=1e-12)


def test_family_point_rejects_bad_weights():
    with pytest.raises(ValidationError):
        FamilyPoint("gw", 3, (0.7, 0.5))
    with pytest.raises(ValidationError):
        FamilyPoint("w-noise", 3, (-0.1,))
    with pytest.raises(ValidationError):
        FamilyPoint("w-antiw", 3, (0.1,))
    with pytest.raises(ValidationError):
        FamilyPoint("dicke", 3, (0.1,))


def test_family_states_are_valid_on_grid():
    grid = np.linspace(0, 1, 6)
    for fam in ("gw", "w-antiw"):
        for a in grid:
            for b in grid:
                if a + b > 1 + 1e-12:
                    continue
                rho = family_state(FamilyPoint(fam, 3, (a, b)))
                validate_density_matrix(rho.to_dense(), rho.dims)
    for b in grid:
        rho = family_state(FamilyPoint("w-noise", 4, (b,)))
        validate_density_matrix(rho.to_dense(), rho.dims)


def test_biseparable_triple():
    s = 1 / np.sqrt(2)
    rho = biseparable_triple(1, 0, 0)
    psi1 = np.zeros(8)
    psi1[[0, 3]] = s  # |0>_0 (|00>+|11>)_{12}
    assert np.allclose(rho.to_dense(), np.outer(psi1, psi1))
    rho = biseparable_triple(1 / 3, 1 / 3, 1 / 3)
    assert matrix_element(rho, basis(8, 0), basis(8, 0)) == pytest.approx(0.5, abs=1e-14)
    for p in [(0.2, 0.3, 0.5), (0.6, 0.2, 0.2)]:
        assert np.trace(biseparable_triple(*p).to_dense()).real == pytest.approx(1, abs=1e-14)
    with pytest.raises(ValidationError):
        biseparable_triple(0.5, 0.5, 0.5)
    # every component is bi-separable under its own cut
    comps = biseparable_triple(1 / 3, 1 / 3, 1 / 3).vectors
    for vec, blocks in zip(comps, [[(0,), (1, 2)], [(1,), (0, 2)], [(2,), (0, 1)]]):
        assert is_product_across(vec, (2, 2, 2), blocks)


def test_partition_validation():
    assert Partition(((0, 2), (1,))).k == 2
    with pytest.raises(ValidationError):
        Partition(((0, 1), (1, 2)))
    with pytest.raises(ValidationError):
        Partition(((0,), ()))


def test_random_partition_is_uniform():
    rng = np.random.default_rng(11)
    n, k = 4, 2
    expected = {tuple(map(tuple, p)) for p in set_partitions(range(n), k)}
    assert len(expected) == 7  # Stirling S(4, 2)
    draws = 7000
    counts = Counter(random_partition(n, k, rng).blocks for _ in range(draws))
    assert set(counts) == expected
    for c in counts.values():
        assert abs(c - draws / 7) < 0.15 * draws / 7


@pytest.mark.parametrize("dims,k", [((2, 2, 2), 2), ((2, 2, 2, 2), 3), ((2, 3, 2), 2), ((2, 2, 2, 2), 4)])
def test_random_k_separable_components_are_k_products(dims, k):
    rho = random_k_separable(dims, k, components=6, seed=5)
    assert rho.weights.sum() == pytest.approx(1, abs=1e-12)
    for vec in rho.vectors:
        assert np.linalg.norm(vec) == pytest.approx(1, abs=1e-12)
        assert any(is_product_across(vec, dims, blocks) for blocks in set_partitions(range(len(dims)), k))


def test_random_k_separable_full_product_and_single_block():
    rho = random_k_separable((2, 2, 2), 3, components=4, seed=2)
    for vec in rho.vectors:
        assert is_product_across(vec, (2, 2, 2), [(0,), (1,), (2,)])
    one = random_k_separable((2, 2, 2), 1, components=1, seed=2)
    assert one.weights.tolist() == [1.0]
    with pytest.raises(ValidationError):
        random_k_separable((2, 2), 3, components=1)


def test_random_k_separable_is_deterministic():
    a = random_k_separable((2, 2, 2), 2, 3, seed=9)
    b = random_k_separable((2, 2, 2), 2, 3, seed=9)
    assert np.array_equal(a.vectors, b.vectors) and np.array_equal(a.weights, b.weights)


def test_random_density():
    rho = random_density((2, 2), 1, seed=0)
    assert rho.purity() == pytest.approx(1, abs=1e-10)
    a = random_density((2, 3), 6, seed=4).to_dense()
    b = random_density((2, 3), 6, seed=4).to_dense()
    assert np.array_equal(a, b)
    for seed in range(5):
        lam = np.linalg.eigvalsh(random_density((2, 2, 2), 3, seed=seed).to_dense())
        assert lam.min() >= -1e-12
    with pytest.raises(ValidationError):
        random_density((2, 2), 5)
