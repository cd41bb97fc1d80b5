import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kseparability.criteria import (
    EPS,
    assemble_report,
    classify,
    uniform_level_k_report,
    probe_terms,
    level_k_report,
    pairwise_reports,
    two_copy_oracle,
)
from kseparability.probes import Probe, catalog, expand, probe_computational, probe_custom, probe_phase_flip, random_probe
from kseparability.states import (
    FamilyPoint,
    biseparable_triple,
    family_state,
    ghz,
    random_density,
    random_k_separable,
    w_state,
)
from kseparability.tensor import DensityOperator, ValidationError


def naive_margin(rho, probe, k):
    """Direct ordered-pair sums from the dense matrix, no shared code with the fast path."""
    R = rho.to_dense()
    n = probe.n
    x, y = probe.base, probe.flipped

    def vec(flips):
        out = np.ones(1, dtype=complex)
        for l in range(n):
            out = np.kron(out, y[l] if l in flips else x[l])
        return out

    def el(a, b):
        return np.vdot(a, R @ b)

    phi = vec(())
    lhs = sum(abs(el(vec((i,)), vec((j,)))) for i in range(n) for j in range(n) if i != j)
    rp = sum(np.sqrt(el(phi, phi).real * el(vec((i, j)), vec((i, j))).real) for i in range(n) for j in range(n) if i != j)
    rd = sum(el(vec((i,)), vec((i,))).real for i in range(n))
    return lhs, rp, rd, lhs - rp - (n - k) * rd


def pure(v, dims):
    return DensityOperator.from_ensemble([1.0], [v], dims)


def permute_state(rho, perm):
    n = rho.n
    dims = [rho.dims[p] for p in perm]
    T = rho.to_dense().reshape(list(rho.dims) * 2).transpose(list(perm) + [n + p for p in perm])
    return DensityOperator.from_matrix(T.reshape(rho.D, rho.D), dims)


def permute_probe(probe, perm):
    return Probe([probe.dims[p] for p in perm], [probe.base[p] for p in perm], [probe.flipped[p] for p in perm])


def test_w_noise_worked_values():
    rho = family_state(FamilyPoint("w-noise", 3, (0.6,)))
    r = level_k_report(rho, probe_computational([2, 2, 2]), 2)
    assert r.lhs == pytest.approx(1.2, abs=1e-12)
    assert r.rhs_pair == pytest.approx(0.3, abs=1e-12)
    assert r.rhs_diag == pytest.approx(0.75, abs=1e-12)
    assert r.margin == pytest.approx(0.15, abs=1e-12)
    assert r.detected
    assert level_k_report(rho, probe_computational([2, 2, 2]), 3).margin == pytest.approx(0.9, abs=1e-12)


def test_ghz_phase_flip_worked_values():
    r = level_k_report(pure(ghz(3), [2, 2, 2]), probe_phase_flip([2, 2, 2]), 2)
    assert (r.lhs, r.rhs_pair, r.rhs_diag, r.margin) == pytest.approx((1.5, 0.0, 0.75, 0.75), abs=1e-12)
    assert r.detected and r.probe == "phase-flip"


def test_pure_w_and_maximally_mixed():
    comp = probe_computational([2, 2, 2])
    w = pure(w_state(3), [2, 2, 2])
    assert level_k_report(w, comp, 2).margin == pytest.approx(1.0, abs=1e-12)
    assert level_k_report(w, comp, 3).margin == pytest.approx(2.0, abs=1e-12)
    mixed = DensityOperator.from_matrix(np.eye(8) / 8, [2, 2, 2])
    r = level_k_report(mixed, comp, 3)
    assert (r.lhs, r.rhs_pair, r.margin) == pytest.approx((0.0, 0.75, -0.75), abs=1e-12)
    assert not r.detected


def test_naive_oracle_matches_worked_values():
    rho = family_state(FamilyPoint("w-noise", 3, (0.6,)))
    assert naive_margin(rho, probe_computational([2, 2, 2]), 2) == pytest.approx((1.2, 0.3, 0.75, 0.15), abs=1e-12)


def test_k_out_of_range():
    rho = family_state(FamilyPoint("w-noise", 3, (0.6,)))
    for k in (1, 4):
        with pytest.raises(ValidationError):
            level_k_report(rho, probe_computational([2, 2, 2]), k)


def test_dims_mismatch():
    rho = family_state(FamilyPoint("w-noise", 3, (0.6,)))
    with pytest.raises(ValidationError):
        level_k_report(rho, probe_computational([2, 2]), 2)


def test_uniform_pair_equals_computational_probe():
    rho = random_density([2, 2, 2], 3, seed=1)
    a = uniform_level_k_report(rho, [1, 0], [0, 1], 2)
    b = level_k_report(rho, probe_computational([2, 2, 2]), 2)
    assert a.margin == pytest.approx(b.margin, abs=1e-14)
    with pytest.raises(ValidationError):
        uniform_level_k_report(random_density([2, 3], 2, seed=0), [1, 0], [0, 1], 2)


def _random_probe_nonorth(dims, seed):
    rng = np.random.default_rng(seed)
    base, flipped = [], []
    for d in dims:
        for out in (base, flipped):
            v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
            out.append(v / np.linalg.norm(v))
    return probe_custom(base, flipped, dims=dims)


@pytest.mark.parametrize("dims", [(2, 2), (2, 2, 2), (2, 3), (2, 3, 2)])
def test_fast_path_matches_two_copy_oracle(dims):
    for seed in range(12):
        rho = random_density(dims, rank=1 + seed % 4, seed=seed)
        probe = random_probe(dims, seed) if seed % 2 else _random_probe_nonorth(dims, seed)
        o = two_copy_oracle(rho, probe)
        t = probe_terms(rho, probe)
        n = len(dims)
        assert o.max_imag < 1e-10
        for p, (i, j) in enumerate(t.pairs):
            for a, b in ((i, j), (j, i)):
                assert abs(o.lhs_terms[a, b] - t.offdiag_abs[p]) < 1e-10
                assert abs(o.pair_terms[a, b] - np.sqrt(t.phi_diag * t.pair_diag[p])) < 1e-10
        assert np.allclose(o.diag_terms, t.single_diag, atol=1e-10)
        for k in range(2, n + 1):
            assert abs(o.margin(k) - level_k_report(rho, probe, k).margin) < 1e-10
            assert abs(naive_margin(rho, probe, k)[3] - level_k_report(rho, probe, k).margin) < 1e-10


def test_oracle_size_limit():
    rho = family_state(FamilyPoint("w-noise", 7, (0.5,)))
    with pytest.raises(ValidationError):
        two_copy_oracle(rho, probe_computational([2] * 7))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(2, 4), rank=st.integers(1, 4))
def test_margin_ladder_and_pair_sum(seed, n, rank):
    dims = [2] * n
    rho = random_density(dims, rank, seed=seed)
    probe = random_probe(dims, seed)
    reports = [level_k_report(rho, probe, k) for k in range(2, n + 1)]
    for lo, hi in zip(reports, reports[1:]):
        assert hi.margin - lo.margin == pytest.approx(lo.rhs_diag, rel=1e-12, abs=1e-14)
    pairs = pairwise_reports(rho, probe)
    assert len(pairs) == n * (n - 1) // 2
    assert 2 * sum(p.margin for p in pairs) == pytest.approx(reports[-1].margin, rel=1e-12, abs=1e-14)
    if reports[-1].margin > EPS:
        assert any(p.violated for p in pairs)


def test_full_level_detection_implies_pairwise_violation():
    count = 0
    for seed in range(60):
        rho = random_density([2, 2, 2], 1, seed=seed)
        for probe in catalog([2, 2, 2], n_random=2, seed=seed):
            if level_k_report(rho, probe, 3).detected:
                count += 1
                assert any(p.violated for p in pairwise_reports(rho, probe))
    assert count > 0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), lam=st.floats(0, 1))
def test_margin_is_convex_in_state(seed, lam):
    dims = [2, 2, 2]
    a = random_density(dims, 1, seed=seed)
    b = random_density(dims, 2, seed=seed + 1)
    mix = DensityOperator.from_matrix(lam * a.to_dense() + (1 - lam) * b.to_dense(), dims, validate=False)
    probe = random_probe(dims, seed)
    for k in (2, 3):
        m = level_k_report(mix, probe, k).margin
        assert m <= lam * level_k_report(a, probe, k).margin + (1 - lam) * level_k_report(b, probe, k).margin + 1e-12


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), phases=st.lists(st.floats(0, 2 * np.pi), min_size=6, max_size=6))
def test_invariant_under_local_phases(seed, phases):
    dims = [2, 2, 2]
    rho = random_density(dims, 2, seed=seed)
    p = random_probe(dims, seed)
    ph = np.exp(1j * np.array(phases))
    q = Probe(dims, [ph[l] * p.base[l] for l in range(3)], [ph[3 + l] * p.flipped[l] for l in range(3)])
    for k in (2, 3):
        assert level_k_report(rho, q, k).margin == pytest.approx(level_k_report(rho, p, k).margin, abs=1e-12)


@pytest.mark.parametrize("dims", [(2, 2, 2), (2, 3, 2)])
def test_covariant_under_site_permutations(dims):
    rho = random_density(dims, 3, seed=7)
    probe = random_probe(dims, 7)
    for perm in itertools.permutations(range(len(dims))):
        r2, p2 = permute_state(rho, perm), permute_probe(probe, perm)
        for k in range(2, len(dims) + 1):
            assert level_k_report(r2, p2, k).margin == pytest.approx(level_k_report(rho, probe, k).margin, abs=1e-12)


@pytest.mark.parametrize("n,k", [(3, 2), (3, 3), (4, 2), (4, 3), (4, 4)])
def test_k_separable_states_are_never_detected(n, k):
    dims = [2] * n
    probes = [expand(p) for p in catalog(dims, n_random=4, seed=100)]
    for seed in range(80):
        rho = random_k_separable(dims, k, components=1 + seed % 4, seed=seed)
        for pv in probes:
            assert level_k_report(rho, pv, k).margin <= EPS


def test_biseparable_triple_is_not_detected_at_level_two():
    probes = [expand(p) for p in catalog([2, 2, 2], n_random=30, seed=3)]
    rng = np.random.default_rng(0)
    for p in [(1 / 3, 1 / 3, 1 / 3), *rng.dirichlet([1, 1, 1], size=5)]:
        rho = biseparable_triple(*p)
        for pv in probes:
            assert level_k_report(rho, pv, 2).margin <= EPS


def test_ensemble_and_dense_reports_agree():
    rho = family_state(FamilyPoint("gw", 4, (0.3, 0.5)))
    dense = DensityOperator.from_matrix(rho.to_dense(), rho.dims)
    for probe in catalog(rho.dims, n_random=2):
        for k in (2, 3, 4):
            assert level_k_report(rho, probe, k).margin == pytest.approx(level_k_report(dense, probe, k).margin, abs=1e-13)


def test_assemble_report_serialization():
    rho = family_state(FamilyPoint("w-noise", 3, (0.6,)))
    r = assemble_report(probe_terms(rho, probe_computational([2, 2, 2])), 2)
    assert set(r.to_dict()) == {"k", "lhs", "rhs_pair", "rhs_diag", "margin", "detected", "probe"}


def test_classify_examples():
    dims = [2, 2, 2]
    c = classify(pure(ghz(3), dims), catalog(dims))
    assert c.min_k == 2
    assert c.best_probe[2] == "phase-flip"
    assert c.pairwise_violated
    c = classify(DensityOperator.from_matrix(np.eye(8) / 8, dims), catalog(dims, n_random=8))
    assert c.min_k is None and not c.pairwise_violated
    c = classify(family_state(FamilyPoint("w-noise", 3, (0.5,))), [probe_computational(dims)])
    assert c.min_k == 3
    assert c.per_probe[0].margins[2] < 0 < c.per_probe[0].margins[3]
    d = c.to_dict()
    assert d["min_k"] == 3 and d["per_probe"][0]["probe"] == "computational"
    with pytest.raises(ValidationError):
        classify(pure(ghz(3), dims), [])


def test_w_noise_four_qubits_levels():
    rho = family_state(FamilyPoint("w-noise", 4, (0.4,)))
    probe = probe_computational([2] * 4)
    assert [level_k_report(rho, probe, k).detected for k in (2, 3, 4)] == [False, True, True]
