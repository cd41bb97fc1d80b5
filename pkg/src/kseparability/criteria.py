"""k-separability inequalities evaluated from a handful of matrix elements.

For a probe with vectors ``phi``, ``phi_i``, ``phi_ij`` every k-separable
n-partite state satisfies

    sum_{i != j} |<phi_i|rho|phi_j>|
        <= sum_{i != j} sqrt(<phi|rho|phi> <phi_ij|rho|phi_ij>)
           + (n - k) sum_i <phi_i|rho|phi_i>

The ``margin`` of a report is left side minus right side; a margin above
``eps`` certifies that the state is not k-separable. Each fully separable
state also satisfies the n(n-1)/2 pairwise inequalities
``|<phi_i|rho|phi_j>| <= sqrt(<phi|rho|phi> <phi_ij|rho|phi_ij>)``.

The fast path only needs ``1 + n + n(n-1)/2`` probe vectors. The two-copy
oracle evaluates the same quantities literally as expectation values of
``rho (x) rho`` against swap operators on the doubled space, and exists to
check the fast path.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .probes import Probe, ProbeVectors, expand
from .tensor import DensityOperator, ValidationError, build_swap, kron

__all__ = [
    "EPS",
    "ORACLE_MAX_DIM",
    "CriterionReport",
    "PairReport",
    "ProbeTerms",
    "OracleTerms",
    "Classification",
    "probe_terms",
    "terms_from_gram",
    "assemble_report",
    "level_k_report",
    "uniform_level_k_report",
    "pairwise_reports",
    "two_copy_oracle",
    "classify",
]

EPS = 1e-9
ORACLE_MAX_DIM = 64


@dataclass(frozen=True)
class CriterionReport:
    k: int
    n: int
    lhs: float
    rhs_pair: float
    rhs_diag: float
    margin: float
    detected: bool
    probe: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("n")
        return d


@dataclass(frozen=True)
class PairReport:
    pair: tuple[int, int]
    lhs_pair: float
    rhs_pair: float
    violated: bool

    @property
    def margin(self) -> float:
        return self.lhs_pair - self.rhs_pair


@dataclass(frozen=True, eq=False)
class ProbeTerms:
    """The matrix elements a probe extracts from a state.

    ``offdiag_abs[p]`` and ``pair_diag[p]`` refer to ``pairs[p] = (i, j)``
    with ``i < j``.
    """

    n: int
    label: str
    pairs: tuple[tuple[int, int], ...]
    phi_diag: float
    single_diag: np.ndarray
    pair_diag: np.ndarray
    offdiag_abs: np.ndarray


def _as_vectors(probe: Probe | ProbeVectors) -> ProbeVectors:
    return probe if isinstance(probe, ProbeVectors) else expand(probe)


def _check_dims(rho: DensityOperator, probe: Probe) -> None:
    if rho.dims != probe.dims:
        raise ValidationError(f"state dims {rho.dims.dims} do not match probe dims {probe.dims.dims}")


def terms_from_gram(gram: np.ndarray, vectors: ProbeVectors) -> ProbeTerms:
    """Extract :class:`ProbeTerms` from ``gram[a, b] = <v_a|rho|v_b>`` over ``vectors.stacked``."""
    n = vectors.probe.n
    diag = np.maximum(gram.diagonal().real, 0.0)
    single = 1 + np.arange(n)
    iu = np.array(vectors.pairs, dtype=int).reshape(-1, 2)
    offdiag = np.abs(gram[single[iu[:, 0]], single[iu[:, 1]]])
    return ProbeTerms(
        n=n,
        label=vectors.probe.label,
        pairs=vectors.pairs,
        phi_diag=float(diag[0]),
        single_diag=diag[1 : n + 1],
        pair_diag=diag[n + 1 :],
        offdiag_abs=offdiag,
    )


def probe_terms(rho: DensityOperator, probe: Probe | ProbeVectors) -> ProbeTerms:
    vectors = _as_vectors(probe)
    _check_dims(rho, vectors.probe)
    return terms_from_gram(rho.gram(vectors.stacked), vectors)


def _check_k(k: int, n: int) -> int:
    if not 2 <= k <= n:
        raise ValidationError(f"k must satisfy 2 <= k <= n={n}, got {k}")
    return int(k)


def assemble_report(terms: ProbeTerms, k: int, eps: float = EPS) -> CriterionReport:
    """Combine probe terms into the level-k inequality.

    Sums over ordered pairs ``i != j`` are taken as twice the sum over
    ``i < j``, pairs in lexicographic order.
    """
    n = terms.n
    k = _check_k(k, n)
    lhs = 2.0 * float(np.sum(terms.offdiag_abs))
    rhs_pair = 2.0 * float(np.sum(np.sqrt(terms.phi_diag * terms.pair_diag)))
    rhs_diag = float(np.sum(terms.single_diag))
    margin = lhs - rhs_pair - (n - k) * rhs_diag
    return CriterionReport(k, n, lhs, rhs_pair, rhs_diag, margin, bool(margin > eps), terms.label)


def level_k_report(rho: DensityOperator, probe: Probe | ProbeVectors, k: int, eps: float = EPS) -> CriterionReport:
    """Evaluate the level-k inequality for ``rho`` and ``probe``.

    Parameters
    ----------
    rho : DensityOperator
        State to test, dense or ensemble form.
    probe : Probe or ProbeVectors
        Local vector pairs; pass pre-expanded vectors in tight loops.
    k : int
        Separability level, ``2 <= k <= n``.
    eps : float
        Detection threshold on the margin.

    Returns
    -------
    CriterionReport
        ``detected`` is True only if ``margin > eps``, which certifies that
        ``rho`` is not k-separable.
    """
    _check_k(k, rho.n)
    return assemble_report(probe_terms(rho, probe), k, eps)


def uniform_level_k_report(rho: DensityOperator, x, y, k: int, eps: float = EPS) -> CriterionReport:
    """Level-k inequality with the same pair ``(x, y)`` at every site."""
    if len(set(rho.dims.dims)) != 1:
        raise ValidationError(f"uniform probes need identical local dimensions, got {rho.dims.dims}")
    n = rho.n
    probe = Probe(rho.dims, [x] * n, [y] * n, "uniform")
    return level_k_report(rho, probe, k, eps)


def pairwise_reports(rho: DensityOperator, probe: Probe | ProbeVectors, eps: float = EPS) -> list[PairReport]:
    """Pairwise full-separability tests, one per unordered pair ``i < j``."""
    terms = probe_terms(rho, probe)
    rhs = np.sqrt(terms.phi_diag * terms.pair_diag)
    return [
        PairReport(pair, float(l), float(r), bool(l - r > eps))
        for pair, l, r in zip(terms.pairs, terms.offdiag_abs, rhs)
    ]


@dataclass(frozen=True, eq=False)
class OracleTerms:
    """Two-copy expectation values, indexed by site.

    ``lhs_raw[i, j] = <Phi_ij| rho(x)rho P_tot |Phi_ij>`` and
    ``pair_raw[i, j] = <Phi_ij| P_i^dag rho(x)rho P_i |Phi_ij>`` for
    ``i != j`` (diagonal entries unused), ``diag_raw[i]`` is the ``Phi_ii``
    counterpart of ``pair_raw``. The square roots of the real parts are the
    inequality terms.
    """

    lhs_raw: np.ndarray
    pair_raw: np.ndarray
    diag_raw: np.ndarray
    max_imag: float

    @property
    def lhs_terms(self) -> np.ndarray:
        return np.sqrt(np.maximum(self.lhs_raw.real, 0.0))

    @property
    def pair_terms(self) -> np.ndarray:
        return np.sqrt(np.maximum(self.pair_raw.real, 0.0))

    @property
    def diag_terms(self) -> np.ndarray:
        return np.sqrt(np.maximum(self.diag_raw.real, 0.0))

    def _offdiag_sum(self, a: np.ndarray) -> float:
        mask = ~np.eye(a.shape[0], dtype=bool)
        return float(np.sum(a[mask]))

    @property
    def lhs(self) -> float:
        return self._offdiag_sum(self.lhs_terms)

    @property
    def rhs_pair(self) -> float:
        return self._offdiag_sum(self.pair_terms)

    @property
    def rhs_diag(self) -> float:
        return float(np.sum(self.diag_terms))

    def margin(self, k: int) -> float:
        n = self.diag_raw.size
        return self.lhs - self.rhs_pair - (n - k) * self.rhs_diag


def two_copy_oracle(rho: DensityOperator, probe: Probe) -> OracleTerms:
    """Evaluate every inequality term on the doubled space ``H (x) H``.

    Builds ``rho (x) rho`` and the doubled vectors ``|phi_i>|phi_j>``
    explicitly and applies the site-swap permutations. Only intended for
    ``D <= 64``.
    """
    _check_dims(rho, probe)
    D, n = rho.D, rho.n
    if D > ORACLE_MAX_DIM:
        raise ValidationError(f"two-copy oracle limited to D <= {ORACLE_MAX_DIM}, got D={D}")
    rho2 = kron([rho.to_dense(), rho.to_dense()])
    vectors = expand(probe)
    singles = vectors.singles
    p_tot = build_swap(rho.dims, range(n))
    p_site = [build_swap(rho.dims, {i}) for i in range(n)]

    def expect(left: np.ndarray, right: np.ndarray) -> complex:
        return complex(left.conj() @ (rho2 @ right))

    lhs_raw = np.zeros((n, n), dtype=complex)
    pair_raw = np.zeros((n, n), dtype=complex)
    diag_raw = np.zeros(n, dtype=complex)
    for i in range(n):
        for j in range(n):
            big = np.kron(singles[i], singles[j])
            swapped = p_site[i].apply(big)
            if i == j:
                diag_raw[i] = expect(swapped, swapped)
                continue
            lhs_raw[i, j] = expect(big, p_tot.apply(big))
            pair_raw[i, j] = expect(swapped, swapped)
    max_imag = float(max(np.abs(lhs_raw.imag).max(), np.abs(pair_raw.imag).max(), np.abs(diag_raw.imag).max()))
    return OracleTerms(lhs_raw, pair_raw, diag_raw, max_imag)


@dataclass(frozen=True)
class ProbeClassification:
    probe: str
    margins: dict[int, float]
    min_k: int | None
    pairwise_violated: bool


@dataclass(frozen=True)
class Classification:
    """Per-probe detection levels plus the best margin over probes at each k."""

    n: int
    per_probe: list[ProbeClassification]
    best_margin: dict[int, float]
    best_probe: dict[int, str]
    min_k: int | None
    pairwise_violated: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "min_k": self.min_k,
            "pairwise_violated": self.pairwise_violated,
            "best_margin": {str(k): v for k, v in self.best_margin.items()},
            "best_probe": {str(k): v for k, v in self.best_probe.items()},
            "per_probe": [
                {
                    "probe": p.probe,
                    "min_k": p.min_k,
                    "pairwise_violated": p.pairwise_violated,
                    "margins": {str(k): v for k, v in p.margins.items()},
                }
                for p in self.per_probe
            ],
        }


def classify(rho: DensityOperator, probes: Sequence[Probe] | Iterable[Probe], eps: float = EPS) -> Classification:
    """Smallest level k at which each probe certifies k-nonseparability.

    Detection at k implies detection at every larger k, since raising k by
    one adds ``rhs_diag >= 0`` to the margin.
    """
    probes = list(probes)
    if not probes:
        raise ValidationError("classify needs at least one probe")
    n = rho.n
    levels = range(2, n + 1)
    per_probe = []
    for probe in probes:
        terms = probe_terms(rho, probe)
        margins = {k: assemble_report(terms, k, eps).margin for k in levels}
        min_k = next((k for k in levels if margins[k] > eps), None)
        t2 = bool(np.any(terms.offdiag_abs - np.sqrt(terms.phi_diag * terms.pair_diag) > eps))
        per_probe.append(ProbeClassification(probe.label, margins, min_k, t2))
    best_margin, best_probe = {}, {}
    for k in levels:
        best = max(per_probe, key=lambda p: p.margins[k])
        best_margin[k] = best.margins[k]
        best_probe[k] = best.probe
    found = [p.min_k for p in per_probe if p.min_k is not None]
    return Classification(
        n=n,
        per_probe=per_probe,
        best_margin=best_margin,
        best_probe=best_probe,
        min_k=min(found) if found else None,
        pairwise_violated=any(p.pairwise_violated for p in per_probe),
    )


# short names used by the command-line contract and external callers
theorem1 = level_k_report
theorem2 = pairwise_reports
corollary = uniform_level_k_report
