"""Local measurement settings that reconstruct the k-separability inequality.

With ``T_l = |x_l><x_l|``, ``Q_l = |x~_l><x~_l|``,
``M_l = |x~_l><x_l| + |x_l><x~_l|`` and
``Mt_l = i|x~_l><x_l| - i|x_l><x~_l|`` the needed quantities come from
product observables only:

* ``<phi|rho|phi>``, ``<phi_i|rho|phi_i>``, ``<phi_ij|rho|phi_ij>`` are
  expectations of products of T's and Q's (one setting each);
* ``O_ij = |phi_i><phi_j| + h.c.`` equals ``(M_i M_j + Mt_i Mt_j) / 2`` and
  ``Ot_ij = -i|phi_i><phi_j| + h.c.`` equals ``(M_i Mt_j - Mt_i M_j) / 2``,
  T's elsewhere, with ``<O_ij> = 2 Re <phi_i|rho|phi_j>`` and
  ``<Ot_ij> = -2 Im <phi_i|rho|phi_j>``.

That is ``1 + n + n(n-1)/2 + 4 n(n-1)/2 = 5(n^2-n)/2 + n + 1`` settings.
None of the identities need ``<x_l|x~_l> = 0``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce
from itertools import combinations
from pathlib import Path

import numpy as np

from .criteria import EPS, CriterionReport, ProbeTerms, assemble_report
from .probes import Probe, expand
from .states import random_density
from .tensor import DensityOperator, ValidationError, _encode, apply_local, kron

__all__ = [
    "LocalObservable",
    "MeasurementPlan",
    "IdentityCheck",
    "ShotEstimate",
    "EstimatedReport",
    "settings_count",
    "settings_plan",
    "verify_identities",
    "outcome_distribution",
    "simulate_shots",
    "exact_estimate",
    "estimated_report",
]

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class LocalObservable:
    factors: tuple[np.ndarray, ...]
    role: str
    sites: tuple[int, ...]

    def __post_init__(self):
        for l, f in enumerate(self.factors):
            if np.max(np.abs(f - f.conj().T)) > HERMITIAN_TOL:
                raise ValidationError(f"factor at site {l} of a {self.role} setting is not Hermitian")

    def matrix(self) -> np.ndarray:
        return kron(self.factors)


@dataclass(frozen=True, eq=False)
class MeasurementPlan:
    """Ordered settings plus the map from inequality terms to settings.

    ``reconstruction`` maps a term name to ``[(setting index, coefficient)]``.
    Term names are ``phi``, ``single[i]``, ``pair[i,j]``, ``O[i,j]`` and
    ``Ot[i,j]`` with 0-based sites and ``i < j``.
    """

    probe: Probe
    settings: tuple[LocalObservable, ...]
    reconstruction: dict[str, list[tuple[int, float]]]

    @property
    def n(self) -> int:
        return self.probe.n

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(combinations(range(self.n), 2))

    def __len__(self) -> int:
        return len(self.settings)

    def combine(self, term: str) -> np.ndarray:
        """Operator for ``term`` assembled from the product settings."""
        return sum(c * self.settings[s].matrix() for s, c in self.reconstruction[term])

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "dims": list(self.probe.dims.dims),
            "probe": self.probe.label,
            "settings": [
                {
                    "index": s,
                    "role": obs.role,
                    "sites": list(obs.sites),
                    "factors": [_encode(f) for f in obs.factors],
                }
                for s, obs in enumerate(self.settings)
            ],
            "reconstruction": {t: [[s, c] for s, c in v] for t, v in self.reconstruction.items()},
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))


def settings_count(n: int) -> int:
    return 5 * (n * n - n) // 2 + n + 1


def _pair_key(i: int, j: int) -> str:
    return f"[{i},{j}]"


def settings_plan(probe: Probe) -> MeasurementPlan:
    """Unmerged list of product observables for ``probe``; independent of k."""
    n = probe.n
    x, y = probe.base, probe.flipped
    T = [np.outer(v, v.conj()) for v in x]
    Q = [np.outer(v, v.conj()) for v in y]
    A = [np.outer(b, a.conj()) for a, b in zip(x, y)]  # |x~><x|
    M = [a + a.conj().T for a in A]
    Mt = [1j * a - 1j * a.conj().T for a in A]

    settings: list[LocalObservable] = []
    recon: dict[str, list[tuple[int, float]]] = {}

    def add(factors, role, sites) -> int:
        settings.append(LocalObservable(tuple(factors), role, tuple(sites)))
        return len(settings) - 1

    def replaced(subs: dict[int, np.ndarray]):
        return [subs.get(l, T[l]) for l in range(n)]

    recon["phi"] = [(add(T, "T-diagonal", ()), 1.0)]
    for i in range(n):
        recon[f"single[{i}]"] = [(add(replaced({i: Q[i]}), "single-diagonal", (i,)), 1.0)]
    pairs = list(combinations(range(n), 2))
    for i, j in pairs:
        recon["pair" + _pair_key(i, j)] = [(add(replaced({i: Q[i], j: Q[j]}), "pair-diagonal", (i, j)), 1.0)]
    for i, j in pairs:
        mm = add(replaced({i: M[i], j: M[j]}), "MM", (i, j))
        tt = add(replaced({i: Mt[i], j: Mt[j]}), "M~M~", (i, j))
        mt = add(replaced({i: M[i], j: Mt[j]}), "MM~", (i, j))
        tm = add(replaced({i: Mt[i], j: M[j]}), "M~M", (i, j))
        recon["O" + _pair_key(i, j)] = [(mm, 0.5), (tt, 0.5)]
        recon["Ot" + _pair_key(i, j)] = [(mt, 0.5), (tm, -0.5)]
    return MeasurementPlan(probe, tuple(settings), recon)


@dataclass(frozen=True)
class IdentityCheck:
    ok: bool
    max_deviation: float
    max_expectation_deviation: float


def verify_identities(plan: MeasurementPlan, rho: DensityOperator | None = None, seed: int = 0) -> IdentityCheck:
    """Compare every plan-assembled operator with its rank-1/rank-2 definition.

    Also checks ``<O_ij> = 2 Re <phi_i|rho|phi_j>`` and
    ``<Ot_ij> = -2 Im <phi_i|rho|phi_j>`` on ``rho`` (a seeded random full
    rank state if not given).
    """
    vecs = expand(plan.probe)
    if rho is None:
        rho = random_density(plan.probe.dims, plan.probe.dims.total, seed=seed)
    R = rho.to_dense()

    def proj(v):
        return np.outer(v, v.conj())

    targets = {"phi": proj(vecs.phi)}
    for i in range(plan.n):
        targets[f"single[{i}]"] = proj(vecs.singles[i])
    dev_exp = 0.0
    for p, (i, j) in enumerate(vecs.pairs):
        key = _pair_key(i, j)
        targets["pair" + key] = proj(vecs.doubles[p])
        outer = np.outer(vecs.singles[i], vecs.singles[j].conj())
        targets["O" + key] = outer + outer.conj().T
        targets["Ot" + key] = -1j * outer + 1j * outer.conj().T
        z = vecs.singles[i].conj() @ R @ vecs.singles[j]
        o = np.trace(R @ plan.combine("O" + key))
        ot = np.trace(R @ plan.combine("Ot" + key))
        dev_exp = max(dev_exp, abs(o - 2 * z.real), abs(ot + 2 * z.imag))
    dev = max(float(np.max(np.abs(plan.combine(t) - target))) for t, target in targets.items())
    return IdentityCheck(bool(dev <= 1e-12 and dev_exp <= 1e-10), dev, float(dev_exp))


def _local_eig(op: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues; each eigenvector's first nonzero entry made real positive."""
    lam, U = np.linalg.eigh(op)
    for c in range(U.shape[1]):
        col = U[:, c]
        lead = col[np.argmax(np.abs(col) > 1e-12)]
        U[:, c] = col * (abs(lead) / lead)
    return lam, U


def outcome_distribution(rho: DensityOperator, setting: LocalObservable) -> tuple[np.ndarray, np.ndarray]:
    """Joint outcome probabilities and outcome values for one product setting.

    Outcomes are indexed like the computational basis, with each site
    resolved in the eigenbasis of its factor; the value of an outcome is the
    product of the local eigenvalues.
    """
    eigs = [_local_eig(f) for f in setting.factors]
    values = reduce(np.multiply.outer, [lam for lam, _ in eigs]).ravel()
    Ud = [U.conj().T for _, U in eigs]
    if rho.matrix is not None:
        half = apply_local(rho.matrix, [U.T for _, U in eigs], rho.dims)
        probs = np.real(np.diagonal(apply_local(half.T, Ud, rho.dims)))
    else:
        amps = apply_local(rho.vectors, Ud, rho.dims)
        probs = rho.weights @ np.abs(amps) ** 2 + rho.noise / rho.D
    if probs.min() < -1e-9:
        raise ValidationError(f"negative outcome probability {probs.min():.3g}; state is not positive semidefinite")
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum(), values


@dataclass(frozen=True, eq=False)
class ShotEstimate:
    """Per-setting sample means and standard errors.

    ``shots`` is None for exact expectations (all standard errors zero).
    """

    plan: MeasurementPlan
    means: np.ndarray
    ses: np.ndarray
    shots: int | None
    seed: int | None

    def to_dict(self) -> dict:
        return {
            "probe": self.plan.probe.label,
            "shots": self.shots,
            "seed": self.seed,
            "means": self.means.tolist(),
            "se": self.ses.tolist(),
        }


def _check_plan(rho: DensityOperator, plan: MeasurementPlan) -> None:
    if rho.dims != plan.probe.dims:
        raise ValidationError(f"state dims {rho.dims.dims} do not match plan dims {plan.probe.dims.dims}")


def simulate_shots(rho: DensityOperator, plan: MeasurementPlan, shots: int, seed: int = 0) -> ShotEstimate:
    """Sample ``shots`` outcomes of every setting and estimate its expectation.

    Setting ``s`` draws from its own stream ``SeedSequence(seed).spawn(...)[s]``
    so results do not depend on evaluation order.
    """
    _check_plan(rho, plan)
    shots = int(shots)
    if shots < 1:
        raise ValueError("shots must be >= 1")
    streams = np.random.SeedSequence(seed).spawn(len(plan))
    means = np.empty(len(plan))
    ses = np.empty(len(plan))
    for s, (setting, ss) in enumerate(zip(plan.settings, streams)):
        probs, values = outcome_distribution(rho, setting)
        counts = np.random.default_rng(ss).multinomial(shots, probs)
        mean = counts @ values / shots
        var = counts @ (values - mean) ** 2 / (shots - 1) if shots > 1 else 0.0
        means[s] = mean
        ses[s] = np.sqrt(var / shots)
    return ShotEstimate(plan, means, ses, shots, seed)


def exact_estimate(rho: DensityOperator, plan: MeasurementPlan) -> ShotEstimate:
    _check_plan(rho, plan)
    means = np.empty(len(plan))
    for s, setting in enumerate(plan.settings):
        probs, values = outcome_distribution(rho, setting)
        means[s] = probs @ values
    return ShotEstimate(plan, means, np.zeros(len(plan)), None, None)


@dataclass(frozen=True)
class EstimatedReport:
    """Criterion report reconstructed from measured expectations.

    ``report.detected`` is replaced by the confidence rule
    ``margin - z * se_margin > eps``. ``unreliable_pairs`` lists pairs whose
    estimated ``|<phi_i|rho|phi_j>|`` is below twice its standard error.
    """

    report: CriterionReport
    se_lhs: float
    se_rhs_pair: float
    se_rhs_diag: float
    se_margin: float
    z: float
    unreliable_pairs: tuple[tuple[int, int], ...]

    def to_dict(self) -> dict:
        d = self.report.to_dict()
        d.update(
            se_lhs=self.se_lhs,
            se_rhs_pair=self.se_rhs_pair,
            se_rhs_diag=self.se_rhs_diag,
            se_margin=self.se_margin,
            z=self.z,
            unreliable_pairs=[list(p) for p in self.unreliable_pairs],
        )
        return d


def _ratio_sqrt(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=den > 0)
    return np.sqrt(np.maximum(out, 0.0))


def estimated_report(estimate: ShotEstimate, k: int, z: float = 3.0, eps: float = EPS) -> EstimatedReport:
    """Rebuild the level-k report from setting expectations, with delta-method errors.

    Settings are statistically independent, so each aggregate's variance is
    the sum over settings of (partial derivative x standard error)^2.
    """
    plan = estimate.plan
    m, se = estimate.means, estimate.ses
    n = plan.n
    R = plan.reconstruction

    def idx(term):
        return [s for s, _ in R[term]]

    def value(term):
        return sum(c * m[s] for s, c in R[term])

    pairs = plan.pairs
    phi_s = idx("phi")[0]
    single_s = np.array([idx(f"single[{i}]")[0] for i in range(n)], dtype=int)
    pair_s = np.array([idx("pair" + _pair_key(i, j))[0] for i, j in pairs], dtype=int)
    O = np.array([value("O" + _pair_key(i, j)) for i, j in pairs])
    Ot = np.array([value("Ot" + _pair_key(i, j)) for i, j in pairs])
    modulus = np.hypot(O, Ot) / 2

    terms = ProbeTerms(
        n=n,
        label=plan.probe.label,
        pairs=pairs,
        phi_diag=float(m[phi_s]),
        single_diag=m[single_s].copy(),
        pair_diag=m[pair_s].copy(),
        offdiag_abs=modulus,
    )
    report = assemble_report(terms, k, eps)

    # gradients over settings for lhs = 2 sum |z_p|
    g_lhs = np.zeros(len(plan))
    se_mod = np.zeros(len(pairs))
    for p, (i, j) in enumerate(pairs):
        key = _pair_key(i, j)
        (mm, _), (tt, _) = R["O" + key]
        (mt, _), (tm, _) = R["Ot" + key]
        a = se[mm] ** 2 + se[tt] ** 2
        b = se[mt] ** 2 + se[tm] ** 2
        if modulus[p] > 0:
            cos, sin = O[p] / (2 * modulus[p]), Ot[p] / (2 * modulus[p])
            g_lhs[[mm, tt]] += cos / 2
            g_lhs[[mt, tm]] += np.array([sin, -sin]) / 2
            se_mod[p] = np.sqrt(cos**2 * a + sin**2 * b) / 4
        else:
            se_mod[p] = np.sqrt(max(a, b)) / 4
    # |z| = 0 has no gradient; its worst-case directional error is added in quadrature
    zero_var = np.sum((2 * se_mod[modulus == 0]) ** 2)

    d_phi, d_pair = m[phi_s], m[pair_s]
    g_pair = np.zeros(len(plan))
    g_pair[phi_s] = np.sum(_ratio_sqrt(d_pair, d_phi))
    g_pair[pair_s] = _ratio_sqrt(d_phi, d_pair)
    g_diag = np.zeros(len(plan))
    g_diag[single_s] = 1.0

    def spread(g):
        return float(np.sqrt(np.sum((g * se) ** 2)))

    se_lhs = float(np.sqrt(spread(g_lhs) ** 2 + zero_var))
    g_margin = g_lhs - g_pair - (n - report.k) * g_diag
    se_margin = float(np.sqrt(spread(g_margin) ** 2 + zero_var))
    detected = bool(report.margin - z * se_margin > eps)
    report = CriterionReport(report.k, n, report.lhs, report.rhs_pair, report.rhs_diag, report.margin,
                             detected, report.probe)
    unreliable = tuple(pairs[p] for p in range(len(pairs)) if se_mod[p] > 0 and modulus[p] < 2 * se_mod[p])
    return EstimatedReport(report, se_lhs, spread(g_pair), spread(g_diag), se_margin, float(z), unreliable)
