"""State families and random k-separable states.

The named families are qubit-only:

* ``gw``      : alpha |GHZ><GHZ| + beta |W><W| + (1 - alpha - beta) I / 2^n
* ``w-noise`` : beta |W><W| + (1 - beta) I / 2^n
* ``w-antiw`` : a |W><W| + b |W~><W~| + (1 - a - b) I / 2^n

``random_k_separable`` draws convex mixtures of pure states that are each a
product across some k-block partition. Those states can never violate the
k-separability inequality, which makes them the no-false-positive oracle
for the criteria.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tensor import DensityOperator, SystemDims, ValidationError

__all__ = [
    "FAMILIES",
    "Partition",
    "FamilyPoint",
    "ghz",
    "w_state",
    "anti_w",
    "family_state",
    "biseparable_triple",
    "random_partition",
    "haar_vector",
    "random_k_separable",
    "random_density",
]

FAMILIES = {"gw": 2, "w-noise": 1, "w-antiw": 2}
WEIGHT_TOL = 1e-12


def _check_n(n: int) -> int:
    n = int(n)
    if n < 2:
        raise ValidationError(f"n must be >= 2, got {n}")
    return n


def _basis_weight(n: int) -> np.ndarray:
    """Hamming weight of each basis index, site 0 most significant."""
    idx = np.arange(2**n)
    return np.array([bin(i).count("1") for i in idx])


def ghz(n: int) -> np.ndarray:
    """``(|0...0> + |1...1>) / sqrt(2)`` on n qubits."""
    n = _check_n(n)
    v = np.zeros(2**n, dtype=complex)
    v[0] = v[-1] = 1 / np.sqrt(2)
    return v


def _dicke(n: int, weight: int) -> np.ndarray:
    mask = _basis_weight(n) == weight
    v = np.zeros(2**n, dtype=complex)
    v[mask] = 1 / np.sqrt(mask.sum())
    return v


def w_state(n: int) -> np.ndarray:
    """Uniform superposition of the n single-excitation basis states."""
    return _dicke(_check_n(n), 1)


def anti_w(n: int) -> np.ndarray:
    """Uniform superposition of the weight-(n-1) basis states.

    This is ``w_state(n)`` with every qubit flipped. For ``n = 2`` it
    coincides with ``w_state(2)``.
    """
    n = _check_n(n)
    return _dicke(n, n - 1)


@dataclass(frozen=True)
class Partition:
    """Division of sites ``0..n-1`` into disjoint nonempty blocks."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(sorted(int(s) for s in b)) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if any(len(b) == 0 for b in blocks):
            raise ValidationError("partition blocks must be nonempty")
        flat = [s for b in blocks for s in b]
        if sorted(flat) != list(range(len(flat))):
            raise ValidationError(f"blocks {blocks} are not a partition of 0..{len(flat) - 1}")

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    def block_of(self, site: int) -> int:
        for i, b in enumerate(self.blocks):
            if site in b:
                return i
        raise KeyError(site)


@dataclass(frozen=True)
class FamilyPoint:
    """One member of a named family: ``family``, qubit count and mixing weights."""

    family: str
    n: int
    params: tuple[float, ...]

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown family {self.family!r}; expected one of {sorted(FAMILIES)}")
        object.__setattr__(self, "n", _check_n(self.n))
        params = tuple(float(p) for p in self.params)
        object.__setattr__(self, "params", params)
        if len(params) != FAMILIES[self.family]:
            raise ValidationError(f"family {self.family!r} takes {FAMILIES[self.family]} parameter(s), got {len(params)}")
        if any(p < 0 for p in params):
            raise ValidationError(f"mixing weights must be nonnegative, got {params}")
        if sum(params) > 1 + WEIGHT_TOL:
            raise ValidationError(f"mixing weights must sum to at most 1, got {sum(params):.12g}")


def family_state(point: FamilyPoint) -> DensityOperator:
    """Ensemble-form density operator for a family point.

    The white-noise part is stored as the operator's ``noise`` weight, which
    is equivalent to a uniform ensemble over the computational basis.
    """
    n = point.n
    if point.family == "gw":
        vectors = [ghz(n), w_state(n)]
    elif point.family == "w-noise":
        vectors = [w_state(n)]
    else:
        vectors = [w_state(n), anti_w(n)]
    weights = np.array(point.params)
    noise = max(0.0, 1.0 - weights.sum())
    return DensityOperator.from_ensemble(weights, vectors, SystemDims.qubits(n), noise=noise, validate=False)


def biseparable_triple(p1: float, p2: float, p3: float) -> DensityOperator:
    """Mixture of three Bell-pair-times-|0> states, each bi-separable under a different cut.

    ``psi_1`` pairs sites 1,2 with site 0 in ``|0>``, ``psi_2`` pairs sites
    0,2 and ``psi_3`` pairs sites 0,1. The mixture is bi-separable yet
    entangled across every fixed bipartition. Zero weights are accepted.
    """
    p = np.array([p1, p2, p3], dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1) > 1e-10:
        raise ValidationError(f"weights must be nonnegative and sum to 1, got {p.tolist()}")
    s = 1 / np.sqrt(2)
    vecs = np.zeros((3, 8), dtype=complex)
    for m, pair_idx in enumerate([0b011, 0b101, 0b110]):
        vecs[m, 0] = s
        vecs[m, pair_idx] = s
    return DensityOperator.from_ensemble(p, vecs, SystemDims.qubits(3), validate=False)


def random_partition(n: int, k: int, rng: np.random.Generator) -> Partition:
    """Uniformly random partition of ``0..n-1`` into exactly ``k`` blocks.

    Draws uniform labelings and rejects non-surjective ones; every set
    partition with k blocks has exactly k! surjective labelings, so the
    accepted result (canonicalized as a restricted growth string) is uniform.
    """
    if not 1 <= k <= n:
        raise ValidationError(f"need 1 <= k <= n, got k={k}, n={n}")
    while True:
        labels = rng.integers(0, k, size=n)
        if len(np.unique(labels)) == k:
            break
    relabel: dict[int, int] = {}
    rgs = [relabel.setdefault(int(x), len(relabel)) for x in labels]
    blocks = tuple(tuple(s for s in range(n) if rgs[s] == b) for b in range(k))
    return Partition(blocks)


def haar_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def _block_product(dims: Sequence[int], partition: Partition, block_vecs: Sequence[np.ndarray]) -> np.ndarray:
    """Assemble per-block states into a full vector in site order."""
    tensor = np.ones((), dtype=complex)
    order: list[int] = []
    for block, vec in zip(partition.blocks, block_vecs):
        tensor = np.multiply.outer(tensor, vec.reshape([dims[s] for s in block]))
        order.extend(block)
    return tensor.transpose(np.argsort(order)).ravel()


def random_k_separable(dims, k: int, components: int, seed: int | None = None) -> DensityOperator:
    """Random convex mixture of k-separable pure states.

    Each component picks its own uniformly random k-block partition and a
    Haar-random state per block; the weights are flat-Dirichlet.
    """
    dims = SystemDims.coerce(dims)
    if not 1 <= k <= dims.n:
        raise ValidationError(f"need 1 <= k <= n, got k={k}, n={dims.n}")
    if components < 1:
        raise ValidationError("components must be >= 1")
    rng = np.random.default_rng(seed)
    vecs = []
    for _ in range(components):
        part = random_partition(dims.n, k, rng)
        block_vecs = [haar_vector(int(np.prod([dims[s] for s in b])), rng) for b in part.blocks]
        vecs.append(_block_product(dims.dims, part, block_vecs))
    weights = rng.dirichlet(np.ones(components))
    return DensityOperator.from_ensemble(weights, vecs, dims, validate=False)


def random_density(dims, rank: int, seed: int | None = None) -> DensityOperator:
    """``G^dagger G / tr(G^dagger G)`` for a complex Gaussian ``rank x D`` matrix ``G``."""
    dims = SystemDims.coerce(dims)
    D = dims.total
    if not 1 <= rank <= D:
        raise ValidationError(f"rank must be in [1, {D}], got {rank}")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((rank, D)) + 1j * rng.standard_normal((rank, D))
    rho = G.conj().T @ G
    rho = (rho + rho.conj().T) / 2
    return DensityOperator.from_matrix(rho / np.trace(rho).real, dims, validate=False)
