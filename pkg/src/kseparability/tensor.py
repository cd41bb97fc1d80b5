"""Dense complex linear algebra on tensor-product Hilbert spaces.

Basis ordering is row-major over sites: site 0 is the slowest-varying
index, so ``|x_0 x_1 ... x_{n-1}>`` sits at
``ravel_multi_index((x_0, ..., x_{n-1}), dims)``. Every other module in the
package relies on this convention.

Density operators come in two storage forms. The dense form holds the full
``D x D`` matrix and is capped at ``D <= MAX_DENSE_DIM``. The ensemble form
holds weighted pure states plus an optional weight on the maximally mixed
state, which is enough to evaluate matrix elements at any size.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "MAX_DENSE_DIM",
    "ValidationError",
    "SystemDims",
    "DensityOperator",
    "DoubledPermutation",
    "kron",
    "product_vector",
    "matrix_element",
    "build_swap",
    "validate_density_matrix",
    "apply_local",
    "state_to_dict",
    "state_from_dict",
    "load_state",
    "save_state",
]

MAX_DENSE_DIM = 4096
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
NORM_TOL = 1e-8


class ValidationError(ValueError):
    """An input violates a documented invariant (hermiticity, trace, ...)."""


@dataclass(frozen=True)
class SystemDims:
    """Local dimensions ``(d_0, ..., d_{n-1})`` of an n-partite system."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if len(dims) < 2:
            raise ValidationError(f"need at least 2 sites, got dims={dims}")
        if any(d < 2 for d in dims):
            raise ValidationError(f"every local dimension must be >= 2, got dims={dims}")

    @classmethod
    def coerce(cls, dims: SystemDims | Iterable[int]) -> SystemDims:
        return dims if isinstance(dims, SystemDims) else cls(tuple(dims))

    @classmethod
    def qubits(cls, n: int) -> SystemDims:
        return cls((2,) * n)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    def __iter__(self):
        return iter(self.dims)

    def __len__(self):
        return len(self.dims)

    def __getitem__(self, i):
        return self.dims[i]


def kron(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Tensor product of square matrices, left factor slowest-varying.

    >>> kron([np.eye(2), np.eye(2)]).shape
    (4, 4)
    """
    if len(factors) == 0:
        raise ValueError("kron needs at least one factor")
    mats = []
    for f in factors:
        f = np.asarray(f)
        if f.ndim != 2 or f.shape[0] != f.shape[1]:
            raise ValueError(f"kron factors must be square matrices, got shape {f.shape}")
        mats.append(f)
    return reduce(np.kron, mats)


def product_vector(locals_: Sequence[np.ndarray], dims: SystemDims | Iterable[int] | None = None) -> np.ndarray:
    """Return ``|v_0> (x) |v_1> (x) ...`` for unit local vectors."""
    vecs = [np.asarray(v, dtype=complex).ravel() for v in locals_]
    if dims is not None:
        dims = SystemDims.coerce(dims)
        if len(vecs) != dims.n or any(v.size != d for v, d in zip(vecs, dims)):
            raise ValidationError(
                f"local vector sizes {[v.size for v in vecs]} do not match dims {dims.dims}"
            )
    if not vecs:
        raise ValueError("product_vector needs at least one local vector")
    for l, v in enumerate(vecs):
        if abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
            raise ValidationError(f"local vector at site {l} is not normalized (norm={np.linalg.norm(v):.3g})")
    return reduce(np.kron, vecs)


def validate_density_matrix(matrix: np.ndarray, dims: SystemDims) -> None:
    """Raise :class:`ValidationError` unless ``matrix`` is a density matrix on ``dims``."""
    D = dims.total
    if matrix.shape != (D, D):
        raise ValidationError(f"matrix shape {matrix.shape} does not match total dimension {D}")
    herm_dev = np.max(np.abs(matrix - matrix.conj().T))
    if herm_dev > HERMITIAN_TOL:
        raise ValidationError(f"hermiticity violated: max |rho_ab - conj(rho_ba)| = {herm_dev:.3g}")
    tr = np.trace(matrix)
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValidationError(f"trace invariant violated: tr(rho) = {tr.real:.12g}")
    lam_min = np.linalg.eigvalsh((matrix + matrix.conj().T) / 2)[0]
    if lam_min < -PSD_TOL:
        raise ValidationError(f"positive semidefiniteness violated: smallest eigenvalue {lam_min:.3g}")


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A density operator on a product space, stored densely or as an ensemble.

    Use :meth:`from_matrix` or :meth:`from_ensemble` rather than the raw
    constructor. The ensemble form represents

        rho = sum_m weights[m] |vectors[m]><vectors[m]| + noise * I / D

    and never materializes the ``D x D`` matrix unless asked to.
    """

    dims: SystemDims
    matrix: np.ndarray | None = None
    weights: np.ndarray | None = None
    vectors: np.ndarray | None = None
    noise: float = 0.0

    @classmethod
    def from_matrix(cls, matrix, dims, validate: bool = True) -> DensityOperator:
        dims = SystemDims.coerce(dims)
        if dims.total > MAX_DENSE_DIM:
            raise ValidationError(
                f"dense form limited to D <= {MAX_DENSE_DIM}; use the ensemble form for D={dims.total}"
            )
        matrix = np.array(matrix, dtype=complex)
        if validate:
            validate_density_matrix(matrix, dims)
        matrix.setflags(write=False)
        return cls(dims=dims, matrix=matrix)

    @classmethod
    def from_ensemble(cls, weights, vectors, dims, noise: float = 0.0, validate: bool = True) -> DensityOperator:
        dims = SystemDims.coerce(dims)
        weights = np.array(weights, dtype=float).ravel()
        if len(weights):
            vectors = np.array(vectors, dtype=complex).reshape(len(weights), -1)
        else:
            vectors = np.zeros((0, dims.total), dtype=complex)
        noise = float(noise)
        if validate:
            if vectors.shape[1] != dims.total:
                raise ValidationError(f"ensemble vectors have length {vectors.shape[1]}, expected {dims.total}")
            if np.any(weights < 0) or noise < 0:
                raise ValidationError("ensemble weights must be nonnegative")
            total = weights.sum() + noise
            if abs(total - 1.0) > TRACE_TOL:
                raise ValidationError(f"trace invariant violated: ensemble weights sum to {total:.12g}")
            norms = np.linalg.norm(vectors, axis=1)
            if np.any(np.abs(norms - 1.0) > TRACE_TOL):
                raise ValidationError("ensemble vectors must be normalized")
        weights.setflags(write=False)
        vectors.setflags(write=False)
        return cls(dims=dims, weights=weights, vectors=vectors, noise=noise)

    @property
    def is_dense(self) -> bool:
        return self.matrix is not None

    @property
    def n(self) -> int:
        return self.dims.n

    @property
    def D(self) -> int:
        return self.dims.total

    def to_dense(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        if self.D > MAX_DENSE_DIM:
            raise ValidationError(f"refusing to materialize a {self.D}x{self.D} matrix")
        V = self.vectors
        rho = (V.T * self.weights) @ V.conj()
        rho += self.noise / self.D * np.eye(self.D)
        return rho

    def gram(self, vecs: np.ndarray) -> np.ndarray:
        """Matrix ``G[a, b] = <v_a| rho |v_b>`` for the rows ``v_a`` of ``vecs``."""
        vecs = np.asarray(vecs, dtype=complex)
        if vecs.shape[-1] != self.D:
            raise ValidationError(f"vector length {vecs.shape[-1]} does not match D={self.D}")
        if self.matrix is not None:
            return vecs.conj() @ self.matrix @ vecs.T
        # B[m, a] = <psi_m | v_a>
        B = self.vectors.conj() @ vecs.T
        G = (B.conj().T * self.weights) @ B
        if self.noise:
            G = G + self.noise / self.D * (vecs.conj() @ vecs.T)
        return G

    def purity(self) -> float:
        rho = self.to_dense()
        return float(np.real(np.trace(rho @ rho)))

    def eigen_ensemble(self) -> DensityOperator:
        """Ensemble form built from the eigendecomposition of the dense matrix."""
        lam, U = np.linalg.eigh(self.to_dense())
        keep = lam > 1e-15
        lam = lam[keep]
        return DensityOperator.from_ensemble(lam / lam.sum(), U[:, keep].T, self.dims, validate=False)


def matrix_element(rho: DensityOperator, bra: np.ndarray, ket: np.ndarray) -> complex:
    """Return ``<bra| rho |ket>``.

    For the ensemble form this is ``sum_m p_m <bra|psi_m><psi_m|ket>``,
    computed without forming the dense matrix.
    """
    bra = np.asarray(bra, dtype=complex).ravel()
    ket = np.asarray(ket, dtype=complex).ravel()
    if bra.size != rho.D or ket.size != rho.D:
        raise ValidationError(f"vector lengths ({bra.size}, {ket.size}) do not match D={rho.D}")
    if rho.matrix is not None:
        return complex(bra.conj() @ rho.matrix @ ket)
    left = rho.vectors @ bra.conj()  # <bra|psi_m>
    right = rho.vectors.conj() @ ket  # <psi_m|ket>
    val = np.sum(rho.weights * left * right)
    if rho.noise:
        val += rho.noise / rho.D * (bra.conj() @ ket)
    return complex(val)


@dataclass(frozen=True, eq=False)
class DoubledPermutation:
    """Exchange of chosen sites between the two copies of ``H (x) H``.

    ``perm`` is an index map with ``(P v) = v[perm]``. Because a swap is an
    involution, ``perm`` is its own inverse and ``P^dagger = P``.
    """

    dims: SystemDims
    sites: frozenset[int]
    perm: np.ndarray

    def apply(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(v)[..., self.perm]

    def matrix(self) -> np.ndarray:
        size = self.perm.size
        P = np.zeros((size, size))
        P[np.arange(size), self.perm] = 1.0
        return P


def build_swap(dims, sites: Iterable[int]) -> DoubledPermutation:
    """Permutation swapping ``sites`` (0-based) between the two copies.

    ``sites = range(n)`` gives the total swap ``|x>|y> -> |y>|x>``.
    """
    dims = SystemDims.coerce(dims)
    sites = frozenset(int(s) for s in sites)
    n = dims.n
    bad = [s for s in sites if not 0 <= s < n]
    if bad:
        raise ValidationError(f"site indices {sorted(bad)} out of range for n={n}")
    axes = list(range(2 * n))
    for s in sites:
        axes[s], axes[n + s] = n + s, s
    idx = np.arange(dims.total**2).reshape(dims.dims + dims.dims)
    perm = idx.transpose(axes).ravel()
    perm.setflags(write=False)
    return DoubledPermutation(dims=dims, sites=sites, perm=perm)


def apply_local(vectors: np.ndarray, ops: Sequence[np.ndarray], dims) -> np.ndarray:
    """Apply ``ops[0] (x) ops[1] (x) ...`` to each row of ``vectors``.

    Works site by site, so the full ``D x D`` product operator is never built.
    """
    dims = SystemDims.coerce(dims)
    vectors = np.asarray(vectors, dtype=complex)
    lead = vectors.shape[:-1]
    arr = vectors.reshape((-1,) + dims.dims)
    for l, op in enumerate(ops):
        arr = np.moveaxis(np.tensordot(op, arr, axes=([1], [l + 1])), 0, l + 1)
    return arr.reshape(lead + (dims.total,))


# -- state files -------------------------------------------------------------

def _encode(arr: np.ndarray) -> list:
    arr = np.asarray(arr, dtype=complex)
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def _decode(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1] != 2:
        raise ValidationError("complex entries must be encoded as [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def state_to_dict(rho: DensityOperator) -> dict:
    """JSON-ready dict; the noise weight is written as a uniform basis ensemble."""
    out = {"dims": list(rho.dims.dims)}
    if rho.matrix is not None:
        out["matrix"] = _encode(rho.matrix)
        return out
    entries = [{"weight": float(p), "vector": _encode(v)} for p, v in zip(rho.weights, rho.vectors)]
    if rho.noise:
        for b in range(rho.D):
            e = np.zeros(rho.D)
            e[b] = 1.0
            entries.append({"weight": rho.noise / rho.D, "vector": _encode(e)})
    out["ensemble"] = entries
    return out


def state_from_dict(data: dict, validate: bool = True) -> DensityOperator:
    if "dims" not in data:
        raise ValidationError("state file is missing 'dims'")
    dims = SystemDims.coerce(data["dims"])
    has_matrix, has_ensemble = "matrix" in data, "ensemble" in data
    if has_matrix == has_ensemble:
        raise ValidationError("state file needs exactly one of 'matrix' or 'ensemble'")
    if has_matrix:
        return DensityOperator.from_matrix(_decode(data["matrix"]), dims, validate=validate)
    entries = data["ensemble"]
    weights = [e["weight"] for e in entries]
    vectors = [_decode(e["vector"]) for e in entries]
    return DensityOperator.from_ensemble(weights, vectors, dims, validate=validate)


def load_state(path, validate: bool = True) -> DensityOperator:
    with open(path) as fh:
        return state_from_dict(json.load(fh), validate=validate)


def save_state(rho: DensityOperator, path) -> None:
    Path(path).write_text(json.dumps(state_to_dict(rho)))
