"""Probe vectors for the k-separability criteria.

A probe fixes, for every site ``l``, a pair of unit vectors ``(x_l, x~_l)``.
From it we build the fully separable vectors

* ``phi``        = x_0 x_1 ... x_{n-1}
* ``phi_i``      = phi with site i replaced by x~_i
* ``phi_ij``     = phi with sites i and j replaced (i < j)

The pairs need not be orthogonal, only non-parallel.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Sequence

import numpy as np

from .tensor import SystemDims, ValidationError, _decode, _encode, product_vector

__all__ = [
    "Probe",
    "ProbeVectors",
    "probe_computational",
    "probe_anticomputational",
    "probe_45",
    "probe_phase_flip",
    "probe_custom",
    "random_probe",
    "catalog",
    "expand",
    "parse_probe",
    "load_probe",
    "save_probe",
]

NORM_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Probe:
    dims: SystemDims
    base: tuple[np.ndarray, ...]
    flipped: tuple[np.ndarray, ...]
    label: str = "custom"

    def __post_init__(self):
        dims = SystemDims.coerce(self.dims)
        object.__setattr__(self, "dims", dims)
        base = tuple(np.array(v, dtype=complex).ravel() for v in self.base)
        flipped = tuple(np.array(v, dtype=complex).ravel() for v in self.flipped)
        if len(base) != dims.n or len(flipped) != dims.n:
            raise ValidationError(f"probe needs one base and one flipped vector per site (n={dims.n})")
        for l, (x, y, d) in enumerate(zip(base, flipped, dims)):
            if x.size != d or y.size != d:
                raise ValidationError(f"probe vectors at site {l} have sizes ({x.size}, {y.size}), expected {d}")
            for name, v in (("base", x), ("flipped", y)):
                if abs(np.linalg.norm(v) - 1) > NORM_TOL:
                    raise ValidationError(f"{name} vector at site {l} is not normalized")
            if abs(np.vdot(x, y)) >= 1 - NORM_TOL:
                raise ValidationError(f"base and flipped vectors at site {l} are parallel")
            x.setflags(write=False)
            y.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "flipped", flipped)

    @property
    def n(self) -> int:
        return self.dims.n


@dataclass(frozen=True, eq=False)
class ProbeVectors:
    """The ``1 + n + n(n-1)/2`` product vectors generated by a probe.

    ``stacked`` holds them as rows in the order ``phi, phi_0..phi_{n-1},
    phi_pairs...`` with pairs in lexicographic ``(i, j), i < j`` order.
    """

    probe: Probe
    phi: np.ndarray
    singles: np.ndarray
    pairs: tuple[tuple[int, int], ...]
    doubles: np.ndarray

    @property
    def stacked(self) -> np.ndarray:
        return np.vstack([self.phi[None, :], self.singles, self.doubles])

    @property
    def count(self) -> int:
        return 1 + len(self.singles) + len(self.doubles)


def _level(d: int, coeffs) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[: len(coeffs)] = coeffs
    return v


def probe_computational(dims) -> Probe:
    """``x_l = |0>``, ``x~_l = |1>`` at every site."""
    dims = SystemDims.coerce(dims)
    return Probe(dims, [_level(d, [1]) for d in dims], [_level(d, [0, 1]) for d in dims], "computational")


def probe_anticomputational(dims) -> Probe:
    """``x_l = |1>``, ``x~_l = |0>``: the global bit-flip of the computational probe."""
    dims = SystemDims.coerce(dims)
    return Probe(dims, [_level(d, [0, 1]) for d in dims], [_level(d, [1]) for d in dims], "anticomputational")


def probe_45(dims) -> Probe:
    """``x_l = |+>``, ``x~_l = |->`` at every site (levels 0, 1 for qudits)."""
    dims = SystemDims.coerce(dims)
    s = 1 / np.sqrt(2)
    return Probe(dims, [_level(d, [s, s]) for d in dims], [_level(d, [s, -s]) for d in dims], "45")


def probe_phase_flip(dims) -> Probe:
    """Like :func:`probe_45` but with the roles of ``|+>`` and ``|->`` exchanged at site 0.

    With ``P = prod <x_l|0>`` and ``Q = prod <x_l|1>`` this gives ``Q = -P``,
    so ``<phi|GHZ> = 0`` and every two-flip overlap vanishes too, while each
    single-flip overlap is ``1/2`` for three qubits. Pure GHZ states are then
    detected at k = 2, which uniform probes cannot achieve.
    """
    dims = SystemDims.coerce(dims)
    s = 1 / np.sqrt(2)
    plus = [_level(d, [s, s]) for d in dims]
    minus = [_level(d, [s, -s]) for d in dims]
    base = [minus[0]] + plus[1:]
    flipped = [plus[0]] + minus[1:]
    return Probe(dims, base, flipped, "phase-flip")


def probe_custom(base: Sequence, flipped: Sequence, label: str = "custom", dims=None) -> Probe:
    if dims is None:
        dims = [np.asarray(v).size for v in base]
    return Probe(SystemDims.coerce(dims), tuple(base), tuple(flipped), label)


def random_probe(dims, seed: int) -> Probe:
    """Haar-random orthonormal pair at every site, deterministic in ``seed``."""
    dims = SystemDims.coerce(dims)
    rng = np.random.default_rng(seed)
    base, flipped = [], []
    for d in dims:
        z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        q, r = np.linalg.qr(z)
        q = q * (np.diag(r) / np.abs(np.diag(r)))
        base.append(q[:, 0])
        flipped.append(q[:, 1])
    return Probe(dims, base, flipped, f"random:{seed}")


def catalog(dims, n_random: int = 0, seed: int = 0) -> list[Probe]:
    """Fixed probes (closed under a global bit flip) followed by ``n_random`` random ones."""
    dims = SystemDims.coerce(dims)
    probes = [probe_computational(dims), probe_anticomputational(dims), probe_45(dims), probe_phase_flip(dims)]
    probes += [random_probe(dims, seed + s) for s in range(n_random)]
    return probes


def expand(probe: Probe) -> ProbeVectors:
    n = probe.n
    x, y = probe.base, probe.flipped

    def swapped(sites):
        return product_vector([y[l] if l in sites else x[l] for l in range(n)], probe.dims)

    pairs = tuple(combinations(range(n), 2))
    phi = swapped(())
    singles = np.array([swapped((i,)) for i in range(n)])
    doubles = np.array([swapped(p) for p in pairs]).reshape(len(pairs), -1)
    return ProbeVectors(probe, phi, singles, pairs, doubles)


def probe_to_dict(probe: Probe) -> dict:
    return {
        "dims": list(probe.dims.dims),
        "label": probe.label,
        "base": [_encode(v) for v in probe.base],
        "flipped": [_encode(v) for v in probe.flipped],
    }


def probe_from_dict(data: dict) -> Probe:
    for key in ("dims", "base", "flipped"):
        if key not in data:
            raise ValidationError(f"probe file is missing {key!r}")
    base = [_decode(v) for v in data["base"]]
    flipped = [_decode(v) for v in data["flipped"]]
    return Probe(SystemDims.coerce(data["dims"]), base, flipped, data.get("label", "file"))


def load_probe(path) -> Probe:
    with open(path) as fh:
        return probe_from_dict(json.load(fh))


def save_probe(probe: Probe, path) -> None:
    Path(path).write_text(json.dumps(probe_to_dict(probe)))


_NAMED = {
    "computational": probe_computational,
    "anticomputational": probe_anticomputational,
    "45": probe_45,
    "phase-flip": probe_phase_flip,
}


def parse_probe(spec: str, dims) -> Probe:
    """Build a probe from a CLI string such as ``45``, ``random:7`` or ``file:p.json``."""
    dims = SystemDims.coerce(dims)
    if spec in _NAMED:
        return _NAMED[spec](dims)
    kind, _, arg = spec.partition(":")
    if kind == "random" and arg:
        try:
            return random_probe(dims, int(arg))
        except ValueError as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"random probe seed must be an integer, got {arg!r}") from None
    if kind == "file" and arg:
        probe = load_probe(arg)
        if probe.dims != dims:
            raise ValidationError(f"probe file dims {probe.dims.dims} do not match state dims {dims.dims}")
        return probe
    raise ValidationError(
        f"unknown probe {spec!r}; expected computational|anticomputational|45|phase-flip|random:<seed>|file:<path>"
    )
