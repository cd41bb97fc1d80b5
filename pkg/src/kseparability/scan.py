"""Detection thresholds and parameter-plane scans over the named families."""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .criteria import EPS, assemble_report, terms_from_gram, level_k_report
from .probes import Probe, expand
from .states import FAMILIES, FamilyPoint, anti_w, family_state, ghz, w_state
from .tensor import DensityOperator, SystemDims, ValidationError

__all__ = [
    "CSV_HEADER",
    "ThresholdError",
    "ScanRow",
    "ScanResult",
    "analytic_w_threshold",
    "family_curve",
    "bisect_threshold",
    "grid_scan",
    "emit_csv",
    "read_csv",
]

CSV_HEADER = ["family", "n", "k", "probe", "p1", "p2", "lhs", "rhs_pair", "rhs_diag", "margin", "detected"]
MAX_BISECT_ITER = 60
SKIPPED = "skipped"


class ThresholdError(ValueError):
    """The bracket passed to :func:`bisect_threshold` has no detection boundary."""


def analytic_w_threshold(n: int, k: int) -> Fraction:
    """Exact level-k detection threshold in beta for W + white noise, computational probe.

    The state is detected for ``beta > n(2n-k-1) / (2^n (k-1) + n(2n-k-1))``.

    >>> analytic_w_threshold(3, 2)
    Fraction(9, 17)
    """
    if not 2 <= k <= n:
        raise ValidationError(f"k must satisfy 2 <= k <= n={n}, got {k}")
    num = n * (2 * n - k - 1)
    return Fraction(num, 2**n * (k - 1) + num)


def family_curve(family: str, n: int, fixed: Sequence[float] = (), axis: int = 0) -> Callable[[float], DensityOperator]:
    """One-parameter path through a family; ``fixed`` fills the other parameters.

    ``family_curve("gw", 4, fixed=[0.0], axis=0)`` varies alpha with beta = 0.
    """
    nparams = FAMILIES.get(family)
    if nparams is None:
        raise ValidationError(f"unknown family {family!r}")
    fixed = list(fixed)
    if len(fixed) != nparams - 1:
        raise ValidationError(f"family {family!r} needs {nparams - 1} fixed parameter(s)")

    def curve(t: float) -> DensityOperator:
        params = fixed[:axis] + [t] + fixed[axis:]
        return family_state(FamilyPoint(family, n, tuple(params)))

    return curve


def bisect_threshold(
    curve: Callable[[float], DensityOperator],
    k: int,
    probe: Probe,
    tol: float = 1e-7,
    lo: float = 0.0,
    hi: float = 1.0,
    eps: float = EPS,
) -> float:
    """Locate the detection boundary along ``curve`` by bisection.

    Requires detection at ``hi`` and none at ``lo``; the returned point is
    within ``tol`` of the boundary provided detection is monotone along the
    path (it is for W + white noise, where the margin is affine).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    vectors = expand(probe)

    def detected(t):
        return level_k_report(curve(t), vectors, k, eps).detected

    if not detected(hi):
        raise ThresholdError(f"no detection at the upper end of the bracket ({hi})")
    if detected(lo):
        raise ThresholdError(f"already detected at the lower end of the bracket ({lo})")
    for _ in range(MAX_BISECT_ITER):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if detected(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ScanRow:
    p1: float
    p2: float
    k: int
    probe: str
    lhs: float
    rhs_pair: float
    rhs_diag: float
    margin: float
    detected: bool
    best_margin: float

    @property
    def skipped(self) -> bool:
        return self.probe == SKIPPED


@dataclass
class ScanResult:
    family: str
    n: int
    ks: list[int]
    probes: list[str]
    axes: list[np.ndarray]
    rows: list[ScanRow] = field(default_factory=list)

    @property
    def grid_points(self) -> int:
        return int(np.prod([len(a) for a in self.axes]))

    def region(self, k: int) -> np.ndarray:
        """Boolean grid of points detected at level k by at least one probe."""
        shape = tuple(len(a) for a in self.axes)
        det = np.array([row.detected for row in self.rows], dtype=bool)
        det = det.reshape(self.grid_points, len(self.ks), len(self.probes))
        return det[:, self.ks.index(k), :].any(axis=1).reshape(shape)


def _components(family: str, n: int) -> list[DensityOperator]:
    dims = SystemDims.qubits(n)
    pure = {"gw": [ghz(n), w_state(n)], "w-noise": [w_state(n)], "w-antiw": [w_state(n), anti_w(n)]}[family]
    comps = [DensityOperator.from_ensemble([1.0], [v], dims, validate=False) for v in pure]
    comps.append(DensityOperator.from_ensemble([], [], dims, noise=1.0, validate=False))
    return comps


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("KSEPARABILITY_WORKERS", "1")))
    except ValueError:
        return 1


def grid_scan(
    family: str,
    n: int,
    ks: Sequence[int],
    probes: Sequence[Probe],
    resolution: int | Sequence[int] = 201,
    ranges: Sequence[tuple[float, float]] | None = None,
    eps: float = EPS,
    workers: int | None = None,
) -> ScanResult:
    """Evaluate the level-k inequalities over a grid of family parameters.

    Rows come out axis-major (first parameter slowest), then by k, then by
    probe. Grid points whose weights sum to more than one are kept as rows
    with probe label ``"skipped"`` and NaN values so that every scan has
    ``points x len(ks) x len(probes)`` rows.

    The state is affine in the parameters, so each probe's Gram matrix is
    precomputed per mixture component and recombined at every point.
    """
    if family not in FAMILIES:
        raise ValidationError(f"unknown family {family!r}")
    nparams = FAMILIES[family]
    if ranges is None:
        ranges = [(0.0, 1.0)] * nparams
    if isinstance(resolution, int):
        resolution = [resolution] * nparams
    if len(ranges) != nparams or len(resolution) != nparams:
        raise ValidationError(f"family {family!r} needs {nparams} range(s) and resolution(s)")
    for (a, b), r in zip(ranges, resolution):
        if not (0 <= a < b) or r < 2:
            raise ValidationError(f"invalid range ({a}, {b}) with resolution {r}")
    ks = [int(k) for k in ks]
    for k in ks:
        if not 2 <= k <= n:
            raise ValidationError(f"k must satisfy 2 <= k <= n={n}, got {k}")
    axes = [np.linspace(a, b, r) for (a, b), r in zip(ranges, resolution)]

    comps = _components(family, n)
    prepared = []
    for probe in probes:
        vectors = expand(probe)
        prepared.append((vectors, np.array([c.gram(vectors.stacked) for c in comps])))

    grid = np.array(np.meshgrid(*axes, indexing="ij")).reshape(nparams, -1).T

    def evaluate(point: np.ndarray) -> list[ScanRow]:
        p1 = float(point[0])
        p2 = float(point[1]) if nparams == 2 else math.nan
        if point.sum() > 1 + 1e-12:
            nan = math.nan
            return [ScanRow(p1, p2, k, SKIPPED, nan, nan, nan, nan, False, nan) for k in ks for _ in probes]
        weights = np.append(point, max(0.0, 1.0 - point.sum()))
        reports = []
        for vectors, grams in prepared:
            terms = terms_from_gram(np.tensordot(weights, grams, axes=1), vectors)
            reports.append([assemble_report(terms, k, eps) for k in ks])
        out = []
        for ki, k in enumerate(ks):
            best = max((r[ki].margin for r in reports), default=math.nan)
            for r in reports:
                rep = r[ki]
                out.append(ScanRow(p1, p2, k, rep.probe, rep.lhs, rep.rhs_pair, rep.rhs_diag,
                                   rep.margin, rep.detected, best))
        return out

    workers = workers or _workers()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            chunks = list(pool.map(evaluate, grid))
    else:
        chunks = [evaluate(p) for p in grid]
    rows = [row for chunk in chunks for row in chunk]
    return ScanResult(family, n, ks, [p.label for p in probes], axes, rows)


def _fmt(x: float) -> str:
    return "" if math.isnan(x) else f"{x:.17g}"


def emit_csv(result: ScanResult, path) -> None:
    """Write one CSV line per scan row; doubles carry 17 significant digits.

    ``path`` may also be an open text stream.
    """
    if hasattr(path, "write"):
        _write_rows(result, path)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(result, fh)


def _write_rows(result: ScanResult, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(CSV_HEADER)
    for row in result.rows:
        writer.writerow([
            result.family, result.n, row.k, row.probe,
            f"{row.p1:.17g}", _fmt(row.p2),
            _fmt(row.lhs), _fmt(row.rhs_pair), _fmt(row.rhs_diag), _fmt(row.margin),
            int(row.detected),
        ])


def read_csv(path) -> list[dict]:
    """Parse a scan CSV back into dicts with float values (empty cells become NaN)."""
    floats = {"p1", "p2", "lhs", "rhs_pair", "rhs_diag", "margin"}
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            for key in floats:
                rec[key] = float(rec[key]) if rec[key] else math.nan
            rec["n"] = int(rec["n"])
            rec["k"] = int(rec["k"])
            rec["detected"] = bool(int(rec["detected"]))
            out.append(rec)
    return out
