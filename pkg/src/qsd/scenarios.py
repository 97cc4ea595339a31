"""Three coplanar qubit states: a symmetric pair around ``z`` plus one along ``+x``.

``|psi_{1,2}> = cos(phi)|0> +- sin(phi)|1>`` (Bloch vectors ``(+-sin 2phi, 0, cos 2phi)``)
carry prior ``xi/2`` each and ``|psi_3> = |+>`` carries ``1 - xi``. Sweeping
``xi`` through ``[0, 1]`` crosses three regimes of the optimal measurement:

* region I   (small ``xi``): two outcomes, the ``psi_3`` element and the one of
  the pair farthest from ``psi_3`` (``psi_2`` with these signs);
* region II: three outcomes;
* region III (``xi`` above ``1/(1 + sin(phi) cos(phi))``): two outcomes, the
  pair only.

With this orientation the region-III Lagrange operator
``lam = (xi/4)[(1 + sin 2phi) I + cos 2phi sigma_z]`` makes
``lam - (1 - xi) rho_3`` singular exactly at the II/III threshold.
"""

from __future__ import annotations

import csv
import enum
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .certificate import certify
from .errors import AmbiguousClassification, BracketingFailure
from .model import Ensemble, Povm, pure_state
from .solver import SolverConfig, solve

log = logging.getLogger(__name__)

WEIGHT_THRESHOLD = 1e-6
CERTIFIED_GAP = 1e-7
#: Sweep points are solved to a much tighter gap than the solver default so
#: vanishing elements fall far below WEIGHT_THRESHOLD.
SWEEP_CONFIG = SolverConfig(max_iterations=20_000, gap_tolerance=1e-12)
CSV_HEADER = ["xi", "phi", "error_rate", "outcome_count", "region", "gap", "iterations"]


class Region(str, enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class CoplanarScenario:
    phi: float
    xi: float

    def __post_init__(self):
        # phi = pi/4 is admitted as the degenerate edge where psi_1 meets psi_3
        if not 0.0 < self.phi <= math.pi / 4:
            raise ValueError(f"phi must lie in (0, pi/4], got {self.phi}")
        if not 0.0 <= self.xi <= 1.0:
            raise ValueError(f"xi must lie in [0, 1], got {self.xi}")


@dataclass
class SweepPoint:
    xi: float
    phi: float
    error_rate: float
    outcome_count: int
    region: str
    gap: float
    iterations: int
    converged: bool
    active: tuple = ()

    @property
    def certified(self) -> bool:
        return self.gap <= CERTIFIED_GAP


def coplanar_three_states(s: CoplanarScenario) -> Ensemble:
    c, sn = math.cos(s.phi), math.sin(s.phi)
    states = [pure_state([c, sn]), pure_state([c, -sn]), pure_state([1.0, 1.0])]
    return Ensemble(states, [s.xi / 2, s.xi / 2, 1.0 - s.xi])


def threshold_xi_23(phi: float) -> float:
    """Prior above which the optimal device ignores ``psi_3``."""
    if not 0.0 < phi <= math.pi / 4:
        raise ValueError(f"phi must lie in (0, pi/4], got {phi}")
    return 1.0 / (1.0 + math.sin(phi) * math.cos(phi))


def active_elements(povm: Povm, e: Ensemble, weight_threshold: float = WEIGHT_THRESHOLD) -> tuple:
    """Indices of elements with ``Tr Pi_j > weight_threshold`` whose source has
    nonzero prior (a zero-prior outcome never scores, whatever its weight)."""
    w = povm.weights()
    return tuple(int(j) for j in range(len(w)) if w[j] > weight_threshold and e.priors[j] > 0)


def classify_region(povm: Povm, e: Ensemble, weight_threshold: float = WEIGHT_THRESHOLD) -> Region:
    w = povm.weights()
    # elements within a decade of the cut on both sides are "marginal"
    marginal = [j for j in range(len(w)) if weight_threshold / 10 < w[j] < weight_threshold * 10 and e.priors[j] > 0]
    if len(marginal) >= 2:
        raise AmbiguousClassification(f"elements {marginal} have weights {w[marginal]} near the cut {weight_threshold:g}")
    active = active_elements(povm, e, weight_threshold)
    if len(active) == 3:
        return Region.II
    if len(active) == 2:
        return Region.III if 2 not in active else Region.I
    return Region.DEGENERATE


def solve_point(phi: float, xi: float, cfg: SolverConfig = SWEEP_CONFIG) -> tuple[SweepPoint, object]:
    e = coplanar_three_states(CoplanarScenario(phi, xi))
    report = solve(e, cfg)
    try:
        region = classify_region(report.povm, e).value
    except AmbiguousClassification as exc:
        log.warning("xi=%.6g: %s", xi, exc)
        region = "ambiguous"
    active = active_elements(report.povm, e)
    point = SweepPoint(
        xi=xi,
        phi=phi,
        error_rate=1.0 - report.success_probability,
        outcome_count=max(1, len(active)),
        region=region,
        gap=report.gap,
        iterations=report.iterations_used,
        converged=report.converged,
        active=active,
    )
    if not point.certified:
        log.warning("xi=%.6g not certified: gap %.3e after %d iterations", xi, point.gap, point.iterations)
    return point, report


def _sweep_one(args):
    phi, xi, cfg = args
    try:
        return solve_point(phi, xi, cfg)[0]
    except Exception as exc:  # per-point failures are recorded, the sweep goes on
        log.error("xi=%.6g failed: %s", xi, exc)
        return SweepPoint(xi, phi, math.nan, 0, "error", math.nan, 0, False)


def sweep_xi(phi: float, xi_grid, cfg: SolverConfig = SWEEP_CONFIG, jobs: int = 1) -> list:
    grid = [float(x) for x in xi_grid]
    if any(not 0.0 <= x <= 1.0 for x in grid):
        raise ValueError("xi grid values must lie in [0, 1]")
    tasks = [(phi, x, cfg) for x in grid]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_one, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [_sweep_one(t) for t in tasks]


def default_grid(points: int = 201) -> np.ndarray:
    return np.linspace(0.0, 1.0, points)


def region_sequence(points) -> list:
    """Distinct regions in order of increasing ``xi`` (degenerate endpoints skipped)."""
    seq = []
    for pt in sorted(points, key=lambda p: p.xi):
        if pt.region in (Region.DEGENERATE.value, "error", "ambiguous"):
            continue
        if not seq or seq[-1][0] != pt.region:
            seq.append((pt.region, pt.outcome_count))
    return seq


_PAIRS = {("I", "II"), ("II", "III")}
_ORDER = {"I": 0, "II": 1, "III": 2}


def _region_at(phi, xi, cfg) -> str:
    e = coplanar_three_states(CoplanarScenario(phi, xi))
    report = solve(e, cfg)
    try:
        return classify_region(report.povm, e).value
    except AmbiguousClassification:
        # weights straddle the cut: the vanishing element is still decaying
        return Region.II.value


def find_threshold_numeric(phi: float, region_pair=("II", "III"), cfg: SolverConfig = SWEEP_CONFIG,
                           tol: float = 1e-5, bracket=None) -> float:
    """Bisect ``xi`` for the boundary between the regions in ``region_pair``.

    The predicate is "region at or beyond the upper one" (I < II < III), which
    is monotone in ``xi``; when region II is narrower than the bisection can
    resolve, both boundaries collapse onto the I/III switch.
    """
    lo_region, hi_region = (r.value if isinstance(r, Region) else str(r) for r in region_pair)
    if (lo_region, hi_region) not in _PAIRS:
        raise BracketingFailure(f"unsupported region pair {region_pair}")
    target = _ORDER[hi_region]

    def upper(xi):
        region = _region_at(phi, xi, cfg)
        if region not in _ORDER:
            raise BracketingFailure(f"xi={xi} classified as {region}")
        return _ORDER[region] >= target

    if bracket is None:
        grid = np.linspace(0.0, 1.0, 41)[1:-1]
        flags = [upper(x) for x in grid]
        i = next((k for k in range(len(grid) - 1) if not flags[k] and flags[k + 1]), None)
        if i is None:
            raise BracketingFailure(f"no {lo_region}->{hi_region} transition for phi={phi}")
        bracket = (grid[i], grid[i + 1])
    lo, hi = bracket
    if upper(lo) or not upper(hi):
        raise BracketingFailure(f"[{lo}, {hi}] does not bracket {lo_region}->{hi_region}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if upper(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def boundaries_from_sweep(phi: float, points, cfg: SolverConfig = SWEEP_CONFIG, tol: float = 1e-5) -> dict:
    """Refine every I/II and II/III transition seen in a sweep by bisection."""
    pts = [p for p in sorted(points, key=lambda p: p.xi) if p.region in ("I", "II", "III")]
    out = {}
    for a, b in zip(pts, pts[1:]):
        pair = (a.region, b.region)
        if pair in _PAIRS and f"{pair[0]}/{pair[1]}" not in out:
            out[f"{pair[0]}/{pair[1]}"] = find_threshold_numeric(phi, pair, cfg, tol, bracket=(a.xi, b.xi))
    return out


def state_convention_residual(phi: float, cfg: SolverConfig = SWEEP_CONFIG) -> float:
    """``min_eig(lam* - (1 - xi*) rho_3)`` at the analytic II/III threshold, with
    ``lam*`` the optimal two-state Lagrange operator of the symmetric pair.
    Zero when the state orientation matches the threshold formula."""
    xi = threshold_xi_23(phi)
    e = coplanar_three_states(CoplanarScenario(phi, xi))
    pair = Ensemble(e.states[:2], [0.5, 0.5])
    report = solve(pair, cfg)
    lam = xi * report.lagrange_operator
    return float(np.linalg.eigvalsh(lam - e.priors[2] * e.states[2])[0])


def write_csv(points, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for p in points:
        writer.writerow([
            f"{p.xi:.12g}", f"{p.phi:.12g}", f"{p.error_rate:.12g}", p.outcome_count,
            p.region, f"{p.gap:.12g}", p.iterations,
        ])


def csv_text(points) -> str:
    buf = io.StringIO()
    write_csv(points, buf)
    return buf.getvalue()


def default_jobs() -> int:
    return os.cpu_count() or 1
