"""Dyadic stopping-time decomposition at a level lambda.

The dyadic tree over [0, 1) is descended from the root; a maximal interval
is selected as soon as the average of |f| over it first exceeds lambda.
On each selected interval the good part is the (signed) average of f and
the bad part is the mean-zero remainder; off the selected intervals the
good part is f itself.  The exceptional set omega is the union of the
selected intervals dilated by a fixed factor.

Selection is strict (average > lambda), so the parent of every selected
interval has average at most lambda and the good part is bounded by
2 * lambda whenever the root itself is not selected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .grid import DimensionError, DyadicInterval, GridFunction, GridSet, dilate_interval, norm

__all__ = ["CzDecomposition", "CheckResult", "cz_decompose", "verify_cz", "ConsistencyError"]

MEAN_ZERO_TOL = 1e-12


class ConsistencyError(ValueError):
    """Raised when a decomposition is verified against the wrong function."""


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    slack: float  # bound minus measured value; negative means violated


@dataclass(frozen=True, eq=False)
class CzDecomposition:
    level: float
    cubes: tuple[DyadicInterval, ...]
    good: GridFunction
    bad: GridFunction
    omega: GridSet
    dilation_factor: float

    @property
    def n(self) -> int:
        return self.good.n

    @property
    def cube_measure(self) -> float:
        return float(sum(q.length for q in self.cubes))

    def to_json(self) -> str:
        return json.dumps(
            {
                "lambda": float(self.level),
                "cubes": [q.to_dict() for q in self.cubes],
                "dilation_factor": float(self.dilation_factor),
            }
        )

    @classmethod
    def from_json(cls, text: str, f: GridFunction) -> "CzDecomposition":
        """Rebuild the full decomposition from the serialized skeleton and f."""
        obj = json.loads(text)
        cubes = tuple(DyadicInterval.from_dict(d) for d in obj["cubes"])
        return _assemble(f, float(obj["lambda"]), cubes, float(obj["dilation_factor"]))


def _dyadic_averages(values: np.ndarray) -> list[np.ndarray]:
    """averages[l][j] = mean of values over the dyadic interval (l, j)."""
    levels = [values.astype(float)]
    while levels[-1].size > 1:
        prev = levels[-1]
        levels.append(0.5 * (prev[0::2] + prev[1::2]))
    levels.reverse()
    return levels


def _assemble(
    f: GridFunction,
    level: float,
    cubes: tuple[DyadicInterval, ...],
    dilation_factor: float,
) -> CzDecomposition:
    n = f.n
    good = f.values.copy()
    omega = GridSet.empty(n)
    for q in cubes:
        sl = q.cell_slice(n)
        good[sl] = f.values[sl].mean()
        omega = omega.union(dilate_interval(q, dilation_factor, n))
    bad = f.values - good
    return CzDecomposition(level, cubes, GridFunction(good), GridFunction(bad), omega, dilation_factor)


def cz_decompose(f: GridFunction, level: float, dilation_factor: float = 10.0) -> CzDecomposition:
    """Stopping-time decomposition of f at the given level.

    Descends the dyadic tree from the root; recursion bottoms out at single
    cells, so a cell with |f| > level becomes a one-cell cube where the bad
    part vanishes identically.
    """
    level = float(level)
    if level <= 0:
        raise ValueError(f"decomposition level must be positive, got {level}")
    abs_means = _dyadic_averages(np.abs(f.values))
    max_level = len(abs_means) - 1
    cubes: list[DyadicInterval] = []
    stack = [(0, 0)]
    while stack:
        lev, idx = stack.pop()
        if abs_means[lev][idx] > level:
            cubes.append(DyadicInterval(lev, idx))
        elif lev < max_level:
            # right child pushed first so cubes come out left to right
            stack.append((lev + 1, 2 * idx + 1))
            stack.append((lev + 1, 2 * idx))
    return _assemble(f, level, tuple(cubes), float(dilation_factor))


def verify_cz(d: CzDecomposition, f: GridFunction, ps=(1.5, 2.0, 3.0, 4.0)) -> list[CheckResult]:
    """Re-measure every decomposition invariant against f.

    Also checks the p-norm budget of the good part,
    norm(g, p)^p <= (2 lambda)^(p-1) * norm(f, 1), for each requested p.
    Bounds that presuppose an unselected root are skipped when the root was
    selected.  Raises ConsistencyError when d was clearly not built from f.
    """
    if d.n != f.n:
        raise DimensionError(f"grid sizes differ: {d.n} vs {f.n}")
    resid = float(np.abs(d.good.values + d.bad.values - f.values).max())
    scale = max(1.0, float(np.abs(f.values).max()))
    if resid > 1e-6 * scale:
        raise ConsistencyError("decomposition does not add back to the supplied function")

    lam = d.level
    n = f.n
    f1 = norm(f, 1)
    root_selected = any(q.level == 0 for q in d.cubes)
    checks = [CheckResult("additivity", resid <= MEAN_ZERO_TOL * scale, MEAN_ZERO_TOL * scale - resid)]

    worst_mean = 0.0
    covered = np.zeros(n, dtype=int)
    maximal = True
    for q in d.cubes:
        sl = q.cell_slice(n)
        covered[sl] += 1
        worst_mean = max(worst_mean, abs(float(d.bad.values[sl].mean())))
        if q.level > 0:
            psl = q.parent().cell_slice(n)
            if float(np.abs(f.values[psl]).mean()) > lam:
                maximal = False
    checks.append(CheckResult("mean_zero_on_cubes", worst_mean <= MEAN_ZERO_TOL * scale, MEAN_ZERO_TOL * scale - worst_mean))
    checks.append(CheckResult("cubes_disjoint", int(covered.max(initial=0)) <= 1, float(1 - covered.max(initial=0))))
    checks.append(CheckResult("cubes_maximal", maximal, 0.0 if maximal else -1.0))

    off = covered == 0
    bad_off = float(np.abs(d.bad.values[off]).max()) if off.any() else 0.0
    checks.append(CheckResult("bad_vanishes_off_cubes", bad_off == 0.0, -bad_off))

    if not root_selected:
        sup_g = norm(d.good, np.inf)
        checks.append(CheckResult("good_sup_bound", sup_g <= 2 * lam * (1 + 1e-12), 2 * lam - sup_g))
    cube_mass = d.cube_measure
    checks.append(CheckResult("cube_mass_bound", cube_mass <= f1 / lam * (1 + 1e-12) + 1e-15, f1 / lam - cube_mass))
    g1 = norm(d.good, 1)
    checks.append(CheckResult("good_l1_bound", g1 <= f1 * (1 + 1e-12), f1 - g1))

    omega_bound = min(1.0, d.dilation_factor * f1 / lam) + 2.0 * len(d.cubes) / n
    checks.append(CheckResult("omega_measure_bound", d.omega.measure <= omega_bound * (1 + 1e-12), omega_bound - d.omega.measure))

    if not root_selected:
        for p in ps:
            lhs = norm(d.good, p) ** p
            rhs = (2 * lam) ** (p - 1) * f1
            checks.append(CheckResult(f"good_lp_budget_p={p:g}", lhs <= rhs * (1 + 1e-12), rhs - lhs))
    return checks


def all_passed(checks: list[CheckResult]) -> bool:
    return all(c.passed for c in checks)
