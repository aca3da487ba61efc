import numpy as np
import pytest

from stablab import CzDecomposition, GridFunction, cz_decompose, norm, verify_cz
from stablab.cz import ConsistencyError, all_passed


def spiky(rng, n):
    return GridFunction(rng.standard_normal(n) * np.exp(rng.standard_normal(n)))


def test_level_above_sup_returns_trivial_split():
    f = GridFunction([1.0, -0.5, 0.25, 0.0])
    d = cz_decompose(f, 2.0)
    assert d.cubes == ()
    assert d.good == f
    assert d.bad == GridFunction.zeros(4)
    assert d.omega.measure == 0.0


def test_worked_example_spike_on_eighth():
    # f = 8 on [0, 1/8) of an 8-cell grid, level 2: the parent [0, 1/2) has
    # average exactly 2 (not selected, strict inequality), its child [0, 1/4)
    # has average 4 and is selected
    f = GridFunction([8.0, 0, 0, 0, 0, 0, 0, 0])
    d = cz_decompose(f, 2.0)
    assert [(q.level, q.index) for q in d.cubes] == [(2, 0)]
    assert np.allclose(d.good.values, [4, 4, 0, 0, 0, 0, 0, 0])
    assert np.allclose(d.bad.values, [4, -4, 0, 0, 0, 0, 0, 0])
    assert abs(float(d.bad.values[:2].mean())) <= 1e-12
    assert norm(d.good, np.inf) == 4.0 == 2 * d.level
    assert d.cube_measure == 0.25 <= norm(f, 1) / d.level
    assert all_passed(verify_cz(d, f))


def test_ties_do_not_select():
    # constant 2 at level 2: every average equals 2, nothing is selected
    f = GridFunction.constant(2.0, 8)
    d = cz_decompose(f, 2.0)
    assert d.cubes == ()


def test_single_cell_floor():
    # a lone huge cell becomes a one-cell cube with zero bad part there
    # (parent [1/2, 1) has average 8 <= 10 < 16)
    f = GridFunction([0.0, 0.0, 0.0, 16.0])
    d = cz_decompose(f, 10.0)
    assert [(q.level, q.index) for q in d.cubes] == [(2, 3)]
    assert np.all(d.bad.values == 0.0)


def test_rejects_nonpositive_level():
    with pytest.raises(ValueError):
        cz_decompose(GridFunction([1.0, 0.0]), 0.0)


def test_invariant_campaign(rng):
    for _ in range(200):
        n = int(rng.choice([64, 256]))
        f = spiky(rng, n)
        lam = norm(f, 1) * float(10 ** rng.uniform(0, 2))
        d = cz_decompose(f, lam)
        checks = verify_cz(d, f)
        failed = [c for c in checks if not c.passed]
        assert not failed, failed


def test_additivity_and_disjointness_details(rng):
    f = spiky(rng, 128)
    lam = norm(f, 1) * 2.0
    d = cz_decompose(f, lam)
    scale = max(1.0, norm(f, np.inf))
    assert np.abs(d.good.values + d.bad.values - f.values).max() <= 1e-12 * scale
    covered = np.zeros(128, dtype=int)
    for q in d.cubes:
        covered[q.cell_slice(128)] += 1
        if q.level > 0:
            parent_avg = float(np.abs(f.values[q.parent().cell_slice(128)]).mean())
            assert parent_avg <= lam  # maximality
        assert float(np.abs(f.values[q.cell_slice(128)]).mean()) > lam
    assert covered.max() <= 1
    off = covered == 0
    assert np.all(d.bad.values[off] == 0.0)


def test_omega_measure_bound(rng):
    for _ in range(50):
        f = spiky(rng, 256)
        lam = norm(f, 1) * float(10 ** rng.uniform(0, 1.5))
        d = cz_decompose(f, lam)
        bound = min(1.0, 10.0 * norm(f, 1) / lam) + 2.0 * len(d.cubes) / 256
        assert d.omega.measure <= bound + 1e-12


def test_lp_good_part_budget(rng):
    for _ in range(50):
        f = spiky(rng, 256)
        lam = norm(f, 1) * float(10 ** rng.uniform(0.01, 2))
        d = cz_decompose(f, lam)
        for p in (1.5, 2.0, 3.0, 4.0):
            assert norm(d.good, p) ** p <= (2 * lam) ** (p - 1) * norm(f, 1) * (1 + 1e-12)


def test_verify_rejects_wrong_function(rng):
    f = spiky(rng, 64)
    d = cz_decompose(f, norm(f, 1) * 3.0)
    with pytest.raises(ConsistencyError):
        verify_cz(d, f + GridFunction.constant(5.0, 64))


def test_json_round_trip(rng):
    f = spiky(rng, 64)
    d = cz_decompose(f, norm(f, 1) * 2.0, dilation_factor=4.0)
    rebuilt = CzDecomposition.from_json(d.to_json(), f)
    assert rebuilt.cubes == d.cubes
    assert rebuilt.good == d.good
    assert rebuilt.bad == d.bad
    assert rebuilt.omega == d.omega
    assert rebuilt.dilation_factor == 4.0
