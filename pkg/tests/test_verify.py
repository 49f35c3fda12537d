from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoshear.criteria import CERTIFIED, INCONCLUSIVE, DiskGrid
from geoshear.funcore import Const, builtin, from_expr
from geoshear.shear import build_F, shear_solve
from geoshear.transforms import PowerPrimitive, TransformSpec, cesaro_transform
from geoshear.verify import (
    COLLISION,
    NO_COLLISION,
    DegenerateBoundaryError,
    NonSimpleBoundaryError,
    PointMap,
    _first_crossing,
    boundary_simplicity,
    closed_form_compare,
    convex_in_direction_test,
    crossing_counts,
    disk_samples,
    injectivity_test,
    segments_intersect,
    sense_preserving_scan,
)


def test_disk_samples_are_reproducible_and_inside():
    a = disk_samples(500, 0.7, 3)
    assert np.array_equal(a, disk_samples(500, 0.7, 3))
    assert np.all(np.abs(a) <= 0.7)
    assert not np.array_equal(a, disk_samples(500, 0.7, 4))


def test_identity_has_no_collision():
    res = injectivity_test(PointMap(builtin("identity"), n_interior=4000, n_boundary=512))
    assert res.verdict == NO_COLLISION and not res.collision
    assert "not a proof of univalence" in res.notes


def test_square_map_collision_is_antipodal():
    res = injectivity_test(PointMap(from_expr("z^2"), n_interior=4000, n_boundary=512))
    assert res.verdict == COLLISION
    w = res.witness
    assert abs(w.z1 + w.z2) < 1e-6
    assert w.image_distance < 1e-8 and w.preimage_distance > 0.05


def test_cubic_failure_case_collides():
    res = injectivity_test(PointMap(from_expr("z-z^2+z^3/3"), n_interior=5000, n_boundary=1024))
    assert res.collision
    f = from_expr("z-z^2+z^3/3")
    w = res.witness
    assert abs(f(w.z1) - f(w.z2)) == pytest.approx(w.image_distance, abs=1e-12)
    assert max(abs(w.z1), abs(w.z2)) <= 0.995 + 1e-12


@pytest.mark.parametrize("src", ["z^2", "z+0.8*z^2", "z-z^2+z^3/3", "z^3+0.1*z"])
def test_witness_contract(src):
    res = injectivity_test(PointMap(from_expr(src), n_interior=3000, n_boundary=512),
                           separation=0.1, collision_tol=1e-9)
    if res.collision:
        assert res.witness.image_distance < 1e-9
        assert res.witness.preimage_distance > 0.1


def test_harmonic_map_injectivity():
    s = build_F(TransformSpec(0.2, 0.5, 0.0, builtin("cayley")), from_expr("-z"))
    assert not injectivity_test(PointMap(s, n_interior=3000, n_boundary=512)).collision


def test_segments_intersect_cases():
    assert segments_intersect((0, 0), (1, 1), (0, 1), (1, 0))
    assert not segments_intersect((0, 0), (1, 0), (0, 1), (1, 1))
    assert segments_intersect((0, 0), (1, 0), (1, 0), (2, 3))  # shared endpoint
    assert segments_intersect((0, 0), (2, 0), (1, 0), (3, 0))  # collinear overlap
    assert not segments_intersect((0, 0), (1, 0), (2, 0), (3, 0))


def _brute_force(xy):
    n = len(xy)
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if segments_intersect(xy[i], xy[(i + 1) % n], xy[j], xy[(j + 1) % n]):
                return True
    return False


@settings(max_examples=300, deadline=None)
@given(st.integers(4, 30), st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_sweep_agrees_with_brute_force(n, seed, wobble):
    rng = np.random.default_rng(seed)
    # mix star-shaped (usually simple) and scattered (usually crossing) polygons
    t = np.sort(rng.uniform(0, 2 * np.pi, n))
    r = 1 + wobble * rng.uniform(-1, 1, n) * 3
    xy = np.column_stack([r * np.cos(t), r * np.sin(t)])
    if rng.random() < 0.3:
        xy = rng.uniform(-1, 1, (n, 2))
    found = _first_crossing(xy)
    assert (found is not None) == _brute_force([tuple(p) for p in xy])
    if found is not None:
        i, j = found
        assert segments_intersect(xy[i], xy[(i + 1) % n], xy[j], xy[(j + 1) % n])


def test_boundary_simplicity_examples():
    assert boundary_simplicity(PointMap(builtin("identity"), n_boundary=256)).simple
    assert not boundary_simplicity(PointMap(from_expr("z^2"), n_boundary=256)).simple
    with pytest.raises(DegenerateBoundaryError):
        boundary_simplicity(PointMap(Const(1.0), n_boundary=256))


def test_worked_example_boundaries():
    left = build_F(TransformSpec(0.2, 0.5, 0.0, builtin("cayley")), from_expr("-z"))
    assert boundary_simplicity(PointMap(left, n_boundary=1024)).simple


@pytest.mark.parametrize("src", ["z+0.8*z^2", "z^2", "z^3+0.1*z"])
def test_intersection_persists_under_refinement(src):
    f = from_expr(src)
    for n in (256, 512, 1024, 2048):
        assert not boundary_simplicity(PointMap(f, n_boundary=n)).simple


def test_crossing_counts():
    w = np.exp(2j * np.pi * np.arange(64) / 64)
    counts, skipped = crossing_counts(w, np.array([0.05, 0.5, 2.0]), 1e-9)
    assert counts == [2, 2, 0] and not skipped
    counts, skipped = crossing_counts(w, np.array([0.0]), 1e-9)
    assert counts == [-1] and skipped == [0.0]


def test_convex_direction_disk():
    m = PointMap(builtin("identity"), n_boundary=1024)
    for d in np.linspace(0, np.pi, 7):
        res = convex_in_direction_test(m, d)
        assert res.convex and res.max_crossings == 2


def test_three_slit_map_is_not_convex_horizontally():
    m = PointMap(from_expr("z*(1-z^3)^(-2/3)"), n_boundary=2048)
    assert boundary_simplicity(m).simple
    res = convex_in_direction_test(m, 0.0)
    assert not res.convex and res.max_crossings >= 4


def test_convex_direction_requires_simple_boundary():
    with pytest.raises(NonSimpleBoundaryError):
        convex_in_direction_test(PointMap(from_expr("z^2"), n_boundary=256))


def test_sense_scan_examples():
    grid = DiskGrid(60, 128)
    s = shear_solve(builtin("cayley"), Const(0.0))
    rep = sense_preserving_scan(s, grid)
    assert rep.verdict == CERTIFIED and rep.sup_value == 0
    # unit-size dilatation reaches r_max at the grid edge
    s = build_F(TransformSpec(1, 1, 0.0, builtin("koebe")), from_expr("z/2"))
    rep = sense_preserving_scan(s, grid)
    assert rep.verdict == INCONCLUSIVE
    assert rep.sup_value == pytest.approx(grid.r_max)
    assert np.all(s.jacobian(grid.points()) > 0)
    with pytest.warns(UserWarning):
        s = shear_solve(builtin("cayley"), from_expr("1.2*z"))
    assert sense_preserving_scan(s, grid).verdict == "bound-violated"


def test_closed_form_compare():
    ident = builtin("identity")
    assert closed_form_compare(ident, ident).max_error == 0
    rep = closed_form_compare(
        cesaro_transform(TransformSpec(0.2, 0.5, 0.0, builtin("cayley"))), PowerPrimitive(0.3))
    assert rep.max_error <= 1e-9 and rep.n == 100
    rep = closed_form_compare(
        cesaro_transform(TransformSpec(4 / 15, 1, 0.0, builtin("koebe"))), PowerPrimitive(0.8))
    assert rep.max_error <= 1e-9
