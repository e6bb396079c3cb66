import pytest
from hypothesis import given
from hypothesis import strategies as st

from ocbf_merge.model import (CavState, ConstraintParams, Geometry, eval_b1, eval_b2,
                              eval_b3_b4, phi_of_x)

P = ConstraintParams()
G = Geometry()
pos = st.floats(0.0, 400.0)
speed = st.floats(0.0, 30.0)


def test_b1_examples():
    assert eval_b1(CavState(50, 20), CavState(100, 0), P) == pytest.approx(14.0)
    assert eval_b1(CavState(50, 20), CavState(50 + 1.8 * 20, 0), P) == pytest.approx(0.0, abs=1e-12)
    assert eval_b1(CavState(50, 20), CavState(60, 0), P) == pytest.approx(-26.0)


def test_phi_examples_and_domain():
    assert phi_of_x(0.0, G, P) == 0.0
    assert phi_of_x(400.0, G, P) == pytest.approx(1.8)
    assert phi_of_x(200.0, G, P) == pytest.approx(0.9)
    for bad in (-1e-6, 400.001):
        with pytest.raises(ValueError):
            phi_of_x(bad, G, P)


def test_b2_examples():
    assert eval_b2(CavState(200, 20), CavState(240, 0), G, P) == pytest.approx(22.0)
    assert eval_b2(CavState(0, 20), CavState(13, 0), G, P) == pytest.approx(13.0)
    assert eval_b2(CavState(200, 20), CavState(218, 0), G, P) == pytest.approx(0.0, abs=1e-12)


def test_b3_b4_examples():
    assert eval_b3_b4(CavState(0, 30), P) == (0.0, 30.0)
    assert eval_b3_b4(CavState(0, 15), P) == (15.0, 15.0)
    assert eval_b3_b4(CavState(0, -1), P) == (31.0, -1.0)


def test_param_validation():
    with pytest.raises(ValueError):
        ConstraintParams(phi=0.0)
    with pytest.raises(ValueError):
        ConstraintParams(v_min=10.0, v_max=5.0)
    with pytest.raises(ValueError):
        ConstraintParams(u_min=1.0)
    with pytest.raises(ValueError):
        ConstraintParams(k2=0.0)
    with pytest.raises(ValueError):
        Geometry(L=0.0)


@given(pos, speed, pos, speed)
def test_b2_matches_definition(xi, vi, xj, vj):
    expected = (xj - xi) - phi_of_x(xi, G, P) * vi - P.delta
    assert eval_b2(CavState(xi, vi), CavState(xj, vj), G, P) == pytest.approx(expected, abs=1e-9)


@given(pos, pos)
def test_phi_monotone(x1, x2):
    if x1 < x2:
        assert phi_of_x(x1, G, P) < phi_of_x(x2, G, P)


@given(pos, speed, pos, st.floats(-1e3, 1e3))
def test_b1_translation_invariant(xi, vi, xp, off):
    a = eval_b1(CavState(xi, vi), CavState(xp, 0.0), P)
    b = eval_b1(CavState(xi + off, vi), CavState(xp + off, 0.0), P)
    assert b == pytest.approx(a, abs=1e-9)
