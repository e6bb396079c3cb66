import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ocbf_merge.constraints import (GE, LE, assemble_qp, build_cbf1, build_cbf2, build_clf,
                                    build_speed_cbfs, control_bounds)
from ocbf_merge.model import CavState, ConstraintParams, Geometry
from ocbf_merge.planner import solve_unconstrained

P = ConstraintParams()
G = Geometry()


def upper_bound(row):
    """u <= -c0/cu for a >= row with negative cu."""
    assert row.sense == GE and row.cu < 0
    return -row.c0 / row.cu


def test_cbf1_examples():
    row = build_cbf1(CavState(0, 18), CavState(50, 20), P)
    assert row.cu == -1.8 and row.ce == 0.0
    assert upper_bound(row) == pytest.approx(10.8889, abs=1e-4)
    row = build_cbf1(CavState(0, 18), CavState(1.8 * 18, 18), P)
    assert upper_bound(row) == pytest.approx(0.0, abs=1e-12)
    row = build_cbf1(CavState(0, 20), CavState(36, 15), P)
    assert upper_bound(row) == pytest.approx(-2.7778, abs=1e-4)


def test_cbf2_examples():
    row = build_cbf2(CavState(200, 18), CavState(245, 20), G, P)
    assert row.cu == pytest.approx(-0.9)
    assert row.c0 == pytest.approx(0.542 + 28.8)
    assert upper_bound(row) == pytest.approx((0.542 + 28.8) / 0.9, abs=1e-12)  # 32.6022
    assert build_cbf2(CavState(0, 18), CavState(10, 20), G, P).cu == 0.0


def test_cbf2_at_merge_point_substitution():
    # x_i = L and z = phi v_i: the gap term vanishes, only -phi v^2/L remains
    row = build_cbf2(CavState(400, 18), CavState(400 + 1.8 * 18, 18), G, P)
    c0 = -(1.8 / 400) * 18 ** 2
    assert row.c0 == pytest.approx(c0)  # -1.458
    assert row.cu == pytest.approx(-1.8)
    assert upper_bound(row) == pytest.approx(c0 / 1.8)  # -0.81


def test_speed_cbfs():
    hi, lo = build_speed_cbfs(CavState(0, 30), P)
    assert (hi.cu, lo.cu) == (-1.0, 1.0)
    assert upper_bound(hi) == pytest.approx(0.0)
    hi, lo = build_speed_cbfs(CavState(0, 0), P)
    assert -lo.c0 / lo.cu == pytest.approx(0.0)  # u >= 0
    hi, lo = build_speed_cbfs(CavState(0, 15), P)
    assert upper_bound(hi) == 15.0 and -lo.c0 / lo.cu == -15.0


def test_clf_examples():
    row = build_clf(CavState(0, 18), 18.0, P)
    assert (row.cu, row.c0) == (0.0, 0.0)
    row = build_clf(CavState(0, 20), 18.0, P)
    assert (row.cu, row.ce, row.c0, row.sense) == (4.0, -1.0, 40.0, LE)
    row = build_clf(CavState(0, 16), 18.0, P)
    assert (row.cu, row.c0) == (-4.0, 40.0)


def test_assemble_counts():
    plan = solve_unconstrained(18.0, 400.0, 5.0)
    lead = assemble_qp(CavState(10, 18), None, None, plan, 0.5, P, G)
    assert sorted(lead.tags()) == sorted(["CBF3", "CBF4", "CLF", "UMIN", "UMAX"])
    full = assemble_qp(CavState(10, 18), CavState(80, 18), CavState(30, 18), plan, 0.5, P, G)
    assert len(full.constraints) == 7
    no_clf = assemble_qp(CavState(10, 18), None, None, plan, 0.5, P, G, clf_enabled=False)
    assert "CLF" not in no_clf.tags()
    assert all(r.ce == 0.0 for r in no_clf.constraints)


def test_control_bounds():
    lo, hi = control_bounds(P)
    assert lo.satisfied(P.u_min) and not lo.satisfied(P.u_min - 1e-6)
    assert hi.satisfied(P.u_max) and not hi.satisfied(P.u_max + 1e-6)


state = st.tuples(st.floats(0.0, 400.0), st.floats(0.0, 30.0))


@given(state, state, state, st.floats(-6.0, 5.0))
def test_rows_match_substitution_oracle(si, sp, sj, u):
    """Each CBF row at u equals d/dt b + k b along x' = v, v' = u (neighbors coast)."""
    xi, vi = si
    xp, vp = sp
    xj, vj = sj
    k1, k2 = P.k1, P.k2
    phi, L = P.phi, G.L
    # symbolic derivatives written out independently of the builders
    b1 = xp - xi - phi * vi - P.delta
    db1 = vp - vi - phi * u
    b2 = xj - xi - phi * xi * vi / L - P.delta
    db2 = vj - vi - phi * (vi * vi + xi * u) / L
    assert build_cbf1(CavState(xi, vi), CavState(xp, vp), P).value(u) == pytest.approx(
        db1 + k1 * b1, abs=1e-9)
    assert build_cbf2(CavState(xi, vi), CavState(xj, vj), G, P).value(u) == pytest.approx(
        db2 + k2 * b2, abs=1e-9)
    hi, lo = build_speed_cbfs(CavState(xi, vi), P)
    assert hi.value(u) == pytest.approx(-u + P.k3 * (P.v_max - vi))
    assert lo.value(u) == pytest.approx(u + P.k4 * (vi - P.v_min))


@given(state, state)
def test_cbf2_gain_sign(si, sj):
    row = build_cbf2(CavState(*si), CavState(*sj), G, P)
    assert row.cu <= 0.0
    assert row.cu == pytest.approx(-P.phi * si[0] / G.L)
    assert build_cbf1(CavState(*si), CavState(*sj), P).cu == -P.phi
