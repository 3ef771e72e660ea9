"""Principal-bundle layer: connection form, modified pushforward, action
differential, total field strength, and automorphism pullbacks."""
import numpy as np
import pytest
from scipy.linalg import expm

from cym.algebra import GroupElement, ad_matrix_of_group, su2, u1
from cym.connection import LabConnection, cov_ext_deriv, potential_curvature
from cym.forms import (PolyData, SamplePlan, add_forms, bracket_pairing,
                       euclidean_chart, form_from_poly, graded_product,
                       scale_form, zero_form)
from cym.lgb import (GSection, InconsistencyError, TotalPoint, TotalTangent,
                     TrivLgb, group_sample)
from cym.principal import (Automorphism, TrivPrincipal,
                           action_differential_residual, connection_one_form,
                           equivariance_residual, field_strength_type_residual,
                           gauge_transform_total, kernel_invariance_residual,
                           mixed_bracket_residual, modified_pushforward,
                           projection_commutation_residual, pushforward_matrix,
                           pushforward_via_section, total_field_strength)

ALG = su2()
CHART = euclidean_chart(2, half=1.0)


def poly_form(n, degree, shape, terms):
    return form_from_poly(n, degree, "algebra", shape, PolyData(n, degree, shape, terms))


def make_bundle(with_omega=True, with_a=True):
    omega = poly_form(2, 1, (3,), {(1,): [(np.array([0., 0., 1.]), np.array([1, 0]))]}) \
        if with_omega else zero_form(2, 1, "algebra", (3,))
    a = poly_form(2, 1, (3,), {(0,): [(np.array([0.5, 0., 0.]), np.array([0, 1]))],
                               (1,): [(np.array([0., 0.3, 0.]), np.array([1, 0]))]}) \
        if with_a else zero_form(2, 1, "algebra", (3,))
    return TrivPrincipal(TrivLgb(CHART, ALG, omega), a)


# ---------------------------------------------------------------------------
# connection 1-form
# ---------------------------------------------------------------------------

def test_connection_form_identity_on_vertical():
    p = make_bundle()
    rng = np.random.default_rng(1)
    for _ in range(5):
        pt = TotalPoint(rng.uniform(-0.9, 0.9, size=2), group_sample(ALG, rng))
        nu = rng.normal(size=3)
        got = connection_one_form(p, pt, TotalTangent(np.zeros(2), nu))
        assert np.array_equal(got, nu)


def test_connection_form_at_identity_gauge():
    p = make_bundle()
    pt = TotalPoint(np.array([0.3, -0.2]), ALG.group_identity())
    t = TotalTangent(np.array([1.0, 2.0]), np.array([0.1, 0.2, 0.3]))
    a = p.a_local.components(pt.x, (0,)) + 2.0 * p.a_local.components(pt.x, (1,))
    assert np.abs(connection_one_form(p, pt, t) - (t.eta + a)).max() < 1e-15


def test_connection_form_kernel_without_gauge_field():
    p = make_bundle(with_a=False)
    pt = TotalPoint(np.array([0.4, 0.1]), ALG.group_identity())
    t = TotalTangent(np.array([1.0, -1.0]), np.zeros(3))
    assert np.abs(connection_one_form(p, pt, t)).max() == 0.0


def test_bundle_rejects_wrong_degree_gauge_field():
    lgb = TrivLgb(CHART, ALG, zero_form(2, 1, "algebra", (3,)))
    with pytest.raises(ValueError, match="1-form"):
        TrivPrincipal(lgb, zero_form(2, 2, "algebra", (3,)))


# ---------------------------------------------------------------------------
# modified pushforward
# ---------------------------------------------------------------------------

def test_pushforward_classical_on_vertical_inputs():
    p = make_bundle()
    rng = np.random.default_rng(2)
    g = group_sample(ALG, rng)
    pt = TotalPoint(np.array([0.2, 0.4]), group_sample(ALG, rng))
    nu = rng.normal(size=3)
    out = modified_pushforward(p, g, pt, TotalTangent(np.zeros(2), nu), check=False)
    want = ad_matrix_of_group(ALG, g.matrix.conj().T) @ nu
    assert np.array_equal(out.eta, want)
    assert np.abs(out.X).max() == 0.0


def test_pushforward_classical_when_omega_vanishes():
    p = make_bundle(with_omega=False)
    rng = np.random.default_rng(3)
    g = group_sample(ALG, rng)
    pt = TotalPoint(np.array([0.2, 0.4]), group_sample(ALG, rng))
    t = TotalTangent(rng.normal(size=2), rng.normal(size=3))
    out = modified_pushforward(p, g, pt, t, check=True)
    want = ad_matrix_of_group(ALG, g.matrix.conj().T) @ t.eta
    assert np.abs(out.eta - want).max() < 1e-12


def test_pushforward_section_routes_agree():
    p = make_bundle()
    rng = np.random.default_rng(4)
    g = group_sample(ALG, rng)
    pt = TotalPoint(np.array([0.2, 0.4]), group_sample(ALG, rng))
    t = TotalTangent(rng.normal(size=2), rng.normal(size=3))
    closed = modified_pushforward(p, g, pt, t, check=True)  # gate itself
    flat = GSection.constant(g)

    def tilted_fn(y):
        c = np.array([0.3 * (y[0] - pt.x[0]) + 0.1 * (y[1] - pt.x[1]), 0.0, 0.0])
        return GroupElement(ALG, expm(ALG.rep_of(c))) @ g

    tilted = GSection(ALG, tilted_fn, name="tilted")
    via_flat = pushforward_via_section(p, flat, pt, t)
    via_tilted = pushforward_via_section(p, tilted, pt, t)
    assert np.abs(via_flat.eta - via_tilted.eta).max() < 1e-8
    assert np.abs(via_flat.eta - closed.eta).max() < 1e-8


def test_pushforward_gate_trips_with_absurd_tolerance():
    p = make_bundle()
    rng = np.random.default_rng(5)
    g = group_sample(ALG, rng)
    pt = TotalPoint(np.array([0.2, 0.4]), group_sample(ALG, rng))
    t = TotalTangent(rng.normal(size=2), rng.normal(size=3))
    with pytest.raises(InconsistencyError, match="deviates"):
        modified_pushforward(p, g, pt, t, check=True, tol=1e-18)


def test_pushforward_matrix_is_bijective():
    p = make_bundle()
    rng = np.random.default_rng(6)
    for _ in range(4):
        m = pushforward_matrix(p, rng.uniform(-0.9, 0.9, size=2),
                               group_sample(ALG, rng))
        assert np.linalg.matrix_rank(m) == 5
        assert abs(abs(np.linalg.det(m)) - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# action differential
# ---------------------------------------------------------------------------

def test_action_differential_su2():
    p = make_bundle()
    plan = SamplePlan(count=8, seed=3, tangent_probes=2)
    assert action_differential_residual(p, plan) < 1e-7


def test_action_differential_abelian():
    alg = u1()
    omega = form_from_poly(2, 1, "algebra", (1,), PolyData(
        2, 1, (1,), {(0,): [(np.array([1.0]), np.array([0, 1]))]}))
    a = form_from_poly(2, 1, "algebra", (1,), PolyData(
        2, 1, (1,), {(1,): [(np.array([0.4]), np.array([1, 0]))]}))
    p = TrivPrincipal(TrivLgb(CHART, alg, omega), a)
    plan = SamplePlan(count=8, seed=3, tangent_probes=2)
    assert action_differential_residual(p, plan) < 1e-10


# ---------------------------------------------------------------------------
# structural invariants of the connection
# ---------------------------------------------------------------------------

def test_equivariance_of_connection_form():
    plan = SamplePlan(count=10, seed=2, tangent_probes=3)
    assert equivariance_residual(make_bundle(), plan) < 1e-8


def test_kernel_invariance_under_pushforward():
    plan = SamplePlan(count=10, seed=2, tangent_probes=3)
    assert kernel_invariance_residual(make_bundle(), plan) < 1e-8


def test_projection_commutation():
    plan = SamplePlan(count=10, seed=2, tangent_probes=3)
    assert projection_commutation_residual(make_bundle(), plan) < 1e-8


def test_mixed_bracket_of_lift_and_fundamental_field():
    p = make_bundle()
    nu = poly_form(2, 0, (3,), {(): [(np.array([0.4, 0., 0.]), np.array([0, 0])),
                                     (np.array([0., 0.2, 0.]), np.array([1, 0]))]})
    plan = SamplePlan(count=6, seed=6)
    assert mixed_bracket_residual(p, nu, plan) < 1e-4


# ---------------------------------------------------------------------------
# total field strength
# ---------------------------------------------------------------------------

def test_field_strength_vanishes_on_vertical_arguments():
    p = make_bundle()
    zeta = potential_curvature(ALG, p.lgb.omega)
    rng = np.random.default_rng(7)
    fs = total_field_strength(p, zeta, np.array([0.3, -0.2]), group_sample(ALG, rng))
    vertical = np.zeros(5)
    vertical[3] = 1.0
    probe = rng.normal(size=5)
    assert np.abs(fs.evaluate(vertical, probe)).max() < 1e-8
    assert np.abs(fs.evaluate(probe, vertical)).max() < 1e-8


def test_field_strength_reduces_to_central_form_when_flat():
    p = make_bundle(with_omega=False, with_a=False)
    zeta = poly_form(2, 2, (3,), {(0, 1): [(np.array([0.2, -0.1, 0.4]),
                                            np.array([1, 0]))]})
    fs = total_field_strength(p, zeta, np.array([0.5, 0.1]))
    t1 = np.array([1.0, 0.0, 0.0, 0.0, 0.0])
    t2 = np.array([0.0, 1.0, 0.0, 0.0, 0.0])
    want = zeta.components(np.array([0.5, 0.1]), (0, 1))
    assert np.abs(fs.evaluate(t1, t2) - want).max() < 1e-9


def test_structure_equation_residual():
    p = make_bundle()
    zeta = potential_curvature(ALG, p.lgb.omega)
    rng = np.random.default_rng(8)
    fs = total_field_strength(p, zeta, np.array([0.3, -0.2]), group_sample(ALG, rng))
    assert fs.structure_residual(probes=8, seed=4) < 1e-6


def test_field_strength_on_horizontal_lifts_matches_local_formula():
    p = make_bundle()
    zeta = potential_curvature(ALG, p.lgb.omega)
    x = np.array([0.3, -0.2])
    fs = total_field_strength(p, zeta, x)
    nab = LabConnection.from_omega(ALG, p.lgb.omega)
    local = add_forms(add_forms(
        cov_ext_deriv(nab, p.a_local),
        scale_form(graded_product(bracket_pairing(ALG), p.a_local, p.a_local), 0.5)),
        zeta)
    l0 = fs.horizontal_lift(np.array([1.0, 0.0]))
    l1 = fs.horizontal_lift(np.array([0.0, 1.0]))
    assert np.abs(fs.evaluate(l0, l1) - local.components(x, (0, 1))).max() < 1e-6


def test_field_strength_is_adjoint_type():
    p = make_bundle()
    zeta = potential_curvature(ALG, p.lgb.omega)
    plan = SamplePlan(count=5, seed=5, tangent_probes=2)
    assert field_strength_type_residual(p, zeta, plan) < 1e-5


# ---------------------------------------------------------------------------
# automorphism pullbacks
# ---------------------------------------------------------------------------

def test_identity_automorphism_fixes_everything():
    p = make_bundle()
    zeta = potential_curvature(ALG, p.lgb.omega)
    res = gauge_transform_total(p, Automorphism(GSection.identity(ALG)), zeta,
                                SamplePlan(count=3, seed=7, tangent_probes=2))
    assert res.residual_a < 1e-10
    assert res.residual_f < 1e-10
    x = np.array([0.3, -0.2])
    for k in range(2):
        assert np.abs(res.a_local_new.components(x, (k,))
                      - p.a_local.components(x, (k,))).max() < 1e-12


def test_constant_multiplier_without_omega_twists_by_adjoint():
    p = make_bundle(with_omega=False)
    zeta = zero_form(2, 2, "algebra", (3,))
    g = GroupElement(ALG, expm(ALG.rep_of(np.array([0.5, -0.2, 0.9]))))
    res = gauge_transform_total(p, Automorphism(GSection.constant(g)), zeta,
                                SamplePlan(count=3, seed=9, tangent_probes=2))
    x = np.array([0.4, 0.2])
    ad_inv = ad_matrix_of_group(ALG, g.matrix.conj().T)
    for k in range(2):
        want = ad_inv @ p.a_local.components(x, (k,))
        assert np.abs(res.a_local_new.components(x, (k,)) - want).max() < 1e-9


def test_generic_automorphism_dual_routes_agree():
    p = make_bundle()
    zeta = potential_curvature(ALG, p.lgb.omega)
    tau = GSection.from_exp_coeffs(
        ALG, lambda y: np.array([0.3 * y[0], -0.4 * y[1], 0.2]), "tau")
    res = gauge_transform_total(p, Automorphism(tau), zeta,
                                SamplePlan(count=4, seed=8, tangent_probes=2))
    assert res.residual_a < 1e-5
    assert res.residual_f < 1e-5


def test_conjugation_section_equivariance_exact():
    tau = GSection.from_exp_coeffs(
        ALG, lambda y: np.array([0.3 * y[0], -0.4 * y[1], 0.2]), "tau")
    aut = Automorphism(tau)
    rng = np.random.default_rng(11)
    x = np.array([0.1, 0.5])
    h, q = group_sample(ALG, rng), group_sample(ALG, rng)
    lhs = aut.sigma_conj(x, h @ q).matrix
    rhs = (q.inverse() @ aut.sigma_conj(x, h) @ q).matrix
    assert np.abs(lhs - rhs).max() < 1e-12
