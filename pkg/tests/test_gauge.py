"""Chart-local gauge theory: field strength, gauge-change laws, Bianchi,
Lagrangian density, invariance residuals, and the topological charge."""
import numpy as np
import pytest

from cym.algebra import su2, u1
from cym.connection import LabConnection, potential_curvature
from cym.forms import (LieForm, PolyData, SamplePlan, euclidean_chart,
                       form_from_poly, minkowski_chart, zero_form)
from cym.gauge import (ChargeResult, CompatibilityGateError, GaugeScenario,
                       bianchi_residual, change_of_gauge,
                       density_gauge_invariance_residual,
                       density_infinitesimal_residual,
                       field_redef_invariance_residual, infinitesimal_gauge,
                       instanton_charge, lagrangian_density,
                       local_field_strength, self_duality_residual)
from cym.lgb import GSection, InconsistencyError

SU2, U1 = su2(), u1()
CHART = euclidean_chart(2, half=1.0)
E1, E2, E3 = np.eye(3)


def poly_form(n, degree, shape, terms, target="algebra"):
    return form_from_poly(n, degree, target, shape, PolyData(n, degree, shape, terms))


def curved_scenario():
    """su(2) on the square: omega = x0 dx1 . e3, zeta its own curvature,
    A = 0.5 x1 dx0 . e1 + 0.3 x0 dx1 . e2."""
    omega = poly_form(2, 1, (3,), {(1,): [(E3, np.array([1, 0]))]})
    zeta = potential_curvature(SU2, omega)
    a = poly_form(2, 1, (3,), {(0,): [(0.5 * E1, np.array([0, 1]))],
                               (1,): [(0.3 * E2, np.array([1, 0]))]})
    return GaugeScenario(CHART, SU2, LabConnection.from_omega(SU2, omega), zeta, a)


def abelian_scenario(c=0.7):
    a = poly_form(2, 1, (1,), {(0,): [(np.array([c]), np.array([0, 1]))]})
    return GaugeScenario(CHART, U1,
                         LabConnection.from_omega(U1, zero_form(2, 1, "algebra", (1,))),
                         zero_form(2, 2, "algebra", (1,)), a)


# ---------------------------------------------------------------------------
# scenario validation and the compatibility gate
# ---------------------------------------------------------------------------

def test_gauge_field_degree_validated():
    with pytest.raises(ValueError, match="1-form"):
        GaugeScenario(CHART, SU2, LabConnection.from_omega(SU2, zero_form(2, 1, "algebra", (3,))),
                      zero_form(2, 2, "algebra", (3,)), zero_form(2, 2, "algebra", (3,)))


def test_central_form_degree_validated():
    with pytest.raises(ValueError, match="2-form"):
        GaugeScenario(CHART, SU2, LabConnection.from_omega(SU2, zero_form(2, 1, "algebra", (3,))),
                      zero_form(2, 1, "algebra", (3,)), zero_form(2, 1, "algebra", (3,)))


def test_scenario_without_potential_has_no_lgb():
    gamma = zero_form(2, 1, "endomorphism", (3, 3))
    s = GaugeScenario(CHART, SU2, LabConnection.from_gamma(SU2, gamma),
                      zero_form(2, 2, "algebra", (3,)), zero_form(2, 1, "algebra", (3,)))
    with pytest.raises(ValueError, match="horizontal potential"):
        s.lgb


def test_gate_passes_on_curvature_pair():
    rep = curved_scenario().compatibility()
    assert rep.derivation_residual < 1e-7
    assert rep.curvature_residual < 1e-7
    assert rep.passed


def test_gate_trips_on_non_derivation_connection():
    bad = np.zeros((3, 3))
    bad[0, 0] = 1.0
    gamma = poly_form(2, 1, (3, 3), {(0,): [(bad, np.array([0, 0]))]},
                      target="endomorphism")
    s = GaugeScenario(CHART, SU2, LabConnection.from_gamma(SU2, gamma),
                      zero_form(2, 2, "algebra", (3,)), zero_form(2, 1, "algebra", (3,)))
    with pytest.raises(CompatibilityGateError, match="derivation residual"):
        local_field_strength(s)


def test_gate_report_shared_across_field_change():
    s = curved_scenario()
    first = s.compatibility()
    s2 = s.with_gauge_field(zero_form(2, 1, "algebra", (3,)))
    assert s2.compatibility() is first


# ---------------------------------------------------------------------------
# local field strength
# ---------------------------------------------------------------------------

def test_field_strength_frozen_value():
    # F(d0, d1) = -0.5 e1 + (0.3 - 0.5 x0 x1) e2 + (1 + 0.15 x0 x1) e3
    f = local_field_strength(curved_scenario())
    x = np.array([0.7, -0.4])
    assert np.allclose(f.components(x, (0, 1)), [-0.5, 0.44, 0.958], atol=1e-12)


def test_field_strength_of_vanishing_gauge_field_is_central_form():
    s = curved_scenario().with_gauge_field(zero_form(2, 1, "algebra", (3,)))
    f = local_field_strength(s)
    rng = np.random.default_rng(4)
    for _ in range(5):
        x = rng.uniform(-0.9, 0.9, size=2)
        assert np.allclose(f.components(x, (0, 1)), s.zeta.components(x, (0, 1)),
                           atol=1e-15)


def test_field_strength_flat_chart_frozen_example():
    # omega = 0, zeta = 0, A = x0 dx1 . e1 + x1 dx0 . e2:
    # F(d0, d1) = e1 - e2 - x0 x1 e3
    a = poly_form(2, 1, (3,), {(1,): [(E1, np.array([1, 0]))],
                               (0,): [(E2, np.array([0, 1]))]})
    s = GaugeScenario(CHART, SU2,
                      LabConnection.from_omega(SU2, zero_form(2, 1, "algebra", (3,))),
                      zero_form(2, 2, "algebra", (3,)), a)
    f = local_field_strength(s)
    x = np.array([0.7, -0.4])
    assert np.allclose(f.components(x, (0, 1)), [1.0, -1.0, 0.28], atol=1e-12)


def test_abelian_field_strength_is_plain_curl():
    s = abelian_scenario(c=0.7)  # A = 0.7 x1 dx0
    f = local_field_strength(s)
    x = np.array([0.2, -0.6])
    assert np.allclose(f.components(x, (0, 1)), [-0.7], atol=1e-13)


# ---------------------------------------------------------------------------
# change of gauge
# ---------------------------------------------------------------------------

def test_change_of_gauge_identity_section_is_identity():
    s = curved_scenario()
    res = change_of_gauge(s, GSection.identity(SU2), SamplePlan(count=6, seed=1))
    x = np.array([0.3, 0.5])
    for k in (0, 1):
        assert np.array_equal(res.a_new.components(x, (k,)),
                              s.gauge_field.components(x, (k,)))
    assert res.f_residual < 1e-12


def test_change_of_gauge_transforms_field_strength():
    s = curved_scenario()
    sigma = GSection.from_exp_coeffs(
        SU2, lambda y: np.array([0.4 * y[1], 0.2 * y[0] * y[1], -0.3 * y[0]]),
        name="generic")
    res = change_of_gauge(s, sigma, SamplePlan(count=8, seed=5))
    assert res.f_residual < 1e-6
    assert res.points_used == 8


def test_change_of_gauge_abelian_adds_gradient():
    s = abelian_scenario()
    sigma = GSection.from_exp_coeffs(U1, lambda y: np.array([0.4 * y[0] ** 2 - 0.3 * y[1]]),
                                     name="phase")
    plan = SamplePlan(count=5, seed=2)
    res = change_of_gauge(s, sigma, plan)
    assert res.f_residual < 1e-6
    for x in plan.points(s.chart):
        grad = (0.8 * x[0], -0.3)
        for k in (0, 1):
            want = s.gauge_field.components(x, (k,))[0] + grad[k]
            assert abs(res.a_new.components(x, (k,))[0] - want) < 1e-10


# ---------------------------------------------------------------------------
# infinitesimal gauge transformations
# ---------------------------------------------------------------------------

def test_infinitesimal_generator_degree_validated():
    with pytest.raises(ValueError, match="0-form"):
        infinitesimal_gauge(curved_scenario(), zero_form(2, 1, "algebra", (3,)))


def test_infinitesimal_frozen_value():
    # omega = 0, zeta = 0, A = dx0 . e1, eps = e3:
    # delta A(d0) = -[e3, e1] = -e2, delta F = 0.
    a = poly_form(2, 1, (3,), {(0,): [(E1, np.array([0, 0]))]})
    s = GaugeScenario(CHART, SU2,
                      LabConnection.from_omega(SU2, zero_form(2, 1, "algebra", (3,))),
                      zero_form(2, 2, "algebra", (3,)), a)
    eps = poly_form(2, 0, (3,), {(): [(E3, np.array([0, 0]))]})
    da, df = infinitesimal_gauge(s, eps)
    x = np.array([0.1, 0.9])
    assert np.allclose(da.components(x, (0,)), [0.0, -1.0, 0.0], atol=1e-14)
    assert np.allclose(da.components(x, (1,)), 0.0, atol=1e-14)
    assert np.allclose(df.components(x, (0, 1)), 0.0, atol=1e-14)


def test_infinitesimal_abelian_is_gradient_of_generator():
    s = abelian_scenario()
    eps = poly_form(2, 0, (1,), {(): [(np.array([1.0]), np.array([2, 0]))]})  # x0^2
    da, df = infinitesimal_gauge(s, eps)
    x = np.array([0.4, -0.2])
    assert np.allclose(da.components(x, (0,)), [0.8], atol=1e-13)
    assert np.allclose(da.components(x, (1,)), [0.0], atol=1e-13)
    assert np.allclose(df.components(x, (0, 1)), 0.0, atol=1e-13)


def test_infinitesimal_matches_finite_law():
    s = curved_scenario()
    eps = poly_form(2, 0, (3,), {(): [(E3, np.array([1, 0]))]})  # x0 e3
    da, _ = infinitesimal_gauge(s, eps, check_points=[np.array([0.2, 0.1])])
    # delta A(d0) = e3 - 0.5 x0 x1 e2 at the checked point
    assert np.allclose(da.components(np.array([0.2, 0.1]), (0,)),
                       [0.0, -0.01, 1.0], atol=1e-12)


def test_infinitesimal_cross_check_trips_on_tiny_tolerance():
    s = curved_scenario()
    eps = poly_form(2, 0, (3,), {(): [(E3, np.array([1, 0]))]})
    with pytest.raises(InconsistencyError, match="linearized gauge law"):
        infinitesimal_gauge(s, eps, check_points=[np.array([0.2, 0.1])], tol=1e-18)


# ---------------------------------------------------------------------------
# Bianchi identity
# ---------------------------------------------------------------------------

def bianchi_scenario(wrap=False):
    omega = poly_form(3, 1, (3,), {(1,): [(E3, np.array([1, 0, 0]))]})
    zeta = potential_curvature(SU2, omega)
    a = poly_form(3, 1, (3,), {(0,): [(0.5 * E1, np.array([0, 1, 0]))],
                               (2,): [(0.3 * E2, np.array([1, 0, 0]))]})
    if wrap:  # hide the polynomial payload so every derivative is a stencil
        hide = lambda f: LieForm(n=3, degree=f.degree, value_target="algebra",
                                 value_shape=(3,),
                                 components=lambda x, idx, ff=f: ff.components(x, idx),
                                 fd_step=1e-4)
        omega, zeta, a = hide(omega), hide(zeta), hide(a)
    return GaugeScenario(euclidean_chart(3, half=1.0), SU2,
                         LabConnection.from_omega(SU2, omega), zeta, a)


def test_bianchi_identity_polynomial_route_is_exact():
    assert bianchi_residual(bianchi_scenario(), SamplePlan(count=6, seed=3)) == 0.0


def test_bianchi_identity_stencil_route():
    assert bianchi_residual(bianchi_scenario(wrap=True),
                            SamplePlan(count=6, seed=3)) < 1e-10


# ---------------------------------------------------------------------------
# Lagrangian density
# ---------------------------------------------------------------------------

def test_density_vanishes_without_field():
    s = GaugeScenario(CHART, SU2,
                      LabConnection.from_omega(SU2, zero_form(2, 1, "algebra", (3,))),
                      zero_form(2, 2, "algebra", (3,)), zero_form(2, 1, "algebra", (3,)))
    dens = lagrangian_density(s)
    assert dens(np.array([0.3, -0.8])) == 0.0


def test_density_abelian_frozen_value():
    # F = 0.8 dx0 ^ dx1: density -c^2/2 = -0.32 on the euclidean chart
    a = poly_form(2, 1, (1,), {(1,): [(np.array([0.8]), np.array([1, 0]))]})
    s = GaugeScenario(CHART, U1,
                      LabConnection.from_omega(U1, zero_form(2, 1, "algebra", (1,))),
                      zero_form(2, 2, "algebra", (1,)), a)
    dens = lagrangian_density(s)
    assert abs(dens(np.array([0.5, 0.5])) - (-0.32)) < 1e-13
    assert abs(dens(np.array([-0.2, 0.9])) - (-0.32)) < 1e-13


def test_density_minkowski_sign_flip():
    # the same F with one index along the timelike axis changes sign
    a4 = poly_form(4, 1, (1,), {(1,): [(np.array([0.8]), np.array([1, 0, 0, 0]))]})
    z4 = zero_form(4, 2, "algebra", (1,))
    nab = LabConnection.from_omega(U1, zero_form(4, 1, "algebra", (1,)))
    dens_m = lagrangian_density(GaugeScenario(minkowski_chart(1.0), U1, nab, z4, a4))
    dens_e = lagrangian_density(GaugeScenario(euclidean_chart(4, 1.0), U1, nab, z4, a4))
    x = np.array([0.3, -0.2, 0.5, 0.1])
    assert abs(dens_m(x) - 0.32) < 1e-13
    assert abs(dens_e(x) + 0.32) < 1e-13


# ---------------------------------------------------------------------------
# invariance residuals
# ---------------------------------------------------------------------------

def test_density_gauge_invariance():
    sigma = GSection.from_exp_coeffs(
        SU2, lambda y: np.array([0.4 * y[1], 0.2 * y[0] * y[1], -0.3 * y[0]]),
        name="generic")
    resid = density_gauge_invariance_residual(curved_scenario(), sigma,
                                              SamplePlan(count=6, seed=6))
    assert resid < 1e-6


def test_density_infinitesimal_invariance():
    eps = poly_form(2, 0, (3,), {(): [(E3, np.array([1, 0]))]})
    resid = density_infinitesimal_residual(curved_scenario(), eps,
                                           SamplePlan(count=6, seed=7))
    assert resid < 1e-5


def test_field_redef_leaves_field_strength_alone():
    lam = poly_form(2, 1, (3,), {(0,): [(0.2 * E2, np.array([1, 0]))],
                                 (1,): [(0.1 * E1, np.array([0, 1]))]})
    resid = field_redef_invariance_residual(curved_scenario(), lam,
                                            SamplePlan(count=6, seed=8))
    assert resid < 1e-12


def test_self_duality_residual_values():
    def pair_form(sign):
        def comp(x, idx):
            if tuple(idx) == (0, 1):
                return np.array([0.7])
            if tuple(idx) == (2, 3):
                return np.array([0.7 * sign])
            return np.zeros(1)
        return LieForm(n=4, degree=2, value_target="algebra", value_shape=(1,),
                       components=comp, fd_step=1e-5)

    chart = euclidean_chart(4, 1.0)
    plan = SamplePlan(count=4, seed=1)
    assert self_duality_residual(pair_form(+1), chart, plan) == 0.0
    assert abs(self_duality_residual(pair_form(-1), chart, plan) - 1.4) < 1e-14


# ---------------------------------------------------------------------------
# topological charge
# ---------------------------------------------------------------------------

def test_charge_requires_four_dimensions():
    with pytest.raises(ValueError, match="four-dimensional"):
        instanton_charge(curved_scenario())


def test_charge_vanishes_without_field():
    s = GaugeScenario(euclidean_chart(4, 1.0), SU2,
                      LabConnection.from_omega(SU2, zero_form(4, 1, "algebra", (3,))),
                      zero_form(4, 2, "algebra", (3,)), zero_form(4, 1, "algebra", (3,)))
    q = instanton_charge(s, radius=3.0, order=6)
    assert q.total == 0.0


def test_charge_vanishes_for_single_component_field():
    # kappa(F ^, F) pairs complementary index blocks, all zero here
    def comp(x, idx):
        if tuple(idx) == (0, 1):
            return np.array([np.exp(-float(x @ x))])
        return np.zeros(1)
    zeta = LieForm(n=4, degree=2, value_target="algebra", value_shape=(1,),
                   components=comp, fd_step=1e-5)
    s = GaugeScenario(euclidean_chart(4, 5.0), U1,
                      LabConnection.from_omega(U1, zero_form(4, 1, "algebra", (1,))),
                      zeta, zero_form(4, 1, "algebra", (1,)), gate_tol=1e9)
    q = instanton_charge(s, radius=5.0, order=8)
    assert q.total == 0.0


def test_charge_warns_when_integrand_does_not_decay():
    def comp(x, idx):
        if tuple(idx) in ((0, 1), (2, 3)):
            return float(x @ x) ** 2 * E1
        return np.zeros(3)
    grow = LieForm(n=4, degree=2, value_target="algebra", value_shape=(3,),
                   components=comp, fd_step=1e-3)
    s = GaugeScenario(euclidean_chart(4, 1.0), SU2,
                      LabConnection.from_omega(SU2, zero_form(4, 1, "algebra", (3,))),
                      grow, zero_form(4, 1, "algebra", (3,)), gate_tol=1e9)
    with pytest.warns(UserWarning, match="decay"):
        instanton_charge(s, radius=20.0, order=4)


def test_charge_result_totals():
    q = ChargeResult(box_value=0.75, tail=0.25, radius=20.0, order=24)
    assert q.total == 1.0
