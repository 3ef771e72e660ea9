"""Connections on the algebra bundle: covariant exterior calculus,
curvature, infinitesimal compatibility checks, and field redefinitions.

The connection is stored as an endomorphism-valued 1-form Gamma (so that
deliberately broken inputs can be expressed for negative tests); when Gamma
is the adjoint of an algebra-valued potential omega, the potential is kept
alongside and the curvature operation cross-checks R = ad(curvature of omega).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import LieAlgebraDescriptor, ad_matrix_c
from .forms import (Chart, LieForm, PolyData, SamplePlan, add_forms,
                    bracket_pairing, endo_action_pairing, endo_compose_pairing,
                    exterior_derivative, form_from_poly, graded_product,
                    increasing_indices, scale_form)

__all__ = [
    "LabConnection", "CurvatureResult", "CompatibilityReport",
    "FieldRedefinition", "ad_mapped_form", "cov_ext_deriv", "curvature",
    "potential_curvature", "check_compatibility", "field_redefine",
    "conjugation_residual",
]


def ad_mapped_form(alg: LieAlgebraDescriptor, omega: LieForm) -> LieForm:
    """Push an algebra-valued form through ad: components become matrices.

    ad is linear in the coefficients, so polynomial payloads and analytic
    derivatives survive exactly.
    """
    if omega.value_target != "algebra":
        raise ValueError("ad_mapped_form expects an algebra-valued form")
    d = alg.dim
    if omega.poly is not None:
        terms = {idx: [(ad_matrix_c(alg, c), e) for c, e in lst]
                 for idx, lst in omega.poly.terms.items()}
        return form_from_poly(omega.n, omega.degree, "endomorphism", (d, d),
                              PolyData(omega.n, omega.degree, (d, d), terms),
                              box=omega.box, fd_step=omega.fd_step)
    comp = lambda x, idx: ad_matrix_c(alg, omega.components(x, idx))
    dcomp = None
    if omega.analytic_d is not None:
        dcomp = lambda x, idx: ad_matrix_c(alg, omega.analytic_d(x, idx))
    return LieForm(n=omega.n, degree=omega.degree, value_target="endomorphism",
                   value_shape=(d, d), components=comp, analytic_d=dcomp,
                   fd_step=omega.fd_step, box=omega.box)


@dataclass
class LabConnection:
    """del = d + Gamma on sections of the algebra bundle."""

    algebra: LieAlgebraDescriptor
    gamma: LieForm
    omega: LieForm = None   # optional generating potential with Gamma = ad(omega)

    def __post_init__(self):
        if self.gamma.degree != 1 or self.gamma.value_target != "endomorphism":
            raise ValueError("gamma must be an endomorphism-valued 1-form")
        if self.omega is not None and self.omega.degree != 1:
            raise ValueError("omega must be a 1-form")

    @classmethod
    def from_omega(cls, alg: LieAlgebraDescriptor, omega: LieForm) -> "LabConnection":
        return cls(algebra=alg, gamma=ad_mapped_form(alg, omega), omega=omega)

    @classmethod
    def from_gamma(cls, alg: LieAlgebraDescriptor, gamma: LieForm) -> "LabConnection":
        return cls(algebra=alg, gamma=gamma)


def cov_ext_deriv(nabla: LabConnection, alpha: LieForm) -> LieForm:
    """Covariant exterior derivative d alpha + Gamma ^ alpha (algebra-valued alpha)."""
    if alpha.value_target != "algebra":
        raise ValueError("covariant exterior derivative implemented for "
                         "algebra-valued forms")
    return add_forms(exterior_derivative(alpha),
                     graded_product(endo_action_pairing(nabla.algebra),
                                    nabla.gamma, alpha))


@dataclass
class CurvatureResult:
    endo: LieForm                 # R = d Gamma + Gamma ^ Gamma
    potential: LieForm = None     # F_omega = d omega + (1/2)[omega ^, omega]

    def crosscheck(self, chart: Chart, plan: SamplePlan, alg: LieAlgebraDescriptor) -> float:
        """Max |R - ad(F_omega)| over the plan's points (0 when no potential)."""
        if self.potential is None:
            return 0.0
        worst = 0.0
        ad_f = ad_mapped_form(alg, self.potential)
        for x in plan.points(chart):
            for idx in increasing_indices(self.endo.n, 2):
                worst = max(worst, np.abs(self.endo.components(x, idx)
                                          - ad_f.components(x, idx)).max())
        return worst


def curvature(nabla: LabConnection) -> CurvatureResult:
    """R = d Gamma + Gamma ^ Gamma; carries the potential curvature when known."""
    gg = graded_product(endo_compose_pairing(nabla.algebra), nabla.gamma, nabla.gamma)
    r = add_forms(exterior_derivative(nabla.gamma), gg)
    pot = None
    if nabla.omega is not None:
        pot = potential_curvature(nabla.algebra, nabla.omega)
    return CurvatureResult(endo=r, potential=pot)


def potential_curvature(alg: LieAlgebraDescriptor, omega: LieForm) -> LieForm:
    """F = d omega + (1/2)[omega ^, omega]."""
    sq = scale_form(graded_product(bracket_pairing(alg), omega, omega), 0.5)
    return add_forms(exterior_derivative(omega), sq)


@dataclass
class CompatibilityReport:
    """Residuals of the two infinitesimal compatibility laws."""

    derivation_residual: float
    curvature_residual: float
    points_used: int
    plan: SamplePlan

    @property
    def passed(self) -> bool:  # default gate used by the Lagrangian layer
        return self.derivation_residual < 1e-7 and self.curvature_residual < 1e-7


def check_compatibility(nabla: LabConnection, zeta: LieForm, chart: Chart,
                        plan: SamplePlan) -> CompatibilityReport:
    """Evaluate both compatibility conditions on the plan's points.

    Derivation law: Gamma(X) must act as a derivation of the bracket,
    equivalently del[mu,nu] = [del mu,nu] + [mu,del nu] for all sections
    (the exterior-derivative parts cancel by bilinearity, so constant basis
    sections decide it pointwise). Curvature law: R(X,Y) = ad(zeta(X,Y)).
    """
    alg = nabla.algebra
    c = alg.structure_constants
    r = curvature(nabla)
    worst_der = 0.0
    worst_curv = 0.0
    for x in plan.points(chart):
        for k in range(chart.dim):
            g = nabla.gamma.components(x, (k,))
            lhs = np.einsum('abm,km->abk', c, g)
            rhs = np.einsum('ma,mbk->abk', g, c) + np.einsum('mb,amk->abk', g, c)
            worst_der = max(worst_der, np.abs(lhs - rhs).max())
        for idx in increasing_indices(chart.dim, 2):
            rr = r.endo.components(x, idx)
            zz = ad_matrix_c(alg, zeta.components(x, idx))
            worst_curv = max(worst_curv, np.abs(rr - zz).max())
    return CompatibilityReport(derivation_residual=float(worst_der),
                               curvature_residual=float(worst_curv),
                               points_used=plan.count, plan=plan)


@dataclass
class FieldRedefinition:
    nabla: LabConnection
    zeta: LieForm
    gauge_field: LieForm


def field_redefine(nabla: LabConnection, zeta: LieForm, gauge_field: LieForm,
                   lam: LieForm) -> FieldRedefinition:
    """Shift the splitting by a 1-form lambda.

    gauge field -> A + lambda, connection -> del - ad(lambda),
    zeta -> zeta - del lambda + (1/2)[lambda ^, lambda].
    """
    alg = nabla.algebra
    if lam.degree != 1 or lam.value_target != "algebra":
        raise ValueError("lambda must be an algebra-valued 1-form")
    new_a = add_forms(gauge_field, lam)
    new_gamma = add_forms(nabla.gamma, ad_mapped_form(alg, lam), 1.0, -1.0)
    new_omega = None
    if nabla.omega is not None:
        new_omega = add_forms(nabla.omega, lam, 1.0, -1.0)
    new_nabla = LabConnection(algebra=alg, gamma=new_gamma, omega=new_omega)
    dlam = cov_ext_deriv(nabla, lam)
    sq = scale_form(graded_product(bracket_pairing(alg), lam, lam), 0.5)
    new_zeta = add_forms(add_forms(zeta, dlam, 1.0, -1.0), sq)
    return FieldRedefinition(nabla=new_nabla, zeta=new_zeta, gauge_field=new_a)


def conjugation_residual(nabla: LabConnection, chart: Chart, plan: SamplePlan,
                         section, darboux_form: LieForm, h: float = None) -> float:
    """Residual of Ad_{b^{-1}} . del . Ad_b = del + ad(Delta b) on basis sections.

    `section` maps x to the Ad matrix of b(x) on coefficients; `darboux_form`
    is the group-valued logarithmic derivative of b. The left side's x-derivative
    of Ad_b is taken by central differences with step h.
    """
    alg = nabla.algebra
    h = h or chart.default_step()
    worst = 0.0
    for x in plan.points(chart):
        ad_b = section(x)
        ad_b_inv = np.linalg.inv(ad_b)
        for k in range(chart.dim):
            step = np.zeros(chart.dim)
            step[k] = h
            d_ad = (section(x + step) - section(x - step)) / (2 * h)
            g = nabla.gamma.components(x, (k,))
            lhs = ad_b_inv @ (d_ad + g @ ad_b)
            rhs = g + ad_matrix_c(alg, darboux_form.components(x, (k,)))
            worst = max(worst, np.abs(lhs - rhs).max())
    return float(worst)
