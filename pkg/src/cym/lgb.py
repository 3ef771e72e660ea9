"""Trivialized group bundles over a chart: total Maurer-Cartan form,
group-valued logarithmic derivatives of sections, the induced fibre
connection, and the curvature identity on the total space.

Fibre tangent vectors are kept in body coordinates throughout: the velocity
of a curve through g is recorded as g^{-1} (d/dt) g, expanded in the algebra
basis. Sections differentiate by finite differences on their matrix entries;
the result is projected back onto the algebra span and the out-of-span drift
is watched, so a section wandering off the group variety raises rather than
silently corrupting downstream residuals.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .algebra import (GroupElement, LieAlgebraDescriptor, ReexpansionError,
                      ad_matrix_c, expand_in_rep)
from .connection import LabConnection, cov_ext_deriv
from .forms import (Chart, LieForm, SamplePlan, bracket_pairing,
                    exterior_derivative, graded_product, increasing_indices,
                    scale_form)

__all__ = [
    "TotalPoint", "TotalTangent", "TrivLgb", "GSection", "dexp_body",
    "InconsistencyError",
    "group_sample", "darboux", "darboux_leibniz_residual",
    "darboux_inverse_residual", "nabla_from_darboux",
    "multiplicativity_residual", "generalized_mc_residual",
    "pullback_mc_residual",
]

DRIFT_TOL = 1e-9


class InconsistencyError(RuntimeError):
    """Two routes to the same quantity disagree beyond tolerance —
    usually a sign-convention mismatch in caller-supplied data."""


@dataclass
class TotalPoint:
    x: np.ndarray
    g: GroupElement


@dataclass
class TotalTangent:
    """Base direction X plus fibre velocity in body coordinates."""

    X: np.ndarray
    eta: np.ndarray


def dexp_body(alg: LieAlgebraDescriptor, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Body velocity of s -> exp(v + s w) at s = 0.

    exp(-v) d/ds exp(v + s w) = sum_k (-ad_v)^k w / (k+1)!.
    """
    adv = ad_matrix_c(alg, v)
    term = np.asarray(w, dtype=float)
    out = term.copy()
    for k in range(1, 40):
        term = -(adv @ term) / (k + 1)
        out += term
        if np.abs(term).max() < 1e-18:
            break
    return out


def group_sample(alg: LieAlgebraDescriptor, rng: np.random.Generator,
                 scale: float = 1.0) -> GroupElement:
    return GroupElement(alg, expm(alg.rep_of(rng.normal(scale=scale, size=alg.dim))))


# ---------------------------------------------------------------------------
# sections
# ---------------------------------------------------------------------------

class GSection:
    """A group-valued section b: chart -> G, differentiated on matrix entries."""

    def __init__(self, alg: LieAlgebraDescriptor, fn, name: str = ""):
        self.algebra = alg
        self.fn = fn
        self.name = name

    def __call__(self, x) -> GroupElement:
        return self.fn(np.asarray(x, dtype=float))

    @classmethod
    def identity(cls, alg: LieAlgebraDescriptor) -> "GSection":
        eye = alg.group_identity()
        return cls(alg, lambda x: eye, name="id")

    @classmethod
    def constant(cls, g: GroupElement, name: str = "const") -> "GSection":
        return cls(g.algebra, lambda x: g, name=name)

    @classmethod
    def from_exp_coeffs(cls, alg: LieAlgebraDescriptor, coeff_fn,
                        name: str = "exp") -> "GSection":
        """b(x) = exp of the algebra element with coefficients coeff_fn(x)."""
        def fn(x):
            return GroupElement(alg, expm(alg.rep_of(coeff_fn(x))))
        return cls(alg, fn, name=name)

    def product(self, other: "GSection") -> "GSection":
        if other.algebra is not self.algebra:
            raise ValueError("sections live in different algebras")
        return GSection(self.algebra, lambda x: self.fn(x) @ other.fn(x),
                        name=f"{self.name}*{other.name}")

    def inverse(self) -> "GSection":
        return GSection(self.algebra, lambda x: self.fn(x).inverse(),
                        name=f"{self.name}^-1")

    def body_derivative(self, x, axis: int, h: float) -> np.ndarray:
        """b(x)^{-1} d_axis b(x) by a central matrix-entry stencil, re-expanded
        in the basis. Raises when the out-of-span drift exceeds the watchdog."""
        x = np.asarray(x, dtype=float)
        step = np.zeros_like(x)
        step[axis] = h
        db = (self.fn(x + step).matrix - self.fn(x - step).matrix) / (2 * h)
        body = self.fn(x).matrix.conj().T @ db
        coeffs, resid = expand_in_rep(self.algebra, body)
        if resid > DRIFT_TOL * max(1.0, float(np.linalg.norm(coeffs))):
            raise ReexpansionError(
                f"section {self.name!r} drifted off the variety at axis {axis}: "
                f"residual {resid:.3e}")
        return coeffs


# ---------------------------------------------------------------------------
# the bundle
# ---------------------------------------------------------------------------

@dataclass
class TrivLgb:
    """Group bundle in a trivialized chart, with horizontal data omega."""

    chart: Chart
    algebra: LieAlgebraDescriptor
    omega: LieForm

    def __post_init__(self):
        if self.omega.degree != 1 or self.omega.value_target != "algebra":
            raise ValueError("omega must be an algebra-valued 1-form")
        self._nabla = None

    @property
    def nabla(self) -> LabConnection:
        if self._nabla is None:
            self._nabla = LabConnection.from_omega(self.algebra, self.omega)
        return self._nabla

    def omega_vec(self, x, X) -> np.ndarray:
        """omega_x(X) as coefficient vector."""
        acc = np.zeros(self.algebra.dim)
        for k in range(self.chart.dim):
            if X[k] != 0.0:
                acc += X[k] * self.omega.components(x, (k,))
        return acc

    def mu_tot(self, p: TotalPoint, t: TotalTangent) -> np.ndarray:
        """eta + (Ad_{g^{-1}} - id)(omega_x(X)) in body coordinates."""
        from .algebra import ad_matrix_of_group
        if not self.chart.contains(p.x):
            raise ValueError(f"point {p.x} is outside the chart box")
        ad_inv = ad_matrix_of_group(self.algebra, p.g.matrix.conj().T)
        w = self.omega_vec(p.x, t.X)
        return t.eta + (ad_inv @ w - w)


# ---------------------------------------------------------------------------
# group-valued logarithmic derivative and the induced connection
# ---------------------------------------------------------------------------

def darboux(lgb: TrivLgb, section: GSection, h: float = None) -> LieForm:
    """Logarithmic derivative of a section relative to the horizontal data:
    components b^{-1} d_k b + (Ad_{b^{-1}} - id)(omega_k).

    The output is finite-difference data; downstream exterior derivatives use
    a wider step (nested stencil)."""
    from .algebra import ad_matrix_of_group
    alg = lgb.algebra
    h = h or lgb.chart.default_step()

    def comp(x, idx):
        k = idx[0]
        body = section.body_derivative(x, k, h)
        ad_inv = ad_matrix_of_group(alg, section(x).matrix.conj().T)
        w = lgb.omega.components(x, (k,))
        return body + (ad_inv @ w - w)

    return LieForm(n=lgb.chart.dim, degree=1, value_target="algebra",
                   value_shape=(alg.dim,), components=comp,
                   fd_step=10 * lgb.chart.default_step(), box=lgb.chart.box)


def darboux_leibniz_residual(lgb: TrivLgb, s1: GSection, s2: GSection,
                             plan: SamplePlan) -> float:
    """max |Delta(s1 s2) - Ad_{s2^{-1}} Delta(s1) - Delta(s2)| over the plan."""
    from .algebra import ad_matrix_of_group
    d1 = darboux(lgb, s1)
    d2 = darboux(lgb, s2)
    d12 = darboux(lgb, s1.product(s2))
    worst = 0.0
    for x in plan.points(lgb.chart):
        ad_inv = ad_matrix_of_group(lgb.algebra, s2(x).matrix.conj().T)
        for k in range(lgb.chart.dim):
            lhs = d12.components(x, (k,))
            rhs = ad_inv @ d1.components(x, (k,)) + d2.components(x, (k,))
            worst = max(worst, np.abs(lhs - rhs).max())
    return worst


def darboux_inverse_residual(lgb: TrivLgb, s: GSection, plan: SamplePlan) -> float:
    """max |Delta(s^{-1}) + Ad_s Delta(s)| over the plan."""
    from .algebra import ad_matrix_of_group
    d = darboux(lgb, s)
    dinv = darboux(lgb, s.inverse())
    worst = 0.0
    for x in plan.points(lgb.chart):
        ad_s = ad_matrix_of_group(lgb.algebra, s(x).matrix)
        for k in range(lgb.chart.dim):
            lhs = dinv.components(x, (k,)) + ad_s @ d.components(x, (k,))
            worst = max(worst, np.abs(lhs).max())
    return worst


def nabla_from_darboux(lgb: TrivLgb, nu: LieForm, x, direction: int,
                       t_step: float = 1e-5, tol: float = 1e-6) -> np.ndarray:
    """Derivative of the family t -> Delta(exp(t nu)) at t = 0 along one axis.

    The result is gated against the closed form d nu(X) + [omega(X), nu]
    (the induced fibre connection); disagreement beyond `tol` raises, since
    it indicates inconsistent sign conventions in the inputs.
    """
    from .algebra import bracket_c
    alg = lgb.algebra
    x = np.asarray(x, dtype=float)

    def section_at(t):
        return GSection.from_exp_coeffs(
            alg, lambda y: t * nu.components(y, ()), name=f"exp({t}nu)")

    plus = darboux(lgb, section_at(t_step)).components(x, (direction,))
    minus = darboux(lgb, section_at(-t_step)).components(x, (direction,))
    got = (plus - minus) / (2 * t_step)

    closed = exterior_derivative(nu).components(x, (direction,)) + bracket_c(
        alg, lgb.omega.components(x, (direction,)), nu.components(x, ()))
    gap = float(np.abs(got - closed).max())
    if gap > tol:
        raise InconsistencyError(
            f"fibre-connection routes disagree by {gap:.3e} (tol {tol:.1e})")
    return got


# ---------------------------------------------------------------------------
# multiplicativity and the curvature identity on the total space
# ---------------------------------------------------------------------------

def multiplicativity_residual(lgb: TrivLgb, plan: SamplePlan,
                              perturbation: LieForm = None,
                              group_scale: float = 1.0) -> float:
    """Deviation of the total 1-form from the multiplication-compatibility law.

    For (g, q) over the same point and matched tangents, the pulled-back form
    along fibrewise multiplication must equal Ad_{q^{-1}} of the first slot
    plus the second slot. `perturbation` deforms the horizontal slot of the
    form g-dependently, which any nonzero choice must break (the negative
    control for the law).
    """
    from .algebra import ad_matrix_of_group
    alg = lgb.algebra
    rng = plan.rng()

    def mu(x, g: GroupElement, X, eta):
        ad_inv = ad_matrix_of_group(alg, g.matrix.conj().T)
        w = lgb.omega_vec(x, X)
        if perturbation is not None:
            rho = np.zeros(alg.dim)
            for k in range(lgb.chart.dim):
                if X[k] != 0.0:
                    rho += X[k] * perturbation.components(x, (k,))
            w = w + ad_inv @ rho
        return eta + (ad_inv @ w - w)

    worst = 0.0
    for x in plan.points(lgb.chart):
        g = group_sample(alg, rng, group_scale)
        q = group_sample(alg, rng, group_scale)
        ad_q_inv = ad_matrix_of_group(alg, q.matrix.conj().T)
        for _ in range(plan.tangent_probes):
            X = rng.normal(size=lgb.chart.dim)
            eta = rng.normal(size=alg.dim)
            theta = rng.normal(size=alg.dim)
            lhs = mu(x, g @ q, X, ad_q_inv @ eta + theta)
            rhs = ad_q_inv @ mu(x, g, X, eta) + mu(x, q, X, theta)
            worst = max(worst, np.abs(lhs - rhs).max())
    return worst


def _total_mu_form(lgb: TrivLgb, x0: np.ndarray, g0: GroupElement) -> LieForm:
    """The total 1-form in product coordinates (u, v) centred at (x0, g0):
    the point parametrized by (u, v) is (x0 + u, g0 exp(v))."""
    from .algebra import ad_matrix_of_group
    alg = lgb.algebra
    n = lgb.chart.dim
    d = alg.dim
    g0m = g0.matrix

    def comp(uv, idx):
        i = idx[0]
        v = uv[n:]
        if i >= n:
            return dexp_body(alg, v, np.eye(d)[i - n])
        x = x0 + uv[:n]
        gm = g0m @ expm(alg.rep_of(v))
        ad_inv = ad_matrix_of_group(alg, gm.conj().T)
        w = lgb.omega.components(x, (i,))
        return ad_inv @ w - w

    return LieForm(n=n + d, degree=1, value_target="algebra", value_shape=(d,),
                   components=comp, fd_step=1e-5)


def generalized_mc_residual(lgb: TrivLgb, zeta: LieForm, plan: SamplePlan,
                            group_scale: float = 1.0) -> float:
    """Residual of the curvature identity for the total 1-form.

    In product coordinates the covariant differential (with the base
    connection pulled back, fibre directions acting trivially) plus the
    half-bracket square must reproduce (Ad_{g^{-1}} - id) of zeta on base
    pairs and vanish on mixed/fibre pairs.
    """
    from .algebra import ad_matrix_of_group
    alg = lgb.algebra
    n = lgb.chart.dim
    d = alg.dim
    rng = plan.rng()

    def gamma_comp(x0):
        def comp(uv, idx):
            i = idx[0]
            if i >= n:
                return np.zeros((d, d))
            return ad_matrix_c(alg, lgb.omega.components(x0 + uv[:n], (i,)))
        return comp

    worst = 0.0
    for x0 in plan.points(lgb.chart):
        g0 = group_sample(alg, rng, group_scale)
        mu = _total_mu_form(lgb, x0, g0)
        gam = LieForm(n=n + d, degree=1, value_target="endomorphism",
                      value_shape=(d, d), components=gamma_comp(x0), fd_step=1e-5)
        from .forms import add_forms, endo_action_pairing
        two_form = add_forms(
            add_forms(exterior_derivative(mu),
                      graded_product(endo_action_pairing(alg), gam, mu)),
            scale_form(graded_product(bracket_pairing(alg), mu, mu), 0.5))
        ad_inv = ad_matrix_of_group(alg, g0.matrix.conj().T)
        origin = np.zeros(n + d)
        for (i, j) in increasing_indices(n + d, 2):
            lhs = two_form.components(origin, (i, j))
            if j < n:
                z = zeta.components(x0, (i, j))
                lhs = lhs - (ad_inv @ z - z)
            worst = max(worst, np.abs(lhs).max())
    return worst


def pullback_mc_residual(lgb: TrivLgb, section: GSection, zeta: LieForm,
                         plan: SamplePlan) -> float:
    """Residual of the pulled-back curvature identity along one section:
    del(Delta s) + (1/2)[Delta s ^, Delta s] + zeta - Ad_{s^{-1}} zeta = 0."""
    from .algebra import ad_matrix_of_group
    alg = lgb.algebra
    ds = darboux(lgb, section)
    lhs = cov_ext_deriv(lgb.nabla, ds)
    sq = scale_form(graded_product(bracket_pairing(alg), ds, ds), 0.5)
    worst = 0.0
    for x in plan.points(lgb.chart):
        ad_inv = ad_matrix_of_group(alg, section(x).matrix.conj().T)
        for idx in increasing_indices(lgb.chart.dim, 2):
            z = zeta.components(x, idx)
            val = lhs.components(x, idx) + sq.components(x, idx) + z - ad_inv @ z
            worst = max(worst, np.abs(val).max())
    return worst
