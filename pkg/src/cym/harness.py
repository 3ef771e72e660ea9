"""Built-in verification scenarios, scenario-file ingestion, the named suite
registry, and deterministic report emission.

A scenario bundles everything the residual suites consume: the chart, the
algebra, the group bundle with its horizontal potential, the principal-side
wrapper with a gauge field, a compatible central 2-form, named group-valued
sections and bundle automorphisms, a splitting shift and an infinitesimal
generator, plus sampling and tolerance defaults. Suites are registered
declaratively as (anchor, applicability, closure) triples so that every
verified law lives in exactly one table.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .algebra import (GroupElement, LieAlgebraDescriptor, StructureError,
                      ad_matrix_c, ad_matrix_of_group, algebra_from_dict,
                      algebra_to_dict, bracket_c, su2, u1, u1_su2)
from .connection import check_compatibility, field_redefine, potential_curvature
from .forms import (Chart, LieForm, PolyData, SamplePlan, euclidean_chart,
                    exterior_derivative, form_from_poly, minkowski_chart,
                    stereographic_chart, zero_form)
from .gauge import (GaugeScenario, bianchi_residual, change_of_gauge,
                    density_gauge_invariance_residual,
                    density_infinitesimal_residual,
                    field_redef_invariance_residual, instanton_charge,
                    self_duality_residual)
from .lgb import (GSection, TotalPoint, TotalTangent, TrivLgb, group_sample,
                  darboux_inverse_residual, darboux_leibniz_residual,
                  generalized_mc_residual, multiplicativity_residual,
                  nabla_from_darboux, pullback_mc_residual)
from .principal import (Automorphism, TrivPrincipal,
                        action_differential_residual, equivariance_residual,
                        field_strength_type_residual, gauge_transform_total,
                        kernel_invariance_residual, mixed_bracket_residual,
                        modified_pushforward, projection_commutation_residual,
                        pushforward_via_section, total_field_strength)

__all__ = [
    "ScenarioError", "ScenarioBundle", "SCENARIO_NAMES", "builtin_scenario",
    "bpst_potential", "bpst_central_form", "load_scenario", "save_scenario",
    "scenario_from_dict", "scenario_to_dict", "SUITES", "suite_names",
    "run_suite", "CheckRow", "SuiteReport", "VerificationReport",
    "algebra_kernel_residuals", "DEFAULT_TOLERANCES",
]

SCENARIO_NAMES = ("flat-su2", "abelian-u1", "preclassical-u1su2", "bpst",
                  "random-curved")


class ScenarioError(ValueError):
    """Scenario construction failure; the message names the offending field."""


# ---------------------------------------------------------------------------
# the instanton chart data
# ---------------------------------------------------------------------------

# Rotation planes of the three imaginary quaternion units: row a holds the
# matrix M_a with (M_a x)_mu the dx^mu coefficient of the a-th component of
# the conjugate-derivative form x -> Im(conj(q) dq).
_BPST_PLANES = np.array([
    [[0., -1., 0., 0.], [1., 0., 0., 0.], [0., 0., 0., 1.], [0., 0., -1., 0.]],
    [[0., 0., -1., 0.], [0., 0., 0., -1.], [1., 0., 0., 0.], [0., 1., 0., 0.]],
    [[0., 0., 0., -1.], [0., 0., 1., 0.], [0., -1., 0., 0.], [1., 0., 0., 0.]],
])

# increasing index pair -> (algebra slot, sign) of the self-dual plane basis
_BPST_PAIRS = {(0, 1): (0, 1.0), (2, 3): (0, -1.0),
               (0, 2): (1, 1.0), (1, 3): (1, 1.0),
               (0, 3): (2, 1.0), (1, 2): (2, -1.0)}


def bpst_potential(box=None) -> LieForm:
    """Horizontal potential of the instanton bundle on the stereographic
    chart: the imaginary part of conj(q) dq divided by 1 + |x|^2, with the
    quaternion units identified with twice the algebra basis."""
    planes = _BPST_PLANES

    def comp(x, idx):
        x = np.asarray(x, dtype=float)
        u = 1.0 + float(x @ x)
        return 2.0 * (planes[:, idx[0], :] @ x) / u

    def dcomp(x, idx):
        mu, nu = idx
        x = np.asarray(x, dtype=float)
        u = 1.0 + float(x @ x)
        mx = planes @ x
        return -4.0 * (planes[:, mu, nu] * u
                       + mx[:, nu] * x[mu] - mx[:, mu] * x[nu]) / u ** 2

    return LieForm(n=4, degree=1, value_target="algebra", value_shape=(3,),
                   components=comp, analytic_d=dcomp, fd_step=2e-5, box=box)


def bpst_central_form(box=None) -> LieForm:
    """Curvature of the instanton potential in closed form: the self-dual
    plane basis times 4 / (1 + |x|^2)^2."""
    def profile(x):
        return 4.0 / (1.0 + float(np.asarray(x) @ np.asarray(x))) ** 2

    def comp(x, idx):
        out = np.zeros(3)
        slot, sign = _BPST_PAIRS[tuple(idx)]
        out[slot] = sign * profile(x)
        return out

    def pair_vec(p, q):
        out = np.zeros(3)
        slot, sign = _BPST_PAIRS[(p, q)]
        out[slot] = sign
        return out

    def dcomp(x, idx):
        i, j, k = idx
        x = np.asarray(x, dtype=float)
        u = 1.0 + float(x @ x)
        return (-16.0 / u ** 3) * (x[i] * pair_vec(j, k)
                                   - x[j] * pair_vec(i, k)
                                   + x[k] * pair_vec(i, j))

    return LieForm(n=4, degree=2, value_target="algebra", value_shape=(3,),
                   components=comp, analytic_d=dcomp, fd_step=2e-5, box=box)


# ---------------------------------------------------------------------------
# scenario bundles
# ---------------------------------------------------------------------------

@dataclass
class ScenarioBundle:
    """Everything a verification run needs, under one name."""

    name: str
    chart: Chart
    algebra: LieAlgebraDescriptor
    scenario: GaugeScenario
    lgb: TrivLgb
    principal: TrivPrincipal
    sections: dict
    automorphisms: dict
    shift: LieForm          # splitting-shift 1-form (lambda slot)
    generator: LieForm      # infinitesimal generator / fibre field (epsilon slot)
    plan: SamplePlan = field(default_factory=SamplePlan)
    tolerances: dict = field(default_factory=dict)
    quadrature: dict = field(default_factory=lambda: {"radius": 20.0, "order": 24})
    expected_charge: float = None
    section_polys: dict = field(default_factory=dict)
    automorphism_polys: dict = field(default_factory=dict)
    metric_name: str = "euclidean"

    @property
    def omega(self) -> LieForm:
        return self.lgb.omega

    @property
    def gauge_field(self) -> LieForm:
        return self.scenario.gauge_field

    @property
    def zeta(self) -> LieForm:
        return self.scenario.zeta


def _poly_form(n, degree, dim, terms, box=None) -> LieForm:
    return form_from_poly(n, degree, "algebra", (dim,),
                          PolyData(n, degree, (dim,), terms), box=box)


def _basis_vec(dim, slot, scale=1.0):
    v = np.zeros(dim)
    v[slot] = scale
    return v


def _section_from_poly(alg, poly: PolyData, name: str) -> GSection:
    return GSection.from_exp_coeffs(alg, lambda y: poly.evaluate(y, ()), name=name)


def _sections_from_polys(alg, polys: dict) -> dict:
    return {name: _section_from_poly(alg, poly, name)
            for name, poly in polys.items()}


def _assemble(name, chart, alg, omega, zeta, a, shift, generator,
              section_polys, automorphism_polys, metric_name,
              quadrature=None, expected_charge=None,
              plan=None, tolerances=None) -> ScenarioBundle:
    lgb = TrivLgb(chart, alg, omega)
    scenario = GaugeScenario(chart, alg, lgb.nabla, zeta, a, name=name)
    principal = TrivPrincipal(lgb, a)
    sections = _sections_from_polys(alg, section_polys)
    autos = {n: Automorphism(_section_from_poly(alg, p, n))
             for n, p in automorphism_polys.items()}
    return ScenarioBundle(
        name=name, chart=chart, algebra=alg, scenario=scenario, lgb=lgb,
        principal=principal, sections=sections, automorphisms=autos,
        shift=shift, generator=generator, plan=plan or SamplePlan(),
        tolerances=dict(tolerances or {}),
        quadrature=dict(quadrature or {"radius": 20.0, "order": 24}),
        expected_charge=expected_charge, section_polys=dict(section_polys),
        automorphism_polys=dict(automorphism_polys), metric_name=metric_name)


def _const_poly(n, dim, coeffs) -> PolyData:
    return PolyData(n, 0, (dim,), {(): [(np.asarray(coeffs, dtype=float),
                                         np.zeros(n, dtype=int))]})


def _linear_poly(n, dim, rows) -> PolyData:
    """rows: list of (coeff vector, exponent vector) pairs on the empty index."""
    return PolyData(n, 0, (dim,), {(): [(np.asarray(c, dtype=float),
                                         np.asarray(e, dtype=int))
                                        for c, e in rows]})


def _flat_su2() -> ScenarioBundle:
    alg = su2()
    chart = euclidean_chart(2, half=1.0)
    omega = zero_form(2, 1, "algebra", (3,), box=chart.box)
    zeta = zero_form(2, 2, "algebra", (3,), box=chart.box)
    a = _poly_form(2, 1, 3, {(0,): [(_basis_vec(3, 0, 0.5), np.array([0, 1]))],
                             (1,): [(_basis_vec(3, 1, 0.3), np.array([1, 0]))]},
                   box=chart.box)
    shift = _poly_form(2, 1, 3, {(0,): [(_basis_vec(3, 1, 0.2), np.array([1, 0]))],
                                 (1,): [(_basis_vec(3, 0, 0.1), np.array([0, 1]))]},
                       box=chart.box)
    generator = _poly_form(2, 0, 3, {(): [(_basis_vec(3, 2), np.array([1, 0]))]},
                           box=chart.box)
    sections = {
        "identity": _const_poly(2, 3, [0.0, 0.0, 0.0]),
        "constant": _const_poly(2, 3, [0.3, -0.2, 0.5]),
        "generic": _linear_poly(2, 3, [([0.4, 0.0, 0.0], [0, 1]),
                                       ([0.0, 0.2, 0.0], [1, 1]),
                                       ([0.0, 0.0, -0.3], [1, 0])]),
        "twist": _linear_poly(2, 3, [([0.1, 0.0, 0.0], [2, 0]),
                                     ([0.0, -0.3, 0.0], [0, 1]),
                                     ([0.0, 0.0, 0.2], [1, 0])]),
    }
    autos = {
        "identity": _const_poly(2, 3, [0.0, 0.0, 0.0]),
        "constant": _const_poly(2, 3, [0.2, 0.4, -0.1]),
        "generic": _linear_poly(2, 3, [([0.3, 0.0, 0.0], [1, 0]),
                                       ([0.0, -0.2, 0.0], [0, 1]),
                                       ([0.0, 0.0, 0.25], [1, 1])]),
        "twist": _linear_poly(2, 3, [([-0.15, 0.0, 0.0], [0, 2]),
                                     ([0.0, 0.1, 0.0], [1, 0]),
                                     ([0.0, 0.0, -0.2], [0, 1])]),
    }
    return _assemble("flat-su2", chart, alg, omega, zeta, a, shift, generator,
                     sections, autos, "euclidean")


def _abelian_u1() -> ScenarioBundle:
    alg = u1()
    chart = euclidean_chart(2, half=1.0)
    omega = zero_form(2, 1, "algebra", (1,), box=chart.box)
    # closed central 2-form; every adjoint defect of it vanishes
    zeta = _poly_form(2, 2, 1, {(0, 1): [(np.array([0.3]), np.array([0, 0]))]},
                      box=chart.box)
    a = _poly_form(2, 1, 1, {(0,): [(np.array([0.7]), np.array([0, 1]))]},
                   box=chart.box)
    shift = _poly_form(2, 1, 1, {(1,): [(np.array([0.15]), np.array([1, 0]))]},
                       box=chart.box)
    generator = _poly_form(2, 0, 1, {(): [(np.array([0.4]), np.array([1, 1]))]},
                           box=chart.box)
    sections = {
        "identity": _const_poly(2, 1, [0.0]),
        "constant": _const_poly(2, 1, [0.6]),
        "generic": _linear_poly(2, 1, [([0.4], [2, 0]), ([-0.3], [0, 1])]),
        "twist": _linear_poly(2, 1, [([0.25], [1, 1])]),
    }
    autos = {
        "identity": _const_poly(2, 1, [0.0]),
        "constant": _const_poly(2, 1, [-0.35]),
        "generic": _linear_poly(2, 1, [([0.3], [1, 0]), ([0.2], [0, 2])]),
        "twist": _linear_poly(2, 1, [([-0.2], [1, 1])]),
    }
    return _assemble("abelian-u1", chart, alg, omega, zeta, a, shift, generator,
                     sections, autos, "euclidean")


def _preclassical_u1su2() -> ScenarioBundle:
    alg = u1_su2()
    chart = euclidean_chart(2, half=1.0)
    # horizontal potential entirely in the central slot: the connection is
    # flat while its curvature potential (= the central form) is nonzero
    omega = _poly_form(2, 1, 4, {(1,): [(_basis_vec(4, 0), np.array([1, 0]))]},
                       box=chart.box)
    zeta = potential_curvature(alg, omega)
    a = _poly_form(2, 1, 4, {(0,): [(_basis_vec(4, 1, 0.5), np.array([0, 1]))],
                             (1,): [(_basis_vec(4, 2, 0.3), np.array([1, 0]))]},
                   box=chart.box)
    shift = _poly_form(2, 1, 4, {(0,): [(_basis_vec(4, 2, 0.2), np.array([1, 0]))],
                                 (1,): [(_basis_vec(4, 3, 0.1), np.array([0, 1]))]},
                       box=chart.box)
    generator = _poly_form(2, 0, 4, {(): [(_basis_vec(4, 3), np.array([1, 0]))]},
                           box=chart.box)
    sections = {
        "identity": _const_poly(2, 4, [0.0, 0.0, 0.0, 0.0]),
        "constant": _const_poly(2, 4, [0.4, 0.3, -0.2, 0.5]),
        "generic": _linear_poly(2, 4, [([0.2, 0.0, 0.0, 0.0], [1, 0]),
                                       ([0.0, 0.3, 0.0, 0.0], [0, 1]),
                                       ([0.0, 0.0, 0.15, 0.0], [1, 1]),
                                       ([0.0, 0.0, 0.0, -0.25], [1, 0])]),
        "twist": _linear_poly(2, 4, [([0.0, 0.1, 0.0, 0.0], [2, 0]),
                                     ([0.0, 0.0, -0.2, 0.0], [0, 1]),
                                     ([0.15, 0.0, 0.0, 0.1], [1, 0])]),
    }
    autos = {
        "identity": _const_poly(2, 4, [0.0, 0.0, 0.0, 0.0]),
        "constant": _const_poly(2, 4, [0.3, 0.2, 0.4, -0.1]),
        "generic": _linear_poly(2, 4, [([0.2, 0.3, 0.0, 0.0], [1, 0]),
                                       ([0.0, 0.0, -0.2, 0.0], [0, 1]),
                                       ([0.0, 0.0, 0.0, 0.25], [1, 1])]),
        "twist": _linear_poly(2, 4, [([0.0, -0.15, 0.0, 0.0], [0, 2]),
                                     ([0.1, 0.0, 0.1, 0.0], [1, 0]),
                                     ([0.0, 0.0, 0.0, -0.2], [0, 1])]),
    }
    return _assemble("preclassical-u1su2", chart, alg, omega, zeta, a, shift,
                     generator, sections, autos, "euclidean")


def _bpst() -> ScenarioBundle:
    alg = su2()
    chart = stereographic_chart(half=2.0, orientation=-1)
    omega = bpst_potential(box=chart.box)
    zeta = bpst_central_form(box=chart.box)
    a = zero_form(4, 1, "algebra", (3,), box=chart.box)
    # the shift that straightens the splitting: the potential itself
    shift = omega
    generator = _poly_form(4, 0, 3, {(): [(_basis_vec(3, 0, 0.2), np.array([0, 1, 0, 0])),
                                          (_basis_vec(3, 1, -0.1), np.array([1, 0, 0, 0])),
                                          (_basis_vec(3, 2, 0.1), np.array([0, 0, 0, 1]))]},
                           box=chart.box)
    sections = {
        "identity": _const_poly(4, 3, [0.0, 0.0, 0.0]),
        "constant": _const_poly(4, 3, [0.3, -0.2, 0.5]),
        "generic": _linear_poly(4, 3, [([0.15, 0.0, 0.0], [0, 1, 0, 0]),
                                       ([0.0, 0.1, 0.0], [1, 0, 0, 1]),
                                       ([0.0, 0.0, -0.1], [0, 0, 1, 0])]),
        "twist": _linear_poly(4, 3, [([0.05, 0.0, 0.0], [1, 1, 0, 0]),
                                     ([0.0, -0.1, 0.0], [0, 0, 0, 1]),
                                     ([0.0, 0.0, 0.1], [0, 0, 1, 0])]),
    }
    autos = {
        "identity": _const_poly(4, 3, [0.0, 0.0, 0.0]),
        "constant": _const_poly(4, 3, [0.2, 0.4, -0.1]),
        "generic": _linear_poly(4, 3, [([0.1, 0.0, 0.0], [1, 0, 0, 0]),
                                       ([0.0, -0.1, 0.0], [0, 1, 0, 0]),
                                       ([0.0, 0.0, 0.1], [0, 0, 1, 1])]),
        "twist": _linear_poly(4, 3, [([-0.05, 0.0, 0.0], [0, 2, 0, 0]),
                                     ([0.0, 0.05, 0.0], [1, 0, 0, 0]),
                                     ([0.0, 0.0, -0.1], [0, 0, 0, 1])]),
    }
    return _assemble("bpst", chart, alg, omega, zeta, a, shift, generator,
                     sections, autos, "round-s4",
                     quadrature={"radius": 20.0, "order": 24},
                     expected_charge=1.0)


def _random_curved() -> ScenarioBundle:
    alg = su2()
    chart = euclidean_chart(3, half=1.0)
    rng = np.random.default_rng(42)

    def rand_one_form(scale):
        terms = {}
        for k in range(3):
            rows = [(scale * rng.normal(size=3), np.zeros(3, dtype=int))]
            mono = np.zeros(3, dtype=int)
            mono[rng.integers(0, 3)] = 1
            rows.append((scale * rng.normal(size=3), mono))
            terms[(k,)] = rows
        return _poly_form(3, 1, 3, terms, box=chart.box)

    omega = rand_one_form(0.4)
    zeta = potential_curvature(alg, omega)
    a = rand_one_form(0.3)
    shift = rand_one_form(0.2)
    generator = _poly_form(3, 0, 3, {(): [(0.4 * rng.normal(size=3),
                                           np.array([1, 0, 0])),
                                          (0.3 * rng.normal(size=3),
                                           np.array([0, 0, 1]))]},
                           box=chart.box)

    def rand_section_poly(scale):
        return _linear_poly(3, 3, [(scale * rng.normal(size=3), np.zeros(3, dtype=int)),
                                   (scale * rng.normal(size=3), np.array([1, 0, 0])),
                                   (scale * rng.normal(size=3), np.array([0, 1, 0]))])

    sections = {
        "identity": _const_poly(3, 3, [0.0, 0.0, 0.0]),
        "constant": _const_poly(3, 3, rng.normal(size=3) * 0.4),
        "generic": rand_section_poly(0.3),
        "twist": rand_section_poly(0.25),
    }
    autos = {
        "identity": _const_poly(3, 3, [0.0, 0.0, 0.0]),
        "constant": _const_poly(3, 3, rng.normal(size=3) * 0.3),
        "generic": rand_section_poly(0.25),
        "twist": rand_section_poly(0.2),
    }
    return _assemble("random-curved", chart, alg, omega, zeta, a, shift,
                     generator, sections, autos, "euclidean")


_BUILDERS = {
    "flat-su2": _flat_su2,
    "abelian-u1": _abelian_u1,
    "preclassical-u1su2": _preclassical_u1su2,
    "bpst": _bpst,
    "random-curved": _random_curved,
}


def builtin_scenario(name: str) -> ScenarioBundle:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ScenarioError(f"unknown built-in scenario {name!r}; "
                            f"choose from {sorted(_BUILDERS)}") from None
    return builder()


# ---------------------------------------------------------------------------
# scenario files
# ---------------------------------------------------------------------------

_METRIC_NAMES = {"euclidean": "euclidean", "round-s4": "round-s4",
                 "minkowski": "minkowski"}


def _chart_from_dict(blob) -> tuple:
    if not isinstance(blob, dict):
        raise ScenarioError("chart: must be an object")
    try:
        dim = int(blob["dim"])
        half = float(blob["half"])
    except KeyError as exc:
        raise ScenarioError(f"chart: missing key {exc.args[0]!r}") from None
    metric = blob.get("metric", "euclidean")
    orientation = int(blob.get("orientation", 1))
    if metric not in _METRIC_NAMES:
        raise ScenarioError(f"chart.metric: unknown metric {metric!r}; "
                            f"choose from {sorted(_METRIC_NAMES)}")
    if half <= 0:
        raise ScenarioError("chart.half: must be positive")
    if metric == "round-s4":
        if dim != 4:
            raise ScenarioError("chart.metric: the round-sphere metric needs dim 4")
        chart = stereographic_chart(half=half, orientation=orientation)
    elif metric == "minkowski":
        if dim != 4:
            raise ScenarioError("chart.metric: the minkowski chart needs dim 4")
        if orientation != 1:
            raise ScenarioError("chart.orientation: minkowski chart is oriented +1")
        chart = minkowski_chart(half=half)
    else:
        chart = euclidean_chart(dim, half=half, orientation=orientation)
    return chart, metric


def _form_from_blob(field_name, blob, n, dim, degree) -> LieForm:
    if not isinstance(blob, dict):
        raise ScenarioError(f"{field_name}: must be a polynomial-form object")
    try:
        poly = PolyData.from_json(n, (dim,), blob)
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"{field_name}: malformed polynomial payload "
                            f"({exc})") from None
    if poly.degree != degree:
        raise ScenarioError(f"{field_name}: expected a degree-{degree} form, "
                            f"got degree {poly.degree}")
    for idx, rows in poly.terms.items():
        if len(idx) != degree or any(not 0 <= i < n for i in idx):
            raise ScenarioError(f"{field_name}: index {idx} is not a valid "
                                f"increasing {degree}-index on {n} axes")
        if list(idx) != sorted(set(idx)):
            raise ScenarioError(f"{field_name}: index {idx} must be strictly "
                                "increasing")
        for coeff, expo in rows:
            if coeff.shape != (dim,):
                raise ScenarioError(f"{field_name}: coefficient shape "
                                    f"{coeff.shape} does not match the "
                                    f"algebra dimension {dim}")
            if expo.shape != (n,) or (expo < 0).any():
                raise ScenarioError(f"{field_name}: exponent vector {expo} "
                                    f"must be {n} non-negative integers")
    return form_from_poly(n, degree, "algebra", (dim,), poly)


def _coeff_polys_from_dict(field_name, blob, n, dim) -> dict:
    out = {}
    if blob is None:
        return out
    if not isinstance(blob, dict):
        raise ScenarioError(f"{field_name}: must be an object of named entries")
    for name, entry in blob.items():
        if not isinstance(entry, dict) or "exp_coeffs" not in entry:
            raise ScenarioError(f"{field_name}.{name}: needs an 'exp_coeffs' "
                                "polynomial")
        poly_blob = entry["exp_coeffs"]
        try:
            poly = PolyData.from_json(n, (dim,), poly_blob)
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"{field_name}.{name}: malformed polynomial "
                                f"payload ({exc})") from None
        if poly.degree != 0:
            raise ScenarioError(f"{field_name}.{name}: exponential coefficients "
                                "must form a degree-0 polynomial")
        out[name] = poly
    return out


def scenario_from_dict(data, source="<dict>") -> ScenarioBundle:
    if not isinstance(data, dict):
        raise ScenarioError(f"{source}: top level must be an object")
    try:
        name = str(data["name"])
    except KeyError:
        raise ScenarioError("name: missing") from None

    try:
        alg = algebra_from_dict(data.get("algebra", "su2"))
    except StructureError as exc:
        raise ScenarioError(f"algebra: {exc}") from None

    chart, metric = _chart_from_dict(data.get("chart", {"dim": 2, "half": 1.0}))
    n, dim = chart.dim, alg.dim

    forms = data.get("forms", {})
    if not isinstance(forms, dict):
        raise ScenarioError("forms: must be an object")
    if "omega" not in forms:
        raise ScenarioError("forms.omega: missing")
    omega = _form_from_blob("forms.omega", forms["omega"], n, dim, 1)
    omega.box = chart.box

    if "zeta" not in forms:
        raise ScenarioError("forms.zeta: missing (give a 2-form or the "
                            "directive \"curvature-of-omega\")")
    if forms["zeta"] == "curvature-of-omega":
        zeta = potential_curvature(alg, omega)
    else:
        zeta = _form_from_blob("forms.zeta", forms["zeta"], n, dim, 2)
    zeta.box = chart.box

    if "A" not in forms:
        raise ScenarioError("forms.A: missing")
    a = _form_from_blob("forms.A", forms["A"], n, dim, 1)
    a.box = chart.box

    shift = (_form_from_blob("forms.lambda", forms["lambda"], n, dim, 1)
             if "lambda" in forms else zero_form(n, 1, "algebra", (dim,),
                                                 box=chart.box))
    generator = (_form_from_blob("forms.epsilon", forms["epsilon"], n, dim, 0)
                 if "epsilon" in forms else zero_form(n, 0, "algebra", (dim,),
                                                      box=chart.box))

    section_polys = _coeff_polys_from_dict("sections", data.get("sections"), n, dim)
    section_polys.setdefault("identity", _const_poly(n, dim, np.zeros(dim)))
    auto_polys = _coeff_polys_from_dict("automorphisms",
                                        data.get("automorphisms"), n, dim)
    auto_polys.setdefault("identity", _const_poly(n, dim, np.zeros(dim)))

    try:
        plan = SamplePlan.from_json(data.get("plan", {}))
    except (AttributeError, TypeError, ValueError) as exc:
        raise ScenarioError(f"plan: {exc}") from None
    tolerances = data.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise ScenarioError("tolerances: must be an object of check -> bound")
    quad = data.get("quadrature", {})
    if not isinstance(quad, dict):
        raise ScenarioError("quadrature: must be an object")
    try:
        quadrature = {"radius": float(quad.get("radius", 20.0)),
                      "order": int(quad.get("order", 24))}
        expected = data.get("expected_charge")
        expected_charge = None if expected is None else float(expected)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"quadrature/expected_charge: {exc}") from None

    bundle = _assemble(name, chart, alg, omega, zeta, a, shift, generator,
                       section_polys, auto_polys, metric,
                       quadrature=quadrature, expected_charge=expected_charge,
                       plan=plan, tolerances=tolerances)

    # eager invariants: every section and automorphism must evaluate to a
    # group-variety element at the chart center
    center = chart.box.mean(axis=1)
    for label, table in (("sections", bundle.sections),
                         ("automorphisms", bundle.automorphisms)):
        for sec_name, entry in table.items():
            sec = entry.tau if isinstance(entry, Automorphism) else entry
            try:
                sec(center)
            except Exception as exc:
                raise ScenarioError(f"{label}.{sec_name}: {exc}") from None
    return bundle


def load_scenario(path) -> ScenarioBundle:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON at line {exc.lineno} "
                            f"column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(data, source=str(path))


def _form_to_blob(field_name, f: LieForm):
    if f.poly is None:
        raise ScenarioError(f"{field_name}: only polynomial forms can be "
                            "serialized to a scenario file")
    return f.poly.to_json()


def scenario_to_dict(bundle: ScenarioBundle) -> dict:
    return {
        "name": bundle.name,
        "algebra": algebra_to_dict(bundle.algebra),
        "chart": {"dim": bundle.chart.dim,
                  "half": float(bundle.chart.box[0, 1]),
                  "metric": bundle.metric_name,
                  "orientation": bundle.chart.orientation},
        "forms": {
            "omega": _form_to_blob("forms.omega", bundle.omega),
            "zeta": _form_to_blob("forms.zeta", bundle.zeta),
            "A": _form_to_blob("forms.A", bundle.gauge_field),
            "lambda": _form_to_blob("forms.lambda", bundle.shift),
            "epsilon": _form_to_blob("forms.epsilon", bundle.generator),
        },
        "sections": {name: {"exp_coeffs": poly.to_json()}
                     for name, poly in bundle.section_polys.items()},
        "automorphisms": {name: {"exp_coeffs": poly.to_json()}
                          for name, poly in bundle.automorphism_polys.items()},
        "plan": bundle.plan.to_json(),
        "tolerances": dict(bundle.tolerances),
        "quadrature": dict(bundle.quadrature),
        "expected_charge": bundle.expected_charge,
    }


def save_scenario(bundle: ScenarioBundle, path):
    blob = scenario_to_dict(bundle)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(blob, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# report types
# ---------------------------------------------------------------------------

@dataclass
class CheckRow:
    check: str
    residual: float
    tolerance: float
    per_point: list  # (point ordinal or -1 for global, residual)

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


@dataclass
class SuiteReport:
    name: str
    anchor: str
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def _binding(self) -> CheckRow:
        return max(self.checks,
                   key=lambda c: c.residual / c.tolerance if c.tolerance else 0.0)

    def to_dict(self) -> dict:
        worst = self._binding()
        return {"name": self.name, "anchor": self.anchor,
                "residual": worst.residual, "tolerance": worst.tolerance,
                "pass": self.passed,
                "checks": [{"check": c.check, "residual": c.residual,
                            "tolerance": c.tolerance, "pass": c.passed}
                           for c in self.checks]}


@dataclass
class VerificationReport:
    scenario: str
    suites: list
    env: dict

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def to_dict(self) -> dict:
        return {"scenario": self.scenario,
                "suites": [s.to_dict() for s in self.suites],
                "env": self.env, "pass": self.passed}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def csv_rows(self):
        for suite in self.suites:
            for check in suite.checks:
                for point, residual in check.per_point:
                    yield (suite.name, check.check, point, repr(residual))

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["suite", "check", "point", "residual"])
            writer.writerows(self.csv_rows())


# ---------------------------------------------------------------------------
# suite machinery
# ---------------------------------------------------------------------------

DEFAULT_TOLERANCES = {
    "algebra/jacobi": 1e-9,
    "algebra/ad-homomorphism": 1e-9,
    "algebra/kappa-invariance": 1e-9,
    "algebra/exp-ad-consistency": 1e-9,
    "compatibility/derivation": 1e-6,
    "compatibility/curvature": 1e-6,
    "darboux/leibniz": 1e-6,
    "darboux/inverse": 1e-6,
    "fibre-connection/stencil-vs-analytic": 1e-6,
    "multiplicativity/total-form": 1e-9,
    "generalized-mc/total-space": 1e-5,
    "generalized-mc/pullback": 1e-3,
    "principal/action-differential": 1e-7,
    "principal/section-independence": 1e-8,
    "principal/equivariance": 1e-8,
    "principal/kernel-invariance": 1e-8,
    "principal/projection-commutation": 1e-8,
    "principal/mixed-bracket": 1e-4,
    "structure-equation/dual-path": 1e-6,
    "structure-equation/horizontality": 1e-8,
    "structure-equation/adjoint-type": 1e-5,
    "gauge-laws/section": 1e-5,
    "gauge-laws/automorphism-potential": 1e-5,
    "gauge-laws/automorphism-field-strength": 1e-5,
    "bianchi/analytic": 1e-7,
    "bianchi/stencil": 1e-4,
    "field-redef/invariance": 1e-6,
    "field-redef/closure-derivation": 1e-6,
    "field-redef/closure-curvature": 1e-6,
    "lagrangian/finite": 1e-6,
    "lagrangian/infinitesimal": 1e-5,
    "self-duality/central-form": 1e-6,
    "charge/instanton-number": 1e-2,
}


@dataclass
class RunEnv:
    plan: SamplePlan
    h: float = None
    h2: float = None
    tol_scale: float = 1.0
    overrides: dict = field(default_factory=dict)

    def tol(self, key: str) -> float:
        probe = key
        base = self.overrides.get(probe, DEFAULT_TOLERANCES.get(probe))
        if base is None and ":" in key:
            probe = key.split(":", 1)[0]
            base = self.overrides.get(probe, DEFAULT_TOLERANCES.get(probe))
        if base is None:
            raise KeyError(f"no tolerance registered for {key!r}")
        return float(base) * self.tol_scale


@dataclass
class _FixedPlan:
    """Single-point stand-in for a sampling plan, for per-point residuals."""

    pts: np.ndarray
    seed: object
    tangent_probes: int = 4
    mode: str = "fixed"

    @property
    def count(self) -> int:
        return len(self.pts)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def points(self, chart) -> np.ndarray:
        return self.pts

    def tangents(self, rng, n, count=None) -> np.ndarray:
        return rng.normal(size=(count or self.tangent_probes, n))


def _per_point(bundle: ScenarioBundle, env: RunEnv, fn) -> tuple:
    """Evaluate fn(single_point_plan, ordinal, point) over the plan; return
    (worst, [(ordinal, residual)])."""
    rows = []
    worst = 0.0
    for i, x in enumerate(env.plan.points(bundle.chart)):
        single = _FixedPlan(pts=x[None, :], seed=[env.plan.seed, i],
                            tangent_probes=env.plan.tangent_probes)
        r = float(fn(single, i, x))
        rows.append((i, r))
        worst = max(worst, r)
    return worst, rows


def _per_point_multi(bundle: ScenarioBundle, env: RunEnv, fn, k: int) -> list:
    """Like _per_point for an fn that returns k residuals per point (for laws
    whose evaluations share expensive intermediates)."""
    rows = [[] for _ in range(k)]
    worst = [0.0] * k
    for i, x in enumerate(env.plan.points(bundle.chart)):
        single = _FixedPlan(pts=x[None, :], seed=[env.plan.seed, i],
                            tangent_probes=env.plan.tangent_probes)
        for j, v in enumerate(fn(single, i, x)):
            v = float(v)
            rows[j].append((i, v))
            worst[j] = max(worst[j], v)
    return list(zip(worst, rows))


def _row(env, key, worst, per_point, label=None) -> CheckRow:
    return CheckRow(check=label or key.split("/", 1)[1], residual=worst,
                    tolerance=env.tol(key), per_point=per_point)


# -- individual suites -------------------------------------------------------

def algebra_kernel_residuals(alg: LieAlgebraDescriptor, count: int,
                             seed=42) -> dict:
    """Sampled residuals of the bracket/adjoint kernel laws, plus the exact
    Jacobi residual of the structure constants."""
    c = alg.structure_constants
    # explicit cyclic sum: [[a,b],e] + [[b,e],a] + [[e,a],b]
    t1 = np.einsum('abk,kem->abem', c, c)
    t2 = np.einsum('bek,kam->beam', c, c).transpose(2, 0, 1, 3)
    t3 = np.einsum('eak,kbm->eabm', c, c).transpose(1, 2, 0, 3)
    jacobi = t1 + t2 + t3
    out = {"jacobi": float(np.abs(jacobi).max()),
           "ad-homomorphism": [], "kappa-invariance": [],
           "exp-ad-consistency": []}
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        ucoef = rng.normal(scale=0.8, size=alg.dim)
        vcoef = rng.normal(scale=0.8, size=alg.dim)
        gu = expm(alg.rep_of(ucoef))
        gv = expm(alg.rep_of(vcoef))
        ad_u = ad_matrix_of_group(alg, gu)
        ad_v = ad_matrix_of_group(alg, gv)
        ad_uv = ad_matrix_of_group(alg, gu @ gv)
        out["ad-homomorphism"].append(float(np.abs(ad_uv - ad_u @ ad_v).max()))
        out["kappa-invariance"].append(
            float(np.abs(ad_u.T @ alg.kappa @ ad_u - alg.kappa).max()))
        out["exp-ad-consistency"].append(
            float(np.abs(ad_matrix_of_group(alg, expm(alg.rep_of(ucoef)))
                         - expm(ad_matrix_c(alg, ucoef))).max()))
    return out


def _suite_algebra(bundle, env):
    res = algebra_kernel_residuals(bundle.algebra, env.plan.count,
                                   seed=env.plan.seed)
    rows = [_row(env, "algebra/jacobi", res["jacobi"], [(-1, res["jacobi"])])]
    for key in ("ad-homomorphism", "kappa-invariance", "exp-ad-consistency"):
        vals = res[key]
        rows.append(_row(env, f"algebra/{key}", max(vals),
                         list(enumerate(vals))))
    return rows


def _suite_compatibility(bundle, env):
    def both(single, i, x):
        rep = check_compatibility(bundle.lgb.nabla, bundle.zeta, bundle.chart,
                                  single)
        return rep.derivation_residual, rep.curvature_residual

    (w1, p1), (w2, p2) = _per_point_multi(bundle, env, both, 2)
    return [_row(env, "compatibility/derivation", w1, p1),
            _row(env, "compatibility/curvature", w2, p2)]


def _distinguished_section(bundle):
    """Deterministic nontrivial section for pullback/invariance checks."""
    for name in ("generic", "constant", "twist"):
        if name in bundle.sections:
            return bundle.sections[name]
    for name in sorted(bundle.sections):
        if name != "identity":
            return bundle.sections[name]
    return bundle.sections["identity"]


def _random_section_pairs(bundle, count, seed):
    alg = bundle.algebra
    n = bundle.chart.dim
    scale = 0.35 / bundle.chart.half_width()
    pairs = []
    for i in range(count):
        rng = np.random.default_rng([seed, 977, i])

        def coeff_fn(y, b=rng.normal(scale=0.5, size=alg.dim),
                     w=rng.normal(scale=scale, size=(alg.dim, n))):
            return b + w @ y

        pairs.append(GSection.from_exp_coeffs(alg, coeff_fn, name=f"rand{i}"))
    return [(pairs[i], pairs[(i + 3) % len(pairs)]) for i in range(len(pairs))]


def _suite_darboux(bundle, env):
    pairs = _random_section_pairs(bundle, 8, env.plan.seed)
    named = [bundle.sections[n] for n in sorted(bundle.sections)
             if n != "identity"]
    if len(named) >= 2:
        pairs = pairs + [(named[0], named[1])]

    def leibniz(single, i, x):
        worst = 0.0
        for s1, s2 in pairs:
            worst = max(worst, darboux_leibniz_residual(bundle.lgb, s1, s2, single))
        return worst

    def inverse(single, i, x):
        worst = 0.0
        for s1, _ in pairs:
            worst = max(worst, darboux_inverse_residual(bundle.lgb, s1, single))
        return worst

    w1, p1 = _per_point(bundle, env, leibniz)
    w2, p2 = _per_point(bundle, env, inverse)
    return [_row(env, "darboux/leibniz", w1, p1),
            _row(env, "darboux/inverse", w2, p2)]


def _suite_fibre_connection(bundle, env):
    nu = bundle.generator
    dnu = exterior_derivative(nu)
    alg = bundle.algebra
    t_step = env.h if env.h is not None else 1e-5

    def check(single, i, x):
        worst = 0.0
        for k in range(bundle.chart.dim):
            got = nabla_from_darboux(bundle.lgb, nu, x, k, t_step=t_step,
                                     tol=np.inf)
            want = dnu.components(x, (k,)) + bracket_c(
                alg, bundle.omega.components(x, (k,)), nu.components(x, ()))
            worst = max(worst, float(np.abs(got - want).max()))
        return worst

    w, p = _per_point(bundle, env, check)
    return [_row(env, "fibre-connection/stencil-vs-analytic", w, p)]


def _suite_multiplicativity(bundle, env):
    def check(single, i, x):
        return multiplicativity_residual(bundle.lgb, single)

    w, p = _per_point(bundle, env, check)
    return [_row(env, "multiplicativity/total-form", w, p)]


def _suite_generalized_mc(bundle, env):
    def total(single, i, x):
        return generalized_mc_residual(bundle.lgb, bundle.zeta, single)

    sec = _distinguished_section(bundle)

    def pullback(single, i, x):
        return pullback_mc_residual(bundle.lgb, sec, bundle.zeta, single)

    w1, p1 = _per_point(bundle, env, total)
    w2, p2 = _per_point(bundle, env, pullback)
    return [_row(env, "generalized-mc/total-space", w1, p1),
            _row(env, "generalized-mc/pullback", w2, p2)]


def _section_independence_residual(p: TrivPrincipal, plan) -> float:
    """Two sections through the same multiplier must induce the same
    pushforward, and both must agree with the closed form."""
    alg = p.algebra
    n = p.chart.dim
    rng = plan.rng()
    worst = 0.0
    for x in plan.points(p.chart):
        g = group_sample(alg, rng)
        pt = TotalPoint(np.asarray(x, dtype=float), alg.group_identity())
        const = GSection.constant(g)
        slope = 0.2 * np.arange(1, alg.dim + 1)
        weights = np.ones(n) / n

        def tilted_fn(y, x0=np.asarray(x, dtype=float), gg=g):
            c = slope * float((y - x0) @ weights)
            return GroupElement(alg, expm(alg.rep_of(c))) @ gg

        tilted = GSection(alg, tilted_fn, name="tilted")
        for _ in range(plan.tangent_probes):
            t = TotalTangent(rng.normal(size=n), rng.normal(size=alg.dim))
            via_const = pushforward_via_section(p, const, pt, t)
            via_tilted = pushforward_via_section(p, tilted, pt, t)
            closed = modified_pushforward(p, g, pt, t, check=False)
            gap = max(float(np.abs(via_const.X - via_tilted.X).max()),
                      float(np.abs(via_const.eta - via_tilted.eta).max()),
                      float(np.abs(via_const.eta - closed.eta).max()))
            worst = max(worst, gap)
    return worst


def _suite_principal(bundle, env):
    p = bundle.principal
    fd = env.h if env.h is not None else 1e-5
    rows = []
    for key, fn in (
        ("principal/action-differential",
         lambda s, i, x: action_differential_residual(p, s)),
        ("principal/section-independence",
         lambda s, i, x: _section_independence_residual(p, s)),
        ("principal/equivariance",
         lambda s, i, x: equivariance_residual(p, s)),
        ("principal/kernel-invariance",
         lambda s, i, x: kernel_invariance_residual(p, s)),
        ("principal/projection-commutation",
         lambda s, i, x: projection_commutation_residual(p, s)),
        ("principal/mixed-bracket",
         lambda s, i, x: mixed_bracket_residual(p, bundle.generator, s,
                                                fd_step=fd)),
    ):
        w, pts = _per_point(bundle, env, fn)
        rows.append(_row(env, key, w, pts))
    return rows


def _suite_structure_equation(bundle, env):
    p = bundle.principal
    alg = bundle.algebra
    n = bundle.chart.dim

    def dual_path(single, i, x):
        fs = total_field_strength(p, bundle.zeta, x)
        return fs.structure_residual(probes=single.tangent_probes,
                                     seed=hash((env.plan.seed, i)) % (2 ** 32))

    def horizontality(single, i, x):
        fs = total_field_strength(p, bundle.zeta, x)
        rng = single.rng()
        worst = 0.0
        for _ in range(single.tangent_probes):
            vert = np.concatenate([np.zeros(n), rng.normal(size=alg.dim)])
            other = rng.normal(size=n + alg.dim)
            worst = max(worst, float(np.abs(fs.evaluate(vert, other)).max()))
        return worst

    def adjoint(single, i, x):
        return field_strength_type_residual(p, bundle.zeta, single)

    rows = []
    for key, fn in (("structure-equation/dual-path", dual_path),
                    ("structure-equation/horizontality", horizontality),
                    ("structure-equation/adjoint-type", adjoint)):
        w, pts = _per_point(bundle, env, fn)
        rows.append(_row(env, key, w, pts))
    return rows


def _suite_gauge_laws(bundle, env):
    rows = []
    for name, sec in sorted(bundle.sections.items()):
        def check(single, i, x, s=sec):
            return change_of_gauge(bundle.scenario, s, single).f_residual

        w, pts = _per_point(bundle, env, check)
        rows.append(_row(env, f"gauge-laws/section:{name}", w, pts,
                         label=f"section:{name}"))
    for name, aut in sorted(bundle.automorphisms.items()):
        def check(single, i, x, a=aut):
            res = gauge_transform_total(bundle.principal, a, bundle.zeta,
                                        single)
            return res.residual_a, res.residual_f

        (wa, pa), (wf, pf) = _per_point_multi(bundle, env, check, 2)
        rows.append(_row(env, f"gauge-laws/automorphism-potential:{name}",
                         wa, pa, label=f"automorphism-potential:{name}"))
        rows.append(_row(env, f"gauge-laws/automorphism-field-strength:{name}",
                         wf, pf, label=f"automorphism-field-strength:{name}"))
    return rows


def _suite_bianchi(bundle, env):
    analytic = (bundle.omega.has_exact_d() and bundle.zeta.has_exact_d()
                and bundle.gauge_field.has_exact_d())
    key = "bianchi/analytic" if analytic else "bianchi/stencil"

    def check(single, i, x):
        return bianchi_residual(bundle.scenario, single)

    w, pts = _per_point(bundle, env, check)
    return [_row(env, key, w, pts)]


def _suite_field_redef(bundle, env):
    s = bundle.scenario
    shifted = field_redefine(s.nabla, s.zeta, s.gauge_field, bundle.shift)

    def invariance(single, i, x):
        return field_redef_invariance_residual(s, bundle.shift, single)

    def closure(single, i, x):
        rep = check_compatibility(shifted.nabla, shifted.zeta, bundle.chart,
                                  single)
        return rep.derivation_residual, rep.curvature_residual

    w0, p0 = _per_point(bundle, env, invariance)
    (w1, p1), (w2, p2) = _per_point_multi(bundle, env, closure, 2)
    return [_row(env, "field-redef/invariance", w0, p0),
            _row(env, "field-redef/closure-derivation", w1, p1),
            _row(env, "field-redef/closure-curvature", w2, p2)]


def _suite_lagrangian(bundle, env):
    s = bundle.scenario
    sec = _distinguished_section(bundle)
    t_step = env.h2 if env.h2 is not None else 1e-5

    def finite(single, i, x):
        return density_gauge_invariance_residual(s, sec, single)

    def infinitesimal(single, i, x):
        return density_infinitesimal_residual(s, bundle.generator, single,
                                              t_step=t_step)

    w1, p1 = _per_point(bundle, env, finite)
    w2, p2 = _per_point(bundle, env, infinitesimal)
    return [_row(env, "lagrangian/finite", w1, p1),
            _row(env, "lagrangian/infinitesimal", w2, p2)]


def _suite_self_duality(bundle, env):
    def check(single, i, x):
        return self_duality_residual(bundle.zeta, bundle.chart, single)

    w, pts = _per_point(bundle, env, check)
    return [_row(env, "self-duality/central-form", w, pts)]


def _suite_charge(bundle, env):
    q = instanton_charge(bundle.scenario,
                         radius=bundle.quadrature["radius"],
                         order=bundle.quadrature["order"])
    expected = bundle.expected_charge if bundle.expected_charge is not None else 0.0
    residual = abs(q.total - expected)
    return [_row(env, "charge/instanton-number", residual, [(-1, residual)])]


def _needs_dim4(bundle):
    return (bundle.chart.dim == 4
            or "needs a four-dimensional chart, scenario has "
               f"dim {bundle.chart.dim}")


def _always(bundle):
    return True


# name -> (anchor, applicability, implementation). Anchors are plain-language
# statements of the law each suite verifies.
SUITES = {
    "algebra": (
        "bracket and adjoint kernel: Jacobi closure, the group adjoint as a "
        "homomorphism, invariance of the pairing, and the exponential "
        "intertwining the two adjoints",
        _always, _suite_algebra),
    "compatibility": (
        "the fibre connection differentiates the bracket and its curvature "
        "is the adjoint action of the central form",
        _always, _suite_compatibility),
    "darboux": (
        "product and inverse laws of the logarithmic derivative of "
        "group-valued sections",
        _always, _suite_darboux),
    "fibre-connection": (
        "the fibre connection recovered from the parameter derivative of "
        "logarithmic derivatives along section families",
        _always, _suite_fibre_connection),
    "multiplicativity": (
        "the total one-form intertwines fibrewise multiplication with the "
        "adjoint twist of its slots",
        _always, _suite_multiplicativity),
    "generalized-mc": (
        "curvature identity of the total one-form, the central form entering "
        "through the adjoint defect, and its pullback along sections",
        _always, _suite_generalized_mc),
    "principal": (
        "differential of the fibrewise action, equivariance and kernel "
        "stability of the connection one-form, projector commutation, and "
        "the mixed bracket of horizontal lifts with fundamental fields",
        _always, _suite_principal),
    "structure-equation": (
        "the total field strength agrees with its covariant-derivative "
        "assembly, kills vertical arguments, and transforms in the adjoint",
        _always, _suite_structure_equation),
    "gauge-laws": (
        "finite transformation laws of the potential and the field strength "
        "under group-valued sections and bundle automorphisms",
        _always, _suite_gauge_laws),
    "bianchi": (
        "differential identity binding the field strength, the potential, "
        "and the central form",
        _always, _suite_bianchi),
    "field-redef": (
        "shifts of the horizontal splitting leave the field strength "
        "invariant and preserve the compatibility pair",
        _always, _suite_field_redef),
    "lagrangian": (
        "gauge invariance of the curved Yang-Mills density, finite and "
        "infinitesimal",
        _always, _suite_lagrangian),
    "self-duality": (
        "the central form equals its own Hodge dual on the instanton chart",
        _needs_dim4, _suite_self_duality),
    "charge": (
        "topological charge from the paired field strength by box quadrature "
        "with an analytic tail",
        _needs_dim4, _suite_charge),
}


def suite_names():
    return tuple(SUITES)


def run_suite(bundle: ScenarioBundle, suite_name: str, plan: SamplePlan = None,
              tolerances: dict = None, h: float = None, h2: float = None,
              tol_scale: float = 1.0) -> VerificationReport:
    """Run one named suite (or "all") against a scenario bundle."""
    overrides = dict(bundle.tolerances)
    overrides.update(tolerances or {})
    env = RunEnv(plan=plan or bundle.plan, h=h, h2=h2, tol_scale=tol_scale,
                 overrides=overrides)

    if suite_name == "all":
        selected = [n for n in SUITES if SUITES[n][1](bundle) is True]
    else:
        if suite_name not in SUITES:
            raise ScenarioError(f"unknown suite {suite_name!r}; choose from "
                                f"{sorted(SUITES)} or 'all'")
        applicable = SUITES[suite_name][1](bundle)
        if applicable is not True:
            raise ScenarioError(f"suite {suite_name!r} is not applicable: "
                                f"{applicable}")
        selected = [suite_name]

    reports = []
    for name in selected:
        anchor, _, fn = SUITES[name]
        reports.append(SuiteReport(name=name, anchor=anchor,
                                   checks=fn(bundle, env)))
    env_blob = {"seed": env.plan.seed, "points": env.plan.count,
                "tangent_probes": env.plan.tangent_probes,
                "h": "default" if env.h is None else env.h,
                "h2": "default" if env.h2 is None else env.h2,
                "tol_scale": env.tol_scale}
    return VerificationReport(scenario=bundle.name, suites=reports,
                              env=env_blob)
