"""Vector-valued differential forms on a boxed coordinate chart.

Forms are stored by their components on strictly increasing multi-indices.
A form may carry three layers of derivative information, used in this order:

  1. a polynomial payload (`PolyData`): exact calculus, closed under the
     exterior derivative and under graded products with constant pairings;
  2. an `analytic_d` callable supplying the components of its exterior
     derivative (for closed-form but non-polynomial data);
  3. nothing: central finite differences with the form's own step, falling
     back to one-sided stencils at the box boundary (an order-loss event is
     recorded so reports can flag the accuracy drop).

The graded product implements the shuffle form of the 1/(k! m!)-normalized
permutation sum for an arbitrary constant bilinear pairing, so e.g.
(1/2)[A wedge A](X, Y) = [A(X), A(Y)] for 1-forms.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .algebra import LieAlgebraDescriptor

__all__ = [
    "Chart", "LieForm", "PolyData", "Pairing", "SamplePlan",
    "euclidean_chart", "stereographic_chart", "minkowski_chart",
    "increasing_indices", "eval_form", "exterior_derivative",
    "graded_product", "add_forms", "scale_form", "zero_form",
    "constant_form", "form_from_poly",
    "bracket_pairing", "kappa_pairing", "endo_action_pairing",
    "endo_compose_pairing", "hodge_star", "kappa_wedge_top",
    "top_coefficient", "drain_order_loss_events",
]

# order-loss events from one-sided stencils; drained by reports
_ORDER_LOSS: list = []


def drain_order_loss_events():
    global _ORDER_LOSS
    out, _ORDER_LOSS = _ORDER_LOSS, []
    return out


@lru_cache(maxsize=None)
def increasing_indices(n: int, k: int):
    """All strictly increasing multi-indices of length k in range(n)."""
    return tuple(itertools.combinations(range(n), k))


@lru_cache(maxsize=None)
def _levi_civita(n: int) -> np.ndarray:
    eps = np.zeros((n,) * n)
    for p in itertools.permutations(range(n)):
        eps[p] = _perm_sign(p)
    return eps


def _perm_sign(p) -> int:
    sign = 1
    seen = [False] * len(p)
    for i in range(len(p)):
        if seen[i]:
            continue
        j, cycle = i, 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            cycle += 1
        if cycle % 2 == 0:
            sign = -sign
    return sign


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------

@dataclass
class Chart:
    """A coordinate box with a metric and an orientation sign.

    metric_kind is one of "euclidean", "round-sphere-stereographic",
    "minkowski", "custom"; `metric` maps a point to the (dim, dim) matrix.
    """

    dim: int
    box: np.ndarray  # (dim, 2) rows (lo, hi)
    orientation: int = 1
    metric_kind: str = "euclidean"
    metric: callable = None

    def __post_init__(self):
        self.box = np.asarray(self.box, dtype=float)
        if self.box.shape != (self.dim, 2) or (self.box[:, 1] <= self.box[:, 0]).any():
            raise ValueError("box must be (dim, 2) with lo < hi on every axis")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        if self.metric is None:
            self.metric = _metric_for(self.metric_kind, self.dim)
        elif self.metric_kind != "custom":
            raise ValueError("explicit metric callables require metric_kind='custom'")

    def half_width(self) -> float:
        return float((self.box[:, 1] - self.box[:, 0]).max() / 2)

    def default_step(self) -> float:
        return 1e-5 * self.half_width()

    def contains(self, x, pad: float = 0.0) -> bool:
        x = np.asarray(x)
        return bool(((x >= self.box[:, 0] + pad) & (x <= self.box[:, 1] - pad)).all())


def _metric_for(kind: str, dim: int):
    if kind == "euclidean":
        eye = np.eye(dim)
        return lambda x: eye
    if kind == "round-sphere-stereographic":
        def metric(x):
            s = 4.0 / (1.0 + float(np.dot(x, x))) ** 2
            return s * np.eye(dim)
        return metric
    if kind == "minkowski":
        g = np.eye(dim)
        g[0, 0] = -1.0
        return lambda x: g
    raise ValueError(f"unknown metric kind {kind!r}")


def euclidean_chart(dim: int = 4, half: float = 1.0, orientation: int = 1) -> Chart:
    box = np.array([[-half, half]] * dim)
    return Chart(dim=dim, box=box, orientation=orientation)


def stereographic_chart(half: float = 2.0, orientation: int = -1) -> Chart:
    """Stereographic chart of the round 4-sphere.

    The orientation is chosen so that the reference instanton is self-dual
    and carries charge +1 (see the topological-charge tests).
    """
    box = np.array([[-half, half]] * 4)
    return Chart(dim=4, box=box, orientation=orientation,
                 metric_kind="round-sphere-stereographic")


def minkowski_chart(half: float = 1.0) -> Chart:
    box = np.array([[-half, half]] * 4)
    return Chart(dim=4, box=box, metric_kind="minkowski")


# ---------------------------------------------------------------------------
# polynomial payload
# ---------------------------------------------------------------------------

class PolyData:
    """Polynomial components: idx -> list of (coefficient array, exponent vector)."""

    def __init__(self, n, degree, value_shape, terms):
        self.n = n
        self.degree = degree
        self.value_shape = tuple(value_shape)
        # normalize: tuples of (ndarray coef, ndarray int expo)
        self.terms = {}
        for idx, lst in terms.items():
            idx = tuple(idx)
            cleaned = [(np.asarray(c, dtype=float), np.asarray(e, dtype=int))
                       for c, e in lst]
            cleaned = [(c, e) for c, e in cleaned if np.abs(c).max() != 0.0]
            if cleaned:
                self.terms[idx] = cleaned

    def evaluate(self, x, idx):
        out = np.zeros(self.value_shape)
        for coef, expo in self.terms.get(tuple(idx), ()):
            out = out + coef * np.prod(np.asarray(x) ** expo)
        return out

    def d(self) -> "PolyData":
        """Exact exterior derivative of the payload."""
        new = {}
        for J in increasing_indices(self.n, self.degree + 1):
            acc = []
            for pos in range(len(J)):
                j = J[pos]
                sub = J[:pos] + J[pos + 1:]
                for coef, expo in self.terms.get(sub, ()):
                    if expo[j] == 0:
                        continue
                    e2 = expo.copy()
                    e2[j] -= 1
                    acc.append(((-1.0) ** pos * expo[j] * coef, e2))
            if acc:
                new[J] = acc
        return PolyData(self.n, self.degree + 1, self.value_shape, new)

    def combine(self, other, alpha=1.0, beta=1.0) -> "PolyData":
        terms = {}
        for idx, lst in self.terms.items():
            terms.setdefault(idx, []).extend((alpha * c, e) for c, e in lst)
        for idx, lst in other.terms.items():
            terms.setdefault(idx, []).extend((beta * c, e) for c, e in lst)
        return PolyData(self.n, self.degree, self.value_shape, terms)

    def scaled(self, alpha) -> "PolyData":
        return PolyData(self.n, self.degree, self.value_shape,
                        {i: [(alpha * c, e) for c, e in lst]
                         for i, lst in self.terms.items()})

    def to_json(self):
        return {
            "degree": self.degree,
            "terms": {",".join(map(str, idx)): [
                {"coeffs": c.tolist(), "exponents": e.tolist()} for c, e in lst]
                for idx, lst in self.terms.items()},
        }

    @staticmethod
    def from_json(n, value_shape, blob) -> "PolyData":
        terms = {}
        for key, lst in blob.get("terms", {}).items():
            idx = tuple(int(s) for s in key.split(",")) if key else ()
            terms[idx] = [(np.asarray(t["coeffs"], dtype=float),
                           np.asarray(t["exponents"], dtype=int)) for t in lst]
        return PolyData(n, int(blob["degree"]), value_shape, terms)


# ---------------------------------------------------------------------------
# the form container
# ---------------------------------------------------------------------------

@dataclass
class LieForm:
    """A degree-k form with values in the algebra, its endomorphisms, or scalars."""

    n: int
    degree: int
    value_target: str          # "algebra" | "endomorphism" | "scalar"
    value_shape: tuple
    components: callable       # (x, increasing idx tuple) -> ndarray value_shape
    analytic_d: callable = None
    fd_step: float = 1e-5
    box: np.ndarray = None
    poly: PolyData = field(default=None, repr=False)

    def __call__(self, x, *vectors):
        return eval_form(self, x, vectors)

    def has_exact_d(self) -> bool:
        return self.poly is not None or self.analytic_d is not None

    def component_table(self, x) -> dict:
        return {idx: self.components(x, idx)
                for idx in increasing_indices(self.n, self.degree)}


def zero_form(n, degree, value_target, value_shape, box=None) -> LieForm:
    z = np.zeros(value_shape)
    return LieForm(n=n, degree=degree, value_target=value_target,
                   value_shape=tuple(value_shape),
                   components=lambda x, idx: z,
                   analytic_d=lambda x, idx: np.zeros(value_shape),
                   box=box,
                   poly=PolyData(n, degree, value_shape, {}))


def constant_form(n, degree, value_target, table, box=None) -> LieForm:
    """Form with constant components; `table` maps increasing idx -> value."""
    shape = np.asarray(next(iter(table.values()))).shape
    terms = {idx: [(np.asarray(v, dtype=float), np.zeros(n, dtype=int))]
             for idx, v in table.items()}
    return form_from_poly(n, degree, value_target, shape,
                          PolyData(n, degree, shape, terms), box=box)


def form_from_poly(n, degree, value_target, value_shape, poly: PolyData,
                   box=None, fd_step=1e-5) -> LieForm:
    dpoly = poly.d()
    return LieForm(n=n, degree=degree, value_target=value_target,
                   value_shape=tuple(value_shape), components=poly.evaluate,
                   analytic_d=dpoly.evaluate, fd_step=fd_step, box=box, poly=poly)


def eval_form(f: LieForm, x, vectors) -> np.ndarray:
    """Evaluate on tangent vectors: sum over increasing indices of
    component(x, I) * det(rows of the vectors restricted to I)."""
    vectors = [np.asarray(v, dtype=float) for v in vectors]
    if len(vectors) != f.degree:
        raise ValueError(f"degree-{f.degree} form needs {f.degree} vectors")
    if f.degree == 0:
        return f.components(x, ())
    V = np.stack(vectors)
    out = np.zeros(f.value_shape)
    for idx in increasing_indices(f.n, f.degree):
        sub = V[:, idx]
        det = sub[0, 0] if f.degree == 1 else np.linalg.det(sub)
        if det != 0.0:
            out = out + f.components(x, idx) * det
    return out


def add_forms(a: LieForm, b: LieForm, alpha=1.0, beta=1.0) -> LieForm:
    if (a.n, a.degree, a.value_shape) != (b.n, b.degree, b.value_shape):
        raise ValueError("can only add forms of equal chart dim, degree and value shape")
    if a.poly is not None and b.poly is not None:
        return form_from_poly(a.n, a.degree, a.value_target, a.value_shape,
                              a.poly.combine(b.poly, alpha, beta),
                              box=a.box if a.box is not None else b.box,
                              fd_step=max(a.fd_step, b.fd_step))
    comp = lambda x, idx: alpha * a.components(x, idx) + beta * b.components(x, idx)
    dcomp = None
    if a.has_exact_d() and b.has_exact_d():
        da, db = exterior_derivative(a), exterior_derivative(b)
        dcomp = lambda x, idx: alpha * da.components(x, idx) + beta * db.components(x, idx)
    return LieForm(n=a.n, degree=a.degree, value_target=a.value_target,
                   value_shape=a.value_shape, components=comp, analytic_d=dcomp,
                   fd_step=max(a.fd_step, b.fd_step),
                   box=a.box if a.box is not None else b.box)


def scale_form(a: LieForm, alpha: float) -> LieForm:
    if a.poly is not None:
        return form_from_poly(a.n, a.degree, a.value_target, a.value_shape,
                              a.poly.scaled(alpha), box=a.box, fd_step=a.fd_step)
    comp = lambda x, idx: alpha * a.components(x, idx)
    dcomp = (lambda x, idx: alpha * a.analytic_d(x, idx)) if a.analytic_d else None
    return replace(a, components=comp, analytic_d=dcomp)


# ---------------------------------------------------------------------------
# exterior derivative
# ---------------------------------------------------------------------------

def _partial(f: LieForm, x, axis, idx, h):
    """d/dx_axis of one component; one-sided at the box edge (order loss)."""
    x = np.asarray(x, dtype=float)
    step = np.zeros(f.n)
    step[axis] = h
    if f.box is not None:
        lo, hi = f.box[axis]
        if x[axis] + h > hi:
            _ORDER_LOSS.append((tuple(x), axis))
            return (f.components(x, idx) - f.components(x - step, idx)) / h
        if x[axis] - h < lo:
            _ORDER_LOSS.append((tuple(x), axis))
            return (f.components(x + step, idx) - f.components(x, idx)) / h
    return (f.components(x + step, idx) - f.components(x - step, idx)) / (2 * h)


def exterior_derivative(f: LieForm) -> LieForm:
    """d on forms. Polynomial payloads are differentiated exactly; an
    analytic_d callable is used verbatim (and the result is exactly closed);
    otherwise central finite differences with the form's step."""
    if f.degree >= f.n:
        return zero_form(f.n, min(f.degree + 1, f.n), f.value_target,
                         f.value_shape, box=f.box)
    if f.poly is not None:
        return form_from_poly(f.n, f.degree + 1, f.value_target, f.value_shape,
                              f.poly.d(), box=f.box, fd_step=f.fd_step)
    if f.analytic_d is not None:
        return LieForm(n=f.n, degree=f.degree + 1, value_target=f.value_target,
                       value_shape=f.value_shape, components=f.analytic_d,
                       analytic_d=lambda x, idx: np.zeros(f.value_shape),
                       fd_step=f.fd_step, box=f.box)

    def comp(x, J):
        out = np.zeros(f.value_shape)
        for pos in range(len(J)):
            sub = J[:pos] + J[pos + 1:]
            out = out + (-1.0) ** pos * _partial(f, x, J[pos], sub, f.fd_step)
        return out

    # a second derivative of FD output needs a wider stencil to stay stable
    return LieForm(n=f.n, degree=f.degree + 1, value_target=f.value_target,
                   value_shape=f.value_shape, components=comp,
                   fd_step=10 * f.fd_step, box=f.box)


# ---------------------------------------------------------------------------
# graded products
# ---------------------------------------------------------------------------

@dataclass
class Pairing:
    """Constant bilinear pairing on values, with declared output shape/target."""

    fn: callable
    out_shape: tuple
    out_target: str


def bracket_pairing(alg: LieAlgebraDescriptor) -> Pairing:
    c = alg.structure_constants
    return Pairing(lambda u, v: np.einsum('a,b,abk->k', u, v, c),
                   (alg.dim,), "algebra")


def kappa_pairing(alg: LieAlgebraDescriptor) -> Pairing:
    k = alg.kappa
    return Pairing(lambda u, v: np.array(u @ k @ v), (), "scalar")


def endo_action_pairing(alg: LieAlgebraDescriptor) -> Pairing:
    return Pairing(lambda m, v: m @ v, (alg.dim,), "algebra")


def endo_compose_pairing(alg: LieAlgebraDescriptor) -> Pairing:
    return Pairing(lambda m, nn: m @ nn, (alg.dim, alg.dim), "endomorphism")


@lru_cache(maxsize=None)
def _shuffles(k: int, m: int):
    """(positions for the first factor, complementary positions, sign)."""
    out = []
    for S in itertools.combinations(range(k + m), k):
        T = tuple(i for i in range(k + m) if i not in S)
        inversions = sum(1 for i in S for j in T if i > j)
        out.append((S, T, (-1.0) ** inversions))
    return tuple(out)


def graded_product(pairing: Pairing, a: LieForm, b: LieForm) -> LieForm:
    """Graded extension of a bilinear pairing: the 1/(k! m!) permutation sum,
    evaluated as a signed sum over (k, m)-shuffles of the factors' components."""
    if a.n != b.n:
        raise ValueError("forms live on charts of different dimension")
    k, m, n = a.degree, b.degree, a.n
    deg = k + m
    box = a.box if a.box is not None else b.box
    if deg > n:
        return zero_form(n, n, pairing.out_target, pairing.out_shape, box=box)

    if a.poly is not None and b.poly is not None:
        terms = {}
        for K in increasing_indices(n, deg):
            acc = []
            for S, T, sign in _shuffles(k, m):
                ia = tuple(K[i] for i in S)
                ib = tuple(K[i] for i in T)
                for ca, ea in a.poly.terms.get(ia, ()):
                    for cb, eb in b.poly.terms.get(ib, ()):
                        acc.append((sign * pairing.fn(ca, cb), ea + eb))
            if acc:
                terms[K] = acc
        return form_from_poly(n, deg, pairing.out_target, pairing.out_shape,
                              PolyData(n, deg, pairing.out_shape, terms),
                              box=box, fd_step=max(a.fd_step, b.fd_step))

    def comp(x, K):
        out = np.zeros(pairing.out_shape)
        for S, T, sign in _shuffles(k, m):
            va = a.components(x, tuple(K[i] for i in S))
            vb = b.components(x, tuple(K[i] for i in T))
            out = out + sign * pairing.fn(va, vb)
        return out

    dcomp = None
    if a.has_exact_d() and b.has_exact_d():
        # graded Leibniz: d F(a^,b) = F(da^,b) + (-1)^k F(a^,db)
        da, db = exterior_derivative(a), exterior_derivative(b)
        lhs = graded_product(pairing, da, b)
        rhs = graded_product(pairing, a, db)
        dcomp = lambda x, idx: lhs.components(x, idx) + (-1.0) ** k * rhs.components(x, idx)

    return LieForm(n=n, degree=deg, value_target=pairing.out_target,
                   value_shape=pairing.out_shape, components=comp,
                   analytic_d=dcomp, fd_step=max(a.fd_step, b.fd_step), box=box)


# ---------------------------------------------------------------------------
# Hodge star and top-degree pairings
# ---------------------------------------------------------------------------

def hodge_star(chart: Chart, f: LieForm) -> LieForm:
    """Musical-isomorphism star: raise the k indices with the inverse metric,
    contract with the Levi-Civita symbol, scale by sqrt|det g| and the chart
    orientation. Works for any metric signature (|det| under the root)."""
    n, k = f.n, f.degree
    if chart.dim != n:
        raise ValueError("chart/form dimension mismatch")
    eps = _levi_civita(n)
    kfact = math.factorial(k)

    def comp(x, J):
        g = chart.metric(np.asarray(x, dtype=float))
        ginv = np.linalg.inv(g)
        scale = chart.orientation * np.sqrt(abs(np.linalg.det(g)))
        # dense antisymmetric component array with trailing value axes
        dense = np.zeros((n,) * k + f.value_shape)
        for I in increasing_indices(n, k):
            v = f.components(x, I)
            for perm in itertools.permutations(range(k)):
                target = tuple(I[p] for p in perm)
                dense[target] = _perm_sign(perm) * v
        for axis in range(k):
            dense = np.tensordot(ginv, dense, axes=(1, axis))
            dense = np.moveaxis(dense, 0, axis)
        eslice = eps[(slice(None),) * k + tuple(J)]
        out = np.tensordot(eslice, dense, axes=(tuple(range(k)), tuple(range(k))))
        return scale / kfact * out

    return LieForm(n=n, degree=n - k, value_target=f.value_target,
                   value_shape=f.value_shape, components=comp,
                   fd_step=f.fd_step, box=f.box)


def kappa_wedge_top(alg: LieAlgebraDescriptor, f: LieForm, g: LieForm) -> LieForm:
    """Invariant-pairing wedge into the top degree (scalar-valued density form)."""
    if f.degree + g.degree != f.n:
        raise ValueError("kappa wedge needs degrees summing to the chart dimension")
    return graded_product(kappa_pairing(alg), f, g)


def top_coefficient(form: LieForm, x) -> float:
    """Coefficient of the top form on the full increasing index (0, ..., n-1)."""
    if form.degree != form.n:
        raise ValueError("not a top-degree form")
    return float(np.asarray(form.components(x, tuple(range(form.n)))))


# ---------------------------------------------------------------------------
# sampling plans
# ---------------------------------------------------------------------------

@dataclass
class SamplePlan:
    """Deterministic point/tangent sampling: same (mode, count, seed, box)
    always yields the same sequence."""

    mode: str = "random"
    count: int = 64
    seed: int = 42
    tangent_probes: int = 4

    def __post_init__(self):
        if self.mode not in ("random", "grid"):
            raise ValueError("mode must be 'random' or 'grid'")
        if self.tangent_probes < 2:
            raise ValueError("need at least two tangent probes")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def points(self, chart: Chart) -> np.ndarray:
        lo = chart.box[:, 0].copy()
        hi = chart.box[:, 1].copy()
        margin = 1e-3 * chart.half_width()  # keep FD stencils inside the box
        lo += margin
        hi -= margin
        if self.mode == "random":
            u = self.rng().random((self.count, chart.dim))
            return lo + u * (hi - lo)
        per_axis = max(2, math.ceil(self.count ** (1.0 / chart.dim)))
        axes = [np.linspace(lo[i], hi[i], per_axis) for i in range(chart.dim)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        return mesh.reshape(-1, chart.dim)[:self.count]

    def tangents(self, rng: np.random.Generator, n: int, count=None) -> np.ndarray:
        return rng.normal(size=(count or self.tangent_probes, n))

    def to_json(self):
        return {"mode": self.mode, "count": self.count, "seed": self.seed,
                "tangent_probes": self.tangent_probes}

    @staticmethod
    def from_json(blob) -> "SamplePlan":
        return SamplePlan(mode=blob.get("mode", "random"),
                          count=int(blob.get("count", 64)),
                          seed=int(blob.get("seed", 42)),
                          tangent_probes=int(blob.get("tangent_probes", 4)))
