"""Finite-dimensional Lie algebra kernel with a faithful matrix representation.

A `LieAlgebraDescriptor` packages everything downstream code needs about the
fibre type: structure constants, a faithful complex matrix representation,
an invariant pairing, and the block structure of the associated matrix group.
Built-ins cover su(2) in the basis e_a = sigma_a/(2i) (so [e1,e2] = e3 and the
-2*trace pairing is the identity matrix), u(1) with generator [[i]], and their
direct sum.

All heavy lifting is plain numpy; the matrix exponential goes through
scipy.linalg.expm, with a hand-written cos/sin closed form for su(2) kept
alongside as an independent cross-check.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

__all__ = [
    "LieAlgebraDescriptor",
    "AlgebraElement",
    "GroupElement",
    "StructureError",
    "VarietyError",
    "ReexpansionError",
    "su2",
    "u1",
    "u1_su2",
    "direct_sum",
    "algebra_from_name",
    "algebra_from_dict",
    "algebra_to_dict",
    "bracket",
    "exp_elem",
    "exp_su2_closed",
    "adjoint_group",
    "ad_matrix_of_group",
    "adjoint_algebra",
    "kappa_pair",
    "expand_in_rep",
    "random_algebra_coeffs",
]

# Pauli matrices
SIGMA = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

JACOBI_TOL = 1e-12
REP_TOL = 1e-12
KAPPA_TOL = 1e-10
VARIETY_TOL = 1e-10
REEXPANSION_TOL = 1e-10


class StructureError(ValueError):
    """Raised when descriptor data fails a structural identity."""


class VarietyError(ValueError):
    """Raised when a matrix does not lie on the declared group variety."""


class ReexpansionError(ValueError):
    """Raised when a matrix expected to lie in the representation span does not."""


@dataclass
class LieAlgebraDescriptor:
    """Structure constants, representation, pairing and group variety data.

    Attributes:
      dim: number of basis elements.
      basis_labels: names for the basis, length dim.
      structure_constants: array c[a, b, k] with [e_a, e_b] = sum_k c[a,b,k] e_k.
      rep_dim: size of the representation matrices.
      rep_matrices: complex (dim, rep_dim, rep_dim), rep of each basis element.
      kappa: symmetric invariant pairing on the algebra, (dim, dim) real.
      center_mask: boolean (dim,), True exactly where ad(e_a) == 0.
      variety_blocks: tuple of ("u"|"su", offset, size) describing the diagonal
        block structure of group-variety matrices.
      name: optional human-readable tag ("su2", ...).
    """

    dim: int
    basis_labels: tuple
    structure_constants: np.ndarray
    rep_dim: int
    rep_matrices: np.ndarray
    kappa: np.ndarray
    center_mask: np.ndarray
    variety_blocks: tuple
    name: str = ""
    # filled in __post_init__, used by the hot re-expansion path
    _gram_inv: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.structure_constants = np.asarray(self.structure_constants, dtype=float)
        self.rep_matrices = np.asarray(self.rep_matrices, dtype=complex)
        self.kappa = np.asarray(self.kappa, dtype=float)
        self.center_mask = np.asarray(self.center_mask, dtype=bool)
        self._validate()
        reps = self.rep_matrices.reshape(self.dim, -1)
        gram = (reps.conj() @ reps.T).real
        self._gram_inv = np.linalg.inv(gram)

    # -- validation ---------------------------------------------------------

    def _validate(self):
        c = self.structure_constants
        d = self.dim
        if c.shape != (d, d, d):
            raise StructureError(f"structure constants must be ({d},{d},{d}), got {c.shape}")
        if len(self.basis_labels) != d:
            raise StructureError("basis_labels length must equal dim")
        if np.abs(c + np.swapaxes(c, 0, 1)).max() > JACOBI_TOL:
            raise StructureError("structure constants are not antisymmetric in (a, b)")

        # Jacobi: [[ea,eb],ec] + [[eb,ec],ea] + [[ec,ea],eb] = 0
        for a, b, e in itertools.combinations(range(d), 3):
            resid = (np.einsum('k,kcm->cm', c[a, b], c)[e]
                     + np.einsum('k,kcm->cm', c[b, e], c)[a]
                     + np.einsum('k,kcm->cm', c[e, a], c)[b])
            if np.abs(resid).max() > JACOBI_TOL:
                raise StructureError(
                    f"Jacobi identity fails on basis triple ({a}, {b}, {e}): "
                    f"max residual {np.abs(resid).max():.3e}")

        if self.rep_matrices.shape != (d, self.rep_dim, self.rep_dim):
            raise StructureError("rep_matrices shape mismatch")
        for a in range(d):
            for b in range(d):
                comm = self.rep_matrices[a] @ self.rep_matrices[b] \
                    - self.rep_matrices[b] @ self.rep_matrices[a]
                model = np.einsum('k,kij->ij', c[a, b], self.rep_matrices)
                if np.abs(comm - model).max() > REP_TOL:
                    raise StructureError(
                        f"representation does not reproduce the bracket on ({a}, {b})")

        if self.kappa.shape != (d, d) or np.abs(self.kappa - self.kappa.T).max() > KAPPA_TOL:
            raise StructureError("kappa must be a symmetric (dim, dim) matrix")
        if np.linalg.svd(self.kappa, compute_uv=False).min() < 1e-8:
            raise StructureError("kappa is degenerate")
        # ad-invariance: kappa([x, y], z) + kappa(y, [x, z]) = 0 on the basis
        inv = np.einsum('abk,kc->abc', c, self.kappa) \
            + np.einsum('ack,bk->abc', c, self.kappa)
        if np.abs(inv).max() > KAPPA_TOL:
            raise StructureError("kappa is not ad-invariant")

        ad_norms = np.abs(c).max(axis=(1, 2))
        central = ad_norms <= JACOBI_TOL
        if self.center_mask.shape != (d,) or not np.array_equal(central, self.center_mask):
            raise StructureError("center_mask disagrees with ad(e_a) == 0")

        covered = sorted(i for _, off, size in self.variety_blocks
                         for i in range(off, off + size))
        if covered != list(range(self.rep_dim)):
            raise StructureError("variety_blocks must tile the representation space")

    # -- helpers ------------------------------------------------------------

    def rep_of(self, coeffs) -> np.ndarray:
        """Representation matrix of an algebra element given by coefficients."""
        return np.einsum('a,aij->ij', np.asarray(coeffs, dtype=float), self.rep_matrices)

    def element(self, coeffs) -> "AlgebraElement":
        return AlgebraElement(self, np.asarray(coeffs, dtype=float))

    def basis_element(self, a: int) -> "AlgebraElement":
        v = np.zeros(self.dim)
        v[a] = 1.0
        return AlgebraElement(self, v)

    def group_identity(self) -> "GroupElement":
        return GroupElement(self, np.eye(self.rep_dim, dtype=complex))


@dataclass
class AlgebraElement:
    """An element of the Lie algebra, stored as basis coefficients."""

    algebra: LieAlgebraDescriptor
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.algebra.dim,):
            raise ValueError(f"coefficient vector must have length {self.algebra.dim}")

    def __add__(self, other):
        return AlgebraElement(self.algebra, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return AlgebraElement(self.algebra, self.coeffs - other.coeffs)

    def __rmul__(self, scalar):
        return AlgebraElement(self.algebra, float(scalar) * self.coeffs)

    def __neg__(self):
        return AlgebraElement(self.algebra, -self.coeffs)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def kappa_norm(self) -> float:
        q = float(self.coeffs @ self.algebra.kappa @ self.coeffs)
        return float(np.sqrt(max(q, 0.0)))

    def rep(self) -> np.ndarray:
        return self.algebra.rep_of(self.coeffs)


@dataclass
class GroupElement:
    """A group-variety matrix in the representation space.

    The variety membership (block structure, unitarity, unit determinant on
    special blocks) is checked once at construction, not on every operation.
    """

    algebra: LieAlgebraDescriptor
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        n = self.algebra.rep_dim
        if self.matrix.shape != (n, n):
            raise VarietyError(f"group matrix must be {n}x{n}")
        resid = variety_residual(self.algebra, self.matrix)
        if resid > VARIETY_TOL:
            raise VarietyError(f"matrix off the group variety by {resid:.3e}")

    def inverse(self) -> "GroupElement":
        return GroupElement(self.algebra, self.matrix.conj().T)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.algebra, self.matrix @ other.matrix)


def variety_residual(alg: LieAlgebraDescriptor, matrix: np.ndarray) -> float:
    """Distance of a matrix from the declared group variety.

    Off-block entries must vanish, each block must be unitary, and "su"
    blocks must additionally have unit determinant.
    """
    worst = 0.0
    mask = np.zeros_like(matrix, dtype=bool)
    for kind, off, size in alg.variety_blocks:
        blk = matrix[off:off + size, off:off + size]
        mask[off:off + size, off:off + size] = True
        worst = max(worst, np.abs(blk.conj().T @ blk - np.eye(size)).max())
        if kind == "su":
            worst = max(worst, abs(np.linalg.det(blk) - 1.0))
    if not mask.all():
        worst = max(worst, np.abs(matrix[~mask]).max(initial=0.0))
    return float(worst)


# ---------------------------------------------------------------------------
# built-in descriptors
# ---------------------------------------------------------------------------

def su2() -> LieAlgebraDescriptor:
    """su(2) in the basis e_a = sigma_a/(2i): [e1,e2]=e3 cyclic, kappa = -2tr = id."""
    reps = SIGMA / 2j
    c = np.zeros((3, 3, 3))
    for a, b, k in itertools.permutations(range(3)):
        c[a, b, k] = _eps3(a, b, k)
    kappa = np.array([[-2 * np.trace(x @ y).real for y in reps] for x in reps])
    return LieAlgebraDescriptor(
        dim=3, basis_labels=("e1", "e2", "e3"), structure_constants=c,
        rep_dim=2, rep_matrices=reps, kappa=kappa,
        center_mask=np.zeros(3, dtype=bool), variety_blocks=(("su", 0, 2),),
        name="su2")


def u1() -> LieAlgebraDescriptor:
    """u(1) with generator [[i]]; exp(t) is the phase e^{it}. kappa = [[1]]."""
    return LieAlgebraDescriptor(
        dim=1, basis_labels=("t",), structure_constants=np.zeros((1, 1, 1)),
        rep_dim=1, rep_matrices=np.array([[[1j]]]), kappa=np.array([[1.0]]),
        center_mask=np.ones(1, dtype=bool), variety_blocks=(("u", 0, 1),),
        name="u1")


def direct_sum(a: LieAlgebraDescriptor, b: LieAlgebraDescriptor,
               name: str = "") -> LieAlgebraDescriptor:
    """Block direct sum of two descriptors (algebra, rep, pairing, variety)."""
    d = a.dim + b.dim
    c = np.zeros((d, d, d))
    c[:a.dim, :a.dim, :a.dim] = a.structure_constants
    c[a.dim:, a.dim:, a.dim:] = b.structure_constants
    rd = a.rep_dim + b.rep_dim
    reps = np.zeros((d, rd, rd), dtype=complex)
    reps[:a.dim, :a.rep_dim, :a.rep_dim] = a.rep_matrices
    reps[a.dim:, a.rep_dim:, a.rep_dim:] = b.rep_matrices
    kappa = np.zeros((d, d))
    kappa[:a.dim, :a.dim] = a.kappa
    kappa[a.dim:, a.dim:] = b.kappa
    mask = np.concatenate([a.center_mask, b.center_mask])
    blocks = tuple((k, off, s) for k, off, s in a.variety_blocks) + tuple(
        (k, off + a.rep_dim, s) for k, off, s in b.variety_blocks)
    return LieAlgebraDescriptor(
        dim=d, basis_labels=tuple(a.basis_labels) + tuple(b.basis_labels),
        structure_constants=c, rep_dim=rd, rep_matrices=reps, kappa=kappa,
        center_mask=mask, variety_blocks=blocks,
        name=name or f"{a.name}+{b.name}")


def u1_su2() -> LieAlgebraDescriptor:
    return direct_sum(u1(), su2(), name="u1+su2")


_BUILTINS = {"su2": su2, "u1": u1, "u1+su2": u1_su2}


def algebra_from_name(name: str) -> LieAlgebraDescriptor:
    try:
        return _BUILTINS[name]()
    except KeyError:
        raise StructureError(f"unknown built-in algebra {name!r}; "
                             f"choose from {sorted(_BUILTINS)}") from None


def _eps3(a, b, k):
    return float(np.sign(np.linalg.det(np.eye(3)[[a, b, k]])))


# ---------------------------------------------------------------------------
# serialization (complex entries as [re, im] pairs)
# ---------------------------------------------------------------------------

def algebra_to_dict(alg: LieAlgebraDescriptor) -> dict:
    if alg.name in _BUILTINS:
        return {"name": alg.name}
    reps = np.stack([alg.rep_matrices.real, alg.rep_matrices.imag], axis=-1)
    return {
        "dim": alg.dim,
        "basis_labels": list(alg.basis_labels),
        "structure_constants": alg.structure_constants.tolist(),
        "rep_matrices": reps.tolist(),
        "kappa": alg.kappa.tolist(),
        "variety_blocks": [list(b) for b in alg.variety_blocks],
    }


def algebra_from_dict(data) -> LieAlgebraDescriptor:
    if isinstance(data, str):
        return algebra_from_name(data)
    if "name" in data and set(data) == {"name"}:
        return algebra_from_name(data["name"])
    raw = np.asarray(data["rep_matrices"], dtype=float)
    reps = raw[..., 0] + 1j * raw[..., 1]
    c = np.asarray(data["structure_constants"], dtype=float)
    ad_norms = np.abs(c).max(axis=(1, 2))
    return LieAlgebraDescriptor(
        dim=int(data["dim"]),
        basis_labels=tuple(data["basis_labels"]),
        structure_constants=c,
        rep_dim=reps.shape[-1],
        rep_matrices=reps,
        kappa=np.asarray(data["kappa"], dtype=float),
        center_mask=ad_norms <= JACOBI_TOL,
        variety_blocks=tuple((str(k), int(o), int(s))
                             for k, o, s in data["variety_blocks"]),
        name=str(data.get("label", "")))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def bracket(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    """Lie bracket via structure-constant contraction."""
    alg = x.algebra
    out = np.einsum('a,b,abk->k', x.coeffs, y.coeffs, alg.structure_constants)
    return AlgebraElement(alg, out)


def bracket_c(alg: LieAlgebraDescriptor, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Coefficient-level bracket, the hot-loop variant of `bracket`."""
    return np.einsum('a,b,abk->k', u, v, alg.structure_constants)


def exp_elem(x: AlgebraElement) -> GroupElement:
    """Exponential of an algebra element into the group variety (Pade/series path)."""
    return GroupElement(x.algebra, expm(x.rep()))


def exp_su2_closed(x: AlgebraElement) -> GroupElement:
    """Closed-form su(2) exponential: cos(t/2) I - i sin(t/2) (n . sigma), t = |X|.

    Only valid on the pure su(2) descriptor; used as an independent check of
    the series path.
    """
    if x.algebra.name != "su2":
        raise ValueError("closed-form exponential is defined for the su2 descriptor")
    t = np.linalg.norm(x.coeffs)
    if t < 1e-300:
        return x.algebra.group_identity()
    n = x.coeffs / t
    mat = np.cos(t / 2) * np.eye(2) - 1j * np.sin(t / 2) * np.einsum('a,aij->ij', n, SIGMA)
    return GroupElement(x.algebra, mat)


def expand_in_rep(alg: LieAlgebraDescriptor, matrix: np.ndarray):
    """Project a rep-space matrix onto span{rep_matrices}.

    Returns (coeffs, residual) where residual is the Frobenius norm of the
    out-of-span component. Real coefficients are assumed (the span is a real
    form); the imaginary part of the Gram data is discarded accordingly.
    """
    flat = matrix.reshape(-1)
    reps = alg.rep_matrices.reshape(alg.dim, -1)
    proj = (reps.conj() @ flat).real
    coeffs = alg._gram_inv @ proj
    resid = np.linalg.norm(flat - coeffs @ reps)
    return coeffs, float(resid)


def adjoint_group(g: GroupElement, x: AlgebraElement) -> AlgebraElement:
    """Ad_g(x) = g x g^{-1}, re-expanded in the basis.

    Raises ReexpansionError if the conjugated matrix drifts out of the
    representation span by more than 1e-10.
    """
    alg = g.algebra
    m = g.matrix @ x.rep() @ g.matrix.conj().T
    coeffs, resid = expand_in_rep(alg, m)
    if resid > REEXPANSION_TOL * max(1.0, np.linalg.norm(x.coeffs)):
        raise ReexpansionError(f"adjoint image off the algebra span by {resid:.3e}")
    return AlgebraElement(alg, coeffs)


def ad_matrix_of_group(alg: LieAlgebraDescriptor, g_matrix: np.ndarray) -> np.ndarray:
    """Matrix of Ad_g acting on basis coefficients (columns are Ad_g(e_b))."""
    if alg.center_mask.all():
        # abelian: conjugation is the identity, exactly
        return np.eye(alg.dim)
    ginv = g_matrix.conj().T
    out = np.empty((alg.dim, alg.dim))
    for b in range(alg.dim):
        m = g_matrix @ alg.rep_matrices[b] @ ginv
        coeffs, resid = expand_in_rep(alg, m)
        if resid > REEXPANSION_TOL:
            raise ReexpansionError(f"Ad image of basis element {b} off span by {resid:.3e}")
        out[:, b] = coeffs
    return out


def adjoint_algebra(x: AlgebraElement) -> np.ndarray:
    """ad(x) as a (dim, dim) matrix on coefficients: ad(x)[k,b] = sum_a x^a c[a,b,k]."""
    return ad_matrix_c(x.algebra, x.coeffs)


def ad_matrix_c(alg: LieAlgebraDescriptor, coeffs: np.ndarray) -> np.ndarray:
    return np.einsum('a,abk->kb', np.asarray(coeffs, dtype=float),
                     alg.structure_constants)


def kappa_pair(x: AlgebraElement, y: AlgebraElement) -> float:
    return float(x.coeffs @ x.algebra.kappa @ y.coeffs)


def random_algebra_coeffs(alg: LieAlgebraDescriptor, rng: np.random.Generator,
                          count: int, scale: float = 1.0) -> np.ndarray:
    """Deterministic batch of coefficient vectors for sampling plans."""
    return rng.normal(scale=scale, size=(count, alg.dim))
