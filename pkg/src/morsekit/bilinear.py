"""Symmetric bilinear forms on finite-dimensional inner-product spaces.

Two arithmetic backends share one API.  Exact matrices are numpy object
arrays of ``fractions.Fraction``; floating matrices are float64.  The
backend is inferred from the dtype and never mixed within one space.
Sign counts on the exact backend are computed by rational congruence
diagonalization, so they are unconditionally correct; the floating
backend classifies eigenvalues against a zero band and reports marginal
cases instead of hiding them.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import exactla
from .errors import (
    EigensolverFailure,
    IsotropicDirection,
    NonSymmetric,
    NotNegativeDirection,
    NotPositiveDefinite,
    UnsupportedBackend,
)
from .tolerances import DEFAULT, Tolerances, classify_spectrum, zero_band


def as_backend_matrix(matrix, exact: bool | None = None) -> np.ndarray:
    """Normalize input to a square object-Fraction or float64 array."""
    arr = np.asarray(matrix)
    if exact is None:
        exact = arr.dtype == object
    return exactla.frac_matrix(arr) if exact else arr.astype(float)


def as_backend_vector(vec, exact: bool) -> np.ndarray:
    arr = np.asarray(vec)
    return exactla.frac_vector(arr) if exact else arr.astype(float)


def _check_symmetric(matrix: np.ndarray, tol: Tolerances, what: str) -> None:
    if matrix.dtype == object:
        if not np.array_equal(matrix, matrix.T):
            raise NonSymmetric(f"{what} is not symmetric")
        return
    scale = float(np.max(np.abs(matrix))) if matrix.size else 0.0
    gap = float(np.max(np.abs(matrix - matrix.T))) if matrix.size else 0.0
    if gap > tol.symmetry * max(1.0, scale):
        raise NonSymmetric(f"{what} is not symmetric within tolerance "
                           f"(max asymmetry {gap:.3e})")


def _eigh(matrix: np.ndarray, gram: np.ndarray | None = None):
    """Eigenvalues (and vectors) via LAPACK, wrapped in our error type."""
    if matrix.shape[0] == 0:
        n = 0
        return np.empty(0), np.empty((0, 0))
    try:
        if gram is None:
            return scipy.linalg.eigh(matrix)
        return scipy.linalg.eigh(matrix, gram)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise EigensolverFailure(str(exc)) from exc


@dataclass(frozen=True, eq=False)
class InnerProductSpace:
    """R^dim with a symmetric positive definite Gram matrix.

    dim = 0 is allowed so that a full set of constraints can restrict a
    form down to the empty space.
    """

    gram: np.ndarray
    tol: Tolerances = field(default=DEFAULT, compare=False)

    def __post_init__(self):
        g = as_backend_matrix(self.gram)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise NotPositiveDefinite("gram matrix must be square")
        _check_symmetric(g, self.tol, "gram matrix")
        if g.dtype == object:
            neg, zero, _ = exactla.inertia_counts(g)
            if neg or zero:
                raise NotPositiveDefinite("gram matrix is not positive definite")
        elif g.shape[0] > 0:
            w = np.linalg.eigvalsh(g)
            if w[0] <= zero_band(w, self.tol):
                raise NotPositiveDefinite("gram matrix is not positive definite")
        object.__setattr__(self, "gram", g)

    @classmethod
    def euclidean(cls, dim: int, exact: bool = False, tol: Tolerances = DEFAULT):
        g = exactla.identity(dim) if exact else np.eye(dim)
        return cls(g, tol)

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    @property
    def exact(self) -> bool:
        return self.gram.dtype == object

    def inner(self, u, v):
        u = as_backend_vector(u, self.exact)
        v = as_backend_vector(v, self.exact)
        return u.dot(self.gram.dot(v))

    def norm_sq(self, u):
        return self.inner(u, u)


@dataclass(frozen=True, eq=False)
class SymmetricForm:
    """Bilinear form S(u, v) = u^T A v with symmetric A on a given space."""

    space: InnerProductSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = as_backend_matrix(self.matrix, exact=self.space.exact)
        if m.shape != self.space.gram.shape:
            raise NonSymmetric("form matrix does not match the space dimension")
        _check_symmetric(m, self.space.tol, "form matrix")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_matrix(cls, matrix, gram=None, exact: bool | None = None,
                    tol: Tolerances = DEFAULT):
        m = as_backend_matrix(matrix, exact)
        if gram is None:
            space = InnerProductSpace.euclidean(m.shape[0], exact=m.dtype == object, tol=tol)
        else:
            space = InnerProductSpace(as_backend_matrix(gram, m.dtype == object), tol)
        return cls(space, m)

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def exact(self) -> bool:
        return self.space.exact

    def evaluate(self, u, v):
        u = as_backend_vector(u, self.exact)
        v = as_backend_vector(v, self.exact)
        return u.dot(self.matrix.dot(v))

    def quadratic(self, u):
        return self.evaluate(u, u)


@dataclass(frozen=True)
class Inertia:
    """Sign counts of a symmetric form; marginal=True means some floating
    eigenvalue sat close enough to the zero band edge that the counts
    could move under tiny perturbations."""

    negative: int
    zero: int
    positive: int
    marginal: bool = False

    @property
    def dim(self) -> int:
        return self.negative + self.zero + self.positive

    @property
    def counts(self) -> tuple[int, int, int]:
        return (self.negative, self.zero, self.positive)


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace given by an independent (not necessarily orthonormal)
    basis; vectors are stored as columns of ``basis``."""

    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    def vectors(self) -> list[np.ndarray]:
        return [self.basis[:, i] for i in range(self.dim)]


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Orthogonal splitting of the space into negative, kernel, and
    positive invariant subspaces of the form (floating backend)."""

    basis_neg: np.ndarray
    basis_zero: np.ndarray
    basis_pos: np.ndarray
    eigenvalues: np.ndarray
    marginal: bool


def inertia(form: SymmetricForm, tol: Tolerances | None = None) -> Inertia:
    """Sign counts of the form, honoring the gram matrix of its space.

    Counts are invariant under congruence, so they are computed from the
    coefficient matrix directly on the exact backend; the floating path
    solves the generalized symmetric eigenproblem against the gram matrix
    (same signs, better conditioning for non-Euclidean spaces).
    """
    tol = tol or form.space.tol
    if form.exact:
        neg, zero, pos = exactla.inertia_counts(form.matrix)
        return Inertia(neg, zero, pos, marginal=False)
    gram = None if _is_identity(form.space.gram) else form.space.gram
    w = _eigh(form.matrix, gram)[0]
    neg, zero, pos, marginal = classify_spectrum(w, tol)
    return Inertia(neg, zero, pos, marginal)


def morse_index(form: SymmetricForm, tol: Tolerances | None = None) -> int:
    """dim of a maximal negative-definite subspace."""
    return inertia(form, tol).negative


def nullity(form: SymmetricForm, tol: Tolerances | None = None) -> int:
    """dim of the kernel of the form."""
    return inertia(form, tol).zero


def _is_identity(g: np.ndarray) -> bool:
    return g.dtype != object and bool(np.array_equal(g, np.eye(g.shape[0])))


def fundamental_decomposition(form: SymmetricForm,
                              tol: Tolerances | None = None) -> Decomposition:
    """Split the space along the form's eigenvectors (floating only).

    The three blocks are mutually orthogonal both in the inner product and
    under the form, and their dimensions reproduce the inertia counts.
    """
    if form.exact:
        raise UnsupportedBackend("fundamental_decomposition needs the floating backend")
    tol = tol or form.space.tol
    gram = None if _is_identity(form.space.gram) else form.space.gram
    w, X = _eigh(form.matrix, gram)
    tau = zero_band(w, tol)
    neg = X[:, w < -tau]
    zero = X[:, np.abs(w) <= tau]
    pos = X[:, w > tau]
    _, _, _, marginal = classify_spectrum(w, tol)
    return Decomposition(neg, zero, pos, w, marginal)


def kernel_intersection(space: InnerProductSpace, constraints,
                        tol: Tolerances | None = None) -> Subspace:
    """Basis of the joint kernel of the given functionals.

    Each constraint is a coefficient vector f with phi(v) = f . v.  With no
    constraints the whole space is returned.  Zero functionals impose
    nothing and simply do not cut the dimension.
    """
    tol = tol or space.tol
    rows = [as_backend_vector(c, space.exact) for c in constraints]
    n = space.dim
    if not rows:
        return Subspace(exactla.identity(n) if space.exact else np.eye(n))
    F = np.stack(rows, axis=0)
    if space.exact:
        basis = exactla.nullspace(F)
        if not basis:
            return Subspace(np.empty((n, 0), dtype=object))
        return Subspace(np.stack(basis, axis=1))
    return Subspace(_float_nullspace(F, tol))


def _float_nullspace(F: np.ndarray, tol: Tolerances) -> np.ndarray:
    """Orthonormal kernel basis via QR with column pivoting on F^T."""
    n = F.shape[1]
    Q, R, _ = scipy.linalg.qr(F.T, pivoting=True)
    d = np.abs(np.diag(R)) if min(R.shape) else np.empty(0)
    r = 0
    if d.size and d[0] > 0:
        r = int(np.sum(d > tol.rank * d[0]))
    return Q[:, r:]


def float_rank(F: np.ndarray, tol: Tolerances) -> int:
    d = np.abs(np.diag(scipy.linalg.qr(F.T, pivoting=True)[1])) if min(F.shape) else np.empty(0)
    if d.size == 0 or d[0] == 0:
        return 0
    return int(np.sum(d > tol.rank * d[0]))


def restrict(form: SymmetricForm, constraints,
             tol: Tolerances | None = None) -> SymmetricForm:
    """The form pulled back to the joint kernel of the constraints.

    This is the brute-force oracle every theorem-based prediction is
    checked against: inertia of the restricted matrix B^T A B, where the
    columns of B span the kernel.  Restricting by a full set of
    constraints yields the empty form on the zero-dimensional space.
    """
    tol = tol or form.space.tol
    sub = kernel_intersection(form.space, constraints, tol)
    return restrict_to(form, sub)


def restrict_to(form: SymmetricForm, sub: Subspace) -> SymmetricForm:
    B = sub.basis
    A2 = B.T.dot(form.matrix.dot(B))
    G2 = B.T.dot(form.space.gram.dot(B))
    if not form.exact:
        A2 = 0.5 * (A2 + A2.T)
        G2 = 0.5 * (G2 + G2.T)
    return SymmetricForm(InnerProductSpace(G2, form.space.tol), A2)


def s_project(form: SymmetricForm, u, v, tol: Tolerances | None = None) -> np.ndarray:
    """Component of v along u with respect to the form: (S(u,v)/S(u,u)) u."""
    tol = tol or form.space.tol
    u = as_backend_vector(u, form.exact)
    v = as_backend_vector(v, form.exact)
    suu = form.quadratic(u)
    if form.exact:
        if suu == 0:
            raise IsotropicDirection("S(u, u) = 0")
    else:
        tau = tol.null_band * max(1.0, float(np.max(np.abs(form.matrix), initial=0.0)))
        if abs(suu) <= tau * float(u.dot(u)):
            raise IsotropicDirection("S(u, u) vanishes within tolerance")
    return (form.evaluate(u, v) / suu) * u


def maximal_negative_subspace_through(form: SymmetricForm, u,
                                      tol: Tolerances | None = None) -> Subspace:
    """A maximal negative-definite subspace containing the direction u.

    Requires S(u, u) < 0.  Starting from an S-orthogonal negative basis
    c_1..c_k (exact congruence columns, or eigenvectors of negative
    eigenvalue), each c_i except one pivot c_j is tilted by a multiple of
    c_j so it becomes S-orthogonal to u; span(u) plus those k-1 tilted
    vectors is negative definite of dimension k = Morse index, with u as
    the first basis column.
    """
    tol = tol or form.space.tol
    u = as_backend_vector(u, form.exact)
    suu = form.quadratic(u)
    if form.exact:
        if not suu < 0:
            raise NotNegativeDirection("S(u, u) must be negative")
        C, diag = exactla.congruence_diagonalize(form.matrix)
        vecs = [C[:, i] for i, d in enumerate(diag) if d < 0]
    else:
        w, X = _eigh(form.matrix,
                     None if _is_identity(form.space.gram) else form.space.gram)
        tau = zero_band(w, tol)
        if not suu < -tau * float(u.dot(u)):
            raise NotNegativeDirection("S(u, u) must be negative beyond tolerance")
        vecs = [X[:, i] for i in range(w.size) if w[i] < -tau]
    k = len(vecs)
    # the S-projection of u onto span(c_i) has square sum(w_i^2 / d_i),
    # which is <= S(u, u) < 0, so some pairing w_j = S(u, c_j) is nonzero
    weights = [form.evaluate(u, c) for c in vecs]
    j = max(range(k), key=lambda i: abs(weights[i]))
    cols = [u]
    for i in range(k):
        if i == j:
            continue
        cols.append(vecs[i] - (weights[i] / weights[j]) * vecs[j])
    return Subspace(np.stack(cols, axis=1))
