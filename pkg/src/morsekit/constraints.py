"""Predicting index and nullity changes under linear constraints.

A constraint is a linear functional phi(v) = f . v.  When f lies in the
range of the form's coefficient matrix, a dual vector u with A u = f
exists and the sign of phi(u) = f . u decides everything: the Morse index
drops by one exactly when phi(u) <= 0, and the nullity moves by +1, 0, or
-1 according to whether phi(u) is zero, of strict sign, or f misses the
range entirely.  Several independent in-range constraints reduce to the
inertia of the small pairing matrix M[i, j] = S(u_i, u_j).  Every
prediction produced here is meant to be checked against the brute-force
restriction oracle in :mod:`morsekit.bilinear`; ``analyze`` does both and
reports whether they agree.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import exactla
from .bilinear import (
    InnerProductSpace,
    SymmetricForm,
    as_backend_vector,
    float_rank,
    inertia,
    restrict,
    _eigh,
    _is_identity,
)
from .errors import (
    DependentConstraints,
    DependentInput,
    FunctionalNotInRange,
    TrivialFunctional,
)
from .tolerances import Tolerances, zero_band


@dataclass(frozen=True, eq=False)
class Functional:
    """Linear functional phi(v) = coeffs . v on a coordinate space."""

    coeffs: np.ndarray

    @property
    def dim(self) -> int:
        return self.coeffs.shape[0]

    def __call__(self, v) -> object:
        return self.coeffs.dot(np.asarray(v, dtype=self.coeffs.dtype))

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)


def as_functional(phi, exact: bool) -> Functional:
    if isinstance(phi, Functional):
        return Functional(as_backend_vector(phi.coeffs, exact))
    return Functional(as_backend_vector(phi, exact))


@dataclass(frozen=True, eq=False)
class SolveOutcome:
    """Result of deciding f in range(A) and solving A u = f.

    status is "in_range" (u and phi_of_u populated) or "not_in_range"
    (kernel_component is a kernel vector z of A with phi(z) != 0, the
    witness that no solution exists).  residual is the floating relative
    residual of the solve; the exact backend reports 0.
    """

    status: str
    u: np.ndarray | None = None
    phi_of_u: object | None = None
    kernel_component: np.ndarray | None = None
    residual: float = 0.0
    warnings: tuple[str, ...] = ()

    @property
    def in_range(self) -> bool:
        return self.status == "in_range"


@dataclass(frozen=True, eq=False)
class MultiConstraintReport:
    """Joint prediction data for k independent in-range constraints."""

    duals: list
    gram_matrix: np.ndarray
    c: int
    c0: int
    marginal: bool = False


@dataclass(frozen=True, eq=False)
class ConstrainedReport:
    """Side-by-side theorem prediction and restriction-oracle truth."""

    mi_full: int
    nullity_full: int
    mi_constrained_oracle: int
    nullity_constrained_oracle: int
    mi_constrained_predicted: int | None
    nullity_constrained_predicted: int | None
    s_critical: tuple
    agreement: bool
    warnings: tuple[str, ...] = ()


def riesz(space: InnerProductSpace, phi) -> np.ndarray:
    """The vector representing phi in the inner product: gram . rep = f."""
    phi = as_functional(phi, space.exact)
    if space.exact:
        x = exactla.solve_general(space.gram, phi.coeffs)
        return x
    return np.linalg.solve(space.gram, phi.coeffs)


def solve_dual(form: SymmetricForm, phi,
               tol: Tolerances | None = None) -> SolveOutcome:
    """Decide whether the constraint has a dual vector and produce it.

    Exact backend: Gaussian elimination with exact rank decisions; free
    variables of an underdetermined consistent system are set to zero.
    Floating backend: minimum-norm least squares, accepted when the
    relative residual is at most ``tol.residual``; residuals within a
    factor ``marginal_factor`` of the threshold raise a warning either
    way.  The not-in-range witness is the projection of f onto the
    numerical kernel of A, which pairs positively with phi.
    """
    tol = tol or form.space.tol
    phi = as_functional(phi, form.exact)
    f = phi.coeffs
    A = form.matrix
    if form.exact:
        x = exactla.solve_general(A, f)
        if x is not None:
            return SolveOutcome("in_range", u=x, phi_of_u=f.dot(x), residual=0.0)
        kernel = exactla.nullspace(A)
        K = np.stack(kernel, axis=1)
        gram = form.space.gram
        KGK = K.T.dot(gram.dot(K))
        alpha = exactla.solve_general(KGK, K.T.dot(f))
        z = K.dot(alpha)
        return SolveOutcome("not_in_range", kernel_component=z, residual=0.0)
    u, *_ = np.linalg.lstsq(A, f, rcond=None)
    fnorm = float(np.linalg.norm(f))
    rel = float(np.linalg.norm(A.dot(u) - f)) / max(1.0, fnorm)
    warnings = []
    if tol.residual / tol.marginal_factor <= rel <= tol.residual * tol.marginal_factor:
        warnings.append(f"dual solve residual {rel:.3e} is marginal against "
                        f"threshold {tol.residual:.1e}")
    if rel <= tol.residual:
        return SolveOutcome("in_range", u=u, phi_of_u=float(f.dot(u)),
                            residual=rel, warnings=tuple(warnings))
    gram = None if _is_identity(form.space.gram) else form.space.gram
    w, X = _eigh(A, gram)
    tau = zero_band(w, tol)
    K = X[:, np.abs(w) <= tau]
    if K.shape[1] == 0:
        warnings.append("no numerical kernel at tolerance; reporting the "
                        "direction of smallest eigenvalue as the witness")
        K = X[:, [int(np.argmin(np.abs(w)))]]
    z = K.dot(K.T.dot(f))
    if abs(float(f.dot(z))) <= tau * (1.0 + fnorm * float(np.linalg.norm(z))):
        warnings.append("kernel witness pairs only marginally with the functional")
    return SolveOutcome("not_in_range", kernel_component=z, residual=rel,
                        warnings=tuple(warnings))


def _phi_branch(outcome: SolveOutcome, form: SymmetricForm, phi: Functional,
                tol: Tolerances) -> tuple[str, bool]:
    """Classify phi_of_u as negative, zero, or positive; returns marginal flag."""
    if not outcome.in_range:
        return "not_in_range", False
    val = outcome.phi_of_u
    if form.exact:
        if val == 0:
            return "zero", False
        return ("negative", False) if val < 0 else ("positive", False)
    scale = float(np.max(np.abs(form.matrix), initial=0.0))
    tau = tol.null_band * max(1.0, scale)
    band = tau * (1.0 + float(np.linalg.norm(outcome.u)) * float(np.linalg.norm(phi.coeffs)))
    marginal = band / tol.marginal_factor <= abs(val) <= band * tol.marginal_factor
    if abs(val) <= band:
        return "zero", marginal
    return ("negative", marginal) if val < 0 else ("positive", marginal)


def predict_index_drop(form: SymmetricForm, phi,
                       tol: Tolerances | None = None) -> int:
    """How much the Morse index falls on Ker(phi): 1 iff a dual u exists
    with phi(u) <= 0, else 0."""
    tol = tol or form.space.tol
    phi = as_functional(phi, form.exact)
    if phi.is_zero():
        raise TrivialFunctional("index drop is undefined for the zero functional")
    outcome = solve_dual(form, phi, tol)
    branch, _ = _phi_branch(outcome, form, phi, tol)
    return 1 if branch in ("negative", "zero") else 0


def predict_nullity_change(form: SymmetricForm, phi,
                           tol: Tolerances | None = None) -> int:
    """Nullity on Ker(phi) minus full nullity: +1 when the dual lies in
    Ker(phi), -1 when f misses the range of A, 0 otherwise."""
    tol = tol or form.space.tol
    phi = as_functional(phi, form.exact)
    if phi.is_zero():
        raise TrivialFunctional("nullity change is undefined for the zero functional")
    outcome = solve_dual(form, phi, tol)
    branch, _ = _phi_branch(outcome, form, phi, tol)
    if branch == "zero":
        return 1
    if branch == "not_in_range":
        return -1
    return 0


def is_s_critical(form: SymmetricForm, phi, tol: Tolerances | None = None) -> bool:
    """True when cutting by phi lowers the Morse index, equivalently when
    every maximal negative subspace meets the constraint nontrivially."""
    return predict_index_drop(form, phi, tol) == 1


def _independent(form: SymmetricForm, coeff_rows: list[np.ndarray],
                 tol: Tolerances) -> bool:
    F = np.stack(coeff_rows, axis=0)
    if form.exact:
        return exactla.rank(F) == len(coeff_rows)
    return float_rank(F, tol) == len(coeff_rows)


def predict_multi(form: SymmetricForm, phis,
                  tol: Tolerances | None = None) -> MultiConstraintReport:
    """Joint index drop and nullity change for independent in-range
    constraints.

    The index drops by c, the count of non-positive eigenvalues of the
    pairing matrix M[i, j] = S(u_i, u_j) of the duals, and the nullity
    rises by c0 = dim Ker(M).
    """
    tol = tol or form.space.tol
    phis = [as_functional(p, form.exact) for p in phis]
    if any(p.is_zero() for p in phis):
        raise TrivialFunctional("constraint set contains the zero functional")
    if not _independent(form, [p.coeffs for p in phis], tol):
        raise DependentConstraints("constraint functionals are linearly dependent")
    duals = []
    for i, p in enumerate(phis):
        outcome = solve_dual(form, p, tol)
        if not outcome.in_range:
            raise FunctionalNotInRange(i)
        duals.append(outcome.u)
    k = len(duals)
    U = np.stack(duals, axis=1)
    M = U.T.dot(form.matrix.dot(U))
    if not form.exact:
        M = 0.5 * (M + M.T)
    pairing = SymmetricForm.from_matrix(M, exact=form.exact, tol=tol)
    counts = inertia(pairing, tol)
    return MultiConstraintReport(duals=duals, gram_matrix=M,
                                 c=counts.negative + counts.zero,
                                 c0=counts.zero, marginal=counts.marginal)


def diagonalize_duals(form: SymmetricForm, duals,
                      tol: Tolerances | None = None) -> list[np.ndarray]:
    """Replace duals by a basis of the same span that is S-orthogonal."""
    tol = tol or form.space.tol
    duals = [as_backend_vector(u, form.exact) for u in duals]
    U = np.stack(duals, axis=1)
    if form.exact:
        if exactla.rank(U.T) != len(duals):
            raise DependentInput("dual vectors are linearly dependent")
    elif float_rank(U.T, tol) != len(duals):
        raise DependentInput("dual vectors are linearly dependent")
    M = U.T.dot(form.matrix.dot(U))
    if form.exact:
        C, _ = exactla.congruence_diagonalize(M)
        out = U.dot(C)
    else:
        M = 0.5 * (M + M.T)
        _, E = _eigh(M)
        out = U.dot(E)
    return [out[:, i] for i in range(out.shape[1])]


def analyze(form: SymmetricForm, constraints,
            tol: Tolerances | None = None) -> ConstrainedReport:
    """Run predictions and the restriction oracle side by side.

    Constraint sets outside the theorems' hypotheses (a zero functional,
    dependent functionals, or k >= 2 with some functional not in range)
    degrade to oracle-only mode: the oracle columns are always filled,
    predictions become None, and a warning explains why.
    """
    tol = tol or form.space.tol
    phis = [as_functional(p, form.exact) for p in constraints]
    full = inertia(form, tol)
    warnings: list[str] = []
    if full.marginal:
        warnings.append("full spectrum has marginal eigenvalues")
    restricted = restrict(form, [p.coeffs for p in phis], tol)
    oracle = inertia(restricted, tol)
    if oracle.marginal:
        warnings.append("restricted spectrum has marginal eigenvalues")

    predicted_mi: int | None = None
    predicted_null: int | None = None
    s_flags: list[bool] = []
    k = len(phis)
    if any(p.is_zero() for p in phis):
        warnings.append("trivial functional: prediction skipped, oracle only")
    else:
        branches = []
        for p in phis:
            outcome = solve_dual(form, p, tol)
            for w in outcome.warnings:
                warnings.append(w)
            branch, marginal = _phi_branch(outcome, form, p, tol)
            if marginal:
                warnings.append("phi(u) classification is marginal")
            branches.append(branch)
            s_flags.append(branch in ("negative", "zero"))
        if k == 0:
            predicted_mi, predicted_null = full.negative, full.zero
        elif k == 1:
            drop = 1 if branches[0] in ("negative", "zero") else 0
            change = {"zero": 1, "not_in_range": -1}.get(branches[0], 0)
            predicted_mi = full.negative - drop
            predicted_null = full.zero + change
        else:
            try:
                multi = predict_multi(form, phis, tol)
                if multi.marginal:
                    warnings.append("pairing matrix spectrum has marginal eigenvalues")
                predicted_mi = full.negative - multi.c
                predicted_null = full.zero + multi.c0
            except DependentConstraints:
                warnings.append("dependent constraints: prediction skipped, oracle only")
            except FunctionalNotInRange as exc:
                warnings.append(f"functional {exc.index} not in range with k >= 2: "
                                "no joint formula, oracle only")

    if predicted_mi is None:
        agreement = True
    else:
        agreement = (predicted_mi == oracle.negative
                     and predicted_null == oracle.zero)
    return ConstrainedReport(
        mi_full=full.negative,
        nullity_full=full.zero,
        mi_constrained_oracle=oracle.negative,
        nullity_constrained_oracle=oracle.zero,
        mi_constrained_predicted=predicted_mi,
        nullity_constrained_predicted=predicted_null,
        s_critical=tuple(s_flags),
        agreement=agreement,
        warnings=tuple(warnings),
    )
