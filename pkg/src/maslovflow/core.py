"""Linear symplectic structures on complex coordinate spaces.

A space here is C^n equipped with a sesquilinear symplectic form

    omega(x, y) = <J x, y> = y* J x,

where J is an invertible skew-Hermitian matrix (``J* = -J``) and the form is
linear in the first slot, conjugate linear in the second.  Nothing forces
``J^2 = -I``: letting J vary freely is the whole point, since it models the
finite-dimensional shadow of symplectic forms that are merely weakly
non-degenerate.

The operator ``K = -iJ`` is Hermitian and invertible, and its positive and
negative eigenspaces split the space as ``H = H+ (+) H-`` with ``-i omega``
positive definite on ``H+`` and negative definite on ``H-``.  Lagrangian
subspaces exist precisely when the two halves have equal dimension, and every
Lagrangian is the graph of a unitary ``H+ -> H-`` once both halves carry
frames orthonormal for the metrics ``h_pm = (-+) i omega``.  The unitary
picture is what makes integer-valued indices computable, so most of this
module exists to produce it reliably.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg as la

from .errors import (
    BadMetric,
    Degenerate,
    DimensionMismatch,
    NotHermitian,
    NotLagrangian,
    NotSkewHermitian,
    UnbalancedSplitting,
)

# Tolerances used throughout the package.  Rank decisions are relative to the
# largest singular value; symmetry and orthonormality checks are relative to
# the matrix norm with an absolute floor.
TAU_RANK = 1e-8
TAU_SYM = 1e-10
TAU_ORTH = 1e-10
TAU_UNIT = 1e-8
TAU_PHASE = 1e-8


def _as_complex_matrix(a):
    m = np.asarray(a, dtype=complex)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got array of ndim {m.ndim}")
    return m


def _fix_column_phases(q):
    """Deterministic gauge: first significant entry of each column is made
    real and positive."""
    q = np.array(q, dtype=complex)
    for j in range(q.shape[1]):
        col = q[:, j]
        idx = np.flatnonzero(np.abs(col) > 1e-12 * max(1.0, np.abs(col).max()))
        if idx.size:
            piv = col[idx[0]]
            if abs(piv) > 0:
                q[:, j] = col * (abs(piv) / piv)
    return q


@dataclass(frozen=True)
class SymplecticSpace:
    """C^n with a fixed invertible skew-Hermitian form matrix ``form``."""

    form: np.ndarray

    @property
    def dim(self):
        return self.form.shape[0]

    def omega(self, x, y):
        """Evaluate omega(x, y) = y* J x on vectors or frames.

        For matrices X (n x p) and Y (n x q) the result is the q x p array
        with entries omega(x_j, y_i) = y_i* J x_j.
        """
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        return y.conj().T @ (self.form @ x)

    def k_operator(self):
        """The Hermitian operator K = -iJ defining the canonical splitting."""
        return -1j * self.form


def make_space(j):
    """Build a :class:`SymplecticSpace` from a form matrix.

    Parameters
    ----------
    j : array_like
        Square complex matrix; must be skew-Hermitian and invertible.

    Returns
    -------
    SymplecticSpace

    Raises
    ------
    NotSkewHermitian
        If ``j* != -j`` beyond tolerance.
    Degenerate
        If ``j`` is numerically singular.
    """
    j = np.asarray(j, dtype=complex)
    if j.ndim != 2 or j.shape[0] != j.shape[1]:
        raise DimensionMismatch(f"form matrix must be square, got shape {j.shape}")
    scale = max(1.0, float(np.abs(j).max()))
    resid = float(np.abs(j + j.conj().T).max())
    if resid > TAU_SYM * scale:
        raise NotSkewHermitian(
            f"form residual |J + J*| = {resid:.3e} exceeds {TAU_SYM * scale:.3e}"
        )
    sv = la.svdvals(j)
    if sv[-1] <= 1e-12 * sv[0]:
        raise Degenerate(f"form is numerically singular (sigma_min/sigma_max = {sv[-1] / sv[0]:.3e})")
    j = 0.5 * (j - j.conj().T)  # exact skew-Hermitian representative
    j.flags.writeable = False
    return SymplecticSpace(form=j)


@dataclass(frozen=True)
class Subspace:
    """A linear subspace stored as an orthonormal frame (columns)."""

    frame: np.ndarray

    @property
    def dim(self):
        return self.frame.shape[1]

    @property
    def ambient_dim(self):
        return self.frame.shape[0]

    def contains(self, x, tol=TAU_RANK):
        x = np.asarray(x, dtype=complex)
        nrm = la.norm(x)
        if nrm == 0:
            return True
        resid = x - self.frame @ (self.frame.conj().T @ x)
        return la.norm(resid) <= tol * nrm


def subspace_from_span(vectors):
    """Orthonormalize a spanning set into a :class:`Subspace`.

    Rank decisions use column-pivoted QR with the relative threshold
    ``TAU_RANK``; dependent columns are dropped, so the input may be
    redundant.
    """
    a = _as_complex_matrix(vectors)
    if a.shape[1] == 0 or not np.abs(a).max() > 0:
        return Subspace(frame=np.zeros((a.shape[0], 0), dtype=complex))
    q, r, _ = la.qr(a, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.count_nonzero(diag > TAU_RANK * diag[0]))
    q = _fix_column_phases(q[:, :rank])
    q.flags.writeable = False
    return Subspace(frame=q)


def orthogonal_complement(sub, ambient_dim=None):
    """Orthonormal frame for the Euclidean complement of a subspace."""
    n = sub.ambient_dim if ambient_dim is None else ambient_dim
    if sub.dim == 0:
        return Subspace(frame=np.eye(n, dtype=complex))
    u, s, _ = la.svd(sub.frame, full_matrices=True)
    comp = _fix_column_phases(u[:, sub.dim:])
    comp.flags.writeable = False
    return Subspace(frame=comp)


def subspace_sum(a, b):
    """The subspace a + b."""
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatch("subspaces live in different ambient spaces")
    return subspace_from_span(np.hstack([a.frame, b.frame]))


def subspace_intersection(a, b):
    """The subspace a ∩ b, via the null space of the stacked frames."""
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatch("subspaces live in different ambient spaces")
    if a.dim == 0 or b.dim == 0:
        return Subspace(frame=np.zeros((a.ambient_dim, 0), dtype=complex))
    stacked = np.hstack([a.frame, -b.frame])
    _, s, vh = la.svd(stacked)
    tol = TAU_RANK * (s[0] if s.size else 1.0)
    null_mask = np.zeros(stacked.shape[1], dtype=bool)
    null_mask[np.sum(s > tol):] = True
    coeffs = vh.conj().T[: a.dim, null_mask]
    if coeffs.shape[1] == 0:
        return Subspace(frame=np.zeros((a.ambient_dim, 0), dtype=complex))
    return subspace_from_span(a.frame @ coeffs)


def intersection_dim(a, b):
    """dim(a ∩ b) from principal angles (cosines within TAU_RANK of 1)."""
    if a.dim == 0 or b.dim == 0:
        return 0
    sigma = la.svdvals(a.frame.conj().T @ b.frame)
    return int(np.count_nonzero(sigma >= 1.0 - TAU_RANK))


def equal_subspaces(a, b):
    return a.dim == b.dim and intersection_dim(a, b) == a.dim


def annihilator(space, sub):
    """The omega-annihilator ``{y : omega(x, y) = 0 for all x in sub}``.

    Computed as the kernel of ``F* J`` for a frame F of ``sub``; since the
    form matrix is skew-Hermitian this kernel equals the kernel of ``F* J*``.
    """
    n = space.dim
    if sub.ambient_dim != n:
        raise DimensionMismatch("subspace does not live in this space")
    if sub.dim == 0:
        return Subspace(frame=np.eye(n, dtype=complex))
    m = sub.frame.conj().T @ space.form
    _, s, vh = la.svd(m)
    rank = int(np.sum(s > TAU_RANK * (s[0] if s.size else 1.0)))
    ann = _fix_column_phases(vh.conj().T[:, rank:])
    ann.flags.writeable = False
    return Subspace(frame=ann)


class SubspaceClass(Enum):
    ISOTROPIC = "isotropic"
    COISOTROPIC = "coisotropic"
    LAGRANGIAN = "lagrangian"
    GENERAL = "general"


def classify(space, sub):
    """Classify a subspace as isotropic / coisotropic / Lagrangian / general
    relative to its omega-annihilator."""
    ann = annihilator(space, sub)
    inside = intersection_dim(sub, ann) == sub.dim  # sub ⊆ ann
    outside = intersection_dim(ann, sub) == ann.dim  # ann ⊆ sub
    if inside and outside:
        return SubspaceClass.LAGRANGIAN
    if inside:
        return SubspaceClass.ISOTROPIC
    if outside:
        return SubspaceClass.COISOTROPIC
    return SubspaceClass.GENERAL


def is_lagrangian(space, sub):
    return classify(space, sub) is SubspaceClass.LAGRANGIAN


def isotropy_residual(space, sub):
    """max |omega(f_i, f_j)| over an orthonormal frame of the subspace."""
    if sub.dim == 0:
        return 0.0
    return float(np.abs(space.omega(sub.frame, sub.frame)).max())


@dataclass(frozen=True)
class PairIndex:
    dim_intersection: int
    codim_sum: int

    @property
    def index(self):
        return self.dim_intersection - self.codim_sum


def pair_index(space, lam, mu):
    """Intersection dimension, codimension of the sum, and Fredholm index of
    a pair of subspaces.

    The two dimensions are computed independently (principal angles for the
    intersection, a rank computation for the sum), so ``index == 0`` for a
    Lagrangian pair is a genuine numerical statement rather than an identity
    of the code.
    """
    n = space.dim
    if lam.ambient_dim != n or mu.ambient_dim != n:
        raise DimensionMismatch("subspaces do not live in this space")
    dim_int = intersection_dim(lam, mu)
    if lam.dim + mu.dim == 0:
        dim_sum = 0
    else:
        sv = la.svdvals(np.hstack([lam.frame, mu.frame]))
        dim_sum = int(np.sum(sv > TAU_RANK * sv[0]))
    return PairIndex(dim_intersection=dim_int, codim_sum=n - dim_sum)


# ---------------------------------------------------------------------------
# Splittings and graph representations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Splitting:
    """A decomposition H = plus (+) minus adapted to the form.

    ``plus``/``minus`` carry Euclidean-orthonormal frames; ``hframe_plus``
    and ``hframe_minus`` span the same subspaces but are orthonormal for the
    metrics ``h_+ = -i omega`` and ``h_- = +i omega``.  ``projection`` is the
    projection onto ``plus`` along ``minus``.
    """

    space: SymplecticSpace
    plus: Subspace
    minus: Subspace
    projection: np.ndarray
    metric_plus: np.ndarray
    metric_minus: np.ndarray
    hframe_plus: np.ndarray
    hframe_minus: np.ndarray

    @property
    def balanced(self):
        return self.plus.dim == self.minus.dim


def _h_orthonormalize(frame, gram):
    # Cholesky of the (Hermitian positive definite) metric Gram matrix turns
    # the frame into an h-orthonormal one.
    gram = 0.5 * (gram + gram.conj().T)
    try:
        lo = la.cholesky(gram, lower=True)
    except la.LinAlgError as exc:
        raise BadMetric(f"metric Gram matrix is not positive definite: {exc}") from exc
    x = la.solve_triangular(lo.conj().T, np.eye(gram.shape[0], dtype=complex), lower=False)
    return frame @ x


def make_splitting(space, metric=None):
    """Split the space by the sign of ``K = -iJ`` (or of ``K`` relative to a
    supplied metric).

    Parameters
    ----------
    space : SymplecticSpace
    metric : array_like, optional
        Hermitian positive definite matrix G.  When given, the splitting is
        taken from the generalized eigenproblem ``K v = theta G v``; positive
        and negative theta play the role of the canonical eigenvalue signs.
        Index computations must not depend on this choice, and tests check
        that they do not.

    Returns
    -------
    Splitting
    """
    n = space.dim
    k = space.k_operator()
    k = 0.5 * (k + k.conj().T)
    if metric is None:
        theta, vecs = la.eigh(k)
    else:
        g = np.asarray(metric, dtype=complex)
        if g.shape != (n, n):
            raise DimensionMismatch(f"metric must be {n} x {n}, got {g.shape}")
        if np.abs(g - g.conj().T).max() > TAU_SYM * max(1.0, np.abs(g).max()):
            raise BadMetric("metric is not Hermitian")
        try:
            la.cholesky(g)
        except la.LinAlgError as exc:
            raise BadMetric("metric is not positive definite") from exc
        theta, vecs = la.eigh(k, 0.5 * (g + g.conj().T))
    # Descending eigenvalue order with deterministic phases.
    order = np.argsort(-theta, kind="stable")
    theta = theta[order]
    vecs = _fix_column_phases(vecs[:, order])
    scale = float(np.abs(theta).max())
    if np.abs(theta).min() <= 1e-12 * scale:
        raise Degenerate("K has a numerically zero eigenvalue; the form is singular")
    pos = theta > 0
    plus = subspace_from_span(vecs[:, pos]) if pos.any() else Subspace(np.zeros((n, 0), complex))
    neg = ~pos
    minus = subspace_from_span(vecs[:, neg]) if neg.any() else Subspace(np.zeros((n, 0), complex))
    # Projection onto plus along minus via coordinates in the joint frame.
    basis = np.hstack([plus.frame, minus.frame])
    proj = np.hstack([plus.frame, np.zeros((n, minus.dim), complex)]) @ la.inv(basis)
    gram_plus = -1j * space.omega(plus.frame, plus.frame) if plus.dim else np.zeros((0, 0), complex)
    gram_minus = 1j * space.omega(minus.frame, minus.frame) if minus.dim else np.zeros((0, 0), complex)
    hplus = _h_orthonormalize(plus.frame, gram_plus) if plus.dim else plus.frame
    hminus = _h_orthonormalize(minus.frame, gram_minus) if minus.dim else minus.frame
    return Splitting(
        space=space,
        plus=plus,
        minus=minus,
        projection=proj,
        metric_plus=gram_plus,
        metric_minus=gram_minus,
        hframe_plus=hplus,
        hframe_minus=hminus,
    )


@dataclass(frozen=True)
class GraphRep:
    """A Lagrangian written as the graph of a unitary ``H+ -> H-``.

    ``matrix`` is the unitary in the splitting's h-orthonormal frames; the
    subspace itself is spanned by ``hframe_plus + hframe_minus @ matrix``.
    """

    splitting: Splitting
    matrix: np.ndarray

    def frame(self):
        s = self.splitting
        return s.hframe_plus + s.hframe_minus @ self.matrix

    def subspace(self):
        return subspace_from_span(self.frame())


def graph_rep(space, splitting, lam):
    """Represent a Lagrangian subspace as the graph of a unitary.

    Raises
    ------
    UnbalancedSplitting
        If dim H+ != dim H-, in which case no Lagrangians exist at all.
    NotLagrangian
        If the subspace has the wrong dimension, projects degenerately onto
        H+, or the resulting matrix fails its unitarity residual.
    """
    if not splitting.balanced:
        raise UnbalancedSplitting(
            f"splitting has dims ({splitting.plus.dim}, {splitting.minus.dim}); "
            "no Lagrangian subspaces exist"
        )
    k = splitting.plus.dim
    if lam.dim != k:
        raise NotLagrangian(f"subspace has dim {lam.dim}, Lagrangians have dim {k}")
    basis = np.hstack([splitting.hframe_plus, splitting.hframe_minus])
    coords = la.solve(basis, lam.frame)
    a, b = coords[:k], coords[k:]
    sv = la.svdvals(a)
    if sv.size and sv[-1] <= 1e-10 * max(1.0, sv[0]):
        raise NotLagrangian("subspace projects degenerately onto the positive half")
    u = b @ la.inv(a)
    resid = float(np.abs(u.conj().T @ u - np.eye(k)).max())
    if resid > TAU_UNIT:
        raise NotLagrangian(
            f"graph matrix is not unitary (residual {resid:.3e}); subspace is not Lagrangian"
        )
    return GraphRep(splitting=splitting, matrix=u)


def pair_unitary(space, splitting, lam, mu):
    """The unitary ``W = U V^{-1}`` comparing two Lagrangians.

    The kernel of ``W - I`` has the same dimension as ``lam ∩ mu``, and the
    spectrum of W does not depend on the frame choices inside the splitting,
    which is what makes eigenvalue-counting arguments well posed.
    """
    u = graph_rep(space, splitting, lam).matrix
    v = graph_rep(space, splitting, mu).matrix
    return u @ v.conj().T


def normalize_metric(space):
    """The canonical strong form equivalent to this one.

    Returns a pair ``(G, Jprime)`` with G Hermitian positive definite,
    ``Jprime`` a complex structure (``Jprime^2 = -I``) that is G-skew, and
    ``G @ Jprime`` equal to the original form matrix, so the symplectic form
    is unchanged while the inner product absorbs the weakness.
    """
    k = space.k_operator()
    k = 0.5 * (k + k.conj().T)
    theta, vecs = la.eigh(k)
    if np.abs(theta).min() <= 1e-12 * np.abs(theta).max():
        raise Degenerate("form is numerically singular")
    g = (vecs * np.abs(theta)) @ vecs.conj().T
    jprime = 1j * (vecs * np.sign(theta)) @ vecs.conj().T
    g = 0.5 * (g + g.conj().T)
    return g, jprime


# ---------------------------------------------------------------------------
# Direct sums with a flipped second factor
# ---------------------------------------------------------------------------

def flip(space):
    """The same coordinate space with the negated form."""
    return make_space(-space.form)


def boxplus(space1, space2):
    """Direct sum carrying ``omega_1 (+) (-omega_2)``: the natural home for
    comparing two Lagrangians as a single one against the diagonal."""
    n1, n2 = space1.dim, space2.dim
    j = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    j[:n1, :n1] = space1.form
    j[n1:, n1:] = -space2.form
    return make_space(j)


def boxplus_subspace(lam, mu):
    """lam x mu inside the direct sum."""
    n1, n2 = lam.ambient_dim, mu.ambient_dim
    f = np.zeros((n1 + n2, lam.dim + mu.dim), dtype=complex)
    f[:n1, : lam.dim] = lam.frame
    f[n1:, lam.dim:] = mu.frame
    return Subspace(frame=f)


def diagonal_subspace(n):
    """The diagonal {(x, x)} in C^n (+) C^n."""
    f = np.vstack([np.eye(n, dtype=complex), np.eye(n, dtype=complex)]) / np.sqrt(2.0)
    return Subspace(frame=f)


def boxplus_pair(space, lam, mu):
    """Package two Lagrangians of (H, omega) as the pair
    ``(lam x mu, diagonal)`` in ``H (+) H`` with flipped second form."""
    big = boxplus(space, space)
    return big, boxplus_subspace(lam, mu), diagonal_subspace(space.dim)


def require_hermitian(a, name="matrix"):
    """Validate Hermitian symmetry within tolerance and return the exactly
    symmetrized representative."""
    a = np.asarray(a, dtype=complex)
    scale = max(1.0, float(np.abs(a).max()))
    resid = float(np.abs(a - a.conj().T).max())
    if resid > TAU_SYM * scale:
        raise NotHermitian(f"{name} residual |A - A*| = {resid:.3e} exceeds {TAU_SYM * scale:.3e}")
    return 0.5 * (a + a.conj().T)
