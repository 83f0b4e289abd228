"""Maslov indices for paths of Lagrangian pairs under varying forms.

A path here is a map ``s -> (space_s, lambda_s, mu_s)`` where the symplectic
form itself may move with s.  Writing both Lagrangians as graphs of unitaries
``U_s, V_s : H+_s -> H-_s`` relative to the sign splitting of ``K_s = -iJ_s``,
the index is the spectral flow of the comparison unitaries ``W_s = U_s
V_s^{-1}`` through 1 on the unit circle, co-oriented upward (an eigenphase
increasing through 0 counts +1):

    Mas{lambda, mu} = flow of s -> U_s V_s^{-1}.

The spectrum of ``W_s`` does not depend on any frame choices, which is what
lets an adaptive sampler make sense of it.  The kernel of ``W_s - I`` matches
``lambda_s ∩ mu_s`` dimension for dimension, so crossings of 1 are exactly
the parameter values where the pair touches.

Several equivalent formulas are implemented independently (a block unitary,
direct sums against the diagonal, flipped forms) because their agreement is
the cheapest interesting consistency check the theory offers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg as la

from . import core
from .core import (
    Subspace,
    boxplus,
    boxplus_subspace,
    diagonal_subspace,
    flip,
    graph_rep,
    isotropy_residual,
    make_space,
    make_splitting,
    subspace_from_span,
)
from .errors import Degenerate, NonUnitaryGenerator, NotLagrangianReal, NotSkewHermitian
from .flow import FlowOpts, LineKind, eigenphases, flow_from_sampler, unit_circle_residual


def _as_space_fun(j):
    if callable(j):
        return lambda s: j(s) if isinstance(j(s), core.SymplecticSpace) else make_space(j(s))
    space = j if isinstance(j, core.SymplecticSpace) else make_space(j)
    return lambda s: space


def _as_subspace_fun(sub):
    if callable(sub):
        def fun(s):
            v = sub(s)
            return v if isinstance(v, Subspace) else subspace_from_span(v)
        return fun
    fixed = sub if isinstance(sub, Subspace) else subspace_from_span(sub)
    return lambda s: fixed


@dataclass
class PairPath:
    """A path of Lagrangian pairs: s -> (space, lambda, mu) on an interval.

    ``sampler`` must be deterministic in s.  Use :meth:`from_parts` to build
    one from constant or callable pieces (matrices are accepted wherever
    spaces/subspaces are).
    """

    sampler: Callable[[float], tuple]
    interval: tuple

    @staticmethod
    def from_parts(j, lam, mu, interval):
        jf, lf, mf = _as_space_fun(j), _as_subspace_fun(lam), _as_subspace_fun(mu)
        return PairPath(sampler=lambda s: (jf(s), lf(s), mf(s)), interval=tuple(interval))

    def swapped(self):
        """The path s -> (H, mu, lambda): same form, pair order reversed.

        The comparison unitary becomes the adjoint, so the index of the
        swapped path complements the original one up to the endpoint
        intersection dimensions rather than repeating it.
        """
        base = self.sampler

        def sampler(s):
            space, lam, mu = base(s)
            return space, mu, lam

        return PairPath(sampler=sampler, interval=self.interval)

    def flipped_swapped(self):
        """The path s -> ((H, -omega), mu, lambda)."""
        base = self.sampler

        def sampler(s):
            space, lam, mu = base(s)
            return flip(space), mu, lam

        return PairPath(sampler=sampler, interval=self.interval)

    def boxplus_diagonal(self):
        """The path s -> (H (+) H flipped, lambda x mu, diagonal)."""
        base = self.sampler

        def sampler(s):
            space, lam, mu = base(s)
            return boxplus(space, space), boxplus_subspace(lam, mu), diagonal_subspace(space.dim)

        return PairPath(sampler=sampler, interval=self.interval)

    def pushforward(self, l):
        """Transport the whole path by an invertible map (constant or
        callable in s): the form becomes L^{-*} J L^{-1} and subspaces move
        by L, which changes nothing about the index."""
        base = self.sampler
        lfun = l if callable(l) else (lambda s, _l=np.asarray(l, dtype=complex): _l)

        def sampler(s):
            space, lam, mu = base(s)
            lmat = np.asarray(lfun(s), dtype=complex)
            linv = la.inv(lmat)
            jnew = linv.conj().T @ space.form @ linv
            return (make_space(jnew),
                    subspace_from_span(lmat @ lam.frame),
                    subspace_from_span(lmat @ mu.frame))

        return PairPath(sampler=sampler, interval=self.interval)


def _splitting_fun(metric):
    if metric is None:
        return lambda space, s: make_splitting(space)
    if callable(metric):
        return lambda space, s: make_splitting(space, metric=metric(s))
    return lambda space, s: make_splitting(space, metric=metric)


def maslov_index(path, opts=None, metric=None):
    """Maslov index of a path of Lagrangian pairs.

    Parameters
    ----------
    path : PairPath
    opts : FlowOpts, optional
    metric : array_like or callable, optional
        Alternative positive metric defining the splitting; the result must
        not depend on it (and tests hold us to that).

    Returns
    -------
    (int, CrossingReport)
        The report's ``extras`` carry the worst isotropy and unit-circle
        residuals seen along the path.
    """
    opts = opts or FlowOpts()
    split_at = _splitting_fun(metric)
    stats = {"isotropy_residual": 0.0, "unit_circle_residual": 0.0}

    def sampler(s):
        space, lam, mu = path.sampler(s)
        stats["isotropy_residual"] = max(
            stats["isotropy_residual"], isotropy_residual(space, lam), isotropy_residual(space, mu)
        )
        splitting = split_at(space, s)
        u = graph_rep(space, splitting, lam).matrix
        v = graph_rep(space, splitting, mu).matrix
        w = u @ v.conj().T
        stats["unit_circle_residual"] = max(stats["unit_circle_residual"], unit_circle_residual(w))
        return eigenphases(w, tau_unit=opts.tau_unit)

    total, report = flow_from_sampler(sampler, path.interval, opts, circular=True)
    report.extras.update(stats)
    return total, report


def maslov_index_block(path, opts=None):
    """Same index from the block unitary  [[0, U], [V*, 0]].

    The block matrix squares to diag(U V*, V* U), so its eigenphases are the
    half-phases of the comparison unitary together with their shifts by pi;
    only the first group crosses 1, and it does so exactly when the pair
    touches.  This shares no counting code path with the product formula
    beyond the generic engine.
    """
    opts = opts or FlowOpts()

    def sampler(s):
        space, lam, mu = path.sampler(s)
        splitting = make_splitting(space)
        u = graph_rep(space, splitting, lam).matrix
        v = graph_rep(space, splitting, mu).matrix
        k = u.shape[0]
        block = np.zeros((2 * k, 2 * k), dtype=complex)
        block[:k, k:] = u
        block[k:, :k] = v.conj().T
        return eigenphases(block, tau_unit=opts.tau_unit)

    return flow_from_sampler(sampler, path.interval, opts, circular=True)


@dataclass(frozen=True)
class ProductIdentities:
    direct: int
    boxplus_diagonal: int
    flipped_swapped: int
    flipped_boxplus: int

    @property
    def agree(self):
        return self.direct == self.boxplus_diagonal == self.flipped_swapped == self.flipped_boxplus


def maslov_product_identities(path, opts=None):
    """Evaluate the four equivalent product formulas for one path.

    direct          Mas{lambda, mu}            in (H, omega)
    boxplus         Mas{lambda x mu, diag}     in (H, omega) (+) (H, -omega)
    flipped/swapped Mas{mu, lambda}            in (H, -omega)
    flipped boxplus Mas{diag, lambda x mu}     in (H, -omega) (+) (H, omega)

    All four must agree; the flipped variants exercise the complementary
    splitting projection automatically because K changes sign with the form.
    """
    direct, _ = maslov_index(path, opts)
    boxed, _ = maslov_index(path.boxplus_diagonal(), opts)
    flipped, _ = maslov_index(path.flipped_swapped(), opts)
    flipped_boxed, _ = maslov_index(path.flipped_swapped().boxplus_diagonal(), opts)
    return ProductIdentities(
        direct=direct,
        boxplus_diagonal=boxed,
        flipped_swapped=flipped,
        flipped_boxplus=flipped_boxed,
    )


def splitting_independence_check(path, metric, opts=None):
    """Index with the canonical splitting vs. a deformed-metric splitting."""
    canonical, _ = maslov_index(path, opts)
    deformed, _ = maslov_index(path, opts, metric=metric)
    return canonical, deformed


# ---------------------------------------------------------------------------
# Real symplectic category: comparison against the generator-based index
# ---------------------------------------------------------------------------

@dataclass
class RealPairData:
    """A real symplectic comparison problem.

    ``j``        real 2m x 2m with J^T = -J and J^2 = -I;
    ``lam``      real orthonormal frame (2m x m) of the fixed Lagrangian;
    ``mu_path``  s -> real orthonormal frame (2m x m) of the moving one;
    ``interval`` parameter range.
    """

    j: np.ndarray
    lam: np.ndarray
    mu_path: Callable[[float], np.ndarray]
    interval: tuple


@dataclass(frozen=True)
class RealComparison:
    mas: int
    mas_bf: int
    residual: float

    @property
    def agree(self):
        return self.mas == -self.mas_bf


def _check_real_lagrangian(j, frame, what):
    frame = np.asarray(frame, dtype=float)
    m = frame.shape[1]
    orth = np.abs(frame.T @ frame - np.eye(m)).max()
    iso = np.abs(frame.T @ j @ frame).max()
    if orth > 1e-8 or iso > 1e-8:
        raise NotLagrangianReal(
            f"{what}: orthonormality residual {orth:.3e}, isotropy residual {iso:.3e}"
        )
    return frame


def real_generator(j, lam_frame, mu_frame):
    """The unitary generator S attached to a real Lagrangian pair.

    With A = Q^T M and B = (JQ)^T M for orthonormal frames Q of lambda and M
    of mu, the matrix T = B - iA is invertible, T* T is real symmetric
    positive definite, and ``V = T (T^* T)^{-1/2}`` is unitary.  The
    generator is ``S = V V^T`` (plain transpose); it depends only on the two
    subspaces up to real-orthogonal conjugation, so its spectrum is an
    invariant of the pair.  Returns (V, S).
    """
    q = np.asarray(lam_frame, dtype=float)
    mfr = np.asarray(mu_frame, dtype=float)
    a = q.T @ mfr
    b = (j @ q).T @ mfr
    t = b - 1j * a
    tt = t.conj().T @ t
    if np.abs(tt.imag).max() > 1e-8:
        raise NotLagrangianReal(
            f"T*T has imaginary part {np.abs(tt.imag).max():.3e}; frames are not a Lagrangian pair"
        )
    tt = tt.real
    w, vecs = la.eigh(0.5 * (tt + tt.T))
    if w.min() <= 1e-14 * max(w.max(), 1.0):
        raise Degenerate("T*T is numerically singular")
    ginv = (vecs / np.sqrt(w)) @ vecs.T
    v = t @ ginv
    resid = np.abs(v.conj().T @ v - np.eye(v.shape[0])).max()
    if resid > core.TAU_UNIT:
        raise NonUnitaryGenerator(f"generator unitarity residual {resid:.3e}")
    return v, v @ v.T


def complexify_and_compare(data, opts=None, residual_samples=33):
    """Compare the complexified Maslov index with the generator-based one.

    The complexified pair is run through :func:`maslov_index` as-is.  The
    generator path ``s -> S_s`` is run through the same crossing engine after
    the rigid rotation ``z -> -conj(z)``, which carries "eigenphase of S
    decreasing through pi" (the generator convention for a crossing) onto
    "eigenphase increasing through 0".  The two integers must be negatives
    of each other, and the bridge between the formalisms is checked
    numerically: in the frames ``(I -+ iJ)Q / sqrt(2)`` the complex
    comparison unitary ``V U^{-1}`` must equal ``-conj(S)`` entrywise.

    Returns
    -------
    RealComparison
        with ``residual`` the worst entrywise bridge mismatch over a uniform
        grid of ``residual_samples`` parameter values.
    """
    opts = opts or FlowOpts()
    j = np.asarray(data.j, dtype=float)
    n = j.shape[0]
    if np.abs(j + j.T).max() > 1e-10:
        raise NotSkewHermitian("real structure matrix must satisfy J^T = -J")
    if np.abs(j @ j + np.eye(n)).max() > 1e-10:
        raise Degenerate("real structure matrix must satisfy J^2 = -I")
    q = _check_real_lagrangian(j, data.lam, "lambda frame")

    def mu_at(s):
        return _check_real_lagrangian(j, data.mu_path(s), f"mu frame at s={s:.6g}")

    path = PairPath.from_parts(j.astype(complex), q.astype(complex),
                               lambda s: mu_at(s).astype(complex), data.interval)
    mas, _ = maslov_index(path, opts)

    def generator_sampler(s):
        _, smat = real_generator(j, q, mu_at(s))
        return eigenphases(-smat.conj(), tau_unit=opts.tau_unit)

    mas_bf, _ = flow_from_sampler(generator_sampler, data.interval, opts, circular=True)

    # Bridge residual: V U^{-1} == -conj(S) in the frames attached to Q.
    fplus = (q - 1j * (j @ q)) / np.sqrt(2.0)
    fminus = (q + 1j * (j @ q)) / np.sqrt(2.0)
    basis = np.hstack([fplus, fminus])
    m = q.shape[1]
    worst = 0.0
    a0, b0 = data.interval
    for s in np.linspace(a0, b0, residual_samples):
        mfr = mu_at(float(s))
        _, smat = real_generator(j, q, mfr)
        coords_lam = la.solve(basis, q.astype(complex))
        coords_mu = la.solve(basis, mfr.astype(complex))
        u = coords_lam[m:] @ la.inv(coords_lam[:m])
        v = coords_mu[m:] @ la.inv(coords_mu[:m])
        bridge = v @ la.inv(u)
        worst = max(worst, float(np.abs(bridge + smat.conj()).max()))
    return RealComparison(mas=mas, mas_bf=mas_bf, residual=worst)
