"""Feasible sets with exact Euclidean projections.

Supported set kinds all admit closed-form or cheaply enumerable exact
projections: the nonnegative orthant, boxes, Euclidean balls and
intersections of a few halfspaces.  Also provides the residual map
``r(x) = x - P(x - grad J(x))`` whose zeros are exactly the stationary
points of the constrained problem, and the Gafni ratio
``phi(t) = ||P(x + t d) - x|| / t`` used by stepsize-robustness checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.optimize import linprog

from .errors import InfeasibleSetError

ORTHANT = "nonneg-orthant"
BOX = "box"
BALL = "ball"
HALFSPACES = "halfspace-intersection"

_MAX_HALFSPACES = 14


@dataclass(frozen=True)
class FeasibleSet:
    """A nonempty closed convex set with an exact orthogonal projection.

    Construct through :func:`nonneg_orthant`, :func:`box`, :func:`ball` or
    :func:`halfspace_intersection` rather than directly.  ``bounded`` sets
    carry an interior reference point ``x_omega`` and an enclosing radius
    ``r_omega`` about it.
    """

    kind: str
    dim: int
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    center: np.ndarray | None = None
    radius: float | None = None
    normals: np.ndarray | None = None
    offsets: np.ndarray | None = None
    bounded: bool = False
    x_omega: np.ndarray | None = None
    r_omega: float | None = None
    _active_subsets: tuple = field(default=(), repr=False)

    def project(self, x):
        """Euclidean least-distance projection of ``x`` onto the set."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected vector of length {self.dim}, got shape {x.shape}")
        if self.kind == ORTHANT:
            return np.maximum(x, 0.0)
        if self.kind == BOX:
            return np.clip(x, self.lower, self.upper)
        if self.kind == BALL:
            diff = x - self.center
            nrm = np.linalg.norm(diff)
            if nrm <= self.radius:
                return x.copy()
            return self.center + diff * (self.radius / nrm)
        return self._project_halfspaces(x)

    def contains(self, x, tol=0.0):
        """Membership test with absolute slack ``tol``."""
        x = np.asarray(x, dtype=float)
        if self.kind == ORTHANT:
            return bool(np.all(x >= -tol))
        if self.kind == BOX:
            return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))
        if self.kind == BALL:
            return bool(np.linalg.norm(x - self.center) <= self.radius + tol)
        return bool(np.all(self.normals @ x <= self.offsets + tol))

    def distance(self, x):
        return float(np.linalg.norm(np.asarray(x, dtype=float) - self.project(x)))

    def sample_member(self, rng):
        """Draw a member point, for randomized property checks."""
        if self.kind == ORTHANT:
            return np.abs(rng.normal(size=self.dim))
        if self.kind == BOX:
            return rng.uniform(self.lower, self.upper)
        if self.kind == BALL:
            u = rng.normal(size=self.dim)
            u /= max(np.linalg.norm(u), 1e-30)
            return self.center + u * self.radius * rng.uniform(0.0, 1.0) ** (1.0 / self.dim)
        return self.project(rng.normal(size=self.dim))

    def _project_halfspaces(self, x):
        # Exact QP solution by enumerating candidate active sets; valid
        # because the number of halfspaces is capped at construction.
        G, h = self.normals, self.offsets
        slack = G @ x - h
        feas_tol = 1e-10 * max(1.0, float(np.abs(h).max()), float(np.linalg.norm(x)))
        if np.all(slack <= feas_tol):
            return x.copy()
        m = G.shape[0]
        best = None
        best_dist = np.inf
        for subset in self._active_subsets:
            Gs = G[list(subset)]
            hs = h[list(subset)]
            M = Gs @ Gs.T
            rhs = Gs @ x - hs
            try:
                lam = np.linalg.solve(M, rhs)
            except np.linalg.LinAlgError:
                lam, *_ = np.linalg.lstsq(M, rhs, rcond=None)
            if np.any(lam < -1e-9):
                continue
            y = x - Gs.T @ lam
            if not np.all(G @ y <= h + feas_tol):
                continue
            if np.max(np.abs(Gs @ y - hs)) > feas_tol:
                continue
            d = np.linalg.norm(y - x)
            if d < best_dist:
                best_dist = d
                best = y
        if best is None:
            raise RuntimeError("halfspace projection failed to find a KKT point")
        return best


def nonneg_orthant(dim):
    return FeasibleSet(kind=ORTHANT, dim=int(dim), bounded=False)


def box(lower, upper):
    """Axis-aligned box [lower, upper]; coordinates with equal bounds collapse."""
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    if lower.shape != upper.shape:
        raise ValueError("box bounds must have matching shapes")
    if np.any(lower > upper):
        raise ValueError("box requires lower <= upper componentwise")
    center = 0.5 * (lower + upper)
    r = 0.5 * float(np.linalg.norm(upper - lower))
    return FeasibleSet(
        kind=BOX, dim=lower.size, lower=lower, upper=upper,
        bounded=True, x_omega=center, r_omega=r,
    )


def ball(center, radius):
    center = np.atleast_1d(np.asarray(center, dtype=float))
    radius = float(radius)
    if radius <= 0:
        raise ValueError("ball radius must be positive")
    return FeasibleSet(
        kind=BALL, dim=center.size, center=center, radius=radius,
        bounded=True, x_omega=center.copy(), r_omega=radius,
    )


def halfspace_intersection(normals, offsets, x_omega=None, r_omega=None):
    """Intersection of halfspaces ``normals @ x <= offsets``.

    Emptiness (and empty-interior degeneracy) is detected at construction
    via the Chebyshev-center linear program.  Boundedness data may be
    supplied explicitly; it is not inferred.
    """
    G = np.atleast_2d(np.asarray(normals, dtype=float))
    h = np.atleast_1d(np.asarray(offsets, dtype=float))
    if G.shape[0] != h.size:
        raise ValueError("one offset per halfspace required")
    if G.shape[0] > _MAX_HALFSPACES:
        raise ValueError(f"at most {_MAX_HALFSPACES} halfspaces supported")
    row_norms = np.linalg.norm(G, axis=1)
    if np.any(row_norms <= 0):
        raise ValueError("halfspace normals must be nonzero")
    m, n = G.shape
    # Chebyshev center: maximize t subject to G c + t ||g_i|| <= h.  The
    # radius is capped so unbounded sets solve cleanly.
    res = linprog(
        c=np.concatenate([np.zeros(n), [-1.0]]),
        A_ub=np.hstack([G, row_norms[:, None]]),
        b_ub=h,
        bounds=[(None, None)] * n + [(None, 1e16)],
        method="highs",
    )
    if not res.success or res.x[-1] < 1e-12:
        raise InfeasibleSetError("halfspace intersection is empty or has empty interior")
    subsets = tuple(
        s for k in range(1, min(m, n) + 1) for s in combinations(range(m), k)
    )
    bounded = x_omega is not None and r_omega is not None
    return FeasibleSet(
        kind=HALFSPACES, dim=n, normals=G, offsets=h,
        bounded=bounded,
        x_omega=None if x_omega is None else np.asarray(x_omega, dtype=float),
        r_omega=None if r_omega is None else float(r_omega),
        _active_subsets=subsets,
    )


def project(fset: FeasibleSet, x):
    """Orthogonal projection onto ``fset`` (module-level convenience)."""
    return fset.project(x)


def residual(model, fset: FeasibleSet, x):
    """Residual map r(x) = x - P(x - grad J(x)); zero exactly at stationary points."""
    x = np.asarray(x, dtype=float)
    return x - fset.project(x - model.gradient(x))


def gafni_ratio(fset: FeasibleSet, x, d, t):
    """||P(x + t d) - x|| / t, monotonically nonincreasing in t > 0."""
    if t <= 0:
        raise ValueError("gafni_ratio requires t > 0")
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    return float(np.linalg.norm(fset.project(x + t * d) - x) / t)


def distance_to_set(fset: FeasibleSet, x):
    return fset.distance(x)
