"""Objective models over dense linear systems.

Covers the weighted least-squares functional ``0.5 <W(b - Ax), b - Ax>``
and the Kullback-Leibler distance ``KL(b, Ax)``, their gradients, spectral
or interval estimates of the gradient Lipschitz constant ``L`` and the
strong-convexity modulus ``mu``, and seeded generators for reproducible
desk-scale test instances.

All types are immutable after construction and evaluation is pure, so
models are safe to share across concurrent runs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import geometry
from .errors import DomainViolationError, UnsupportedConfigurationError

WEIGHTED_LS = "weighted-ls"
KL = "kl"
QUADRATIC = "custom-quadratic"

_LS_KINDS = (WEIGHTED_LS, QUADRATIC)


@dataclass(frozen=True)
class LinearSystem:
    """Dense system ``A x = b`` with an optional SPD weighting matrix.

    ``W=None`` means the identity weight.  ``x_true`` is optional generator
    metadata recording the vector used to synthesize a consistent ``b``.
    """

    A: np.ndarray
    b: np.ndarray
    W: np.ndarray | None = None
    x_true: np.ndarray | None = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if A.shape[0] != b.size:
            raise ValueError(f"A has {A.shape[0]} rows but b has length {b.size}")
        if self.W is not None:
            W = np.atleast_2d(np.asarray(self.W, dtype=float))
            if W.shape != (A.shape[0], A.shape[0]):
                raise ValueError("W must be m-by-m")
            scale = max(1.0, float(np.abs(W).max()))
            if np.abs(W - W.T).max() > 1e-10 * scale:
                raise ValueError("W must be symmetric")
            if np.linalg.eigvalsh(W)[0] <= 0:
                raise ValueError("W must be positive definite")
            object.__setattr__(self, "W", W)
        if self.x_true is not None:
            object.__setattr__(self, "x_true", np.asarray(self.x_true, dtype=float))

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def column_sums(self):
        return self.A.sum(axis=0)

    @property
    def kl_compatible(self):
        """Nonnegative data with strictly positive column sums."""
        return bool(
            np.all(self.A >= 0)
            and np.all(self.b >= 0)
            and np.all(self.column_sums > 0)
        )

    def weighted(self, r):
        """Apply the weight matrix to a residual vector."""
        return r if self.W is None else self.W @ r

    def normal_matrix(self):
        """The (weighted) normal matrix A^T W A."""
        return self.A.T @ self.weighted(self.A)


@dataclass(frozen=True)
class ObjectiveModel:
    """A convex objective with its curvature constants.

    ``L`` bounds the gradient Lipschitz constant on the feasible set and
    ``mu`` is the strong-convexity modulus there (``mu = 0`` when strong
    convexity is absent or unverified).
    """

    kind: str
    system: LinearSystem
    L: float
    mu: float = 0.0

    def __post_init__(self):
        if self.kind not in (_LS_KINDS + (KL,)):
            raise ValueError(f"unknown objective kind: {self.kind!r}")
        if self.L <= 0:
            raise ValueError("L must be positive")
        if self.mu < 0 or self.mu > self.L + 1e-12:
            raise ValueError("require 0 <= mu <= L")

    @property
    def n(self):
        return self.system.n

    @property
    def strongly_convex(self):
        return self.mu > 0

    def evaluate(self, x):
        if self.kind == KL:
            return eval_kl(self, x)
        return eval_ls(self, x)

    def gradient(self, x):
        if self.kind == KL:
            return grad_kl(self, x)
        return grad_ls(self, x)

    def with_constants(self, L, mu):
        return replace(self, L=float(L), mu=float(mu))


def _check_dim(model, x):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != model.system.n:
        raise ValueError(f"expected vector of length {model.system.n}, got {x.size}")
    return x


def eval_ls(model: ObjectiveModel, x):
    """Weighted least-squares value ``0.5 <W(b - Ax), b - Ax>``."""
    if model.kind not in _LS_KINDS:
        raise ValueError(f"eval_ls requires a least-squares model, got {model.kind!r}")
    x = _check_dim(model, x)
    r = model.system.b - model.system.A @ x
    return 0.5 * float(model.system.weighted(r) @ r)


def grad_ls(model: ObjectiveModel, x):
    """Gradient ``-A^T W (b - Ax)`` of the weighted least-squares value."""
    if model.kind not in _LS_KINDS:
        raise ValueError(f"grad_ls requires a least-squares model, got {model.kind!r}")
    x = _check_dim(model, x)
    r = model.system.b - model.system.A @ x
    return -model.system.A.T @ model.system.weighted(r)


def _kl_rows(model, x):
    x = _check_dim(model, x)
    ax = model.system.A @ x
    b = model.system.b
    bad = (b > 0) & (ax <= 0)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise DomainViolationError(
            f"row {idx}: <a_i, x> = {ax[idx]:.3e} is nonpositive while b_i > 0", index=idx
        )
    return x, ax, b


def eval_kl(model: ObjectiveModel, x):
    """Kullback-Leibler distance KL(b, Ax), with the 0 log 0 = 0 convention."""
    if model.kind != KL:
        raise ValueError(f"eval_kl requires a KL model, got {model.kind!r}")
    _, ax, b = _kl_rows(model, x)
    pos = b > 0
    val = float(np.sum(ax - b))
    if np.any(pos):
        val += float(np.sum(b[pos] * np.log(b[pos] / ax[pos])))
    return val


def grad_kl(model: ObjectiveModel, x):
    """Gradient ``sum_i (1 - b_i / <a_i, x>) a_i`` of the KL distance."""
    if model.kind != KL:
        raise ValueError(f"grad_kl requires a KL model, got {model.kind!r}")
    _, ax, b = _kl_rows(model, x)
    ratios = np.ones_like(b)
    pos = b > 0
    ratios[pos] = 1.0 - b[pos] / ax[pos]
    return model.system.A.T @ ratios


def estimate_constants(model: ObjectiveModel, fset=None):
    """Estimate (L, mu) for the model on the given feasible set.

    Least-squares models use the spectrum of the normal matrix A^T W A
    (set-independent).  KL models require a box bounded away from the
    gradient singularity; the Hessian ``A^T diag(b_i / <a_i, x>^2) A`` is
    then bracketed through the extreme values of ``<a_i, x>`` over the box.
    """
    if model.kind in _LS_KINDS:
        eigs = np.linalg.eigvalsh(model.system.normal_matrix())
        L = float(eigs[-1])
        mu = float(eigs[0])
        if mu < 1e-12 * max(L, 1.0):
            mu = 0.0
        return L, mu

    if fset is None or fset.kind != geometry.BOX:
        raise UnsupportedConfigurationError(
            "KL constants require a box feasible set bounded away from zero"
        )
    A, b = model.system.A, model.system.b
    if np.any(A < 0):
        raise UnsupportedConfigurationError("KL constants require a nonnegative matrix")
    ax_lo = A @ fset.lower
    ax_hi = A @ fset.upper
    active = b > 0
    if np.any(active & (ax_lo <= 0)):
        raise UnsupportedConfigurationError(
            "box lower corner touches the KL domain boundary; raise the lower bounds"
        )
    d_hi = np.zeros_like(b)
    d_lo = np.zeros_like(b)
    d_hi[active] = b[active] / ax_lo[active] ** 2
    d_lo[active] = b[active] / ax_hi[active] ** 2
    L = float(np.linalg.eigvalsh(A.T @ (d_hi[:, None] * A))[-1])
    mu = float(np.linalg.eigvalsh(A.T @ (d_lo[:, None] * A))[0])
    if mu < 1e-12 * max(L, 1.0):
        mu = 0.0
    return L, mu


@dataclass(frozen=True)
class ProblemSpec:
    """Reproducible recipe for a generated test instance.

    ``cond`` shapes the spectrum of A^T W A for least-squares kinds and is
    rejected for KL.  KL instances are rescaled so their Lipschitz constant
    on the generated box equals ``kl_l_target``, keeping unit-stepsize
    policies inside the stepsize bound.
    """

    kind: str = WEIGHTED_LS
    n: int = 10
    m: int | None = None
    seed: int = 0
    consistent: bool = True
    cond: float | None = None
    weight: str = "identity"
    set_kind: str | None = None
    kl_l_target: float = 1.5

    def __post_init__(self):
        if self.kind not in (_LS_KINDS + (KL,)):
            raise ValueError(f"unknown problem kind: {self.kind!r}")
        if self.n <= 0 or (self.m is not None and self.m <= 0):
            raise ValueError("dimensions must be positive")
        if self.cond is not None:
            if self.kind == KL:
                raise ValueError("conditioning targets apply to least-squares kinds only")
            if self.cond < 1:
                raise ValueError("cond must be >= 1")
        if self.weight not in ("identity", "random-diag"):
            raise ValueError(f"unknown weight option: {self.weight!r}")
        if self.weight != "identity" and self.kind == KL:
            raise ValueError("KL instances do not take a weight matrix")


def make_test_problem(spec: ProblemSpec):
    """Generate a seeded (model, feasible set) pair from a spec."""
    rng = np.random.default_rng(spec.seed)
    m = spec.m if spec.m is not None else spec.n + max(2, spec.n // 5)
    if spec.kind == KL:
        return _make_kl(spec, rng, m)
    return _make_ls(spec, rng, m)


def _orthonormal(rng, rows, cols):
    q, _ = np.linalg.qr(rng.normal(size=(rows, cols)))
    return q


def _make_ls(spec, rng, m):
    n = spec.n
    if spec.weight == "random-diag":
        w = rng.uniform(0.5, 2.0, size=m)
        W = np.diag(w)
    else:
        w = None
        W = None
    if spec.cond is not None and m >= n:
        # Shape the singular values of W^{1/2} A so the normal matrix has
        # exactly the requested condition number.
        sigmas = np.logspace(0.0, -0.5 * np.log10(spec.cond), n)
        M = _orthonormal(rng, m, n) @ (sigmas[:, None] * _orthonormal(rng, n, n).T)
        A = M if w is None else M / np.sqrt(w)[:, None]
    else:
        A = rng.normal(size=(m, n))
    x_true = rng.uniform(0.2, 2.0, size=n)
    b = A @ x_true
    if not spec.consistent:
        scale = float(np.linalg.norm(b)) / np.sqrt(m)
        b = b + 0.2 * scale * rng.normal(size=m)
    system = LinearSystem(A=A, b=b, W=W, x_true=x_true if spec.consistent else None)
    model = ObjectiveModel(kind=spec.kind, system=system, L=1.0)
    L, mu = estimate_constants(model)
    model = model.with_constants(L, mu)
    set_kind = spec.set_kind or "orthant"
    fset = _default_set(set_kind, n, x_true)
    return model, fset


def _make_kl(spec, rng, m):
    n = spec.n
    A = rng.uniform(0.5, 1.5, size=(m, n))
    x_true = rng.uniform(0.5, 1.5, size=n)
    b = A @ x_true
    if not spec.consistent:
        b = b * rng.uniform(0.7, 1.4, size=m)
    lower = np.full(n, 0.4 * float(x_true.min()))
    upper = np.full(n, 2.5 * float(x_true.max()))
    fset = geometry.box(lower, upper)
    system = LinearSystem(A=A, b=b, x_true=x_true if spec.consistent else None)
    model = ObjectiveModel(kind=KL, system=system, L=1.0)
    L, _ = estimate_constants(model, fset)
    # Rescaling (A, b) -> (cA, cb) leaves the solution set and the EM map
    # unchanged while multiplying the Hessian, hence L and mu, by c.
    c = spec.kl_l_target / L
    system = LinearSystem(A=c * A, b=c * b, x_true=system.x_true)
    model = ObjectiveModel(kind=KL, system=system, L=1.0)
    L, mu = estimate_constants(model, fset)
    model = model.with_constants(L, mu)
    if spec.set_kind not in (None, "box"):
        raise ValueError("KL instances require a box feasible set")
    return model, fset


def _default_set(set_kind, n, x_true):
    if set_kind == "orthant":
        return geometry.nonneg_orthant(n)
    if set_kind == "box":
        return geometry.box(np.zeros(n), np.full(n, 2.0 * float(np.max(x_true)) + 1.0))
    raise ValueError(f"unknown default set kind: {set_kind!r}")
