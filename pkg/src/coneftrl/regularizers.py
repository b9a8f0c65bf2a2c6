"""Regularizers on generator sets: values, gradients, conjugate-argmax maps,
and certified (range, strong-convexity) constants.

The conjugate argmax x(y) = argmax_{x in X} {<y, x> - h(x)} is the FTRL step.
Closed forms: softmax for the entropic regularizer on the simplex, a capped
softmax for the scaled entropic regularizer on {x in [0,1]^d, sum x = m}, and
a Euclidean projection for h = ||x||^2/2. Everything else goes through
projected gradient ascent on the concave objective.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, DimensionMismatchError, InputError
from .geometry import (
    BallCapGenerators,
    CappedSimplexGenerators,
    GeneratorSet,
    LpNorm,
    MaxPairNorm,
    SimplexGenerators,
    descriptor,
    dual_exponent,
    generator_dim,
)
from .solvers import pga_maximize, project_onto

# ---------------------------------------------------------------------------
# kinds


@dataclass(frozen=True)
class Entropic:
    d: int


@dataclass(frozen=True)
class ScaledEntropic:
    """h(x) = sum_i (x_i/m) log(x_i/m)."""

    d: int
    m: int


@dataclass(frozen=True)
class LpSquared:
    """h(x) = (scale/2) ||x||_{q'}^2, q' in (1, 2]."""

    q_prime: float
    scale: float = 1.0

    def __post_init__(self):
        if not 1.0 < self.q_prime <= 2.0:
            raise InputError("need q' in (1, 2]")
        if self.scale <= 0:
            raise InputError("scale must be positive")


@dataclass(frozen=True)
class EuclideanSquared:
    pass


@dataclass(frozen=True)
class CompositeGlobalCost:
    """h(z, z') = (A/2)||z||_2^2 + (1/2)||z'||_{q'}^2 on R^d x R^d."""

    A: float
    q_prime: float

    def __post_init__(self):
        if self.A <= 0:
            raise InputError("need A > 0")
        if not 1.0 < self.q_prime <= 2.0:
            raise InputError("need q' in (1, 2]")


@dataclass(eq=False)
class Regularizer:
    kind: object
    domain: GeneratorSet


# ---------------------------------------------------------------------------
# values and gradients (x log x evaluated as 0 at x = 0)


def _xlogx(x):
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    return out


def _lq_sq_value(x, q):
    n = np.power(np.power(np.abs(x), q).sum(), 1.0 / q)
    return 0.5 * n * n


def _lq_sq_grad(x, q):
    # grad of ||x||_q^2 / 2 = ||x||_q^(2-q) |x|^(q-1) sign(x); 0 at the origin
    n = np.power(np.power(np.abs(x), q).sum(), 1.0 / q)
    if n == 0.0:
        return np.zeros_like(x)
    return np.power(n, 2.0 - q) * np.power(np.abs(x), q - 1.0) * np.sign(x)


def value(reg: Regularizer, x: np.ndarray) -> float:
    k = reg.kind
    x = np.asarray(x, dtype=float)
    if isinstance(k, Entropic):
        return float(_xlogx(x).sum())
    if isinstance(k, ScaledEntropic):
        return float(_xlogx(x / k.m).sum())
    if isinstance(k, LpSquared):
        return k.scale * _lq_sq_value(x, k.q_prime)
    if isinstance(k, EuclideanSquared):
        return 0.5 * float(x @ x)
    if isinstance(k, CompositeGlobalCost):
        d = x.size // 2
        return 0.5 * k.A * float(x[:d] @ x[:d]) + _lq_sq_value(x[d:], k.q_prime)
    raise InputError(f"unknown regularizer kind {type(k).__name__}")


def grad(reg: Regularizer, x: np.ndarray) -> np.ndarray:
    k = reg.kind
    x = np.asarray(x, dtype=float)
    if isinstance(k, Entropic):
        return np.log(np.clip(x, 1e-300, None)) + 1.0
    if isinstance(k, ScaledEntropic):
        return (np.log(np.clip(x / k.m, 1e-300, None)) + 1.0) / k.m
    if isinstance(k, LpSquared):
        return k.scale * _lq_sq_grad(x, k.q_prime)
    if isinstance(k, EuclideanSquared):
        return x.copy()
    if isinstance(k, CompositeGlobalCost):
        d = x.size // 2
        return np.concatenate([k.A * x[:d], _lq_sq_grad(x[d:], k.q_prime)])
    raise InputError(f"unknown regularizer kind {type(k).__name__}")


# ---------------------------------------------------------------------------
# conjugate argmax


def softmax(y: np.ndarray) -> np.ndarray:
    w = np.exp(y - y.max())
    return w / w.sum()


def capped_softmax(g: np.ndarray, m: int) -> np.ndarray:
    """argmax over {x in [0,1]^d, sum x = m} of <g, x> - sum (x_i/m) log(x_i/m).

    Stationarity gives x_i = min(1, C exp(m g_i)); the saturated set is found
    by a descending scan (exact, log-domain). See `_capped_softmax_bisect` for
    the bisection reference used in tests.
    """
    g = np.asarray(g, dtype=float)
    d = g.size
    if not 1 <= m <= d:
        raise InputError(f"need 1 <= m <= {d}")
    if m == d:
        return np.ones(d)
    w = m * g
    order = np.argsort(-w, kind="stable")
    ws = w[order]
    # logsumexp of the tail ws[k:], for k = 0..m-1
    for k in range(m):
        tail = ws[k:]
        hi = tail[0]
        log_s = hi + np.log(np.exp(tail - hi).sum())
        log_c = np.log(m - k) - log_s
        if k > 0 and ws[k - 1] + log_c < 0.0:
            continue  # the k-th largest would leave the cap: wrong k
        if ws[k] + log_c <= 1e-12:
            x = np.empty(d)
            x[order[:k]] = 1.0
            x[order[k:]] = np.exp(ws[k:] + log_c)
            return x
    # all of the m largest saturate (limit case)
    x = np.zeros(d)
    x[order[:m]] = 1.0
    return x


def _capped_softmax_bisect(g: np.ndarray, m: int, iters: int = 200) -> np.ndarray:
    # reference solve: bisection on log C in x_i = min(1, exp(m g_i + logC))
    g = np.asarray(g, dtype=float)
    w = m * g
    lo, hi = -w.max() - 60.0, -w.min() + 60.0

    def mass(log_c):
        return np.minimum(1.0, np.exp(np.minimum(w + log_c, 0.0))).sum()

    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mass(mid) < m:
            lo = mid
        else:
            hi = mid
    log_c = 0.5 * (lo + hi)
    return np.minimum(1.0, np.exp(np.minimum(w + log_c, 0.0)))


def conj_argmax(reg: Regularizer, y: np.ndarray, tol: float = 1e-8,
                x0: np.ndarray | None = None) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.size != generator_dim(reg.domain):
        raise DimensionMismatchError("functional does not match the domain dimension")
    k, rep = reg.kind, reg.domain.rep
    if isinstance(k, Entropic) and isinstance(rep, SimplexGenerators):
        return softmax(y)
    if isinstance(k, ScaledEntropic) and isinstance(rep, CappedSimplexGenerators):
        return capped_softmax(y, k.m)
    if isinstance(k, EuclideanSquared):
        return project_onto(descriptor(rep), y)

    def fun(x):
        return float(y @ x) - value(reg, x)

    def gfun(x):
        return y - grad(reg, x)

    start = np.zeros_like(y) if x0 is None else np.asarray(x0, dtype=float)
    return pga_maximize(fun, gfun, descriptor(rep), start, tol=tol)


# ---------------------------------------------------------------------------
# certified constants


def certify_constants(reg: Regularizer):
    """(delta, K, norm): range bound max h - min h and the strong-convexity
    modulus with its norm, for the supported (kind, domain) pairings."""
    k, rep = reg.kind, reg.domain.rep
    if isinstance(k, Entropic) and isinstance(rep, SimplexGenerators):
        return float(np.log(k.d)), 1.0, LpNorm(1)
    if isinstance(k, ScaledEntropic) and isinstance(rep, CappedSimplexGenerators):
        return float(np.log(k.d / k.m)), 1.0 / k.m**2, LpNorm(1)
    if isinstance(k, LpSquared):
        delta = reg.domain.delta
        if delta is None:
            delta = numeric_delta(reg)
        n = generator_dim(reg.domain)
        K = k.scale * (k.q_prime - 1.0) * float(n) ** (2.0 * (1.0 / k.q_prime - 1.0))
        return float(delta), float(K), LpNorm(1)
    if isinstance(k, EuclideanSquared):
        if isinstance(rep, BallCapGenerators) and isinstance(rep.norm, LpNorm) \
                and rep.norm.p == 2:
            return 0.5 * rep.radius**2, 1.0, LpNorm(2)
        delta = reg.domain.delta
        if delta is None:
            delta = numeric_delta(reg)
        return float(delta), 1.0, LpNorm(2)
    if isinstance(k, CompositeGlobalCost) and isinstance(rep, BallCapGenerators) \
            and isinstance(rep.norm, MaxPairNorm):
        d = rep.norm.d
        p = dual_exponent(rep.norm.q)
        expo = max(2.0 / p - 1.0, 0.0)
        delta = 0.5 * (k.A * float(d) ** expo + 1.0)
        K = min(k.A, (k.q_prime - 1.0) * float(d) ** (2.0 * (1.0 / k.q_prime - 1.0)))
        return float(delta), float(K), MaxPairNorm(d, np.inf)
    raise CapabilityError(
        f"no certificate for {type(k).__name__} on {type(rep).__name__}"
    )


def numeric_delta(reg: Regularizer, starts: int = 20, seed: int = 20260825) -> float:
    """max h - min h estimated by projected ascent from random starts.

    h is convex, so ascent pushes to extreme points; the max over starts is
    the estimate. min h = 0 is exact whenever 0 is in the domain (our ball
    caps); otherwise the same search is run on -h.
    """
    rng = np.random.default_rng(seed)
    desc = descriptor(reg.domain)
    n = generator_dim(reg.domain)

    def ascend(sign):
        best = None
        for _ in range(starts):
            x0 = project_onto(desc, rng.standard_normal(n))
            x = pga_maximize(lambda x: sign * value(reg, x),
                             lambda x: sign * grad(reg, x),
                             desc, x0, tol=1e-10)
            v = sign * value(reg, x)
            best = v if best is None else max(best, v)
        return best

    h_max = ascend(1.0)
    zero = project_onto(desc, np.zeros(n))
    h_min = value(reg, zero) if float(np.linalg.norm(zero)) <= 1e-12 else -ascend(-1.0)
    return float(h_max - h_min)


def sample_domain(domain: GeneratorSet, n: int, rng: np.random.Generator) -> np.ndarray:
    """n points of the domain (rows), biased toward variety: projections of
    gaussian/uniform draws plus Dirichlet interior points where applicable."""
    rep = domain.rep
    dim = generator_dim(domain)
    desc = descriptor(rep)
    rows = []
    for i in range(n):
        if isinstance(rep, SimplexGenerators) and i % 2 == 0:
            rows.append(rng.dirichlet(np.ones(dim)))
        elif isinstance(rep, CappedSimplexGenerators) and i % 2 == 0:
            w = rng.dirichlet(np.ones(dim)) * rep.m
            rows.append(project_onto(desc, w))
        else:
            scale = 1.5 if not isinstance(rep, BallCapGenerators) else 1.0
            rows.append(project_onto(desc, scale * rng.standard_normal(dim)))
    return np.asarray(rows)


def strong_convexity_check(reg: Regularizer, samples: int, seed: int,
                           K: float | None = None, norm=None):
    """Sample (x, x', lambda) triples in the domain and test
    lam h(x) + (1-lam) h(x') - h(lam x + (1-lam) x')
      >= (K/2) lam (1-lam) ||x - x'||^2.

    Returns a dict with the worst margin (lhs - rhs, >= 0 when the certified
    modulus holds). Pass an inflated K to demonstrate a failing certificate.
    """
    from .geometry import norm_value

    if samples < 1:
        raise InputError("need samples >= 1")
    cert_delta, cert_K, cert_norm = certify_constants(reg)
    K = cert_K if K is None else K
    norm = cert_norm if norm is None else norm
    rng = np.random.default_rng(seed)
    xs = sample_domain(reg.domain, samples, rng)
    ys = sample_domain(reg.domain, samples, rng)
    lams = rng.uniform(0.0, 1.0, samples)
    worst = np.inf
    witness = None
    for x, y, lam in zip(xs, ys, lams):
        lhs = lam * value(reg, x) + (1.0 - lam) * value(reg, y) \
            - value(reg, lam * x + (1.0 - lam) * y)
        rhs = 0.5 * K * lam * (1.0 - lam) * norm_value(norm, x - y) ** 2
        margin = lhs - rhs
        if margin < worst:
            worst = float(margin)
            witness = (x, y, float(lam))
    return {
        "passed": bool(worst >= -1e-10),
        "worst_margin": worst,
        "witness": witness,
        "K": float(K),
        "delta": float(cert_delta),
    }
