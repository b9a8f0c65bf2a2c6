"""Closed convex cones, polar cones, norms, generator sets, support functions,
and the distance/support identity.

Cone representations are a closed enumeration (orthant, finitely generated,
halfspace intersection, load-balancing cost cone): each algorithm in the
package works with one of these, which keeps membership and projection
implementable and testable. `distance_to_cone` deliberately uses a different
method (direct projection or brute-force slice search) than `support_function`
so the two can cross-validate each other.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls as _nnls

from .errors import CapabilityError, DimensionMismatchError, InputError, SolverError
from .solvers import (
    Box,
    Intersection,
    LqBall,
    Polyhedron,
    ProductBall,
    min_weighted_lp_norm,
    project_onto,
    project_polyhedron,
)

# ---------------------------------------------------------------------------
# norms


@dataclass(frozen=True)
class LpNorm:
    p: float


@dataclass(frozen=True)
class SumPairNorm:
    """||(y, y')|| = ||y||_p + ||y'||_inf on R^d x R^d.

    The second summand equals max over the simplex of ||a (.) y'||_p, which is
    how it arises as the payoff-space norm of the load-balancing reduction.
    """

    d: int
    p: float


@dataclass(frozen=True)
class MaxPairNorm:
    """||(z, z')|| = max(||z||_q, ||z'||_1) on R^d x R^d; dual of SumPairNorm."""

    d: int
    q: float


def dual_exponent(p: float) -> float:
    if p < 1:
        raise InputError("norm exponent must be >= 1")
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


def lp_norm_value(v: np.ndarray, p: float) -> float:
    v = np.asarray(v, dtype=float)
    if np.isinf(p):
        return float(np.abs(v).max()) if v.size else 0.0
    if p == 1:
        return float(np.abs(v).sum())
    if p == 2:
        return float(np.linalg.norm(v))
    return float(np.power(np.power(np.abs(v), p).sum(), 1.0 / p))


def norm_value(tag, v: np.ndarray) -> float:
    v = np.asarray(v, dtype=float)
    if isinstance(tag, LpNorm):
        return lp_norm_value(v, tag.p)
    if isinstance(tag, SumPairNorm):
        _check_pair_dim(tag.d, v)
        return lp_norm_value(v[: tag.d], tag.p) + lp_norm_value(v[tag.d :], np.inf)
    if isinstance(tag, MaxPairNorm):
        _check_pair_dim(tag.d, v)
        return max(lp_norm_value(v[: tag.d], tag.q), lp_norm_value(v[tag.d :], 1))
    raise InputError(f"unknown norm tag {type(tag).__name__}")


def dual_norm_tag(tag):
    if isinstance(tag, LpNorm):
        return LpNorm(dual_exponent(tag.p))
    if isinstance(tag, SumPairNorm):
        return MaxPairNorm(tag.d, dual_exponent(tag.p))
    if isinstance(tag, MaxPairNorm):
        return SumPairNorm(tag.d, dual_exponent(tag.q))
    raise InputError(f"unknown norm tag {type(tag).__name__}")


def unit_ball_descriptor(tag, radius: float = 1.0):
    if isinstance(tag, LpNorm):
        return LqBall(tag.p, radius)
    if isinstance(tag, MaxPairNorm):
        return ProductBall(tag.d, tag.q, radius, radius)
    raise CapabilityError(f"no projectable ball for {type(tag).__name__}")


def _check_pair_dim(d: int, v: np.ndarray):
    if v.size != 2 * d:
        raise DimensionMismatchError(f"expected a vector of dim {2 * d}, got {v.size}")


# ---------------------------------------------------------------------------
# cones


@dataclass(frozen=True, eq=False)
class Orthant:
    """{y : signs_i * y_i >= 0}, signs in {+1, -1}^d."""

    signs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "signs", np.asarray(self.signs, dtype=float))
        if not np.all(np.abs(self.signs) == 1.0):
            raise InputError("orthant signs must be +-1")


@dataclass(frozen=True, eq=False)
class FinitelyGeneratedCone:
    """{sum_j lam_j rays_j : lam >= 0}; rays are the rows."""

    rays: np.ndarray

    def __post_init__(self):
        rays = np.atleast_2d(np.asarray(self.rays, dtype=float))
        if rays.shape[0] == 0 or not np.all(np.linalg.norm(rays, axis=1) > 0):
            raise InputError("rays must be nonzero")
        object.__setattr__(self, "rays", rays)


@dataclass(frozen=True, eq=False)
class HalfspaceCone:
    """{y : normals @ y <= 0}; normals are the rows."""

    normals: np.ndarray

    def __post_init__(self):
        normals = np.atleast_2d(np.asarray(self.normals, dtype=float))
        if normals.shape[0] == 0 or not np.all(np.linalg.norm(normals, axis=1) > 0):
            raise InputError("normals must be nonzero")
        object.__setattr__(self, "normals", normals)


@dataclass(frozen=True)
class GlobalCostCone:
    """{(y, y') in R+^d x R+^d : ||y||_p <= min_{a in simplex} ||a (.) y'||_p}.

    The target cone of the load-balancing reduction. No finite halfspace
    description exists; membership goes through the weighted-norm minimum and
    outer approximations are maintained by the application module.
    """

    d: int
    p: float

    def __post_init__(self):
        if self.d < 2:
            raise InputError("need d >= 2")
        if not self.p > 1:
            raise InputError("need p > 1")


def ambient_dim(cone) -> int:
    if isinstance(cone, Orthant):
        return int(cone.signs.size)
    if isinstance(cone, FinitelyGeneratedCone):
        return int(cone.rays.shape[1])
    if isinstance(cone, HalfspaceCone):
        return int(cone.normals.shape[1])
    if isinstance(cone, GlobalCostCone):
        return 2 * cone.d
    raise InputError(f"unknown cone {type(cone).__name__}")


def polar(cone):
    """Polar cone {x : <y, x> <= 0 for all y in cone}."""
    if isinstance(cone, Orthant):
        return Orthant(-cone.signs)
    if isinstance(cone, FinitelyGeneratedCone):
        return HalfspaceCone(cone.rays)
    if isinstance(cone, HalfspaceCone):
        return FinitelyGeneratedCone(cone.normals)
    if isinstance(cone, GlobalCostCone):
        raise CapabilityError(
            "the load-balancing polar has no finite description; "
            "use the cutting-plane outer approximation"
        )
    raise InputError(f"unknown cone {type(cone).__name__}")


def membership(y: np.ndarray, cone, tol: float = 1e-9) -> bool:
    y = np.asarray(y, dtype=float)
    if y.size != ambient_dim(cone):
        raise DimensionMismatchError("point does not match the cone dimension")
    if isinstance(cone, Orthant):
        return bool((cone.signs * y).min() >= -tol)
    if isinstance(cone, HalfspaceCone):
        return bool((cone.normals @ y).max() <= tol)
    if isinstance(cone, FinitelyGeneratedCone):
        resid = y - project_to_cone(y, cone)
        return bool(np.linalg.norm(resid) <= tol * max(1.0, np.linalg.norm(y)))
    if isinstance(cone, GlobalCostCone):
        head, tail = y[: cone.d], y[cone.d :]
        if head.min() < -tol or tail.min() < -tol:
            return False
        phi, _ = min_weighted_lp_norm(np.clip(tail, 0.0, None), cone.p)
        return lp_norm_value(np.clip(head, 0.0, None), cone.p) <= phi + tol
    raise InputError(f"unknown cone {type(cone).__name__}")


def project_to_cone(y: np.ndarray, cone) -> np.ndarray:
    """Exact Euclidean projection onto the cone (orthant clip, polyhedral
    active set, or nonnegative least squares on the rays)."""
    y = np.asarray(y, dtype=float)
    if isinstance(cone, Orthant):
        return np.where(cone.signs * y >= 0.0, y, 0.0)
    if isinstance(cone, HalfspaceCone):
        return project_polyhedron(cone.normals, y)
    if isinstance(cone, FinitelyGeneratedCone):
        lam, _ = _nnls(cone.rays.T, y)
        return cone.rays.T @ lam
    raise CapabilityError(
        f"{type(cone).__name__} does not support exact Euclidean projection"
    )


def moreau_decompose(y: np.ndarray, cone):
    """y = proj_cone(y) + proj_polar(y), orthogonal parts."""
    y = np.asarray(y, dtype=float)
    yc = project_to_cone(y, cone)
    yp = y - yc
    if abs(float(yc @ yp)) > 1e-8 * max(1.0, float(y @ y)):
        raise SolverError("moreau parts are not orthogonal",
                          best_x=yc, residual=float(yc @ yp))
    return yc, yp


# ---------------------------------------------------------------------------
# generator sets


@dataclass(frozen=True)
class SimplexGenerators:
    d: int


@dataclass(frozen=True)
class CappedSimplexGenerators:
    """{x in [0,1]^d : sum x = m} = conv{indicators of m-subsets}."""

    d: int
    m: int


@dataclass(frozen=True, eq=False)
class PolytopeGenerators:
    vertices: np.ndarray  # rows


@dataclass(eq=False)
class BallCapGenerators:
    """Ball cap X = B cap cone, optionally shrunk by outer halfspace cuts
    <c, x> <= 0. cone=None means the cone part is given by the cuts alone
    (outer approximation of a polar with no finite description)."""

    norm: object
    cone: object = None
    cuts: list = field(default_factory=list)
    radius: float = 1.0


@dataclass(eq=False)
class GeneratorSet:
    rep: object
    delta: float | None = None
    radius: float | None = None


def generator_dim(rep) -> int:
    if isinstance(rep, GeneratorSet):
        rep = rep.rep
    if isinstance(rep, SimplexGenerators):
        return rep.d
    if isinstance(rep, CappedSimplexGenerators):
        return rep.d
    if isinstance(rep, PolytopeGenerators):
        return int(np.atleast_2d(rep.vertices).shape[1])
    if isinstance(rep, BallCapGenerators):
        if isinstance(rep.norm, (MaxPairNorm, SumPairNorm)):
            return 2 * rep.norm.d
        if rep.cone is not None:
            return ambient_dim(rep.cone)
        if rep.cuts:
            return int(np.asarray(rep.cuts[0]).size)
        raise InputError("ball cap with lp norm needs a cone or cuts to fix the dimension")
    raise InputError(f"unknown generator representation {type(rep).__name__}")


def cap_generator(cone, norm) -> GeneratorSet:
    """The generator B cap cone (unit ball of `norm`), radius 1 under norm."""
    return GeneratorSet(BallCapGenerators(norm=norm, cone=cone, cuts=[]), radius=1.0)


def _cone_descriptors(cone):
    if cone is None:
        return []
    if isinstance(cone, Orthant):
        lo = np.where(cone.signs > 0, 0.0, -np.inf)
        hi = np.where(cone.signs > 0, np.inf, 0.0)
        return [Box(lo, hi)]
    if isinstance(cone, HalfspaceCone):
        return [Polyhedron(cone.normals)]
    raise CapabilityError(
        f"{type(cone).__name__} has no exact projection for the ball-cap solver"
    )


def descriptor(rep):
    """Projectable feasible-set descriptor of a generator representation."""
    if isinstance(rep, GeneratorSet):
        rep = rep.rep
    from .solvers import CappedSimplexSet, SimplexSet  # local names, no cycle

    if isinstance(rep, SimplexGenerators):
        return SimplexSet(rep.d)
    if isinstance(rep, CappedSimplexGenerators):
        return CappedSimplexSet(rep.d, rep.m)
    if isinstance(rep, BallCapGenerators):
        # memoized per representation object (and cut count, in case a caller
        # appends cuts in place) so projection warm-start caches persist
        cached = getattr(rep, "_desc", None)
        if cached is not None and cached[0] == len(rep.cuts):
            return cached[1]
        members = [unit_ball_descriptor(rep.norm, rep.radius)]
        members += _cone_descriptors(rep.cone)
        if rep.cuts:
            members.append(Polyhedron(np.atleast_2d(np.asarray(rep.cuts, dtype=float))))
        desc = members[0] if len(members) == 1 else Intersection(members)
        rep._desc = (len(rep.cuts), desc)
        return desc
    raise CapabilityError(f"{type(rep).__name__} is not projectable")


def _euclidean_diameter(rep: BallCapGenerators) -> float:
    # l2 diameter bound of the ball cap, used in the support gap certificate
    tag = rep.norm
    if isinstance(tag, LpNorm):
        n = generator_dim(rep)
        scale = 1.0 if tag.p <= 2 else float(n) ** (0.5 - 1.0 / tag.p)
    elif isinstance(tag, MaxPairNorm):
        head = 1.0 if tag.q <= 2 else float(tag.d) ** (0.5 - 1.0 / tag.q)
        scale = float(np.hypot(head, 1.0))  # l2 of (head ball, l1 ball) product
    else:
        raise CapabilityError("no diameter bound for this ball norm")
    return 2.0 * rep.radius * scale


def holder_maximizer(v: np.ndarray, p: float) -> np.ndarray:
    """u with ||u||_p <= 1 and <v, u> = ||v||_{p*} (Holder equality)."""
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        return np.zeros_like(v)
    if np.isinf(p):
        return np.sign(v)
    if p == 1:
        j = int(np.argmax(np.abs(v)))
        u = np.zeros_like(v)
        u[j] = np.sign(v[j])
        return u
    q = dual_exponent(p)
    mag = np.abs(v)
    u = np.sign(v) * np.power(mag, q - 1.0)
    return u / np.power(lp_norm_value(v, q), q - 1.0)


def support_point(rep, y: np.ndarray, tol: float = 1e-8, x0: np.ndarray | None = None):
    """(sup_{x in X} <y, x>, argmax). For ball caps the value is a certified
    lower bound with gap <= tol (variational-inequality certificate of the
    fixed-step projected ascent)."""
    if isinstance(rep, GeneratorSet):
        rep = rep.rep
    y = np.asarray(y, dtype=float)
    if generator_dim(rep) != y.size:
        raise DimensionMismatchError("functional does not match the generator dimension")

    if isinstance(rep, SimplexGenerators):
        i = int(np.argmax(y))
        x = np.zeros(y.size)
        x[i] = 1.0
        return float(y[i]), x
    if isinstance(rep, CappedSimplexGenerators):
        idx = np.argsort(-y, kind="stable")[: rep.m]
        x = np.zeros(y.size)
        x[idx] = 1.0
        return float(y[idx].sum()), x
    if isinstance(rep, PolytopeGenerators):
        verts = np.atleast_2d(rep.vertices)
        vals = verts @ y
        i = int(np.argmax(vals))
        return float(vals[i]), verts[i].copy()
    if isinstance(rep, BallCapGenerators):
        if (
            isinstance(rep.cone, Orthant)
            and isinstance(rep.norm, LpNorm)
            and not rep.cuts
        ):
            # closed form: zero out coordinates whose sign constraint blocks y
            masked = np.where(rep.cone.signs * y > 0.0, y, 0.0)
            val = rep.radius * lp_norm_value(masked, dual_exponent(rep.norm.p))
            x = rep.radius * holder_maximizer(masked, rep.norm.p)
            return float(val), x
        return _support_ballcap(rep, y, tol, x0)
    raise InputError(f"unknown generator representation {type(rep).__name__}")


def support_function(rep, y: np.ndarray, tol: float = 1e-8) -> float:
    return support_point(rep, y, tol)[0]


def _support_ballcap(rep: BallCapGenerators, y: np.ndarray, tol: float,
                     x0: np.ndarray | None, max_iter: int = 20000):
    desc = descriptor(rep)
    diam = _euclidean_diameter(rep)
    x = project_onto(desc, np.zeros_like(y) if x0 is None else np.asarray(x0, dtype=float))
    yn = float(np.linalg.norm(y))
    if yn == 0.0:
        return 0.0, x
    step = 1.0 / yn  # unit-length moves; gap certificate scales accordingly
    for _ in range(max_iter):
        x_new = project_onto(desc, x + step * y)
        gap = float(np.linalg.norm(x_new - x)) / step * diam
        x = x_new
        if gap <= tol:
            return float(y @ x), x
    raise SolverError("support ascent did not certify the gap",
                      best_x=x, residual=gap)


# ---------------------------------------------------------------------------
# distances (the oracle side of the distance/support identity)


def distance_to_cone(y: np.ndarray, cone, norm, tol: float = 1e-6) -> float:
    """inf over the cone of the *dual* norm distance to y, by a method
    independent of support_function: coordinate clipping for orthants,
    brute-force search over a sampled cone slice for finitely generated cones.
    """
    y = np.asarray(y, dtype=float)
    if y.size != ambient_dim(cone):
        raise DimensionMismatchError("point does not match the cone dimension")
    dual = dual_norm_tag(norm)
    if isinstance(cone, Orthant):
        # clipping minimizes every coordinate deviation simultaneously, which
        # is optimal for any lp norm over a product of halflines
        return norm_value(dual, y - project_to_cone(y, cone))
    if isinstance(cone, FinitelyGeneratedCone):
        return _distance_fg_bruteforce(y, cone.rays, dual)
    raise CapabilityError(
        f"no independent distance oracle for {type(cone).__name__}"
    )


def _simplex_grid(k: int, step: float) -> np.ndarray:
    n = int(round(1.0 / step))
    if k == 1:
        return np.ones((1, 1))
    if k == 2:
        w = np.linspace(0.0, 1.0, n + 1)
        return np.stack([w, 1.0 - w], axis=1)
    if k == 3:
        pts = []
        for i in range(n + 1):
            for j in range(n + 1 - i):
                pts.append((i / n, j / n, (n - i - j) / n))
        return np.asarray(pts)
    raise CapabilityError("sampled-slice oracle supports at most 3 rays")


def _distance_fg_bruteforce(y, rays, dual):
    k = rays.shape[0]
    step = 1e-3  # documented oracle resolution, per axis
    weights = _simplex_grid(k, step)
    best_val = np.inf
    best_w = weights[0]
    for rnd in range(3):  # base grid, then two zoomed meshes around the best
        vals = _per_row_min(y, weights @ rays, dual)
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val = float(vals[i])
            best_w = weights[i]
        if k == 1:
            break
        span = step / (8.0 ** (rnd + 1))
        lo = np.clip(best_w - 10 * span, 0.0, 1.0)
        hi = np.clip(best_w + 10 * span, 0.0, 1.0)
        axes = [np.linspace(lo[j], hi[j], 21) for j in range(k)]
        mesh = np.stack([m.ravel() for m in np.meshgrid(*axes)], axis=1)
        ssum = mesh.sum(axis=1)
        mesh = mesh[ssum > 1e-9] / ssum[ssum > 1e-9][:, None]
        weights = mesh
    return float(min(best_val, norm_value(dual, y)))


def _per_row_min(y, dirs, dual):
    dn = np.linalg.norm(dirs, axis=1)
    out = np.full(dirs.shape[0], norm_value(dual, y))
    keep = dn > 0
    if not keep.any():
        return out
    sub = dirs[keep]
    yn = float(np.linalg.norm(y))
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a = np.zeros(sub.shape[0])
    b = 2.0 * yn / np.linalg.norm(sub, axis=1) + 1e-30

    def values(cs):
        pts = cs[:, None] * sub - y[None, :]
        if isinstance(dual, LpNorm):
            p = dual.p
            if np.isinf(p):
                return np.abs(pts).max(axis=1)
            return np.power(np.power(np.abs(pts), p).sum(axis=1), 1.0 / p)
        return np.array([norm_value(dual, row) for row in pts])

    c1 = b - invphi * b
    c2 = invphi * b
    f1, f2 = values(c1), values(c2)
    for _ in range(48):
        shrink = f1 < f2
        b = np.where(shrink, c2, b)
        a = np.where(shrink, a, c1)
        c1 = b - invphi * (b - a)
        c2 = a + invphi * (b - a)
        f1, f2 = values(c1), values(c2)
    out[keep] = np.minimum(np.minimum(f1, f2), out[keep])
    return out
