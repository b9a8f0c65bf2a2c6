"""Shared numeric machinery: projections, Dykstra, projected gradient ascent,
a dense simplex LP, the per-step slack oracle, stationary distributions, the
weighted-norm minimization used by load-balancing costs, and a greedy
Caratheodory decomposition of capped-simplex points.

Feasible sets are small frozen descriptor dataclasses so callers can combine
them (via `Intersection`) without committing to a solver; `project_onto`
dispatches to an exact routine per kind and `dykstra_project` handles the
generic intersection case.
"""

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import lsq_linear as _lsq_linear
from scipy.optimize import nnls as _nnls

from .errors import (
    DimensionMismatchError,
    InfeasibleError,
    InputError,
    SolverError,
    UnboundedError,
)

_BISECT_TOL = 1e-12
_BISECT_CAP = 200


# ---------------------------------------------------------------------------
# feasible-set descriptors


@dataclass(frozen=True, eq=False)
class SimplexSet:
    """{x >= 0, sum(x) = mass}."""

    dim: int
    mass: float = 1.0


@dataclass(frozen=True, eq=False)
class CappedSimplexSet:
    """{x in [0, 1]^dim, sum(x) = m}."""

    dim: int
    m: int


@dataclass(frozen=True, eq=False)
class L1Ball:
    radius: float = 1.0


@dataclass(frozen=True, eq=False)
class LqBall:
    """{||x||_q <= radius}, q in [1, inf]."""

    q: float
    radius: float = 1.0


@dataclass(frozen=True, eq=False)
class ProductBall:
    """{||x[:d]||_q <= r_head, ||x[d:]||_1 <= r_tail} on R^(2d).

    This is the unit ball of max(||z||_q, ||z'||_1) when both radii are 1.
    """

    d: int
    q: float
    r_head: float = 1.0
    r_tail: float = 1.0


@dataclass(frozen=True, eq=False)
class Halfspace:
    """{x : <normal, x> <= offset}."""

    normal: np.ndarray
    offset: float = 0.0


@dataclass(frozen=True, eq=False)
class Polyhedron:
    """{x : normals @ x <= 0}; homogeneous only, projected via the NNLS dual.

    warm caches recently optimal active sets; a hit turns the projection into
    one small matmul pass whose KKT conditions are verified before use."""

    normals: np.ndarray
    warm: dict = field(default_factory=dict, repr=False, compare=False)


@dataclass(frozen=True, eq=False)
class Box:
    lo: np.ndarray
    hi: np.ndarray


@dataclass(frozen=True, eq=False)
class Intersection:
    """Intersection of member descriptors, projected by Dykstra.

    warm carries the previous call's dual corrections; repeated projections
    of nearby points then converge in a cycle or two instead of from
    scratch."""

    members: tuple
    warm: dict

    def __init__(self, members: Iterable):
        object.__setattr__(self, "members", tuple(members))
        object.__setattr__(self, "warm", {})


# ---------------------------------------------------------------------------
# exact projections


def project_simplex(v: np.ndarray, mass: float = 1.0) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum(x) = mass} by sort and threshold."""
    v = np.asarray(v, dtype=float)
    if mass <= 0:
        raise InputError("simplex mass must be positive")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - mass
    ks = np.arange(1, v.size + 1)
    cond = u - css / ks > 0
    rho = ks[cond][-1]
    tau = css[rho - 1] / rho
    return np.maximum(v - tau, 0.0)


def project_l1_ball(v: np.ndarray, radius: float = 1.0) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if radius < 0:
        raise InputError("l1 radius must be nonnegative")
    if np.abs(v).sum() <= radius:
        return v.copy()
    if radius == 0:
        return np.zeros_like(v)
    return np.sign(v) * project_simplex(np.abs(v), radius)


def project_capped_simplex(v: np.ndarray, m: float) -> np.ndarray:
    """Euclidean projection onto {x in [0,1]^d, sum(x) = m}: bisection on the
    shift tau in clip(v - tau, 0, 1)."""
    v = np.asarray(v, dtype=float)
    d = v.size
    if not 0 < m <= d:
        raise InputError(f"need 0 < m <= {d}, got {m}")
    lo, hi = v.min() - 1.0, v.max()  # sum(x(lo)) = d >= m, sum(x(hi)) = 0
    for _ in range(_BISECT_CAP):
        tau = 0.5 * (lo + hi)
        s = np.clip(v - tau, 0.0, 1.0).sum()
        if s > m:
            lo = tau
        else:
            hi = tau
        if hi - lo <= _BISECT_TOL:
            break
    x = np.clip(v - 0.5 * (lo + hi), 0.0, 1.0)
    free = (x > 1e-14) & (x < 1.0 - 1e-14)
    if free.any():  # distribute the bisection residue over interior coords
        x[free] += (m - x.sum()) / free.sum()
        x = np.clip(x, 0.0, 1.0)
    return x


def _project_lq_ball_general(v: np.ndarray, q: float, radius: float) -> np.ndarray:
    # KKT: u + lam*q*u^(q-1) = |v| per coordinate, u >= 0; outer bisection on lam.
    a = np.abs(v)

    def shrink(lam):
        lo = np.zeros_like(a)
        hi = a.copy()
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            too_big = mid + lam * q * np.power(mid, q - 1.0) > a
            hi = np.where(too_big, mid, hi)
            lo = np.where(too_big, lo, mid)
        return 0.5 * (lo + hi)

    lam_hi = 1.0
    while np.power(np.power(shrink(lam_hi), q).sum(), 1.0 / q) > radius:
        lam_hi *= 4.0
        if lam_hi > 1e18:
            raise SolverError("lq-ball projection: failed to bracket multiplier")
    lam_lo = 0.0
    for _ in range(100):
        lam = 0.5 * (lam_lo + lam_hi)
        u = shrink(lam)
        if np.power(np.power(u, q).sum(), 1.0 / q) > radius:
            lam_lo = lam
        else:
            lam_hi = lam
    return np.sign(v) * shrink(lam_hi)


def project_lq_ball(v: np.ndarray, q: float, radius: float = 1.0) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if q < 1:
        raise InputError("lq ball needs q >= 1")
    if radius < 0:
        raise InputError("lq radius must be nonnegative")
    if radius == 0:
        return np.zeros_like(v)
    if np.isinf(q):
        return np.clip(v, -radius, radius)
    if q == 1:
        return project_l1_ball(v, radius)
    nrm = np.power(np.power(np.abs(v), q).sum(), 1.0 / q)
    if nrm <= radius:
        return v.copy()
    if q == 2:
        return v * (radius / nrm)
    return _project_lq_ball_general(v, q, radius)


def _try_active_set(normals: np.ndarray, v: np.ndarray, entry,
                    scale: float):
    """Projection candidate from a cached active set (idx, N_idx^T, pinv).

    Returns the projection when the candidate satisfies the full KKT system
    (multipliers >= 0, feasibility, active rows tight), else None.
    """
    _, idx, NT, F = entry
    if idx.size == 0:
        return None
    lam = F @ v
    if lam.min() < -1e-12:
        return None
    x = v - NT @ lam
    viol = normals @ x
    if viol.max() > 1e-9 * scale:
        return None
    if idx.size and np.abs(viol[idx]).max() > 1e-9 * scale:
        return None
    return x


def project_polyhedron(normals: np.ndarray, v: np.ndarray,
                       warm: dict | None = None) -> np.ndarray:
    """Projection onto {x : N x <= 0} via the dual min_{lam>=0} ||N^T lam - v||_2.

    nnls can return a feasible but suboptimal multiplier on nearly collinear
    rows, so the KKT conditions (feasibility and complementary slackness) are
    checked and a bounded least-squares solve takes over when they fail; if
    the dual is degenerate enough to defeat both, a ridge-regularized nnls
    breaks the tie. `warm`, if given, caches a few recently optimal active
    sets; a cached set whose KKT conditions hold at v gives the projection in
    one matmul pass.
    """
    normals = np.atleast_2d(np.asarray(normals, dtype=float))
    v = np.asarray(v, dtype=float)
    if normals.shape[1] != v.size:
        raise DimensionMismatchError("polyhedron normals do not match the point")
    if normals.shape[0] == 0 or np.all(normals @ v <= 0.0):
        return v.copy()
    scale = max(1.0, float(np.abs(v).max()))
    entries = warm.get("sets") if warm is not None else None
    if entries:
        for k, entry in enumerate(entries):
            x = _try_active_set(normals, v, entry, scale)
            if x is not None:
                if k:
                    entries.insert(0, entries.pop(k))  # most recent first
                return x
    lam, _ = _nnls(normals.T, v)
    x = v - normals.T @ lam
    viol = normals @ x
    if (viol.max() > 1e-9 * scale
            or float((lam * np.abs(viol)).max()) > 1e-7 * scale):
        res = _lsq_linear(normals.T, v, bounds=(0.0, np.inf), tol=1e-14,
                          lsq_solver="exact")
        lam = res.x
        x = v - normals.T @ lam
        viol = normals @ x
        if (viol.max() > 1e-8 * scale
                or float((lam * np.abs(viol)).max()) > 1e-6 * scale):
            # nearly parallel rows leave the dual degenerate for both solvers;
            # a tiny ridge makes it strictly convex and barely moves x
            m = normals.shape[0]
            aug = np.vstack([normals.T, np.sqrt(1e-12) * np.eye(m)])
            lam, _ = _nnls(aug, np.concatenate([v, np.zeros(m)]))
            x = v - normals.T @ lam
            viol = normals @ x
            if (viol.max() > 1e-8 * scale
                    or float((lam * np.abs(viol)).max()) > 1e-6 * scale):
                raise SolverError("polyhedron projection failed its KKT check",
                                  best_x=x, residual=float(viol.max()))
    if warm is not None:
        idx = np.flatnonzero(lam > 1e-10)
        key = idx.tobytes()
        entries = warm.setdefault("sets", [])
        if not any(e[0] == key for e in entries):
            NT = normals[idx].T
            entries.insert(0, (key, idx, NT, np.linalg.pinv(NT)))
            if len(entries) > 16:
                entries.pop()
    return x


def project_onto(feasible_set, v: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Euclidean projection onto a descriptor. Exact kinds dispatch to closed
    forms or finite active-set solves; `Intersection` falls back to Dykstra."""
    v = np.asarray(v, dtype=float)
    s = feasible_set
    if isinstance(s, SimplexSet):
        if v.size != s.dim:
            raise DimensionMismatchError(f"expected dim {s.dim}, got {v.size}")
        return project_simplex(v, s.mass)
    if isinstance(s, CappedSimplexSet):
        if v.size != s.dim:
            raise DimensionMismatchError(f"expected dim {s.dim}, got {v.size}")
        return project_capped_simplex(v, s.m)
    if isinstance(s, L1Ball):
        return project_l1_ball(v, s.radius)
    if isinstance(s, LqBall):
        return project_lq_ball(v, s.q, s.radius)
    if isinstance(s, ProductBall):
        if v.size != 2 * s.d:
            raise DimensionMismatchError(f"expected dim {2 * s.d}, got {v.size}")
        head = project_lq_ball(v[: s.d], s.q, s.r_head)
        tail = project_l1_ball(v[s.d :], s.r_tail)
        return np.concatenate([head, tail])
    if isinstance(s, Halfspace):
        n = np.asarray(s.normal, dtype=float)
        if n.size != v.size:
            raise DimensionMismatchError("halfspace normal does not match the point")
        g = float(n @ v) - s.offset
        if g <= 0:
            return v.copy()
        return v - (g / float(n @ n)) * n
    if isinstance(s, Polyhedron):
        return project_polyhedron(s.normals, v, warm=s.warm)
    if isinstance(s, Box):
        return np.clip(v, s.lo, s.hi)
    if isinstance(s, Intersection):
        return dykstra_project(s.members, v, tol=tol)
    raise InputError(f"unknown feasible set {type(s).__name__}")


def dykstra_project(sets: Sequence, v: np.ndarray, tol: float = 1e-9,
                    max_iter: int = 5000, stall_tol: float = 1e-6,
                    warm: dict | None = None) -> np.ndarray:
    """Dykstra's alternating projections onto an intersection of descriptors.

    Stops when the dual corrections move less than `tol` over a full cycle
    (the Birgin-Raydan criterion; iterate movement alone can vanish for a
    cycle while the duals are still far from optimal), or when the correction
    movement is below `stall_tol` but has stopped halving for 50 cycles (the
    member projections' own active-set noise floor, typically ~1e-9).
    Raises SolverError (carrying the last iterate and displacement) if the
    cycle budget runs out without either.

    `warm`, if given, stores the dual corrections between calls. Starting
    from the previous corrections with x = v - sum(corrections) keeps the
    invariant x + sum(corrections) = v, so the iteration still targets the
    projection of v; it is dual block-coordinate descent from a warm dual
    point, which converges fast when successive v's are close.
    """
    sets = list(sets)
    if not sets:
        return np.asarray(v, dtype=float).copy()
    if len(sets) == 1:
        return project_onto(sets[0], v)
    x = np.asarray(v, dtype=float).copy()
    corrections = None
    if warm is not None:
        prev = warm.get("corr")
        if prev is not None and len(prev) == len(sets) and prev[0].size == x.size:
            corrections = [c.copy() for c in prev]
            for c in corrections:
                x -= c
    if corrections is None:
        corrections = [np.zeros_like(x) for _ in sets]
    best_move = np.inf
    best_cycle = 0
    move = np.inf
    for it in range(max_iter):
        move2 = 0.0
        for k, s in enumerate(sets):
            w = x + corrections[k]
            x = project_onto(s, w)
            c_new = w - x
            d = c_new - corrections[k]
            move2 += float(d @ d)
            corrections[k] = c_new
        move = math.sqrt(move2)
        if move <= tol:
            if warm is not None:
                warm["corr"] = corrections
            return x
        if move <= stall_tol and it - best_cycle >= 50:
            return x  # plateau at the member noise floor; duals not kept
        if move < 0.5 * best_move:
            best_move = move
            best_cycle = it
    raise SolverError("dykstra cycle budget exhausted", best_x=x,
                      residual=move)


# ---------------------------------------------------------------------------
# projected gradient ascent


def pga_maximize(fun, grad, feasible_set, x0: np.ndarray, tol: float = 1e-8,
                 max_iter: int = 2000, step0: float = 1.0,
                 step_memory: dict | None = None, min_move: float = 1e-8):
    """Maximize a concave `fun` over a projectable set by projected gradient
    ascent with backtracking.

    Terminates when the unit-step projected-gradient displacement drops to
    tol * max(1, ||g||) (relative to the gradient scale, so steep objectives
    over the same set do not demand ever more iterations), or the objective
    stalls below tol/10 over 20 iterations. The certificate comes from the
    trial point itself: ||P(x+sg)-x||/s is nonincreasing in s while
    ||P(x+sg)-x|| is nondecreasing, so ||y-x||/min(s,1) bounds the unit-step
    displacement and no extra projection is spent on the test.

    `step_memory`, when given, carries the accepted step size between calls
    so warm-started solves skip the initial backtracking. Trials whose
    commanded move `step * ||g||` is below `min_move` are not attempted:
    their displacement would sit inside the projection noise floor.
    """
    x = project_onto(feasible_set, np.asarray(x0, dtype=float))
    f = fun(x)
    step = step0 if step_memory is None else step_memory.get("step", step0)
    recent = [f]
    for _ in range(max_iter):
        g = grad(x)
        gnorm = float(np.linalg.norm(g))
        tol_eff = tol * max(1.0, gnorm)
        moved = False
        halved = False
        for _ in range(60):
            if step * gnorm < min_move:
                break  # stationary at the projection resolution
            y = project_onto(feasible_set, x + step * g)
            if float(np.linalg.norm(y - x)) <= tol_eff * min(step, 1.0):
                fy = fun(y)
                return y if fy >= f else x
            fy = fun(y)
            gdy = float(g @ (y - x))
            # gdy > 0 is required: concavity caps fy - f at gdy, so a trial
            # that the projection fully blocks can only "improve" by noise,
            # and accepting it would loop on a zero step
            if gdy > 0.0 and fy >= f + 1e-4 * gdy and fy >= f - 1e-15:
                x, f = y, fy
                if not halved:
                    # grow only after a clean accept; growing after a halving
                    # re-enters the oscillating accept/halve pattern
                    step *= 1.3
                # only accepted steps are remembered: storing a mid-halving
                # value would chain toward zero across calls and freeze the
                # trial point at x
                if step_memory is not None:
                    step_memory["step"] = step
                moved = True
                break
            step *= 0.5
            halved = True
        if not moved:
            return x  # step collapsed: numerically stationary
        recent.append(f)
        if len(recent) > 20:
            recent.pop(0)
            if recent[-1] - recent[0] < tol / 10.0:
                return x
    raise SolverError("pga iteration budget exhausted", best_x=x,
                      residual=float(np.linalg.norm(project_onto(feasible_set, x + grad(x)) - x)))


# ---------------------------------------------------------------------------
# dense LP: minimize c @ u  s.t.  A u <= b, u >= 0


def lp_solve(c: np.ndarray, A: np.ndarray, b: np.ndarray, tol: float = 1e-9):
    """Two-phase dense simplex with Bland's rule (anti-cycling).

    Returns (value, u). Raises InfeasibleError / UnboundedError.
    """
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if c.size != n or b.size != m:
        raise DimensionMismatchError("lp dimensions are inconsistent")

    # rows with negative rhs get flipped and an artificial variable
    Aw = A.copy()
    bw = b.copy()
    slack_sign = np.ones(m)
    neg = bw < 0
    Aw[neg] *= -1.0
    bw[neg] *= -1.0
    slack_sign[neg] = -1.0
    n_art = int(neg.sum())

    total = n + m + n_art
    T = np.zeros((m, total))
    T[:, :n] = Aw
    T[np.arange(m), n + np.arange(m)] = slack_sign
    art_cols = []
    j = n + m
    basis = np.empty(m, dtype=int)
    for i in range(m):
        if neg[i]:
            T[i, j] = 1.0
            basis[i] = j
            art_cols.append(j)
            j += 1
        else:
            basis[i] = n + i
    rhs = bw.copy()

    def pivot(T, rhs, basis, row, col):
        piv = T[row, col]
        T[row] /= piv
        rhs[row] /= piv
        for r in range(T.shape[0]):
            if r != row and T[r, col] != 0.0:
                rhs[r] -= T[r, col] * rhs[row]
                T[r] -= T[r, col] * T[row]
        basis[row] = col

    def run_phase(T, rhs, basis, cost, allowed):
        for _ in range(20000):
            y = np.zeros(T.shape[1])
            for i, bi in enumerate(basis):
                y += cost[bi] * T[i]
            red = cost - y  # reduced costs
            enter = -1
            for jj in allowed:  # Bland: lowest eligible index enters
                if red[jj] < -tol:
                    enter = jj
                    break
            if enter < 0:
                return
            col = T[:, enter]
            mask = col > tol
            if not mask.any():
                raise UnboundedError("lp objective unbounded")
            ratios = np.full(T.shape[0], np.inf)
            ratios[mask] = rhs[mask] / col[mask]
            best = np.inf
            row = -1
            for i in range(T.shape[0]):  # Bland: lowest basis index leaves
                if ratios[i] < best - 1e-15 or (
                    ratios[i] <= best + 1e-15 and row >= 0 and basis[i] < basis[row]
                ):
                    if ratios[i] < np.inf:
                        best = min(best, ratios[i])
                        row = i
            pivot(T, rhs, basis, row, enter)
        raise SolverError("lp pivot budget exhausted")

    if n_art:
        cost1 = np.zeros(total)
        cost1[art_cols] = 1.0
        run_phase(T, rhs, basis, cost1, range(total))
        val1 = sum(cost1[bi] * rhs[i] for i, bi in enumerate(basis))
        if val1 > 1e-7:
            raise InfeasibleError("lp infeasible", residual=float(val1))
        # drive remaining artificial variables out of the basis if possible
        for i in range(m):
            if basis[i] in art_cols:
                for jj in range(n + m):
                    if abs(T[i, jj]) > tol:
                        pivot(T, rhs, basis, i, jj)
                        break

    cost2 = np.zeros(total)
    cost2[:n] = c
    run_phase(T, rhs, basis, cost2, range(n + m))
    u = np.zeros(total)
    for i, bi in enumerate(basis):
        u[bi] = rhs[i]
    return float(c @ u[:n]), u[:n]


def nu_oracle(z: np.ndarray, zp: np.ndarray):
    """min over the simplex of sum_i max(0, z_i a_i + z'_i), as an LP.

    Returns (nu, a). nu bounds <(a (.) l, l), (z, z')> over l in [0,1]^d; the
    minimizing a is the decision the load-balancing player commits to.
    """
    z = np.asarray(z, dtype=float)
    zp = np.asarray(zp, dtype=float)
    if z.shape != zp.shape or z.ndim != 1:
        raise DimensionMismatchError("nu oracle needs two equal-length vectors")
    d = z.size
    # variables u = (a, t); minimize sum t
    c = np.concatenate([np.zeros(d), np.ones(d)])
    rows = []
    rhs = []
    for i in range(d):  # t_i >= z_i a_i + z'_i
        r = np.zeros(2 * d)
        r[i] = z[i]
        r[d + i] = -1.0
        rows.append(r)
        rhs.append(-zp[i])
    e = np.concatenate([np.ones(d), np.zeros(d)])
    rows.append(e)
    rhs.append(1.0)
    rows.append(-e)
    rhs.append(-1.0)
    val, u = lp_solve(c, np.array(rows), np.array(rhs))
    a = np.clip(u[:d], 0.0, None)
    ssum = a.sum()
    a = a / ssum if ssum > 0 else np.full(d, 1.0 / d)
    return max(0.0, val), a


# ---------------------------------------------------------------------------
# stationary distributions


def stationary_distribution(P: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    """Stationary distribution of a row-stochastic matrix.

    Solves a^T ((1-eps) P + eps/d) = a^T, sum(a) = 1 directly (the damping
    makes the solution unique and picks uniform on the identity chain), then
    certifies ||a^T P - a^T||_inf <= 1e-8 against the undamped matrix.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    d = P.shape[0]
    if P.shape != (d, d):
        raise InputError("transition matrix must be square")
    if (P < -1e-12).any() or np.abs(P.sum(axis=1) - 1.0).max() > 1e-10:
        raise InputError("matrix rows must be probability vectors")
    Pd = (1.0 - eps) * P + eps / d
    M = Pd.T - np.eye(d)
    M[-1, :] = 1.0
    rhs = np.zeros(d)
    rhs[-1] = 1.0
    try:
        a = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        a = np.linalg.lstsq(M, rhs, rcond=None)[0]
    a = np.clip(a, 0.0, None)
    a /= a.sum()
    resid = float(np.abs(a @ P - a).max())
    if resid > 1e-8:
        raise SolverError("stationary distribution residual too large",
                          best_x=a, residual=resid)
    return a


# ---------------------------------------------------------------------------
# weighted-norm minimization over the simplex


def min_weighted_lp_norm(yp: np.ndarray, p: float):
    """min over a in the simplex of ||a (.) yp||_p for yp >= 0, p in [1, inf].

    Closed form from stationarity: a_i proportional to yp_i^(-q) with q the
    dual exponent (q = 1 at p = inf), value (sum yp_i^(-q))^(-1/q). If some
    coordinate of yp is 0 the value is 0 with a the indicator of the first
    such coordinate. Returns (value, a).
    """
    yp = np.asarray(yp, dtype=float)
    if yp.ndim != 1 or yp.size == 0:
        raise InputError("weight vector must be a nonempty 1-d array")
    if (yp < -1e-12).any():
        raise InputError("weights must be nonnegative")
    if p < 1:
        raise InputError("need p >= 1")
    yp = np.clip(yp, 0.0, None)
    zero = np.flatnonzero(yp <= 0.0)
    a = np.zeros(yp.size)
    if zero.size:
        a[zero[0]] = 1.0
        return 0.0, a
    if p == 1:
        # ||a (.) yp||_1 = sum a_i yp_i: put all mass on the smallest weight
        i = int(np.argmin(yp))
        a[i] = 1.0
        return float(yp[i]), a
    q = 1.0 if np.isinf(p) else p / (p - 1.0)
    s = yp.min()
    w = np.power(yp / s, -q)  # in (0, 1], overflow-safe
    tot = w.sum()
    a = w / tot
    return float(s * np.power(tot, -1.0 / q)), a


# ---------------------------------------------------------------------------
# greedy Caratheodory decomposition on the capped simplex


def caratheodory_decompose(x: np.ndarray, m: int, tol: float = 1e-9):
    """Write x in {x in [0,1]^d, sum x = m} as a convex combination of
    indicator vectors of m-subsets.

    Greedy: repeatedly take the m largest residual coordinates, move as much
    weight as possible without crossing a crossing point. At most d terms.
    Returns a list of (subset tuple, weight) with weights summing to 1.
    """
    x = np.asarray(x, dtype=float)
    d = x.size
    m = int(m)
    if not 1 <= m <= d:
        raise InputError(f"need 1 <= m <= {d}")
    if (x < -tol).any() or (x > 1.0 + tol).any():
        raise InputError("point has coordinates outside [0, 1]")
    if abs(x.sum() - m) > 1e-9:
        raise InputError(f"coordinates must sum to {m}, got {x.sum()!r}")

    r = np.clip(x, 0.0, 1.0).tolist()  # python scalars: the loop is tiny-d
    s = 1.0
    out = []
    idx = list(range(d))
    for _ in range(d + 1):
        if s <= 1e-12:
            break
        # descending by residual, ties to the lowest index (stable sort)
        order = sorted(idx, key=r.__getitem__, reverse=True)
        subset = sorted(order[:m])
        w = r[order[m - 1]]  # least of the m largest
        if d > m:
            w = min(w, s - r[order[m]])  # next crossing point
        w = min(w, s)
        if w <= 0:
            raise SolverError("caratheodory made no progress",
                              best_x=np.array(r), residual=s)
        out.append((tuple(subset), w))
        for i in subset:
            r[i] -= w
        s -= w
    if s > 1e-8:
        raise SolverError("caratheodory left unassigned mass",
                          best_x=np.array(r), residual=s)
    total = sum(w for _, w in out)
    out = [(sub, w / total) for sub, w in out]
    recon = np.zeros(d)
    for sub, w in out:
        recon[list(sub)] += w
    if np.abs(recon - x).max() > 1e-8:
        raise SolverError("caratheodory reconstruction drifted",
                          best_x=recon, residual=float(np.abs(recon - x).max()))
    return out
