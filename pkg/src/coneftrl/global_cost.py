"""Global-cost online load balancing as approachability.

The payoff of playing a in the simplex against a load vector l in [0,1]^d is
r(a, l) = (a (.) l, l). The target cone is

    C = {(y, y') >= 0 : ||y||_p <= min_{a in simplex} ||a (.) y'||_p},

whose polar has no finite description; the comparator set B cap C* (B the
unit ball of max{||z||_q, ||z'||_1}, q dual to p) is handled by cutting
planes with a certified per-step slack nu.

Separation is exact: with phi_p(y') = min_a ||a (.) y'||_p,

    (z, z') in C*  iff  g* := max_{y' in simplex} [phi_p(y') ||z+||_q + <z', y'>] <= 0.

g is concave (phi_p is a power mean with exponent -q, hence concave), is
linear on every proper face (phi_p = 0 there), and its interior stationary
point solves sum_i (mu - z'_i)^{q/(q+1)} = ||z+||_q^{q/(q+1)} for the
multiplier mu, a scalar bisection. The maximum is therefore the better of
the best vertex and that interior point.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog as _linprog

from .errors import CutBudgetError, InputError, SolverError
from .games import GameSpec, MixedAction
from .geometry import (
    BallCapGenerators,
    GeneratorSet,
    MaxPairNorm,
    SumPairNorm,
    descriptor,
    dual_exponent,
    holder_maximizer,
    lp_norm_value,
    support_point,
)
from .regularizers import (
    CompositeGlobalCost,
    LpSquared,
    Regularizer,
    grad as reg_grad,
    numeric_delta,
    value as reg_value,
)
from .engine import Schedule
from .solvers import (
    Polyhedron,
    SimplexSet,
    min_weighted_lp_norm,
    nu_oracle,
    pga_maximize,
    project_onto,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GlobalCostInstance:
    d: int
    p: float
    A: float
    q_prime: float
    cut_budget: int = 200
    solver_tol: float = 1e-6

    def __post_init__(self):
        if self.d < 2:
            raise InputError("need d >= 2")
        if not 1.0 < self.p:
            raise InputError("need p in (1, inf]")
        if self.A <= 0:
            raise InputError("need A > 0")
        if not 1.0 < self.q_prime <= 2.0:
            raise InputError("need q' in (1, 2]")
        if self.cut_budget < 0:
            raise InputError("cut budget must be nonnegative")

    @property
    def q(self) -> float:
        return dual_exponent(self.p)


def theorem_constants(d: int, p: float):
    """(A, q') of the lp theorem, with q' clamped into (1, 2]."""
    A = min(float(d) ** (1.0 - 2.0 / p), 1.0)
    q_prime_raw = 1.0 + 1.0 / (2.0 * math.log(d) - 1.0)
    q_prime = min(2.0, q_prime_raw)
    if q_prime_raw > 2.0:
        logger.info("q' = %.4f clamped to 2 at d = %d", q_prime_raw, d)
    return A, q_prime


def make_instance(d: int, p: float, cut_budget: int = 200,
                  solver_tol: float = 1e-6) -> GlobalCostInstance:
    A, q_prime = theorem_constants(d, p)
    return GlobalCostInstance(d, p, A, q_prime, cut_budget, solver_tol)


def theorem_bound(d: int, p: float, T: int) -> float:
    """Stated regret bound 4/sqrt(T) * max{d^(1/p-1/2), sqrt(2e log d)}."""
    head = float(d) ** (1.0 / p - 0.5) if not np.isinf(p) else float(d) ** (-0.5)
    return 4.0 / math.sqrt(T) * max(head, math.sqrt(2.0 * math.e * math.log(d)))


# ---------------------------------------------------------------------------
# game


def make_game(inst: GlobalCostInstance) -> GameSpec:
    d = inst.d

    def payoff(a: MixedAction, load):
        return np.concatenate([a.weights * load, load])

    def pure_payoff(i, load):
        head = np.zeros(d)
        head[i] = load[i]
        return np.concatenate([head, load])

    def oracle(x):
        _, a = nu_oracle(x[:d], x[d:])
        return MixedAction(a)

    def env_grad(a: MixedAction, x):
        # <r(a, load), x> = sum_i load_i (a_i z_i + z'_i) for x = (z, z')
        return a.weights * x[:d] + x[d:]

    return GameSpec(
        name="globalcost",
        n_pure=d,
        payoff_dim=2 * d,
        env_lo=np.zeros(d),
        env_hi=np.ones(d),
        payoff=payoff,
        pure_payoff=pure_payoff,
        oracle=oracle,
        M=2.0,
        M_norm=SumPairNorm(d, 1),
        env_grad=env_grad,
    )


# ---------------------------------------------------------------------------
# polar separation


@dataclass
class SeparationResult:
    inside: bool
    value: float               # max of g over the probability simplex
    y: np.ndarray | None = None
    y_prime: np.ndarray | None = None
    cut_value: float = 0.0     # <(z, z'), (y, y')> at the returned scale


def polar_separation(z: np.ndarray, zp: np.ndarray, inst: GlobalCostInstance,
                     tol: float = 1e-9) -> SeparationResult:
    z = np.asarray(z, dtype=float)
    zp = np.asarray(zp, dtype=float)
    q = inst.q
    c_z = lp_norm_value(np.clip(z, 0.0, None), q)
    zmax = float(zp.max())

    # vertex candidate (phi vanishes on every proper face)
    best_val = zmax
    best_yp = None
    j = int(np.argmax(zp))

    # interior stationary point, if the multiplier equation has a root
    kappa = q / (q + 1.0)
    if c_z > 1e-14:
        rhs = c_z**kappa
        if float(np.sum((zmax - zp) ** kappa)) < rhs:
            lo_mu, hi_mu = zmax, zmax + c_z
            for _ in range(200):
                mu = 0.5 * (lo_mu + hi_mu)
                if float(np.sum((mu - zp) ** kappa)) < rhs:
                    lo_mu = mu
                else:
                    hi_mu = mu
                if hi_mu - lo_mu <= 1e-15 * max(1.0, abs(hi_mu)):
                    break
            mu = 0.5 * (lo_mu + hi_mu)
            w = np.power(np.maximum(mu - zp, 1e-300), -1.0 / (q + 1.0))
            yp = w / w.sum()
            phi, _ = min_weighted_lp_norm(yp, inst.p)
            val = c_z * phi + float(zp @ yp)
            if val > best_val:
                best_val = val
                best_yp = yp

    if best_val <= tol:
        return SeparationResult(inside=True, value=float(best_val))

    if best_yp is None:
        yp = np.zeros(zp.size)
        yp[j] = 1.0
        y = np.zeros(z.size)
        return SeparationResult(False, float(best_val), y, yp,
                                cut_value=float(zp[j]))
    yp = best_yp / best_yp.max()  # scale the witness ray to ||y'||_inf = 1
    phi, _ = min_weighted_lp_norm(yp, inst.p)
    y = phi * holder_maximizer(np.clip(z, 0.0, None), inst.p)
    cut_value = float(z @ y + zp @ yp)
    return SeparationResult(False, float(best_val), y, yp, cut_value=cut_value)


def _separation_reference(z: np.ndarray, zp: np.ndarray,
                          inst: GlobalCostInstance, tol: float = 1e-10):
    """Projected-gradient maximization of g from d+1 starts; reference for
    cross-validating the bisection route. Returns the best value found."""
    z = np.asarray(z, dtype=float)
    zp = np.asarray(zp, dtype=float)
    d = zp.size
    q = inst.q
    c_z = lp_norm_value(np.clip(z, 0.0, None), q)
    floor = 1e-12

    def fun(yp):
        phi, _ = min_weighted_lp_norm(np.clip(yp, floor, None), inst.p)
        return c_z * phi + float(zp @ yp)

    def gfun(yp):
        ypc = np.clip(yp, floor, None)
        phi, _ = min_weighted_lp_norm(ypc, inst.p)
        return c_z * np.power(phi / ypc, q + 1.0) + zp

    simplex = SimplexSet(d)
    starts = [np.full(d, 1.0 / d)]
    for i in range(d):
        e = np.full(d, 0.1 / d)
        e[i] += 0.9
        starts.append(e / e.sum())
    best = -np.inf
    for s in starts:
        x = pga_maximize(fun, gfun, simplex, s, tol=tol)
        best = max(best, fun(x))
    best = max(best, float(zp.max()))  # vertices sit at gradient singularities
    return best


def _separation_grid(z, zp, inst, step: float = 1e-3):
    """Grid-search oracle over the simplex slice, d = 2 only."""
    zp = np.asarray(zp, dtype=float)
    if zp.size != 2:
        raise InputError("grid oracle is for d = 2")
    c_z = lp_norm_value(np.clip(np.asarray(z, dtype=float), 0.0, None), inst.q)
    s = np.arange(0.0, 1.0 + step / 2, step)
    best = -np.inf
    for si in s:
        yp = np.array([si, 1.0 - si])
        phi, _ = min_weighted_lp_norm(yp, inst.p)
        best = max(best, c_z * phi + float(zp @ yp))
    return best


# ---------------------------------------------------------------------------
# outer approximation of B cap C*


class PolarApprox:
    """Unit ball {||z||_q <= 1, ||z'||_1 <= 1} intersected with halfspaces
    <(y, y'), x> <= 0 for installed cuts (y, y') in C. Cuts are only ever
    added, never dropped, so the feasible set shrinks monotonically toward
    B cap C* (which every valid cut contains)."""

    def __init__(self, inst: GlobalCostInstance, canonical: bool = True):
        self.inst = inst
        self.cuts: list[np.ndarray] = []
        self.budget_exhausted = False
        if canonical:
            d = inst.d
            for i in range(d):
                e = np.zeros(d)
                e[i] = 1.0
                self.add_cut(e, np.zeros(d))      # invalid, discarded
                self.add_cut(np.zeros(d), e)      # z'_i <= 0, valid
        self._warm_x = None
        self._warm_support = None
        self._gen = None
        self._gen_ncuts = -1

    def cut_valid(self, y: np.ndarray, yp: np.ndarray, tol: float = 1e-8) -> bool:
        if y.min() < -tol or yp.min() < -tol:
            return False
        phi, _ = min_weighted_lp_norm(np.clip(yp, 0.0, None), self.inst.p)
        return lp_norm_value(np.clip(y, 0.0, None), self.inst.p) <= phi + tol

    def add_cut(self, y: np.ndarray, yp: np.ndarray) -> bool:
        if len(self.cuts) >= self.inst.cut_budget:
            self.budget_exhausted = True
            return False
        y = np.asarray(y, dtype=float)
        yp = np.asarray(yp, dtype=float)
        if not self.cut_valid(y, yp):
            return False
        c = np.concatenate([y, yp])
        norm = np.linalg.norm(c)
        if norm == 0.0:
            return False
        c = c / norm
        for old in self.cuts:
            if float(c @ old) > 1.0 - 1e-10:
                return False
        self.cuts.append(c)
        return True

    def generator(self) -> BallCapGenerators:
        # cached while the cut list is unchanged, so projection warm starts
        # survive across steps
        if self._gen is None or self._gen_ncuts != len(self.cuts):
            self._gen = BallCapGenerators(
                norm=MaxPairNorm(self.inst.d, self.inst.q),
                cone=None, cuts=list(self.cuts))
            self._gen_ncuts = len(self.cuts)
        return self._gen

    def generator_set(self, delta: float | None = None) -> GeneratorSet:
        return GeneratorSet(self.generator(), delta=delta, radius=1.0)


# ---------------------------------------------------------------------------
# FTRL step over the approximation


def ftrl_argmax_gc(inst: GlobalCostInstance, approx: PolarApprox,
                   Y: np.ndarray, eta: float, tol: float = 1e-6,
                   reg: Regularizer | None = None,
                   x0: np.ndarray | None = None,
                   nu_hard_limit: float | None = None,
                   pga_state: dict | None = None):
    """(x_t, nu_t): maximize <eta Y, x> - h(x) over the outer approximation,
    adding separation cuts until the maximizer passes the membership test or
    the budget is exhausted; nu is the certified slack of the LP oracle at x."""
    d = inst.d
    target = eta * np.asarray(Y, dtype=float)
    if reg is None:
        reg = Regularizer(CompositeGlobalCost(inst.A, inst.q_prime),
                          approx.generator_set())

    def fun(x):
        return float(target @ x) - reg_value(reg, x)

    def gfun(x):
        return target - reg_grad(reg, x)

    x = np.zeros(2 * d) if x0 is None else np.asarray(x0, dtype=float)
    inner_tol = min(tol * 1e-1, 1e-7)
    while True:
        desc = descriptor(approx.generator())
        x = pga_maximize(fun, gfun, desc, project_onto(desc, x), tol=inner_tol,
                         step_memory=pga_state)
        sep = polar_separation(x[:d], x[d:], inst, tol=tol)
        if sep.inside:
            break
        if not approx.add_cut(sep.y, sep.y_prime):
            break  # budget or duplicate: keep x, report honest slack
    nu, _ = nu_oracle(x[:d], x[d:])
    if (nu_hard_limit is not None and approx.budget_exhausted
            and nu > nu_hard_limit):
        raise CutBudgetError(nu=float(nu), cuts=len(approx.cuts))
    return x, float(nu)


def make_step_solver(inst: GlobalCostInstance, approx: PolarApprox,
                     reg: Regularizer, nu_hard_limit: float | None = None):
    pga_state = {}  # per-run step-size memory for the warm-started solves

    def solver(Y, eta_prev, tol, x_prev):
        return ftrl_argmax_gc(inst, approx, Y, eta_prev, tol,
                              reg=reg, x0=x_prev,
                              nu_hard_limit=nu_hard_limit,
                              pga_state=pga_state)

    return solver


def support_lp(approx: PolarApprox, y: np.ndarray):
    """Exact support of the outer approximation for q = 1 (p = inf).

    The feasible set {||z||_1 <= 1, ||z'||_1 <= 1, Cx <= 0} is a polytope, so
    the support is a linear program over the split x = u - w, u, w >= 0.
    Returns (value, argmax).
    """
    d = approx.inst.d
    n = 2 * d
    y = np.asarray(y, dtype=float)
    head = np.zeros(2 * n)
    head[:d] = 1.0
    head[n:n + d] = 1.0
    tail = np.zeros(2 * n)
    tail[d:n] = 1.0
    tail[n + d:] = 1.0
    if approx.cuts:
        C = np.asarray(approx.cuts, dtype=float)
        A_ub = np.vstack([head, tail, np.hstack([C, -C])])
        b_ub = np.concatenate([[1.0, 1.0], np.zeros(C.shape[0])])
    else:
        A_ub = np.vstack([head, tail])
        b_ub = np.array([1.0, 1.0])
    res = _linprog(-np.concatenate([y, -y]), A_ub=A_ub, b_ub=b_ub,
                   bounds=(0.0, None), method="highs")
    if not res.success:
        raise SolverError(f"support lp failed: {res.message}",
                          best_x=None, residual=np.nan)
    x = res.x[:n] - res.x[n:]
    return float(-res.fun), x


def make_support_fn(inst: GlobalCostInstance, approx: PolarApprox,
                    tol: float = 1e-6):
    state = {"x": None}

    if inst.q == 1.0:
        def support(rbar):
            val, x = support_lp(approx, rbar)
            state["x"] = x
            return val
    else:
        def support(rbar):
            val, x = support_point(approx.generator(), rbar, tol=tol,
                                   x0=state["x"])
            state["x"] = x
            return val

    return support


# ---------------------------------------------------------------------------
# configuration per the two theorems


def configure_lp_algorithm(d: int, p: float, cut_budget: int = 200,
                           solver_tol: float = 1e-6):
    """Composite regularizer and schedule of the lp theorem:
    A = min{d^(1-2/p), 1}, q' = min{2, 1 + 1/(2 log d - 1)},
    Delta = (A d^max(2/p-1,0) + 1)/2, K = min{A, (q'-1) d^(2(1/q'-1))}, M = 2.
    """
    inst = make_instance(d, p, cut_budget, solver_tol)
    delta = 0.5 * (inst.A * float(d) ** max(2.0 / p - 1.0, 0.0) + 1.0)
    K = min(inst.A,
            (inst.q_prime - 1.0) * float(d) ** (2.0 * (1.0 / inst.q_prime - 1.0)))
    domain = GeneratorSet(
        BallCapGenerators(norm=MaxPairNorm(d, inst.q), cone=None, cuts=[]),
        delta=delta, radius=1.0)
    reg = Regularizer(CompositeGlobalCost(inst.A, inst.q_prime), domain)
    return reg, Schedule(delta, K, 2.0)


def configure_norm_algorithm(norm: MaxPairNorm, q_prime: float,
                             delta: float | None = None):
    """lq' regularizer and schedule of the arbitrary-norm theorem:
    eta_t = d^(1/q'-1) sqrt(Delta (q'-1)/t), i.e. K = (q'-1) d^(2(1/q'-1))
    with M = 1 (payoffs bounded by 1 in sup norm). Delta is estimated over
    the ball when not supplied."""
    if not isinstance(norm, MaxPairNorm):
        raise InputError("expected the pair norm max{||z||_q, ||z'||_1}")
    if not 1.0 < q_prime <= 2.0:
        raise InputError("need q' in (1, 2]")
    d = norm.d
    domain = GeneratorSet(
        BallCapGenerators(norm=norm, cone=None, cuts=[]),
        delta=delta, radius=1.0)
    reg = Regularizer(LpSquared(q_prime), domain)
    if delta is None:
        delta = numeric_delta(reg)
        domain.delta = delta
    K = (q_prime - 1.0) * float(d) ** (2.0 * (1.0 / q_prime - 1.0))
    return reg, Schedule(float(delta), K, 1.0)


# ---------------------------------------------------------------------------
# regret


def eval_regret(history, p: float) -> float:
    """||mean(a (.) l)||_p - min_a ||a (.) mean(l)||_p over the history of
    (a, l) pairs (a as simplex weights)."""
    if len(history) == 0:
        raise InputError("need a nonempty history")
    cost = np.mean([np.asarray(a, dtype=float) * np.asarray(l, dtype=float)
                    for a, l in history], axis=0)
    lbar = np.mean([np.asarray(l, dtype=float) for _, l in history], axis=0)
    phi, _ = min_weighted_lp_norm(lbar, p)
    return lp_norm_value(cost, p) - phi


class GlobalCostRegretTracker:
    """Incremental eval_regret for the engine's per-step regret column."""

    def __init__(self, d: int, p: float):
        self.p = p
        self.cost_sum = np.zeros(d)
        self.load_sum = np.zeros(d)

    def __call__(self, t, a, atom, b, r):
        self.cost_sum += a.weights * b
        self.load_sum += b
        phi, _ = min_weighted_lp_norm(self.load_sum / t, self.p)
        return lp_norm_value(self.cost_sum / t, self.p) - phi
