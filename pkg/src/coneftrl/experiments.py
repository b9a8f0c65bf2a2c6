"""Problem builders and the desk-scale experiments behind `verify`.

A Problem bundles one configured approachability instance: the game, the
regularizer, the generator set, the step-size schedule, and a fresh() hook
that creates per-run state (cut pools, regret trackers), so distinct seeds
never share anything mutable. The exp_* functions reproduce the theorem-bound
checks at fixed T, the Blackwell guarantee and the FTRL equivalence, the
distance/support identity, the high-probability bound, the rate sweeps, and
the closed-form oracle validations.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import combinatorial as comb
from . import global_cost as gc
from . import phi_regret as phr
from .blackwell import (
    certify_payoff_bound,
    demo_cone,
    demo_generators,
    equivalence_check,
    make_demo_game,
    random_equivalence_game,
    run_blackwell,
)
from .engine import Schedule, bound_values, env_stream, mix64, run, run_mixed
from .errors import InputError
from .games import AdversarialEnv, FixedSequenceEnv, UniformRandomEnv
from .geometry import (
    FinitelyGeneratedCone,
    LpNorm,
    MaxPairNorm,
    Orthant,
    cap_generator,
    distance_to_cone,
    polar,
    support_function,
)
from .regularizers import (
    CompositeGlobalCost,
    EuclideanSquared,
    LpSquared,
    Regularizer,
    certify_constants,
)
from .solvers import min_weighted_lp_norm

PROBLEM_KINDS = ("swap", "internal", "combinatorial", "globalcost",
                 "blackwell-demo")


# ---------------------------------------------------------------------------
# regret trackers (per-step regret column + realized history for cross-checks)


class PhiRegretTracker:
    """Running Phi-regret from the S matrix S_ij = sum_{t: i_t=i} v_tj."""

    def __init__(self, fam):
        self.fam = fam
        self.S = np.zeros((fam.d, fam.d))
        self.history = []

    def __call__(self, t, a, atom, b, r):
        v = np.asarray(b, dtype=float)
        if atom is None:
            self.S += np.outer(a.weights, v)
            self.history.append((a.weights.copy(), v.copy()))
        else:
            self.S[int(atom)] += v
            self.history.append((int(atom), v.copy()))
        S = self.S
        if self.fam.kind == "all_maps":
            best = float(S.max(axis=1).sum())
        else:
            best = float(S[np.arange(self.fam.d), self.fam.maps].sum(axis=1).max())
        return best - float(np.trace(S))


class InternalRegretTracker:
    """Running internal regret max_{i != j} S_ij - S_ii (pair formula)."""

    def __init__(self, d: int):
        self.d = d
        self.S = np.zeros((d, d))
        self.history = []

    def __call__(self, t, a, atom, b, r):
        v = np.asarray(b, dtype=float)
        if atom is None:
            self.S += np.outer(a.weights, v)
            self.history.append((a.weights.copy(), v.copy()))
        else:
            self.S[int(atom)] += v
            self.history.append((int(atom), v.copy()))
        gains = self.S - np.diag(self.S)[:, None]
        np.fill_diagonal(gains, -np.inf)
        return float(gains.max())


class CombRegretTracker:
    """Running m-set regret: best m-subset of summed payoffs minus played."""

    def __init__(self, d: int, m: int):
        self.d = d
        self.m = m
        self.vsum = np.zeros(d)
        self.played = 0.0
        self.history = []

    def __call__(self, t, a, atom, b, r):
        v = np.asarray(b, dtype=float)
        self.vsum += v
        if atom is None:
            xmean = np.zeros(self.d)
            for subset, w in zip(a.atoms, a.weights):
                xmean[list(subset)] += w
            self.played += float(v @ xmean)
            self.history.append((a, v.copy()))
        else:
            self.played += float(v[list(atom)].sum())
            self.history.append((atom, v.copy()))
        best = float(np.partition(self.vsum, self.d - self.m)[self.d - self.m:].sum())
        return best - self.played


class GcRegretTracker:
    """Incremental global-cost regret plus the (a, load) history."""

    def __init__(self, d: int, p: float):
        self.inner = gc.GlobalCostRegretTracker(d, p)
        self.history = []

    def __call__(self, t, a, atom, b, r):
        self.history.append((a.weights.copy(), np.asarray(b, dtype=float).copy()))
        return self.inner(t, a, atom, b, r)


# ---------------------------------------------------------------------------
# problems


@dataclass
class RunSetup:
    game: object
    h: object
    X: object
    schedule: Schedule
    kwargs: dict
    tracker: object = None
    track: dict = field(default_factory=dict)
    approx: object = None


@dataclass
class Problem:
    name: str
    mixed: bool               # draw pure actions i_t ~ a_t
    default_env: str          # "adversarial" or "uniform"
    fresh: callable           # () -> RunSetup
    regret_bound: callable    # T -> theorem bound on the regret measure
    params: dict = field(default_factory=dict)


def build_swap(d: int = 4, phi: str = "transpositions") -> Problem:
    if phi == "transpositions":
        fam = phr.transpositions(d)
    elif phi == "all":
        fam = phr.all_maps(d)
    else:
        raise InputError(f"unknown map family {phi!r}")
    h = phr.phi_regularizer(fam)
    X = phr.phi_generators(fam)
    schedule = phr.phi_schedule(fam)

    def fresh():
        # fresh game per run: its oracle warm-start cache must not leak
        # across seeds
        tracker = PhiRegretTracker(fam)
        return RunSetup(phr.make_game(fam), h, X, schedule,
                        {"regret_fn": tracker, "radius": 1.0}, tracker=tracker)

    def regret_bound(T):
        return 4.0 * math.sqrt(T * math.log(fam.n_maps))

    return Problem("swap", True, "adversarial", fresh, regret_bound,
                   {"d": d, "phi": phi, "fam": fam})


def build_internal(d: int = 4) -> Problem:
    """Transposition family with the regret column evaluated pairwise."""
    fam = phr.transpositions(d)
    h = phr.phi_regularizer(fam)
    X = phr.phi_generators(fam)
    schedule = phr.phi_schedule(fam)

    def fresh():
        tracker = InternalRegretTracker(d)
        return RunSetup(phr.make_game(fam), h, X, schedule,
                        {"regret_fn": tracker, "radius": 1.0}, tracker=tracker)

    def regret_bound(T):
        return 4.0 * math.sqrt(T * math.log(d * (d - 1)))

    return Problem("internal", True, "adversarial", fresh, regret_bound,
                   {"d": d, "fam": fam})


def build_combinatorial(d: int = 8, m: int = 2) -> Problem:
    inst = comb.CombInstance(d, m)
    h = comb.comb_regularizer(inst)
    X = comb.comb_generators(inst)
    schedule = comb.comb_schedule(inst)

    def fresh():
        track = {}
        game = comb.make_game(inst, track)
        tracker = CombRegretTracker(d, m)
        return RunSetup(game, h, X, schedule,
                        {"regret_fn": tracker, "radius": float(m)},
                        tracker=tracker, track=track)

    def regret_bound(T):
        return 4.0 * m * math.sqrt(T * math.log(d / m))

    return Problem("combinatorial", True, "uniform", fresh, regret_bound,
                   {"d": d, "m": m, "inst": inst})


def build_globalcost(d: int = 3, p: float = np.inf, cut_budget: int = 200,
                     solver_tol: float = 1e-6,
                     nu_hard_limit: float | None = None) -> Problem:
    """Composite-regularizer algorithm of the lp theorem."""
    inst = gc.make_instance(d, p, cut_budget, solver_tol)
    _, schedule = gc.configure_lp_algorithm(d, p, cut_budget, solver_tol)
    game = gc.make_game(inst)

    def fresh():
        approx = gc.PolarApprox(inst)
        X = approx.generator_set(schedule.delta)
        h = Regularizer(CompositeGlobalCost(inst.A, inst.q_prime), X)
        tracker = GcRegretTracker(d, p)
        kwargs = {
            "step_solver": gc.make_step_solver(inst, approx, h,
                                               nu_hard_limit=nu_hard_limit),
            "support_fn": gc.make_support_fn(inst, approx, tol=solver_tol),
            "regret_fn": tracker,
            "radius": 1.0,
        }
        return RunSetup(game, h, X, schedule, kwargs,
                        tracker=tracker, approx=approx)

    def regret_bound(T):
        return gc.theorem_bound(d, p, T)

    # uniform by default: the best-response environment fixes loads at the
    # low corner from the argmax start x = 0 and the run never leaves it
    return Problem("globalcost", False, "uniform", fresh, regret_bound,
                   {"d": d, "p": p, "cut_budget": cut_budget, "inst": inst})


def build_globalcost_norm(d: int = 2, p: float = 2.0, q_prime: float = 2.0,
                          cut_budget: int = 200, solver_tol: float = 1e-6,
                          nu_hard_limit: float | None = None) -> Problem:
    """lq'-squared algorithm of the arbitrary-norm theorem."""
    inst = gc.make_instance(d, p, cut_budget, solver_tol)
    _, schedule = gc.configure_norm_algorithm(MaxPairNorm(d, inst.q), q_prime)
    game = gc.make_game(inst)

    def fresh():
        approx = gc.PolarApprox(inst)
        X = approx.generator_set(schedule.delta)
        h = Regularizer(LpSquared(q_prime), X)
        tracker = GcRegretTracker(d, p)
        kwargs = {
            "step_solver": gc.make_step_solver(inst, approx, h,
                                               nu_hard_limit=nu_hard_limit),
            "support_fn": gc.make_support_fn(inst, approx, tol=solver_tol),
            "regret_fn": tracker,
            "radius": 1.0,
        }
        return RunSetup(game, h, X, schedule, kwargs,
                        tracker=tracker, approx=approx)

    def regret_bound(T):
        # 2 d^(1-1/q') sqrt(Delta / ((q'-1) T)), identical to 2M sqrt(D/(KT))
        return bound_values(schedule, T, 1.0, 0.5)[0]

    return Problem("globalcost-norm", False, "uniform", fresh,
                   regret_bound,
                   {"d": d, "p": p, "q_prime": q_prime, "inst": inst})


def build_blackwell(d: int = 3) -> Problem:
    game = make_demo_game(d)
    X = demo_generators(d)
    h = Regularizer(EuclideanSquared(), X)
    delta, K, _ = certify_constants(h)
    schedule = Schedule(delta, K, game.M)

    def fresh():
        return RunSetup(game, h, X, schedule, {"radius": 1.0})

    def regret_bound(T):
        return 2.0 * math.sqrt(2.0) * game.M / math.sqrt(T)

    return Problem("blackwell-demo", False, "uniform", fresh, regret_bound,
                   {"d": d})


def build_problem(kind: str, **params) -> Problem:
    if kind == "swap":
        return build_swap(**params)
    if kind == "internal":
        return build_internal(**params)
    if kind == "combinatorial":
        return build_combinatorial(**params)
    if kind == "globalcost":
        return build_globalcost(**params)
    if kind == "blackwell-demo":
        return build_blackwell(**params)
    raise InputError(f"unknown problem kind {kind!r}")


def make_env(game, kind: str, run_seed: int, env_seed: int | None = None,
             sequence=None):
    if kind == "adversarial":
        return AdversarialEnv(game)
    if kind == "uniform":
        return UniformRandomEnv(game.env_lo, game.env_hi,
                                env_stream(run_seed if env_seed is None
                                           else env_seed))
    if kind == "fixed":
        if sequence is None:
            raise InputError("fixed environment needs a sequence")
        return FixedSequenceEnv(sequence)
    raise InputError(f"unknown environment kind {kind!r}")


def run_problem(problem: Problem, T: int, seed: int, env_kind: str | None = None,
                env_seed: int | None = None, sequence=None, tol: float = 1e-6,
                delta_conf: float = 0.1, nu_hard_limit: float | None = None,
                keep_vectors: bool = False):
    """One seeded run of a built problem; returns (RunReport, RunSetup)."""
    setup = problem.fresh()
    env = make_env(setup.game, env_kind or problem.default_env, seed,
                   env_seed, sequence)
    kwargs = dict(setup.kwargs)
    kwargs.update(schedule=setup.schedule, keep_vectors=keep_vectors,
                  delta_conf=delta_conf, nu_hard_limit=nu_hard_limit)
    if problem.mixed:
        report = run_mixed(setup.game, setup.h, setup.X, env, T, seed,
                           tol, **kwargs)
    else:
        report = run(setup.game, setup.h, setup.X, env, T, tol, seed=seed,
                     **kwargs)
    return report, setup


def seed_list(master_seed: int, n: int):
    """Documented splitting rule: seed_i = mix64(master XOR i)."""
    return [mix64(master_seed ^ i) for i in range(n)]


# ---------------------------------------------------------------------------
# fixed-T bound experiments


def exp_swap(T: int = 4096, n_seeds: int = 100, d: int = 4,
             master_seed: int = 20260825, env: str = "adversarial") -> dict:
    """Swap/internal regret on the transposition family, mixed play.

    Returns the seed-mean regret against 4 sqrt(T log|Phi|), the worst
    |Reg - T I*(rbar)| identity gap, and the worst disagreement between the
    family evaluator and the pairwise internal formula (equal families).
    """
    problem = build_swap(d)
    fam = problem.params["fam"]
    t0 = time.perf_counter()
    regrets = []
    internals = []
    identity_worst = 0.0
    evaluator_gap = 0.0
    for seed in seed_list(master_seed, n_seeds):
        report, setup = run_problem(problem, T, seed, env_kind=env)
        regrets.append(report.regret)
        identity_worst = max(identity_worst,
                             abs(report.regret - T * report.final_support))
        phi_val = phr.phi_regret_eval(setup.tracker.history, fam)
        int_val = phr.internal_regret_eval(setup.tracker.history, d)
        evaluator_gap = max(evaluator_gap,
                            abs(phi_val - report.regret),
                            abs(int_val - report.regret))
        internals.append(int_val)
    wall = time.perf_counter() - t0
    return {
        "mean_regret": float(np.mean(regrets)),
        "mean_internal_regret": float(np.mean(internals)),
        "bound": problem.regret_bound(T),
        "internal_bound": 4.0 * math.sqrt(T * math.log(d * (d - 1))),
        "identity_worst": float(identity_worst),
        "evaluator_gap": float(evaluator_gap),
        "regrets": regrets,
        "T": T,
        "n_seeds": n_seeds,
        "wall_time": wall,
    }


def exp_combinatorial(T: int = 4096, n_seeds: int = 100, d: int = 8,
                      m: int = 2, master_seed: int = 20260825,
                      env: str = "uniform") -> dict:
    """m-set regret, mixed play, with decomposition error tracking."""
    problem = build_combinatorial(d, m)
    t0 = time.perf_counter()
    regrets = []
    identity_worst = 0.0
    recon_worst = 0.0
    evaluator_gap = 0.0
    for seed in seed_list(master_seed, n_seeds):
        report, setup = run_problem(problem, T, seed, env_kind=env)
        regrets.append(report.regret)
        identity_worst = max(identity_worst,
                             abs(report.regret - T * report.final_support))
        recon_worst = max(recon_worst, setup.track.get("recon_err", 0.0))
        evaluator_gap = max(
            evaluator_gap,
            abs(comb.comb_regret(setup.tracker.history, m) - report.regret))
    wall = time.perf_counter() - t0
    return {
        "mean_regret": float(np.mean(regrets)),
        "bound": problem.regret_bound(T),
        "identity_worst": float(identity_worst),
        "recon_worst": float(recon_worst),
        "evaluator_gap": float(evaluator_gap),
        "regrets": regrets,
        "T": T,
        "n_seeds": n_seeds,
        "wall_time": wall,
    }


def exp_global_cost_lp(T: int = 4096, d: int = 3, p: float = np.inf,
                       budgets=(25, 50, 100, 200),
                       solver_tol: float = 1e-6) -> dict:
    """Seeded uniform-load runs of the lp algorithm per cut budget.

    The best-response environment is a fixed point here (the argmax starts
    at x = 0 where every load ties to the low corner), so random loads are
    what actually exercise the cutting-plane approximation."""
    t0 = time.perf_counter()
    per_budget = []
    for budget in budgets:
        problem = build_globalcost(d, p, cut_budget=budget,
                                   solver_tol=solver_tol)
        report, setup = run_problem(problem, T, seed=0,
                                    env_kind="uniform", tol=solver_tol)
        per_budget.append({
            "cut_budget": budget,
            "regret": report.regret,
            "slack_mean": report.slack_mean,
            "final_support": report.final_support,
            "final_bound": report.final_bound,
            "cuts_used": len(setup.approx.cuts),
            "support_check": abs(gc.eval_regret(setup.tracker.history, p)
                                 - report.regret),
        })
    wall = time.perf_counter() - t0
    bound = gc.theorem_bound(d, p, T)
    return {
        "per_budget": per_budget,
        "bound": bound,
        "T": T,
        "wall_time": wall,
    }


def exp_global_cost_norm(T: int = 4096, d: int = 2, p: float = 2.0,
                         q_prime: float = 2.0,
                         solver_tol: float = 1e-6) -> dict:
    """Seeded uniform-load run of the arbitrary-norm algorithm; the
    best-response environment degenerates exactly as in exp_global_cost_lp."""
    problem = build_globalcost_norm(d, p, q_prime, solver_tol=solver_tol)
    t0 = time.perf_counter()
    report, setup = run_problem(problem, T, seed=0, env_kind="uniform",
                                tol=solver_tol)
    wall = time.perf_counter() - t0
    return {
        "regret": report.regret,
        "slack_mean": report.slack_mean,
        "final_support": report.final_support,
        "bound": problem.regret_bound(T),
        "cuts_used": len(setup.approx.cuts),
        "T": T,
        "wall_time": wall,
    }


def exp_blackwell(T: int = 10000, d: int = 3,
                  checkpoints=(100, 1000, 10000), env_seed: int = 7) -> dict:
    """Blackwell's algorithm on the demo game against uniform loads."""
    game = make_demo_game(d)
    C = demo_cone(d)
    m_cert = certify_payoff_bound(game, LpNorm(2))
    env = make_env(game, "uniform", env_seed)
    t0 = time.perf_counter()
    report = run_blackwell(game, C, env, T)
    wall = time.perf_counter() - t0
    checks = []
    for c in checkpoints:
        dist = float(report.distances[c - 1])
        bnd = 2.0 * math.sqrt(2.0) * m_cert / math.sqrt(c)
        checks.append({"T": c, "distance": dist, "bound": bnd,
                       "ok": bool(dist <= bnd)})
    return {
        "M_certified": float(m_cert),
        "checkpoints": checks,
        "wall_time": wall,
    }


def exp_equivalence(n_games: int = 20, T: int = 1000,
                    master_seed: int = 20260825) -> dict:
    t0 = time.perf_counter()
    reports = []
    for i in range(n_games):
        seed = mix64(master_seed ^ i)
        game, C = random_equivalence_game(seed)
        reports.append(equivalence_check(game, C, T, seed))
    wall = time.perf_counter() - t0
    return {
        "all_passed": all(r["passed"] for r in reports),
        "min_cosine": float(min(r["min_cosine"] for r in reports)),
        "max_action_gap": float(max(r["max_action_gap"] for r in reports)),
        "n_games": n_games,
        "T": T,
        "wall_time": wall,
    }


def exp_distance_support(n_instances: int = 100,
                         master_seed: int = 20260825) -> dict:
    """|I*_{B cap C*}(y) - inf_{y' in C} ||y - y'||_*| on random instances."""
    rng = np.random.default_rng(mix64(master_seed))
    ps = [1.0, 1.5, 2.0, 3.0, np.inf]
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(n_instances):
        dim = int(rng.integers(2, 4))
        norm = LpNorm(ps[int(rng.integers(len(ps)))])
        if rng.random() < 0.5:
            signs = rng.choice([-1, 1], dim)
            cone = Orthant(signs)
        else:
            k = int(rng.integers(1, 4))
            rays = rng.uniform(-1.0, 1.0, (k, dim))
            rays = rays[np.linalg.norm(rays, axis=1) > 0.3]
            if rays.shape[0] == 0:
                rays = np.eye(dim)[:1]
            cone = FinitelyGeneratedCone(rays)
        y = rng.uniform(-1.0, 1.0, dim)
        X = cap_generator(polar(cone), norm)
        sup = support_function(X, y, tol=1e-6)
        dist = distance_to_cone(y, cone, norm)
        worst = max(worst, abs(sup - dist))
    wall = time.perf_counter() - t0
    return {"worst_gap": float(worst), "n_instances": n_instances,
            "wall_time": wall}


def exp_high_prob(T: int = 1024, n_seeds: int = 200, d: int = 4,
                  delta_conf: float = 0.1,
                  master_seed: int = 20260825) -> dict:
    """Violation count of the high-probability support bound, uniform loads."""
    problem = build_swap(d)
    t0 = time.perf_counter()
    violations = 0
    margins = []
    for seed in seed_list(master_seed, n_seeds):
        report, _ = run_problem(problem, T, seed, env_kind="uniform",
                                delta_conf=delta_conf)
        margins.append(report.high_prob_bound - report.final_support)
        if report.final_support > report.high_prob_bound:
            violations += 1
    wall = time.perf_counter() - t0
    allowed = math.ceil(delta_conf * n_seeds) + 3.0 * math.sqrt(
        n_seeds * delta_conf * (1.0 - delta_conf))
    return {
        "violations": violations,
        "allowed": allowed,
        "n_seeds": n_seeds,
        "delta_conf": delta_conf,
        "worst_margin": float(min(margins)),
        "T": T,
        "wall_time": wall,
    }


# ---------------------------------------------------------------------------
# rate sweeps


def fit_loglog_slope(Ts, values):
    """Least-squares slope of log(values) against log(Ts).

    Returns (slope, note); slope is NaN when any value is nonpositive or the
    values are constant to machine precision (degenerate input).
    """
    Ts = np.asarray(Ts, dtype=float)
    values = np.asarray(values, dtype=float)
    if (values <= 0.0).any():
        return float("nan"), "nonpositive support values; log-log fit undefined"
    logv = np.log(values)
    if float(logv.max() - logv.min()) < 1e-12:
        return float("nan"), "constant support values; slope undefined"
    logt = np.log(Ts)
    A = np.stack([logt, np.ones_like(logt)], axis=1)
    coef, *_ = np.linalg.lstsq(A, logv, rcond=None)
    return float(coef[0]), ""


def sweep_support(problem: Problem, T_grid, seeds, env: str | None = None,
                  env_seed: int | None = None, sequence=None,
                  tol: float = 1e-6) -> dict:
    """Seed-mean final support per T and the fitted log-log slope."""
    T_grid = [int(T) for T in T_grid]
    if len(T_grid) < 4 or any(b <= a for a, b in zip(T_grid, T_grid[1:])):
        raise InputError("need an ascending grid of at least 4 values of T")
    means = []
    for T in T_grid:
        finals = []
        for seed in seeds:
            report, _ = run_problem(problem, T, seed, env_kind=env,
                                    env_seed=env_seed, sequence=sequence,
                                    tol=tol)
            finals.append(report.final_support)
        means.append(float(np.mean(finals)))
    slope, note = fit_loglog_slope(T_grid, means)
    return {"T_grid": T_grid, "mean_support": means, "slope": slope,
            "note": note, "n_seeds": len(seeds)}


def exp_rates(T_grid=(256, 1024, 4096, 16384), n_seeds: int = 5,
              master_seed: int = 20260825) -> dict:
    """Sweep slopes for the swap, combinatorial, and Blackwell problems."""
    out = {}
    t0 = time.perf_counter()
    seeds = seed_list(master_seed, n_seeds)
    for kind, builder in (("swap", build_swap),
                          ("combinatorial", build_combinatorial),
                          ("blackwell-demo", build_blackwell)):
        problem = builder()
        out[kind] = sweep_support(problem, T_grid, seeds, env="uniform")
    out["wall_time"] = time.perf_counter() - t0
    return out


# ---------------------------------------------------------------------------
# closed-form oracle validation (pre-build gate)


def _min_weighted_grid(yp: np.ndarray, p: float, step: float = 1e-3) -> float:
    w = np.arange(0.0, 1.0 + step / 2, step)
    A = np.stack([w, 1.0 - w], axis=1)
    vals = A * np.asarray(yp, dtype=float)[None, :]
    if np.isinf(p):
        norms = np.abs(vals).max(axis=1)
    else:
        norms = np.power(np.power(np.abs(vals), p).sum(axis=1), 1.0 / p)
    return float(norms.min())


def exp_oracle_validation(n_instances: int = 1000,
                          master_seed: int = 20260825) -> dict:
    """min_weighted_lp_norm and polar_separation against 1e-3 grid search."""
    rng = np.random.default_rng(mix64(master_seed))
    ps = [1.0, 1.5, 2.0, 3.0, np.inf]
    ps_sep = [1.5, 2.0, 3.0, np.inf]  # instances need p > 1
    worst_norm = 0.0
    worst_sep = 0.0
    t0 = time.perf_counter()
    for k in range(n_instances):
        p = ps[int(rng.integers(len(ps)))]
        yp = rng.uniform(0.0, 2.0, 2)
        if rng.random() < 0.1:
            yp[int(rng.integers(2))] = 0.0
        val, _ = min_weighted_lp_norm(yp, p)
        worst_norm = max(worst_norm, abs(val - _min_weighted_grid(yp, p)))

        p_sep = ps_sep[int(rng.integers(len(ps_sep)))]
        inst = gc.make_instance(2, p_sep)
        z = rng.uniform(-1.0, 1.0, 2)
        zp = rng.uniform(-1.0, 1.0, 2)
        sep = gc.polar_separation(z, zp, inst)
        grid = gc._separation_grid(z, zp, inst)
        worst_sep = max(worst_sep, abs(sep.value - grid))
    wall = time.perf_counter() - t0
    return {"worst_norm_gap": float(worst_norm),
            "worst_separation_gap": float(worst_sep),
            "n_instances": n_instances,
            "wall_time": wall}
