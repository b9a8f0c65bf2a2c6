"""FTRL approachability loop.

The deterministic variant plays the mixed action a_t = oracle(x_t) and
observes the expected payoff r(a_t, b_t); the mixed variant draws a pure
action i_t from a_t (inverse CDF on a seeded stream) and observes r(i_t, b_t).
Both record per-step diagnostics: the oracle inner product, the certified
slack nu, the support value I*_X(rbar_t), and the theorem bound 2M sqrt(D/(Kt)).
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import HardLimitError, InputError
from .geometry import (
    BallCapGenerators,
    CappedSimplexGenerators,
    GeneratorSet,
    PolytopeGenerators,
    SimplexGenerators,
    support_function,
)
from .regularizers import certify_constants, conj_argmax

MASK64 = (1 << 64) - 1
_DRAW_TAG = 0x64726177  # distinct per-purpose stream tags mixed into the seed
_ENV_TAG = 0x656E7600


def mix64(x: int) -> int:
    """splitmix64 finalizer; the documented seed-splitting rule."""
    x &= MASK64
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return (x ^ (x >> 31)) & MASK64


def substream(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(mix64((seed & MASK64) ^ tag))


def draw_stream(seed: int) -> np.random.Generator:
    return substream(seed, _DRAW_TAG)


def env_stream(seed: int) -> np.random.Generator:
    return substream(seed, _ENV_TAG)


# ---------------------------------------------------------------------------
# schedule and bounds


@dataclass(frozen=True)
class Schedule:
    delta: float
    K: float
    M: float

    def __post_init__(self):
        if self.delta <= 0 or self.K <= 0 or self.M <= 0:
            raise InputError("schedule constants must be positive")


def eta(schedule: Schedule, t: int) -> float:
    """eta_t = sqrt(delta K / (M^2 t)), positive and nonincreasing."""
    if t < 1:
        raise InputError("need t >= 1")
    return math.sqrt(schedule.delta * schedule.K / (schedule.M**2 * t))


def bound_values(schedule: Schedule, T: int, radius: float, delta_conf: float):
    """(expectation bound, high-probability bound) after T steps.

    radius is ||X||, the generator norm entering the Azuma term.
    """
    if T < 1:
        raise InputError("need T >= 1")
    if not 0.0 < delta_conf < 1.0:
        raise InputError("need delta_conf in (0,1)")
    root = math.sqrt(schedule.delta / schedule.K)
    expectation = 2.0 * schedule.M * root / math.sqrt(T)
    high_prob = (schedule.M / math.sqrt(T)) * (
        2.0 * root + radius * math.sqrt(2.0 * math.log(1.0 / delta_conf))
    )
    return expectation, high_prob


def ftrl_step(h, Y: np.ndarray, eta_prev: float, tol: float = 1e-8,
              x0: np.ndarray | None = None) -> np.ndarray:
    """x_t = argmax_{x in X} {<eta_{t-1} Y, x> - h(x)}, with eta_0 = eta_1."""
    if eta_prev <= 0:
        raise InputError("need eta_prev > 0")
    return conj_argmax(h, eta_prev * np.asarray(Y, dtype=float), tol, x0=x0)


def generator_radius(X) -> float:
    """Default ||X|| for the high-probability bound (l1-flavored)."""
    rep = X.rep if isinstance(X, GeneratorSet) else X
    if isinstance(rep, SimplexGenerators):
        return 1.0
    if isinstance(rep, CappedSimplexGenerators):
        return float(rep.m)
    if isinstance(rep, BallCapGenerators):
        return float(rep.radius)
    if isinstance(rep, PolytopeGenerators):
        return float(np.abs(rep.vertices).sum(axis=1).max())
    raise InputError(f"no default radius for {type(rep).__name__}")


# ---------------------------------------------------------------------------
# run records


class StepRecord(NamedTuple):
    t: int
    x: object          # generator point (None unless keep_vectors)
    a: object          # mixed-action weights (None unless keep_vectors)
    i: object          # pure action (mixed runs only)
    r: object          # payoff vector (None unless keep_vectors)
    inner: float       # <r(a_t, b_t), x_t>, the B-set diagnostic
    nu: float          # certified per-step oracle slack
    support_value: float
    bound_value: float
    regret: float


@dataclass
class RunReport:
    steps: list
    final_support: float
    final_bound: float
    slack_mean: float
    seed: int
    config: dict = field(default_factory=dict)
    regret: float = 0.0
    high_prob_bound: float | None = None
    guarantee_ok: bool = True
    guarantee_margin: float = 0.0
    rbar: np.ndarray | None = None
    T: int = 0


def _sample_index(weights: np.ndarray, u: float) -> int:
    cum = np.cumsum(weights)
    return min(int(np.searchsorted(cum, u * cum[-1], side="right")),
               weights.size - 1)


def _run_core(game, h, X, env, T, tol, seed, mixed, schedule, nu_hard_limit,
              step_solver, support_fn, regret_fn, keep_vectors, delta_conf,
              radius, config):
    if T < 1:
        raise InputError("need T >= 1")
    if schedule is None:
        delta, K, _ = certify_constants(h)
        schedule = Schedule(delta, K, game.M)
    rng_draw = draw_stream(seed) if mixed else None
    two_m = 2.0 * schedule.M
    root_dk = math.sqrt(schedule.delta / schedule.K)

    Y = np.zeros(game.payoff_dim)
    records = []
    x_prev = None
    inner_sum = 0.0
    nu_sum = 0.0
    eta1 = eta(schedule, 1)
    for t in range(1, T + 1):
        eta_prev = eta1 if t == 1 else eta(schedule, t - 1)
        if step_solver is not None:
            x, nu = step_solver(Y, eta_prev, tol, x_prev)
        else:
            x = conj_argmax(h, eta_prev * Y, tol, x0=x_prev)
            nu = 0.0
        if nu_hard_limit is not None and nu > nu_hard_limit:
            raise HardLimitError(seed=seed, t=t, nu=float(nu),
                                 limit=float(nu_hard_limit))
        a = game.oracle(x)
        b = env(t, records, a, x)
        r_expected = game.payoff(a, b)
        if mixed:
            idx = _sample_index(a.weights, rng_draw.random())
            atom = a.atoms[idx] if a.atoms is not None else idx
            r = game.pure_payoff(atom, b)
        else:
            atom = None
            r = r_expected
        inner = float(r_expected @ x)
        inner_sum += inner
        nu_sum += nu
        Y = Y + r
        rbar = Y / t
        if support_fn is not None:
            support = support_fn(rbar)
        else:
            support = support_function(X, rbar, tol)
        bound = two_m * root_dk / math.sqrt(t)
        if regret_fn is not None:
            reg = regret_fn(t, a, atom, b, r)
        else:
            # online-linear regret: max_x sum<r_s, x> - sum<r_s, x_s>
            reg = t * support - inner_sum
        records.append(StepRecord(
            t,
            x.copy() if keep_vectors else None,
            a.weights.copy() if keep_vectors else None,
            atom,
            np.array(r) if keep_vectors else None,
            inner, float(nu), float(support), float(bound), float(reg),
        ))
        x_prev = x

    slack_mean = nu_sum / T
    final_support = records[-1].support_value
    final_bound = records[-1].bound_value
    margin = final_bound + slack_mean + tol - final_support
    if radius is None:
        radius = generator_radius(X)
    _, high_prob = bound_values(schedule, T, radius, delta_conf)
    return RunReport(
        steps=records,
        final_support=final_support,
        final_bound=final_bound,
        slack_mean=slack_mean,
        seed=seed,
        config=dict(config or {}),
        regret=records[-1].regret,
        high_prob_bound=high_prob if mixed else None,
        guarantee_ok=bool(margin >= 0.0),
        guarantee_margin=float(margin),
        rbar=Y / T,
        T=T,
    )


def run(game, h, X, env, T: int, tol: float = 1e-6, *, seed: int = 0,
        schedule: Schedule | None = None, nu_hard_limit: float | None = None,
        step_solver=None, support_fn=None, regret_fn=None,
        keep_vectors: bool = False, delta_conf: float = 0.1,
        radius: float | None = None, config: dict | None = None) -> RunReport:
    """T steps of FTRL against env, observing expected payoffs r(a_t, b_t)."""
    return _run_core(game, h, X, env, T, tol, seed, False, schedule,
                     nu_hard_limit, step_solver, support_fn, regret_fn,
                     keep_vectors, delta_conf, radius, config)


def run_mixed(game, h, X, env, T: int, seed: int, tol: float = 1e-6, *,
              schedule: Schedule | None = None,
              nu_hard_limit: float | None = None, step_solver=None,
              support_fn=None, regret_fn=None, keep_vectors: bool = False,
              delta_conf: float = 0.1, radius: float | None = None,
              config: dict | None = None) -> RunReport:
    """As run, but i_t ~ a_t is drawn after b_t is fixed; payoffs are realized.

    The recorded `inner` stays <r(a_t, b_t), x_t> (the quantity the oracle
    certifies); the accumulated payoff is the realized r(i_t, b_t).
    """
    return _run_core(game, h, X, env, T, tol, seed, True, schedule,
                     nu_hard_limit, step_solver, support_fn, regret_fn,
                     keep_vectors, delta_conf, radius, config)
