"""Blackwell's classical algorithm and its equivalence with Euclidean FTRL.

Blackwell plays a_t = oracle(proj_{C*} rbar_{t-1}); FTRL with h = ||x||^2/2
on C* cap B_2 plays x_t = proj_{C* cap B_2}(eta Y_{t-1}). For closed convex
cones the two oracle inputs are positively colinear at every step, so under
a positively homogeneous oracle the action sequences coincide.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .engine import mix64
from .errors import InputError
from .games import GameSpec, MixedAction
from .geometry import (
    BallCapGenerators,
    GeneratorSet,
    LpNorm,
    Orthant,
    descriptor,
    norm_value,
    polar,
    project_to_cone,
)
from .solvers import project_onto


@dataclass
class BlackwellState:
    sum_r: np.ndarray
    t: int = 0

    def rbar(self) -> np.ndarray:
        if self.t == 0:
            return np.zeros_like(self.sum_r)
        return self.sum_r / self.t

    def update(self, r: np.ndarray):
        self.sum_r = self.sum_r + r
        self.t += 1


def blackwell_step(state: BlackwellState, C, oracle) -> MixedAction:
    """oracle(proj_{C*} rbar_{t-1}); the zero input (empty history or
    rbar in C) is the oracle's designated default."""
    rbar = state.rbar()
    w = rbar - project_to_cone(rbar, C)
    return oracle(w)


@dataclass
class BlackwellReport:
    distances: np.ndarray
    rbar: np.ndarray
    T: int
    bound_M: float

    def bound(self, t: int) -> float:
        return 2.0 * math.sqrt(2.0) * self.bound_M / math.sqrt(t)


def run_blackwell(game: GameSpec, C, env, T: int) -> BlackwellReport:
    """T steps of Blackwell's algorithm; records the Euclidean distance of
    the running average payoff to C after every step."""
    if T < 1:
        raise InputError("need T >= 1")
    state = BlackwellState(np.zeros(game.payoff_dim))
    distances = np.empty(T)
    for t in range(1, T + 1):
        a = blackwell_step(state, C, game.oracle)
        b = env(t, None, a, None)
        r = game.payoff(a, b)
        state.update(r)
        rbar = state.rbar()
        distances[t - 1] = float(np.linalg.norm(rbar - project_to_cone(rbar, C)))
    return BlackwellReport(distances, state.rbar(), T, game.M)


def certify_payoff_bound(game: GameSpec, norm) -> float:
    """max ||r(a, b)|| over pure actions and environment box corners; exact
    for bi-affine payoffs since the norm is convex in each argument."""
    from .games import box_corners

    worst = 0.0
    for atom in game.atoms():
        for b in box_corners(game.env_lo, game.env_hi):
            worst = max(worst, norm_value(norm, game.pure_payoff(atom, b)))
    return worst


# ---------------------------------------------------------------------------
# demo game: r(a, v) = v - <a, v> 1, target the nonpositive orthant


def make_demo_game(d: int = 3) -> GameSpec:
    def payoff(a: MixedAction, v):
        v = np.asarray(v, dtype=float)
        return v - float(a.weights @ v)

    def pure_payoff(i, v):
        v = np.asarray(v, dtype=float)
        return v - v[i]

    def oracle(x):
        # positively homogeneous: a = x/||x||_1 on the positive orthant,
        # uniform at the zero input (any action is valid there)
        x = np.clip(np.asarray(x, dtype=float), 0.0, None)
        s = x.sum()
        if s <= 1e-15:
            return MixedAction(np.full(d, 1.0 / d))
        return MixedAction(x / s)

    return GameSpec(
        name="blackwell-demo",
        n_pure=d,
        payoff_dim=d,
        env_lo=np.zeros(d),
        env_hi=np.ones(d),
        payoff=payoff,
        pure_payoff=pure_payoff,
        oracle=oracle,
        M=math.sqrt(2.0),
        M_norm=LpNorm(2),
    )


def demo_cone(d: int = 3) -> Orthant:
    return Orthant(-np.ones(d, dtype=int))


def demo_generators(d: int = 3) -> GeneratorSet:
    cap = BallCapGenerators(norm=LpNorm(2), cone=polar(demo_cone(d)))
    return GeneratorSet(cap, delta=0.5, radius=1.0)


# ---------------------------------------------------------------------------
# equivalence


def random_equivalence_game(seed: int):
    """A random bi-affine game with a homogeneous (degree-0) oracle and a
    random orthant target; exercises the colinearity check without needing
    a valid B-set oracle."""
    rng = np.random.default_rng(mix64(seed))
    k = int(rng.integers(2, 4))        # pure actions
    d_pay = int(rng.integers(2, 4))
    d_env = int(rng.integers(2, 4))
    G0 = rng.uniform(-1.0, 1.0, (k, d_pay))
    G1 = rng.uniform(-1.0, 1.0, (k, d_env, d_pay))
    W = rng.uniform(-1.0, 1.0, (k, d_pay))
    signs = rng.choice([-1, 1], d_pay)

    def pure_payoff(i, b):
        return G0[i] + np.asarray(b, dtype=float) @ G1[i]

    def payoff(a: MixedAction, b):
        return sum(w * pure_payoff(i, b) for i, w in enumerate(a.weights))

    def oracle(x):
        s = np.clip(W @ np.asarray(x, dtype=float), 0.0, None)
        tot = s.sum()
        if tot <= 1e-15:
            return MixedAction(np.full(k, 1.0 / k))
        return MixedAction(s / tot)

    game = GameSpec(
        name=f"random-{seed}",
        n_pure=k,
        payoff_dim=d_pay,
        env_lo=-np.ones(d_env),
        env_hi=np.ones(d_env),
        payoff=payoff,
        pure_payoff=pure_payoff,
        oracle=oracle,
        M=1.0,
        M_norm=LpNorm(2),
    )
    return game, Orthant(signs)


def equivalence_check(game: GameSpec, C, T: int, seed: int,
                      cos_tol: float = 1e-8, zero_tol: float = 1e-10) -> dict:
    """Run Blackwell and Euclidean FTRL (eta = 1) on the same payoff stream;
    assert the oracle inputs are positively colinear and the actions agree
    at every step. Reports the first divergent step, if any."""
    rng = np.random.default_rng(mix64(seed))
    B = rng.uniform(game.env_lo, game.env_hi, (T, game.env_lo.size))
    cap = GeneratorSet(BallCapGenerators(norm=LpNorm(2), cone=polar(C)))
    desc = descriptor(cap)

    state = BlackwellState(np.zeros(game.payoff_dim))
    Y = np.zeros(game.payoff_dim)
    min_cos = 1.0
    max_action_gap = 0.0
    first_divergence = None
    for t in range(1, T + 1):
        rbar = state.rbar()
        w_b = rbar - project_to_cone(rbar, C)
        x_f = project_onto(desc, Y)
        nb, nf = np.linalg.norm(w_b), np.linalg.norm(x_f)
        if nb <= zero_tol or nf <= zero_tol:
            colinear = nb <= zero_tol and nf <= zero_tol
        else:
            cos = float(w_b @ x_f) / (nb * nf)
            min_cos = min(min_cos, cos)
            colinear = cos >= 1.0 - cos_tol
        a_b = game.oracle(w_b)
        a_f = game.oracle(x_f)
        gap = float(np.abs(a_b.weights - a_f.weights).max())
        max_action_gap = max(max_action_gap, gap)
        if (not colinear or gap > 1e-8) and first_divergence is None:
            first_divergence = {"t": t, "blackwell": w_b.copy(),
                                "ftrl": x_f.copy()}
        r = game.payoff(a_b, B[t - 1])
        state.update(r)
        Y = Y + r
    return {
        "passed": first_divergence is None,
        "min_cosine": float(min_cos),
        "max_action_gap": float(max_action_gap),
        "first_divergence": first_divergence,
        "T": T,
    }
