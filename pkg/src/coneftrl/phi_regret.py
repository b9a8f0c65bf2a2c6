"""Phi-regret (swap/internal) as approachability with target R_-^Phi.

Playing i against v pays r(i, v) = (v_{phi(i)} - v_i)_{phi in Phi}. FTRL on
the simplex over Phi with the entropic regularizer is exponential weights;
the oracle is the stationary distribution of the row-stochastic matrix
x~_{ ij } = sum_{phi(i)=j} x_phi.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .engine import Schedule
from .errors import InputError
from .games import GameSpec, MixedAction
from .geometry import GeneratorSet, LpNorm, SimplexGenerators
from .regularizers import Entropic, Regularizer, softmax
from .solvers import stationary_distribution


@dataclass(eq=False)
class PhiFamily:
    d: int
    maps: np.ndarray          # (n_maps, d) integer array, maps[k, i] = phi_k(i)
    kind: str = "custom"
    _onehot: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.maps = np.asarray(self.maps, dtype=int)
        if self.maps.ndim != 2 or self.maps.shape[1] != self.d:
            raise InputError("maps must be (n_maps, d)")
        if self.maps.shape[0] == 0:
            raise InputError("need a nonempty family")
        if self.maps.min() < 0 or self.maps.max() >= self.d:
            raise InputError("map values must index actions")

    @property
    def n_maps(self) -> int:
        return self.maps.shape[0]

    def onehot(self) -> np.ndarray:
        """(n_maps, d, d) tensor with onehot[k, i, phi_k(i)] = 1."""
        if self._onehot is None:
            n, d = self.maps.shape
            t = np.zeros((n, d, d))
            rows = np.repeat(np.arange(d)[None, :], n, axis=0)
            t[np.arange(n)[:, None], rows, self.maps] = 1.0
            self._onehot = t
        return self._onehot

    def onehot_flat(self) -> np.ndarray:
        """(n_maps, d*d) view of onehot so P(x) is a single matvec."""
        return self.onehot().reshape(self.n_maps, self.d * self.d)


def transpositions(d: int) -> PhiFamily:
    """All d(d-1) single-departure maps (identity except i -> j, i != j);
    the family whose Phi-regret is the internal regret."""
    if d < 2:
        raise InputError("need d >= 2")
    maps = []
    for i in range(d):
        for j in range(d):
            if i != j:
                m = np.arange(d)
                m[i] = j
                maps.append(m)
    return PhiFamily(d, np.array(maps), kind="transpositions")


def all_maps(d: int) -> PhiFamily:
    """All d^d maps; guarded to d <= 5 to keep the object inspectable."""
    if d > 5:
        raise InputError("all_maps is limited to d <= 5")
    maps = np.array(list(itertools.product(range(d), repeat=d)))
    return PhiFamily(d, maps, kind="all_maps")


def custom_family(d: int, maps) -> PhiFamily:
    return PhiFamily(d, np.array(maps), kind="custom")


# ---------------------------------------------------------------------------
# operations


def phi_payoff(i: int, v: np.ndarray, fam: PhiFamily) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v[fam.maps[:, i]] - v[i]


def phi_ftrl_weights(R: np.ndarray, eta: float) -> np.ndarray:
    if eta <= 0:
        raise InputError("need eta > 0")
    return softmax(eta * np.asarray(R, dtype=float))


def phi_oracle(x: np.ndarray, fam: PhiFamily) -> np.ndarray:
    """Stationary distribution a of x~_{ij} = sum_{phi(i)=j} x_phi, so that
    sum_i a_i (v_{phi(i)} - v_i) weighted by x vanishes for every v."""
    x = np.asarray(x, dtype=float)
    P = (x @ fam.onehot_flat()).reshape(fam.d, fam.d)
    return stationary_distribution(P)


def warm_stationary(P: np.ndarray, a0: np.ndarray, iters: int = 8,
                    tol: float = 1e-9) -> np.ndarray | None:
    """Lazy power iteration a <- (a + aP)/2 from a0; returns the first iterate
    with ||aP - a||_inf <= tol (the same certificate stationary_distribution
    enforces, tightened) or None so the caller can fall back to the direct
    solve. The lazy step keeps periodic chains from oscillating."""
    a = a0
    for _ in range(iters):
        ap = a @ P
        if np.abs(ap - a).max() <= tol:
            return a
        a = 0.5 * (a + ap)
    return None


def phi_regret_eval(history, fam: PhiFamily) -> float:
    """max_phi sum_t (v_{t,phi(i_t)} - v_{t,i_t}), from the (i, j) sums
    S_ij = sum_{t : i_t = i} v_tj; mixed entries (weights, v) accumulate
    S += outer(weights, v)."""
    if len(history) == 0:
        raise InputError("need a nonempty history")
    d = fam.d
    S = np.zeros((d, d))
    for i, v in history:
        v = np.asarray(v, dtype=float)
        if np.isscalar(i) or np.ndim(i) == 0:
            S[int(i)] += v
        else:
            S += np.outer(np.asarray(i, dtype=float), v)
    played = float(np.trace(S))
    if fam.kind == "all_maps":
        best = float(S.max(axis=1).sum())  # per-i max decomposes over maps
    else:
        best = float(S[np.arange(d), fam.maps].sum(axis=1).max())
    return best - played


def internal_regret_eval(history, d: int) -> float:
    """max_{i != j} sum_t 1{i_t = i} (v_tj - v_ti)."""
    S = np.zeros((d, d))
    for i, v in history:
        v = np.asarray(v, dtype=float)
        if np.isscalar(i) or np.ndim(i) == 0:
            S[int(i)] += v
        else:
            S += np.outer(np.asarray(i, dtype=float), v)
    gains = S - np.diag(S)[:, None]
    np.fill_diagonal(gains, -np.inf)
    return float(gains.max())


def phi_schedule(fam: PhiFamily) -> Schedule:
    # eta_t = sqrt(log|Phi| / (4t))
    return Schedule(float(np.log(fam.n_maps)), 1.0, 2.0)


def phi_generators(fam: PhiFamily) -> GeneratorSet:
    return GeneratorSet(SimplexGenerators(fam.n_maps),
                        delta=float(np.log(fam.n_maps)), radius=1.0)


def phi_regularizer(fam: PhiFamily) -> Regularizer:
    return Regularizer(Entropic(fam.n_maps), phi_generators(fam))


def make_game(fam: PhiFamily) -> GameSpec:
    d = fam.d
    flat = fam.onehot_flat()
    # per-game caches: last transition matrix (oracle and env_grad see the
    # same x within a step) and the previous stationary point as warm start
    state = {"x": None, "P": None, "a": None}

    def transition(x):
        if state["x"] is not x:
            state["P"] = (np.asarray(x, dtype=float) @ flat).reshape(d, d)
            state["x"] = x
        return state["P"]

    def payoff(a: MixedAction, v):
        v = np.asarray(v, dtype=float)
        return (v[fam.maps] - v[None, :]) @ a.weights

    def pure_payoff(i, v):
        return phi_payoff(i, v, fam)

    def oracle(x):
        P = transition(x)
        a = None
        if state["a"] is not None:
            a = warm_stationary(P, state["a"])
        if a is None:
            a = stationary_distribution(P)
        state["a"] = a
        return MixedAction(a)

    def env_grad(a: MixedAction, x):
        # <r(a, v), x> = <aP(x) - a, v>
        w = a.weights
        return w @ transition(x) - w

    return GameSpec(
        name="phi-regret",
        n_pure=d,
        payoff_dim=fam.n_maps,
        env_lo=-np.ones(d),
        env_hi=np.ones(d),
        payoff=payoff,
        pure_payoff=pure_payoff,
        oracle=oracle,
        M=2.0,
        M_norm=LpNorm(np.inf),
        env_grad=env_grad,
    )
