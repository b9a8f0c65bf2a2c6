"""Online combinatorial optimization over m-subsets as approachability.

Payoff r(p, v) = v - (<v, e_p>/m) 1 targets the nonpositive orthant; the
comparator set is X = {x in [0,1]^d : sum x = m} with the scaled entropic
regularizer, and the oracle decomposes x into at most d vertices e_p.
"""

from dataclasses import dataclass

import numpy as np

from .engine import Schedule
from .errors import InputError
from .games import GameSpec, MixedAction
from .geometry import CappedSimplexGenerators, GeneratorSet, LpNorm
from .regularizers import Regularizer, ScaledEntropic, capped_softmax
from .solvers import caratheodory_decompose


@dataclass(frozen=True)
class CombInstance:
    d: int
    m: int

    def __post_init__(self):
        if not 1 <= self.m <= self.d:
            raise InputError("need 1 <= m <= d")


def comb_schedule(inst: CombInstance) -> Schedule:
    # eta_t = sqrt(log(d/m) / (4 m^2 t))
    return Schedule(float(np.log(inst.d / inst.m)), 1.0 / inst.m**2, 2.0)


def comb_payoff(p, v: np.ndarray, m: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v - (v[list(p)].sum() / m)


def comb_ftrl_step(Y: np.ndarray, eta: float, inst: CombInstance,
                   tol: float = 1e-12) -> np.ndarray:
    """argmax over X of <eta Y, x> - sum (x_i/m) log(x_i/m), in closed form."""
    if eta <= 0:
        raise InputError("need eta > 0")
    return capped_softmax(eta * np.asarray(Y, dtype=float), inst.m)


def comb_oracle(x: np.ndarray, m: int, tol: float = 1e-8) -> MixedAction:
    """Distribution over m-subsets with mean exactly x (vertex decomposition).

    Playing p ~ a gives <r(a, v), x> = 0 for every v, since the expected
    coordinate cost is <v, x>/m and <1, x> = m.
    """
    parts = caratheodory_decompose(np.asarray(x, dtype=float), m, tol=tol)
    atoms = tuple(subset for subset, _ in parts)
    weights = np.array([w for _, w in parts])
    return MixedAction(weights, atoms)


def comb_regret(history, m: int) -> float:
    """max_p sum_t <v_t, e_p> - sum_t <v_t, e_{p_t}> , the max over subsets
    read off the m largest coordinates of the summed payoffs."""
    if len(history) == 0:
        raise InputError("need a nonempty history")
    vsum = np.sum([np.asarray(v, dtype=float) for _, v in history], axis=0)
    played = sum(float(np.asarray(v, dtype=float)[list(p)].sum())
                 for p, v in history)
    best = float(np.sort(vsum)[-m:].sum())
    return best - played


def make_game(inst: CombInstance, track: dict | None = None) -> GameSpec:
    """track, if given, accumulates the worst decomposition reconstruction
    error under key \"recon_err\"."""
    d, m = inst.d, inst.m

    def occupancy(a: MixedAction):
        xmean = np.zeros(d)
        for subset, w in zip(a.atoms, a.weights):
            xmean[list(subset)] += w
        return xmean

    def payoff(a: MixedAction, v):
        xmean = a.mean if a.mean is not None else occupancy(a)
        return v - (float(v @ xmean) / m)

    def pure_payoff(subset, v):
        return comb_payoff(subset, v, m)

    def oracle(x):
        a = comb_oracle(x, m)
        a.mean = occupancy(a)
        if track is not None:
            err = float(np.abs(a.mean - x).max())
            track["recon_err"] = max(track.get("recon_err", 0.0), err)
        return a

    from itertools import combinations
    from math import comb as n_choose_k

    atoms = None
    if n_choose_k(d, m) <= 1000:
        atoms = tuple(combinations(range(d), m))
    return GameSpec(
        name="combinatorial",
        n_pure=len(atoms) if atoms is not None else 0,
        payoff_dim=d,
        env_lo=-np.ones(d),
        env_hi=np.ones(d),
        payoff=payoff,
        pure_payoff=pure_payoff,
        oracle=oracle,
        M=2.0,
        M_norm=LpNorm(np.inf),
        pure_atoms=atoms,
    )


def comb_generators(inst: CombInstance) -> GeneratorSet:
    return GeneratorSet(CappedSimplexGenerators(inst.d, inst.m),
                        delta=float(np.log(inst.d / inst.m)),
                        radius=float(inst.m))


def comb_regularizer(inst: CombInstance) -> Regularizer:
    return Regularizer(ScaledEntropic(inst.d, inst.m), comb_generators(inst))
