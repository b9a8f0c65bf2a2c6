"""Vector-payoff game abstraction, environments, and the dual-condition check.

A GameSpec bundles the bi-affine payoff (mixed and pure forms), the payoff
bound M under its analysis norm, and the oracle mapping polar directions x to
mixed actions with <r(oracle(x), b), x> <= nu for every environment action b.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, InputError
from .geometry import GlobalCostCone, lp_norm_value, project_to_cone
from .solvers import SimplexSet, min_weighted_lp_norm, pga_maximize


@dataclass(eq=False)
class MixedAction:
    """Distribution over pure actions; atoms default to indices 0..n-1.

    mean optionally carries the expected payoff-relevant statistic of the
    mixture (e.g. the mean occupancy vector) so payoff evaluation does not
    redo the atom sum."""

    weights: np.ndarray
    atoms: tuple | None = None
    mean: np.ndarray | None = None


def vertex_action(i: int, n: int) -> MixedAction:
    w = np.zeros(n)
    w[i] = 1.0
    return MixedAction(w)


@dataclass(eq=False)
class GameSpec:
    name: str
    n_pure: int
    payoff_dim: int
    env_lo: np.ndarray
    env_hi: np.ndarray
    payoff: callable        # (MixedAction, b) -> payoff vector (expected)
    pure_payoff: callable   # (atom, b) -> payoff vector
    oracle: callable        # x -> MixedAction
    M: float
    M_norm: object
    pure_atoms: tuple | None = None  # non-index atoms (e.g. subsets)
    env_grad: callable = None  # (a, x) -> d/db of <r(a, b), x> (affine payoffs)

    def env_dim(self) -> int:
        return self.env_lo.size

    def atoms(self):
        if self.pure_atoms is not None:
            return self.pure_atoms
        return tuple(range(self.n_pure))


# ---------------------------------------------------------------------------
# environments


def adversarial_env(game: GameSpec, history, a_t: MixedAction,
                    x_t: np.ndarray, candidates=None) -> np.ndarray:
    """argmax over candidates of <r(a_t, b), x_t>, ties to the lowest index.

    Without an explicit candidate list the maximum over the environment box
    is taken over its corners; since the payoff is affine in b this is exact,
    and the corner is read off the signs of the per-coordinate gains (which
    equals lowest-index tie-breaking over corners enumerated lo-first).
    """
    if candidates is not None:
        best_val = -np.inf
        best = None
        for b in candidates:
            val = float(game.payoff(a_t, b) @ x_t)
            if val > best_val:
                best_val = val
                best = b
        return np.array(best, dtype=float)
    lo, hi = game.env_lo, game.env_hi
    if game.env_grad is not None:
        g = game.env_grad(a_t, x_t)
        return np.where(g * (hi - lo) > 0.0, hi, lo)
    g0 = float(game.payoff(a_t, lo) @ x_t)
    b = lo.copy()
    for j in range(lo.size):
        bj = lo.copy()
        bj[j] = hi[j]
        if float(game.payoff(a_t, bj) @ x_t) - g0 > 0.0:
            b[j] = hi[j]
    return b


def box_corners(lo: np.ndarray, hi: np.ndarray):
    """All corners, lexicographic with the first coordinate most significant
    and lo before hi (so index 0 is the all-lo corner)."""
    return [np.array(c, dtype=float)
            for c in itertools.product(*[(l, h) for l, h in zip(lo, hi)])]


class AdversarialEnv:
    def __init__(self, game: GameSpec, candidates=None):
        self.game = game
        self.candidates = candidates

    def __call__(self, t, history, a, x):
        return adversarial_env(self.game, history, a, x, self.candidates)


class UniformRandomEnv:
    def __init__(self, lo: np.ndarray, hi: np.ndarray,
                 rng: np.random.Generator):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        self.rng = rng

    def __call__(self, t, history, a, x):
        return self.rng.uniform(self.lo, self.hi)


class FixedSequenceEnv:
    """Replays a fixed list of environment actions, cycling past the end."""

    def __init__(self, sequence):
        if len(sequence) == 0:
            raise InputError("need a nonempty sequence")
        self.sequence = [np.array(b, dtype=float) for b in sequence]

    def __call__(self, t, history, a, x):
        return self.sequence[(t - 1) % len(self.sequence)]


# ---------------------------------------------------------------------------
# dual condition


def membership_residual(y: np.ndarray, cone) -> float:
    """Distance-like violation of y from the cone (0 iff member)."""
    try:
        return float(np.linalg.norm(y - project_to_cone(y, cone)))
    except CapabilityError:
        pass
    if isinstance(cone, GlobalCostCone):
        d = cone.d
        z, zp = y[:d], y[d:]
        neg = float(np.linalg.norm(np.minimum(z, 0.0))
                    + np.linalg.norm(np.minimum(zp, 0.0)))
        phi, _ = min_weighted_lp_norm(np.clip(zp, 0.0, None), cone.p)
        gap = max(0.0, lp_norm_value(np.clip(z, 0.0, None), cone.p) - phi)
        return gap + neg
    raise CapabilityError(f"no residual for {type(cone).__name__}")


def dual_condition_check(game: GameSpec, C, b_samples: int, seed: int) -> dict:
    """For sampled b, search a in the simplex with r(a, b) in C.

    Projected-gradient descent on the membership residual; analytic gradient
    through the Euclidean projection when the cone supports it, finite
    differences otherwise. Reports the worst residual over samples.
    """
    rng = np.random.default_rng(seed)
    atoms = game.atoms()
    n = len(atoms)
    simplex = SimplexSet(n)
    try:
        project_to_cone(np.zeros(game.payoff_dim), C)
        use_projection = True
    except CapabilityError:
        use_projection = False
    residuals = []
    for _ in range(b_samples):
        b = rng.uniform(game.env_lo, game.env_hi)
        P = np.column_stack([game.pure_payoff(atom, b) for atom in atoms])
        if use_projection:
            def fun(a):
                r = P @ a
                return -0.5 * float(np.sum((r - project_to_cone(r, C)) ** 2))

            def gfun(a):
                r = P @ a
                return -P.T @ (r - project_to_cone(r, C))
        else:
            def fun(a):
                return -membership_residual(P @ a, C)

            def gfun(a, h=1e-6):
                g = np.empty(n)
                f0 = fun(a)
                for j in range(n):
                    e = np.zeros(n)
                    e[j] = h
                    g[j] = (fun(a + e) - f0) / h
                return g

        a0 = np.full(n, 1.0 / n)
        a = pga_maximize(fun, gfun, simplex, a0, tol=1e-12)
        residuals.append(membership_residual(P @ a, C))
    worst = float(max(residuals)) if residuals else 0.0
    return {
        "passed": bool(worst <= 1e-6),
        "worst_residual": worst,
        "mean_residual": float(np.mean(residuals)) if residuals else 0.0,
        "b_samples": b_samples,
    }
