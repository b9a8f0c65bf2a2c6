"""JSON-configured experiment harness: run, verify, and sweep commands.

Configs are schema-validated (unknown fields rejected) before anything runs.
Per-seed runs are independent; a master seed expands to run seeds through
seed_i = mix64(master XOR i) (splitmix64 finalizer, see engine.mix64), so
results do not depend on execution order. CSV reals are written with 17
significant digits and '.' decimal, which round-trips float64 exactly.
"""

import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import jsonschema
import numpy as np

from . import experiments as xp
from . import global_cost as gc
from .engine import mix64
from .errors import (ConfigError, CutBudgetError, HardLimitError, InputError)

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["problem", "T"],
    "properties": {
        "problem": {"enum": list(xp.PROBLEM_KINDS)},
        "d": {"type": "integer", "minimum": 2},
        "p": {"anyOf": [{"type": "number", "minimum": 1},
                        {"enum": ["inf"]}]},
        "m": {"type": "integer", "minimum": 1},
        "phi": {"enum": ["transpositions", "all"]},
        "T": {"type": "integer", "minimum": 1},
        "seeds": {"type": "array", "items": {"type": "integer"},
                  "minItems": 1},
        "master_seed": {"type": "integer"},
        "n_seeds": {"type": "integer", "minimum": 1},
        "environment": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["adversarial", "uniform", "fixed"]},
                "seed": {"type": "integer"},
                "sequence": {"type": "array", "minItems": 1,
                             "items": {"type": "array",
                                       "items": {"type": "number"}}},
            },
        },
        "delta_conf": {"type": "number", "exclusiveMinimum": 0,
                       "exclusiveMaximum": 1},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "solver_tol": {"type": "number", "exclusiveMinimum": 0},
        "cut_budget": {"type": "integer", "minimum": 1},
        "nu_hard_limit": {"type": "number", "exclusiveMinimum": 0},
        "output_dir": {"type": "string"},
    },
}

_PROBLEM_FIELDS = {
    "swap": {"d", "phi"},
    "internal": {"d"},
    "combinatorial": {"d", "m"},
    "globalcost": {"d", "p", "cut_budget", "solver_tol", "nu_hard_limit"},
    "blackwell-demo": {"d"},
}

STEP_COLUMNS = ("seed", "t", "support_value", "bound_value", "inner", "nu",
                "regret")


def load_config(path) -> dict:
    """Parse, validate, and normalize a config file.

    Raises ConfigError with a line/field diagnostic on parse or schema
    violations; fills defaults (seeds expansion, environment, tolerances).
    """
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from e
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"config parse error at line {e.lineno}, column {e.colno}: {e.msg}"
        ) from e
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        where = ".".join(str(k) for k in e.absolute_path) or "<top level>"
        raise ConfigError(f"invalid config at {where}: {e.message}",
                          field=where) from e

    problem = cfg["problem"]
    for key in ("d", "p", "m", "phi", "cut_budget", "solver_tol",
                "nu_hard_limit"):
        if key in cfg and key not in _PROBLEM_FIELDS[problem]:
            raise ConfigError(
                f"field '{key}' is not used by problem '{problem}'", field=key)

    if "seeds" in cfg:
        if "master_seed" in cfg or "n_seeds" in cfg:
            raise ConfigError(
                "give either 'seeds' or 'master_seed'/'n_seeds', not both",
                field="seeds")
        cfg["seeds"] = [int(s) for s in cfg["seeds"]]
    else:
        master = cfg.get("master_seed", 0)
        n = cfg.get("n_seeds", 1)
        cfg["seeds"] = xp.seed_list(master, n)

    env = dict(cfg.get("environment", {}))
    if env.get("kind") == "fixed" and "sequence" not in env:
        raise ConfigError("fixed environment needs a 'sequence'",
                          field="environment.sequence")
    cfg["environment"] = env  # empty dict means the problem default
    cfg.setdefault("delta_conf", 0.1)
    cfg.setdefault("tol", 1e-6)
    cfg.setdefault("solver_tol", 1e-6)
    cfg.setdefault("cut_budget", 200)
    return cfg


def problem_from_config(cfg: dict) -> xp.Problem:
    kind = cfg["problem"]
    if kind == "swap":
        return xp.build_swap(cfg.get("d", 4), cfg.get("phi", "transpositions"))
    if kind == "internal":
        return xp.build_internal(cfg.get("d", 4))
    if kind == "combinatorial":
        return xp.build_combinatorial(cfg.get("d", 8), cfg.get("m", 2))
    if kind == "globalcost":
        d = cfg.get("d", 3)
        p = float("inf") if cfg.get("p", "inf") == "inf" else float(cfg["p"])
        limit = cfg.get("nu_hard_limit",
                        0.05 * gc.theorem_bound(d, p, cfg["T"]))
        return xp.build_globalcost(d, p, cfg["cut_budget"], cfg["solver_tol"],
                                   nu_hard_limit=limit)
    if kind == "blackwell-demo":
        return xp.build_blackwell(cfg.get("d", 3))
    raise ConfigError(f"unknown problem '{kind}'", field="problem")


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def _run_one_seed(problem, cfg, seed):
    env = cfg["environment"]
    t0 = time.perf_counter()
    try:
        report, _ = xp.run_problem(
            problem, cfg["T"], seed,
            env_kind=env.get("kind"), env_seed=env.get("seed"),
            sequence=env.get("sequence"), tol=cfg["tol"],
            delta_conf=cfg["delta_conf"])
    except (HardLimitError, CutBudgetError) as e:
        wall = time.perf_counter() - t0
        info = {"seed": seed, "aborted": True, "wall_time": wall,
                "nu": getattr(e, "nu", None), "t": getattr(e, "t", None),
                "reason": str(e)}
        return seed, None, info
    wall = time.perf_counter() - t0
    record = {
        "seed": seed,
        "final_support": report.final_support,
        "final_bound": report.final_bound,
        "regret": report.regret,
        "slack_mean": report.slack_mean,
        "high_prob_bound": report.high_prob_bound,
        "wall_time": wall,
        "aborted": False,
    }
    return seed, report, record


def _aggregate(records):
    out = {}
    for key in ("final_support", "regret", "slack_mean"):
        vals = np.array([r[key] for r in records], dtype=float)
        out[key] = {
            "mean": float(vals.mean()),
            "max": float(vals.max()),
            "q25": float(np.quantile(vals, 0.25)),
            "q50": float(np.quantile(vals, 0.50)),
            "q75": float(np.quantile(vals, 0.75)),
            "q90": float(np.quantile(vals, 0.90)),
        }
    return out


def cmd_run(config_path, out_dir) -> int:
    """Run every configured seed; write steps.csv and summary.json.

    Exit 0 on completion, 1 on a config error, 2 if any run aborted on the
    nu hard limit (remaining seeds still run and are reported).
    """
    try:
        cfg = load_config(config_path)
        problem = problem_from_config(cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr, flush=True)
        return 1
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    threads = int(os.environ.get("CONEFTRL_THREADS", "1"))
    results = {}
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = {seed: pool.submit(_run_one_seed, problem, cfg, seed)
                    for seed in cfg["seeds"]}
            for seed, fut in futs.items():
                results[seed] = fut.result()
    else:
        for seed in cfg["seeds"]:
            results[seed] = _run_one_seed(problem, cfg, seed)

    records, aborted = [], []
    with open(out / "steps.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(STEP_COLUMNS)
        for seed in cfg["seeds"]:
            _, report, record = results[seed]
            if report is None:
                aborted.append(record)
                continue
            records.append(record)
            for s in report.steps:
                w.writerow([seed, s.t, _g17(s.support_value),
                            _g17(s.bound_value), _g17(s.inner), _g17(s.nu),
                            _g17(s.regret)])

    summary = {
        "config": {k: v for k, v in cfg.items()},
        "records": records,
        "aborted": aborted,
        "aggregates": _aggregate(records) if records else {},
        "n_seeds": len(cfg["seeds"]),
        "n_completed": len(records),
    }
    with open(out / "summary.json", "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    return 2 if aborted else 0


def cmd_sweep(config_path, T_grid, out_dir=None) -> int:
    """Run the configured problem across T_grid; write rates.csv.

    Fits the least-squares slope of log(seed-mean final support) against
    log T; a degenerate sweep (zero support) reports slope NaN with a note.
    """
    try:
        cfg = load_config(config_path)
        problem = problem_from_config(cfg)
        env = cfg["environment"]
        res = xp.sweep_support(problem, T_grid, cfg["seeds"],
                               env=env.get("kind"), env_seed=env.get("seed"),
                               sequence=env.get("sequence"), tol=cfg["tol"])
    except (ConfigError, InputError) as e:
        print(f"sweep error: {e}", file=sys.stderr, flush=True)
        return 1
    out = Path(out_dir if out_dir is not None
               else cfg.get("output_dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "rates.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["T", "mean_final_support", "slope", "note"])
        for T, mean in zip(res["T_grid"], res["mean_support"]):
            w.writerow([T, _g17(mean), _g17(res["slope"]), res["note"]])
    note = f" ({res['note']})" if res["note"] else ""
    print(f"slope = {res['slope']:.4f}{note}", flush=True)
    return 0


# ---------------------------------------------------------------------------
# verify suites


def _check(name, margin, passed=None):
    if passed is None:
        passed = bool(margin >= 0.0)
    return {"name": name, "margin": float(margin), "passed": bool(passed)}


def verify_geometry() -> list:
    from .geometry import moreau_decompose, membership, Orthant
    res = xp.exp_distance_support(100)
    checks = [_check("distance-support identity (100 instances)",
                     1e-4 - res["worst_gap"])]

    rng = np.random.default_rng(mix64(11))
    worst = 0.0
    for _ in range(200):
        d = int(rng.integers(2, 5))
        cone = Orthant(rng.choice([-1, 1], d))
        y = rng.uniform(-2.0, 2.0, d)
        u, v = moreau_decompose(y, cone)
        worst = max(worst, float(np.abs(u + v - y).max()), abs(float(u @ v)),
                    0.0 if membership(u, cone, 1e-9) else 1.0)
    checks.append(_check("moreau decomposition (200 orthant samples)",
                         1e-8 - worst))
    return checks


def verify_regularizers() -> list:
    from .geometry import (BallCapGenerators, GeneratorSet, LpNorm,
                           MaxPairNorm, Orthant, SimplexGenerators)
    from .regularizers import (Entropic, EuclideanSquared, LpSquared,
                               Regularizer, certify_constants, numeric_delta,
                               strong_convexity_check)
    from . import combinatorial as comb

    checks = []
    regs = {
        "entropic(4)": Regularizer(
            Entropic(4), GeneratorSet(SimplexGenerators(4),
                                      delta=float(np.log(4)), radius=1.0)),
        "scaled-entropic(8,2)": comb.comb_regularizer(comb.CombInstance(8, 2)),
        "euclidean(quarter-disk)": Regularizer(
            EuclideanSquared(),
            GeneratorSet(BallCapGenerators(norm=LpNorm(2),
                                           cone=Orthant(np.ones(2, dtype=int))),
                         radius=1.0)),
        "lq-squared(1.5, pair ball)": Regularizer(
            LpSquared(1.5),
            GeneratorSet(BallCapGenerators(norm=MaxPairNorm(2, 2), cone=None,
                                           cuts=[]), radius=1.0)),
    }
    for name, reg in regs.items():
        delta, K, _ = certify_constants(reg)
        if reg.domain.delta is not None:
            # tabulated range vs the independent numeric search
            gap = abs(delta - numeric_delta(reg))
            checks.append(_check(f"range certificate {name}", 1e-3 - gap))
        sc = strong_convexity_check(reg, 200, seed=5)
        checks.append(_check(f"strong convexity {name}",
                             sc["worst_margin"] + 1e-10))
    # an inflated modulus must fail the sampled test
    reg = regs["entropic(4)"]
    _, K, _ = certify_constants(reg)
    sc = strong_convexity_check(reg, 500, seed=5, K=1.5 * K)
    checks.append(_check("inflated modulus rejected", -sc["worst_margin"],
                         passed=not sc["passed"]))
    return checks


def verify_solvers() -> list:
    from .solvers import caratheodory_decompose, project_capped_simplex
    res = xp.exp_oracle_validation(1000)
    checks = [
        _check("weighted-norm oracle vs grid (1000 instances)",
               1e-3 - res["worst_norm_gap"]),
        _check("polar separation vs grid (1000 instances)",
               1e-3 - res["worst_separation_gap"]),
    ]
    rng = np.random.default_rng(mix64(13))
    worst = 0.0
    terms_ok = True
    for _ in range(200):
        d = int(rng.integers(2, 9))
        m = int(rng.integers(1, d + 1))
        x = project_capped_simplex(rng.uniform(0.0, 1.0, d) * m, m)
        parts = caratheodory_decompose(x, m)
        terms_ok = terms_ok and len(parts) <= d + 1
        recon = np.zeros(d)
        for sub, wgt in parts:
            recon[list(sub)] += wgt
        worst = max(worst, float(np.abs(recon - x).max()))
    checks.append(_check("caratheodory reconstruction (200 samples)",
                         1e-8 - worst, passed=(worst <= 1e-8 and terms_ok)))
    return checks


def verify_bounds() -> list:
    checks = []

    res = xp.exp_swap()
    checks.append(_check("swap regret bound (T=4096, 100 seeds)",
                         res["bound"] - res["mean_regret"]))
    checks.append(_check("swap support identity",
                         1e-8 - res["identity_worst"]))
    checks.append(_check("internal regret bound",
                         res["internal_bound"] - res["mean_internal_regret"]))
    checks.append(_check("internal/family evaluator agreement",
                         1e-8 - res["evaluator_gap"]))

    res = xp.exp_combinatorial()
    checks.append(_check("combinatorial regret bound (T=4096, 100 seeds)",
                         res["bound"] - res["mean_regret"]))
    checks.append(_check("combinatorial decomposition error",
                         1e-8 - res["recon_worst"]))
    checks.append(_check("combinatorial support identity",
                         1e-6 - res["identity_worst"]))

    res = xp.exp_global_cost_lp()
    last = res["per_budget"][-1]
    checks.append(_check("global cost linf regret vs bound+slack",
                         res["bound"] + last["slack_mean"] - last["regret"]))
    checks.append(_check("global cost linf slack <= 5% of bound",
                         0.05 * res["bound"] - last["slack_mean"]))
    slacks = [b["slack_mean"] for b in res["per_budget"]]
    mono = min(a - b for a, b in zip(slacks, slacks[1:]))
    checks.append(_check("global cost slack monotone in budget",
                         mono + 1e-12))

    res = xp.exp_global_cost_norm()
    checks.append(_check("global cost l2 regret vs bound+slack",
                         res["bound"] + res["slack_mean"] - res["regret"]))

    res = xp.exp_blackwell()
    checks.append(_check("blackwell payoff bound certified <= 2",
                         2.0 - res["M_certified"]))
    worst = min(c["bound"] - c["distance"] for c in res["checkpoints"])
    checks.append(_check("blackwell distance bound at checkpoints", worst))

    res = xp.exp_high_prob()
    checks.append(_check("high-probability bound violations",
                         res["allowed"] - res["violations"]))

    res = xp.exp_rates()
    for kind in ("swap", "combinatorial", "blackwell-demo"):
        slope = res[kind]["slope"]
        margin = min(slope - (-0.65), (-0.35) - slope)
        checks.append(_check(f"rate slope {kind} in [-0.65,-0.35]", margin))
    return checks


def verify_equivalence() -> list:
    res = xp.exp_equivalence()
    return [
        _check("blackwell/ftrl colinearity (20 games)",
               res["min_cosine"] - (1.0 - 1e-8),
               passed=res["all_passed"]),
        _check("blackwell/ftrl action agreement",
               1e-8 - res["max_action_gap"]),
    ]


def verify_harness() -> list:
    """Round-trip self-checks: summary aggregates match steps.csv, and
    reruns are byte-identical."""
    import tempfile

    cfg = {
        "problem": "swap", "d": 3, "T": 64,
        "seeds": [3, 14, 15], "environment": {"kind": "uniform"},
    }
    checks = []
    with tempfile.TemporaryDirectory() as tmp:
        cfg_path = Path(tmp) / "config.json"
        cfg_path.write_text(json.dumps(cfg))
        out1, out2 = Path(tmp) / "a", Path(tmp) / "b"
        rc1 = cmd_run(cfg_path, out1)
        rc2 = cmd_run(cfg_path, out2)
        b1 = (out1 / "steps.csv").read_bytes()
        b2 = (out2 / "steps.csv").read_bytes()
        checks.append(_check("rerun produces byte-identical steps.csv",
                             0.0, passed=(rc1 == rc2 == 0 and b1 == b2)))

        summary = json.loads((out1 / "summary.json").read_text())
        rows = list(csv.DictReader((out1 / "steps.csv").open()))
        gap = 0.0
        for rec in summary["records"]:
            mine = [r for r in rows if int(r["seed"]) == rec["seed"]]
            gap = max(gap,
                      abs(float(mine[-1]["support_value"]) - rec["final_support"]),
                      abs(float(mine[-1]["regret"]) - rec["regret"]),
                      abs(float(np.mean([float(r["nu"]) for r in mine]))
                          - rec["slack_mean"]))
        checks.append(_check("summary aggregates match steps.csv", 1e-15 - gap))

        agg = summary["aggregates"]["final_support"]["mean"]
        recomputed = float(np.mean([r["final_support"]
                                    for r in summary["records"]]))
        checks.append(_check("aggregate recomputation",
                             1e-15 - abs(agg - recomputed)))
    return checks


VERIFY_SUITES = {
    "geometry": verify_geometry,
    "regularizers": verify_regularizers,
    "solvers": verify_solvers,
    "bounds": verify_bounds,
    "equivalence": verify_equivalence,
}


def cmd_verify(suite: str = "all") -> int:
    """Run a named property suite; print a margin table; exit 0 iff all pass."""
    if suite != "all" and suite not in VERIFY_SUITES:
        print(f"unknown suite '{suite}'; choose from "
              f"{sorted(VERIFY_SUITES) + ['all']}", flush=True)
        return 1
    names = sorted(VERIFY_SUITES) if suite == "all" else [suite]
    checks = []
    for name in names:
        checks.extend(VERIFY_SUITES[name]())
    if suite == "all":
        checks.extend(verify_harness())
    width = max(len(c["name"]) for c in checks)
    for c in checks:
        status = "pass" if c["passed"] else "FAIL"
        print(f"{c['name']:<{width}}  {c['margin']: .3e}  {status}",
              flush=True)
    n_fail = sum(not c["passed"] for c in checks)
    print(f"{len(checks) - n_fail}/{len(checks)} checks passed", flush=True)
    return 0 if n_fail == 0 else 1
