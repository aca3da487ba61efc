"""Experiment orchestration: corpora, campaigns, CSV reports, verification.

Everything here is deterministic: corpora are drawn from seeded generators,
campaigns iterate in a fixed order, and floats are serialized with repr, so
identical configs produce byte-identical reports.

Empirical constants measured by the campaigns (the corpus maxima that play
the role of the inequality constants) are frozen into a golden directory on
first run and compared on later runs; bumping a frozen value requires an
explicit flag.  The golden directory is taken from the STABLAB_GOLDEN_DIR
environment variable unless given explicitly.
"""

from __future__ import annotations

import io
import json
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from . import cz as cz_mod
from . import distance as distance_mod
from .dual_search import annihilator_pair, duality_pairing, make_instance, min_constant
from .grid import DyadicInterval, GridFunction, GridSet, dilate_interval, inner, norm
from .operators import (
    LinearOperatorSpec,
    adjoint,
    apply,
    haar_transform,
    hilbert,
    identity_minus_mean,
    nyquist_free,
)
from .stability import bourgain_construct

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "default_config",
    "generate_corpus",
    "make_operator",
    "run_theorem1",
    "run_theorem2",
    "verify_all",
    "golden_dir",
    "freeze_or_check",
    "GOLDEN_ENV",
]

GOLDEN_ENV = "STABLAB_GOLDEN_DIR"
CSV_SCHEMA = "stablab-csv-v1"
FAMILIES = ("spikes", "steps", "smooth", "mixture")
SUPPORT_LEFT_HALF = "left-half"


class ConfigError(ValueError):
    """Raised for malformed experiment configurations."""


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 7
    n: int = 256
    p: float = 2.0
    operators: tuple[str, ...] = ("hilbert", "haar_transform", "identity_minus_mean")
    s_min: float = 1.0
    s_max: float = 32.0
    s_count: int = 20
    s_log: bool = True
    corpus_counts: tuple[tuple[str, int], ...] = (
        ("spikes", 3),
        ("steps", 3),
        ("smooth", 3),
        ("mixture", 3),
    )
    dilation_factor: float = 10.0
    dual_s_values: tuple[float, ...] = (0.5, 1.0, 2.0, 4.0)
    dual_operators: tuple[str, ...] = ("hilbert", "haar_transform")
    dual_corpus_per_family: int = 1
    dual_tol: float = 1e-2
    support: str | None = None  # None or "left-half"
    cz_trials: int = 200
    probe_trials: int = 100

    def __post_init__(self):
        if self.n < 2 or (self.n & (self.n - 1)) != 0:
            raise ConfigError(f"n must be a power of two >= 2, got {self.n}")
        if not (1.0 < self.p < math.inf):
            raise ConfigError(f"p must be finite and > 1, got {self.p}")
        for name, count in self.corpus_counts:
            if name not in FAMILIES:
                raise ConfigError(f"unknown corpus family {name!r}")
            if count < 0:
                raise ConfigError("family counts must be nonnegative")
        for kind in self.operators + self.dual_operators:
            if kind not in ("hilbert", "haar_transform", "identity_minus_mean"):
                raise ConfigError(f"unknown operator kind {kind!r}")
        if self.support not in (None, SUPPORT_LEFT_HALF):
            raise ConfigError(f"unsupported support choice {self.support!r}")

    def s_values(self) -> list[float]:
        if self.s_count == 1:
            return [float(self.s_min)]
        if self.s_log:
            lo, hi = math.log(self.s_min), math.log(self.s_max)
            return [math.exp(lo + (hi - lo) * i / (self.s_count - 1)) for i in range(self.s_count)]
        return [
            self.s_min + (self.s_max - self.s_min) * i / (self.s_count - 1)
            for i in range(self.s_count)
        ]

    def to_json(self) -> str:
        obj = {
            "seed": self.seed,
            "n": self.n,
            "p": self.p,
            "operators": list(self.operators),
            "s_sweep": {"min": self.s_min, "max": self.s_max, "count": self.s_count, "log": self.s_log},
            "corpus": {name: count for name, count in self.corpus_counts},
            "dilation_factor": self.dilation_factor,
            "dual": {
                "s_values": list(self.dual_s_values),
                "operators": list(self.dual_operators),
                "per_family": self.dual_corpus_per_family,
                "tol": self.dual_tol,
            },
            "support": self.support,
            "cz_trials": self.cz_trials,
            "probe_trials": self.probe_trials,
        }
        return json.dumps(obj, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        obj = json.loads(text)
        kwargs = {}
        for key in ("seed", "n", "p", "dilation_factor", "support", "cz_trials", "probe_trials"):
            if key in obj:
                kwargs[key] = obj[key]
        if "operators" in obj:
            kwargs["operators"] = tuple(obj["operators"])
        if "s_sweep" in obj:
            sw = obj["s_sweep"]
            kwargs.update(
                s_min=sw.get("min", 1.0),
                s_max=sw.get("max", 32.0),
                s_count=sw.get("count", 20),
                s_log=sw.get("log", True),
            )
        if "corpus" in obj:
            # family order is canonical so configs hash and compare stably
            kwargs["corpus_counts"] = tuple(
                (name, obj["corpus"][name]) for name in FAMILIES if name in obj["corpus"]
            )
        if "dual" in obj:
            du = obj["dual"]
            if "s_values" in du:
                kwargs["dual_s_values"] = tuple(du["s_values"])
            if "operators" in du:
                kwargs["dual_operators"] = tuple(du["operators"])
            if "per_family" in du:
                kwargs["dual_corpus_per_family"] = du["per_family"]
            if "tol" in du:
                kwargs["dual_tol"] = du["tol"]
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def default_config(**overrides) -> ExperimentConfig:
    return replace(ExperimentConfig(), **overrides) if overrides else ExperimentConfig()


# ---------------------------------------------------------------------------
# corpus
# ---------------------------------------------------------------------------


def _spike(rng: np.random.Generator, n: int) -> np.ndarray:
    count = int(rng.integers(1, 4))
    cells = rng.choice(n, size=count, replace=False)
    out = np.zeros(n)
    out[cells] = rng.choice([-1.0, 1.0], size=count) * rng.lognormal(0.0, 0.5, size=count)
    return out

def _step(rng: np.random.Generator, n: int) -> np.ndarray:
    level = int(rng.integers(1, min(5, n.bit_length() - 1) + 1))
    blocks = rng.standard_normal(1 << level)
    return np.repeat(blocks, n >> level)

def _smooth(rng: np.random.Generator, n: int) -> np.ndarray:
    top = max(2, n // 16)
    x = np.arange(n) / n
    out = np.zeros(n)
    for j in range(1, top + 1):
        amp = 1.0 / (1.0 + j) ** 1.5
        out += amp * rng.standard_normal() * np.cos(2 * np.pi * j * x)
        out += amp * rng.standard_normal() * np.sin(2 * np.pi * j * x)
    return out

def _mixture(rng: np.random.Generator, n: int) -> np.ndarray:
    a, b = _smooth(rng, n), _spike(rng, n)
    a /= max(np.abs(a).mean(), 1e-12)
    b /= max(np.abs(b).mean(), 1e-12)
    return 0.5 * a + 0.5 * b

_MAKERS = {"spikes": _spike, "steps": _step, "smooth": _smooth, "mixture": _mixture}


def generate_corpus(cfg: ExperimentConfig, support: GridSet | None = None) -> list[tuple[str, GridFunction]]:
    """Deterministic corpus of unit-L^1 functions, labeled family:index.

    With a support set the draws are masked first and renormalized, so every
    member vanishes off the set exactly.
    """
    out: list[tuple[str, GridFunction]] = []
    for name, count in cfg.corpus_counts:
        maker = _MAKERS[name]
        for i in range(count):
            rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, FAMILIES.index(name), i]))
            values = maker(rng, cfg.n)
            if support is not None:
                values = np.where(support.membership, values, 0.0)
            total = np.abs(values).mean()
            if total <= 1e-12:
                values = np.zeros(cfg.n)
                values[0 if support is None else int(np.argmax(support.membership))] = float(cfg.n)
                total = 1.0
            out.append((f"{name}:{i}", GridFunction(values / total)))
    return out


def make_operator(kind: str, n: int, seed: int = 0, restriction: GridSet | None = None) -> LinearOperatorSpec:
    """Operator factory; haar_transform gets seeded +-1 signs per scale/position."""
    if kind == "hilbert":
        return hilbert(n, restriction)
    if kind == "identity_minus_mean":
        return identity_minus_mean(n, restriction)
    if kind == "haar_transform":
        rng = np.random.default_rng(np.random.SeedSequence([seed, 1713]))
        signs = rng.choice([-1, 1], size=n - 1)
        return haar_transform(n, signs, restriction)
    raise ConfigError(f"unknown operator kind {kind!r}")


def _support_set(cfg: ExperimentConfig) -> GridSet | None:
    if cfg.support is None:
        return None
    return GridSet.from_interval(DyadicInterval(1, 0), cfg.n)


# ---------------------------------------------------------------------------
# CSV plumbing
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(name: str, header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_SCHEMA} {name}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    return buf.getvalue()


THEOREM1_HEADER = [
    "instance", "operator", "n", "p", "s",
    "a", "b", "c", "t", "r", "lam", "cube_count", "omega_measure",
    "ratio_p", "ratio_f", "ratio_T", "resid_l1", "resid_T", "degenerate",
]

THEOREM2_HEADER = [
    "instance", "operator", "n", "p", "s", "r", "t",
    "c_star", "res_p", "res_inf", "res_Tinf", "iterations", "status", "flagged", "support",
]


def run_theorem1(cfg: ExperimentConfig) -> tuple[str, dict]:
    """Sweep corpus x radii x operators through the explicit construction.

    Returns the CSV text and a summary with the corpus maxima of the three
    ratios (the measured stand-ins for the inequality constants).
    """
    corpus = generate_corpus(cfg)
    rows = []
    max_ratios = {"ratio_p": 0.0, "ratio_f": 0.0, "ratio_T": 0.0}
    for label, f in corpus:
        for kind in cfg.operators:
            T = make_operator(kind, cfg.n, cfg.seed)
            for s in cfg.s_values():
                _, rep = bourgain_construct(f, T, s, cfg.p)
                rows.append([
                    label, kind, cfg.n, cfg.p, s,
                    rep.a, rep.b, rep.c, rep.t, rep.r, rep.lam, rep.cube_count,
                    rep.omega_measure,
                    rep.ratio_p, rep.ratio_f, rep.ratio_T, rep.resid_l1, rep.resid_T,
                    rep.degenerate,
                ])
                for key in max_ratios:
                    max_ratios[key] = max(max_ratios[key], getattr(rep, key))
    csv_text = _write_csv("theorem1", THEOREM1_HEADER, rows)
    summary = {"rows": len(rows), **{f"max_{k}": v for k, v in max_ratios.items()}}
    return csv_text, summary


def run_theorem2(cfg: ExperimentConfig) -> tuple[str, dict]:
    """Sweep a (smaller) corpus through the dual feasibility search."""
    support = _support_set(cfg)
    per_family = tuple((name, min(count, cfg.dual_corpus_per_family)) for name, count in cfg.corpus_counts)
    corpus = generate_corpus(replace(cfg, corpus_counts=per_family), support)
    rows = []
    c_max = 0.0
    uncertified = 0
    for label, f in corpus:
        for kind in cfg.dual_operators:
            T = make_operator(kind, cfg.n, cfg.seed)
            for s in cfg.dual_s_values:
                inst = make_instance(f, T, s, cfg.p, support)
                result = min_constant(inst, tol=cfg.dual_tol)
                rows.append([
                    label, kind, cfg.n, cfg.p, s, inst.r, inst.t,
                    result.c_star, result.res_p, result.res_inf, result.res_Tinf,
                    result.iterations, result.status, result.flagged,
                    cfg.support or "none",
                ])
                c_max = max(c_max, result.c_star)
                uncertified += int(result.status != "certified")
    csv_text = _write_csv("theorem2", THEOREM2_HEADER, rows)
    summary = {"rows": len(rows), "max_c_star": c_max, "uncertified": uncertified}
    return csv_text, summary


# ---------------------------------------------------------------------------
# golden (frozen) constants
# ---------------------------------------------------------------------------


def golden_dir(explicit: str | None = None) -> str | None:
    return explicit if explicit is not None else os.environ.get(GOLDEN_ENV)


def freeze_or_check(
    name: str,
    value: float,
    directory: str | None = None,
    rel_slack: float = 1e-9,
    bump: bool = False,
) -> tuple[float, bool]:
    """Freeze a measured constant on first run, compare on later runs.

    Returns (frozen_value, created).  Raises AssertionError when the new
    value exceeds the frozen one beyond the slack and bumping is off.
    """
    directory = golden_dir(directory)
    if directory is None:
        return value, False
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, f"{name}.json")
    if bump or not os.path.exists(path):
        with open(path, "w") as fh:
            json.dump({"name": name, "value": value}, fh, sort_keys=True)
            fh.write("\n")
        return value, True
    with open(path) as fh:
        frozen = float(json.load(fh)["value"])
    if value > frozen * (1.0 + rel_slack) + 1e-15:
        raise AssertionError(
            f"frozen constant {name} regressed: measured {value!r} > frozen {frozen!r}"
        )
    return frozen, False


# ---------------------------------------------------------------------------
# verify_all: every module's invariant suite, machine-readable summary
# ---------------------------------------------------------------------------


def _suite_grid(cfg: ExperimentConfig) -> tuple[int, list[str]]:
    failures = []
    checks = 0
    # nesting law, exhaustive through level 6
    intervals = [DyadicInterval(l, i) for l in range(7) for i in range(1 << l)]
    for a in intervals:
        for b in intervals:
            checks += 1
            if not a.nested_or_disjoint(b):
                failures.append(f"nesting:{a}|{b}")
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 100]))
    n = 64
    for i in range(50):
        f = GridFunction(rng.standard_normal(n))
        g = GridFunction(rng.standard_normal(n))
        p = float(rng.uniform(1.1, 4.0))
        q = p / (p - 1.0)
        checks += 1
        if abs(inner(f, g)) > norm(f, p) * norm(g, q) * (1 + 1e-12):
            failures.append(f"holder:{i}")
        lo, hi = sorted(rng.uniform(1.0, 6.0, size=2))
        checks += 1
        if norm(f, lo) > norm(f, hi) * (1 + 1e-12):
            failures.append(f"norm_monotone:{i}")
    for level in range(7):
        for index in range(1 << level):
            q_int = DyadicInterval(level, index)
            for factor in (1.0, 2.0, 3.5, 10.0):
                checks += 1
                got = dilate_interval(q_int, factor, n).measure
                if got > min(1.0, factor * q_int.length) + 2.0 / n + 1e-12:
                    failures.append(f"dilate:{q_int}x{factor}")
    return checks, failures


def _suite_distance(cfg: ExperimentConfig) -> tuple[int, list[str]]:
    failures = []
    checks = 0
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 200]))
    n = 64
    for i in range(30):
        f = GridFunction(rng.standard_normal(n) * rng.lognormal(0, 1))
        p = float(rng.choice([1.5, 2.0, 3.0]))
        s = float(rng.uniform(0.1, 1.5) * norm(f, p))
        for solver, ambient in (
            (distance_mod.dist_l1_to_lp_ball, 1.0),
            (distance_mod.dist_linf_to_lp_ball, math.inf),
        ):
            res = solver(f, s, p)
            checks += 3
            if norm(res.minimizer, p) > s * (1 + distance_mod.FEAS_TOL):
                failures.append(f"feasibility:{i}:{ambient}")
            if norm(f - res.minimizer, ambient) > res.value * (1 + distance_mod.FEAS_TOL) + 1e-12:
                failures.append(f"attainment:{i}:{ambient}")
            lam = float(rng.uniform(0.5, 2.0))
            scaled = solver(lam * f, lam * s, p)
            if abs(scaled.value - lam * res.value) > 1e-8 * max(1.0, res.value):
                failures.append(f"scaling:{i}:{ambient}")
            # monotone in s and vanishing at the norm
            checks += 2
            if solver(f, s * 1.5, p).value > res.value * (1 + 1e-9) + 1e-12:
                failures.append(f"monotone:{i}:{ambient}")
            if solver(f, norm(f, p), p).value > 1e-12:
                failures.append(f"vanishing:{i}:{ambient}")
    return checks, failures


def _suite_cz(cfg: ExperimentConfig) -> tuple[int, list[str]]:
    failures = []
    checks = 0
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 300]))
    for i in range(cfg.cz_trials):
        n = int(rng.choice([64, 256]))
        f = GridFunction(rng.standard_normal(n) * np.exp(rng.standard_normal(n)))
        lam = norm(f, 1) * float(10.0 ** rng.uniform(0.0, 2.0))
        d = cz_mod.cz_decompose(f, lam, cfg.dilation_factor)
        for check in cz_mod.verify_cz(d, f):
            checks += 1
            if not check.passed:
                failures.append(f"cz:{i}:{check.name}")
    return checks, failures


def _suite_operators(cfg: ExperimentConfig, corrupt_adjoint: bool = False) -> tuple[int, list[str]]:
    failures = []
    checks = 0
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 400]))
    n = cfg.n
    x = np.arange(n) / n
    H = hilbert(n)
    cos_f = GridFunction(np.cos(2 * np.pi * x))
    sin_f = GridFunction(np.sin(2 * np.pi * x))
    checks += 1
    if norm(apply(H, cos_f) - sin_f, np.inf) > 1e-10:
        failures.append("hilbert_cos_to_sin")
    for kind in cfg.operators:
        T = make_operator(kind, n, cfg.seed)
        Ts = adjoint(T)
        for i in range(cfg.probe_trials):
            fp = GridFunction(rng.standard_normal(n))
            gp = GridFunction(rng.standard_normal(n))
            lhs = inner(apply(T, fp), gp)
            rhs = inner(fp, apply(Ts, gp))
            if corrupt_adjoint:
                rhs += 1e-3
            checks += 1
            if abs(lhs - rhs) > 1e-10 * max(1.0, abs(lhs)):
                failures.append(f"adjoint_pairing:{kind}:{i}")
            checks += 1
            a, b = rng.standard_normal(2)
            lin = apply(T, GridFunction(a * fp.values + b * gp.values))
            lin_ref = a * apply(T, fp) + b * apply(T, gp)
            if norm(lin - lin_ref, np.inf) > 1e-10 * max(1.0, norm(lin_ref, np.inf)):
                failures.append(f"linearity:{kind}:{i}")
        checks += 1
        probe = nyquist_free(GridFunction(rng.standard_normal(n)))
        twice = apply(T, apply(T, probe))
        demeaned = probe.values - probe.values.mean()
        target = -demeaned if kind == "hilbert" else demeaned
        if norm(twice - GridFunction(target), np.inf) > 1e-9:
            failures.append(f"involution:{kind}")
    return checks, failures


def _suite_stability(cfg: ExperimentConfig) -> tuple[int, list[str]]:
    failures = []
    checks = 0
    small = replace(cfg, corpus_counts=tuple((name, min(1, cnt)) for name, cnt in cfg.corpus_counts), s_count=5)
    corpus = generate_corpus(small)
    bound_p = 1.0 + 2.0 ** ((small.p - 1.0) / small.p)
    for label, f in corpus:
        for kind in small.operators[:2]:
            T = make_operator(kind, small.n, small.seed)
            for s in small.s_values():
                _, rep = bourgain_construct(f, T, s, small.p)
                checks += 3
                if rep.ratio_p > bound_p * (1 + 1e-9):
                    failures.append(f"ratio_p:{label}:{kind}:{s:g}")
                if rep.ratio_f > 2.0 * (1 + 1e-9):
                    failures.append(f"ratio_f:{label}:{kind}:{s:g}")
                if rep.a > distance_mod.BISECTION_TOL and rep.lam > 0:
                    ident = rep.lam ** (small.p - 1.0) * rep.a
                    if abs(ident - rep.b**small.p) > 1e-9 * max(1.0, rep.b**small.p):
                        failures.append(f"level_identity:{label}:{kind}:{s:g}")
    return checks, failures


def _suite_dual(cfg: ExperimentConfig) -> tuple[int, list[str]]:
    failures = []
    checks = 0
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 600]))
    n = 64
    for kind in cfg.dual_operators:
        T = make_operator(kind, n, cfg.seed)
        for i in range(20):
            beta = GridFunction(rng.standard_normal(n))
            g = GridFunction(rng.standard_normal(n))
            pair = annihilator_pair(beta, T)
            checks += 1
            if abs(duality_pairing((g, apply(T, g)), pair)) > 1e-9:
                failures.append(f"annihilation:{kind}:{i}")
        f = GridFunction(np.abs(rng.standard_normal(n)) + 0.5)
        f = f * (1.0 / norm(f, 1))
        inst = make_instance(f, T, 0.5 * norm(f, cfg.p), cfg.p)
        result = min_constant(inst, tol=cfg.dual_tol)
        checks += 1
        if result.status != "certified":
            failures.append(f"dual_certification:{kind}")
    return checks, failures


def verify_all(cfg: ExperimentConfig, corrupt_adjoint: bool = False) -> dict:
    """Run every module's invariant suite; returns a JSON-ready summary.

    ``corrupt_adjoint`` is a fault-injection hook used by tests to prove the
    gate actually fails when an operator identity breaks.
    """
    suites = {
        "grid": _suite_grid(cfg),
        "distance": _suite_distance(cfg),
        "cz": _suite_cz(cfg),
        "operators": _suite_operators(cfg, corrupt_adjoint=corrupt_adjoint),
        "stability": _suite_stability(cfg),
        "dual": _suite_dual(cfg),
    }
    summary = {
        "config": json.loads(cfg.to_json()),
        "suites": {
            name: {"checks": checks, "failures": len(fails), "failed": fails[:20]}
            for name, (checks, fails) in suites.items()
        },
    }
    summary["ok"] = all(len(fails) == 0 for _, fails in suites.values())
    return summary
