"""Command-line front end; every subcommand writes CSV with a header row.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 resource
budget exceeded.  Settings resolve as flags > JSON config > defaults, and
when ``--out`` is given the effective settings are written next to it as
``<out>.meta.json``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .errors import DomainError, ResourceError
from .logreal import LogReal
from .partition import (
    PenaltyRegime,
    PenaltyScheme,
    fluctuation_law,
    partition_exact,
    scales,
    strong_support_set,
    z_asymptotic_critical,
    z_asymptotic_strong,
    z_asymptotic_weak,
)
from .range_law import (
    RangeEvent,
    Regime,
    RegimeKind,
    center_conditional_pmf,
    range_event_boundary,
    range_event_exact,
    range_event_simplified,
    theta_asymptotic,
)
from .ruin import (
    ExitSide,
    StripQuery,
    confinement_asymptotic,
    confinement_exact,
    feller_exit_pmf,
    ruin_asymptotic,
    strip_validity,
)
from .sampler import default_workers, realized_range, sample_paths_conditioned, sample_range
from .validation import SUITES, run_suite

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def rel_err(approx: LogReal, exact: LogReal) -> float:
    if exact.is_zero():
        return 0.0 if approx.is_zero() else math.inf
    return abs(math.expm1(approx.log_value - exact.log_value))


# -- subcommands ----------------------------------------------------------------

DEFAULTS = {
    "ruin": {"side": "all"},
    "range-prob": {"regime": "auto", "alpha": None},
    "partition": {"rel_tol": 1e-12, "h": None, "h_hat": None, "gamma": None, "regime": None, "exact": False,
                  "asymptotic_only": False},
    "law": {"rel_tol": 1e-12, "h": None, "h_hat": None, "gamma": None, "table": "joint", "t": None},
    "limits": {"h_hat": 1.0, "gamma": -0.3, "ns": [1000, 10000, 100000], "gammas": None, "n": None},
    "sample": {"seed": 0, "count": 1000, "h": None, "h_hat": None, "gamma": None, "rel_tol": 1e-12},
    "validate": {"suite": "oracle"},
}


def _require(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise UsageError("missing required setting(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _scheme(cfg) -> PenaltyScheme:
    if cfg.get("h") is not None:
        if cfg.get("gamma") is not None:
            raise DomainError("give either --h or (--h-hat, --gamma), not both")
        return PenaltyScheme.explicit(cfg["h"], cfg.get("regime"))
    if cfg.get("gamma") is None:
        raise UsageError("need --h, or --gamma (with optional --h-hat)")
    return PenaltyScheme.power_law(cfg.get("h_hat") or 1.0, cfg["gamma"])


def cmd_ruin(cfg):
    _require(cfg, "z", "T", "n")
    q = StripQuery(cfg["z"], cfg["T"], cfg["n"])
    sides = ["bottom", "top", "survive"] if cfg["side"] == "all" else [cfg["side"]]
    val = strip_validity(q.T, q.n)
    header = ["quantity", "z", "T", "n", "log_exact", "exact", "log_asymptotic", "asymptotic", "rel_err",
              "n_over_T2", "in_regime"]
    rows = []
    for side in sides:
        if side == "survive":
            exact = confinement_exact(q)
            approx = confinement_asymptotic(q).value if q.interior else LogReal.zero()
            name = "confinement"
        else:
            if not q.interior:
                raise DomainError(f"exit probabilities need 0 < z < T, got z={q.z}")
            s = ExitSide(side)
            exact = feller_exit_pmf(q, s)
            approx = ruin_asymptotic(q, s).value if s is not ExitSide.EITHER else (
                ruin_asymptotic(q, ExitSide.BOTTOM).value + ruin_asymptotic(q, ExitSide.TOP).value)
            name = f"exit_{side}"
        rows.append([name, q.z, q.T, q.n, exact.log_value, exact.value, approx.log_value, approx.value,
                     rel_err(approx, exact), val.n_over_T2, val.in_regime])
    return header, rows


def _regime_from(cfg, n, T):
    name = cfg["regime"]
    if name == "auto":
        return Regime.classify(n, T)
    kind = RegimeKind(name)
    if kind is RegimeKind.CRITICAL:
        return Regime.critical(cfg["alpha"] if cfg.get("alpha") is not None else n / T**3)
    return Regime(kind)


def cmd_range_prob(cfg):
    _require(cfg, "x", "y", "n")
    e = RangeEvent(cfg["x"], cfg["y"], cfg["n"])
    exact = range_event_exact(e)
    header = ["variant", "x", "y", "n", "T", "n_over_T3", "regime", "log_value", "value", "ratio_to_exact",
              "in_regime"]
    rows = [["exact", e.x, e.y, e.n, e.T, e.n / max(e.T, 1) ** 3, "", exact.log_value, exact.value, 1.0, True]]
    if e.T >= 3:
        r = _regime_from(cfg, e.n, e.T)
        variants = [("theta", theta_asymptotic(e, r))]
        if r.kind is RegimeKind.SUBCRITICAL:
            variants.append(("theta_derived_decay", theta_asymptotic(e, r, subcritical_decay="derived")))
        variants.append(("simplified", range_event_simplified(e)))
        if min(e.x, e.y) == 0:
            variants.append(("boundary", range_event_boundary(e.T, e.n, r)))
        for name, est in variants:
            ratio = math.exp(est.log_value - exact.log_value) if not exact.is_zero() else math.nan
            rows.append([name, e.x, e.y, e.n, e.T, e.n / e.T**3, r.kind.value, est.log_value, est.value.value,
                         ratio, est.validity.in_regime])
    return header, rows


def cmd_partition(cfg):
    _require(cfg, "n")
    n = cfg["n"]
    scheme = _scheme(cfg)
    h = scheme.h_at(n)
    try:
        regime = scheme.regime()
    except DomainError:
        regime = None
    header = ["variant", "n", "h", "regime", "log_value", "value", "ratio_to_exact"]
    rows = []
    exact = None
    if not cfg["asymptotic_only"]:
        exact, law = partition_exact(n, h, cfg["rel_tol"])
        rows.append(["exact", n, h, regime.value if regime else "", exact.log_value, exact.value, 1.0])
    if not cfg["exact"]:
        variants = []
        if regime in (None, PenaltyRegime.WEAK):
            variants.append(("weak", z_asymptotic_weak(n, h)))
        if regime in (None, PenaltyRegime.CRITICAL):
            variants.append(("critical", z_asymptotic_critical(n, h)))
        if regime in (None, PenaltyRegime.STRONG):
            variants.append(("strong", z_asymptotic_strong(n, h)))
            variants.append(("strong_derived", z_asymptotic_strong(n, h, form="derived")))
        for name, z in variants:
            ratio = math.exp(z.log_value - exact.log_value) if exact is not None else math.nan
            rows.append([name, n, h, regime.value if regime else "", z.log_value, z.value, ratio])
    return header, rows


def cmd_law(cfg):
    _require(cfg, "n")
    n = cfg["n"]
    table = cfg["table"]
    if table == "conditional":
        _require(cfg, "t")
        c = center_conditional_pmf(cfg["t"], n)
        return ["two_w", "w_over_t", "probability", "limit_density"], [
            [w, w / (2.0 * c.t), p, d] for w, p, d in zip(c.two_w, c.pmf, c.limit_density)
        ]
    h = _scheme(cfg).h_at(n)
    _, law = partition_exact(n, h, cfg["rel_tol"])
    q = scales(n, h)
    if table == "joint":
        p = law.pmf()
        return ["t", "two_w", "probability", "log_weight"], [
            [t, w, pp, lw] for t, w, pp, lw in zip(law.t, law.two_w, p, law.log_weight)
        ]
    if table == "t":
        ts, p = law.marginal_t()
        return ["t", "offset_weak", "offset_strong", "normalized", "probability"], [
            [t, t - math.floor(q.t_star), t - q.floor_t_o, (t - q.t_star) / q.a_n, pp] for t, pp in zip(ts, p)
        ]
    if table == "w":
        ws, p = law.marginal_two_w()
        return ["two_w", "w_over_t_star", "probability"], [[w, w / (2 * q.t_star), pp] for w, pp in zip(ws, p)]
    raise UsageError(f"unknown table {table!r}")


def cmd_limits(cfg):
    h_hat = cfg["h_hat"]
    if cfg.get("gammas"):
        _require(cfg, "n")
        grid = [(cfg["n"], g) for g in cfg["gammas"]]
    else:
        grid = [(n, cfg["gamma"]) for n in cfg["ns"]]
    header = ["n", "gamma", "h", "regime", "t_star", "a_n", "ks_t", "tv_t", "ks_w", "tv_w", "dependence",
              "mass_A_n", "max_offset_mass"]
    rows = []
    for n, g in grid:
        scheme = PenaltyScheme.power_law(h_hat, g)
        h = scheme.h_at(n)
        q = scales(n, h)
        _, law = partition_exact(n, h)
        fl = fluctuation_law(n, h, law)
        s, p = law.fluctuation_pmf(q.floor_t_o)
        mass = float(p[np.isin(s, sorted(strong_support_set(n, h)))].sum())
        rows.append([n, g, h, scheme.regime().value, q.t_star, q.a_n, fl.ks_t, fl.tv_t, fl.ks_w, fl.tv_w,
                     fl.dependence, mass, float(p.max())])
    return header, rows


def cmd_sample(cfg):
    kind = cfg["kind"]
    count, seed, workers = cfg["count"], cfg["seed"], cfg["workers"]
    if kind == "range":
        _require(cfg, "n")
        h = _scheme(cfg).h_at(cfg["n"])
        _, law = partition_exact(cfg["n"], h, cfg["rel_tol"])
        b = sample_range(law, seed, count, workers)
        return ["index", "t", "two_w"], [[i, t, w] for i, (t, w) in enumerate(zip(b.t, b.two_w))]
    _require(cfg, "x", "y", "n")
    e = RangeEvent(cfg["x"], cfg["y"], cfg["n"])
    rows = []
    for i, path in enumerate(sample_paths_conditioned(e, seed, count, workers)):
        if realized_range(path.steps) != (e.x, e.y):
            raise AssertionError("conditioned sampler produced a path with the wrong range")
        rows.append([i, e.x, e.y, "".join("+" if s > 0 else "-" for s in path.steps)])
    return ["index", "x", "y", "steps"], rows


def cmd_validate(cfg):
    results = run_suite(cfg["suite"])
    # timings are left out so that reruns give byte-identical output
    rows = [[r.key, r.title, r.passed, r.detail] for r in results]
    return ["check", "title", "passed", "detail"], rows, all(r.passed for r in results)


COMMANDS = {
    "ruin": cmd_ruin,
    "range-prob": cmd_range_prob,
    "partition": cmd_partition,
    "law": cmd_law,
    "limits": cmd_limits,
    "sample": cmd_sample,
    "validate": cmd_validate,
}


# -- argument handling --------------------------------------------------------------


def _floats(s):
    return [float(v) for v in s.split(",") if v]


def _ints(s):
    return [int(float(v)) for v in s.split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    p = _Parser(prog="rangepolymer", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", default=None, help="JSON file of settings (flags override it)")
        sp.add_argument("--out", default=None, help="write CSV here instead of stdout")
        sp.add_argument("--workers", type=int, default=S, help="worker threads (default $RANGEPOLYMER_WORKERS or 1)")
        return sp

    def penalty(sp):
        sp.add_argument("--h", type=float, default=S)
        sp.add_argument("--h-hat", dest="h_hat", type=float, default=S)
        sp.add_argument("--gamma", type=float, default=S)
        sp.add_argument("--regime", choices=[r.value for r in PenaltyRegime], default=S)
        sp.add_argument("--rel-tol", dest="rel_tol", type=float, default=S)

    sp = common(sub.add_parser("ruin", help="exit and confinement probabilities"))
    sp.add_argument("--z", type=int, default=S)
    sp.add_argument("--T", type=int, default=S)
    sp.add_argument("--n", type=int, default=S)
    sp.add_argument("--side", choices=["all", "bottom", "top", "either", "survive"], default=S)

    sp = common(sub.add_parser("range-prob", help="P(range = [-x, y]) and its approximations"))
    sp.add_argument("--x", type=int, default=S)
    sp.add_argument("--y", type=int, default=S)
    sp.add_argument("--n", type=int, default=S)
    sp.add_argument("--regime", choices=["auto"] + [k.value for k in RegimeKind], default=S)
    sp.add_argument("--alpha", type=float, default=S)

    sp = common(sub.add_parser("partition", help="log Z_{n,h} exactly and asymptotically"))
    sp.add_argument("--n", type=int, default=S)
    penalty(sp)
    sp.add_argument("--exact", action="store_true", default=S, help="only the exact value")
    sp.add_argument("--asymptotic-only", dest="asymptotic_only", action="store_true", default=S)

    sp = common(sub.add_parser("law", help="joint, marginal or conditional tables"))
    sp.add_argument("--n", type=int, default=S)
    penalty(sp)
    sp.add_argument("--table", choices=["joint", "t", "w", "conditional"], default=S)
    sp.add_argument("--t", type=int, default=S, help="amplitude for --table conditional")

    sp = common(sub.add_parser("limits", help="distances to the limit laws along n or gamma"))
    sp.add_argument("--h-hat", dest="h_hat", type=float, default=S)
    sp.add_argument("--gamma", type=float, default=S, help="exponent of h_n = h_hat n^gamma (default -0.3)")
    sp.add_argument("--ns", type=_ints, default=S, help="comma-separated n grid")
    sp.add_argument("--n", type=int, default=S, help="fixed n for a --gammas sweep")
    sp.add_argument("--gammas", type=_floats, default=S, help="comma-separated exponents; write --gammas=-0.3,0.4 when the list starts with a minus")

    sp = common(sub.add_parser("sample", help="draws of (T_n, 2W_n) or conditioned paths"))
    sp.add_argument("kind", choices=["range", "path"])
    sp.add_argument("--n", type=int, default=S)
    penalty(sp)
    sp.add_argument("--x", type=int, default=S)
    sp.add_argument("--y", type=int, default=S)
    sp.add_argument("--count", type=int, default=S)
    sp.add_argument("--seed", type=int, default=S)

    sp = common(sub.add_parser("validate", help="run a check suite"))
    sp.add_argument("--suite", choices=sorted(SUITES), default=S)
    return p


def resolve(ns: argparse.Namespace) -> dict:
    cfg = {"workers": default_workers()}
    cfg.update(DEFAULTS[ns.command])
    if ns.config:
        try:
            with open(ns.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise UsageError("config must be a JSON object")
        cfg.update({k.replace("-", "_"): v for k, v in loaded.items()})
    cfg.update({k: v for k, v in vars(ns).items() if k not in ("config", "out")})
    return cfg


def write_csv(header, rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        ns = build_parser().parse_args(argv)
        cfg = resolve(ns)
        result = COMMANDS[ns.command](cfg)
        ok = True
        if len(result) == 3:
            header, rows, ok = result
        else:
            header, rows = result
        buf = io.StringIO()
        write_csv(header, rows, buf)
        if ns.out:
            with open(ns.out, "w", newline="") as fh:
                fh.write(buf.getvalue())
            meta = {"version": __version__, "command": ns.command, "settings": cfg}
            with open(ns.out + ".meta.json", "w") as fh:
                json.dump(meta, fh, indent=2, sort_keys=True, default=str)
                fh.write("\n")
        else:
            stdout.write(buf.getvalue())
        return EXIT_OK if ok else EXIT_VALIDATION
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"resource budget exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


def main():
    sys.exit(run())
