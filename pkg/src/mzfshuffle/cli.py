"""Command line front end.

    python -m mzfshuffle verify --id sum-formula --s 3
    python -m mzfshuffle expand --left s1,s2 --right t
    python -m mzfshuffle plot-data --id ipfd-pointwise --at s=1.5+0.5j,t=2.25,x=3,y=7
    python -m mzfshuffle selftest --seed 7 --workers 4

Exit codes: 0 all points pass, 1 configuration error, 2 some residual above
tolerance, 3 some point raised an evaluation error.
"""
from __future__ import annotations

import argparse
import json
import random
import re
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .engine import expand_shuffle, finite_identity, integer_specialize
from .errors import ConfigError, MzfError
from .mzf import LatticePlan, mzf_eval
from .parallel import ordered_map
from .realize import RealizeStats, TruncationPlan, realize
from .verifier import (
    DEFAULT_TOL,
    IDENTITIES,
    IdentitySpec,
    VerificationReport,
    _check_task,
    _lattice_json,
    check_identity,
    load_catalog,
)

EXIT_OK, EXIT_CONFIG, EXIT_FAIL, EXIT_EVAL = 0, 1, 2, 3

# defaults for every overridable option; a config file may set any of them
DEFAULTS = {
    "id": None,
    "points": None,
    "at": None,
    "tol": None,
    "cutoff": 400,
    "inner_cutoffs": None,
    "tail": "fit",
    "direct_above": 12,
    "max_cutoff": 2048,
    "tail_tol": 1e-9,
    "conv_cutoff": 4096,
    "workers": 1,
    "seed": 20240611,
    "out": None,
    "left": None,
    "right": None,
    "integer": None,
    "realize": None,
    "cutoffs": "25,50,100,200,400",
    "layout": "matrix",
}
_INT_KEYS = {"cutoff", "direct_above", "max_cutoff", "conv_cutoff", "workers", "seed"}
_SHORTCUTS = ("s", "t", "x", "y", "s1", "s2", "b", "c", "d")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# ---------------------------------------------------------------- parsing helpers


def _split_top(text: str, sep: str = ",") -> list[str]:
    """Split on ``sep`` outside brackets."""
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch in "[(":
            depth += 1
        elif ch in "])":
            depth -= 1
        if ch == sep and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    if cur.strip():
        out.append(cur)
    return [p.strip() for p in out]


def parse_value(text: str):
    """Number, complex (``2+1j`` or ``2+1i``), fraction string, or a
    bracketed list of those."""
    text = text.strip()
    if text.startswith("["):
        if not text.endswith("]"):
            raise ConfigError(f"unbalanced list {text!r}")
        return [parse_value(p) for p in _split_top(text[1:-1])]
    if re.fullmatch(r"-?\d+/\d+", text):
        return text
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    try:
        z = complex(text.replace("i", "j").replace(" ", ""))
    except ValueError:
        raise ConfigError(f"cannot parse value {text!r}") from None
    return text.replace("i", "j").replace(" ", "") if z.imag else z.real


def parse_bindings(text: str) -> dict:
    out = {}
    for item in _split_top(text):
        if "=" not in item:
            raise ConfigError(f"expected name=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = parse_value(v)
    return out


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    cfg = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        k, v = (p.strip() for p in line.split("=", 1))
        k = k.replace("-", "_")
        if k not in DEFAULTS:
            raise ConfigError(f"{path}:{n}: unknown key {k!r}")
        cfg[k] = v
    return cfg


def effective_config(ns: argparse.Namespace) -> dict:
    """Defaults, then the config file, then command line flags."""
    cfg = dict(DEFAULTS)
    if getattr(ns, "config", None):
        cfg.update(read_config(ns.config))
    for k in DEFAULTS:
        v = getattr(ns, k, None)
        if v is not None:
            cfg[k] = v
    for k in _INT_KEYS:
        try:
            cfg[k] = int(cfg[k])
        except (TypeError, ValueError):
            raise ConfigError(f"{k} must be an integer, got {cfg[k]!r}") from None
    if cfg["tol"] is not None:
        try:
            cfg["tol"] = float(cfg["tol"])
        except ValueError:
            raise ConfigError(f"tol must be a number, got {cfg['tol']!r}") from None
    try:
        cfg["tail_tol"] = float(cfg["tail_tol"])
    except (TypeError, ValueError):
        raise ConfigError(f"tail_tol must be a number, got {cfg['tail_tol']!r}") from None
    if cfg["workers"] < 1:
        raise ConfigError("workers must be >= 1")
    if cfg["layout"] not in ("matrix", "zeta"):
        raise ConfigError("layout must be 'matrix' or 'zeta'")
    if cfg["tail"] not in ("fit", "none"):
        raise ConfigError("tail must be 'fit' or 'none'")
    shortcut = {k: getattr(ns, k) for k in _SHORTCUTS if getattr(ns, k, None) is not None}
    if shortcut:
        at = parse_bindings(cfg["at"]) if cfg["at"] else {}
        at.update({k: parse_value(v) for k, v in shortcut.items()})
        cfg["at"] = ",".join(f"{k}={_fmt(v)}" for k, v in at.items())
    return cfg


def _fmt(v) -> str:
    if isinstance(v, list):
        return "[" + ",".join(_fmt(x) for x in v) + "]"
    return str(v)


def build_plan(cfg: dict) -> TruncationPlan:
    inner = ()
    if cfg["inner_cutoffs"]:
        inner = tuple(int(x) for x in str(cfg["inner_cutoffs"]).split(":") if x)
    try:
        return TruncationPlan(
            cutoff=cfg["cutoff"],
            inner_cutoffs=inner,
            tail=cfg["tail"],
            direct_above=cfg["direct_above"],
            max_cutoff=max(cfg["max_cutoff"], cfg["cutoff"]),
            tail_tol=cfg["tail_tol"],
            lattice=LatticePlan(conv_cutoff=cfg["conv_cutoff"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _points(cfg: dict, identity: str) -> list[dict]:
    if cfg["at"]:
        return [parse_bindings(cfg["at"])]
    try:
        return load_catalog(identity, cfg["points"], None)
    except FileNotFoundError as exc:
        raise ConfigError(f"no point file: {exc.filename}") from None
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ConfigError(f"bad point file: {exc}") from None


def _report_config(cfg: dict, plan: TruncationPlan) -> dict:
    # workers and output paths do not change results and stay out of the payload
    keep = {k: v for k, v in cfg.items() if k not in ("workers", "out")}
    keep["plan"] = plan.to_json()
    keep["lattice"] = _lattice_json(plan.lattice)
    return keep


def _tol(cfg: dict, ident: str) -> float:
    return cfg["tol"] if cfg["tol"] is not None else DEFAULT_TOL[ident]


def _exit_code(reports: Sequence[VerificationReport]) -> int:
    if any(r.has_error for r in reports):
        return EXIT_EVAL
    if not all(r.verdict for r in reports):
        return EXIT_FAIL
    return EXIT_OK


def _summary(reports: Sequence[VerificationReport], out=None) -> None:
    out = out or sys.stdout
    print(f"{'identity':<24}{'points':>7}{'pass':>6}{'errors':>8}{'max residual':>15}  verdict", file=out)
    for r in reports:
        npass = sum(p.passed for p in r.results)
        nerr = sum(1 for p in r.results if p.error)
        finite = [p.residual for p in r.results if not p.error]
        worst = f"{max(finite):.3e}" if finite else "-"
        print(f"{r.id:<24}{len(r.results):>7}{npass:>6}{nerr:>8}{worst:>15}  {'pass' if r.verdict else 'FAIL'}", file=out)
    for r in reports:
        for p in r.results:
            if p.error:
                print(f"  {r.id} at {json.dumps(p.point)}: {p.error}", file=out)


def _write(out: str | None, name: str, text: str) -> None:
    if out is None:
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    (d / name).write_text(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


# ---------------------------------------------------------------- commands


def cmd_verify(cfg: dict) -> int:
    ids = [i.strip() for i in (cfg["id"] or "").split(",") if i.strip()]
    if not ids:
        raise ConfigError("verify needs --id (comma separated, or 'all')")
    if ids == ["all"]:
        ids = list(IDENTITIES)
    bad = [i for i in ids if i not in IDENTITIES]
    if bad:
        raise ConfigError(f"unknown identity {bad[0]!r}; choose from {', '.join(IDENTITIES)}")
    plan = build_plan(cfg)
    reports = []
    for ident in ids:
        spec = IdentitySpec(ident, tuple(_points(cfg, ident)), plan, cfg["tol"])
        rep = check_identity(spec, workers=cfg["workers"])
        rep.config = _report_config(cfg, plan)
        reports.append(rep)
        _write(cfg["out"], f"{ident}.json", _dump(rep.to_json()))
        _write(cfg["out"], f"{ident}.csv", rep.to_csv())
    _summary(reports)
    return _exit_code(reports)


def cmd_expand(cfg: dict) -> int:
    if not cfg["left"] or not cfg["right"]:
        raise ConfigError("expand needs --left and --right")
    try:
        e = expand_shuffle(cfg["left"], cfg["right"])
    except MzfError as exc:
        raise ConfigError(f"{type(exc).__name__}: {exc}") from None
    print(e.render(cfg["layout"]))
    _write(cfg["out"], "expansion.json", e.dumps() + "\n")
    report = {"config": {k: v for k, v in cfg.items() if k not in ("workers", "out")}, "terms": len(e.terms)}
    code = EXIT_OK
    if cfg["integer"]:
        b = parse_bindings(cfg["integer"])
        fin = integer_specialize(e, b)
        table = finite_identity(fin)
        print()
        print(fin.render())
        print()
        lhs = " ".join(f"zeta({b[str(x)] if str(x) in b else x})" for x in e.left + e.right)
        rhs = " + ".join(f"{c}*zeta_{len(k)}({','.join(map(str, k))})" for k, c in sorted(table.items()))
        print(f"{lhs} = {rhs}")
        report["integer"] = {"bindings": b, "identity": [[list(k), c] for k, c in sorted(table.items())]}
    if cfg["realize"]:
        b = {k: complex(v) for k, v in parse_bindings(cfg["realize"]).items()}
        plan = build_plan(cfg)
        st = RealizeStats()
        try:
            val, err = realize(e, b, plan, st)
            left = mzf_eval([complex(x.evaluate(b)) for x in e.left])
            right = mzf_eval([complex(x.evaluate(b)) for x in e.right])
        except MzfError as exc:
            print(f"evaluation error: {type(exc).__name__}: {exc}", file=sys.stderr)
            report["realize"] = {"error": f"{type(exc).__name__}: {exc}"}
            _write(cfg["out"], "expand.json", _dump({"payload": report, "runtime": {}}))
            return EXIT_EVAL
        prod = left[0] * right[0]
        res = abs(val - prod)
        tol = _tol(cfg, "shuffle-general")
        print()
        print(f"realized   = {val:.15g}")
        print(f"product    = {prod:.15g}")
        print(f"residual   = {res:.3e}  (err_est {err:.3e}, {st.wall:.1f}s)")
        report["realize"] = {"plan": plan.to_json(), "value": [val.real, val.imag], "product": [prod.real, prod.imag], "residual": res, "err_est": err}
        code = EXIT_OK if res <= max(tol, 3 * err) else EXIT_FAIL
    _write(cfg["out"], "expand.json", _dump({"payload": report, "runtime": {"wall": st.wall if cfg["realize"] else 0.0}}))
    return code


def cmd_plot_data(cfg: dict) -> int:
    """Residual against truncation K for one identity at one point."""
    ident = cfg["id"]
    if ident not in IDENTITIES:
        raise ConfigError(f"plot-data needs one --id from {', '.join(IDENTITIES)}")
    pts = _points(cfg, ident)[:1]
    base = build_plan(cfg)
    try:
        ks = [int(k) for k in str(cfg["cutoffs"]).split(",")]
    except ValueError:
        raise ConfigError(f"bad --cutoffs {cfg['cutoffs']!r}") from None
    tol = _tol(cfg, ident)
    rows = []
    for K in ks:
        try:
            plan = replace(base, cutoff=K, max_cutoff=K if cfg["tail"] == "none" else max(K, base.max_cutoff))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        rows.append((K, _check_task((ident, pts[0], plan, tol))))
    lines = ["K,residual,err_est,lhs_re,lhs_im,rhs_re,rhs_im,passed,error"]
    for K, r in rows:
        l = complex("nan") if r.lhs is None else complex(r.lhs)
        h = complex("nan") if r.rhs is None else complex(r.rhs)
        lines.append(f"{K},{r.residual!r},{r.err_est!r},{l.real!r},{l.imag!r},{h.real!r},{h.imag!r},{r.passed},{r.error or ''}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    _write(cfg["out"], f"{ident}-convergence.csv", text)
    if any(r.error for _, r in rows):
        return EXIT_EVAL
    return EXIT_OK


def selftest_tasks(seed: int) -> list[tuple[str, dict]]:
    """Fast property suite: every identity at seed-derived points."""
    rng = random.Random(seed)

    def cplx(lo, hi, im=1.0):
        return f"{round(rng.uniform(lo, hi), 4)}{round(rng.uniform(-im, im), 4):+}j"

    tasks = []
    for a in range(1, 9):
        for b in range(1, 9):
            x = f"{rng.randint(1, 99)}/{rng.randint(1, 40)}"
            y = f"{rng.randint(1, 99)}/{rng.randint(1, 40)}"
            tasks.append(("pfd-classical", {"a": a, "b": b, "x": x, "y": y}))
    for _ in range(10):
        tasks.append(("binomial-inversion", {"seed": rng.randrange(2**31), "lmax": 8}))
    for _ in range(10):
        tasks.append(("connection-formula", {"s": cplx(0.5, 3), "t": cplx(0.5, 3), "x": rng.randint(1, 9), "y": rng.randint(1, 9)}))
    for _ in range(5):
        tasks.append(("ipfd-pointwise", {"s": cplx(1.1, 3), "t": cplx(1.1, 3), "x": rng.randint(1, 5), "y": rng.randint(1, 5)}))
    for p, q in ((1, 1), (2, 1), (1, 2), (2, 2)):
        left = [cplx(1.2, 3.0) for _ in range(p)]
        right = [cplx(1.2, 3.0) for _ in range(q)]
        tasks.append(("stuffle-general", {"left": left, "right": right}))
    for s, t in ((2, 2), (2, 3), (3, 4)):
        tasks.append(("shuffle-double", {"s": s, "t": t}))
        tasks.append(("double-shuffle-double", {"s": s, "t": t}))
    tasks.append(("shuffle-double", {"s": cplx(2, 3, 0.5), "t": cplx(2, 3, 0.5)}))
    tasks.append(("sum-formula", {"s": cplx(2.5, 3.5, 0.5)}))
    tasks.append(("kmt-21", {"s": cplx(1.5, 2.5, 0.5), "b": 2, "c": 2}))
    tasks.append(("kmt-31", {"s1": 1.5, "s2": 2.5, "c": 2, "d": 2}))
    return tasks


def cmd_selftest(cfg: dict) -> int:
    plan = build_plan(cfg)
    tasks = selftest_tasks(cfg["seed"])
    jobs = [(ident, pt, plan, _tol(cfg, ident)) for ident, pt in tasks]
    results = ordered_map(_check_task, jobs, cfg["workers"])
    reports: dict[str, VerificationReport] = {}
    for (ident, _), r in zip(tasks, results):
        reports.setdefault(ident, VerificationReport(ident, _tol(cfg, ident), [])).results.append(r)
    reports_list = list(reports.values())
    payload = {"seed": cfg["seed"], "config": _report_config(cfg, plan), "reports": [r.payload() for r in reports_list]}
    runtime = {"workers": cfg["workers"], "wall": sum(r.wall for r in results)}
    _summary(reports_list)
    _write(cfg["out"], "selftest.json", _dump({"payload": payload, "runtime": runtime}))
    _write(cfg["out"], "selftest-payload.json", _dump(payload))
    return _exit_code(reports_list)


COMMANDS = {"verify": cmd_verify, "expand": cmd_expand, "plot-data": cmd_plot_data, "selftest": cmd_selftest}


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mzfshuffle", description="Shuffle and stuffle relations for multiple zeta functions.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="flat key = value file; flags override it")
        p.add_argument("--tol", help="override the identity tolerance")
        p.add_argument("--cutoff", help="outer truncation K")
        p.add_argument("--inner-cutoffs", dest="inner_cutoffs", help="inner truncations, e.g. 64:64")
        p.add_argument("--tail", choices=("fit", "none"), help="tail treatment beyond the cutoff")
        p.add_argument("--direct-above", dest="direct_above", help="index value beyond which split parents are evaluated directly")
        p.add_argument("--max-cutoff", dest="max_cutoff")
        p.add_argument("--tail-tol", dest="tail_tol", help="relative tail-fit error that triggers a longer cutoff")
        p.add_argument("--conv-cutoff", dest="conv_cutoff", help="lattice size for two-chain sums")
        p.add_argument("--workers", help="worker processes (>= 1)")
        p.add_argument("--seed", help="seed for randomly generated points")
        p.add_argument("--out", help="output directory")

    def point_flags(p):
        p.add_argument("--id", help="identity id")
        p.add_argument("--points", help="JSON point file (default: shipped catalog)")
        p.add_argument("--at", help="inline point, e.g. s=1.5+0.5j,t=2.25")
        for name in _SHORTCUTS:
            p.add_argument(f"--{name}", help=argparse.SUPPRESS)

    p = sub.add_parser("verify", help="check identities at catalog or inline points")
    point_flags(p)
    common(p)
    p = sub.add_parser("expand", help="symbolic shuffle expansion")
    p.add_argument("--left", required=False)
    p.add_argument("--right", required=False)
    p.add_argument("--integer", help="integer bindings, e.g. a=2,b=3")
    p.add_argument("--realize", help="numeric bindings, e.g. s=2.5,t=3.5")
    p.add_argument("--layout", choices=("matrix", "zeta"), help="show each term's root-zeta matrix (default) or only its zeta line")
    common(p)
    p = sub.add_parser("plot-data", help="residual against truncation (CSV)")
    point_flags(p)
    p.add_argument("--cutoffs", help="comma separated K values")
    common(p)
    p = sub.add_parser("selftest", help="fast property suite over all identities")
    common(p)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        if ns.command is None:
            raise ConfigError("missing command: verify, expand, plot-data or selftest")
        cfg = effective_config(ns)
        return COMMANDS[ns.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
