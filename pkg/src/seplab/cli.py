"""Command-line entry point: ``seplab <command> [options]``.

Every command writes its data files plus ``manifest.json`` into ``--out``.
Exit codes: 0 success, 1 failed check or runtime error (JSON report on
stderr and in ``error.json``), 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import initdata, inner_rhp, pde, pii, waveform
from .ratpoly import ratfun_format


def _version() -> str:
    try:
        from importlib.metadata import version

        return version("artifact")
    except Exception:
        return "0"


@dataclass
class RunManifest:
    command: str
    params: dict
    version: str = field(default_factory=_version)
    files: list = field(default_factory=list)
    wallTime: float = 0.0

    def write(self, out: Path):
        self.files = sorted(set(self.files))
        (out / "manifest.json").write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")


class CheckFailed(AssertionError):
    def __init__(self, report):
        super().__init__("check failed")
        self.report = report


# --------------------------------------------------------------- helpers

def _parse_range(text: str) -> tuple[int, int]:
    a, sep, b = text.partition("..")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected a..b, got {text!r}")
    lo, hi = int(a), int(b)
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _parse_interval(text: str) -> tuple[float, float]:
    parts = [float(v) for v in text.replace("..", ",").split(",")]
    if len(parts) != 2 or not parts[0] < parts[1]:
        raise argparse.ArgumentTypeError(f"expected lo,hi with lo < hi, got {text!r}")
    return parts[0], parts[1]


def _parse_window(text: str) -> tuple[float, float, float, float]:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 4 or not (parts[0] < parts[1] and parts[2] <= parts[3]):
        raise argparse.ArgumentTypeError("window is x0,x1,t0,t1")
    return tuple(parts)


def _parse_number(text: str) -> float:
    return float(Fraction(text))


def _load_profile(source: str | None) -> initdata.Profile:
    if source is None:
        return initdata.profile_sech(3.0)
    path = Path(source)
    text = path.read_text() if path.exists() else source
    return initdata.profile_from_config(initdata.parse_profile_config(text))


def _constants(args) -> tuple[float, float, initdata.Profile]:
    """(nu, x_crit, profile) honouring a direct --nu override."""
    p = _load_profile(getattr(args, "profile", None))
    cc = initdata.crit_constants(p)
    nu = cc.nu if getattr(args, "nu", None) is None else args.nu
    return nu, cc.xCrit, p


def _fmt(v) -> str:
    if isinstance(v, np.floating):
        v = float(v)
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, np.ndarray):
        if np.iscomplexobj(o):
            return {"re": o.real.tolist(), "im": o.imag.tolist()}
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"cannot serialize {type(o)}")


def _pmap(fn, items, threads: int):
    """Ordered map; threads only change speed, never the result."""
    if threads <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# --------------------------------------------------------------- commands

def cmd_hierarchy(args, out: Path, man: RunManifest):
    lo, hi = args.m_range
    entries = []
    for m in range(lo, hi + 1):
        e = pii.hierarchy(m)
        obj = e.to_json()
        obj["Utext"] = ratfun_format(e.U)
        obj["Vtext"] = ratfun_format(e.V)
        obj["Htext"] = ratfun_format(e.H)
        obj["roots"] = e.floats()
        entries.append(obj)
    _write_json(out / "hierarchy.json", entries)
    man.files.append("hierarchy.json")


def cmd_identities(args, out: Path, man: RunManifest):
    p = _load_profile(args.profile)
    report = {"hierarchy": [], "profile": p.params}
    ok = True
    for m in range(-args.m_max, args.m_max + 1):
        res = pii.pii_residuals(m)
        zero = all(r.is_const() and r.const_value() == 0 for r in res)
        lam = pii.lambda_check(m)
        lam_ok = lam == Fraction(1, 6) - Fraction(m, 3)
        ok &= zero and lam_ok
        report["hierarchy"].append({"m": m, "residualsZero": zero, "lambda": str(lam), "lambdaOk": lam_ok})
    rep = initdata.identity_checks(p, raise_on_fail=False)
    id_ok = rep.i2Error <= 1e-6 and rep.nuError <= 1e-9
    v = 0.5 * (2 - p.G0)
    phi_gap = abs(initdata.phi_eval(p, v, "direct") - initdata.phi_eval(p, v, "scriptG"))
    id_ok &= phi_gap <= 1e-6
    report["criticality"] = dict(asdict(rep), phiRouteGap=phi_gap, ok=id_ok)
    bs = []
    for N in args.bs_n:
        vs = initdata.bohr_sommerfeld(p, N)
        eps = initdata.epsilon_N(p, N)
        err = max(abs(initdata.psi_eval(p, x) - math.pi * eps * (k + 0.5)) for k, x in enumerate(vs))
        good = len(vs) == N and all(a > b for a, b in zip(vs, vs[1:])) and err <= 1e-8
        id_ok &= good
        bs.append({"N": N, "roots": vs, "maxError": err, "ok": good})
    report["bohrSommerfeld"] = bs
    report["ok"] = bool(ok and id_ok)
    _write_json(out / "identities.json", report)
    man.files.append("identities.json")
    if not report["ok"]:
        raise CheckFailed(report)


def cmd_inner(args, out: Path, man: RunManifest):
    sol = inner_rhp.inner_solution(args.m, args.y)
    ex = inner_rhp.extract_coeffs(sol)
    e = pii.hierarchy(args.m)
    B12, B21 = pii.b_entries(args.m)
    rep = {
        "m": args.m,
        "y": args.y,
        "A": ex.A, "B": ex.B, "C": ex.C,
        "fitResidual": ex.fitResidual,
        "imagLeak": ex.imagLeak,
        "expected": {
            "A11": float(-2 * e.H(Fraction(args.y))),
            "A12": float(e.U(Fraction(args.y))),
            "A21": float(e.V(Fraction(args.y))),
            "B12": float(B12(Fraction(args.y))),
            "B21": float(B21(Fraction(args.y))),
        },
        "rayJumpSpread": [inner_rhp.ray_jump_check(sol, r) for r in range(6)],
    }
    if args.m == 0:
        rep["lax"] = [dict(h=h, **asdict(inner_rhp.lax_residual(args.y, complex(args.zeta), h)))
                      for h in (1e-3, 1e-4)]
    _write_json(out / "inner.json", rep)
    man.files.append("inner.json")


def cmd_regions(args, out: Path, man: RunManifest):
    rp = waveform.RegionParams(args.eps, args.delta, args.kappa, args.B)
    waveform.check_delta(rp)
    L = rp.L
    smax = (2 * (rp.B - 1) / 3 + 1 / 3) * args.eps * L
    ys = np.linspace(args.y_range[0], args.y_range[1], args.ny)
    ss = np.linspace(-smax, smax, args.ns)
    # warm the root cache before threads share it
    for m in range(-rp.B, rp.B + 1):
        for what in ("zerosU", "polesU", "zerosV", "polesV"):
            waveform._sing(None).get(m, what)

    def row(s):
        return [(y, s, lab.m, lab.sign) for y in ys for lab in waveform.region_classify(y, s, rp)]

    rows = [r for chunk in _pmap(row, list(ss), args.threads) for r in chunk]
    _write_csv(out / "regions.csv", ["y", "s", "m", "sign"], rows)
    _write_json(out / "regions.json", {"eps": args.eps, "delta": rp.delta, "kappa": rp.kappa, "B": rp.B,
                                       "profile": None})
    man.files += ["regions.csv", "regions.json"]


def cmd_kinkcurves(args, out: Path, man: RunManifest):
    nu, _, p = _constants(args)
    lo, hi = args.m_range
    rows = []
    for m in range(lo, hi + 1):
        for z, t in waveform.kink_center_curve(m, args.z_range, args.eps, nu, args.n):
            rows.append((m, z, t))
    _write_csv(out / "kinkcurves.csv", ["m", "z", "t"], rows)
    # strip edges t = (2m +- 1)/3 eps log(1/eps)
    L = math.log(1 / args.eps)
    edges = [(2 * m - 1) / 3 * args.eps * L for m in range(lo, hi + 2)]
    _write_json(out / "kinkcurves.json", {"eps": args.eps, "nu": nu, "stripEdges": edges,
                                          "profile": None if args.nu is not None else p.params})
    man.files += ["kinkcurves.csv", "kinkcurves.json"]


def cmd_model(args, out: Path, man: RunManifest):
    nu, xc, p = _constants(args)
    x0, x1, t0, t1 = args.window
    xs = np.linspace(x0, x1, args.nx)
    ts = np.linspace(t0, t1, args.nt)
    parts = _pmap(lambda t: waveform.multiscale_field(xs, [t], args.eps, nu, xc), list(ts), args.threads)
    rows = []
    for t, (C, S) in zip(ts, parts):
        rows += [(float(x), float(t), float(c), float(s)) for x, c, s in zip(xs, C[0], S[0])]
    _write_csv(out / "model.csv", ["x", "t", "cosHalf", "sinHalf"], rows)
    _write_json(out / "model.json", {"eps": args.eps, "nu": nu, "xCrit": xc, "profile": p.params})
    man.files += ["model.csv", "model.json"]


def cmd_pde(args, out: Path, man: RunManifest):
    p = _load_profile(args.profile)
    cfg = pde.SolverConfig(args.eps, args.t_end, args.L, args.nx, args.cfl, args.output_every)
    energy = []
    for k, fr in enumerate(pde.pde_solve(p, cfg)):
        name = f"frame_{k:05d}.bin"
        fr.dump(out / name)
        man.files.append(name)
        energy.append((fr.t, pde.pde_energy(fr)))
    _write_csv(out / "energy.csv", ["t", "energy"], energy)
    e0 = energy[0][1]
    drift = max(abs(e - e0) for _, e in energy) / e0
    _write_json(out / "pde.json", {"config": asdict(cfg), "dx": cfg.dx, "dt": cfg.dt,
                                   "energyDrift": drift, "profile": p.params})
    man.files += ["energy.csv", "pde.json"]


def compare_ladder(p, ladder, K=1.0, strips=1, nu=None):
    cc = initdata.crit_constants(p)
    nu = cc.nu if nu is None else nu
    rows = []
    for eps in ladder:
        tmax = strips / 3 * eps * math.log(1 / eps)
        win = pde.critical_window(eps, nu, cc.xCrit, K, tmax)
        frames = pde.pde_solve(p, pde.SolverConfig(eps, tmax * (1 + 1e-9)))

        def model(x, t, eps=eps):
            C, S = waveform.multiscale_field(x, [t], eps, nu, cc.xCrit)
            return C[0], S[0]

        sup, l2 = pde.model_compare(frames, model, win)
        first = pde.pde_solve(p, pde.SolverConfig(eps, tmax))
        sup0, _ = pde.model_compare([next(iter(first))], model, pde.Window(win.x0, win.x1, 0.0, 0.0))
        rows.append({"eps": eps, "supError": sup, "l2Error": l2, "t0Error": sup0})
    slope = float(np.polyfit(np.log([r["eps"] for r in rows]), np.log([r["supError"] for r in rows]), 1)[0]) \
        if len(rows) > 1 else math.nan
    return rows, slope


def cmd_compare(args, out: Path, man: RunManifest):
    p = _load_profile(args.profile)
    rows, slope = compare_ladder(p, args.eps_ladder, args.K, args.strips, args.nu)
    _write_csv(out / "compare.csv", ["eps", "supError", "l2Error", "t0Error"],
               [(r["eps"], r["supError"], r["l2Error"], r["t0Error"]) for r in rows])
    _write_json(out / "compare.json", {"rows": rows, "slope": slope, "profile": p.params})
    man.files += ["compare.csv", "compare.json"]


# --------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="seplab", description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=None, help="output directory (default out/<command>)")
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("hierarchy", help="export exact entries and root boxes")
    s.add_argument("--m-range", type=_parse_range, default=(-6, 7))
    s.set_defaults(func=cmd_hierarchy)

    s = sub.add_parser("identities", help="run the exact and quadrature identity suites")
    s.add_argument("--profile", default=None, help="config file or inline 'type: sech, amplitude: 3'")
    s.add_argument("--m-max", type=int, default=8)
    s.add_argument("--bs-n", type=int, nargs="*", default=[4, 8, 16])
    s.set_defaults(func=cmd_identities)

    s = sub.add_parser("inner", help="inner model problem at one (m, y)")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--y", type=float, required=True)
    s.add_argument("--zeta", type=complex, default=complex(0.7, 0.4))
    s.set_defaults(func=cmd_inner)

    s = sub.add_parser("regions", help="region tiling map")
    s.add_argument("--eps", type=_parse_number, required=True)
    s.add_argument("--delta", type=float, default=0.2)
    s.add_argument("--kappa", type=float, default=0.0)
    s.add_argument("--B", type=int, default=4)
    s.add_argument("--y-range", type=_parse_interval, default=(-6.0, 6.0))
    s.add_argument("--ny", type=int, default=241)
    s.add_argument("--ns", type=int, default=241)
    s.set_defaults(func=cmd_regions)

    s = sub.add_parser("kinkcurves", help="centers T_K = 0 of the kinks")
    s.add_argument("--eps", type=_parse_number, required=True)
    s.add_argument("--nu", type=_parse_number, default=None, help="override nu (e.g. 1/64 for 4 nu^(1/3) = 1)")
    s.add_argument("--profile", default=None)
    s.add_argument("--m-range", type=_parse_range, default=(-3, 3))
    s.add_argument("--z-range", type=_parse_interval, default=(-10.0, 10.0))
    s.add_argument("--n", type=int, default=801)
    s.set_defaults(func=cmd_kinkcurves)

    s = sub.add_parser("model", help="multiscale model on an (x, t) grid")
    s.add_argument("--eps", type=_parse_number, required=True)
    s.add_argument("--window", type=_parse_window, required=True, help="x0,x1,t0,t1")
    s.add_argument("--nu", type=_parse_number, default=None)
    s.add_argument("--profile", default=None)
    s.add_argument("--nx", type=int, default=201)
    s.add_argument("--nt", type=int, default=201)
    s.set_defaults(func=cmd_model)

    s = sub.add_parser("pde", help="direct sine-Gordon solve, frames as binary dumps")
    s.add_argument("--eps", type=_parse_number, required=True)
    s.add_argument("--profile", default=None)
    s.add_argument("--t-end", type=float, default=2.0)
    s.add_argument("--L", type=float, default=6.0)
    s.add_argument("--nx", type=int, default=None)
    s.add_argument("--cfl", type=float, default=0.5)
    s.add_argument("--output-every", type=int, default=20)
    s.set_defaults(func=cmd_pde)

    s = sub.add_parser("compare", help="PDE versus model convergence table")
    s.add_argument("--eps-ladder", type=lambda t: [_parse_number(v) for v in t.split(",")],
                   default=[3 / 16, 3 / 32, 3 / 64])
    s.add_argument("--profile", default=None)
    s.add_argument("--nu", type=_parse_number, default=None)
    s.add_argument("--K", type=float, default=1.0)
    s.add_argument("--strips", type=int, default=1, help="t-window in units of eps log(1/eps)/3")
    s.set_defaults(func=cmd_compare)
    return ap


def _params(args) -> dict:
    d = {k: v for k, v in vars(args).items() if k not in ("func", "threads")}
    return json.loads(json.dumps(d, default=str))


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    out = Path(args.out or os.path.join("out", args.command))
    out.mkdir(parents=True, exist_ok=True)
    man = RunManifest(args.command, _params(args))
    t0 = time.perf_counter()
    try:
        args.func(args, out, man)
    except CheckFailed as e:
        return _fail(out, man, {"error": "CheckFailed", "report": e.report}, t0)
    except Exception as e:  # surfaced as a JSON report, exit 1
        return _fail(out, man, {"error": type(e).__name__, "message": str(e)}, t0)
    man.wallTime = time.perf_counter() - t0
    man.write(out)
    return 0


def _fail(out: Path, man: RunManifest, report: dict, t0: float) -> int:
    text = json.dumps(report, indent=2, sort_keys=True, default=_json_default)
    print(text, file=sys.stderr)
    (out / "error.json").write_text(text + "\n")
    man.files.append("error.json")
    man.wallTime = time.perf_counter() - t0
    man.write(out)
    return 1


if __name__ == "__main__":
    sys.exit(main())
