"""Command-line front end.

Exit codes: 0 on success, 1 when a verification check fails, 2 for usage or
input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .cycles import Option, build_F, solve_coefficients, verify_main_theorem
from .diagram import (
    InvalidParams,
    NotCoprime,
    SlopeParams,
    iter_sweep,
    special_indices,
    z_count,
    z_window,
    zigzag,
)
from .knotfloer import BUILTIN_KNOTS, KnotError, builtin_knot, load_knot, specialize
from .homalg import HomologyError, homology
from .localsys import fraction_str, grading_exponents, uc_sequences
from .useries import DEFAULT_TRUNC, SeriesError

MIN_TRUNC = 16
JOBS_ENV = "SURGERY_TRIANGLE_JOBS"


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    p: int | None = None
    q: int | None = None
    k: int = 0
    trunc: int = DEFAULT_TRUNC
    option: str = Option.UNIT_U.value
    sweep: int | None = None
    out: str | None = None
    fmt: str = "json"
    jobs: int = 1
    knot: str | None = None
    file: str | None = None
    timing: bool = False

    def params(self) -> SlopeParams:
        if self.p is None or self.q is None:
            raise UsageError("--p and --q are required")
        return SlopeParams(self.p, self.q, self.k)


def _dump(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def cmd_zdata(cfg: RunConfig) -> tuple[int, dict, str]:
    P = cfg.params()
    rng = z_window(P.p, P.q, cfg.trunc)
    u, c = uc_sequences(P)
    doc = {
        "p": P.p,
        "q": P.q,
        "k": P.k,
        "s": list(P.s),
        "u": list(u),
        "c": list(c),
        "grading_exponents": [fraction_str(x) for x in grading_exponents(P)],
        "special": sorted(special_indices(P)),
        "zigzag": zigzag(P).to_json(),
        "z": [[n, z_count(P.p, P.q, n)] for n in rng],
    }
    zeros = [n for n, z in doc["z"] if z == 0]
    text = (f"p={P.p} q={P.q} k={P.k} s={list(P.s)}\n"
            f"special={doc['special']}\n"
            f"z=0 on {zeros[0]}..{zeros[-1]}\n"
            + " ".join(f"{n}:{z}" for n, z in doc["z"]) + "\n")
    return 0, doc, text


def _verify_one(args: tuple[int, int, int, int, str, bool]):
    p, q, k, trunc, option, series = args
    rep = verify_main_theorem(SlopeParams(p, q, k), trunc, option)
    return rep.to_json(include_series=series), rep.seconds


def _jobs(cfg: RunConfig) -> int:
    return max(1, cfg.jobs)


def _run_sweep(cfg: RunConfig, bound: int) -> tuple[int, dict, str]:
    items = [(P.p, P.q, P.k, cfg.trunc, cfg.option, False) for P in iter_sweep(bound)]
    if _jobs(cfg) > 1:
        with ProcessPoolExecutor(max_workers=_jobs(cfg)) as pool:
            results = list(pool.map(_verify_one, items, chunksize=8))
    else:
        results = [_verify_one(it) for it in items]
    reports = []
    total = 0.0
    for doc, secs in results:
        if cfg.timing:
            doc["seconds"] = round(secs, 6)
        total += secs
        reports.append(doc)
    failures = [r for r in reports if not r["passed"]]
    doc = {
        "sweep": bound,
        "trunc": cfg.trunc,
        "option": cfg.option,
        "cases": len(reports),
        "failures": len(failures),
        "passed": not failures,
        "reports": reports,
    }
    if cfg.timing:
        doc["seconds"] = round(total, 3)
    lines = [f"sweep p+q<={bound}: {len(reports)} cases, {len(failures)} failures"]
    for r in failures:
        lines.append(f"  FAIL ({r['p']},{r['q']},{r['k']}): {', '.join(r['failed'])}")
    return (0 if not failures else 1), doc, "\n".join(lines) + "\n"


def cmd_verify(cfg: RunConfig) -> tuple[int, dict, str]:
    if cfg.sweep is not None:
        return _run_sweep(cfg, cfg.sweep)
    P = cfg.params()
    rep = verify_main_theorem(P, cfg.trunc, cfg.option)
    doc = rep.to_json(include_series=True, include_timing=cfg.timing)
    status = "PASS" if rep.passed else "FAIL " + ", ".join(rep.failed)
    text = (f"({P.p},{P.q},{P.k}) N={cfg.trunc} option={cfg.option}: {status}\n"
            f"  verified_order={rep.verified_order} mu2 valuations={rep.mu2_valuation}\n"
            f"  rankA={rep.rank_a} rankB={rep.rank_b} F(A)<=B={rep.f_a_in_b}\n")
    if rep.coefficients is not None:
        text += "  v = " + ", ".join(str(x) for x in rep.coefficients.v) + "\n"
        text += "  t = " + ", ".join(str(x) for x in rep.coefficients.t) + "\n"
    return (0 if rep.passed else 1), doc, text


def cmd_sweep(cfg: RunConfig) -> tuple[int, dict, str]:
    if cfg.sweep is None:
        raise UsageError("sweep needs --bound")
    return _run_sweep(cfg, cfg.sweep)


def cmd_kernel(cfg: RunConfig) -> tuple[int, dict, str]:
    P = cfg.params()
    tm = build_F(P.p, P.q, cfg.trunc)
    co = solve_coefficients(P.p, P.q, cfg.trunc, cfg.option)
    doc = {
        "p": P.p,
        "q": P.q,
        "trunc": cfg.trunc,
        "rows": [list(x) for x in tm.row_labels],
        "F": tm.F.to_json(),
        "v": [x.to_json() for x in co.v],
        "t": [x.to_json() for x in co.t],
    }
    lines = [f"F for (p,q)=({P.p},{P.q}), N={cfg.trunc}"]
    for lab, r in zip(tm.row_labels, range(tm.F.rows)):
        lines.append(f"  f{lab}: " + " | ".join(str(tm.F.entry(r, c)) for c in range(tm.F.cols)))
    lines.append("v = " + ", ".join(str(x) for x in co.v))
    lines.append("t = " + ", ".join(str(x) for x in co.t))
    return 0, doc, "\n".join(lines) + "\n"


def cmd_hfk(cfg: RunConfig) -> tuple[int, dict, str]:
    if cfg.knot is None and cfg.file is None:
        raise UsageError("hfk needs --knot or --file")
    if cfg.file is not None:
        if not os.path.exists(cfg.file):
            raise UsageError(f"no such file: {cfg.file}")
        K = load_knot(cfg.file)
        name = cfg.file
    else:
        K = builtin_knot(cfg.knot)
        name = cfg.knot
    P = cfg.params()
    S = specialize(K, P, cfg.trunc)
    H = homology(S.complex)
    doc = {
        "knot": name,
        "p": P.p,
        "q": P.q,
        "k": P.k,
        "trunc": cfg.trunc,
        "non_canonical": S.non_canonical,
        "homology": H.to_json(),
    }
    text = (f"HFK {name} at ({P.p},{P.q},{P.k}): free rank {H.free_rank}\n"
            f"  free gradings: {', '.join(fraction_str(x) for x in H.free)}\n")
    for a, g in H.torsion:
        text += f"  torsion F[U]/U^{a} at {fraction_str(g)}\n"
    if S.non_canonical:
        text += "  note: gcd(p,k) > 1, gradings are non-canonical\n"
    return 0, doc, text


COMMANDS = {
    "zdata": cmd_zdata,
    "verify": cmd_verify,
    "kernel": cmd_kernel,
    "hfk": cmd_hfk,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="surgery-triangle",
        description="Local triangle data, kernel coefficients and modified knot Floer homology "
                    "for rational surgery slopes p/q.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(sp):
        sp.add_argument("--p", type=int, required=False)
        sp.add_argument("--q", type=int, required=False)
        sp.add_argument("--k", type=int, default=0)
        sp.add_argument("--trunc", type=int, default=DEFAULT_TRUNC, help="truncation order N (>= 16)")
        sp.add_argument("--format", dest="fmt", choices=["json", "text"], default="json")
        sp.add_argument("--json", dest="fmt", action="store_const", const="json")
        sp.add_argument("--out", help="write the report here instead of stdout")

    sp = sub.add_parser("zdata", help="s-sequence, special triangles, zig-zag and z-table")
    common(sp)
    sp = sub.add_parser("verify", help="check the local cycle conditions")
    common(sp)
    sp.add_argument("--option", choices=[o.value for o in Option], default=Option.UNIT_U.value)
    sp.add_argument("--sweep", type=int, help="verify every coprime (p,q) with p+q <= SWEEP, all k")
    sp.add_argument("--jobs", type=int, default=None)
    sp.add_argument("--timing", action="store_true", help="include wall-clock timings")
    sp = sub.add_parser("sweep", help="verify a whole range of slopes")
    common(sp)
    sp.add_argument("--bound", "--sweep", dest="sweep", type=int, required=True)
    sp.add_argument("--option", choices=[o.value for o in Option], default=Option.UNIT_U.value)
    sp.add_argument("--jobs", type=int, default=None)
    sp.add_argument("--timing", action="store_true")
    sp = sub.add_parser("kernel", help="the matrix F and its kernel vectors")
    common(sp)
    sp.add_argument("--option", choices=[o.value for o in Option], default=Option.UNIT_U.value)
    sp = sub.add_parser("hfk", help="modified knot Floer homology of a small knot complex")
    common(sp)
    sp.add_argument("--knot", choices=BUILTIN_KNOTS)
    sp.add_argument("--file", help="knot complex in JSON")
    return parser


def _config(ns: argparse.Namespace) -> RunConfig:
    jobs = getattr(ns, "jobs", None)
    if jobs is None:
        env = os.environ.get(JOBS_ENV)
        try:
            jobs = int(env) if env else 1
        except ValueError as exc:
            raise UsageError(f"{JOBS_ENV} must be an integer") from exc
    if ns.trunc < MIN_TRUNC:
        raise UsageError(f"--trunc must be at least {MIN_TRUNC}")
    return RunConfig(
        subcommand=ns.subcommand,
        p=ns.p,
        q=ns.q,
        k=ns.k,
        trunc=ns.trunc,
        option=getattr(ns, "option", Option.UNIT_U.value),
        sweep=getattr(ns, "sweep", None),
        out=ns.out,
        fmt=ns.fmt,
        jobs=jobs,
        knot=getattr(ns, "knot", None),
        file=getattr(ns, "file", None),
        timing=getattr(ns, "timing", False),
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = _config(ns)
        code, doc, text = COMMANDS[cfg.subcommand](cfg)
    except (UsageError, NotCoprime, InvalidParams, KnotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SeriesError, HomologyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    payload = _dump(doc) if cfg.fmt == "json" else text
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    return code


if __name__ == "__main__":
    sys.exit(main())
