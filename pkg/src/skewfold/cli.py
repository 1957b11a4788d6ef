"""Command line front end.

Exit codes: 0 success, 2 a precondition or hypothesis failed, 3 an
iteration did not converge, 4 the map file could not be parsed.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import __version__
from ._validation import check_eps, check_plan_index, check_positive_int, check_tol, resolve_seed
from .bottcher import phi_extended, phi_lift
from .classify import WeightPlan, analyze, select_plan
from .exceptions import ConvergenceError, HypothesisError, InvalidMapError, ParseError
from .infinity import (
    VFamily,
    afo_agreement,
    afo_region,
    basin_labels,
    classify_infinity,
    classify_weighted,
    critical_precondition,
    empirical_basin,
    preimage_region,
)
from .newton import newton_polygon
from .poly import LogPoint, SkewProduct, parse_map
from .region import RegionSpec, estimate_R, region_for_plan, sample_region, verify_bounds, verify_contraction, verify_invariance
from .report import dumps, rows_to_csv, validate
from .transforms import MonomialSubstitution, intermediate_case_check, lemma_checks, pushforward, verify_normal_form

EXIT_OK, EXIT_HYPOTHESIS, EXIT_CONVERGENCE, EXIT_PARSE = 0, 2, 3, 4

BOTTCHER_COLUMNS = [
    "z_re", "z_im", "w_re", "w_im",
    "phi1_re", "phi1_im", "phi2_re", "phi2_im",
    "residual", "n_used", "tail_bound",
]  # fmt: skip


@dataclass(frozen=True)
class RunConfig:
    eps: float = 0.01
    R: float | None = None
    tol: float = 1e-10
    max_iter: int = 200
    samples: int = 10_000
    seed: int = 0
    precision: str = "double"
    plan_index: int | None = None
    threads: int = 1

    def __post_init__(self):
        check_eps(self.eps)
        check_tol(self.tol)
        check_positive_int(self.max_iter, "max_iter")
        check_positive_int(self.samples, "samples")
        check_positive_int(self.threads, "threads")
        check_plan_index(self.plan_index)
        if self.precision not in ("double", "extended"):
            raise ValueError("precision must be 'double' or 'extended'")
        if self.R is not None and not self.R > 1:
            raise ValueError("R must exceed 1")

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        return cls(
            eps=args.eps,
            R=args.R,
            tol=args.tol,
            max_iter=args.max_iter,
            samples=args.samples if args.samples is not None else 10_000,
            seed=resolve_seed(args.seed),
            precision=args.precision,
            plan_index=args.plan_index,
            threads=args.threads,
        )


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def read_map(source: str) -> SkewProduct:
    """Parse a map from a file path, ``-`` for stdin, or inline text."""
    if source == "-":
        text = sys.stdin.read()
    elif os.path.exists(source):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    elif "=" in source:
        text = source
    else:
        raise FileNotFoundError(f"no such map file: {source}")
    return parse_map(text)


def _plan(f: SkewProduct, cfg: RunConfig) -> WeightPlan:
    return select_plan(analyze(f), cfg.plan_index)


def _region(f: SkewProduct, plan: WeightPlan, cfg: RunConfig) -> RegionSpec:
    if not plan.degree_ok:
        raise HypothesisError(f"degree condition fails: {plan.degree_condition}")
    if cfg.R is None:
        return estimate_R(f, plan, cfg.eps)
    return region_for_plan(plan, cfg.R, eps=cfg.eps, contraction=plan.d == 1)


def _map_dict(f: SkewProduct) -> dict:
    return {"p": str(f.p), "q": str(f.q), "delta": f.delta}


def _parallel(fn, chunks, threads: int):
    if threads <= 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, chunks))  # map keeps input order


def _chunks(n: int, threads: int):
    size = max(1, math.ceil(n / max(1, threads * 4)))
    return [slice(i, min(n, i + size)) for i in range(0, n, size)]


# ---------------------------------------------------------------------------
# commands; each returns (payload, exit_code)
# ---------------------------------------------------------------------------


def cmd_analyze(f: SkewProduct, cfg: RunConfig):
    plans = analyze(f)
    P = newton_polygon(f.q)
    return {
        "command": "analyze",
        "map": _map_dict(f),
        "polygon": P.to_dict(),
        "two_plans": len(plans) == 2,
        "plans": [p.to_dict() for p in plans],
    }, EXIT_OK


def cmd_verify(f: SkewProduct, cfg: RunConfig):
    plan = _plan(f, cfg)
    spec = _region(f, plan, cfg)
    bounds = verify_bounds(f, spec, cfg.eps, cfg.samples, cfg.seed)
    inv = verify_invariance(f, spec, cfg.samples, cfg.seed)
    contraction = None
    if plan.d == 1:
        contraction = verify_contraction(f, spec, n_samples=min(cfg.samples, 1000), seed=cfg.seed).to_dict()
    passed = bounds.passed and inv.passed and (contraction is None or contraction["passed"])
    payload = {
        "command": "verify",
        "map": _map_dict(f),
        "plan": plan.to_dict(),
        "region": spec.to_dict(),
        "bounds": bounds.to_dict(),
        "invariance": inv.to_dict(),
        "contraction": contraction,
        "passed": passed,
    }
    return payload, EXIT_OK if passed else EXIT_HYPOTHESIS


def _parse_complex(text: str) -> complex:
    return complex(text.replace(" ", "").replace("i", "j"))


def _read_points(args) -> list[tuple[complex, complex]]:
    pts = [(_parse_complex(z), _parse_complex(w)) for z, w in (args.point or [])]
    if args.points:
        with open(args.points, encoding="utf-8") as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                parts = [s for s in line.replace(",", " ").split() if s]
                if len(parts) != 2:
                    raise ValueError(f"expected two numbers per line, got {line!r}")
                pts.append((_parse_complex(parts[0]), _parse_complex(parts[1])))
    return pts


def _bottcher_rows(f, plan, spec, cfg, Z, W, given=None):
    def run(sl):
        P1, P2, n, tail, res, ok = phi_lift(f, plan, spec, Z[sl], W[sl], cfg.tol, cfg.max_iter)
        if cfg.precision == "extended":
            ext = [phi_extended(f, plan, spec, LogPoint(z, w), n) for z, w in zip(Z[sl], W[sl])]
            P1 = np.array([e.Phi1 for e in ext])
            P2 = np.array([e.Phi2 for e in ext])
        return P1, P2, n, tail, res, ok

    parts = _parallel(run, _chunks(Z.size, cfg.threads), cfg.threads)
    rows = []
    converged = True
    k = 0
    for P1, P2, n, tail, res, ok in parts:
        converged &= bool(ok)
        for j in range(P1.size):
            z, w = given[k] if given is not None else (np.exp(Z[k]), np.exp(W[k]))
            with np.errstate(over="ignore"):
                v1, v2 = complex(np.exp(P1[j])), complex(np.exp(P2[j]))
            rows.append(
                {
                    "z_re": z.real, "z_im": z.imag, "w_re": w.real, "w_im": w.imag,
                    "phi1_re": v1.real, "phi1_im": v1.imag, "phi2_re": v2.real, "phi2_im": v2.imag,
                    "log_phi1": [P1[j].real, P1[j].imag], "log_phi2": [P2[j].real, P2[j].imag],
                    "residual": float(res[j]), "n_used": int(n), "tail_bound": float(tail),
                }
            )  # fmt: skip
            k += 1
    return rows, converged


def cmd_bottcher(f: SkewProduct, cfg: RunConfig, points=None, n_random: int = 10):
    plan = _plan(f, cfg)
    spec = _region(f, plan, cfg)
    skipped = []
    if points:
        keep, given = [], []
        for z, w in points:
            if z != 0 and w != 0 and spec.member(z, w):
                keep.append(LogPoint.from_point(z, w))
                given.append((z, w))
            else:
                skipped.append({"z": z, "w": w, "reason": "not in U"})
        Z = np.array([p.Z for p in keep], dtype=complex)
        W = np.array([p.W for p in keep], dtype=complex)
    else:
        given = None
        Z, W = sample_region(spec, n_random, cfg.seed, span=5.0)
    rows, converged = _bottcher_rows(f, plan, spec, cfg, Z, W, given) if Z.size else ([], True)
    ok = converged and all(r["residual"] < cfg.tol * 1e2 for r in rows)
    payload = {
        "command": "bottcher",
        "map": _map_dict(f),
        "plan": plan.to_dict(),
        "region": spec.to_dict(),
        "precision": cfg.precision,
        "rows": rows,
        "skipped": skipped,
        "converged": converged,
        "passed": ok,
    }
    return payload, EXIT_OK if ok else EXIT_CONVERGENCE


def _substitution(kind: str, a: str, b: str | None) -> MonomialSubstitution:
    if kind in ("blowup1", "blowup2"):
        return getattr(MonomialSubstitution, kind)(Fraction(a))
    if b is None:
        raise ValueError(f"{kind} needs two integers r and s")
    return getattr(MonomialSubstitution, kind)(int(a), int(b))


def cmd_transform(f: SkewProduct, cfg: RunConfig, stages: list[list[str]]):
    plan = _plan(f, cfg)
    results = []
    base = None
    for spec_args in stages:
        sub = _substitution(spec_args[0], spec_args[1], spec_args[2] if len(spec_args) > 2 else None)
        t = pushforward(f, plan, sub, base)
        entry = t.to_dict()
        entry["normal_form"] = verify_normal_form(t)
        entry["lemma_checks"] = lemma_checks(t)
        if t.stage == 1 and plan.case == 4:
            entry["intermediate_case3"] = intermediate_case_check(t)
        results.append(entry)
        base = t
    ok = all(r["well_defined"] for r in results)
    payload = {"command": "transform", "map": _map_dict(f), "plan": plan.to_dict(), "stages": results, "well_defined": ok}
    return payload, EXIT_OK if ok else EXIT_HYPOTHESIS


def cmd_infinity(f: SkewProduct, cfg: RunConfig, weighted=None, empirical: bool = False):
    plan = _plan(f, cfg)
    if weighted:
        rep = classify_weighted(f, plan, int(weighted[0]), int(weighted[1]))
    else:
        rep = classify_infinity(f, plan)
    payload = {"command": "infinity", "map": _map_dict(f), "plan": plan.to_dict(), "report": rep.to_dict(), "empirical": None}
    if empirical:
        r, s = (rep.r, rep.s) if weighted else (1, 1)
        spec = _region(f, plan, cfg)
        payload["empirical"] = empirical_basin(f, spec, r, s, n_samples=min(cfg.samples, 500), seed=cfg.seed)
    return payload, EXIT_OK


def cmd_afo(f: SkewProduct, cfg: RunConfig, n: int = 8, check: bool = False, critical=None):
    plan = _plan(f, cfg)
    region = afo_region(plan.delta, plan.d, plan.gamma, plan)
    payload = {
        "command": "afo",
        "map": _map_dict(f),
        "plan": plan.to_dict(),
        "afo": region.to_dict(),
        "preimages": [preimage_region(plan, m).to_dict() for m in range(n + 1)],
        "agreement": None,
        "critical": None,
    }
    code = EXIT_OK
    if check or critical:
        spec = _region(f, plan, cfg)
    if check and region.covered:
        payload["agreement"] = afo_agreement(plan, spec.R, n, cfg.samples, cfg.seed)
        if not payload["agreement"]["passed"]:
            code = EXIT_HYPOTHESIS
    if critical:
        fam, r1, r2, a1, a2 = critical
        V = VFamily(int(fam), float(r1), float(r2), float(a1), float(a2))
        rep = critical_precondition(f, plan, spec, V, n_samples=min(cfg.samples, 2000), seed=cfg.seed)
        payload["critical"] = rep
        if not rep["passed"]:
            code = EXIT_HYPOTHESIS
    return payload, code


def cmd_grid(f: SkewProduct, cfg: RunConfig, kind: str, box, nx: int, ny: int, r: int = 1, s: int = 1):
    """Grid over log-moduli ``(log|z|, log|w|)`` with zero arguments."""
    plan = _plan(f, cfg)
    x0, x1, y0, y1 = box
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    X, Y = X.ravel(), Y.ravel()
    if kind == "basin":
        def run(sl):
            return basin_labels(f, X[sl], Y[sl], r, s)

        labels = np.concatenate(_parallel(run, _chunks(X.size, cfg.threads), cfg.threads))
        names = {1: "A_plus", -1: "A_minus", 0: "undecided"}
        rows = [{"x": float(a), "y": float(b), "label": names[int(c)]} for a, b, c in zip(X, Y, labels)]
        return {"command": "grid", "kind": kind, "map": _map_dict(f), "columns": ["x", "y", "label"], "rows": rows}, EXIT_OK
    spec = _region(f, plan, cfg)
    inside = np.asarray(spec.member_log(X, Y), bool)
    Z, W = X[inside] + 0j, Y[inside] + 0j
    rows, converged = _bottcher_rows(f, plan, spec, cfg, Z, W) if Z.size else ([], True)
    ok = converged and all(row["residual"] < cfg.tol * 1e2 for row in rows)
    payload = {
        "command": "grid",
        "kind": kind,
        "map": _map_dict(f),
        "columns": BOTTCHER_COLUMNS,
        "rows": rows,
        "outside": int((~inside).sum()),
        "passed": ok,
    }
    return payload, EXIT_OK if ok else EXIT_CONVERGENCE


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("map", help="map file, '-' for stdin, or inline text such as 'p=z^2; q=w^2'")
    common.add_argument("--eps", type=float, default=0.01)
    common.add_argument("--R", type=float, default=None, help="radius override")
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--max-iter", type=int, default=200)
    common.add_argument("--samples", type=int, default=None)
    common.add_argument("--seed", type=int, default=None, help="defaults to $SKEWFOLD_SEED, then 0")
    common.add_argument("--precision", choices=["double", "extended"], default="double")
    common.add_argument("--plan-index", type=int, choices=[0, 1], default=None)
    common.add_argument("--threads", type=int, default=1)
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json", default="json")
    fmt.add_argument("--csv", dest="format", action="store_const", const="csv")
    common.add_argument("-o", "--output", default=None, help="write to this file instead of stdout")

    parser = argparse.ArgumentParser(prog="skewfold", description="Polynomial skew products near infinity.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("analyze", parents=[common], help="Newton polygon and case classification")
    sub.add_parser("verify", parents=[common], help="estimate R and check the remainder bounds and invariance")

    b = sub.add_parser("bottcher", parents=[common], help="evaluate the Böttcher coordinate")
    b.add_argument("--point", nargs=2, action="append", metavar=("Z", "W"))
    b.add_argument("--points", help="file with one 'z w' pair per line")
    b.add_argument("--random", type=int, default=10, help="number of random points of U when none are given")

    t = sub.add_parser("transform", parents=[common], help="blow-ups and branched coverings")
    t.add_argument(
        "--stage",
        nargs="+",
        action="append",
        required=True,
        metavar="ARG",
        help="KIND A [B]: blowup1 L | blowup2 L2 | cover1 R S | cover2 R S; repeat for a second stage",
    )

    i = sub.add_parser("infinity", parents=[common], help="extension to the projective plane")
    i.add_argument("--weighted", nargs=2, type=int, metavar=("R", "S"))
    i.add_argument("--empirical", action="store_true", help="add the sampled basin check")

    a = sub.add_parser("afo", parents=[common], help="union of preimages of U under the monomial model")
    a.add_argument("--n", type=int, default=8)
    a.add_argument("--check", action="store_true", help="compare closed form and finite unions on samples")
    a.add_argument("--critical", nargs=5, metavar=("FAMILY", "R1", "R2", "A1", "A2"), help="sample the critical-set precondition for a V family")

    g = sub.add_parser("grid", parents=[common], help="grid of Böttcher values or basin labels")
    g.add_argument("--kind", choices=["bottcher", "basin"], default="bottcher")
    g.add_argument("--box", nargs=4, type=float, metavar=("X0", "X1", "Y0", "Y1"), required=True, help="range of log|z| and log|w|")
    g.add_argument("--nx", type=int, default=20)
    g.add_argument("--ny", type=int, default=20)
    g.add_argument("--weights", nargs=2, type=int, default=(1, 1), metavar=("R", "S"))
    return parser


def run(argv=None) -> tuple[str, int]:
    """Run the command line; returns ``(output_text, exit_code)``."""
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_args(args)
        f = read_map(args.map)
        cmd = args.command
        if cmd == "analyze":
            payload, code = cmd_analyze(f, cfg)
        elif cmd == "verify":
            payload, code = cmd_verify(f, cfg)
        elif cmd == "bottcher":
            payload, code = cmd_bottcher(f, cfg, _read_points(args), args.random)
        elif cmd == "transform":
            payload, code = cmd_transform(f, cfg, args.stage)
        elif cmd == "infinity":
            payload, code = cmd_infinity(f, cfg, args.weighted, args.empirical)
        elif cmd == "afo":
            payload, code = cmd_afo(f, cfg, args.n, args.check, args.critical)
        else:
            payload, code = cmd_grid(f, cfg, args.kind, args.box, args.nx, args.ny, *args.weights)
    except ParseError as exc:
        return f"parse error: {exc}\n", EXIT_PARSE
    except ConvergenceError as exc:
        return f"no convergence: {exc}\n", EXIT_CONVERGENCE
    except (HypothesisError, InvalidMapError) as exc:
        return f"hypothesis not met: {exc}\n", EXIT_HYPOTHESIS
    except (ValueError, IndexError, FileNotFoundError) as exc:
        return f"error: {exc}\n", EXIT_HYPOTHESIS

    validate(payload["command"], payload)
    if args.format == "csv" and "rows" in payload:
        cols = payload.get("columns") or BOTTCHER_COLUMNS
        for item in payload.get("skipped", []):
            print(f"skipped ({item['z']}, {item['w']}): {item['reason']}", file=sys.stderr)
        return rows_to_csv(payload["rows"], cols), code
    return dumps(payload), code


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    text, code = run(argv)
    if code != EXIT_OK and not text.lstrip().startswith(("{", "z_re", "x,")):
        sys.stderr.write(text)
        return code
    out = build_parser().parse_args(argv).output
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
