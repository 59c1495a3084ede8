"""Command-line entry point: ``avoidant approximate | verify | demo-obstruction``.

Exit codes: 0 success, 1 pipeline or verification failure (a diagnostic JSON
is printed), 2 unusable input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

import numpy as np

from .compact import CompactSetSample, from_config
from .errors import AvoidantError, PipelineError
from .forbidden import ForbiddenSet, algebraic_numbers, explicit_set, gaussian_rationals
from .mergelyan import DEFAULT_MAX_DEGREE, FunctionEvaluator, function_from_config
from .obstruction import DEFAULT_A1, DEFAULT_A2, build_gamma, demo_obstruction
from .pipeline import SCHEMA, ApproximationProblem, run
from .poly import Polynomial, horner

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


def _dump(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _load_json(path: Path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return data


def _reach_box(f: FunctionEvaluator, K: CompactSetSample, eps: float) -> tuple[float, float, float, float]:
    r = float(np.max(np.abs(f.on(K)))) + 2 * eps
    return (-r, r, -r, r)


def forbidden_from_config(cfg: dict, f: FunctionEvaluator, K: CompactSetSample, eps: float) -> ForbiddenSet:
    kind = cfg.get("kind", "explicit")
    if kind == "explicit":
        return explicit_set([complex(*v) if isinstance(v, list) else complex(v) for v in cfg.get("values", [])])
    region = cfg.get("region", "reach")
    box = _reach_box(f, K, eps) if region == "reach" else tuple(float(x) for x in region)
    if len(box) != 4:
        raise ConfigError("region must be [x0, x1, y0, y1] or \"reach\"")
    if kind == "gaussian_rationals":
        return gaussian_rationals(int(cfg["max_denominator"]), box)
    if kind == "algebraic":
        return algebraic_numbers(int(cfg["max_degree"]), int(cfg["max_height"]), box)
    raise ConfigError(f"unknown forbidden-set kind {kind!r}")


def load_problem(cfg: dict, base_dir: Path, eps: float | None = None,
                 density: int = 1) -> ApproximationProblem:
    """Build the problem described by the ``problem`` section of a run config."""
    try:
        spec = cfg["problem"]
        set_cfg = dict(spec["set"])
        K = from_config(set_cfg)
        if density > 1:
            K = K.refine(density)
        f = function_from_config(spec["function"], base_dir)
        eps = float(spec["eps"]) if eps is None else eps
        if not eps > 0:
            raise ConfigError("eps must be positive")
        A = forbidden_from_config(spec.get("forbidden", {}), f, K, eps)
        return ApproximationProblem(f, K, A, eps, spec.get("mode", "theorem1_discs"))
    except (KeyError, TypeError, ValueError, AvoidantError) as exc:
        raise ConfigError(f"bad config: {exc!r}") from exc


def _fail(payload: dict, out: Path | None = None) -> int:
    text = _dump({"schema": SCHEMA, **payload})
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "error.json").write_text(text)
    sys.stdout.write(text)
    return EXIT_FAIL


def cmd_approximate(args: argparse.Namespace) -> int:
    cfg = _load_json(args.config)
    verification = cfg.get("verification", {})
    dense = args.dense_verify if args.dense_verify is not None else int(verification.get("dense_verify", 1))
    keep = args.keep_iterates or bool(verification.get("keep_iterates", False))
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    out = Path(args.out) if args.out else Path(cfg.get("output", {}).get("dir", "avoidant-out"))
    problem = load_problem(cfg, args.config.parent)
    try:
        p, report = run(problem, max_degree=int(cfg.get("max_degree", DEFAULT_MAX_DEGREE)),
                        dense_factor=dense, keep_iterates=keep)
    except PipelineError as exc:
        return _fail(exc.to_dict(), out)
    out.mkdir(parents=True, exist_ok=True)
    payload = report.to_json(keep_iterates=keep)
    payload["seed"] = seed
    (out / "report.json").write_text(_dump(payload))
    (out / "polynomial.json").write_text(_dump(polynomial_payload(p)))
    (out / "samples.csv").write_text(problem.K.to_csv())
    sys.stdout.write(_dump({"certified": report.certified, "final_sup_error": report.final_sup_error,
                            "final_min_margins": report.final_min_margins, "out": str(out)}))
    return EXIT_OK if report.certified else EXIT_FAIL


def polynomial_payload(p: Polynomial) -> dict:
    return {"schema": SCHEMA, "degree": p.degree, "coeffs": p.to_json()}


def load_polynomial(path: Path) -> Polynomial:
    try:
        data = json.loads(Path(path).read_text())
        coeffs = data["coeffs"] if isinstance(data, dict) else data
        return Polynomial.from_json(coeffs)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"cannot read polynomial from {path}: {exc}") from exc


def verify_polynomial(p: Polynomial, problem: ApproximationProblem) -> dict:
    """Measure ``sup |f - p|`` and the margins ``min |p - a|`` on the problem's samples."""
    K, f = problem.K, problem.f
    pv = horner(p.coeffs, K.all_points)
    err = float(np.max(np.abs(pv - f.on(K))))
    margins = [float(np.min(np.abs(pv - a))) for a in problem.A.values]
    passed = err < problem.eps and all(m > 0 for m in margins)
    return {"schema": SCHEMA, "samples": K.size, "eps": problem.eps, "sup_error": err,
            "min_margins": margins, "passed": passed}


def cmd_verify(args: argparse.Namespace) -> int:
    p = load_polynomial(args.polynomial)
    cfg = _load_json(args.config)
    problem = load_problem(cfg, args.config.parent, eps=args.eps, density=args.density)
    try:
        result = verify_polynomial(p, problem)
    except ValueError as exc:
        # sample tables cannot be evaluated on a refined mesh
        raise ConfigError(str(exc)) from exc
    result["density"] = args.density
    sys.stdout.write(_dump(result))
    return EXIT_OK if result["passed"] else EXIT_FAIL


def _complex_arg(text: str) -> complex:
    try:
        if "," in text:
            re, im = text.split(",")
            return complex(float(re), float(im))
        return complex(text.replace("i", "j").replace(" ", ""))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def cmd_demo_obstruction(args: argparse.Namespace) -> int:
    try:
        report = demo_obstruction(args.a1, args.a2, args.eps, args.fit_degree, use_exact=args.exact)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    except AvoidantError as exc:
        return _fail({"stage": "demo_obstruction", "error": str(exc)}, args.out)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "obstruction.json").write_text(_dump(report.to_json()))
        (out / "gamma.csv").write_text(build_gamma(args.a1, args.a2).to_csv())
        (out / "loop.csv").write_text(report.loop.to_csv())
        img = report.image_points
        (out / "image.csv").write_text("re,im\n" + "".join(f"{z.real!r},{z.imag!r}\n" for z in img))
    sys.stdout.write(_dump(report.to_json()))
    return EXIT_OK if report.obstructed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avoidant", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    ap = sub.add_parser("approximate", help="run the pipeline on a JSON config")
    ap.add_argument("--config", type=Path, required=True)
    ap.add_argument("--out", type=Path, default=None, help="output directory")
    ap.add_argument("--dense-verify", type=int, default=None, metavar="N",
                    help="re-check the result on an N-times denser sample")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--keep-iterates", action="store_true")
    ap.set_defaults(func=cmd_approximate)

    vp = sub.add_parser("verify", help="re-measure a polynomial against a config")
    vp.add_argument("--polynomial", type=Path, required=True)
    vp.add_argument("--config", type=Path, required=True)
    vp.add_argument("--eps", type=float, default=None, help="override the config's eps")
    vp.add_argument("--density", type=int, default=1, help="sample density multiplier")
    vp.set_defaults(func=cmd_verify)

    dp = sub.add_parser("demo-obstruction", help="show that avoiding a segment is impossible")
    dp.add_argument("--a1", type=_complex_arg, default=DEFAULT_A1)
    dp.add_argument("--a2", type=_complex_arg, default=DEFAULT_A2)
    dp.add_argument("--eps", type=float, default=0.01)
    dp.add_argument("--fit-degree", type=int, default=40)
    dp.add_argument("--exact", action="store_true", help="use the curve itself instead of a fit")
    dp.add_argument("--out", type=Path, default=None)
    dp.set_defaults(func=cmd_demo_obstruction)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "density", 1) < 1 or (getattr(args, "dense_verify", None) or 1) < 1:
        parser.error("density multipliers must be >= 1")
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"avoidant: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
