"""Command line: ``specular <subcommand> [flags]``.  Angles are radians.

Exit codes: 0 success, 1 verification failed, 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import ast
import math
import operator
import os
import sys
from typing import Optional

import numpy as np

from . import __version__
from .geometry import EPS_GEOM, Direction
from .io import SceneParseError, dumps_report, read_scene, render_svg, report, write_scene

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.USub: operator.neg, ast.UAdd: operator.pos}


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval(node.operand))
    raise ValueError


def radians(text: str) -> float:
    """Number or simple expression in pi, e.g. ``0.3`` or ``3*pi/4``; degrees are rejected."""
    t = text.strip().lower()
    if t.endswith(("deg", "degree", "degrees", "°")) or "°" in t:
        raise argparse.ArgumentTypeError(f"angles are radians; degrees not accepted: {text!r}")
    try:
        v = _eval(ast.parse(t, mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an angle in radians: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"angle must be finite: {text!r}")
    return v


def _angles(text: str) -> list[float]:
    return [radians(p) for p in text.split(",") if p.strip()]


def _pos_float(text: str) -> float:
    v = float(text)
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError("must be a positive number")
    return v


def _emit(rep: dict, out: Optional[str]) -> None:
    text = dumps_report(rep)
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _params(args, *names) -> dict:
    return {n: getattr(args, n) for n in names}


def _scene_out(args) -> Optional[str]:
    return getattr(args, "scene_out", None)


# ---------------------------------------------------------------------------
# commands


def cmd_build_block(args) -> int:
    from .blocks import BlockSpec, BudgetExhausted, build_block, verify_block
    spec = BlockSpec(args.rho, args.theta1, args.eps)
    try:
        scene = build_block(spec, args.grid_step)
        code = EXIT_OK
    except BudgetExhausted as e:
        scene, code = e.scene, EXIT_FAILED
        if scene is None:
            _emit(report("build-block", _params(args, "rho", "theta1", "eps", "grid_step"),
                         {"accepted": False, "error": str(e)}), args.out)
            return EXIT_FAILED
        scene = scene.transformed(scale=args.rho)
    rep = verify_block(scene, spec, args.grid_step)
    if args.scene_out:
        write_scene(scene, args.scene_out)
    _emit(report("build-block", _params(args, "rho", "theta1", "eps", "grid_step", "scene_out"),
                 rep.to_dict()), args.out)
    return code if rep.accepted else EXIT_FAILED


def cmd_verify_block(args) -> int:
    from .blocks import BlockSpec, verify_block
    scene = read_scene(args.scene)
    rep = verify_block(scene, BlockSpec(args.rho, args.theta1, args.eps), args.grid_step)
    _emit(report("verify-block", _params(args, "scene", "rho", "theta1", "eps", "grid_step"),
                 rep.to_dict()), args.out)
    return EXIT_OK if rep.accepted else EXIT_FAILED


def cmd_build_urchin(args) -> int:
    from .urchin import relaxed_urchin
    u, brep = relaxed_urchin(args.eps, args.N, args.r1, args.eps1, args.grid_step)
    if args.scene_out:
        write_scene(u.scene, args.scene_out)
    res = {"params": u.params.to_dict(), "n_segments": len(u.scene), "block_size": u.block_size,
           "block": brep.to_dict()}
    _emit(report("build-urchin", _params(args, "eps", "N", "r1", "eps1", "grid_step", "scene_out"),
                 res), args.out)
    return EXIT_OK


def cmd_verify_urchin(args) -> int:
    from .measure import theorem1_report
    scene = read_scene(args.scene)
    rep = theorem1_report(scene, args.eps, args.n, args.seed, args.cap, args.threads)
    res = rep.to_dict()
    res["accepted"] = bool(rep.same_direction_fraction >= 0.9)
    _emit(report("verify-urchin", _params(args, "scene", "eps", "n", "seed", "cap"), res), args.out)
    return EXIT_OK if res["accepted"] else EXIT_FAILED


def cmd_build_mirror(args) -> int:
    from .mirror import build_invisible_mirror
    G, rep = build_invisible_mirror(args.theta, args.eps, args.alpha, args.budget, args.k_max,
                                    args.delta, args.n1_mode)
    if args.scene_out:
        write_scene(G, args.scene_out)
    _emit(report("build-mirror", _params(args, "theta", "eps", "alpha", "budget", "k_max", "delta",
                                         "n1_mode", "scene_out"), rep.to_dict()), args.out)
    return EXIT_OK if rep.shadow_ok else EXIT_FAILED


def cmd_verify_mirror(args) -> int:
    from .mirror import verify_mirror
    G = read_scene(args.scene)
    rep = verify_mirror(G, args.theta, args.eps, args.n, args.alpha)
    _emit(report("verify-mirror", _params(args, "scene", "theta", "eps", "n", "alpha"),
                 rep.to_dict()), args.out)
    return EXIT_OK if rep.accepted else EXIT_FAILED


def _trace_one(scene, angle: float, offset: float, cap: int):
    from .tracer import trace
    v = Direction.from_angle(angle)
    w = (-offset * v.y, offset * v.x)
    return v, w, trace(scene, v, w, cap)


def cmd_trace(args) -> int:
    scene = read_scene(args.scene)
    v, w, p = _trace_one(scene, args.angle, args.offset, args.cap)
    res = {"bounces": p.bounces, "degenerate": p.degenerate, "cap_exceeded": p.cap_exceeded,
           "points": [list(q) for q in p.points], "segment_ids": p.segment_ids,
           "entry": {"v": [v.x, v.y], "w": list(w)},
           "exit": None if p.exit is None else {"v": [p.exit.v.x, p.exit.v.y], "w": list(p.exit.w)}}
    _emit(report("trace", _params(args, "scene", "angle", "offset", "cap"), res), args.out)
    return EXIT_OK


def cmd_shadow(args) -> int:
    from .projection import shadow_profile
    scene = read_scene(args.scene)
    m, sd = shadow_profile(scene, np.asarray(args.alpha, float), args.rho)
    res = {"alpha": args.alpha, "measure": m.tolist(), "symdiff": sd.tolist()}
    _emit(report("shadow", _params(args, "scene", "alpha", "rho"), res), args.out)
    return EXIT_OK


def cmd_render(args) -> int:
    from .mirror import copies_of_Z
    scene = read_scene(args.scene)
    paths = []
    for ang, off in args.ray or []:
        v, w, p = _trace_one(scene, ang, off, args.cap)
        span = 2.0 * max(1.0, scene.diameter())
        first = np.array(p.points[0]) if p.points else np.array(w)
        start = first - span * np.array([v.x, v.y])
        pts = [start] + [np.array(q) for q in p.points]
        if p.exit is not None:
            pts.append(pts[-1] + span * np.array([p.exit.v.x, p.exit.v.y]))
        elif not p.points:
            pts.append(np.array(w) + span * np.array([v.x, v.y]))
        paths.append(np.array(pts))
    rhombi = None
    if args.mirror_mode:
        n = int(scene.meta.get("n_star", 0))
        s = scene.meta.get("s_star", "")
        theta = float(scene.meta.get("theta", "nan"))
        if not n or not s or s == "omitted" or not math.isfinite(theta):
            raise SceneParseError("mirror mode needs n_star, s_star and theta metadata", 1)
        rhombi = list(copies_of_Z(n, [int(x) for x in s.split()], theta))
    svg = render_svg(scene, paths, None, rhombi)
    if args.out:
        with open(args.out, "w") as f:
            f.write(svg)
    else:
        sys.stdout.write(svg)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _ray(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("ray must be ANGLE:OFFSET")
    return radians(parts[0]), float(parts[1])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="specular", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"specular {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out_help="write the JSON report here instead of stdout"):
        p.add_argument("--out", help=out_help)
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: SPECULAR_THREADS or 1)")

    p = sub.add_parser("build-block", help="generate and verify a block")
    p.add_argument("--rho", type=_pos_float, default=1.0)
    p.add_argument("--theta1", type=radians, default=0.30)
    p.add_argument("--eps", type=_pos_float, default=0.25)
    p.add_argument("--grid-step", type=_pos_float, default=1e-3)
    p.add_argument("--scene-out")
    common(p)
    p.set_defaults(func=cmd_build_block)

    p = sub.add_parser("verify-block", help="verify a block scene")
    p.add_argument("--scene", required=True)
    p.add_argument("--rho", type=_pos_float, default=1.0)
    p.add_argument("--theta1", type=radians, default=0.30)
    p.add_argument("--eps", type=_pos_float, default=0.25)
    p.add_argument("--grid-step", type=_pos_float, default=1e-3)
    common(p)
    p.set_defaults(func=cmd_verify_block)

    p = sub.add_parser("build-urchin", help="assemble a desk-scale sea urchin")
    p.add_argument("--eps", type=_pos_float, default=0.5)
    p.add_argument("--n", dest="N", type=int, default=20, help="number of spikes N")
    p.add_argument("--r1", type=_pos_float, default=0.1)
    p.add_argument("--eps1", type=_pos_float, default=0.25)
    p.add_argument("--grid-step", type=_pos_float, default=1e-3)
    p.add_argument("--scene-out")
    common(p)
    p.set_defaults(func=cmd_build_urchin)

    p = sub.add_parser("verify-urchin", help="Monte Carlo invisibility report")
    p.add_argument("--scene", required=True)
    p.add_argument("--eps", type=_pos_float, default=0.5)
    p.add_argument("--n", type=int, default=100_000, help="number of sampled lines")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=10_000)
    common(p)
    p.set_defaults(func=cmd_verify_urchin)

    p = sub.add_parser("build-mirror", help="construct an invisible mirror")
    p.add_argument("--theta", type=radians, default=math.pi / 4)
    p.add_argument("--eps", type=_pos_float, default=0.5)
    p.add_argument("--alpha", type=_angles, default=None, help="comma-separated target angles")
    p.add_argument("--budget", type=int, default=10**6, help="maximum composed size n*")
    p.add_argument("--k-max", type=int, default=12)
    p.add_argument("--delta", type=_pos_float, default=1e-3)
    p.add_argument("--n1-mode", choices=("bookkeeping", "measured"), default="bookkeeping")
    p.add_argument("--scene-out")
    common(p)
    p.set_defaults(func=cmd_build_mirror)

    p = sub.add_parser("verify-mirror", help="check one-bounce transport and shadows")
    p.add_argument("--scene", required=True)
    p.add_argument("--theta", type=radians, default=math.pi / 4)
    p.add_argument("--eps", type=_pos_float, default=0.5)
    p.add_argument("--n", type=int, default=1000, help="number of horizontal rays")
    p.add_argument("--alpha", type=_angles, default=None)
    common(p)
    p.set_defaults(func=cmd_verify_mirror)

    p = sub.add_parser("trace", help="follow one directed line")
    p.add_argument("--scene", required=True)
    p.add_argument("--angle", type=radians, required=True, help="direction of travel")
    p.add_argument("--offset", type=float, default=0.0, help="signed distance of the line from 0")
    p.add_argument("--cap", type=int, default=10_000)
    common(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("shadow", help="shadow measures at given angles")
    p.add_argument("--scene", required=True)
    p.add_argument("--alpha", type=_angles, required=True)
    p.add_argument("--rho", type=_pos_float, default=1.0, help="reference interval [0, rho]")
    common(p)
    p.set_defaults(func=cmd_shadow)

    p = sub.add_parser("render", help="draw a scene as SVG")
    p.add_argument("--scene", required=True)
    p.add_argument("--ray", type=_ray, action="append", help="ANGLE:OFFSET, repeatable")
    p.add_argument("--mirror-mode", action="store_true", help="outline the rhombi of a mirror scene")
    p.add_argument("--cap", type=int, default=10_000)
    common(p, "write the SVG here instead of stdout")
    p.set_defaults(func=cmd_render)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    if args.threads is not None:
        if args.threads < 1:
            ap.print_usage(sys.stderr)
            print("specular: error: --threads must be >= 1", file=sys.stderr)
            return EXIT_USAGE
        os.environ["SPECULAR_THREADS"] = str(args.threads)
    try:
        return args.func(args)
    except (SceneParseError, OSError, ValueError) as e:
        print(f"specular: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
