"""Config-driven experiment runner and its command-line interface.

Exit status: 0 on success, 1 when the experiment raised an error (recorded
in the report), 2 for an invalid config, 3 when a check came back with a
verdict that contradicts the theory (refuted axiom, contradiction,
invariance violation or re-escaping orbit).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, field, fields, is_dataclass
from pathlib import Path

import numpy as np

from . import axioms, dynamics, gromov, horoball
from .config import KINDS, build_map, build_space, parse_config
from .errors import ConfigInvalid, HorolabError
from .geometry import SimplexSlice
from .metrics import HILBERT_BODY, distance

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_INCONSISTENT = 0, 1, 2, 3
BOUNDARY_SAMPLES = 512


def jsonable(v):
    if isinstance(v, np.ndarray):
        return [jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if is_dataclass(v):
        return {f.name: jsonable(getattr(v, f.name)) for f in fields(v)}
    return v


@dataclass
class RunReport:
    config: dict
    seed: int
    kind: str
    status: str = "ok"
    result: dict = field(default_factory=dict)
    error: dict | None = None
    orbits: list = field(default_factory=list, repr=False)
    markers: list = field(default_factory=list, repr=False)
    # wall-clock time goes to stderr only, keeping report files reproducible
    elapsed: float = field(default=0.0, repr=False)
    space: object = field(default=None, repr=False)

    @property
    def exit_code(self):
        return {"ok": EXIT_OK, "error": EXIT_ERROR, "inconsistent": EXIT_INCONSISTENT}[self.status]

    def to_json(self):
        doc = {
            "config": self.config,
            "seed": self.seed,
            "experiment": self.kind,
            "status": self.status,
            "result": jsonable(self.result),
            "error": self.error,
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def start_points(space, starts):
    pts = []
    if starts.points:
        pts.extend(np.asarray(p, dtype=float) for p in starts.points)
    if starts.grid is not None:
        g = starts.grid
        cone = isinstance(space.domain, SimplexSlice)
        free = space.dim - 1 if cone else space.dim
        if len(g.lower) != free or len(g.upper) != free:
            raise ConfigInvalid("experiment.starts.grid", f"grid bounds need {free} coordinates")
        axes = [np.linspace(g.lower[j], g.upper[j], g.size) for j in range(free)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, free)
        if cone:
            mesh = np.c_[mesh, 1.0 - mesh.sum(axis=1)]
        mesh = mesh[space.domain.depth(mesh) > 1e-6]
        pts.extend(mesh)
    if not pts:
        raise ConfigInvalid("experiment.starts", "no start points inside the domain")
    return np.array(pts)


def _thresholds(cfg):
    return dynamics.Thresholds(**cfg.model_dump())


def _need_map(fmap, kind):
    if fmap is None:
        raise ConfigInvalid("map", f"experiment {kind!r} needs a map")
    return fmap


# ---------------------------------------------------------------------------
# Experiments. Each returns (result dict, consistent flag).


def _run_dist(cfg, space, fmap, report):
    e = cfg.experiment
    return {"distance": distance(space, e.x, e.y)}, True


def _run_orbit(cfg, space, fmap, report):
    fmap = _need_map(fmap, "orbit")
    th = _thresholds(cfg.experiment.thresholds)
    rows, consistent = [], True
    for i, x0 in enumerate(start_points(space, cfg.experiment.starts)):
        try:
            orbit, c = dynamics.classify_from(fmap, space, x0, th)
            verdict, extra = c.verdict, {"radius": c.radius, "dw_estimate": c.dw_estimate}
        except dynamics.UndecidedWithinBudget as exc:
            orbit = dynamics.iterate(fmap, space, x0, th.n_max)
            verdict, extra = "Undecided", {"reason": str(exc)}
        ok = dynamics.calka_consistent(orbit, th)
        consistent &= ok
        report.orbits.append(orbit)
        if extra.get("dw_estimate") is not None:
            report.markers.append(extra["dw_estimate"])
        rows.append({"start": x0, "verdict": verdict, "steps": orbit.steps, "halted": orbit.halted,
                     "calka_consistent": ok, **extra})
    return {"orbits": rows}, consistent


def _run_dw(cfg, space, fmap, report):
    fmap = _need_map(fmap, "dw")
    e = cfg.experiment
    starts = start_points(space, e.starts)
    res = dynamics.denjoy_wolff_estimate(fmap, space, starts, e.n, e.tol, _thresholds(e.thresholds))
    report.orbits.extend(dynamics.iterate(fmap, space, x0, e.n) for x0 in starts)
    report.markers.append(res.point)
    return {"dw_estimate": res.point, "uniformity": res.uniformity, "spread": res.spread,
            "starts": len(starts), "steps": res.steps}, True


def _run_axioms(cfg, space, fmap, report):
    e = cfg.experiment
    out, consistent = {}, True
    targets = [np.asarray(t, dtype=float) for t in (e.targets or [])]
    seqs = [axioms.approach_sequence(space, t) for t in targets]
    for check in e.checks:
        if check == "axiom1":
            if not seqs:
                raise ConfigInvalid("experiment.targets", "axiom1 needs boundary targets")
            r = axioms.check_axiom1(space, seqs)
        elif check == "B":
            if len(seqs) < 2:
                raise ConfigInvalid("experiment.targets", "condition B needs two boundary targets")
            r = axioms.check_condition_B(space, seqs[0], seqs[1])
        elif check == "Bprime":
            r = axioms.check_condition_Bprime(space, e.trials, cfg.seed)
        elif check == "axiom4":
            r = axioms.check_axiom4(space, e.trials, cfg.seed)
        else:
            r = axioms.check_condition_C(space, e.trials, cfg.seed, e.tol)
        consistent &= not r.refuted
        out[check] = r.to_dict()
    return {"checks": out}, consistent


def _run_horoball(cfg, space, fmap, report):
    e = cfg.experiment
    xi = np.asarray(e.xi, dtype=float)
    z0 = space.base_point if e.z0 is None else np.asarray(e.z0, dtype=float)
    witnesses = []
    for r in e.radii:
        w = horoball.horoball_witness(space, xi, z0, r)
        est = horoball.busemann_estimate(space, xi, z0, w)
        witnesses.append({"r": r, "point": w, "lo": est.lo, "hi": est.hi, "ok": est.lo <= -r + 0.01})
    out = {"witnesses": witnesses}
    consistent = all(w["ok"] for w in witnesses)
    if fmap is not None:
        inv = horoball.invariance_check(fmap, space, xi, z0, e.invariance_radius, e.k, e.samples, e.tol, cfg.seed)
        out["invariance"] = inv
        consistent &= inv.violations == 0
    report.markers.append(xi)
    return out, consistent


def _run_gromov(cfg, space, fmap, report):
    e = cfg.experiment
    est = gromov.delta_estimate(space, e.quadruples, cfg.seed)
    out = {"delta_hat": est.delta_hat, "quadruples": est.quadruples, "worst": est.worst,
           "schedule": est.schedule}
    consistent = True
    if fmap is not None:
        x0 = space.base_point if e.start is None else np.asarray(e.start, dtype=float)
        conv = gromov.orbit_gromov_convergence(fmap, space, x0, n=e.orbit_steps)
        out["orbit_convergence"] = conv
        consistent = conv.holds
    return out, consistent


def _run_attractor(cfg, space, fmap, report):
    fmap = _need_map(fmap, "attractor")
    e = cfg.experiment
    sample = dynamics.attractor_sample(fmap, space, start_points(space, e.starts), e.n, e.eps_acc)
    out = {"points": sample.points, "tail_diameters": sample.tail_diameters,
           "escaping": sample.escaping, "unresolved": sample.unresolved}
    consistent = True
    if space.kind == HILBERT_BODY:
        hull = dynamics.hull_boundary_check(sample, space.domain)
        out["hull"] = hull
        consistent = hull.verdict != "CounterexampleFound"
    report.markers.extend(sample.points)
    return out, consistent


RUNNERS = {
    "dist": _run_dist, "orbit": _run_orbit, "dw": _run_dw, "axioms": _run_axioms,
    "horoball": _run_horoball, "gromov": _run_gromov, "attractor": _run_attractor,
}


def _build(path, make, cfg):
    try:
        return make(cfg)
    except ConfigInvalid:
        raise
    except (HorolabError, ValueError) as exc:
        raise ConfigInvalid(path, str(exc)) from exc


def run(config):
    """Run one experiment; errors from the experiment are recorded, not raised.

    ``ConfigInvalid`` is raised for configs that fail validation, including
    semantic checks such as a map that does not act on the space.
    """
    cfg = config if not isinstance(config, (dict, str, Path)) else parse_config(config)
    space = _build("space", build_space, cfg.space)
    fmap = None if cfg.map is None else _build("map", build_map, cfg.map)
    if fmap is not None and not fmap.compatible(space):
        raise ConfigInvalid("map", f"{type(fmap).__name__} does not act on {space.kind}")
    kind = cfg.experiment.kind
    report = RunReport(cfg.model_dump(mode="json"), cfg.seed, kind)
    started = time.perf_counter()
    try:
        result, consistent = RUNNERS[kind](cfg, space, fmap, report)
        report.result = result
        report.status = "ok" if consistent else "inconsistent"
    except ConfigInvalid:
        raise
    except HorolabError as exc:
        report.status = "error"
        report.error = {"type": type(exc).__name__, "message": str(exc)}
    report.elapsed = time.perf_counter() - started
    report.space = space
    return report


# ---------------------------------------------------------------------------
# Output files


def emit_orbit_csv(orbits, path):
    """One row per orbit point: ``start_id, step, coord_0.., dist_to_base``."""
    if not orbits:
        raise ValueError("no orbits to write")
    dim = orbits[0].points.shape[1]
    header = ["start_id", "step"] + [f"coord_{j}" for j in range(dim)] + ["dist_to_base"]
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for sid, orbit in enumerate(orbits):
                for step, (p, d) in enumerate(zip(orbit.points, orbit.dists)):
                    w.writerow([sid, step] + [format(v, ".17g") for v in p] + [format(d, ".17g")])
    except OSError as exc:
        raise OSError(f"cannot write orbit table to {path}: {exc}") from exc


def _boundary_curve(body, m=BOUNDARY_SAMPLES):
    ang = 2 * np.pi * np.arange(m) / m
    dirs = np.c_[np.cos(ang), np.sin(ang)]
    return body.boundary_point(dirs)


def emit_plot_svg(body, orbits, markers, path, size=512, margin=16):
    """Static SVG: the boundary as a closed polyline, orbit polylines and limit markers."""
    if body.dim != 2 or isinstance(body, SimplexSlice):
        raise ValueError("plots are drawn for planar bodies only")
    curve = _boundary_curve(body)
    lo, hi = curve.min(axis=0), curve.max(axis=0)
    scale = (size - 2 * margin) / float(np.max(hi - lo))

    def xy(p):
        p = np.atleast_2d(p)
        sx = margin + (p[:, 0] - lo[0]) * scale
        sy = size - margin - (p[:, 1] - lo[1]) * scale
        return " ".join(f"{a:.3f},{b:.3f}" for a, b in zip(sx, sy))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<polyline class="boundary" fill="none" stroke="black" points="{xy(np.vstack([curve, curve[:1]]))}"/>',
    ]
    for o in orbits:
        parts.append(f'<polyline class="orbit" fill="none" stroke="steelblue" points="{xy(o.points)}"/>')
    for m in markers:
        (cx, cy), = [tuple(map(float, s.split(","))) for s in xy(m).split()]
        parts.append(f'<circle class="dw-marker" cx="{cx:.3f}" cy="{cy:.3f}" r="4" fill="crimson"/>')
    parts.append("</svg>")
    try:
        Path(path).write_text("\n".join(parts) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write plot to {path}: {exc}") from exc


def write_outputs(report, output, out_dir=None):
    """Write the report, orbit table and plot; returns the paths written."""
    paths = {"report": output.report, "orbits": output.orbits, "plot": output.plot}
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        defaults = {"report": "report.json", "orbits": "orbits.csv", "plot": "plot.svg"}
        paths = {k: str(out_dir / Path(v or defaults[k]).name) for k, v in paths.items()}
    written = {}
    if paths["report"]:
        Path(paths["report"]).write_text(report.to_json())
        written["report"] = paths["report"]
    if paths["orbits"] and report.orbits:
        emit_orbit_csv(report.orbits, paths["orbits"])
        written["orbits"] = paths["orbits"]
    body = report.space.domain
    if paths["plot"] and body.dim == 2 and not isinstance(body, SimplexSlice):
        emit_plot_svg(body, report.orbits, report.markers, paths["plot"])
        written["plot"] = paths["plot"]
    return written


# ---------------------------------------------------------------------------
# CLI


def build_parser():
    parser = argparse.ArgumentParser(prog="horolab", description="Run one horolab experiment from a JSON config.")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--out-dir", default=None, help="write all outputs into this directory")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(Path(args.config))
        if cfg.experiment.kind != args.kind:
            raise ConfigInvalid("experiment.kind", f"config describes {cfg.experiment.kind!r}, not {args.kind!r}")
        if args.seed is not None:
            cfg = cfg.model_copy(update={"seed": args.seed})
        report = run(cfg)
    except ConfigInvalid as exc:
        print(f"invalid config at {exc.path}: {exc.reason}", file=sys.stderr)
        return EXIT_CONFIG
    written = write_outputs(report, cfg.output, args.out_dir)
    print(f"{report.kind}: {report.status} in {report.elapsed:.2f}s", file=sys.stderr)
    for k, v in written.items():
        print(f"  {k}: {v}", file=sys.stderr)
    if not written:
        sys.stdout.write(report.to_json())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
