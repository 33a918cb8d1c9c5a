"""Experiment runner.

Every pipeline is a subcommand producing CSV/JSON artifacts in an output
directory, together with ``manifest.json`` echoing the fully resolved
configuration and its hash; the hash is embedded in every artifact so runs
can be traced back to their exact inputs.  Configuration is a flat
``key = value`` text file, overridable per-key by command-line flags; there
are no positional arguments beyond the subcommand.

Exit status: 0 success, 2 configuration error, 3 solver non-convergence,
4 overflow-flagged run.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import blowup, bounds
from .bubble import bubble_energy, bubble_energy_asymptotic, bubble_mass, liouville_mass
from .functional import OVERFLOW_CAP, TMParams
from .geometry import (
    DomainSpec,
    SingularQuadrature,
    build_mesh,
    save_field_values,
    save_mesh,
)
from .green import solve_green
from .maximizer import (
    MaximizerOptions,
    continuation_sweep,
    maximize_subcritical,
    result_to_json,
)
from .spectral import eigen_report_csv, eigenpairs

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOCONV = 3
EXIT_OVERFLOW = 4

COMMANDS = (
    "mesh", "eigs", "maximize", "sweep", "green", "bubble", "bound",
    "verify", "diagnose",
)


class ConfigError(ValueError):
    pass


def _float(s: str) -> float:
    return float(s)  # accepts "inf"


def _int(s: str) -> int:
    return int(s)


def _floats(s: str) -> tuple[float, ...]:
    s = s.strip()
    return tuple(float(t) for t in s.split(",")) if s else ()


# key -> (caster, default, help)
_SCHEMA = {
    "domain": (str, "disk", "disk | polygon | regular_polygon"),
    "radius": (_float, 1.0, "disk / circumscribed radius"),
    "sides": (_int, 6, "side count for regular_polygon"),
    "center_x": (_float, 0.0, "regular_polygon center x"),
    "center_y": (_float, 0.0, "regular_polygon center y"),
    "vertices": (str, "", "polygon vertices 'x,y;x,y;...'"),
    "h": (_float, 1.0 / 32.0, "target mesh size"),
    "beta": (_float, 0.5, "singularity strength, in (0, 1)"),
    "alpha": (_float, 0.0, "spectral shift"),
    "ell": (_int, 0, "eigenvalue groups to project out (subspace mode)"),
    "eps": (_float, 0.1, "subcriticality parameter"),
    "eps_schedule": (_floats, (), "comma list, strictly decreasing"),
    "count": (_int, 8, "number of eigenvalues"),
    "R": (_float, math.inf, "bubble integration radius"),
    "delta": (_float, 0.1, "concentration ball radius"),
    "tol_residual": (_float, 1e-6, "EL residual tolerance"),
    "tol_value": (_float, 1e-10, "stall tolerance on the value"),
    "max_iter": (_int, 10_000, "iteration cap"),
    "multistart": (_int, 0, "extra random starts"),
    "seed": (_int, 0, "RNG seed for multi-start"),
    "snap": (_int, 1, "snap gluing radii to mesh rings (bound)"),
    "jobs": (_int, 1, "parallel workers for independent ladders"),
    "plot": (_int, 0, "emit a plot script next to the CSV"),
    "out": (str, "runs", "output directory"),
}


def _parse_kv_file(path: str) -> dict[str, str]:
    cfg: dict[str, str] = {}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{ln}: expected 'key = value'")
        key, val = (t.strip() for t in line.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(f"{path}:{ln}: unknown key {key!r}")
        cfg[key] = val
    return cfg


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults < config file < explicit flags, with typed casting."""
    file_cfg = _parse_kv_file(args.config) if args.config else {}
    cfg = {}
    for key, (cast, default, _) in _SCHEMA.items():
        raw = getattr(args, key, None)
        if raw is None:
            raw = file_cfg.get(key)
        try:
            cfg[key] = cast(raw) if raw is not None else default
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from exc
    _validate(cfg)
    return cfg


def _validate(cfg: dict) -> None:
    if cfg["domain"] not in ("disk", "polygon", "regular_polygon"):
        raise ConfigError(f"unknown domain kind {cfg['domain']!r}")
    if not 0.0 < cfg["beta"] < 1.0:
        raise ConfigError("beta must lie in (0, 1)")
    if not cfg["h"] > 0.0:
        raise ConfigError("h must be positive")
    if cfg["eps"] < 0.0:
        raise ConfigError("eps must be nonnegative")
    if cfg["ell"] < 0:
        raise ConfigError("ell must be nonnegative")
    if cfg["jobs"] < 1:
        raise ConfigError("jobs must be >= 1")
    if cfg["count"] < 1:
        raise ConfigError("count must be >= 1")
    sched = cfg["eps_schedule"]
    if sched and any(b >= a for a, b in zip(sched, sched[1:])):
        raise ConfigError("eps_schedule must be strictly decreasing")


def _canonical(cfg: dict) -> dict[str, str]:
    out = {}
    for key, val in cfg.items():
        if isinstance(val, float):
            out[key] = f"{val:.17g}"
        elif isinstance(val, tuple):
            out[key] = ",".join(f"{v:.17g}" for v in val)
        else:
            out[key] = str(val)
    return out


def _domain(cfg: dict) -> DomainSpec:
    if cfg["domain"] == "disk":
        return DomainSpec.disk(cfg["radius"])
    if cfg["domain"] == "regular_polygon":
        return DomainSpec.regular_polygon(
            cfg["sides"], cfg["radius"], center=(cfg["center_x"], cfg["center_y"])
        )
    if not cfg["vertices"]:
        raise ConfigError("polygon domain needs 'vertices'")
    try:
        verts = [
            tuple(float(t) for t in pair.split(","))
            for pair in cfg["vertices"].split(";")
        ]
    except ValueError as exc:
        raise ConfigError(f"bad vertices: {exc}") from exc
    return DomainSpec.polygon(verts)


_UNHASHED = ("out", "plot", "jobs")  # plumbing keys that cannot alter results


class Run:
    """Output directory, manifest, and artifact helpers for one invocation."""

    def __init__(self, command: str, cfg: dict):
        self.command = command
        self.cfg = cfg
        self.outdir = Path(cfg["out"])
        self.outdir.mkdir(parents=True, exist_ok=True)
        canon = _canonical(cfg)
        hashed = {k: v for k, v in canon.items() if k not in _UNHASHED}
        blob = json.dumps({"command": command, "config": hashed}, sort_keys=True)
        self.hash = hashlib.sha256(blob.encode()).hexdigest()[:16]
        self.manifest = {
            "command": command,
            "config": canon,
            "config_hash": self.hash,
            "artifacts": [],
        }

    def write_csv(self, name: str, body: str) -> Path:
        path = self.outdir / name
        path.write_text(f"# config_hash: {self.hash}\n" + body)
        self.manifest["artifacts"].append(name)
        return path

    def write_json(self, name: str, payload) -> Path:
        if isinstance(payload, str):
            payload = json.loads(payload)
        payload["config_hash"] = self.hash
        path = self.outdir / name
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        self.manifest["artifacts"].append(name)
        return path

    def attach(self, name: str) -> None:
        """Register an artifact written by a module saver; append the hash as
        a trailing comment (loaders read exact row counts and ignore it)."""
        with open(self.outdir / name, "a") as fh:
            fh.write(f"# config_hash: {self.hash}\n")
        self.manifest["artifacts"].append(name)

    def plot_script(self, csv_name: str, x: str, ys: list[str],
                    logx: bool = False, logy: bool = False) -> None:
        if not self.cfg["plot"]:
            return
        name = f"plot_{csv_name.rsplit('.', 1)[0]}.py"
        lines = [
            "#!/usr/bin/env python3",
            '"""Generic plot for the CSV next to this script (not run by the',
            'toolkit itself)."""',
            "import csv, sys",
            "import matplotlib.pyplot as plt",
            "",
            f"rows = list(csv.DictReader(ln for ln in open({csv_name!r})",
            "                            if not ln.startswith('#')))",
            f"x = [float(r[{x!r}]) for r in rows]",
        ]
        for col in ys:
            lines.append(f"plt.plot(x, [float(r[{col!r}]) for r in rows], "
                         f"marker='o', label={col!r})")
        if logx:
            lines.append("plt.xscale('log')")
        if logy:
            lines.append("plt.yscale('log')")
        lines += [
            f"plt.xlabel({x!r})",
            "plt.legend()",
            "plt.savefig(sys.argv[1] if len(sys.argv) > 1 else "
            f"{csv_name.rsplit('.', 1)[0] + '.png'!r}, dpi=150)",
            "",
        ]
        (self.outdir / name).write_text("\n".join(lines))
        self.manifest["artifacts"].append(name)

    def finish(self) -> None:
        (self.outdir / "manifest.json").write_text(
            json.dumps(self.manifest, indent=2, sort_keys=True) + "\n"
        )


def _mesh(cfg: dict):
    return build_mesh(_domain(cfg), cfg["h"])


def _basis(mesh, cfg: dict):
    """Eigenfunction basis for subspace mode (ell > 0), else None."""
    ell = cfg["ell"]
    if ell == 0:
        return None
    sd = eigenpairs(mesh, max(cfg["count"], ell + 4))
    return sd.basis_of_first_groups(ell)


def _params(cfg: dict, eps: float | None = None) -> TMParams:
    return TMParams(
        beta=cfg["beta"], alpha=cfg["alpha"],
        eps=cfg["eps"] if eps is None else eps,
    )


def _options(cfg: dict) -> MaximizerOptions:
    return MaximizerOptions(
        tol_residual=cfg["tol_residual"], tol_value=cfg["tol_value"],
        max_iter=cfg["max_iter"], multistart=cfg["multistart"],
        seed=cfg["seed"],
    )


def _sweep_csv(results) -> str:
    cols = ["eps", "value", "c", "lambda_eps", "norm", "residual",
            "iterations", "converged", "overflow", "stalled"]
    lines = [",".join(cols)]
    for r in results:
        lines.append(",".join([
            f"{r.params.eps:.17g}", f"{r.value:.17g}", f"{r.c:.17g}",
            f"{r.lam:.17g}", f"{r.norm:.17g}", f"{r.residual:.17g}",
            str(r.iterations), str(int(r.converged)), str(int(r.overflow)),
            str(int(r.stalled)),
        ]))
    return "\n".join(lines) + "\n"


def _sweep_exit(results) -> int:
    if any(not r.converged and not r.overflow for r in results):
        return EXIT_NOCONV
    if any(r.overflow for r in results):
        return EXIT_OVERFLOW
    return EXIT_OK


def _default_schedule(cfg: dict, fallback: tuple[float, ...]) -> tuple[float, ...]:
    return cfg["eps_schedule"] if cfg["eps_schedule"] else fallback


def cmd_mesh(run: Run) -> int:
    mesh = _mesh(run.cfg)
    save_mesh(mesh, run.outdir / "mesh.txt")
    run.attach("mesh.txt")
    print(f"nodes {mesh.n_nodes} triangles {mesh.n_triangles} h {mesh.h:.17g}")
    return EXIT_OK


def cmd_eigs(run: Run) -> int:
    mesh = _mesh(run.cfg)
    sd = eigenpairs(mesh, run.cfg["count"])
    run.write_csv("eigs.csv", eigen_report_csv(sd))
    run.plot_script("eigs.csv", "index", ["eigenvalue"])
    print(f"lambda_1 {sd.eigenvalues[0]:.17g}")
    return EXIT_OK


def cmd_green(run: Run) -> int:
    cfg = run.cfg
    mesh = _mesh(cfg)
    basis = _basis(mesh, cfg)
    g = solve_green(mesh, cfg["alpha"], basis=basis)
    from .green import orthogonality_residuals

    save_field_values(g.w, run.outdir / "green_w.txt")
    run.attach("green_w.txt")
    run.write_json("green.json", {
        "alpha": cfg["alpha"],
        "a0": g.A0,
        "orthogonality": [float(x) for x in orthogonality_residuals(g)],
    })
    print(f"a0 {g.A0:.17g}")
    return EXIT_OK


def cmd_bubble(run: Run) -> int:
    cfg = run.cfg
    beta, R = cfg["beta"], cfg["R"]
    doc = {
        "beta": beta,
        "R": R,
        "mass": bubble_mass(R, beta),
        "liouville_mass": liouville_mass(beta),
    }
    if math.isfinite(R):
        doc["energy"] = bubble_energy(R, beta)
        doc["energy_asymptotic"] = bubble_energy_asymptotic(R, beta)
    run.write_json("bubble.json", doc)
    print(f"mass {doc['mass']:.17g}")
    return EXIT_OK


def cmd_maximize(run: Run) -> int:
    cfg = run.cfg
    if cfg["eps"] <= 0.0:
        raise ConfigError("maximize needs eps > 0")
    mesh = _mesh(cfg)
    basis = _basis(mesh, cfg)
    res = maximize_subcritical(
        mesh, _params(cfg), basis=basis, opts=_options(cfg)
    )
    run.write_json("maximize.json", result_to_json(res))
    save_field_values(res.u.full(), run.outdir / "u.txt")
    run.attach("u.txt")
    print(f"value {res.value:.17g} c {res.c:.17g} residual {res.residual:.17g}")
    return _sweep_exit([res])


def _run_sweep(run: Run):
    cfg = run.cfg
    mesh = _mesh(cfg)
    basis = _basis(mesh, cfg)
    sched = _default_schedule(
        cfg, (0.3, 0.2, 0.14, 0.1, 0.07, 0.05, 0.035, 0.025)
    )
    results = continuation_sweep(
        mesh, _params(cfg, eps=sched[0]), sched, basis=basis, opts=_options(cfg)
    )
    return mesh, basis, results


def cmd_sweep(run: Run) -> int:
    _, _, results = _run_sweep(run)
    run.write_csv("sweep.csv", _sweep_csv(results))
    run.plot_script("sweep.csv", "eps", ["value", "c"], logx=True)
    save_field_values(results[-1].u.full(), run.outdir / "u_final.txt")
    run.attach("u_final.txt")
    print(f"steps {len(results)} last_value {results[-1].value:.17g}")
    return _sweep_exit(results)


def cmd_diagnose(run: Run) -> int:
    cfg = run.cfg
    mesh, basis, results = _run_sweep(run)
    g = solve_green(mesh, cfg["alpha"], basis=basis)
    rows = blowup.sweep_diagnostics(results, g=g, delta=cfg["delta"])
    run.write_csv("diagnostics.csv", blowup.diagnostics_csv(rows))
    run.plot_script(
        "diagnostics.csv", "eps",
        ["c", "energy_fraction", "profile_sup_dev"], logx=True,
    )
    print(f"steps {len(rows)} last_c {rows[-1].c:.17g}")
    return _sweep_exit(results)


def cmd_bound(run: Run) -> int:
    cfg = run.cfg
    mesh = _mesh(cfg)
    basis = _basis(mesh, cfg)
    g = solve_green(mesh, cfg["alpha"], basis=basis)
    sched = _default_schedule(cfg, (1e-2, 1e-3, 1e-4))
    report = bounds.verify_exceeds(
        mesh, g, cfg["beta"], cfg["alpha"], sched,
        snap=bool(cfg["snap"]), jobs=cfg["jobs"],
    )
    run.write_csv("bound.csv", bounds.bound_report_csv(report))
    run.write_json("bound.json", bounds.bound_report_json(report))
    run.plot_script("bound.csv", "eps", ["excess", "ratio"], logx=True)
    print(f"upper_bound {report.bound:.17g}")
    for row in report.rows:
        print(f"eps {row.eps:.3g} excess {row.excess:.17g} ratio {row.ratio:.17g}")
    return EXIT_OK


def cmd_verify(run: Run) -> int:
    """Consistency triangle: converged maximizer values stay below the upper
    bound (within a quadrature error bar) while the test family exceeds it."""
    cfg = run.cfg
    mesh, basis, results = _run_sweep(run)
    run.write_csv("sweep.csv", _sweep_csv(results))
    g = solve_green(mesh, cfg["alpha"], basis=basis)
    # the ε ladder for the test family lives at much smaller scales than the
    # maximizer's subcriticality schedule, so it gets its own fixed ladder
    report = bounds.verify_exceeds(
        mesh, g, cfg["beta"], cfg["alpha"], (1e-2, 1e-3),
        snap=bool(cfg["snap"]), jobs=cfg["jobs"],
    )
    run.write_csv("bound.csv", bounds.bound_report_csv(report))

    checks: list[tuple[str, bool, str]] = []
    ok_conv = all(r.converged or r.overflow for r in results)
    checks.append(("sweep_converged", ok_conv,
                   f"{sum(r.converged for r in results)}/{len(results)}"))
    vals = [r.value for r in results if not r.overflow]
    mono = all(b >= a * (1.0 - 1e-12) for a, b in zip(vals, vals[1:]))
    checks.append(("value_nondecreasing_along_eps", mono, ""))

    # quadrature error bar: re-evaluate the deepest iterate on a finer rule
    last = results[-1]
    fine = SingularQuadrature(beta=cfg["beta"], order=5, depth=3)
    p = TMParams(cfg["beta"], cfg["alpha"], eps=last.params.eps)
    from .geometry import quadrature_tables

    tabs = quadrature_tables(mesh, fine)
    refined = tabs.integrate(np.exp(
        np.minimum(p.gamma * tabs.values(last.u.full()) ** 2, OVERFLOW_CAP)
    ))
    bar = abs(refined - last.value) + 1e-8
    below = max(vals) <= report.bound + bar
    checks.append(("sup_below_bound", below,
                   f"max {max(vals):.6g} bound {report.bound:.6g} bar {bar:.2g}"))
    exceeded = report.rows[-1].excess > 0.0
    checks.append(("family_exceeds_bound", exceeded,
                   f"excess {report.rows[-1].excess:.6g}"))

    all_ok = True
    for name, ok, detail in checks:
        print(f"check {name} {'PASS' if ok else 'FAIL'} {detail}".rstrip())
        all_ok &= ok
    code = _sweep_exit(results)
    if code != EXIT_OK:
        return code
    return EXIT_OK if all_ok else EXIT_NOCONV


_DISPATCH = {
    "mesh": cmd_mesh,
    "eigs": cmd_eigs,
    "maximize": cmd_maximize,
    "sweep": cmd_sweep,
    "green": cmd_green,
    "bubble": cmd_bubble,
    "bound": cmd_bound,
    "verify": cmd_verify,
    "diagnose": cmd_diagnose,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="singtm",
        description="singular Trudinger-Moser toolkit experiment runner",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="flat key = value config file")
    for key, (_, default, help_text) in _SCHEMA.items():
        parser.add_argument(
            f"--{key}", default=None, metavar="V",
            help=f"{help_text} (default {default})",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        run = Run(args.command, cfg)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        code = _DISPATCH[args.command](run)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RuntimeError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    run.finish()
    return code


if __name__ == "__main__":
    sys.exit(main())
