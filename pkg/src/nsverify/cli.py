"""``ns-verify`` command line: list, verify, sample, evolve, convergence.

Exit codes: 0 all expected-pass claims hold; 1 usage or configuration error;
2 a tolerance failure; 3 a measurement contradicts a published claim.
"""
from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import formats, solutions
from . import fields as F
from . import operators as ops
from .evolution import EvolutionSpec, duhamel_evolve, family_force
from .fields import Family, FluidParams, Grid, SolutionFamily, TimeProfile, VectorField
from .verify import ConvergenceResult, convergence_study, exit_code, run_family

CERTIFIED = (
    Family.TAYLOR_VORTEX_2D,
    Family.FORCED_TAYLOR_VORTEX_2D,
    Family.ABC_FLOW_3D,
    Family.FORCED_ABC_FLOW_3D,
)

DEFAULTS = {
    "family": None,
    "grid": 32,
    "kappa": 0.02,
    "rho": 1.0,
    "abc": "1,0.5,0.25",
    "forcing": None,
    "times": "0,0.1,0.5,1.0",
    "panels": None,
    "backend": "spectral",
    "out": ".",
    "format": "both",
    "kind": "laplacian",
    "resolutions": "16,32,64",
    "corrupt_velocity": 1.0,
}

COMMAND_KEYS = {
    "list": (),
    "verify": ("family", "grid", "kappa", "rho", "abc", "forcing", "times", "out", "corrupt_velocity"),
    "sample": ("family", "grid", "kappa", "rho", "abc", "forcing", "times", "out", "format"),
    "evolve": ("family", "grid", "kappa", "rho", "abc", "forcing", "times", "panels", "out", "format"),
    "convergence": ("kind", "resolutions", "backend", "kappa", "out"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, keys) -> None:
    flags = {
        "family": dict(help="family tag(s), comma separated, or 'all'"),
        "grid": dict(type=int, help="points per axis (even, >= 4)"),
        "kappa": dict(type=float, help="kinematic viscosity"),
        "rho": dict(type=float, help="density"),
        "abc": dict(help="ABC coefficients a,b,c"),
        "forcing": dict(
            help="zero | constant:c | exponential:f_I,lambda | matched | tabulated:t:g,t:g,...; "
            "for ABCExpForced3D give exponential:f_I,lambda"
        ),
        "times": dict(help="comma-separated evaluation times"),
        "panels": dict(type=int, help="Simpson panels for the Duhamel time integral"),
        "backend": dict(choices=["spectral", "fd"], help="operator backend"),
        "out": dict(help="output directory"),
        "format": dict(choices=["vtk", "csv", "both"], help="field file format"),
        "kind": dict(choices=["gradient", "laplacian", "duhamel"], help="convergence study kind"),
        "resolutions": dict(help="comma-separated grid sizes (or panel counts for duhamel)"),
    }
    for key in keys:
        if key == "corrupt_velocity":
            p.add_argument("--corrupt-velocity", dest="corrupt_velocity", type=float, default=None,
                           help=argparse.SUPPRESS)
        else:
            p.add_argument(f"--{key}", dest=key, default=None, **flags[key])
    if keys:
        p.add_argument("--config", default=None, help="JSON config (keys as flag names) or a previous report")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ns-verify", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "list": "show the solution families and their claims",
        "verify": "certify the families against the governing equations",
        "sample": "export velocity/pressure fields",
        "evolve": "run the Duhamel solution operator from each family's initial field",
        "convergence": "grid or panel refinement study",
    }
    for name, keys in COMMAND_KEYS.items():
        _common(sub.add_parser(name, help=helps[name]), keys)
    return parser


def _load_config(path: str, keys) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if isinstance(raw, dict) and raw.get("schema") == formats.SCHEMA:
        raw = raw.get("config", {})
    if not isinstance(raw, dict):
        raise UsageError("config must be a JSON object")
    cfg = {k.replace("-", "_"): v for k, v in raw.items()}
    unknown = sorted(set(cfg) - set(keys))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    return cfg


def resolve_config(args: argparse.Namespace) -> dict:
    keys = COMMAND_KEYS[args.command]
    cfg = _load_config(args.config, keys) if getattr(args, "config", None) else {}
    resolved = {}
    for key in keys:
        value = getattr(args, key)
        if value is None:
            value = cfg.get(key, DEFAULTS[key])
        resolved[key] = value
    _validate(resolved)
    return resolved


def _floats(value) -> list[float]:
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    if isinstance(value, (int, float)):
        return [float(value)]
    return [float(v) for v in str(value).split(",") if v.strip()]


def _validate(cfg: dict) -> None:
    try:
        if "kappa" in cfg and not float(cfg["kappa"]) > 0:
            raise UsageError("kappa must be positive")
        if "rho" in cfg and not float(cfg["rho"]) > 0:
            raise UsageError("rho must be positive")
        if "grid" in cfg:
            n = int(cfg["grid"])
            if n < 4 or n % 2:
                raise UsageError("grid must be even and >= 4")
        if "times" in cfg and any(t < 0 for t in _floats(cfg["times"])):
            raise UsageError("times must be nonnegative")
        if "abc" in cfg and len(_floats(cfg["abc"])) != 3:
            raise UsageError("abc needs three comma-separated values")
        if cfg.get("panels") is not None and int(cfg["panels"]) < 1:
            raise UsageError("panels must be positive")
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def parse_families(value) -> list[Family]:
    if value is None:
        return list(CERTIFIED)
    names = value if isinstance(value, (list, tuple)) else str(value).split(",")
    lookup = {f.value.lower(): f for f in Family}
    out = []
    for name in names:
        name = name.strip().lower()
        if name == "all":
            out.extend(f for f in Family if f not in out)
        elif name in lookup:
            out.append(lookup[name])
        else:
            raise UsageError(f"unknown family {name!r}; choose from {', '.join(f.value for f in Family)}")
    return out


def parse_forcing(spec, family: Family, kappa: float) -> TimeProfile:
    """Turn a ``kind[:params]`` string into a TimeProfile for ``family``."""
    if spec is None:
        spec = "exponential:1,1" if family is Family.ABC_EXP_FORCED_3D else "matched"
    spec = str(spec).strip()
    kind, _, rest = spec.partition(":")
    try:
        if kind == "zero":
            return TimeProfile.zero()
        if kind == "matched":
            return TimeProfile.exponential(1.0, family.decay_coefficient * kappa)
        if kind == "constant":
            return TimeProfile.constant(float(rest))
        if kind == "exponential":
            amp, lam = (float(v) for v in rest.split(","))
            return TimeProfile.exponential(amp, lam)
        if kind == "tabulated":
            pairs = [item.split(":") for item in rest.split(",")]
            return TimeProfile.tabulated([float(t) for t, _ in pairs], [float(g) for _, g in pairs])
    except ValueError as exc:
        raise UsageError(f"bad forcing {spec!r}: {exc}") from exc
    raise UsageError(f"unknown forcing kind {kind!r}")


def build_family(tag: Family, cfg: dict) -> SolutionFamily:
    a, b, c = _floats(cfg["abc"])
    if tag is Family.TAYLOR_VORTEX_2D:
        return SolutionFamily.taylor_vortex()
    if tag is Family.ABC_FLOW_3D:
        return SolutionFamily.abc_flow(a, b, c)
    G = parse_forcing(cfg.get("forcing"), tag, float(cfg["kappa"]))
    if tag is Family.FORCED_TAYLOR_VORTEX_2D:
        return SolutionFamily.forced_taylor_vortex(G)
    if tag is Family.FORCED_ABC_FLOW_3D:
        return SolutionFamily.forced_abc_flow(a, b, c, G)
    if G.kind == "zero":
        return SolutionFamily.abc_exp_forced(a, b, c, 0.0, 0.0)
    if G.kind != "exponential":
        raise UsageError("ABCExpForced3D takes --forcing exponential:f_I,lambda")
    return SolutionFamily.abc_exp_forced(a, b, c, *G.params)


def _fluid(cfg) -> FluidParams:
    return FluidParams(float(cfg["kappa"]), float(cfg["rho"]))


def _envelope(command: str, cfg: dict, code: int | None = None) -> dict:
    out = {"schema": formats.SCHEMA, "command": command, "created": datetime.now(timezone.utc).isoformat()}
    out["config"] = cfg
    if code is not None:
        out["exit_code"] = code
    return out


def cmd_list(_cfg=None, stream=None) -> int:
    stream = stream or sys.stdout
    decay = {2: "2*pi^2*kappa", 3: "pi^2*kappa"}
    rows = [("family", "dim", "parameters", "decay", "closed g", "claims")]
    for meta in solutions.registry():
        claims = "; ".join(
            f"{name.replace('_zero', '')}: {status}" for name, status in meta.claims.items()
        )
        rows.append(
            (
                meta.tag.value,
                str(meta.dim),
                ",".join(meta.parameters) or "-",
                decay[meta.dim],
                "yes" if meta.has_closed_inertial else "no",
                claims,
            )
        )
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]) - 1)]
    for row in rows:
        cells = [cell.ljust(w) for cell, w in zip(row, widths)] + [row[-1]]
        print("  ".join(cells).rstrip(), file=stream)
    return 0


def cmd_verify(cfg: dict) -> int:
    fluid = _fluid(cfg)
    times = _floats(cfg["times"])
    reports = []
    for tag in parse_families(cfg["family"]):
        family = build_family(tag, cfg)
        grid = Grid.cube(family.dim, int(cfg["grid"]))
        rep = run_family(family, fluid, grid, times, velocity_scale=float(cfg["corrupt_velocity"]))
        reports.append(rep)
        for claim, v in rep.verdicts.items():
            print(f"{tag.value:22s} {claim:22s} {v['verdict']:28s} measured={v['measured']:.3e} tol={v['tolerance']:.1e}")
    code = exit_code(reports)
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    doc = _envelope("verify", cfg, code)
    doc["reports"] = [r.to_dict() for r in reports]
    formats.write_report(out / "verify_report.json", doc)
    print(f"exit code {code}; report written to {out / 'verify_report.json'}")
    return code


def _write_fields(out: Path, stem: str, fmt: str, velocity, pressure, force=None) -> list[Path]:
    written = []
    if fmt in ("vtk", "both"):
        path = out / f"{stem}.vtk"
        formats.write_vtk(path, velocity, pressure, force, title=stem)
        written.append(path)
    if fmt in ("csv", "both"):
        path = out / f"{stem}.csv"
        formats.write_csv(path, velocity, pressure)
        written.append(path)
    return written


def cmd_sample(cfg: dict) -> int:
    fluid = _fluid(cfg)
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    for tag in parse_families(cfg["family"]):
        family = build_family(tag, cfg)
        grid = Grid.cube(family.dim, int(cfg["grid"]))
        for i, t in enumerate(_floats(cfg["times"])):
            v, p, f = F.sample(family, fluid, grid, t)
            for path in _write_fields(out, f"{tag.value}_t{i:03d}", cfg["format"], v, p, f):
                print(path)
    return 0


def cmd_evolve(cfg: dict) -> int:
    fluid = _fluid(cfg)
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    panels = None if cfg["panels"] is None else int(cfg["panels"])
    runs = []
    for tag in parse_families(cfg["family"]):
        family = build_family(tag, cfg)
        grid = Grid.cube(family.dim, int(cfg["grid"]))
        v0 = VectorField(grid, F.initial_velocity(family, grid.mesh()))
        spec = EvolutionSpec(fluid, v0, force=family_force(family, grid) if family.is_forced else None)
        rows = []
        for i, t in enumerate(_floats(cfg["times"])):
            v = duhamel_evolve(spec, t, panels)
            closed = VectorField(grid, F.velocity(family, fluid, grid.mesh(), t))
            err = (v - closed).sup_norm()
            rows.append({"t": t, "closed_form_sup_diff": err, "divergence_sup": ops.divergence(v).sup_norm()})
            print(f"{tag.value:22s} t={t:<8g} |duhamel - closed form|_inf = {err:.3e}")
            f = family_force(family, grid)(t)
            p = ops.pressure_from_fields(v, f, fluid)
            _write_fields(out, f"{tag.value}_evolved_t{i:03d}", cfg["format"], v, p, f)
        runs.append({"family": tag.value, "parameters": family.params(), "panels": panels, "results": rows})
    doc = _envelope("evolve", cfg)
    doc["runs"] = runs
    formats.write_report(out / "evolve_report.json", doc)
    return 0


def cmd_convergence(cfg: dict) -> int:
    sizes = [int(v) for v in _floats(cfg["resolutions"])]
    try:
        res: ConvergenceResult = convergence_study(
            cfg["kind"], sizes, backend=cfg["backend"], fluid=FluidParams(float(cfg["kappa"]))
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    lines = ["N,error,order"] + [f"{n},{formats._num(e)},{formats._num(res.order)}" for n, e in res.rows]
    text = "\n".join(lines) + "\n"
    (out / f"convergence_{res.kind}_{res.backend}.csv").write_text(text)
    sys.stdout.write(text)
    return 0


COMMANDS = {
    "list": cmd_list,
    "verify": cmd_verify,
    "sample": cmd_sample,
    "evolve": cmd_evolve,
    "convergence": cmd_convergence,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"ns-verify: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"ns-verify: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
