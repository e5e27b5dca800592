"""Command-line front end.

Configs are flat ``key = value`` files with dotted keys; ``#`` starts a
comment.  Recognised keys::

    space.kind      max | lift | tabulated   (or MAX_HALFLINE, ...)
    space.base      abs | discrete           (lift only)
    space.matrix    path to a matrix file    (tabulated only; relative to the config)
    map.expr        expression in x and y, e.g. (x + y) / 6
    map.family      affine | constant        (alternative to map.expr)
    map.a, map.b, map.c                      family parameters
    start           x0, y0
    starts          x0, y0; x1, y1; ...      (probe)
    spec.mode       MIXED_ARG | SELF_DISPLACEMENT | CROSS_DISPLACEMENT
    spec.k, spec.l
    tol, max_iters, divergence_cap, seed, axiom_tol, sample_size, quadruples

Exit codes: 0 ok, 2 violation, 3 stationary without certificate,
4 no convergence, 64 config error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import __version__
from .axiom_check import AxiomReport, check_all
from .contraction import (
    ContractionSpec,
    delta_of,
    sample_quadruples,
    validate_spec,
    verify_contraction,
)
from .errors import (
    AxiomViolationError,
    ConfigError,
    DomainEscapeError,
    ExprEvalError,
    ExprSyntaxError,
    PMError,
    SpecError,
)
from .maps import FAMILIES, CoupledMap, from_expr
from .pm_core import (
    AXIOM_TOL,
    Carrier,
    PartialMetricSpace,
    SpaceDescriptor,
    load_matrix,
    make_space,
    sample_points,
)
from .solver import (
    ConvergenceCertificate,
    SolverConfig,
    Status,
    dump_json,
    probe_uniqueness,
    solve,
    verify_coupled_fixed_point,
)

EXIT_OK = 0
EXIT_VIOLATION = 2
EXIT_STATIONARY = 3
EXIT_NO_CONVERGENCE = 4
EXIT_CONFIG = 64

STATUS_EXIT = {
    Status.CONVERGED: EXIT_OK,
    Status.STATIONARY_NO_CERT: EXIT_STATIONARY,
    Status.MAX_ITERS: EXIT_NO_CONVERGENCE,
    Status.DIVERGING: EXIT_NO_CONVERGENCE,
}

KNOWN_KEYS = {
    "space.kind", "space.base", "space.matrix",
    "map.expr", "map.family", "map.a", "map.b", "map.c",
    "start", "starts",
    "spec.mode", "spec.k", "spec.l",
    "tol", "max_iters", "divergence_cap", "seed", "axiom_tol", "sample_size", "quadruples",
}


def parse_config_text(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _number(raw: dict, key: str, default, kind=float):
    if key not in raw:
        return default
    try:
        return kind(raw[key])
    except ValueError:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {raw[key]!r}") from None


def _pair(text: str, key: str) -> tuple[float, float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"{key}: expected 'x, y', got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise ConfigError(f"{key}: expected two numbers, got {text!r}") from None


def _fmt(v: float) -> str:
    return repr(float(v))


@dataclass
class ProblemConfig:
    space_kind: Carrier | None = None
    space_base: str = "abs"
    space_matrix: Path | None = None
    map_expr: str | None = None
    map_family: str | None = None
    map_params: dict[str, float] = field(default_factory=dict)
    starts: list[tuple[float, float]] = field(default_factory=list)
    spec: ContractionSpec | None = None
    tol: float = 1e-9
    max_iters: int = 10_000
    divergence_cap: float = 1e12
    seed: int = 42
    axiom_tol: float = AXIOM_TOL
    sample_size: int = 64
    quadruples: int = 256

    @classmethod
    def from_mapping(cls, raw: dict[str, str], base_dir: Path = Path(".")) -> "ProblemConfig":
        cfg = cls()
        if "space.kind" in raw:
            try:
                cfg.space_kind = Carrier.parse(raw["space.kind"])
            except PMError as exc:
                raise ConfigError(f"space.kind: {exc}") from None
        cfg.space_base = raw.get("space.base", "abs")
        if "space.matrix" in raw:
            cfg.space_matrix = (base_dir / raw["space.matrix"]).resolve()
        cfg.map_expr = raw.get("map.expr")
        cfg.map_family = raw.get("map.family")
        if cfg.map_expr is not None and cfg.map_family is not None:
            raise ConfigError("give either map.expr or map.family, not both")
        for p in ("a", "b", "c"):
            if f"map.{p}" in raw:
                cfg.map_params[p] = _number(raw, f"map.{p}", None)
        if "starts" in raw:
            cfg.starts = [_pair(s, "starts") for s in raw["starts"].split(";") if s.strip()]
        elif "start" in raw:
            cfg.starts = [_pair(raw["start"], "start")]
        if "spec.mode" in raw:
            for key in ("spec.k", "spec.l"):
                if key not in raw:
                    raise ConfigError(f"spec.mode given without {key}")
            try:
                cfg.spec = ContractionSpec(raw["spec.mode"], _number(raw, "spec.k", 0.0), _number(raw, "spec.l", 0.0))
            except SpecError as exc:
                raise ConfigError(f"spec.mode: {exc}") from None
        elif "spec.k" in raw or "spec.l" in raw:
            raise ConfigError("spec.k / spec.l given without spec.mode")
        cfg.tol = _number(raw, "tol", cfg.tol)
        cfg.max_iters = _number(raw, "max_iters", cfg.max_iters, int)
        cfg.divergence_cap = _number(raw, "divergence_cap", cfg.divergence_cap)
        cfg.seed = _number(raw, "seed", cfg.seed, int)
        cfg.axiom_tol = _number(raw, "axiom_tol", cfg.axiom_tol)
        cfg.sample_size = _number(raw, "sample_size", cfg.sample_size, int)
        cfg.quadruples = _number(raw, "quadruples", cfg.quadruples, int)
        return cfg

    @classmethod
    def from_file(cls, path) -> "ProblemConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_mapping(parse_config_text(text), path.parent)

    def to_text(self) -> str:
        """The effective config, defaults filled in; re-parses to an equal config."""
        lines = []
        if self.space_kind is not None:
            lines.append(f"space.kind = {self.space_kind.value}")
            if self.space_kind is Carrier.METRIC_LIFT:
                lines.append(f"space.base = {self.space_base}")
        if self.space_matrix is not None:
            lines.append(f"space.matrix = {self.space_matrix}")
        if self.map_expr is not None:
            lines.append(f"map.expr = {self.map_expr}")
        if self.map_family is not None:
            lines.append(f"map.family = {self.map_family}")
        for p, v in sorted(self.map_params.items()):
            lines.append(f"map.{p} = {_fmt(v)}")
        if len(self.starts) == 1:
            lines.append(f"start = {_fmt(self.starts[0][0])}, {_fmt(self.starts[0][1])}")
        elif self.starts:
            lines.append("starts = " + "; ".join(f"{_fmt(a)}, {_fmt(b)}" for a, b in self.starts))
        if self.spec is not None:
            lines += [
                f"spec.mode = {self.spec.mode.value}",
                f"spec.k = {_fmt(self.spec.k)}",
                f"spec.l = {_fmt(self.spec.l)}",
            ]
        lines += [
            f"tol = {_fmt(self.tol)}",
            f"max_iters = {self.max_iters}",
            f"divergence_cap = {_fmt(self.divergence_cap)}",
            f"seed = {self.seed}",
            f"axiom_tol = {_fmt(self.axiom_tol)}",
            f"sample_size = {self.sample_size}",
            f"quadruples = {self.quadruples}",
        ]
        return "\n".join(lines) + "\n"

    # builders ---------------------------------------------------------------

    def build_space(self) -> PartialMetricSpace:
        if self.space_kind is None:
            raise ConfigError("missing space section (space.kind)")
        matrix = None
        if self.space_kind is Carrier.TABULATED:
            if self.space_matrix is None:
                raise ConfigError("space.matrix is required for a tabulated space")
            try:
                matrix = load_matrix(self.space_matrix)
            except (OSError, PMError) as exc:
                raise ConfigError(f"space.matrix: {exc}") from None
        try:
            return make_space(SpaceDescriptor(self.space_kind, self.space_base, matrix), self.axiom_tol)
        except AxiomViolationError:
            raise
        except PMError as exc:
            raise ConfigError(f"space: {exc}") from None

    def build_map(self) -> CoupledMap:
        if self.map_expr is not None:
            try:
                return from_expr(self.map_expr)
            except ExprSyntaxError as exc:
                raise ConfigError(f"map.expr: {exc}") from None
        if self.map_family is not None:
            family = FAMILIES.get(self.map_family)
            if family is None:
                raise ConfigError(f"map.family: unknown family {self.map_family!r}; choose from {sorted(FAMILIES)}")
            try:
                return family(**self.map_params)
            except TypeError as exc:
                raise ConfigError(f"map parameters for {self.map_family}: {exc}") from None
        raise ConfigError("missing map section (map.expr or map.family)")

    def build_solver_config(self) -> SolverConfig:
        try:
            return SolverConfig(self.tol, self.max_iters, self.divergence_cap)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def require_starts(self) -> list[tuple[float, float]]:
        if not self.starts:
            raise ConfigError("missing start (start or starts)")
        return self.starts


# commands -------------------------------------------------------------------

def _write_json(out: Path, name: str, obj) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    dump_json(obj, path)
    return path


def _write_effective(out: Path, cfg: ProblemConfig) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "effective.cfg").write_text(cfg.to_text())


def cmd_check_axioms(cfg: ProblemConfig, out: Path) -> int:
    try:
        space = cfg.build_space()
    except AxiomViolationError as exc:
        report = exc.report
    else:
        sample = sample_points(space, cfg.sample_size, cfg.seed)
        report = check_all(space, sample, cfg.axiom_tol)
    _write_effective(out, cfg)
    path = _write_json(out, "axioms.json", report.to_dict())
    verdict = "passed" if report.passed else f"FAILED ({len(report.violations)} violation(s))"
    print(f"axiom check on {report.sample_size} points: {verdict}; report: {path}")
    for v in report.violations[:5]:
        print(f"  {v.axiom.value} at {[p.value for p in v.witness]}: lhs={v.lhs!r} > rhs={v.rhs!r}")
    return EXIT_OK if report.passed else EXIT_VIOLATION


def _contraction_check(cfg: ProblemConfig, space, F):
    quads = sample_quadruples(space, cfg.quadruples, cfg.seed)
    violations = verify_contraction(F, space, cfg.spec, quads, cfg.axiom_tol)
    doc = {
        "spec": cfg.spec.to_dict(),
        "delta": delta_of(cfg.spec),
        "quadruples_checked": len(quads),
        "violations": [v.to_dict() for v in violations],
    }
    return violations, doc


def _need_spec(cfg: ProblemConfig) -> ContractionSpec:
    if cfg.spec is None:
        raise ConfigError("missing spec section (spec.mode, spec.k, spec.l)")
    try:
        validate_spec(cfg.spec)
    except SpecError as exc:
        raise ConfigError(f"spec: {exc}") from None
    return cfg.spec


def cmd_verify(cfg: ProblemConfig, out: Path) -> int:
    space, F = cfg.build_space(), cfg.build_map()
    _need_spec(cfg)
    violations, doc = _contraction_check(cfg, space, F)
    _write_effective(out, cfg)
    path = _write_json(out, "verify.json", doc)
    print(f"{cfg.spec.mode.value} (k={cfg.spec.k!r}, l={cfg.spec.l!r}) on "
          f"{doc['quadruples_checked']} quadruples: {len(violations)} violation(s); report: {path}")
    return EXIT_VIOLATION if violations else EXIT_OK


def cmd_solve(cfg: ProblemConfig, out: Path) -> int:
    space, F = cfg.build_space(), cfg.build_map()
    start = cfg.require_starts()[0]
    solver_cfg = cfg.build_solver_config()
    _write_effective(out, cfg)
    if cfg.spec is not None:
        _need_spec(cfg)
        violations, doc = _contraction_check(cfg, space, F)
        _write_json(out, "verify.json", doc)
        if violations:
            print(f"warning: {len(violations)} sampled quadruple(s) violate the supplied spec", file=sys.stderr)
    cert, trace = solve(F, space, start[0], start[1], cfg.spec, solver_cfg)
    cpath = _write_json(out, "certificate.json", {"carrier": space.kind.value, **cert.to_dict()})
    tpath = _write_json(out, "trace.json", trace.to_dict())
    fp = [p.value for p in cert.fixed_point] if cert.fixed_point else None
    print(f"{cert.status.value} after {cert.iterations} iteration(s); fixed point {fp}; "
          f"final residual {cert.final_residual!r}")
    print(f"certificate: {cpath}\ntrace: {tpath}")
    return STATUS_EXIT[cert.status]


def cmd_probe(cfg: ProblemConfig, out: Path) -> int:
    space, F = cfg.build_space(), cfg.build_map()
    starts = cfg.require_starts()
    if cfg.spec is not None:
        _need_spec(cfg)
    report = probe_uniqueness(F, space, starts, cfg.spec, cfg.build_solver_config())
    _write_effective(out, cfg)
    path = _write_json(out, "probe.json", report.to_dict())
    print(f"{len(report.distinct_points)} distinct coupled fixed point(s) from {len(starts)} start(s): "
          f"{[[a.value, b.value] for a, b in report.distinct_points]}; report: {path}")
    statuses = {c.status for c in report.runs}
    if statuses & {Status.MAX_ITERS, Status.DIVERGING}:
        return EXIT_NO_CONVERGENCE
    if statuses == {Status.CONVERGED} and report.unique:
        return EXIT_OK
    return EXIT_STATIONARY


DEMO_CONTRACTIVE = "(x + y) / 6"
DEMO_BOUNDARY = "(x + y) / 2"


def run_demo(tol: float = 1e-9, seed: int = 42, max_iters: int = 10_000) -> dict:
    """Both halves of the max-space example, as a JSON-ready document."""
    space = make_space(Carrier.MAX_HALFLINE)
    cfg = SolverConfig(tol=tol, max_iters=max_iters)

    F = from_expr(DEMO_CONTRACTIVE)
    spec = ContractionSpec.equal("MIXED_ARG", 1 / 3)
    quads = sample_quadruples(space, 256, seed)
    violations = verify_contraction(F, space, spec, quads)
    cert, trace = solve(F, space, 1.0, 2.0, spec, cfg)
    origin_ok = cert.fixed_point is not None and verify_coupled_fixed_point(F, space, *cert.fixed_point, tol=tol)
    part1_ok = (
        not violations
        and cert.status is Status.CONVERGED
        and origin_ok
        and all(p.value <= tol for p in cert.fixed_point)
    )

    G = from_expr(DEMO_BOUNDARY)
    boundary = ContractionSpec.equal("MIXED_ARG", 1.0)
    try:
        validate_spec(boundary)
        boundary_msg = "accepted"
    except SpecError as exc:
        boundary_msg = f"rejected: {exc}"
    # any valid constant pair fails somewhere; (0.4, 0.4) already fails at (1, 1, 0, 0)
    G_violations = verify_contraction(G, space, ContractionSpec("MIXED_ARG", 0.4, 0.4), quads)
    probe = probe_uniqueness(G, space, [(0.0, 0.0), (1.0, 1.0)], None, cfg)
    part2_ok = len(probe.distinct_points) == 2 and boundary_msg.startswith("rejected") and bool(G_violations)

    return {
        "seed": seed,
        "tol": tol,
        "contractive": {
            "map": DEMO_CONTRACTIVE,
            "spec": spec.to_dict(),
            "delta": spec.delta,
            "quadruples_checked": len(quads),
            "contraction_violations": [v.to_dict() for v in violations],
            "certificate": cert.to_dict(),
            "trace": trace.to_dict(),
            "ok": part1_ok,
        },
        "boundary": {
            "map": DEMO_BOUNDARY,
            "spec_k_equal_1": boundary_msg,
            "violations_of_mixed_0.4_0.4": len(G_violations),
            "probe": probe.to_dict(),
            "ok": part2_ok,
        },
        "ok": part1_ok and part2_ok,
    }


def cmd_demo(out: Path, tol: float = 1e-9, seed: int = 42, max_iters: int = 10_000) -> int:
    doc = run_demo(tol, seed, max_iters)
    path = _write_json(out, "demo.json", doc)
    c, b = doc["contractive"], doc["boundary"]
    cert = c["certificate"]
    print(f"F(x, y) = {c['map']} on [0, inf) with p(x, y) = max(x, y)")
    print(f"  MIXED_ARG k = l = 1/6, rate {c['delta']!r}; "
          f"{len(c['contraction_violations'])} violation(s) on {c['quadruples_checked']} sampled quadruples")
    print(f"  {cert['status']} at {cert['fixed_point']} after {cert['iterations']} iteration(s) "
          f"(a priori bound {cert['a_priori_bound_iters']}, d0 = {cert['d0']!r})")
    print(f"F(x, y) = {b['map']}: equal-constant spec with k = 1 {b['spec_k_equal_1']}")
    pts = b["probe"]["distinct_points"]
    print(f"  {len(pts)} distinct coupled fixed points found: {pts}")
    print("  with k + l = 1 uniqueness fails, so the strict inequality k + l < 1 is needed")
    print(f"report: {path}")
    return EXIT_OK if doc["ok"] else 1


class _Parser(argparse.ArgumentParser):
    # exit 2 is taken by "violation found"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pmfix", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in [
        ("check-axioms", "validate the configured space's partial-metric axioms"),
        ("verify", "check the contraction spec on sampled quadruples"),
        ("solve", "run the coupled Picard iteration"),
        ("probe", "solve from several starts and cluster the fixed points"),
        ("demo", "reproduce the max-space example and its k = 1 counterexample"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", type=Path, required=name != "demo")
        p.add_argument("--out", type=Path, default=Path("pmfix-out"))
        p.add_argument("--seed", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--max-iters", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "demo":
        return cmd_demo(
            args.out,
            tol=args.tol if args.tol is not None else 1e-9,
            seed=args.seed if args.seed is not None else 42,
            max_iters=args.max_iters if args.max_iters is not None else 10_000,
        )
    commands = {"check-axioms": cmd_check_axioms, "verify": cmd_verify, "solve": cmd_solve, "probe": cmd_probe}
    try:
        cfg = ProblemConfig.from_file(args.config)
        overrides = {k: v for k, v in (("seed", args.seed), ("tol", args.tol), ("max_iters", args.max_iters)) if v is not None}
        cfg = replace(cfg, **overrides)
        return commands[args.command](cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainEscapeError, ExprEvalError) as exc:
        print(f"iteration failed: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE


def read_report(path) -> dict:
    """Load any JSON report written by this tool."""
    return json.loads(Path(path).read_text())


__all__ = [
    "AxiomReport",
    "ConvergenceCertificate",
    "ProblemConfig",
    "build_parser",
    "main",
    "read_report",
    "run_demo",
]
