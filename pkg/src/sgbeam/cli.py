"""Command-line front end.

Verbs ``static``, ``modal``, ``buckling`` and ``converge`` run analyses for
one or more node counts and element types and print either a fixed-width
table (4 decimals) or CSV (17 significant digits). ``dump-weights`` writes
the derivative matrices of one element.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .assembly import BasisKind, BeamConfig, build_element, reference_preset
from .gll import gll_rule
from .hermite import hermite_basis, hermite_derivative_matrices
from .lagrange import lagrange_weights, modified_weights
from .oracle import buckling_oracle, frequency_oracle, static_oracle
from .solve import BoundaryCondition, apply_bc, solve_buckling, solve_modal, solve_static

__all__ = ["Record", "RunSpec", "build_parser", "main", "parse_n", "run"]

N_MIN, N_MAX = 5, 41
BASES = ("lagrange", "hermite", "oracle")
LABELS = {"lagrange": "SQE8-L", "hermite": "SQE8-H", "oracle": "Exact"}
CONVERGE_DEFAULTS = {
    "static": list(range(7, 22, 2)),
    "modal": list(range(7, 22, 2)),
    "buckling": list(range(5, 16)),
}
PRESETS = {"paper-sec3": reference_preset}
CFG_KEYS = tuple(f.name for f in fields(BeamConfig))


@dataclass(frozen=True)
class Record:
    n: int | None
    basis: str
    quantity: str
    index: int
    value: float


@dataclass(frozen=True)
class RunSpec:
    analysis: str
    basis: tuple[str, ...]
    n: tuple[int, ...]
    bc: str
    cfg: BeamConfig
    output: str = "table"
    modes: int = 6
    profile: bool = False
    boundary_rows: str = "recursive"
    jobs: int = 1


def parse_n(text: str) -> list[int]:
    """Parse ``11``, ``5..15``, ``7..21:2`` or ``7,9,11``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            span, _, step = part.partition(":")
            lo, hi = (int(v) for v in span.split(".."))
            stride = int(step) if step else 1
            if stride <= 0 or hi < lo:
                raise ValueError(f"bad range {part!r}")
            out.extend(range(lo, hi + 1, stride))
        else:
            out.append(int(part))
    for n in out:
        if not N_MIN <= n <= N_MAX:
            raise ValueError(f"node count {n} outside {N_MIN}..{N_MAX}")
    return out


def _read_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        values[key.strip()] = value.strip()
    return values


# --------------------------------------------------------------- analyses


def _element_case(spec: RunSpec, n: int, basis: str) -> list[Record]:
    em = build_element(spec.cfg, n, basis, boundary_rows=spec.boundary_rows)
    rs = apply_bc(em, BoundaryCondition.from_name(spec.bc))
    if spec.analysis == "static":
        res = solve_static(rs)
        recs = []
        if n % 2 == 1:
            recs.append(Record(n, basis, "wbar_center", 0, res.deflection_at_center()))
        recs.append(Record(n, basis, "slope_left", 0, res.nondim_slope[0]))
        if spec.profile:
            recs += [Record(n, basis, "wbar_node", i, v) for i, v in enumerate(res.nondim_deflection)]
        return recs
    if spec.analysis == "modal":
        res = solve_modal(rs, spec.modes)
        recs = [Record(n, basis, "omega", i + 1, v) for i, v in enumerate(res.frequencies)]
        recs += [Record(n, basis, "rigid_omega", i + 1, v) for i, v in enumerate(res.rigid_frequencies)]
        return recs
    res = solve_buckling(rs, spec.modes)
    return [Record(n, basis, "pbar", i + 1, v) for i, v in enumerate(res.buckling_loads)]


def _oracle_case(spec: RunSpec) -> list[Record]:
    bc = BoundaryCondition.from_name(spec.bc)
    if spec.analysis == "static":
        res = static_oracle(spec.cfg, bc)
        half = 0.5 * spec.cfg.L
        recs = [
            Record(None, "oracle", "wbar_center", 0, float(res.nondim_deflection(0.0)[0])),
            Record(None, "oracle", "slope_left", 0, float(res.nondim_slope(-half)[0])),
        ]
        if spec.profile:
            for n in spec.n:
                vals = res.nondim_deflection(half * gll_rule(n).nodes)
                recs += [Record(n, "oracle", "wbar_node", i, float(v)) for i, v in enumerate(vals)]
        return recs
    if spec.analysis == "modal":
        res = frequency_oracle(spec.cfg, bc, spec.modes)
        return [Record(None, "oracle", "omega", i + 1, v) for i, v in enumerate(res.frequencies)]
    res = buckling_oracle(spec.cfg, bc, spec.modes)
    return [Record(None, "oracle", "pbar", i + 1, v) for i, v in enumerate(res.buckling_loads)]


def collect(spec: RunSpec) -> list[Record]:
    """Run every requested case; the record order is independent of ``jobs``."""
    cases = [(n, b) for b in spec.basis if b != "oracle" for n in spec.n]
    tasks = [lambda n=n, b=b: _element_case(spec, n, b) for n, b in cases]
    if "oracle" in spec.basis:
        tasks.append(lambda: _oracle_case(spec))
    if spec.jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=spec.jobs) as pool:
            chunks = list(pool.map(lambda t: t(), tasks))
    else:
        chunks = [t() for t in tasks]
    return [r for chunk in chunks for r in chunk]


# --------------------------------------------------------------- rendering


def _fmt(value: float | None) -> str:
    if value is None:
        return "-"
    text = f"{value:.4f}"
    return "0.0000" if text == "-0.0000" else text


def _table(header: Sequence[str], rows: Sequence[tuple[str, Sequence[float | None]]]) -> str:
    cells = [list(header)] + [[label] + [_fmt(v) for v in vals] for label, vals in rows]
    widths = [max(len(r[c]) for r in cells) for c in range(len(header))]
    lines = []
    for i, r in enumerate(cells):
        lines.append("  ".join(r[0].ljust(widths[0]) if c == 0 else r[c].rjust(widths[c]) for c in range(len(r))))
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _lookup(records: list[Record]) -> dict[tuple, float]:
    return {(r.n, r.basis, r.quantity, r.index): r.value for r in records}


def render_table(spec: RunSpec, records: list[Record]) -> str:
    get = _lookup(records).get
    elements = [b for b in spec.basis if b != "oracle"]
    has_oracle = "oracle" in spec.basis
    out: list[str] = [
        f"# {spec.analysis}  bc={spec.bc}  g1={spec.cfg.g1:g}  g2={spec.cfg.g2:g}  L={spec.cfg.L:g}  E={spec.cfg.E:g}"
    ]
    if spec.analysis == "static" and spec.profile:
        for n in spec.n:
            xi = gll_rule(n).nodes
            header = ["2x/L"] + [LABELS[b] for b in spec.basis]
            rows = [
                (f"{x:+.4f}", [get((n, b, "wbar_node", i)) for b in spec.basis])
                for i, x in enumerate(xi)
            ]
            out += [f"N = {n}", _table(header, rows)]
        return "\n".join(out) + "\n"
    if spec.analysis == "static":
        header = ["N"] + [f"{LABELS[b]} wbar(0)" for b in elements] + [f"{LABELS[b]} slope" for b in elements]
        rows = [
            (str(n), [get((n, b, "wbar_center", 0)) for b in elements] + [get((n, b, "slope_left", 0)) for b in elements])
            for n in (spec.n if elements else [])
        ]
        if has_oracle:
            if elements:
                w0, s0 = get((None, "oracle", "wbar_center", 0)), get((None, "oracle", "slope_left", 0))
                rows.append(("Exact", [w0] * len(elements) + [s0] * len(elements)))
            else:
                header = ["", "wbar(0)", "slope"]
                rows.append(("Exact", [get((None, "oracle", "wbar_center", 0)), get((None, "oracle", "slope_left", 0))]))
        out.append(_table(header, rows))
        out.append("slope = 100 EI w'(-L/2) / (q L^3)")
        return "\n".join(out) + "\n"
    if spec.analysis == "modal":
        header = [""] + [f"mode {k}" for k in range(1, spec.modes + 1)]
        rows = []
        notes = []
        for b in elements:
            for n in spec.n:
                rows.append((f"{LABELS[b]} N={n}", [get((n, b, "omega", k)) for k in range(1, spec.modes + 1)]))
                rigid = [r for r in records if r.n == n and r.basis == b and r.quantity == "rigid_omega"]
                if rigid:
                    notes.append(f"{LABELS[b]} N={n}: {len(rigid)} rigid modes discarded")
        if has_oracle:
            rows.append(("Analytical", [get((None, "oracle", "omega", k)) for k in range(1, spec.modes + 1)]))
        out.append(_table(header, rows))
        out += notes
        return "\n".join(out) + "\n"
    header = ["N"] + [LABELS[b] for b in elements] if elements else ["", "Pbar"]
    rows = [(str(n), [get((n, b, "pbar", 1)) for b in elements]) for n in (spec.n if elements else [])]
    if has_oracle:
        val = get((None, "oracle", "pbar", 1))
        rows.append(("Analytical", [val] * max(len(elements), 1)))
    out.append(_table(header, rows))
    return "\n".join(out) + "\n"


def render_csv(records: list[Record]) -> str:
    lines = ["N,basis,quantity,index,value"]
    for r in records:
        n = "" if r.n is None else str(r.n)
        lines.append(f"{n},{r.basis},{r.quantity},{r.index},{format(r.value, '.17g')}")
    return "\n".join(lines) + "\n"


def run(spec: RunSpec) -> str:
    """Produce the report for ``spec``."""
    records = collect(spec)
    return render_csv(records) if spec.output == "csv" else render_table(spec, records)


def dump_weights(basis: str, n: int, boundary_rows: str = "recursive") -> str:
    """Derivative matrices as row-major CSV blocks in scientific notation."""
    grid = gll_rule(n)
    if BasisKind(basis) is BasisKind.LAGRANGE:
        w = lagrange_weights(grid)
        mw = modified_weights(w, boundary_rows=boundary_rows)
        mats = {"A": w.A, "B": w.B, "C": w.C, "D": w.D, "Abar": mw.Abar, "Bbar": mw.Bbar, "Cbar": mw.Cbar, "Dbar": mw.Dbar}
    else:
        hd = hermite_derivative_matrices(hermite_basis(grid))
        mats = {f"G{k}": hd.order(k) for k in (1, 2, 3, 4)}
    lines = [f"# nodes," + ",".join(format(x, ".17e") for x in grid.nodes)]
    lines.append(f"# weights," + ",".join(format(x, ".17e") for x in grid.weights))
    for name, mat in mats.items():
        lines.append(f"# {name},{mat.shape[0]},{mat.shape[1]}")
        lines += [",".join(format(v, ".17e") for v in row) for row in mat]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------- argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--basis", default=None, help="lagrange, hermite, oracle or all (comma lists allowed)")
    common.add_argument("--n", default=None, help="node count: 11, 5..15, 7..21:2 or 7,9,11")
    common.add_argument("--bc", default=None, choices=["ss", "free", "clamped", "pinned", "cantilever"])
    common.add_argument("--preset", default="paper-sec3", choices=sorted(PRESETS))
    common.add_argument("--config", default=None, help="key=value file overriding the preset")
    for key in CFG_KEYS:
        common.add_argument(f"--{key}", type=float, default=None)
    common.add_argument("--modes", type=int, default=None, help="number of frequencies or loads")
    common.add_argument("--format", dest="output", choices=["table", "csv"], default="table")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--boundary-rows", choices=["recursive", "printed"], default="recursive",
                        help="boundary-row form of the Lagrange derivative matrices")
    common.add_argument("--profile", action="store_true", help="static: deflection at every node")

    parser = argparse.ArgumentParser(prog="sgbeam", description="Strain-gradient beam quadrature elements")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in ("static", "modal", "buckling"):
        sub.add_parser(verb, parents=[common], help=f"{verb} analysis")
    conv = sub.add_parser("converge", parents=[common], help="convergence study over N")
    conv.add_argument("--analysis", choices=["static", "modal", "buckling"], required=True)
    sub.add_parser("dump-weights", parents=[common], help="write derivative matrices as CSV")
    return parser


def _spec_from_args(args: argparse.Namespace) -> RunSpec:
    file_values = _read_config(args.config) if args.config else {}
    unknown = set(file_values) - set(CFG_KEYS) - {"basis", "n", "bc", "modes"}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    overrides = {k: float(v) for k, v in file_values.items() if k in CFG_KEYS and k != "q"}
    if "q" in file_values:
        overrides["q"] = float(file_values["q"])
    overrides.update({k: getattr(args, k) for k in CFG_KEYS if getattr(args, k) is not None})
    cfg = PRESETS[args.preset]().with_(**overrides)

    analysis = args.analysis if args.verb == "converge" else args.verb
    basis_text = args.basis or file_values.get("basis") or "all"
    basis = BASES if basis_text == "all" else tuple(b.strip() for b in basis_text.split(","))
    for b in basis:
        if b not in BASES:
            raise ValueError(f"unknown basis {b!r}")
    basis = tuple(b for b in BASES if b in basis)
    n_text = args.n or file_values.get("n")
    if n_text:
        n = parse_n(n_text)
    elif args.verb == "converge":
        n = CONVERGE_DEFAULTS[analysis]
    else:
        n = [11] if analysis != "modal" else [21]
    modes = args.modes if args.modes is not None else int(file_values.get("modes", 6 if analysis == "modal" else 1))
    if modes < 1:
        raise ValueError("--modes must be at least 1")
    if args.jobs < 1:
        raise ValueError("--jobs must be at least 1")
    return RunSpec(
        analysis=analysis, basis=basis, n=tuple(n), bc=args.bc or file_values.get("bc", "ss"), cfg=cfg,
        output=args.output, modes=modes, profile=args.profile, boundary_rows=args.boundary_rows, jobs=args.jobs,
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.verb == "dump-weights":
            basis = args.basis or "lagrange"
            if basis not in ("lagrange", "hermite"):
                raise ValueError("dump-weights needs --basis lagrange or hermite")
            n = parse_n(args.n or "11")
            report = "".join(dump_weights(basis, k, args.boundary_rows) for k in n)
        else:
            spec = _spec_from_args(args)
            report = run(spec)
    except (RuntimeError, np.linalg.LinAlgError) as exc:
        # LinAlgError derives from ValueError, so it must be caught first
        print(f"sgbeam: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"sgbeam: error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        Path(args.out).write_text(report)
    else:
        sys.stdout.write(report)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
