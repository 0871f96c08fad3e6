"""Command-line interface: classify, measure, weyl, stieltjes, verify.

Exit codes: 0 success, 2 usage error, 3 series nonconvergence,
4 verification failure.  QMOMENT_MAX_TERMS overrides the series term cap.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time

import numpy as np

from .measure import ExtrapolationError, build_measure, verify_measure
from .polynomials import JacobiBasis, classify
from .qkernel import QParam
from .series import NonConvergenceError, SeriesContext
from .weyl import ExtensionParam, m_at_i, m_of_z, weyl_disk

EXIT_OK, EXIT_USAGE, EXIT_NONCONV, EXIT_VERIFY = 0, 2, 3, 4

GATE = 1e-6
SPREAD_GATE = 1e-5


class UsageError(Exception):
    pass


# --- JSON with fixed float formatting ----------------------------------------------


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def emit(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with reals at 17 significant digits and complex as {"re", "im"}."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return emit({"re": float(obj.real), "im": float(obj.imag)}, indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return emit(obj.tolist(), indent, _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {emit(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + emit(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    try:
        return _fmt_float(float(obj))
    except (TypeError, ValueError):
        return json.dumps(str(obj))


def parse(text: str):
    """Inverse of ``emit``: {"re", "im"} objects and non-finite markers are restored."""

    def hook(d):
        if set(d) == {"re", "im"}:
            return complex(_num(d["re"]), _num(d["im"]))
        return {k: _num(v) for k, v in d.items()}

    def _num(v):
        if v in ("nan", "inf", "-inf"):
            return float(v)
        if isinstance(v, list):
            return [_num(u) for u in v]
        return v

    out = json.loads(text, object_hook=hook)
    return _num(out)


# --- config -------------------------------------------------------------------------


def _max_terms() -> int:
    raw = os.environ.get("QMOMENT_MAX_TERMS")
    if raw is None:
        return 100_000
    try:
        v = int(raw)
    except ValueError:
        raise UsageError(f"QMOMENT_MAX_TERMS must be an integer, got {raw!r}") from None
    if v < 8:
        raise UsageError("QMOMENT_MAX_TERMS must be >= 8")
    return v


def load_basis_file(path: str) -> JacobiBasis:
    """custom-file basis: {"b": [...], "tail": {"kind": "qosc", "q": ...} | {"kind": "none"}}."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read basis file {path!r}: {exc}") from None
    if not isinstance(data, dict) or not isinstance(data.get("b"), list) or not data["b"]:
        raise UsageError("basis file needs a nonempty list 'b'")
    tail = data.get("tail", {"kind": "none"})
    kind = tail.get("kind") if isinstance(tail, dict) else None
    if kind == "qosc":
        tail_q = tail.get("q")
    elif kind == "none":
        tail_q = None
    else:
        raise UsageError("basis file 'tail' must be {'kind': 'qosc', 'q': ...} or {'kind': 'none'}")
    try:
        return JacobiBasis.from_prefix(data["b"], tail_q)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def make_basis(args) -> JacobiBasis:
    if args.basis == "custom-file":
        if not args.file:
            raise UsageError("--basis custom-file needs --file")
        return load_basis_file(args.file)
    if args.q is None:
        raise UsageError("--q is required for the qosc basis")
    try:
        return JacobiBasis.q_oscillator(QParam(args.q))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def make_context(args) -> SeriesContext:
    basis = make_basis(args)
    if basis.kind != "q_oscillator" and (basis.length is not None or basis.qparam is None):
        raise UsageError("series evaluation needs an indeterminate basis with a q-oscillator tail")
    tol = getattr(args, "tol", None)
    try:
        return SeriesContext(basis, tol=tol, max_terms=_max_terms())
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _window(raw):
    if raw in (None, "auto"):
        return "auto"
    try:
        v = float(raw)
    except ValueError:
        raise argparse.ArgumentTypeError("window must be a positive number or 'auto'") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("window must be a positive number or 'auto'")
    return v


def _complex(raw: str) -> complex:
    try:
        return complex(raw.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse complex number {raw!r}") from None


# --- output -------------------------------------------------------------------------


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, (list, tuple, np.ndarray)) and not isinstance(obj, str):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix.rstrip("."), obj


def _scalar_text(v):
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v)).strip('"')
    if isinstance(v, (complex, np.complexfloating)):
        return f"{_fmt_float(v.real)}{'+' if v.imag >= 0 else '-'}{_fmt_float(abs(v.imag))}i"
    return str(v)


def render(report: dict, fmt: str, table=None) -> str:
    """json: the whole report; csv: ``table`` rows if given, else key,value pairs; text: aligned pairs."""
    if fmt == "json":
        return emit(report) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if table is not None:
            header, rows = table
            w.writerow(header)
            for r in rows:
                w.writerow([_scalar_text(v) if v is not None else "" for v in r])
        else:
            w.writerow(["key", "value"])
            for k, v in _flatten(report):
                w.writerow([k, _scalar_text(v)])
        return buf.getvalue()
    lines = []
    for k, v in _flatten(report):
        lines.append(f"{k:<40} {_scalar_text(v)}")
    if table is not None:
        header, rows = table
        lines.append("")
        lines.append("  ".join(f"{h:>24}" for h in header))
        for r in rows:
            lines.append("  ".join(f"{_scalar_text(v) if v is not None else '-':>24}" for v in r))
    return "\n".join(lines) + "\n"


def _write(args, text: str):
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- verification gates ---------------------------------------------------------------


def _gate(anchor, value, threshold):
    value = float(value)
    return {"anchor": anchor, "value": value, "threshold": threshold,
            "passed": bool(value <= threshold)}


def wronskian_residual(basis, z, n_max: int = 200, digits: int = 30) -> float:
    """max over n <= n_max and z of |b_{n-1}(P_{n-1}Q_n - P_nQ_{n-1}) - 1|.

    The recurrence runs in extended precision: in binary64 the difference
    loses up to log10(|P||Q| b) digits, about nine at |z| = 10, q = 2.
    """
    from .polynomials import pq_table
    from .qkernel import extended

    bk = extended(digits)
    b = basis.values(n_max, bk)
    worst = 0.0
    for zz in np.atleast_1d(z):
        P, Q = pq_table(basis, n_max, complex(zz), bk)
        for n in range(1, n_max + 1):
            W = P[n - 1] * Q[n] - P[n] * Q[n - 1]
            worst = max(worst, float(abs(W * b[n - 1] - 1)))
    return worst


def run_gates(ctx: SeriesContext, deep: bool = False, seed: int = 20240611) -> list:
    """Identity gates for one q; ``deep`` adds the phi0 = 0, pi measure gates.

    Random points come from a fixed-seed generator so the report is
    reproducible byte for byte.
    """
    from .oracle import compare_measures, eigen_quadrature, moments_exact, truncate
    from .series import conjugation_check, master_identity, partial_sum, telescoped
    from .weyl import nevanlinna_matrix, t_from_phi0

    rng = np.random.default_rng(seed)
    out = []

    # three-term recurrence Wronskian P_{n-1} Q_n - P_n Q_{n-1} = 1/b_{n-1}
    r = 10 * np.sqrt(rng.uniform(0, 1, 20))
    z = r * np.exp(2j * np.pi * rng.uniform(0, 1, 20))
    out.append(_gate("wronskian", wronskian_residual(ctx.basis, z, 200), 1e-9))

    out.append(_gate("master-identity", abs(float(master_identity(ctx)) - 1), 1e-9))

    d = weyl_disk(ctx)
    out.append(_gate("radius-two-representations", abs(d.radius - d.radius_direct) / d.radius, 1e-8))

    gaps = [abs(abs(complex(m_at_i(ctx, ExtensionParam(ph))) - d.center) - d.radius)
            for ph in 2 * np.pi * np.arange(64) / 64]
    out.append(_gate("circle-membership", max(gaps), 1e-10))

    x = rng.uniform(-5, 5, 20)
    worst = 0.0
    for n in range(1, 61):
        S = partial_sum(ctx, "alpha1", n, x)
        T = telescoped(ctx, "alpha1", n, x)
        worst = max(worst, float(np.max(np.abs(S - T) / np.maximum(1.0, np.abs(T)))))
    out.append(_gate("telescoping", worst, 1e-9))

    zc = rng.uniform(-3, 3, 5) + 1j * rng.uniform(0.1, 3, 5)
    out.append(_gate("conjugate-symmetry",
                     max(conjugation_check(ctx, w, zz) for w in ("alpha1", "alpha2", "beta1", "beta2") for zz in zc),
                     1e-9))

    zs = rng.uniform(-4, 4, 20) + 1j * rng.uniform(0.2, 4, 20)
    gap = 0.0
    for ph in (np.pi / 2, np.pi):
        ext = ExtensionParam(ph)
        t = t_from_phi0(ctx, ext)
        mi = m_at_i(ctx, ext)
        for zz in zs:
            a = complex(nevanlinna_matrix(ctx, zz).m_t(t))
            bb = complex(m_of_z(ctx, ext, zz, mi))
            gap = max(gap, abs(a - bb) / max(1.0, abs(bb)))
    out.append(_gate("nevanlinna-dictionary", gap, 1e-7))

    if deep:
        s = [float(v) for v in moments_exact(ctx.basis, 12)]
        rule = eigen_quadrature(truncate(ctx.basis, 60))
        measures = {}
        for label, ph in (("sigma0", 0.0), ("sigma_pi", math.pi)):
            m = build_measure(ctx, ExtensionParam(ph))
            measures[label] = m
            v = verify_measure(ctx, m, 12, 8)
            out.append(_gate(f"{label}:total-mass", abs(m.total_mass - 1), 1e-6))
            out.append(_gate(f"{label}:moments", v["moment_relative_max"], 1e-6))
            out.append(_gate(f"{label}:orthonormality", v["ortho_residual_max"], 1e-6))
            out.append(_gate(f"{label}:mass-methods", m.max_method_spread(), 1e-5))
            out.append(_gate(f"{label}:quadrature-moments",
                             compare_measures(rule, m, 12, reference=s)["max_gap"], 1e-6))
        m0, mp = measures["sigma0"].moments(12), measures["sigma_pi"].moments(12)
        out.append(_gate("sigma0-sigma-pi-moments",
                         float(np.max(np.abs(m0 - mp) / np.maximum(1.0, np.abs(np.asarray(s))))), 1e-6))
        x0, xp = measures["sigma0"].x, measures["sigma_pi"].x
        sep = float(np.min(np.abs(x0[:, None] - xp[None, :])))
        # disjointness: report the inverse separation so that "small is good"
        out.append(_gate("support-disjointness", 1e-12 / max(sep, 1e-300), 1.0))
    return out


# --- commands ---------------------------------------------------------------------


def cmd_classify(args) -> int:
    basis = make_basis(args)
    c = classify(basis)
    _write(args, render({"verdict": c.verdict, "evidence": c.evidence}, args.format))
    return EXIT_OK


def _measure_report(ctx, measure, verify):
    atoms = [
        {"x": a.x, "mass": a.mass, "residual": a.residual, "closed_form": a.closed_form,
         "christoffel": a.christoffel, "residue": a.residue}
        for a in measure.atoms
    ]
    gates = {
        "total_mass": abs(measure.total_mass - 1) <= GATE,
        "moments": verify["moment_relative_max"] <= GATE,
        "orthonormality": verify["ortho_residual_max"] <= GATE,
        "mass_methods": measure.max_method_spread() <= SPREAD_GATE,
        "flags": not measure.flags,
    }
    report = {
        "q": measure.q,
        "phi0": measure.phi0.phi0,
        "window": measure.window,
        "atoms": atoms,
        "total_mass": measure.total_mass,
        "moment_residuals": verify["moment_residuals"],
        "moment_relative_residuals": verify["moment_relative_residuals"],
        "ortho_residual_max": verify["ortho_residual_max"],
        "consistency": {
            "max_method_spread": measure.max_method_spread(),
            "mass_method": "closed_form" if measure.symmetric else "residue",
            "symmetric": measure.symmetric,
        },
        "flags": measure.flags,
        "gates": gates,
        "passed": all(gates.values()),
    }
    return report


def cmd_measure(args) -> int:
    ctx = make_context(args)
    measure = build_measure(ctx, ExtensionParam(args.phi0), window=args.window, tol_root=args.tol_root)
    ver = verify_measure(ctx, measure, n_moments=12, n_ortho=8)
    report = _measure_report(ctx, measure, ver)
    header = ["x", "mass", "residual", "closed_form", "christoffel", "residue"]
    rows = [[a[h] for h in header] for a in report["atoms"]]
    if args.format == "csv":
        text = render(report, "csv", (header, rows))
    elif args.format == "text":
        brief = {k: v for k, v in report.items() if k != "atoms"}
        text = render(brief, "text", (header, rows))
    else:
        text = render(report, "json")
    _write(args, text)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def cmd_weyl(args) -> int:
    ctx = make_context(args)
    d = weyl_disk(ctx)
    report = {
        "q": ctx.basis.qparam.q,
        "center": d.center,
        "radius": d.radius,
        "radius_direct": d.radius_direct,
        "center_direct": d.center_direct,
        "radius_gap": abs(d.radius - d.radius_direct) / d.radius,
    }
    if args.phi0 is not None:
        report["phi0"] = ExtensionParam(args.phi0).phi0
        report["m_i"] = complex(m_at_i(ctx, ExtensionParam(args.phi0)))
    _write(args, render(report, args.format))
    return EXIT_OK if report["radius_gap"] <= 1e-8 else EXIT_VERIFY


def cmd_stieltjes(args) -> int:
    ctx = make_context(args)
    ext = ExtensionParam(args.phi0)
    m = complex(m_of_z(ctx, ext, args.z))
    report = {"q": ctx.basis.qparam.q, "phi0": ext.phi0, "z": args.z, "m": m}
    _write(args, render(report, args.format))
    return EXIT_OK


def cmd_verify(args) -> int:
    ctx = make_context(args)
    t0 = time.perf_counter()
    results = run_gates(ctx, deep=args.deep)
    worst = max(results, key=lambda g: g["value"] / g["threshold"] if g["threshold"] else 0.0)
    passed = all(g["passed"] for g in results)
    report = {
        "q": ctx.basis.qparam.q,
        "deep": bool(args.deep),
        "gates": results,
        "worst": {"anchor": worst["anchor"], "value": worst["value"], "threshold": worst["threshold"]},
        "passed": passed,
    }
    if args.timing:
        report["seconds"] = time.perf_counter() - t0
    _write(args, render(report, args.format))
    if not passed:
        bad = [g for g in results if not g["passed"]]
        w = max(bad, key=lambda g: g["value"] / g["threshold"])
        print(f"verification failed at [{w['anchor']}]: {w['value']:.3e} > {w['threshold']:.1e}",
              file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


# --- parser ------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qmoment", description="Spectral measures of q-oscillator Jacobi matrices.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, phi0=False, phi0_default=None):
        p.add_argument("--q", type=float, help="deformation parameter q > 0, |q - 1| >= 1e-3")
        p.add_argument("--basis", choices=("qosc", "custom-file"), default="qosc")
        p.add_argument("--file", help="JSON basis file for --basis custom-file")
        p.add_argument("--tol", type=float, default=None, help="series truncation tolerance")
        p.add_argument("--format", choices=("json", "csv", "text"), default="json")
        p.add_argument("--out", help="write output to this file instead of stdout")
        if phi0:
            p.add_argument("--phi0", type=float, default=phi0_default,
                           help="extension parameter phi0 (reduced to [0, 2 pi))")

    p = sub.add_parser("classify", help="determinate / indeterminate verdict")
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("measure", help="atoms and masses of the phi0 extremal measure")
    common(p, phi0=True, phi0_default=0.0)
    p.add_argument("--window", type=_window, default="auto", help="search bound x_max or 'auto'")
    p.add_argument("--tol-root", type=float, default=1e-12)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("weyl", help="Weyl circle at z = i")
    common(p, phi0=True)
    p.set_defaults(func=cmd_weyl)

    p = sub.add_parser("stieltjes", help="m(z) for the phi0 extension")
    common(p, phi0=True, phi0_default=0.0)
    p.add_argument("--z", type=_complex, required=True, help="complex point, e.g. 0.5+1.0i")
    p.set_defaults(func=cmd_stieltjes)

    p = sub.add_parser("verify", help="identity and oracle gates")
    common(p)
    p.add_argument("--deep", action="store_true", help="also build and verify the phi0 = 0, pi measures")
    p.add_argument("--timing", action="store_true", help="include wall time in the report")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "tol_root", 1.0) is not None and not getattr(args, "tol_root", 1.0) > 0:
        parser.error("--tol-root must be positive")
    if args.tol is not None and not args.tol > 0:
        parser.error("--tol must be positive")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qmoment: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergenceError as exc:
        diag = {"error": "nonconvergence", "message": str(exc), "diagnostics": exc.diagnostics}
        _write(args, emit(diag) + "\n")
        print(f"qmoment: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except ExtrapolationError as exc:
        diag = {"error": "extrapolation", "message": str(exc), "diagnostics": exc.diagnostics}
        _write(args, emit(diag) + "\n")
        print(f"qmoment: {exc}", file=sys.stderr)
        return EXIT_NONCONV


if __name__ == "__main__":
    sys.exit(main())
