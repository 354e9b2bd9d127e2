"""Command-line driver for the bracket, commutator, spectrum and mode checks.

Every command emits records pairing a computed value with a reference value
and its deviation. Output is CSV (header row, fixed column order) or a JSON
array with the same fields. Exit status is 1 when any gated record exceeds
its tolerance, 2 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import poisson

from . import classical, fock, spectrum
from .wirtinger import DomainError, ModePoint, bracket_of_duals, evaluate, finite_difference_partials

COLUMNS = [
    "command",
    "quantity",
    "inputs",
    "value_re",
    "value_im",
    "reference_re",
    "reference_im",
    "source",
    "abs_dev",
    "rel_dev",
    "tolerance",
    "tolerance_kind",
    "gated",
    "ok",
]

PSI_GRID = [k * math.pi / 6 for k in range(7)]


@dataclass
class ResultRecord:
    command: str
    quantity: str
    inputs: dict
    value: Optional[complex]
    reference: Optional[complex]
    source: str
    tolerance: Optional[float] = None
    tolerance_kind: str = "abs"

    @property
    def abs_dev(self) -> Optional[float]:
        if self.value is None or self.reference is None:
            return None
        return abs(complex(self.value) - complex(self.reference))

    @property
    def rel_dev(self) -> Optional[float]:
        d = self.abs_dev
        if d is None or self.reference == 0:
            return None
        return d / abs(complex(self.reference))

    @property
    def gated(self) -> bool:
        return self.tolerance is not None

    @property
    def ok(self) -> Optional[bool]:
        if self.value is None:
            return False
        if not self.gated:
            return None
        if self.tolerance_kind == "rel" and self.reference != 0:
            return self.rel_dev <= self.tolerance
        if self.tolerance_kind == "mixed":
            return self.abs_dev <= self.tolerance * max(1.0, abs(complex(self.reference)))
        return self.abs_dev <= self.tolerance

    def as_dict(self) -> dict:
        def parts(z):
            if z is None:
                return None, None
            z = complex(z)
            return z.real, z.imag

        vr, vi = parts(self.value)
        rr, ri = parts(self.reference)
        return {
            "command": self.command,
            "quantity": self.quantity,
            "inputs": self.inputs,
            "value_re": vr,
            "value_im": vi,
            "reference_re": rr,
            "reference_im": ri,
            "source": self.source,
            "abs_dev": self.abs_dev,
            "rel_dev": self.rel_dev,
            "tolerance": self.tolerance,
            "tolerance_kind": self.tolerance_kind,
            "gated": self.gated,
            "ok": self.ok,
        }


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, dict):
        return json.dumps(v, sort_keys=True)
    return str(v)


def render(records: Sequence[ResultRecord], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([r.as_dict() for r in records], indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in records:
        d = r.as_dict()
        w.writerow([_cell(d[c]) for c in COLUMNS])
    return buf.getvalue()


def _f(x) -> float:
    return float(x)


# --------------------------------------------------------------------------
# brackets


def _fd_bracket(f, g, p: ModePoint, h: float) -> complex:
    fp = finite_difference_partials(f, p, h)
    gp = finite_difference_partials(g, p, h)
    return complex(
        (fp[0] * gp[1] - fp[1] * gp[0] + fp[2] * gp[3] - fp[3] * gp[2]) / 1j
    )


def cmd_brackets(args) -> list[ResultRecord]:
    if args.alpha_plus is not None or args.alpha_minus is not None:
        if args.alpha_plus is None or args.alpha_minus is None:
            raise ValueError("--alpha-plus and --alpha-minus must be given together")
        p = ModePoint(complex(args.alpha_plus), complex(args.alpha_minus))
    else:
        p = classical.steady_state(classical.SteadyState(args.rho, args.theta0))
    rp, rm = (float(r) for r in p.moduli())
    symmetric = abs(rp - rm) <= 1e-12 * max(rp, rm, 1e-300)
    base = {
        "alpha_plus_re": _f(np.real(p.alpha_plus)),
        "alpha_plus_im": _f(np.imag(p.alpha_plus)),
        "alpha_minus_re": _f(np.real(p.alpha_minus)),
        "alpha_minus_im": _f(np.imag(p.alpha_minus)),
    }
    out: list[ResultRecord] = []
    for psi in args.psi:
        inputs = dict(base, psi=_f(psi))

        def rec(q, v, ref, src, tol=None, kind="abs"):
            out.append(ResultRecord("brackets", q, inputs, v, ref, src, tol, kind))

        try:
            half = {}
            for conv in (classical.HALF_ANGLE, classical.FULL_ANGLE):
                tag = conv.value
                x1 = classical.rotating_quadrature(psi, conv)
                x2 = classical.rotating_quadrature(psi + math.pi / 2, conv)
                th = classical.orientation(conv)
                q = complex(bracket_of_duals(evaluate(x1, p), evaluate(x2, p)))
                o = complex(bracket_of_duals(evaluate(x1, p), evaluate(th, p)))
                rec(f"quadrature_bracket[{tag}]", q, _fd_bracket(x1, x2, p, args.h),
                    "finite-difference oracle", args.tol_oracle, "mixed")
                rec(f"orientation_bracket[{tag}]", o, _fd_bracket(x1, th, p, args.h),
                    "finite-difference oracle", args.tol_oracle, "mixed")
                cf_q = classical.closed_form_quadrature_bracket(p)
                cf_o = classical.closed_form_orientation_bracket(p, psi)
                gate = conv is classical.HALF_ANGLE and symmetric
                rec(f"quadrature_bracket[{tag}]", q, cf_q,
                    "closed form quadrature pair" if symmetric else "closed form quadrature pair (asymmetric, recorded)",
                    args.tol if gate else None)
                rec(f"orientation_bracket[{tag}]", o, cf_o.value,
                    "closed form symmetric orientation" if not cf_o.typo_suspect else "literal asymmetric orientation form (typo-suspect)",
                    args.tol if gate else None, "rel")
                if conv is classical.HALF_ANGLE:
                    half["o"] = o
                elif half["o"] != 0:
                    rec("orientation_ratio[full/half]", o / half["o"], 2.0,
                        "convention discriminator")
        except DomainError as exc:
            out.append(ResultRecord("brackets", f"domain_error[{exc.primitive}]", inputs,
                                    None, None, str(exc), 0.0))
    return out


# --------------------------------------------------------------------------
# commutators


def cmd_commutators(args) -> list[ResultRecord]:
    rhos = sorted(args.rho)
    if any(r < 0 for r in rhos):
        raise ValueError("rho must be nonnegative")
    plans = []
    for rho in rhos:
        ap = rho * np.exp(-1j * args.theta0)
        am = rho * np.exp(1j * args.theta0)
        nmaxes = args.nmax if args.nmax else [max(fock.required_n_max(ap, am), 2)]
        for nmax in nmaxes:
            dim = (nmax + 1) * (nmax + 2) // 2
            if dim > fock.max_dimension():
                raise ValueError(f"n_max={nmax} exceeds the dimension cap")
            mean = 2 * rho**2
            tail = float(poisson.sf(nmax, mean)) if mean > 0 else 0.0
            if tail > args.tail_tol:
                raise ValueError(f"rho={rho}, n_max={nmax}: truncation tail {tail:.3g} too large")
            plans.append((rho, nmax, ap, am))

    algebras: dict[int, fock.OrientationAlgebra] = {}
    ladders: dict[int, tuple] = {}
    out: list[ResultRecord] = []
    quad_at: dict[tuple[float, float], list] = {}
    for rho, nmax, ap, am in plans:
        if nmax not in algebras:
            s = fock.basis(nmax)
            algebras[nmax] = fock.orientation_algebra(s, None)
            ladders[nmax] = tuple(fock.annihilation(j, s) for j in (1, -1))
        alg = algebras[nmax]
        st = fock.coherent_state(ap, am, alg.space, args.tail_tol)
        base = {"rho": _f(rho), "theta0": _f(args.theta0), "n_max": nmax, "tail": st.tail}
        for a, tag in zip(ladders[nmax], ("+", "-")):
            v = fock.commutator_expectation(a, a.H, st)
            out.append(ResultRecord("commutators", f"ccr[{tag}]", base, v, 1.0,
                                    "canonical commutator", args.tol_ccr))
        for psi in args.psi:
            inputs = dict(base, psi=_f(psi))
            x1, x2 = alg.quadrature(psi), alg.quadrature(psi + math.pi / 2)
            q = fock.commutator_expectation(x1, x2, st)
            o = fock.commutator_expectation(x1, alg.theta, st)
            out.append(ResultRecord("commutators", "quadrature_commutator", inputs, q, 0.0,
                                    "i*{X,X_perp} correspondence"))
            ref = None if rho == 0 else -1j * math.sin(psi) / (math.sqrt(2) * rho)
            gate = args.tol_orientation if (ref is not None and rho >= args.gate_rho) else None
            out.append(ResultRecord("commutators", "orientation_commutator", inputs, o, ref,
                                    "i*{X,theta} correspondence", gate, "rel"))
            quad_at[(psi, rho)] = [nmax, abs(q)]

    if len(rhos) > 1:
        for psi in args.psi:
            mags = [quad_at[(psi, r)][1] for r in rhos]
            mono = all(b < a for a, b in zip(mags, mags[1:]))
            out.append(ResultRecord(
                "commutators", "quadrature_commutator_monotone",
                {"psi": _f(psi), "rho": [float(r) for r in rhos], "magnitudes": mags},
                1.0 if mono else 0.0, 1.0, "strict decrease in rho", 0.0))
    return out


# --------------------------------------------------------------------------
# spectrum


def cmd_spectrum(args) -> list[ResultRecord]:
    g = args.gamma
    if not g > 0:
        raise ValueError("gamma must be positive")
    if args.omega is not None:
        omegas = list(args.omega)
    else:
        omegas = list(np.linspace(0.0, args.omega_max, args.omega_points))
    out = []
    for psi in args.psi:
        for w in omegas:
            v = float(spectrum.squeezing_spectrum(psi, g, w))
            x2 = (w / (2 * g)) ** 2
            # same spectrum rearranged: cos^2 psi + sin^2 psi x^2 / (1 + x^2)
            ref = math.cos(psi) ** 2 + math.sin(psi) ** 2 * x2 / (1 + x2)
            out.append(ResultRecord("spectrum", "V",
                                    {"psi": _f(psi), "omega_over_gamma": _f(w / g)},
                                    v, ref, "spectrum formula, rearranged", args.tol))
    return out


# --------------------------------------------------------------------------
# homodyne simulation


def cmd_homodyne_sim(args) -> list[ResultRecord]:
    g = args.gamma
    n = 2**args.log2n
    dt = args.dt if args.dt is not None else math.pi / (40 * g)
    params = spectrum.SpectrumParams(args.psi, g)
    ts = spectrum.synthesize_photocurrent(params, n, dt, args.seed)
    est = spectrum.estimate_spectrum(ts, args.segment, args.overlap, args.window)
    ref = spectrum.squeezing_spectrum(args.psi, g, est.frequencies)
    base = {"psi": _f(args.psi), "n": n, "seed": args.seed, "segments": est.segments}
    out = []
    for w, v, se, r in zip(est.frequencies, est.values, est.stderr, ref):
        out.append(ResultRecord("homodyne-sim", "V_estimate",
                                dict(base, omega_over_gamma=_f(w / g), stderr=_f(se)),
                                _f(v), _f(r), "spectrum formula"))
    z = np.abs(est.values - ref) / est.stderr
    coverage = float(np.mean(z < args.sigma))
    out.append(ResultRecord("homodyne-sim", f"fraction_within_{args.sigma:g}_stderr", base,
                            coverage, 1.0, "spectrum formula", 1.0 - args.coverage))
    dip_tol = max(args.dip_tol, args.sigma * float(est.stderr[0]))
    out.append(ResultRecord("homodyne-sim", "V_estimate_dc", base, _f(est.values[0]),
                            _f(ref[0]), "spectrum formula at omega=0", dip_tol))
    band = np.abs(est.frequencies) <= 10 * g
    sup = float(np.max(np.abs(est.values[band] - ref[band])))
    out.append(ResultRecord("homodyne-sim", "sup_deviation_10gamma", base, sup, 0.0, "spectrum formula"))
    high = est.frequencies > 20 * g
    if np.any(high):
        out.append(ResultRecord("homodyne-sim", "band_mean_above_20gamma", base,
                                _f(np.mean(est.values[high])), _f(np.mean(ref[high])),
                                "spectrum formula, band mean", args.band_tol))
    return out


# --------------------------------------------------------------------------
# transverse modes


def cmd_modes(args) -> list[ResultRecord]:
    prm = classical.TransverseModeParams(args.w, args.theta0)
    grid = classical.CartesianGrid(args.extent * args.w, args.n)
    x, y = grid.mesh()
    kinds = list(classical.ModeKind)
    fields = {k: classical.mode_profile(k, prm, x, y) for k in kinds}
    base = {"w": _f(args.w), "theta0": _f(args.theta0), "extent": _f(args.extent), "n": args.n}
    out = []
    pairs = [
        (classical.ModeKind.BRIGHT, classical.ModeKind.BRIGHT, 1.0),
        (classical.ModeKind.BRIGHT, classical.ModeKind.LO, 0.0),
        (classical.ModeKind.LO, classical.ModeKind.BRIGHT, 0.0),
        (classical.ModeKind.LO, classical.ModeKind.LO, 1.0),
        (classical.ModeKind.L_PLUS, classical.ModeKind.L_PLUS, 1.0),
        (classical.ModeKind.L_MINUS, classical.ModeKind.L_MINUS, 1.0),
        (classical.ModeKind.L_PLUS, classical.ModeKind.L_MINUS, 0.0),
    ]
    for a, b, ref in pairs:
        ov = classical.overlap(fields[a], fields[b], grid)
        out.append(ResultRecord("modes", f"overlap[{a.value},{b.value}]",
                                dict(base, quadrature_error=ov.error_estimate),
                                ov.value, ref, "orthonormality", args.tol))

    # sampled maps against polar closed forms
    axis = np.linspace(-args.map_extent * args.w, args.map_extent * args.w, args.map_n)
    w = args.w
    for kind in kinds:
        for yy in axis:
            for xx in axis:
                amp = complex(classical.mode_profile(kind, prm, xx, yy))
                r, phi = math.hypot(xx, yy), math.atan2(yy, xx)
                radial = r * math.exp(-r * r / (2 * w * w)) / (math.sqrt(math.pi) * w * w)
                if kind is classical.ModeKind.L_PLUS:
                    ref = radial * complex(math.cos(phi), math.sin(phi))
                elif kind is classical.ModeKind.L_MINUS:
                    ref = radial * complex(math.cos(phi), -math.sin(phi))
                elif kind is classical.ModeKind.BRIGHT:
                    ref = math.sqrt(2) * radial * math.cos(phi - args.theta0)
                else:
                    ref = math.sqrt(2) * radial * math.sin(phi - args.theta0)
                out.append(ResultRecord("modes", f"profile[{kind.value}]",
                                        {"x": _f(xx), "y": _f(yy), "theta0": _f(args.theta0)},
                                        amp, ref, "polar closed form", 1e-12))
    return out


# --------------------------------------------------------------------------


def _complex(s: str) -> complex:
    return complex(s.replace(" ", "").replace("i", "j"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dopocanon", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--output", "-o", help="output file (default: stdout)")

    p = sub.add_parser("brackets", help="classical Poisson brackets vs closed forms and oracle")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--theta0", type=float, default=0.0)
    p.add_argument("--alpha-plus", type=_complex)
    p.add_argument("--alpha-minus", type=_complex)
    p.add_argument("--psi", type=float, nargs="+", default=PSI_GRID)
    p.add_argument("--h", type=float, default=1e-6)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--tol-oracle", type=float, default=1e-6)
    p.set_defaults(func=cmd_brackets)
    common(p)

    p = sub.add_parser("commutators", help="truncated Fock-space commutator expectations")
    p.add_argument("--rho", type=float, nargs="+", default=[1.0, 2.0, 3.0])
    p.add_argument("--theta0", type=float, default=0.0)
    p.add_argument("--nmax", type=int, nargs="+")
    p.add_argument("--psi", type=float, nargs="+", default=[math.pi / 2])
    p.add_argument("--tail-tol", type=float, default=1e-8)
    p.add_argument("--tol-ccr", type=float, default=1e-6)
    p.add_argument("--tol-orientation", type=float, default=0.15)
    p.add_argument("--gate-rho", type=float, default=3.0,
                   help="gate the orientation commutator only for rho at or above this")
    p.set_defaults(func=cmd_commutators)
    common(p)

    p = sub.add_parser("spectrum", help="tabulate the squeezing spectrum")
    p.add_argument("--psi", type=float, nargs="+", default=[math.pi / 2])
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--omega", type=float, nargs="+")
    p.add_argument("--omega-max", type=float, default=10.0)
    p.add_argument("--omega-points", type=int, default=101)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_spectrum)
    common(p)

    p = sub.add_parser("homodyne-sim", help="synthesize a photocurrent and re-estimate its spectrum")
    p.add_argument("--psi", type=float, default=math.pi / 2)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--log2n", type=int, default=20)
    p.add_argument("--dt", type=float)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--segment", type=int, default=4096)
    p.add_argument("--overlap", type=float, default=0.5)
    p.add_argument("--window", choices=["hann", "rectangular"], default="hann")
    p.add_argument("--sigma", type=float, default=5.0)
    p.add_argument("--coverage", type=float, default=0.99)
    p.add_argument("--dip-tol", type=float, default=0.05)
    p.add_argument("--band-tol", type=float, default=0.05)
    p.set_defaults(func=cmd_homodyne_sim)
    common(p)

    p = sub.add_parser("modes", help="transverse mode profiles and Gram matrix")
    p.add_argument("--w", type=float, default=1.0)
    p.add_argument("--theta0", type=float, default=0.0)
    p.add_argument("--extent", type=float, default=8.0, help="grid half-width in units of w")
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--map-n", type=int, default=33)
    p.add_argument("--map-extent", type=float, default=3.0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_modes)
    common(p)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        records = args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = render(records, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    failed = [r for r in records if r.gated and not r.ok]
    for r in failed:
        print(f"FAIL {r.command} {r.quantity} {json.dumps(r.inputs, sort_keys=True)}", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
