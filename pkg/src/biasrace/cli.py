"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 accuracy or scale error, 4 verification failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_INPUT, EXIT_ACCURACY, EXIT_VERIFY = 0, 2, 3, 4
SCHEMA = 1
MAX_RHO_FOURIER = 64


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _round(obj):
    """Floats to 12 significant digits, recursively."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return str(obj)
        return float(f"{obj:.12g}")
    if isinstance(obj, (np.floating,)):
        return _round(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _emit(payload: dict, args, text=None) -> None:
    payload = dict(payload)
    payload.setdefault("schema", SCHEMA)
    if args.format == "text" and text is not None:
        out = text(payload) + "\n"
    else:
        out = json.dumps(_round(payload), sort_keys=True, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)


def _modulus(q: int):
    from .arith import as_modulus

    if q < 3:
        raise CliError(f"q={q}: no race (the group of units mod {q} is trivial)")
    return as_modulus(q)


def _load_zero_dir(path) -> dict:
    from .zeros import load_zeros

    p = Path(path)
    if not p.is_dir():
        raise CliError(f"zero directory {path} does not exist")
    out = {}
    for f in sorted(p.glob("*.zeros")):
        zs = load_zeros(f, verify=True)
        if zs.key in out and out[zs.key].height >= zs.height:
            continue
        out[zs.key] = zs
    return out


def default_height(q) -> float:
    """Height used when none is given: 200 up to rho = 16, then lower for the larger rows."""
    from .arith import as_modulus
    from .zeros import DEFAULT_HEIGHT

    r = as_modulus(q).rho
    if r <= 16:
        return DEFAULT_HEIGHT
    return 100.0 if r <= 32 else 50.0


# ---------------------------------------------------------------------------
# zeros


def cmd_zeros(args) -> int:
    from .characters import enumerate_real_characters, is_fundamental_discriminant
    from .zeros import _cache_name, find_zeros, save_zeros

    if args.discriminant is not None:
        if not is_fundamental_discriminant(args.discriminant) or args.discriminant == 1:
            raise CliError(f"{args.discriminant} is not a non-trivial fundamental discriminant")
        ds = [args.discriminant]
    else:
        ds = [c.discriminant for c in enumerate_real_characters(_modulus(args.q).q)[1:]]
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise CliError(f"cannot create {out}: {e.strerror}") from None
    if not os.access(out, os.W_OK):
        raise CliError(f"no write permission for {out}")
    rows, bad = [], []
    for d in ds:
        t0 = time.perf_counter()
        zs = find_zeros(d, args.T)
        rows.append({"d": d, "zeros": len(zs), "height": zs.height, "verified": zs.verified,
                     "argument_principle_count": zs.expected, "seconds": time.perf_counter() - t0})
        if not zs.verified:
            bad.append(d)
            continue
        try:
            save_zeros(zs, out / f"{_cache_name(d)}_T{format(args.T, 'g')}.zeros")
        except OSError as e:
            raise CliError(f"cannot write zero file: {e.strerror}") from None
    _emit({"command": "zeros", "characters": rows}, args,
          lambda p: "\n".join(f"d={r['d']}: {r['zeros']} zeros to T={r['height']:g} verified={r['verified']}"
                              for r in p["characters"]))
    if bad:
        print(f"verification failed for discriminants {bad}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


# ---------------------------------------------------------------------------
# density


def _density_payload(q: int, args) -> dict:
    from .dist import (berry_esseen_gap, bias_ratio, build_model_nr_r, chebyshev_lower_bound,
                       density_fourier, density_gaussian, density_montecarlo, montgomery_odlyzko_bounds)

    m = _modulus(q)
    method = args.method
    payload = {"command": "density", "q": m.q, "method": method}
    if method in ("gaussian", "all"):
        g = density_gaussian(m)
        payload["gaussian"] = {"delta": g.delta, "delta_remark_form": g.remark, "B": g.B,
                               "warning": "approximation without an error budget"}
        if method == "gaussian":
            return payload
    if m.rho > MAX_RHO_FOURIER:
        raise CliError(f"q={m.q} has rho={m.rho} real characters; beyond desk scale for zero-based "
                       "methods (use --method gaussian)", EXIT_ACCURACY)
    T = args.T if args.T is not None else default_height(m)
    zeros = _load_zero_dir(args.zeros_dir) if args.zeros_dir else None
    model = build_model_nr_r(m, zeros=zeros, T=T)
    payload["zero_height"] = model.height
    payload["zeros_used"] = model.n_terms
    if method in ("fourier", "all"):
        payload["fourier"] = density_fourier(model, args.accuracy).to_json()
    if method in ("montecarlo", "all"):
        payload["montecarlo"] = density_montecarlo(model, args.samples, args.seed).to_json()
    if method == "all":
        be = berry_esseen_gap(model)
        mo = montgomery_odlyzko_bounds(model)
        payload["diagnostics"] = {
            "mean": model.mean,
            "variance": model.variance,
            "bias_ratio": bias_ratio(m, model).exact,
            "chebyshev_lower_bound": chebyshev_lower_bound(model),
            "mo_upper_tail": None if mo is None else mo.upper,
            "berry_esseen_gap": be.gap,
        }
    return payload


def _density_text(p: dict) -> str:
    lines = [f"q = {p['q']}"]
    for key in ("fourier", "montecarlo"):
        if key in p:
            r = p[key]
            err = r["err_zero_truncation"] + r["err_frequency_truncation"] + r["err_quadrature"]
            lines.append(f"{key}: delta = {r['delta']:.12g} +- {err:.3g}")
    if "gaussian" in p:
        lines.append(f"gaussian: delta ~ {p['gaussian']['delta']:.12g} ({p['gaussian']['warning']})")
    return "\n".join(lines)


def cmd_density(args) -> int:
    _emit(_density_payload(args.q, args), args, _density_text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# table


def table_rows(kmax: int, T: float | None = None, accuracy: float = 1e-6) -> list[dict]:
    from .arith import half_primorial, ratio_rho_logradical
    from .dist import build_model_nr_r, density_fourier
    from .reference import REFERENCE_TABLE

    rows = []
    for k, (q, (omega, ratio_ref, delta_ref)) in enumerate(sorted(REFERENCE_TABLE.items()), 1):
        m = half_primorial(k)
        assert m.q == q
        row = {"q": q, "omega": m.omega, "rho_over_log_radical": ratio_rho_logradical(m),
               "reference_ratio": ratio_ref, "reference_delta": delta_ref}
        if k <= kmax:
            h = T if T is not None else default_height(m)
            res = density_fourier(build_model_nr_r(m, T=h), accuracy)
            row.update(delta=res.delta, error=res.total_error, zero_height=h,
                       abs_difference=abs(res.delta - delta_ref))
        else:
            row.update(delta=None, status="skipped (scale)")
        rows.append(row)
    return rows


def _table_text(p: dict) -> str:
    lines = [f"{'q':>10} {'omega':>5} {'rho/log':>8} {'ref':>8} {'delta':>16} {'ref delta':>16} {'|diff|':>10}"]
    for r in p["rows"]:
        d = f"{r['delta']:.12g}" if r.get("delta") is not None else r.get("status", "")
        diff = f"{r['abs_difference']:.2e}" if r.get("abs_difference") is not None else ""
        lines.append(f"{r['q']:>10} {r['omega']:>5} {r['rho_over_log_radical']:>8.4f} {r['reference_ratio']:>8.2f} "
                     f"{d:>16} {r['reference_delta']:>16.12g} {diff:>10}")
    return "\n".join(lines)


def cmd_table(args) -> int:
    if args.kmax < 0 or args.kmax > 8:
        raise CliError("kmax must be between 0 and 8")
    if args.kmax > 6:
        raise CliError("rows beyond 255255 are out of desk scale for the Fourier method", EXIT_ACCURACY)
    if args.kmax > 5:
        warnings.warn("kmax > 5 is an extended run (tens of minutes)", stacklevel=1)
    rows = table_rows(args.kmax, args.T, args.accuracy) if args.kmax > 0 else []
    if args.plot and rows:
        from .plotting import plot_table

        plot_table(rows, args.plot)
    _emit({"command": "table", "kmax": args.kmax, "rows": rows}, args, _table_text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# race


def cmd_race(args) -> int:
    from .empirical import log_density_estimate, sieve_race, trace_moments

    m = _modulus(args.q)
    try:
        trace = sieve_race(m, args.xmax, args.grid)
    except ValueError as e:
        code = EXIT_ACCURACY if "desk scale" in str(e) else EXIT_INPUT
        raise CliError(str(e), code) from None
    if args.csv:
        trace.to_csv(args.csv)
    if args.plot:
        from .plotting import plot_race_trace

        plot_race_trace(trace, args.plot)
    mom = trace_moments(trace)
    payload = {
        "command": "race", "q": m.q, "x_max": trace.x_max, "checkpoints": len(trace.checkpoints),
        "pi_NR": int(trace.pi_nr[-1]), "pi_R": int(trace.pi_r[-1]),
        "log_density_estimate": log_density_estimate(trace),
        "mean_E": mom.mean, "variance_E": mom.variance, "expected_mean": mom.expected_mean,
        "first_crossing": trace.crossings, "csv": args.csv,
    }
    _emit(payload, args, lambda p: "\n".join(f"{k}: {v}" for k, v in sorted(p.items())))
    return EXIT_OK


# ---------------------------------------------------------------------------
# criteria


def _constant_shape(spec):
    """(k_N, k_R) if the weights are constant on non-residues and on residues, else None."""
    eps = spec.eps.astype(bool)
    w = spec.weights
    wn = {x for x, e in zip(w, eps) if not e}
    wr = {x for x, e in zip(w, eps) if e}
    if len(wn) == 1 and len(wr) == 1 and next(iter(wn)) > 0:
        return int((~eps).sum()), int(eps.sum())
    return None


def criteria_payload(spec, epsilon: float, K1: float, K2: float) -> dict:
    from .general import (check_bias_criterion, check_constant_coefficient_race, check_limitation,
                          clt_error_diagnostic, exact_variance, variance_bounds)

    out = {"command": "criteria", "q": spec.q.q, "k": spec.k, "k_R": spec.k_R,
           "sum_eps_alpha": str(spec.residue_weight), "symmetric": spec.symmetric}
    if spec.symmetric:
        out["note"] = "sum eps_i alpha_i = 0: the race is unbiased"
        return out
    v = check_bias_criterion(spec, epsilon)
    out["bias_criterion"] = v.to_json()
    # the criterion holds exactly when epsilon exceeds this value
    lo = spec.sum_sq / spec.residue_weight**2 * spec.q.euler_phi * math.log(spec.q.q) / spec.q.rho**2
    out["bias_criterion"]["smallest_epsilon"] = float(lo)
    shape = _constant_shape(spec)
    if shape is not None:
        out["constant_coefficient"] = check_constant_coefficient_race(spec.q, shape[0], shape[1], epsilon).to_json()
    else:
        out["constant_coefficient"] = {"applicable": False}
    try:
        out["limitation"] = check_limitation(spec, K1, K2).to_json()
    except ValueError as e:
        out["limitation"] = {"applicable": False, "reason": str(e)}
    out["clt_error_shape"] = clt_error_diagnostic(spec)
    if spec.k <= 2000:
        vb = variance_bounds(spec)
        out["variance"] = {"value": exact_variance(spec), "lower_shape": vb.lower, "upper_shape": vb.upper}
    return out


def _criteria_text(p: dict) -> str:
    lines = [f"q = {p['q']}, k = {p['k']}, k_R = {p['k_R']}"]
    for key in ("constant_coefficient", "bias_criterion", "limitation"):
        v = p.get(key)
        if v and "lhs" in v:
            op = "<=" if key == "limitation" else "<"
            lines.append(f"{key}: {v['lhs']:.12g} {op} {v['rhs']:.12g} -> {'holds' if v['holds'] else 'fails'}")
        elif v:
            lines.append(f"{key}: not applicable")
    return "\n".join(lines)


def cmd_criteria(args) -> int:
    from .general import RaceSpec, SpecError, nr_r_spec

    if args.nr_r is not None:
        spec = nr_r_spec(_modulus(args.nr_r))
    elif args.spec is not None:
        try:
            text = Path(args.spec).read_text(encoding="utf-8")
        except OSError as e:
            raise CliError(f"cannot read {args.spec}: {e.strerror}") from None
        try:
            spec = RaceSpec.from_json(text)
        except SpecError as e:
            raise CliError(f"{args.spec}: {e}") from None
    else:
        raise CliError("give a spec file or --nr-r Q")
    _emit(criteria_payload(spec, args.epsilon, args.K1, args.K2), args, _criteria_text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# report


def cmd_report(args) -> int:
    """Density with diagnostics plus figures, all written into one directory."""
    from .dist import build_model_nr_r
    from .lfunc import LFunction
    from .plotting import plot_characteristic_function, plot_hardy, plot_normalized_cdf, plot_race_trace
    from .zeros import cached_zeros

    m = _modulus(args.q)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    args.method = "all"
    payload = _density_payload(m.q, args)
    files = []
    if "fourier" in payload:
        T = payload["zero_height"]
        model = build_model_nr_r(m, T=T)
        files.append(plot_normalized_cdf(model, out / "normalized_cdf.png"))
        files.append(plot_characteristic_function(model, out / "characteristic_function.png"))
        from .characters import enumerate_real_characters

        d = enumerate_real_characters(m.q)[1].discriminant
        files.append(plot_hardy(LFunction.from_discriminant(d), cached_zeros(d, T), out / f"hardy_{d}.png"))
    if args.xmax:
        from .empirical import sieve_race

        tr = sieve_race(m, args.xmax)
        tr.to_csv(out / "race.csv")
        files.append(plot_race_trace(tr, out / "race.png"))
    payload["figures"] = sorted(str(f.name) for f in files)
    (out / "density.json").write_text(json.dumps(_round(payload), sort_keys=True, indent=2) + "\n")
    _emit({"command": "report", "q": m.q, "directory": str(out), "figures": payload["figures"]}, args)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    def common(parser, default):
        parser.add_argument("--cache-dir", default=default(None),
                            help="zero cache directory (overrides $BIASRACE_CACHE_DIR)")
        parser.add_argument("--workers", type=int, default=default(1), help="worker budget for numba kernels")
        parser.add_argument("--format", choices=("json", "text"), default=default("json"))
        parser.add_argument("--output", "-o", default=default(None), help="write the result here instead of stdout")

    p = argparse.ArgumentParser(prog="biasrace", description="Prime race densities from L-function zeros.")
    common(p, lambda v: v)
    # the same options are accepted after the subcommand
    shared = argparse.ArgumentParser(add_help=False)
    common(shared, lambda v: argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **k: _add(*a, parents=[shared], **k)

    z = sub.add_parser("zeros", help="locate and verify zeros, one file per primitive character")
    g = z.add_mutually_exclusive_group(required=True)
    g.add_argument("-q", type=int)
    g.add_argument("-d", "--discriminant", type=int)
    z.add_argument("-T", type=float, required=True)
    z.add_argument("--out", default=".")
    z.set_defaults(func=cmd_zeros)

    d = sub.add_parser("density", help="delta(q; NR, R) with its error budget")
    d.add_argument("-q", type=int, required=True)
    d.add_argument("-T", type=float, default=None, help="zero height")
    d.add_argument("--accuracy", type=float, default=1e-6)
    d.add_argument("--method", choices=("fourier", "montecarlo", "gaussian", "all"), default="fourier")
    d.add_argument("--samples", type=int, default=10**6)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--zeros-dir", help="read zeros from files instead of computing them")
    d.set_defaults(func=cmd_density)

    t = sub.add_parser("table", help="half-primorial table against the reference values")
    t.add_argument("--kmax", type=int, default=4)
    t.add_argument("-T", type=float, default=None)
    t.add_argument("--accuracy", type=float, default=1e-6)
    t.add_argument("--plot", help="PNG file for a figure of 1 - delta")
    t.set_defaults(func=cmd_table)

    r = sub.add_parser("race", help="sieve the actual race up to xmax")
    r.add_argument("-q", type=int, required=True)
    r.add_argument("--xmax", type=float, required=True)
    r.add_argument("--grid", type=float, default=1.001)
    r.add_argument("--csv", help="CSV trace output")
    r.add_argument("--plot", help="PNG file for E_q(x)")
    r.set_defaults(func=cmd_race)

    c = sub.add_parser("criteria", help="bias and no-bias criteria for a weighted race")
    c.add_argument("spec", nargs="?", help="JSON file {q, classes, weights}")
    c.add_argument("--nr-r", type=int, help="use the residue/non-residue race mod Q")
    c.add_argument("--epsilon", type=float, default=0.25)
    c.add_argument("--K1", type=float, default=1.0)
    c.add_argument("--K2", type=float, default=1.0)
    c.set_defaults(func=cmd_criteria)

    rp = sub.add_parser("report", help="density, diagnostics and figures into a directory")
    rp.add_argument("-q", type=int, required=True)
    rp.add_argument("--out", required=True)
    rp.add_argument("-T", type=float, default=None)
    rp.add_argument("--accuracy", type=float, default=1e-6)
    rp.add_argument("--samples", type=int, default=10**6)
    rp.add_argument("--seed", type=int, default=0)
    rp.add_argument("--zeros-dir", default=None)
    rp.add_argument("--xmax", type=float, default=None)
    rp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    from .general import SpecError
    from .lfunc import AccuracyError
    from .zeros import MultipleZeroError, ZeroFileError
    from .dist import MissingZerosError

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    if args.cache_dir:
        os.environ["BIASRACE_CACHE_DIR"] = args.cache_dir
    if args.workers < 1:
        print("error: --workers must be positive", file=sys.stderr)
        return EXIT_INPUT
    if getattr(args, "accuracy", 1.0) <= 0:
        print("error: accuracy must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        if args.workers > 1:
            import numba

            numba.set_num_threads(min(args.workers, numba.config.NUMBA_NUM_THREADS))
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except AccuracyError as e:
        msg = f"error: {e}"
        if e.required_height:
            msg += f" (required height {e.required_height:.4g})"
        print(msg, file=sys.stderr)
        return EXIT_ACCURACY
    except MissingZerosError as e:
        print(f"error: {e.args[0]}", file=sys.stderr)
        return EXIT_VERIFY
    except (ZeroFileError, MultipleZeroError, SpecError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OverflowError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ACCURACY


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
