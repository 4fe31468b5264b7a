"""Command-line front door.

Each subcommand reads one strict JSON problem file, dispatches to the
computational modules, and prints a deterministic JSON report on stdout.
Exit codes: 0 success, 2 validation error, 3 numerical ambiguity,
4 precondition failure.  Error payloads are JSON with "reason" and
"where".

Input files carry an explicit "version": 1 and reject unknown fields.
Real matrices are row-major nested arrays; complex matrices use an
[re, im] pair per entry; Lagrangian frames are 2n rows by n columns.

--refine-factor r (r > 1) treats sampled Lagrangian or unitary paths as
nodes of a piecewise-geodesic interpolation in the symmetric-unitary
model, inserting r - 1 intermediate samples per gap and attaching the
interpolant as a refiner.  With the default r = 1 the samples are used
as-is and under-resolved inputs fail with an ambiguity error rather
than being silently interpolated.  The crossings subcommand always
interpolates (root isolation needs a continuous path).
"""

import argparse
import json
import sys

import numpy as np

from . import __version__
from .core import (
    DEFAULT_TOL,
    SymplecticSpace,
    horizontal_frame,
    intersection_dim,
    lagrangian,
    standard_space,
)
from .errors import AmbiguityError, PreconditionError, ValidationError
from .indices import (
    LiftedUnitary,
    _principal_log_factors,
    _souriau_segment,
    _transversality_margin,
    complex_kashiwara,
    hormander,
    kashiwara,
    leray,
    leray_general,
)
from .crossings import crossing_form, find_crossings, maslov_via_crossings
from .paths import LagrangianPath, UnitaryPath, maslov, unitary_maslov
from .pairs import gamma_reduce_path, pair_maslov, polarized_pair
from .souriau import souriau
from .spectral import (
    boundary_problem,
    cauchy_data_path,
    eigenvalue_trace,
    spectral_flow,
)

_PROFILES = {"strict": 0.1, "default": 1.0, "loose": 10.0}


# --------------------------------------------------------------------------
# strict JSON parsing
# --------------------------------------------------------------------------


def _fail(msg, where):
    raise ValidationError(msg, where=where)


def _check_keys(obj, required, optional, where):
    if not isinstance(obj, dict):
        _fail("expected a JSON object", where)
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        _fail(f"unknown fields: {sorted(unknown)}", where)
    missing = set(required) - set(obj)
    if missing:
        _fail(f"missing fields: {sorted(missing)}", where)


def _load_input(path):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        _fail(f"cannot read input: {exc}", path)
    except json.JSONDecodeError as exc:
        _fail(f"not valid JSON: {exc}", path)
    if not isinstance(obj, dict) or obj.get("version") != 1:
        _fail('input must be an object with "version": 1', path)
    return obj


def _real_number(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        _fail("expected a number", where)
    return float(x)


def _real_matrix(obj, shape, where):
    try:
        M = np.array(obj, dtype=float)
    except (TypeError, ValueError):
        _fail("expected a numeric matrix", where)
    if M.ndim != 2 or (shape is not None and M.shape != shape):
        _fail(
            f"matrix has shape {M.shape}, expected {shape}",
            where,
        )
    if not np.all(np.isfinite(M)):
        _fail("matrix entries must be finite", where)
    return M


def _complex_matrix(obj, shape, where):
    try:
        A = np.array(obj, dtype=float)
    except (TypeError, ValueError):
        _fail("expected entries as [re, im] pairs", where)
    if A.ndim != 3 or A.shape[2] != 2 or (
        shape is not None and A.shape[:2] != shape
    ):
        _fail("expected a matrix of [re, im] pairs", where)
    if not np.all(np.isfinite(A)):
        _fail("matrix entries must be finite", where)
    return A[..., 0] + 1j * A[..., 1]


def _space_of(obj, where):
    n = obj.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        _fail('"n" must be a positive integer', where)
    if "space" in obj:
        sp = obj["space"]
        _check_keys(sp, ["J", "G"], [], where + ".space")
        return SymplecticSpace(
            J=_real_matrix(sp["J"], (2 * n, 2 * n), where + ".space.J"),
            G=_real_matrix(sp["G"], (2 * n, 2 * n), where + ".space.G"),
        )
    return standard_space(n)


def _frame(obj, space, where):
    M = _real_matrix(obj, (2 * space.n, space.n), where)
    return lagrangian(space, M)


def _time_samples(obj, where):
    if not isinstance(obj, list) or len(obj) < 2:
        _fail("path needs at least two samples", where)
    return obj


def _lagrangian_nodes(obj, space, where):
    ts, frames = [], []
    for i, item in enumerate(_time_samples(obj, where)):
        loc = f"{where}[{i}]"
        _check_keys(item, ["t", "frame"], [], loc)
        ts.append(_real_number(item["t"], loc + ".t"))
        frames.append(_frame(item["frame"], space, loc + ".frame"))
    return ts, frames


def _unitary_nodes(obj, n, where):
    ts, mats = [], []
    for i, item in enumerate(_time_samples(obj, where)):
        loc = f"{where}[{i}]"
        _check_keys(item, ["t", "U"], [], loc)
        ts.append(_real_number(item["t"], loc + ".t"))
        mats.append(_complex_matrix(item["U"], (n, n), loc + ".U"))
    return ts, mats


# --------------------------------------------------------------------------
# piecewise-geodesic densification (--refine-factor)
# --------------------------------------------------------------------------


def _segment_times(ts, factor):
    out = []
    for i in range(len(ts) - 1):
        for k in range(max(1, factor)):
            out.append(ts[i] + (ts[i + 1] - ts[i]) * k / max(1, factor))
    out.append(ts[-1])
    return out


def _lagrangian_path(ts, frames, factor, tol):
    if factor <= 1:
        return LagrangianPath(
            samples=tuple(zip(ts, frames)), refiner=None
        )
    ref = horizontal_frame(frames[0].space)
    ws = [souriau(ref, f) for f in frames]
    segs = []
    for i in range(len(ws) - 1):
        seg = _souriau_segment(ref, ws[i], ws[i + 1], tol)
        if seg is None:
            raise PreconditionError(
                "adjacent samples are antipodal in the unitary model; "
                "supply intermediate samples",
                where=f"path[{i}]",
            )
        segs.append(seg)

    def refiner(t):
        i = min(
            max(int(np.searchsorted(ts, t, side="right")) - 1, 0),
            len(segs) - 1,
        )
        tau = (t - ts[i]) / (ts[i + 1] - ts[i])
        return segs[i].at(min(max(tau, 0.0), 1.0))

    nodes = _segment_times(ts, factor)
    return LagrangianPath(
        samples=tuple((t, refiner(t)) for t in nodes), refiner=refiner
    )


def _unitary_cli_path(ts, mats, factor, tol):
    if factor <= 1:
        return UnitaryPath(samples=tuple(zip(ts, mats)), refiner=None)
    factors = []
    for i in range(len(mats) - 1):
        f = _principal_log_factors(mats[i].conj().T @ mats[i + 1], tol)
        if f is None:
            raise PreconditionError(
                "adjacent unitaries are antipodal; supply intermediate "
                "samples",
                where=f"path[{i}]",
            )
        factors.append(f)

    def refiner(t):
        i = min(
            max(int(np.searchsorted(ts, t, side="right")) - 1, 0),
            len(factors) - 1,
        )
        tau = (t - ts[i]) / (ts[i + 1] - ts[i])
        tau = min(max(tau, 0.0), 1.0)
        Z, theta = factors[i]
        return mats[i] @ ((Z * np.exp(1j * tau * theta)) @ Z.conj().T)

    nodes = _segment_times(ts, factor)
    return UnitaryPath(
        samples=tuple((t, refiner(t)) for t in nodes), refiner=refiner
    )


# --------------------------------------------------------------------------
# deterministic JSON emission
# --------------------------------------------------------------------------


def _fmt(obj):
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not np.isfinite(x):
            raise ValidationError("non-finite value in report", where="emit")
        return "%.17g" % x
    if isinstance(obj, str):
        return json.dumps(obj)
    if obj is None:
        return "null"
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        return "[" + ",".join(_fmt(x) for x in items) + "]"
    if isinstance(obj, dict):
        parts = (
            json.dumps(str(k)) + ":" + _fmt(v)
            for k, v in sorted(obj.items())
        )
        return "{" + ",".join(parts) + "}"
    raise ValidationError(
        f"cannot serialize {type(obj).__name__}", where="emit"
    )


def _emit(report):
    sys.stdout.write(_fmt(report) + "\n")


def _frame_out(frame):
    return [[float(x) for x in row] for row in frame.F]


def _write_trace(path, header, rows):
    lines = [",".join(header)]
    width = len(header)
    for row in rows:
        cells = ["%.17g" % float(x) for x in row]
        cells += [""] * (width - len(cells))
        lines.append(",".join(cells))
    try:
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        _fail(f"cannot write trace: {exc}", path)


def _phase_trace_rows(trace):
    header = ["t"] + [
        f"phase_{k + 1}" for k in range(len(trace.values[0]))
    ]
    rows = [
        [t] + list(phases) for t, phases in zip(trace.ts, trace.values)
    ]
    return header, rows


def _eigen_trace_rows(trace):
    width = max((len(s) for _, s in trace), default=0)
    header = ["t"] + [f"s_{k + 1}" for k in range(width)]
    rows = [[t] + list(s) for t, s in trace]
    return header, rows


# --------------------------------------------------------------------------
# subcommand handlers
# --------------------------------------------------------------------------


def _cmd_maslov(obj, args, tol):
    _check_keys(
        obj, ["version", "n", "reference", "path"], ["space"], "input"
    )
    space = _space_of(obj, "input")
    lam = _frame(obj["reference"], space, "input.reference")
    ts, frames = _lagrangian_nodes(obj["path"], space, "input.path")
    path = _lagrangian_path(ts, frames, args.refine_factor, tol)
    report = maslov(path, lam, tol)
    return {"value": int(report.value)}, report.trace


def _cmd_unitary_maslov(obj, args, tol):
    _check_keys(obj, ["version", "n", "path"], [], "input")
    n = obj["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        _fail('"n" must be a positive integer', "input")
    ts, mats = _unitary_nodes(obj["path"], n, "input.path")
    path = _unitary_cli_path(ts, mats, args.refine_factor, tol)
    report = unitary_maslov(path, tol)
    return {"value": int(report.value)}, report.trace


def _cmd_crossings(obj, args, tol):
    _check_keys(
        obj,
        ["version", "n", "reference", "path"],
        ["space", "richardson"],
        "input",
    )
    space = _space_of(obj, "input")
    lam = _frame(obj["reference"], space, "input.reference")
    ts, frames = _lagrangian_nodes(obj["path"], space, "input.path")
    path = _lagrangian_path(ts, frames, max(2, args.refine_factor), tol)
    richardson = obj.get("richardson", False)
    if not isinstance(richardson, bool):
        _fail('"richardson" must be a boolean', "input.richardson")
    rows = []
    all_regular = True
    for t_star in find_crossings(path, lam, tol):
        c = crossing_form(path, lam, t_star, tol=tol, richardson=richardson)
        p, q = c.signature
        all_regular = all_regular and c.regular
        rows.append(
            {
                "t_star": float(c.t_star),
                "dim": int(c.dim),
                "signature": [int(p), int(q)],
                "regular": bool(c.regular),
            }
        )
    out = {"crossings": rows}
    if all_regular:
        out["value"] = int(maslov_via_crossings(path, lam, tol))
    else:
        out["value"] = None
    return out, None


def _cmd_kashiwara(obj, args, tol):
    _check_keys(obj, ["version", "n", "frames"], ["space"], "input")
    space = _space_of(obj, "input")
    fr = obj["frames"]
    if not isinstance(fr, list) or len(fr) != 3:
        _fail('"frames" must list exactly three frames', "input.frames")
    f1, f2, f3 = (
        _frame(f, space, f"input.frames[{i}]") for i, f in enumerate(fr)
    )
    sig = kashiwara(f1, f2, f3, tol)
    return {"index": int(sig.signature), "nulls": int(sig.nulls)}, None


def _cmd_complex_kashiwara(obj, args, tol):
    _check_keys(
        obj, ["version", "n", "unitaries"], ["reference", "space"], "input"
    )
    n = obj["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        _fail('"n" must be a positive integer', "input")
    us = obj["unitaries"]
    if not isinstance(us, list) or len(us) != 3:
        _fail(
            '"unitaries" must list exactly three matrices',
            "input.unitaries",
        )
    u1, u2, u3 = (
        _complex_matrix(u, (n, n), f"input.unitaries[{i}]")
        for i, u in enumerate(us)
    )
    lam = None
    if "reference" in obj:
        space = _space_of(obj, "input")
        lam = _frame(obj["reference"], space, "input.reference")
    sig = complex_kashiwara(u1, u2, u3, lam=lam, tol=tol)
    return {"index": int(sig.signature), "nulls": int(sig.nulls)}, None


def _lift(obj, n, where):
    _check_keys(obj, ["U", "alpha"], [], where)
    return LiftedUnitary(
        U=_complex_matrix(obj["U"], (n, n), where + ".U"),
        alpha=_real_number(obj["alpha"], where + ".alpha"),
    )


def _cmd_leray(obj, args, tol):
    _check_keys(
        obj, ["version", "n", "lift1", "lift2"], ["probe"], "input"
    )
    n = obj["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        _fail('"n" must be a positive integer', "input")
    l1 = _lift(obj["lift1"], n, "input.lift1")
    l2 = _lift(obj["lift2"], n, "input.lift2")
    probe = None
    if "probe" in obj:
        probe = _complex_matrix(obj["probe"], (n, n), "input.probe")
    if probe is None and _transversality_margin(l1.U, l2.U) > tol.transversal:
        return {"value": float(leray(l1, l2, tol))}, None
    value = leray_general(l1, l2, probe=probe, seed=args.seed, tol=tol)
    return {"value": float(value), "probe_seed": int(args.seed)}, None


def _cmd_hormander(obj, args, tol):
    _check_keys(
        obj,
        ["version", "n", "ell0", "ell1", "lam", "mu"],
        ["space"],
        "input",
    )
    space = _space_of(obj, "input")
    ell0 = _frame(obj["ell0"], space, "input.ell0")
    ell1 = _frame(obj["ell1"], space, "input.ell1")
    lam = _frame(obj["lam"], space, "input.lam")
    mu = _frame(obj["mu"], space, "input.mu")
    value = hormander(ell0, ell1, lam, mu, seed=args.seed, tol=tol)
    return {"value": int(value), "probe_seed": int(args.seed)}, None


def _cmd_pair_maslov(obj, args, tol):
    _check_keys(
        obj,
        ["version", "n", "mu_path", "lambda_path"],
        ["space"],
        "input",
    )
    space = _space_of(obj, "input")
    mts, mframes = _lagrangian_nodes(obj["mu_path"], space, "input.mu_path")
    lts, lframes = _lagrangian_nodes(
        obj["lambda_path"], space, "input.lambda_path"
    )
    mu_path = _lagrangian_path(mts, mframes, args.refine_factor, tol)
    lam_path = _lagrangian_path(lts, lframes, args.refine_factor, tol)
    report = pair_maslov(mu_path, lam_path, tol)
    return {"value": int(report.value)}, report.trace


def _cmd_reduce(obj, args, tol):
    _check_keys(
        obj,
        [
            "version",
            "n_big",
            "n_small",
            "lam_plus",
            "lam_minus",
            "ell_plus",
            "ell_minus",
            "i_plus_diag",
            "path",
        ],
        [],
        "input",
    )
    nb, nh = obj["n_big"], obj["n_small"]
    for name, val in (("n_big", nb), ("n_small", nh)):
        if not isinstance(val, int) or isinstance(val, bool) or val < 1:
            _fail(f'"{name}" must be a positive integer', "input")
    big, small = standard_space(nb), standard_space(nh)
    pp = polarized_pair(
        lam_plus=_frame(obj["lam_plus"], big, "input.lam_plus"),
        lam_minus=_frame(obj["lam_minus"], big, "input.lam_minus"),
        ell_plus=_frame(obj["ell_plus"], small, "input.ell_plus"),
        ell_minus=_frame(obj["ell_minus"], small, "input.ell_minus"),
        i_plus_diag=[
            _real_number(x, "input.i_plus_diag") for x in obj["i_plus_diag"]
        ],
    )
    ts, frames = _lagrangian_nodes(obj["path"], big, "input.path")
    # Reduction stretches frames by the diagonal weights, so the reduced
    # path can violate the adjacency bound even when the input samples are
    # fine enough; always build a refinable path.
    path = _lagrangian_path(ts, frames, max(2, args.refine_factor), tol)
    reduced = gamma_reduce_path(pp, path, tol)
    big_report = maslov(path, pp.lam_minus, tol)
    small_report = maslov(reduced, pp.ell_minus, tol)
    out = {
        "value": int(small_report.value),
        "big_value": int(big_report.value),
        "equal": bool(small_report.value == big_report.value),
        "n_B": int(nb),
        "n_H": int(nh),
        "i_plus_diag": [float(x) for x in obj["i_plus_diag"]],
        "reduced_path": [
            {"t": float(t), "frame": _frame_out(f)}
            for t, f in reduced.samples
        ],
    }
    return out, small_report.trace


def _boundary_problem(obj):
    _check_keys(
        obj,
        ["version", "N", "B", "family", "lambda0", "lambda1"],
        [],
        "input",
    )
    N = obj["N"]
    if not isinstance(N, int) or isinstance(N, bool) or N < 1:
        _fail('"N" must be a positive integer', "input")
    m = 2 * N
    fam = obj["family"]
    if not isinstance(fam, list) or len(fam) < 2:
        _fail('"family" needs at least two samples', "input.family")
    family = []
    for i, item in enumerate(fam):
        loc = f"input.family[{i}]"
        _check_keys(item, ["t", "C"], [], loc)
        family.append(
            (
                _real_number(item["t"], loc + ".t"),
                _real_matrix(item["C"], (m, m), loc + ".C"),
            )
        )
    return boundary_problem(
        N,
        _real_matrix(obj["B"], (m, m), "input.B"),
        family,
        _real_matrix(obj["lambda0"], (m, N), "input.lambda0"),
        _real_matrix(obj["lambda1"], (m, N), "input.lambda1"),
    )


def _cmd_spectral_flow(obj, args, tol):
    bp = _boundary_problem(obj)
    report = spectral_flow(bp, window=args.window, tol=tol)
    trace = None
    if args.trace is not None:
        trace = eigenvalue_trace(bp, window=args.window, tol=tol)
    return {"value": int(report.value)}, trace


def _cmd_verify_coincidence(obj, args, tol):
    bp = _boundary_problem(obj)
    sf = spectral_flow(bp, window=args.window, tol=tol)
    path, boundary = cauchy_data_path(bp, tol)
    mas = maslov(path, boundary, tol)
    out = {
        "sf": int(sf.value),
        "mas": int(mas.value),
        "equal": bool(sf.value == mas.value),
    }
    trace = None
    if args.trace is not None:
        trace = eigenvalue_trace(bp, window=args.window, tol=tol)
    return out, trace


_HANDLERS = {
    "maslov": (_cmd_maslov, "phase"),
    "unitary-maslov": (_cmd_unitary_maslov, "phase"),
    "crossings": (_cmd_crossings, None),
    "kashiwara": (_cmd_kashiwara, None),
    "complex-kashiwara": (_cmd_complex_kashiwara, None),
    "leray": (_cmd_leray, None),
    "hormander": (_cmd_hormander, None),
    "pair-maslov": (_cmd_pair_maslov, "phase"),
    "reduce": (_cmd_reduce, "phase"),
    "spectral-flow": (_cmd_spectral_flow, "eigen"),
    "verify-coincidence": (_cmd_verify_coincidence, "eigen"),
}


def _parser():
    p = argparse.ArgumentParser(
        prog="masidx",
        description="Maslov-type indices of Lagrangian paths, "
        "intersection indices of Lagrangian triples, and spectral flow "
        "of boundary-value families.",
    )
    p.add_argument(
        "command", choices=sorted(_HANDLERS), help="what to compute"
    )
    p.add_argument("input", help="path to the JSON problem file")
    p.add_argument(
        "--seed",
        type=int,
        default=0,
        help="seed for probe searches and path synthesis (default 0)",
    )
    p.add_argument(
        "--tolerance-profile",
        choices=sorted(_PROFILES),
        default="default",
        help="scale documented tolerances by 0.1 / 1 / 10",
    )
    p.add_argument(
        "--refine-factor",
        type=int,
        default=1,
        help="geodesic subdivisions per sample gap (1 = use samples "
        "as-is, no interpolation)",
    )
    p.add_argument(
        "--trace",
        default=None,
        help="write the command's CSV trace to this path",
    )
    p.add_argument(
        "--window",
        type=float,
        default=8.0,
        help="eigenvalue window for spectral-flow commands (default 8)",
    )
    return p


def run(argv=None):
    args = _parser().parse_args(argv)
    handler, trace_kind = _HANDLERS[args.command]
    try:
        if args.refine_factor < 1:
            _fail("--refine-factor must be >= 1", "arguments")
        if args.trace is not None and trace_kind is None:
            _fail(
                f"command {args.command} emits no trace", "arguments"
            )
        tol = DEFAULT_TOL.scaled(_PROFILES[args.tolerance_profile])
        obj = _load_input(args.input)
        values, trace = handler(obj, args, tol)
        if args.trace is not None:
            if trace is None:
                _fail("no trace was produced", "arguments")
            if trace_kind == "phase":
                header, rows = _phase_trace_rows(trace)
            else:
                header, rows = _eigen_trace_rows(trace)
            _write_trace(args.trace, header, rows)
        report = {
            "command": args.command,
            "seed": int(args.seed),
            "version": __version__,
            "diagnostics": {
                "tolerance_profile": args.tolerance_profile,
                "refine_factor": int(args.refine_factor),
            },
        }
        report.update(values)
        _emit(report)
        return 0
    except ValidationError as exc:
        _emit({"reason": exc.reason, "where": exc.where})
        return 2
    except AmbiguityError as exc:
        _emit({"reason": exc.reason, "where": exc.where})
        return 3
    except PreconditionError as exc:
        _emit({"reason": exc.reason, "where": exc.where})
        return 4


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
