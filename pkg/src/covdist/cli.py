"""Command-line front end.

Subcommands cover every computation in the library: matrix distances
(``delta``), structured approximation (``approx``), spectral-measure
statistics (``spectral``), the dimension-growth experiment
(``convergence``), seeded simulation with sample covariances
(``simulate``), and a one-shot battery re-running all built-in reference
examples (``reproduce``).

Matrices travel as header-less CSV; spectral measures as JSON documents
``{"grid_size": m, "values": [...], "atoms": [{"theta": t, "mass": w}]}``.
Every command emits a single JSON run report on stdout (or ``--out``)
with matrices rounded to 12 significant digits.  Exit codes: 0 success,
1 failed reference check, 2 invalid input, 3 solver non-convergence,
4 input outside the PSD domain.
"""

import argparse
import hashlib
import json
import sys
import time

import numpy as np

from ._validation import DomainError
from .approx import (
    nearest_ma_delta,
    nearest_toeplitz_delta,
    nearest_toeplitz_ls,
    sequence_is_ma,
    trig_polynomial_min,
    vn_nearest_toeplitz,
)
from .linalg import min_eig, sym_eig, toeplitz_from_sequence
from .metrics import delta, vn_divergence
from .solver import CONVERGED, FULL, TOEPLITZ, SolverOptions
from .spectral import (
    MaModel,
    SpectralMeasure,
    TimeSeries,
    convergence_experiment,
    cov_sequence,
    l1_distance,
    ma_autocovariance,
    normalized_ratios,
    optimal_perturbations,
    sample_covariance,
    simulate_ma,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID_INPUT = 2
EXIT_NO_CONVERGENCE = 3
EXIT_NOT_PSD = 4


# ---------------------------------------------------------------------------
# I/O helpers


def _digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def read_matrix_csv(path):
    try:
        mat = np.loadtxt(path, delimiter=",", ndmin=2)
    except Exception as exc:
        raise ValueError(f"cannot parse CSV matrix {path}: {exc}") from exc
    if mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{path} holds a {mat.shape[0]}x{mat.shape[1]} block, need square")
    return mat


def read_series(path):
    try:
        data = np.loadtxt(path, delimiter=",")
    except Exception as exc:
        raise ValueError(f"cannot parse series file {path}: {exc}") from exc
    return np.atleast_1d(data).ravel()


def read_measure_json(path):
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except Exception as exc:
        raise ValueError(f"cannot parse measure file {path}: {exc}") from exc
    return SpectralMeasure.from_dict(payload)


def _sig12(x):
    return float(f"{float(x):.12g}")


def fmt_matrix(mat):
    """Row-major nested lists with 12 significant digits per entry."""
    return [[_sig12(v) for v in row] for row in np.asarray(mat)]


def fmt_vector(vec):
    return [_sig12(v) for v in np.asarray(vec).ravel()]


def write_matrix_csv(path, mat):
    with open(path, "w") as fh:
        for row in np.asarray(mat):
            fh.write(",".join(f"{v:.12g}" for v in row) + "\n")


def _emit(report, out_path):
    text = json.dumps(report, indent=2) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run_report(command, inputs, result, solver=None, started=None):
    report = {
        "command": command,
        "inputs": {p: _digest(p) for p in inputs},
        "result": result,
    }
    if solver is not None:
        report["solver"] = solver
    report["wall_time"] = time.perf_counter() - started if started else 0.0
    return report


def _solver_block(diag):
    return {
        "status": diag.get("status", CONVERGED),
        "iterations": int(diag.get("iterations", 0)),
        "primal_residual": float(diag.get("primal_residual", float("nan"))),
        "dual_residual": float(diag.get("dual_residual", float("nan"))),
    }


# ---------------------------------------------------------------------------
# subcommands


def _cmd_delta(args):
    started = time.perf_counter()
    a = read_matrix_csv(args.matrix_a)
    b = read_matrix_csv(args.matrix_b)
    opts = SolverOptions(tol=args.tol, max_iter=args.max_iter)
    structure = TOEPLITZ if args.toeplitz else FULL
    report = delta(a, b, structure, opts)
    payload = {
        "n": int(a.shape[0]),
        "structure": structure.kind,
        "tau": report.tau,
        "delta": report.delta,
        "M_star": fmt_matrix(report.M_star),
        "Q_A": fmt_matrix(report.Q_A),
        "Q_B": fmt_matrix(report.Q_B),
    }
    solver = {
        "status": report.solver.status,
        "iterations": report.solver.iterations,
        "primal_residual": report.solver.primal_residual,
        "dual_residual": report.solver.dual_residual,
    }
    _emit(_run_report("delta", [args.matrix_a, args.matrix_b], payload, solver, started),
          args.out)
    return EXIT_OK if report.converged else EXIT_NO_CONVERGENCE


def _parse_structure(text):
    if text == "toeplitz" or text == "ls":
        return text, None
    if text.startswith("ma:"):
        try:
            order = int(text[3:])
        except ValueError:
            raise ValueError(f"bad moving-average order in structure {text!r}")
        if order < 0:
            raise ValueError("moving-average order must be >= 0")
        return "ma", order
    raise ValueError(
        f"unknown structure {text!r}; use 'toeplitz', 'ma:<order>' or 'ls'"
    )


def _cmd_approx(args):
    started = time.perf_counter()
    mat = read_matrix_csv(args.matrix)
    kind, order = _parse_structure(args.structure)
    if args.metric == "vn" and kind != "toeplitz":
        raise ValueError("--metric vn is only valid with --structure toeplitz")
    opts = SolverOptions(tol=args.tol, max_iter=args.max_iter)

    if kind == "ls":
        result = nearest_toeplitz_ls(mat)
    elif args.metric == "vn":
        result = vn_nearest_toeplitz(mat)
    elif kind == "toeplitz":
        result = nearest_toeplitz_delta(mat, match_trace=args.match_trace, opts=opts)
    else:
        result = nearest_ma_delta(mat, order, match_trace=args.match_trace, opts=opts)

    payload = {
        "n": int(mat.shape[0]),
        "structure": args.structure,
        "metric": "frobenius" if kind == "ls" else args.metric,
        "distance": result.distance,
        "R": fmt_matrix(result.R),
    }
    if "min_eig" in result.diagnostics:
        payload["min_eig"] = float(result.diagnostics["min_eig"])
    if result.certificate is not None:
        payload["gram_certificate"] = fmt_matrix(result.certificate.q_matrix)
    _emit(
        _run_report("approx", [args.matrix], payload,
                    _solver_block(result.diagnostics), started),
        args.out,
    )
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def _cmd_spectral(args):
    started = time.perf_counter()
    f = read_measure_json(args.f)
    g = read_measure_json(args.g) if args.g else None
    payload = {}
    if args.cov is not None:
        payload["cov"] = fmt_vector(cov_sequence(f, args.cov).r)
    if args.l1 or args.ratios:
        if g is None:
            raise ValueError("--l1/--ratios need two measures")
        if args.l1:
            payload["l1"] = l1_distance(f, g)
        if args.ratios:
            total, pointwise = normalized_ratios(f, g)
            payload["ratio_total"] = total
            payload["ratio_pointwise"] = pointwise
        psi, psi_hat, _env = optimal_perturbations(f, g)
        payload["psi_mass"] = psi.total_mass()
        payload["psi_hat_mass"] = psi_hat.total_mass()
    if not payload:
        raise ValueError("nothing to compute: pass --l1, --ratios and/or --cov N")
    inputs = [args.f] + ([args.g] if args.g else [])
    _emit(_run_report("spectral", inputs, payload, started=started), args.out)
    return EXIT_OK


def _cmd_convergence(args):
    started = time.perf_counter()
    f = read_measure_json(args.f)
    g = read_measure_json(args.g)
    try:
        n_list = [int(tok) for tok in args.n.split(",") if tok]
    except ValueError:
        raise ValueError(f"bad dimension list {args.n!r}")
    opts = SolverOptions(tol=args.tol, max_iter=args.max_iter)
    rows = convergence_experiment(f, g, n_list, opts)
    deltas = [r.delta_t for r in rows]
    payload = {
        "l1": rows[0].l1 if rows else None,
        "rows": [
            {"n": r.n, "delta_t": r.delta_t, "l1": r.l1, "status": r.status}
            for r in rows
        ],
        "nondecreasing": bool(
            all(b >= a - 1e-9 for a, b in zip(deltas, deltas[1:]))
        ),
        "bounded_by_l1": bool(all(r.delta_t <= r.l1 + 1e-6 for r in rows)),
    }
    _emit(_run_report("convergence", [args.f, args.g], payload, started=started),
          args.out)
    return EXIT_OK


def _cmd_simulate(args):
    started = time.perf_counter()
    inputs = []
    if args.input:
        series = TimeSeries(read_series(args.input))
        inputs.append(args.input)
    else:
        if not args.coeffs:
            raise ValueError("pass --coeffs or --input")
        try:
            coeffs = [float(tok) for tok in args.coeffs.split(",") if tok]
        except ValueError:
            raise ValueError(f"bad coefficient list {args.coeffs!r}")
        series = simulate_ma(MaModel(coeffs), args.length, seed=args.seed)
    if series.length < args.dim:
        raise ValueError(
            f"series of length {series.length} is shorter than --dim {args.dim}"
        )
    cov = sample_covariance(series, args.dim)
    payload = {
        "length": int(series.length),
        "seed": series.seed,
        "dim": int(args.dim),
        "series": fmt_vector(series.samples),
        "sample_covariance": fmt_matrix(cov),
        "min_eig": min_eig(cov),
    }
    _emit(_run_report("simulate", inputs, payload, started=started), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# reference battery


def _reference_checks(tol_scale, solver_opts):
    """Yield (name, passed, details) for every built-in reference example."""

    def toep(row):
        return toeplitz_from_sequence(np.asarray(row, dtype=float))

    ones3 = np.ones((3, 3))
    half3 = toep([1.0, 0.5, 0.5])
    r3hat = np.array([[1.1, 0.9, 1.05], [0.9, 0.8, 0.9], [1.05, 0.9, 1.1]]) / 3.0
    r3_delta = np.array([[1.1, 0.9, 1.05], [0.9, 1.1, 0.9], [1.05, 0.9, 1.1]]) / 3.0
    r3_vn = np.array([[1.0, 0.942, 0.957], [0.942, 1.0, 0.942], [0.957, 0.942, 1.0]]) / 3.0
    r5hat = np.array([
        [4.0362, 2.9053, 1.8043, 0.4042, 0.1718],
        [2.9053, 4.0547, 2.9268, 1.7945, 0.3800],
        [1.8043, 2.9268, 4.0792, 2.9143, 1.7733],
        [0.4042, 1.7945, 2.9143, 4.0819, 2.9421],
        [0.1718, 0.3800, 1.7733, 2.9421, 4.0237],
    ])
    r5_toep_row = np.array([4.0677, 2.9237, 1.7912, 0.3979, 0.1822])
    r5_ma2_row = np.array([3.9945, 2.1588, 0.5693, 0.0, 0.0])

    def check(name, passed, details):
        return {"name": name, "passed": bool(passed), **details}

    # eigenvalue lists of the rank-one / diagonally perturbed pair
    w1 = sym_eig(ones3).values
    w2 = sym_eig(half3).values
    tol = 1e-9 * tol_scale
    yield check(
        "dirac_pair_eigenvalues",
        np.allclose(w1, [0, 0, 3], atol=tol)
        and np.allclose(w2, [0.5, 0.5, 2.0], atol=tol),
        {"eigs_ones": fmt_vector(w1), "eigs_half": fmt_vector(w2), "tol": tol},
    )

    # Toeplitz-restricted distance of that pair
    rep = delta(ones3, half3, TOEPLITZ, solver_opts)
    tol = 1e-6 * tol_scale
    yield check(
        "dirac_pair_toeplitz_distance",
        abs(rep.delta - 2.0 / 3.0) <= tol and abs(rep.tau - 4.0 / 3.0) <= tol,
        {"delta": rep.delta, "expected": 2.0 / 3.0, "tau": rep.tau, "tol": tol},
    )

    # spectral version of the same pair
    f = SpectralMeasure.dirac(0.0, 1.0)
    g = SpectralMeasure(np.full(4096, 0.5), [(0.0, 0.5)])
    val = l1_distance(f, g)
    psi, psi_hat, _ = optimal_perturbations(f, g)
    tol = 1e-12 * tol_scale
    yield check(
        "dirac_pair_l1",
        abs(val - 1.0) <= tol
        and abs(psi.density_mass() - 0.5) <= tol
        and not psi.atoms
        and abs(psi_hat.atom_mass() - 0.5) <= tol
        and float(psi_hat.values.max()) <= tol,
        {"l1": val, "expected": 1.0, "tol": tol},
    )

    # moving-average autocovariance three ways
    seq = ma_autocovariance(MaModel([1.0, 1.0, 1.0]), 5).r
    seq_q = cov_sequence(
        SpectralMeasure.from_cosine_polynomial([3.0, 2.0, 1.0]), 5
    ).r
    tol = 1e-12 * tol_scale
    yield check(
        "ma2_autocovariance",
        np.allclose(seq, [3, 2, 1, 0, 0], atol=tol)
        and np.allclose(seq_q, [3, 2, 1, 0, 0], atol=tol),
        {"filter_route": fmt_vector(seq), "quadrature_route": fmt_vector(seq_q), "tol": tol},
    )

    # nearest Toeplitz approximant of the sample covariance
    res = nearest_toeplitz_delta(r5hat, opts=solver_opts)
    tol = 1e-3 * tol_scale
    yield check(
        "sample5_toeplitz_distance",
        abs(res.distance - 0.0308) <= tol,
        {"distance": res.distance, "expected": 0.0308, "tol": tol},
    )
    tol = 5e-3 * tol_scale
    gap = float(np.abs(res.R - toep(r5_toep_row)).max())
    yield check(
        "sample5_toeplitz_matrix",
        gap <= tol,
        {"max_entry_gap": gap, "tol": tol, "R_row": fmt_vector(res.R[0])},
    )

    # nearest moving-average approximant
    res_ma = nearest_ma_delta(r5hat, 2, opts=solver_opts)
    tol = 1e-2 * tol_scale
    yield check(
        "sample5_ma2_distance",
        abs(res_ma.distance - 1.2161) <= tol,
        {"distance": res_ma.distance, "expected": 1.2161, "tol": tol},
    )
    gap = float(np.abs(res_ma.R[0] - r5_ma2_row).max())
    yield check(
        "sample5_ma2_row",
        gap <= tol,
        {"max_entry_gap": gap, "tol": tol, "R_row": fmt_vector(res_ma.R[0])},
    )
    cert = res_ma.certificate
    tol = 1e-7 * tol_scale
    yield check(
        "sample5_ma2_certificate",
        cert is not None
        and cert.min_eig() >= -1e-8 * tol_scale * np.trace(cert.q_matrix)
        and np.allclose(cert.sequence(), res_ma.R[0, :3], atol=tol),
        {"min_eig": cert.min_eig() if cert else None, "tol": tol},
    )

    # distance evaluation between the sample covariance and the published
    # moving-average matrix
    rep = delta(r5hat, toep(r5_ma2_row), FULL, solver_opts)
    tol = 1e-4 * tol_scale
    yield check(
        "sample5_ma2_pair_distance",
        abs(rep.delta - 1.2161) <= tol,
        {"delta": rep.delta, "expected": 1.2161, "tol": tol},
    )

    # divergence-minimizing Toeplitz approximant
    res_vn = vn_nearest_toeplitz(r3hat)
    tol = 1e-3 * tol_scale
    gap = float(np.abs(res_vn.R - r3_vn).max())
    yield check(
        "sample3_vn_matrix",
        gap <= tol and abs(np.trace(res_vn.R) - np.trace(r3hat)) <= 1e-7 * tol_scale,
        {"max_entry_gap": gap, "tol": tol, "R_row": fmt_vector(res_vn.R[0])},
    )

    # least-squares Toeplitz projection loses positive semidefiniteness
    res_ls = nearest_toeplitz_ls(r3hat)
    tol = 1e-9 * tol_scale
    yield check(
        "sample3_ls_indefinite",
        abs(res_ls.diagnostics["min_eig"] - (-0.05 / 3.0)) <= tol,
        {"min_eig": res_ls.diagnostics["min_eig"], "expected": -0.05 / 3.0, "tol": tol},
    )

    # the nearest-by-observation approximant: distance 1/30 and optimality
    rep = delta(r3hat, r3_delta, FULL, solver_opts)
    res3 = nearest_toeplitz_delta(r3hat, opts=solver_opts)
    tol = 1e-6 * tol_scale
    yield check(
        "sample3_delta_approximant",
        abs(rep.delta - 1.0 / 30.0) <= tol and res3.distance <= 1.0 / 30.0 + tol,
        {"pair_delta": rep.delta, "optimal": res3.distance, "expected": 1.0 / 30.0, "tol": tol},
    )

    # the Toeplitz approximant is not a moving-average covariance
    feasible, _ = sequence_is_ma(r5_toep_row, 4)
    poly_min = trig_polynomial_min(r5_toep_row)
    yield check(
        "sample5_toeplitz_not_ma4",
        (not feasible) and poly_min < 0.0,
        {"feasible": feasible, "poly_min": poly_min},
    )

    # growth of the Toeplitz-restricted distance toward the L1 limit
    rows = convergence_experiment(f, g, [4, 8, 16, 32], solver_opts)
    deltas = [r.delta_t for r in rows]
    tol = 1e-6 * tol_scale
    yield check(
        "dirac_pair_limit",
        all(b >= a - tol for a, b in zip(deltas, deltas[1:]))
        and all(d <= 1.0 + tol for d in deltas)
        and deltas[-1] > deltas[0],
        {"deltas": fmt_vector(deltas), "limit": 1.0, "tol": tol},
    )


def _cmd_reproduce(args):
    started = time.perf_counter()
    solver_opts = SolverOptions(tol=args.tol, max_iter=args.max_iter)
    checks = list(_reference_checks(args.tol_scale, solver_opts))
    n_pass = sum(1 for c in checks if c["passed"])
    for c in checks:
        sys.stderr.write(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}\n")
    sys.stderr.write(f"{n_pass}/{len(checks)} reference checks passed\n")

    if args.out:
        import os

        os.makedirs(args.out, exist_ok=True)
        for c in checks:
            with open(os.path.join(args.out, f"{c['name']}.json"), "w") as fh:
                json.dump(c, fh, indent=2)
                fh.write("\n")
    payload = {
        "checks": checks,
        "passed": n_pass,
        "total": len(checks),
    }
    _emit(_run_report("reproduce", [], payload, started=started), None)
    return EXIT_OK if n_pass == len(checks) else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# parser


def _add_solver_args(p):
    p.add_argument("--tol", type=float, default=1e-9,
                   help="relative solver tolerance (default 1e-9)")
    p.add_argument("--max-iter", type=int, default=100_000,
                   help="solver iteration cap (default 100000)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="covdist",
        description="Distances between covariance matrices and spectral measures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("delta", help="distance between two covariance matrices")
    p.add_argument("matrix_a", help="CSV file, square matrix")
    p.add_argument("matrix_b", help="CSV file, square matrix")
    p.add_argument("--toeplitz", action="store_true",
                   help="restrict the dominating matrix to the Toeplitz cone")
    _add_solver_args(p)
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=_cmd_delta)

    p = sub.add_parser("approx", help="structured approximation of a covariance")
    p.add_argument("matrix", help="CSV file, square matrix")
    p.add_argument("--structure", required=True,
                   help="'toeplitz', 'ma:<order>' or 'ls'")
    p.add_argument("--match-trace", action="store_true",
                   help="constrain the approximant trace to match the input")
    p.add_argument("--metric", choices=["delta", "vn"], default="delta",
                   help="approximation criterion (vn only with toeplitz)")
    _add_solver_args(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_approx)

    p = sub.add_parser("spectral", help="statistics of spectral measures")
    p.add_argument("f", help="JSON spectral measure")
    p.add_argument("g", nargs="?", help="JSON spectral measure (for --l1/--ratios)")
    p.add_argument("--l1", action="store_true", help="L1 distance")
    p.add_argument("--ratios", action="store_true",
                   help="normalized perturbation ratios")
    p.add_argument("--cov", type=int, metavar="N",
                   help="first N autocorrelation samples of f")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_spectral)

    p = sub.add_parser("convergence",
                       help="Toeplitz distance versus the spectral L1 limit")
    p.add_argument("f")
    p.add_argument("g")
    p.add_argument("--n", default="4,8,16,32,48",
                   help="comma-separated ascending dimensions")
    _add_solver_args(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_convergence)

    p = sub.add_parser("simulate",
                       help="seeded moving-average simulation and sample covariance")
    p.add_argument("--coeffs", help="filter taps b0,b1,...")
    p.add_argument("--length", type=int, default=101, help="series length")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, required=True, help="covariance dimension")
    p.add_argument("--input", help="read the series from a file instead of simulating")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("reproduce",
                       help="re-run all built-in reference examples and report pass/fail")
    p.add_argument("--out", help="directory for one JSON file per check")
    p.add_argument("--tol-scale", type=float, default=1.0,
                   help="multiply all check tolerances (negative-control knob)")
    _add_solver_args(p)
    p.set_defaults(func=_cmd_reproduce)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NOT_PSD
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
