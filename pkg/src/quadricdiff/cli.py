"""Command-line front door: models in, machine-readable JSON out.

Every command writes one JSON document to stdout and exits 0 whenever the
computation ran, even if the verdict is negative; nonzero exit codes are
reserved for usage and IO errors.  Stochastic commands require an explicit
--seed so identical invocations are byte-identical.
"""

import argparse
import json
import sys
from math import comb

import numpy as np

from . import generator, liealg, model as model_mod, simulate as sim, sos
from .skew import skew_dim

__all__ = ["main"]


def _json_out(obj):
    print(json.dumps(obj, sort_keys=True, separators=(",", ": "), indent=1))
    return 0


def _load_json_arg(text):
    """Parse an inline JSON value or @file reference."""
    if text.startswith("@"):
        with open(text[1:]) as fh:
            return json.load(fh)
    return json.loads(text)


def _parse_matrix(text, d):
    """Matrix argument: 'id', 'zero', inline JSON, or @file (sized m = C(d,2))."""
    m = skew_dim(d)
    if text == "id":
        return np.eye(m)
    if text == "zero":
        return np.zeros((m, m))
    data = np.asarray(_load_json_arg(text), dtype=float)
    if data.shape != (m, m):
        raise ValueError(f"expected a {m} x {m} matrix for d = {d}, got shape {data.shape}")
    return data


def _parse_vector(text):
    try:
        data = _load_json_arg(text)
    except json.JSONDecodeError:
        data = [float(tok) for tok in text.replace(",", " ").split()]
    return np.asarray(data, dtype=float).ravel()


def _load_model(path):
    with open(path) as fh:
        return model_mod.model_from_json(json.load(fh))


def _drive_from_model(mdl, tol):
    """Recover a skew drive (A_0; A_1..A_r) from a model via the SOS witness."""
    verdict = sos.sos_check(mdl.H, tol=tol)
    if verdict.status != sos.FEASIBLE:
        return None, verdict
    a0 = 0.5 * (mdl.B - mdl.B.T)
    diffusion = np.array(verdict.factors) if verdict.factors else np.zeros((0, mdl.d, mdl.d))
    return sim.SkewDrive(a0, diffusion), verdict


def _cmd_dims(args):
    d = args.d
    return _json_out({
        "d": d,
        "m": skew_dim(d),
        "dim_C": d * d * (d * d - 1) // 12,
        "dim_K": comb(d, 4),
    })


def _cmd_validate(args):
    mdl = _load_model(args.model)
    if mdl.space == "ball":
        report = model_mod.validate_ball(mdl, tol=args.tol or 1e-7)
    else:
        report = model_mod.validate_sphere(mdl, tol=args.tol or 1e-9)
    out = report.to_json()
    out["space"] = mdl.space
    if mdl.space == "ball":
        att = None
        if report.admissible:
            att = model_mod.boundary_attainment(mdl).to_json()
        out["boundary"] = att
    return _json_out(out)


def _cmd_sos_check(args):
    H = _parse_matrix(args.H, args.d)
    verdict = sos.sos_check(H, tol=args.tol or 1e-9, max_iter=args.max_iter)
    return _json_out(verdict.to_json())


def _cmd_decompose(args):
    H = _parse_matrix(args.H, args.d)
    verdict = sos.sos_check(H, tol=args.tol or 1e-9, max_iter=args.max_iter)
    out = {"status": verdict.status}
    if verdict.status == sos.FEASIBLE:
        out["factors"] = [A.tolist() for A in verdict.factors]
        out["rank"] = len(verdict.factors)
    else:
        out["margins"] = {k: float(v) for k, v in verdict.residuals.items()}
    return _json_out(out)


def _cmd_counterexample(args):
    ce = sos.counterexample_d6()
    verdict = sos.sos_check(ce.h, tol=args.tol or 1e-9)
    out = dict(ce.report)
    out["H"] = ce.h.tolist()
    out["certificate"] = ce.certificate.tolist()
    out["sos_status"] = verdict.status
    return _json_out(out)


def _cmd_moments(args):
    mdl = _load_model(args.model)
    q = generator.poly_from_json(_load_json_arg(args.q))
    x0 = _parse_vector(args.x0)
    try:
        value = generator.moment(mdl, q, x0, args.T, k=args.k)
    except ValueError as exc:
        return _json_out({"error": str(exc)})
    return _json_out({
        "value": value,
        "t": args.T,
        "k": args.k if args.k is not None else generator.poly_degree(q),
        "x0": x0.tolist(),
    })


def _write_csv(path, result):
    with open(path, "w") as fh:
        d = result.terminal.shape[1]
        header = "path_id,t," + ",".join(f"x{i + 1}" for i in range(d))
        fh.write(header + "\n")
        if result.paths is not None:
            for pid in range(result.n_paths):
                for ti, t in enumerate(result.times):
                    row = ",".join(repr(v) for v in result.paths[pid, ti])
                    fh.write(f"{pid},{t!r},{row}\n")
        else:
            t = result.times[-1]
            for pid in range(result.n_paths):
                row = ",".join(repr(v) for v in result.terminal[pid])
                fh.write(f"{pid},{t!r},{row}\n")


def _cmd_simulate(args):
    x0 = _parse_vector(args.x0)
    tol = args.tol or 1e-9
    if args.scheme == "scalar":
        if args.kappa is None or args.nu is None:
            raise SystemExit("scalar scheme requires --kappa and --nu")
        d = len(x0)
        drive = sim.SkewDrive.zero(d)
        if args.model:
            mdl = _load_model(args.model)
            drive, verdict = _drive_from_model(mdl, tol)
            if drive is None:
                return _json_out({"error": "no sum-of-squares representation found",
                                  "sos_status": verdict.status})
        result = sim.scalar_ball_ensemble(args.kappa, args.nu, drive, x0, args.T,
                                          args.h, args.seed, args.paths,
                                          keep_paths=args.keep_paths)
    else:
        mdl = _load_model(args.model)
        drive, verdict = _drive_from_model(mdl, tol)
        if drive is None:
            return _json_out({"error": "no sum-of-squares representation found",
                              "sos_status": verdict.status})
        if args.scheme == "sphere":
            result = sim.sphere_ensemble(drive, x0, args.T, args.h, args.seed,
                                         args.paths, keep_paths=args.keep_paths)
        else:
            corr = sum(A.T @ A for A in drive.diffusion) if drive.n_diffusion else 0.0
            bhat = mdl.b
            Bhat = 0.5 * (mdl.B + mdl.B.T) + 0.5 * corr
            result = sim.ball_ensemble(bhat, Bhat, mdl.alpha, drive, x0, args.T,
                                       args.h, args.seed, args.paths,
                                       keep_paths=args.keep_paths)
    out = {
        "scheme": result.scheme,
        "n_paths": result.n_paths,
        "T": args.T,
        "h": float(result.times[1] - result.times[0]),
        "seed": args.seed,
        "terminal_mean": result.terminal.mean(axis=0).tolist(),
        "terminal_stderr": (result.terminal.std(axis=0, ddof=1)
                            / np.sqrt(result.n_paths)).tolist() if result.n_paths > 1
                           else [0.0] * result.terminal.shape[1],
        "max_norm_dev": result.max_norm_dev,
        "clamp_fraction": result.clamp_fraction,
    }
    if args.out:
        if args.out.endswith(".csv"):
            _write_csv(args.out, result)
        else:
            with open(args.out, "w") as fh:
                json.dump(out, fh, sort_keys=True, indent=1)
        out["out"] = args.out
    return _json_out(out)


def _cmd_twin(args):
    x0 = _parse_vector(args.x0)
    d = len(x0)
    drive = sim.SkewDrive.zero(d)
    report = sim.twin_path_experiment(args.kappa, args.nu, drive, x0, args.T, args.h,
                                      args.seeds, seed=args.seed, eps=args.eps)
    return _json_out({
        "max_divergence": report.max_divergence.tolist(),
        "eps": report.eps,
        "kappa_nu_ratio": report.kappa_nu_ratio,
        "uniqueness_condition": report.uniqueness_condition,
        "threshold": np.sqrt(2.0) - 1.0,
        "T": report.T,
        "h": report.h,
    })


def _cmd_density(args):
    mdl = _load_model(args.model)
    x0 = _parse_vector(args.x0)
    tol = args.tol or 1e-9
    drive, verdict = _drive_from_model(mdl, tol)
    if drive is None:
        return _json_out({"error": "no sum-of-squares representation found",
                          "sos_status": verdict.status})
    if mdl.space == "sphere":
        report = liealg.density_check_sphere(drive, x0, tol)
    else:
        report = liealg.density_check_ball(drive, mdl.alpha, x0, tol)
    out = report.to_json()
    out["space"] = mdl.space
    return _json_out(out)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="quadricdiff",
        description="Polynomial diffusions on the unit ball and sphere.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dims", help="dimension formulas for the coefficient space")
    p.add_argument("--d", type=int, required=True)
    p.set_defaults(func=_cmd_dims)

    p = sub.add_parser("validate", help="admissibility checks for a model file")
    p.add_argument("--model", required=True)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=_cmd_validate)

    for name, fn in (("sos-check", _cmd_sos_check), ("decompose", _cmd_decompose)):
        p = sub.add_parser(name, help=f"{name} for an m x m coefficient matrix")
        p.add_argument("--H", required=True, help="'id', 'zero', inline JSON, or @file")
        p.add_argument("--d", type=int, required=True)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--max-iter", type=int, default=50000)
        p.set_defaults(func=fn)

    p = sub.add_parser("counterexample", help="dimension-six non-SOS construction report")
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=_cmd_counterexample)

    p = sub.add_parser("moments", help="exact conditional moment of a polynomial")
    p.add_argument("--model", required=True)
    p.add_argument("--q", required=True, help="polynomial JSON (inline or @file)")
    p.add_argument("--x0", "--x", dest="x0", required=True)
    p.add_argument("--t", dest="T", type=float, required=True)
    p.add_argument("--k", type=int, default=None)
    p.set_defaults(func=_cmd_moments)

    p = sub.add_parser("simulate", help="ensemble simulation")
    p.add_argument("--model", default=None)
    p.add_argument("--scheme", choices=["sphere", "ball", "scalar"], required=True)
    p.add_argument("--x0", required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--paths", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--nu", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--keep-paths", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("twin", help="same-noise twin-path divergence experiment")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--x0", required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--seeds", type=int, default=8)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.0)
    p.set_defaults(func=_cmd_twin)

    p = sub.add_parser("density", help="smooth-density criterion for a model")
    p.add_argument("--model", required=True)
    p.add_argument("--x0", required=True)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=_cmd_density)
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # Domain errors are part of the computed output, not process failures.
        return _json_out({"error": str(exc)})


if __name__ == "__main__":
    raise SystemExit(main())
