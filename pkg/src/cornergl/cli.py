"""Command line: reproducible runs writing schema-versioned documents.

Exit codes separate plumbing from science: 0 means the run finished and
every ledger check passed, 2 means the run finished but some check
failed or was inconclusive (documents are still written), 1 means an
operational error, reported as one JSON object on stderr.
"""

import argparse
import json
import math
import sys
import time
from importlib import resources

import numpy as np

from . import __version__
from .errors import CornerGLError, ParameterError
from .geometry import polygon_from_json
from .glsolver import (decay_certificate, global_energy_check, gl_energy,
                       local_quantities, minimize_gl, run_params,
                       sector_library, verify_concentration)
from .gauge import gauge_transform
from .grid import field_to_json
from .results import (SCHEMA_VERSION, canonical_json, check, ensure_schema,
                      exit_code, make_document, read_document, write_csv,
                      write_document)
from .sector import (MuSweep, _one_sided_tables, default_mu_grid,
                     feynman_hellmann, kink_scan, minimize_sector, mu_sweep)
from .spectral import (DEFAULT_RADIUS, DEFAULT_STEP, check_corner_assumption,
                       critical_fields, mu1, theta0)

BUNDLED_POLYGONS = ("square", "triangle", "pentagon")

SWEEP_COLUMNS = ("mu", "E", "fh_slope", "left_quotient", "right_quotient",
                 "sup_u", "mass2", "mass4", "a0")
VERIFY_COLUMNS = ("kappa", "corner", "kinetic", "l2mass", "l4mass",
                  "pred_kinetic", "pred_l2", "pred_l4", "bound_lo_l2",
                  "bound_hi_l2", "dev_rel")


class _Parser(argparse.ArgumentParser):
    # argparse exits the process on bad flags; surface them as
    # operational errors instead so no partial outputs are written
    def error(self, message):
        raise ParameterError(message)


def parse_angle(text):
    s = str(text).strip().lower().replace(" ", "").replace("*", "")
    if "pi" in s:
        num, _, den = s.partition("/")
        if not num.endswith("pi"):
            raise ParameterError(f"cannot parse angle {text!r}")
        coef = num[:-2]
        try:
            a = float(coef) if coef else 1.0
            b = float(den) if den else 1.0
        except ValueError:
            raise ParameterError(f"cannot parse angle {text!r}") from None
        return a * math.pi / b
    try:
        return float(s)
    except ValueError:
        raise ParameterError(f"cannot parse angle {text!r}") from None


def parse_floats(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ParameterError(f"cannot parse number list {text!r}") from None


def parse_schedule(text):
    if text is None:
        return None
    out = []
    for part in str(text).split(","):
        size, _, h = part.partition(":")
        try:
            out.append((float(size), float(h)))
        except ValueError:
            raise ParameterError(
                f"cannot parse schedule entry {part!r}; "
                "expected size:step pairs") from None
    return out


def load_polygon(spec):
    if spec in BUNDLED_POLYGONS:
        text = resources.files("cornergl").joinpath(
            f"configs/{spec}.json").read_text()
    else:
        with open(spec) as handle:
            text = handle.read()
    return polygon_from_json(text)


def _emit(doc, args, summary):
    if getattr(args, "out", None):
        write_document(args.out, doc)
    print(summary)


def _angle_label(alpha):
    frac = alpha / math.pi
    for den in (1, 2, 3, 4, 5, 6, 8, 10, 12):
        num = frac * den
        if abs(num - round(num)) < 1e-9 and round(num) != 0:
            num = int(round(num))
            if den == 1:
                return "pi" if num == 1 else f"{num}pi"
            return f"pi/{den}" if num == 1 else f"{num}pi/{den}"
    return f"{alpha:.12g}"


def _finish(args, command, config, results, raw, checks, t0, summary):
    doc = make_document(command, config, results, raw=raw, checks=checks,
                        timing={"seconds": time.monotonic() - t0},
                        version=__version__)
    _emit(doc, args, summary)
    for c in checks:
        if c.status != "pass":
            print(f"  check {c.name}: {c.status}"
                  + (f" (measured {c.measured})"
                     if c.measured is not None else ""))
    return exit_code(checks)


def _cmd_mu1(args):
    t0 = time.monotonic()
    alpha = parse_angle(args.alpha)
    schedule = parse_schedule(args.schedule)
    config = {"alpha": alpha, "schedule": schedule
              or [[DEFAULT_RADIUS, DEFAULT_STEP],
                  [DEFAULT_RADIUS, DEFAULT_STEP / 2]],
              "tol": args.tol, "seed": args.seed, "out": args.out}
    res = mu1(alpha, schedule=schedule, tol=args.tol, seed=args.seed)
    results = {"alpha": alpha, "mu1": res.extrapolated,
               "uncertainty": res.uncertainty,
               "truncation_change": res.truncation_change,
               "truncation_flagged": res.truncation_flagged}
    raw = {"resolutions": [[h, R, lam] for h, R, lam in res.resolutions]}
    checks = [
        check("positive-threshold", res.extrapolated > 0.0,
              measured=res.extrapolated, tolerance=0.0),
        check("radius-insensitive", True,
              measured=res.truncation_change, tolerance=10 * args.tol,
              detail="eigenvalue change when the wedge radius grows by 2",
              inconclusive=res.truncation_flagged),
    ]
    return _finish(args, "mu1", config, results, raw, checks, t0,
                   f"mu1({_angle_label(alpha)}) = {res.extrapolated:.8f} "
                   f"+/- {res.uncertainty:.1e}")


def _cmd_theta0(args):
    t0 = time.monotonic()
    schedule = parse_schedule(args.schedule)
    config = {"schedule": schedule
              or [[DEFAULT_RADIUS, DEFAULT_STEP],
                  [DEFAULT_RADIUS, DEFAULT_STEP / 2]],
              "dirichlet": bool(args.dirichlet), "tol": args.tol,
              "seed": args.seed, "out": args.out}
    res = theta0(schedule=schedule, tol=args.tol, seed=args.seed,
                 dirichlet_edge=args.dirichlet)
    results = {"theta0": res.extrapolated, "uncertainty": res.uncertainty,
               "truncation_change": res.truncation_change,
               "offset": res.offset, "dirichlet": bool(args.dirichlet)}
    raw = {"resolutions": [[h, W, lam] for h, W, lam in res.resolutions]}
    checks = [
        check("positive-value", res.extrapolated > 0.0,
              measured=res.extrapolated, tolerance=0.0),
        check("depth-insensitive",
              res.truncation_change <= 1e-3 * res.extrapolated,
              measured=res.truncation_change,
              tolerance=1e-3 * res.extrapolated,
              detail="eigenvalue change when the channel depth grows by 2"),
    ]
    return _finish(args, "theta0", config, results, raw, checks, t0,
                   f"theta0 = {res.extrapolated:.8f} "
                   f"+/- {res.uncertainty:.1e}")


def _cmd_fields(args):
    t0 = time.monotonic()
    domain = load_polygon(args.polygon)
    schedule = parse_schedule(args.schedule)
    config = {"polygon": args.polygon, "kappa": args.kappa,
              "schedule": schedule, "tol": args.tol, "seed": args.seed,
              "out": args.out}
    table = critical_fields(domain, args.kappa, tol=args.tol, seed=args.seed,
                            schedule=schedule)
    rows = [{"vertex": v, "alpha": a, "mu1": m, "field": H}
            for v, a, m, H in table.rows]
    results = {"kappa": table.kappa, "h_c2": table.h_c2,
               "h_surface": table.h_surface, "lambda1": table.lambda1,
               "theta0": table.theta0, "rows": rows,
               "warning": table.warning}
    fields = [r["field"] for r in rows]
    ordered = all(x <= y + 1e-12 for x, y in zip(fields, fields[1:]))
    checks = [
        check("field-ordering",
              table.h_c2 <= table.h_surface < min(fields) and ordered,
              measured=fields, detail="bulk <= surface < corner fields, "
              "corners ascending"),
        check("corner-assumption", table.assumption.holds,
              inconclusive=table.assumption.inconclusive
              and not table.assumption.holds,
              measured=min(c.margin for c in table.assumption.vertices)),
    ]
    if args.csv:
        write_csv(args.csv, ("vertex", "alpha", "mu1", "field"),
                  [(v, a, m, H) for v, a, m, H in table.rows])
    return _finish(args, "fields", config, results, {}, checks, t0,
                   f"critical fields at kappa={table.kappa:g}: "
                   f"bulk {table.h_c2:g}, surface {table.h_surface:.4f}, "
                   f"corners up to {max(fields):.4f}")


def _cmd_sector(args):
    t0 = time.monotonic()
    alpha = parse_angle(args.alpha)
    config = {"alpha": alpha, "mu": args.mu, "radius": args.radius,
              "step": args.step, "tol": args.tol, "seed": args.seed,
              "maxiter": args.maxiter, "restart": bool(args.restart),
              "out": args.out, "field_out": args.field_out}
    sol = minimize_sector(args.mu, alpha, args.radius, args.step,
                          tol=args.tol, seed=args.seed, maxiter=args.maxiter,
                          restart=args.restart)
    br = sol.breakdown
    results = {"mu": sol.mu, "alpha": sol.alpha, "energy": sol.energy,
               "kinetic": br.kinetic, "mass2": br.mass2, "mass4": br.mass4,
               "supnorm": sol.sup, "grad_norm": sol.grad_norm,
               "iterations": sol.iterations, "threshold": sol.threshold,
               "restart_gap": sol.restart_gap, "trivial": sol.trivial,
               "fh_slope": feynman_hellmann(sol), "decay": sol.decay}
    m2 = br.mass2
    virial = abs(sol.energy + 0.5 * sol.mu * br.mass4)
    wnorm = float(np.linalg.norm(sol.field))
    vtol = 10.0 * args.tol * max(1.0, math.sqrt(m2)) * max(wnorm, 1.0)
    checks = [
        check("amplitude-bound", sol.sup <= 1.0 + 1e-6, measured=sol.sup,
              tolerance=1.0 + 1e-6),
        check("nonpositive-energy", sol.energy <= 1e-12,
              measured=sol.energy, tolerance=0.0),
        check("virial-identity", virial <= vtol, measured=virial,
              tolerance=vtol,
              detail="energy against the quartic mass at a critical point"),
        check("stationarity", sol.grad_norm
              <= args.tol * max(1.0, math.sqrt(m2)) * (1 + 1e-12),
              measured=sol.grad_norm,
              tolerance=args.tol * max(1.0, math.sqrt(m2))),
    ]
    if args.field_out:
        payload = field_to_json(sol.grid, sol.field)
        payload["kind"] = "sector-field"
        payload["mu"] = sol.mu
        payload["alpha"] = sol.alpha
        from .results import atomic_write_text
        atomic_write_text(args.field_out, canonical_json(payload))
    return _finish(args, "sector", config, results, {}, checks, t0,
                   f"E({args.mu:g}, {_angle_label(alpha)}) = "
                   f"{sol.energy:.8f} (sup {sol.sup:.4f}, "
                   f"{sol.iterations} iterations)")


def _cmd_sweep(args):
    t0 = time.monotonic()
    alpha = parse_angle(args.alpha)
    if args.mu_grid:
        grid = np.asarray(parse_floats(args.mu_grid))
    elif args.mu_from is not None and args.mu_to is not None:
        n = int(math.floor((args.mu_to - args.mu_from) / args.mu_step
                           + 1e-9)) + 1
        grid = args.mu_from + args.mu_step * np.arange(n)
    else:
        grid = default_mu_grid(alpha, args.radius, args.step,
                               spacing=args.mu_step, tol=args.tol,
                               seed=args.seed)
    config = {"alpha": alpha, "mu_grid": [float(m) for m in grid],
              "radius": args.radius, "step": args.step, "tol": args.tol,
              "seed": args.seed, "warm": bool(args.warm),
              "kink_threshold": args.kink_threshold, "out": args.out,
              "csv": args.csv}
    sweep = mu_sweep(alpha, grid, args.radius, args.step, tol=args.tol,
                     seed=args.seed, warm=args.warm)
    kinks = kink_scan(sweep, args.kink_threshold)
    rates = [s.decay.rate if s.decay.defined else None
             for s in sweep.solutions]
    results = {"alpha": alpha, "mu_grid": sweep.mu_grid,
               "energies": sweep.energies, "fh_slopes": sweep.fh_slopes,
               "left_quotients": sweep.left_quotients,
               "right_quotients": sweep.right_quotients,
               "quotient_errors": sweep.quotient_errors,
               "supnorms": [s.sup for s in sweep.solutions],
               "mass2": [s.breakdown.mass2 for s in sweep.solutions],
               "mass4": [s.breakdown.mass4 for s in sweep.solutions],
               "decay_rates": rates, "threshold": sweep.threshold,
               "radius": sweep.radius, "step": sweep.step,
               "kinks": kinks}
    d2 = np.diff(sweep.energies, 2)
    dmu = np.diff(sweep.mu_grid)
    above = sweep.mu_grid > sweep.threshold
    below = ~above
    drops = np.diff(sweep.energies)[above[:-1]]
    checks = [
        check("concavity", bool(np.all(d2 <= 2.0 * args.tol)),
              measured=float(d2.max()) if len(d2) else 0.0,
              tolerance=2.0 * args.tol,
              detail="second differences of the energy curve"),
        check("zero-below-threshold",
              bool(np.all(np.abs(sweep.energies[below]) <= args.tol)),
              measured=float(np.abs(sweep.energies[below]).max())
              if below.any() else 0.0, tolerance=args.tol),
        check("decreasing-above-threshold",
              bool(np.all(drops < 0.0)) if len(drops) else True,
              measured=float(drops.max()) if len(drops) else None,
              detail="energy strictly decreasing past the threshold"),
        check("uniform-grid",
              bool(np.allclose(dmu, dmu[0], rtol=1e-9, atol=0.0)),
              detail="second-order one-sided quotients need uniform spacing"),
    ]
    if args.csv:
        rows = []
        for i in range(len(sweep.mu_grid)):
            rows.append((sweep.mu_grid[i], sweep.energies[i],
                         sweep.fh_slopes[i], sweep.left_quotients[i],
                         sweep.right_quotients[i], sweep.solutions[i].sup,
                         sweep.solutions[i].breakdown.mass2,
                         sweep.solutions[i].breakdown.mass4, rates[i]))
        write_csv(args.csv, SWEEP_COLUMNS, rows)
    return _finish(args, "sweep", config, results, {}, checks, t0,
                   f"swept {len(grid)} mu points for "
                   f"alpha={_angle_label(alpha)}; threshold "
                   f"{sweep.threshold:.6f}, {len(kinks)} kink candidates")


def _solution_results(sol, lib):
    br = sol.breakdown
    kap2 = sol.params.kappa ** 2
    corners = [local_quantities(sol, k)
               for k in range(sol.domain.n_vertices)]
    cert = decay_certificate(sol, sector_solutions=lib)
    gec = global_energy_check(sol, lib)
    return {
        "kappa": sol.params.kappa, "mu": sol.params.mu,
        "delta": sol.params.delta, "step": sol.params.step,
        "ell": sol.params.ell, "energy": sol.energy,
        "kinetic": br.kinetic, "l2mass": kap2 * br.mass2,
        "l4mass": kap2 * br.mass4, "supnorm": sol.supnorm,
        "grad_norm": sol.grad_norm, "el_norm": sol.el_norm,
        "iterations": sol.iterations, "kinetic_ratio": sol.kinetic_ratio,
        "restart_gap": sol.restart_gap, "corners": corners,
        "decay": cert, "global_check": gec,
    }, corners, cert


def _cmd_solve(args):
    t0 = time.monotonic()
    domain = load_polygon(args.polygon)
    params = run_params(args.kappa, args.mu, args.delta, args.step)
    config = {"polygon": args.polygon, "kappa": params.kappa,
              "mu": params.mu, "delta": params.delta, "step": params.step,
              "tol": args.tol, "seed": args.seed,
              "restart": bool(args.restart), "out": args.out,
              "field_out": args.field_out}
    config["sector_radius"] = args.sector_radius
    config["sector_step"] = args.sector_step
    assumption = check_corner_assumption(domain, tol=args.tol,
                                         seed=args.seed)
    lib = sector_library(domain, params.mu, radius=args.sector_radius,
                         step=args.sector_step, tol=args.tol, seed=args.seed)
    sol = minimize_gl(domain, params, tol=args.tol, seed=args.seed,
                      restart=args.restart, sector_solutions=lib,
                      assumption=assumption)
    results, corners, cert = _solution_results(sol, lib)
    rng = np.random.default_rng(args.seed + 101)
    a, b = rng.uniform(-2.0, 2.0, size=2)
    wg, lg = gauge_transform(sol.grid, sol.field, sol.links,
                             lambda x, y: a * x + b * y)
    eg = gl_energy(sol.grid, wg, lg, params.kappa).total
    gauge_dev = abs(eg - sol.energy) / max(abs(sol.energy), 1e-30)
    checks = [
        check("amplitude-bound", sol.supnorm <= 1.0 + 1e-6,
              measured=sol.supnorm, tolerance=1.0 + 1e-6),
        check("stationarity", sol.grad_norm <= args.tol
              * max(1.0, math.sqrt(sol.breakdown.mass2)) * (1 + 1e-12),
              measured=sol.grad_norm),
        check("gauge-invariance", gauge_dev <= 1e-10, measured=gauge_dev,
              tolerance=1e-10,
              detail="energy drift under a random linear gauge phase"),
        check("kinetic-ratio-reported", True, measured=sol.kinetic_ratio,
              detail="kinetic over kappa^2 mass2; reported, not asserted"),
    ]
    if cert.defined:
        checks.append(check("localization-reported", True,
                            measured=cert.outside_fraction,
                            detail="mass fraction outside corner patches"))
    if args.field_out:
        payload = field_to_json(sol.grid, sol.field)
        payload["kind"] = "gl-field"
        payload["kappa"] = params.kappa
        payload["mu"] = params.mu
        from .results import atomic_write_text
        atomic_write_text(args.field_out, canonical_json(payload))
    return _finish(args, "solve", config, results, {}, checks, t0,
                   f"energy = {sol.energy:.8f} at kappa={params.kappa:g}, "
                   f"mu={params.mu:g} (sup {sol.supnorm:.4f}, "
                   f"{sol.iterations} iterations)")


def _sweep_from_document(doc):
    res = doc["document"]["results"]
    mu_grid = np.asarray(res["mu_grid"], dtype=float)
    energies = np.asarray(res["energies"], dtype=float)
    left, right, qerr = _one_sided_tables(mu_grid, energies)
    return MuSweep(alpha=float(res["alpha"]), mu_grid=mu_grid,
                   energies=energies,
                   fh_slopes=np.asarray(res["fh_slopes"], dtype=float),
                   left_quotients=left, right_quotients=right,
                   quotient_errors=qerr, solutions=[],
                   threshold=float(res["threshold"]),
                   radius=float(res["radius"]), step=float(res["step"]),
                   warm=True)


def _cmd_verify(args):
    t0 = time.monotonic()
    domain = load_polygon(args.polygon)
    kappas = parse_floats(args.kappas)
    if not kappas:
        raise ParameterError("at least one kappa is required")
    assumption = check_corner_assumption(domain, tol=args.tol,
                                         seed=args.seed)
    lam1 = min(c.mu1 for c in assumption.vertices)
    mu = args.mu if args.mu is not None \
        else 0.5 * (lam1 + assumption.theta0)
    config = {"polygon": args.polygon, "kappas": kappas, "mu": mu,
              "delta": args.delta, "tol": args.tol, "seed": args.seed,
              "restart": bool(args.restart), "sector_dir": args.sector_dir,
              "out": args.out, "csv": args.csv}
    sweeps = {}
    if args.sector_dir:
        import glob
        import os.path
        for path in sorted(glob.glob(os.path.join(args.sector_dir,
                                                  "*.json"))):
            doc = read_document(path)
            ensure_schema(doc, path)
            if doc["document"].get("command") != "sweep":
                continue
            sweep = _sweep_from_document(doc)
            sweeps[round(sweep.alpha, 12)] = sweep
    config["sector_radius"] = args.sector_radius
    config["sector_step"] = args.sector_step
    report = verify_concentration(domain, kappas, mu, delta=args.delta,
                                  tol=args.tol, seed=args.seed,
                                  sweeps=sweeps or None,
                                  restart=args.restart,
                                  assumption=assumption,
                                  sector_radius=args.sector_radius,
                                  sector_step=args.sector_step)
    results = {"mu": report.mu, "delta": report.delta,
               "kappas": report.kappas, "rows": report.rows,
               "global_checks": report.global_checks,
               "sector_energies": report.sector_energies,
               "derivatives": report.derivatives, "trends": report.trends,
               "matched_l2_variant": report.matched_l2_variant,
               "matched_kinetic_variant": report.matched_kinetic_variant,
               "solution_stats": report.solution_stats,
               "decay": report.decay}
    last = report.kappas[-1]
    last_rows = [r for r in report.rows if r.kappa == last]
    checks = [
        check("corner-assumption", assumption.holds,
              inconclusive=assumption.inconclusive and not assumption.holds),
        check("amplitude-bound",
              max(s["supnorm"] for s in report.solution_stats)
              <= 1.0 + 1e-6,
              measured=max(s["supnorm"] for s in report.solution_stats),
              tolerance=1.0 + 1e-6),
        check("trend-kinetic", report.trend_ok["dev_kinetic"],
              measured=report.trends["dev_kinetic"],
              detail="max corner deviation per kappa, one reversal allowed"),
        check("trend-l2mass", report.trend_ok["dev_l2"],
              measured=report.trends["dev_l2"]),
        check("trend-l4mass", report.trend_ok["dev_l4"],
              measured=report.trends["dev_l4"]),
        check("quartic-mass-final", report.trends["dev_l4"][-1] <= 0.25,
              measured=report.trends["dev_l4"][-1], tolerance=0.25,
              detail="|l4mass + 2E| against |2E| at the largest kappa"),
        check("l2mass-final", report.trends["dev_l2"][-1] <= 0.25,
              measured=report.trends["dev_l2"][-1], tolerance=0.25),
        check("kinetic-final", report.trends["dev_kinetic"][-1] <= 0.25,
              measured=report.trends["dev_kinetic"][-1], tolerance=0.25),
        check("global-energy-final",
              report.global_checks[-1].rel_gap <= 0.15
              or report.global_checks[-1].rel_gap != report.global_checks[-1].rel_gap,
              measured=report.global_checks[-1].rel_gap, tolerance=0.15),
    ]
    fractions = [d.outside_fraction for d in report.decay
                 if d.outside_fraction is not None]
    if len(fractions) == len(report.kappas) and len(fractions) > 1:
        checks.append(check(
            "localization-trend",
            all(b < a + 1e-12 for a, b in zip(fractions, fractions[1:])),
            measured=fractions,
            detail="mass fraction outside corner patches per kappa"))
        checks.append(check("localization-final", fractions[-1] <= 0.10,
                            measured=fractions[-1], tolerance=0.10))
    rates = [d.rate for d in report.decay if d.defined]
    if len(rates) >= 2:
        rdev = abs(rates[-1] - rates[-2]) / max(abs(rates[-2]), 1e-30)
        checks.append(check("decay-rate-consistency", rdev <= 0.30,
                            measured=rdev, tolerance=0.30,
                            detail="normalized rates at the two largest "
                            "kappa values"))
    alphas = [r.alpha for r in last_rows]
    if len(alphas) > 1 and max(alphas) - min(alphas) < 1e-9:
        l2s = [r.l2mass for r in last_rows]
        spread = (max(l2s) - min(l2s)) / max(abs(np.mean(l2s)), 1e-30)
        checks.append(check("corner-symmetry", spread <= 0.05,
                            measured=spread, tolerance=0.05,
                            detail="pairwise corner l2mass spread at the "
                            "largest kappa"))
    checks.append(check("interval-variant-identified", True,
                        measured=report.matched_l2_variant,
                        detail="slope-interval normalization the measured "
                        "l2mass matches"))
    if args.csv:
        rows = [(r.kappa, r.vertex, r.kinetic, r.l2mass, r.l4mass,
                 r.pred_kinetic, r.pred_l2, r.pred_l4, r.bound_lo_l2,
                 r.bound_hi_l2, r.dev_l2) for r in report.rows]
        write_csv(args.csv, VERIFY_COLUMNS, rows)
    return _finish(args, "verify", config, results, {}, checks, t0,
                   f"verified {len(kappas)} kappa values at mu={mu:.5f}; "
                   f"final deviations kinetic "
                   f"{report.trends['dev_kinetic'][-1]:.3f}, l2 "
                   f"{report.trends['dev_l2'][-1]:.3f}, l4 "
                   f"{report.trends['dev_l4'][-1]:.3f}")


def _cmd_report(args):
    t0 = time.monotonic()
    if not args.inputs:
        raise ParameterError("report needs at least one input document")
    docs = []
    for path in args.inputs:
        doc = read_document(path)
        ensure_schema(doc, path)
        docs.append((path, doc["document"]))
    config = {"inputs": list(args.inputs), "out_dir": args.out_dir,
              "out": args.out}
    import os
    os.makedirs(args.out_dir, exist_ok=True)
    written = []
    sweep_docs = [d for _, d in docs if d["command"] == "sweep"]
    if sweep_docs:
        rows = []
        for d in sweep_docs:
            res = d["results"]
            for i in range(len(res["mu_grid"])):
                rows.append((res["alpha"], res["mu_grid"][i],
                             res["energies"][i], res["fh_slopes"][i],
                             res["left_quotients"][i],
                             res["right_quotients"][i],
                             res["supnorms"][i], res["mass2"][i],
                             res["mass4"][i], res["decay_rates"][i]))
        rows.sort(key=lambda r: (r[0], r[1]))
        path = os.path.join(args.out_dir, "sweeps.csv")
        write_csv(path, ("alpha",) + SWEEP_COLUMNS, rows)
        written.append(path)
    verify_docs = [d for _, d in docs if d["command"] == "verify"]
    trend_summary = []
    if verify_docs:
        rows = []
        for d in verify_docs:
            res = d["results"]
            for r in res["rows"]:
                rows.append((r["kappa"], r["vertex"], r["kinetic"],
                             r["l2mass"], r["l4mass"], r["pred_kinetic"],
                             r["pred_l2"], r["pred_l4"], r["bound_lo_l2"],
                             r["bound_hi_l2"], r["dev_l2"]))
        rows.sort(key=lambda r: (r[0], r[1]))
        path = os.path.join(args.out_dir, "corner_trends.csv")
        write_csv(path, VERIFY_COLUMNS, rows)
        written.append(path)
        for d in verify_docs:
            res = d["results"]
            for name, devs in sorted(res["trends"].items()):
                vals = [v for v in devs if isinstance(v, (int, float))]
                mono = all(b <= a * 1.001 for a, b in zip(vals, vals[1:]))
                trend_summary.append({"mu": res["mu"], "quantity": name,
                                      "deviations": devs,
                                      "kappas": res["kappas"],
                                      "monotone": mono})
        path = os.path.join(args.out_dir, "trend_flags.csv")
        write_csv(path, ("mu", "quantity", "monotone", "deviations"),
                  [(t["mu"], t["quantity"], t["monotone"],
                    ";".join(repr(float(v)) for v in t["deviations"]))
                   for t in trend_summary])
        written.append(path)
    fields_docs = [d for _, d in docs if d["command"] == "fields"]
    if fields_docs:
        rows = []
        for d in fields_docs:
            res = d["results"]
            for r in res["rows"]:
                rows.append((res["kappa"], r["vertex"], r["alpha"],
                             r["mu1"], r["field"]))
        rows.sort(key=lambda r: (r[0], r[3]), reverse=False)
        path = os.path.join(args.out_dir, "critical_fields.csv")
        write_csv(path, ("kappa", "vertex", "alpha", "mu1", "field"), rows)
        written.append(path)
    mu1_docs = [d for _, d in docs if d["command"] in ("mu1", "theta0")]
    if mu1_docs:
        rows = []
        for d in mu1_docs:
            res = d["results"]
            if d["command"] == "mu1":
                rows.append(("mu1", res["alpha"], res["mu1"],
                             res["uncertainty"]))
            else:
                rows.append(("theta0", "", res["theta0"],
                             res["uncertainty"]))
        rows.sort(key=lambda r: (r[0], str(r[1])))
        path = os.path.join(args.out_dir, "thresholds.csv")
        write_csv(path, ("kind", "alpha", "value", "uncertainty"), rows)
        written.append(path)
    results = {"inputs": [p for p, _ in docs], "written": written,
               "trend_summary": trend_summary,
               "counts": {"sweep": len(sweep_docs),
                          "verify": len(verify_docs),
                          "fields": len(fields_docs),
                          "thresholds": len(mu1_docs)}}
    return _finish(args, "report", config, results, {}, [], t0,
                   f"merged {len(docs)} documents into {len(written)} "
                   f"tables under {args.out_dir}")


def _add_common(p):
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="result document path")


def build_parser():
    parser = _Parser(prog="cornergl",
                     description="corner-localized superconductivity runs")
    parser.add_argument("--version", action="version",
                        version=f"cornergl {__version__}")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("mu1", parents=[], help="wedge ground threshold")
    p.add_argument("--alpha", required=True,
                   help="opening angle, e.g. 1.2, pi/2, 3pi/5")
    p.add_argument("--schedule", default=None,
                   help="radius:step pairs, e.g. 14:0.07,14:0.035")
    _add_common(p)
    p.set_defaults(func=_cmd_mu1)

    p = sub.add_parser("theta0", help="half-plane edge constant")
    p.add_argument("--schedule", default=None,
                   help="depth:step pairs, e.g. 14:0.07,14:0.035")
    p.add_argument("--dirichlet", action="store_true",
                   help="clamp the physical edge too")
    _add_common(p)
    p.set_defaults(func=_cmd_theta0)

    p = sub.add_parser("fields", help="ordered critical fields of a polygon")
    p.add_argument("--polygon", required=True,
                   help="vertex JSON path or bundled name "
                   f"({', '.join(BUNDLED_POLYGONS)})")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--schedule", default=None)
    p.add_argument("--csv", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_fields)

    p = sub.add_parser("sector", help="nonlinear wedge minimizer at one mu")
    p.add_argument("--alpha", required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--radius", type=float, default=DEFAULT_RADIUS)
    p.add_argument("--step", type=float, default=DEFAULT_STEP)
    p.add_argument("--maxiter", type=int, default=40000)
    p.add_argument("--restart", action=argparse.BooleanOptionalAction,
                   default=True)
    p.add_argument("--field-out", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_sector)

    p = sub.add_parser("sweep", help="wedge energy curve over mu")
    p.add_argument("--alpha", required=True)
    p.add_argument("--mu-grid", default=None, help="explicit comma list")
    p.add_argument("--mu-from", type=float, default=None)
    p.add_argument("--mu-to", type=float, default=None)
    p.add_argument("--mu-step", type=float, default=0.01)
    p.add_argument("--radius", type=float, default=DEFAULT_RADIUS)
    p.add_argument("--step", type=float, default=DEFAULT_STEP)
    p.add_argument("--warm", action=argparse.BooleanOptionalAction,
                   default=True)
    p.add_argument("--kink-threshold", type=float, default=1e-3)
    p.add_argument("--csv", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("solve", help="full polygon minimization")
    p.add_argument("--polygon", required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.85)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--sector-radius", type=float, default=DEFAULT_RADIUS)
    p.add_argument("--sector-step", type=float, default=DEFAULT_STEP)
    p.add_argument("--restart", action=argparse.BooleanOptionalAction,
                   default=True)
    p.add_argument("--field-out", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("verify", help="corner-concentration report")
    p.add_argument("--polygon", required=True)
    p.add_argument("--kappas", default="15,25,40")
    p.add_argument("--sector-radius", type=float, default=DEFAULT_RADIUS)
    p.add_argument("--sector-step", type=float, default=DEFAULT_STEP)
    p.add_argument("--mu", type=float, default=None,
                   help="defaults to the midpoint of the admissible range")
    p.add_argument("--delta", type=float, default=0.85)
    p.add_argument("--restart", action=argparse.BooleanOptionalAction,
                   default=True)
    p.add_argument("--sector-dir", default=None,
                   help="directory of sweep documents to reuse")
    p.add_argument("--csv", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("report", help="merge documents into tables")
    p.add_argument("--inputs", nargs="+", default=[])
    p.add_argument("--out-dir", default=".")
    _add_common(p)
    p.set_defaults(func=_cmd_report)
    return parser


def run(argv):
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            raise ParameterError("a subcommand is required; see --help")
        return args.func(args)
    except (KeyboardInterrupt, SystemExit):
        raise
    except CornerGLError as exc:
        _emit_error(exc)
        return 1
    except Exception as exc:
        _emit_error(exc)
        return 1


def _emit_error(exc):
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)},
                     sort_keys=True), file=sys.stderr)


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
