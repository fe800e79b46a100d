"""Experiment orchestration: solve, measure, write artifacts, verify."""

import logging
import math
import platform
from contextlib import nullcontext
from pathlib import Path

import numpy as np
from sklearn.base import clone

from .. import collision
from ..grid import build_spatial_grid, build_velocity_grid
from ..kernel import CrossSectionParams
from ..norms import (NormSpec, embedding_constant, r_equivalence_check,
                     spacetime_norm, ul_sobolev_norm, ul_sobolev_profile)
from ..solver import PicardSolver, t_star
from ..weights import (WeightParams, japanese_sq, mu, mu_factorization_residual,
                       weight_ratio)
from . import calibration, io
from .config import AUTO, loads
from .scenarios import make_scenario

logger = logging.getLogger(__name__)

CHECKS = (
    ("contraction", "successive Picard differences halve in the Y-norm",
     "ratio <= 0.6 for n >= 2 and converged"),
    ("uniform_bound", "uniform-in-eps bound by twice the initial norm",
     "sup ul-norm <= 2 ul-norm(g0)"),
    ("gronwall_envelope", "closed-form Gronwall envelope while its denominator is positive",
     "norm^2 curve <= envelope with calibrated C_kappa"),
    ("moment_gain", "extra velocity weight gained by the space-time norm",
     "kappa M^2 finite and <= 2a(1 + 2 C T*(1 + 2a))"),
    ("positivity", "the iteration preserves non-negativity", "min >= -1e-12"),
    ("mu_factorization", "weight factorization through energy conservation",
     "relative residual <= 1e-12"),
    ("conservation_trend", "collision moments vanish under refinement",
     "fine residual < coarse residual"),
    ("bilinear_ratio", "bilinear bound with an eps-dependent constant",
     "finite, nondecreasing as eps decreases"),
    ("convolution_constant", "weighted convolution bounded by <v>^gamma", "finite"),
    ("r_equivalence", "window radius does not change the norm class",
     "norm_phi1 <= norm_phiR"),
)
CHECK_NAMES = tuple(c[0] for c in CHECKS)

POSITIVITY_FLOOR = -1e-12
CONTRACTION_LIMIT = 0.6
IDENTITY_TOL = 1e-12
N_IDENTITY_SAMPLES = 10_000
N_BILINEAR_FIELDS = 50
STAT_N_X = 8
CONSERVATION_N_V = (6, 12)


def make_estimator(cfg, eps):
    return PicardSolver(**cfg.solver_kwargs(eps))


def initial_data(cfg, sgrid, vgrid):
    field = make_scenario(cfg.scenario, cfg.scenario_params, sgrid, vgrid,
                          WeightParams(cfg.rho, cfg.kappa), cfg.seed)
    return field.values


def _threads(n):
    if n is None:
        return nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=int(n))


def _random_collisions(n, rng):
    v = rng.normal(scale=2.0, size=(n, 3))
    vs = rng.normal(scale=2.0, size=(n, 3))
    sig = rng.normal(size=(n, 3))
    sig /= np.linalg.norm(sig, axis=1, keepdims=True)
    return v, vs, sig


def identity_residuals(wparams, n_samples=N_IDENTITY_SAMPLES, seed=0):
    """Max relative residuals of the exact collision identities on random samples."""
    rng = np.random.default_rng(seed)
    v, vs, sig = _random_collisions(n_samples, rng)
    mom, energy = collision.kinematic_residuals(v, vs, sig)
    times = rng.uniform(0.0, wparams.T0, size=8)
    chunks = np.array_split(np.arange(n_samples), times.size)
    factor = max(float(np.max(mu_factorization_residual(t, v[c], vs[c], sig[c], wparams)))
                 for t, c in zip(times, chunks))
    ratio = max(float(np.max(weight_ratio(v, vs, sig, ell))) for ell in (0.0, 1.0, 3.0, 6.0))
    return {"momentum": float(np.max(mom)), "energy": float(np.max(energy)),
            "mu_factorization": factor, "weight_ratio_max": ratio}


def conservation_trend(cfg, eps):
    """Collision-moment defect of a resolved grid Maxwellian on each velocity grid.

    The test density is exp(-|v|^2 / 2); the five discrete moments of Q(f, f)
    are normalized by the same moments of the loss term |f L(f)|.
    """
    out = []
    for n_v in CONSERVATION_N_V:
        vg = build_velocity_grid(cfg.v_max, n_v)
        floor = 0.5 * vg.h if cfg.r_floor == AUTO else float(cfg.r_floor)
        kp = CrossSectionParams(cfg.gamma, cfg.s, cfg.K, eps, floor)
        ws = collision.CollisionWorkspace(vg, kp, cfg.n_theta, cfg.n_phi)
        f = np.exp(-0.5 * np.sum(vg.points ** 2, axis=1))
        A = collision.moment_matrix(vg)
        res = A @ collision.q_bilinear(f, f, ws)
        ref = np.abs(A) @ (f * collision.weighted_loss(f, np.ones(vg.size), ws))
        scale = float(np.linalg.norm(ref))
        out.append(float(np.linalg.norm(res)) / scale if scale > 0 else 0.0)
    return out


def bilinear_ratio(cfg, eps, ws, wparams, spec):
    """Max over random smooth fields of ||T(U,U,mu)|| / ||U||^2 on a reduced x-grid."""
    sgrid = build_spatial_grid(cfg.L, STAT_N_X, cfg.active_dims)
    low = NormSpec(spec.k, spec.ell + max(cfg.gamma, 0.0), spec.fd_order)
    fields = [make_scenario("random_smooth", {}, sgrid, ws.vgrid, wparams,
                            seed=cfg.seed + 1 + i).values for i in range(N_BILINEAR_FIELDS)]
    batch = np.concatenate(fields)
    weight = mu(0.0, ws.vgrid.points, wparams)
    out = collision.t_form(batch, batch, weight, ws).reshape(len(fields), sgrid.size, -1)
    worst = 0.0
    for U, G in zip(fields, out):
        den = ul_sobolev_norm(U, sgrid, ws.vgrid, low) ** 2
        worst = max(worst, ul_sobolev_norm(G, sgrid, ws.vgrid, spec) / den)
    return worst


def loss_bound_constant(g0, est):
    """max |L(g0)| / (<v>^gamma ||g0(x, .)||_{L^2_v}) over nodes."""
    ctx = est.context_
    L = collision.loss_multiplier(g0, 0.0, ctx.workspace, ctx.wparams)
    l2 = np.sqrt(np.sum(g0 ** 2, axis=1) * ctx.vgrid.cell_volume)
    weight = japanese_sq(ctx.vgrid.points) ** (0.5 * ctx.kparams.gamma)
    mask = l2 > 0
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(L[mask]) / (weight[None, :] * l2[mask, None])))


# ---------------------------------------------------------------- solving

def _envelope_constants(cfg, est, g0, g0_norm):
    """C_kappa and C from a coarser pre-run on the same horizon."""
    pre = clone(est).set_params(T=est.T_, n_steps=max(2, cfg.n_steps // 2),
                                compute_residual=False)
    pre.fit(g0)
    ck = cfg.C_kappa
    if ck == AUTO:
        prof = ul_sobolev_profile(pre.solution_, pre.context_.sgrid,
                                  pre.context_.vgrid, pre.context_.spec) ** 2
        ck = calibration.fit_c_kappa(pre.times_, prof)
    ck = float(ck)
    T_star = t_star(ck, g0_norm) if ck > 0 else math.inf
    cm = cfg.C_moment
    if cm == AUTO:
        ctx = pre.context_
        m_sq = cfg.kappa * spacetime_norm(pre.solution_, ctx.dt, ctx.sgrid, ctx.vgrid,
                                          ctx.spec.raised()) ** 2
        cm = calibration.fit_c_moment(m_sq, g0_norm ** 2, T_star)
    return ck, T_star, float(cm)


def solve_one(cfg, eps, g0):
    """Solve at one eps and collect every per-run measurement."""
    est = make_estimator(cfg, eps)
    est.fit(g0)
    ctx = est.context_
    spec = ctx.spec
    g0_norm = est.g0_norm_
    ck, T_star, cm = _envelope_constants(cfg, est, g0, g0_norm)
    seq = est.solution_
    prof = ul_sobolev_profile(seq, ctx.sgrid, ctx.vgrid, spec)
    post = ul_sobolev_profile(seq, ctx.sgrid, ctx.vgrid,
                              NormSpec(cfg.post_k, cfg.ell, cfg.fd_order))
    m_sq = cfg.kappa * spacetime_norm(seq, ctx.dt, ctx.sgrid, ctx.vgrid, spec.raised()) ** 2
    r_eq = {}
    for R in (2, 3):
        if 2 * R <= cfg.L:
            ok, const = r_equivalence_check(g0, ctx.sgrid, ctx.vgrid, spec, R)
            r_eq[str(R)] = {"lower_ok": ok, "C": const}
    emb = (embedding_constant(g0, ctx.sgrid, ctx.vgrid, cfg.fd_order)
           if ctx.vgrid.n_per_axis >= 5 else math.nan)
    result = {
        "eps": eps, "T": est.T_, "K0": est.K0_, "D0": est.D0_, "dt": ctx.dt,
        "g0_norm": g0_norm, "times": list(est.times_),
        "C_kappa": ck, "T_star": T_star, "C_moment": cm,
        "r_floor": ctx.kparams.r_floor,
        "iteration": est.report_.as_dict(),
        "ul_profile": list(prof), "ul_profile_post": list(post),
        "sup_norm": [float(np.max(np.abs(g))) for g in seq],
        "min_value": float(min(np.min(g0), *est.report_.positivity_min)),
        "kappa_moment_sq": m_sq,
        "bilinear_ratio": bilinear_ratio(cfg, eps, ctx.workspace, ctx.wparams, spec),
        "convolution_constant": collision.convolution_constant(
            ctx.vgrid, cfg.gamma, cfg.rho, ctx.kparams.r_floor),
        "loss_bound_constant": loss_bound_constant(g0, est),
        "embedding_constant": emb,
        "r_equivalence": r_eq,
    }
    return est, result


def _csv_rows(cfg, runs):
    rows = []
    for run in runs:
        tag = f"[eps={run['eps']!r}]"
        for j, t in enumerate(run["times"]):
            rows.append((t, "ul_norm" + tag, cfg.k, cfg.ell, run["ul_profile"][j]))
            rows.append((t, "ul_norm" + tag, cfg.post_k, cfg.ell, run["ul_profile_post"][j]))
            rows.append((t, "sup_norm" + tag, 0, 0.0, run["sup_norm"][j]))
        rows.append((run["T"], "kappa_moment_sq" + tag, cfg.k, cfg.ell + 1,
                     run["kappa_moment_sq"]))
    return rows


def environment():
    import numba
    import sklearn
    return {"python": platform.python_version(), "platform": platform.platform(),
            "numpy": np.__version__, "numba": numba.__version__,
            "sklearn": sklearn.__version__}


def run_experiment(cfg, out=None, force=False, threads=None, do_verify=True):
    """Run every eps of ``cfg``; write artifacts to ``out`` (default cfg.out)."""
    out = io.prepare_run_dir(out or cfg.out, force=force)
    echo = cfg.dumps()
    (out / "config.txt").write_text(echo)
    wparams = WeightParams(cfg.rho, cfg.kappa)
    runs = []
    with _threads(threads):
        for idx, eps in enumerate(cfg.eps):
            est = make_estimator(cfg, eps)
            sgrid, vgrid = est.make_grids()
            g0 = initial_data(cfg, sgrid, vgrid)
            if idx == 0:
                io.write_dump(out / "g0.ulbz", g0, echo + "# array: g0 (n_x_total, n_v_total)\n")
            logger.info("solving eps=%g", eps)
            est, result = solve_one(cfg, eps, g0)
            io.write_dump(out / f"g_eps{idx}.ulbz", est.solution_,
                          echo + f"# array: g (n_t, n_x_total, n_v_total) at eps={eps!r}\n")
            runs.append(result)

        diagnostics = {
            "identities": identity_residuals(wparams, seed=cfg.seed),
            "conservation": conservation_trend(cfg, cfg.eps[0]),
            "conservation_n_v": list(CONSERVATION_N_V),
        }
    io.write_csv(out / "timeseries.csv", _csv_rows(cfg, runs))
    report = {"config": echo, "environment": environment(), "runs": runs,
              "diagnostics": diagnostics}
    io.write_json(out / "report.json", report)
    verification = verify(out) if do_verify else None
    io.mark_complete(out)
    return out, verification


# ---------------------------------------------------------------- verification

def _record(name, status, measured=None, reason=""):
    anchor, threshold = next((a, t) for n, a, t in CHECKS if n == name)
    return {"name": name, "anchor": anchor, "threshold": threshold,
            "measured": measured, "status": status, "reason": reason}


def _recompute_profiles(cfg, run_dir, runs):
    """ul-norm profiles and minima recomputed from the field dumps."""
    out = []
    for idx, run in enumerate(runs):
        path = Path(run_dir) / f"g_eps{idx}.ulbz"
        if not path.exists():
            out.append(None)
            continue
        seq = io.read_dump(path)
        sgrid = build_spatial_grid(cfg.L, cfg.n_x, cfg.active_dims)
        vgrid = build_velocity_grid(cfg.v_max, cfg.n_v)
        spec = NormSpec(cfg.k, cfg.ell, cfg.fd_order)
        out.append((ul_sobolev_profile(seq, sgrid, vgrid, spec), float(np.min(seq))))
    return out


def _check_runs(cfg, runs, recomputed):
    checks = {}
    # (a)
    worst, ok = 0.0, True
    for run in runs:
        it = run["iteration"]
        ratios = it["ratios"]
        worst = max([worst, *ratios])
        ok &= bool(it["converged"]) and all(r <= CONTRACTION_LIMIT for r in ratios)
    checks["contraction"] = _record(
        "contraction", "pass" if ok else "fail",
        {"max_ratio": worst, "n_iter": [r["iteration"]["n_iter"] for r in runs],
         "converged": [r["iteration"]["converged"] for r in runs]})
    # (b), (c), (e)
    ratios, env_ok, env_margin, mins = [], True, [], []
    for run, rec in zip(runs, recomputed):
        prof = np.asarray(rec[0] if rec else run["ul_profile"])
        mins.append(rec[1] if rec else run["min_value"])
        mins.append(run["min_value"])
        a = run["g0_norm"]
        times = np.asarray(run["times"])
        T2 = min(run["T"], run["T_star"])
        inside = times <= T2 * (1 + 1e-12)
        sup = float(np.max(prof[inside]))
        ratios.append(0.0 if a == 0 else sup / a)
        env = calibration.gronwall_envelope(times[inside], a * a, run["C_kappa"])
        sq = prof[inside] ** 2
        env_ok &= bool(np.all(sq <= env * (1 + 1e-12) + 1e-300))
        env_margin.append(float(np.max(sq / np.where(env > 0, env, 1.0))) if a else 0.0)
    checks["uniform_bound"] = _record(
        "uniform_bound", "pass" if all(r <= 2.0 for r in ratios) else "fail",
        {"sup_over_initial": ratios, "eps": [r["eps"] for r in runs]})
    checks["gronwall_envelope"] = _record(
        "gronwall_envelope", "pass" if env_ok else "fail",
        {"max_curve_over_envelope": env_margin, "C_kappa": [r["C_kappa"] for r in runs]})
    checks["positivity"] = _record(
        "positivity", "pass" if min(mins) >= POSITIVITY_FLOOR else "fail",
        {"min_value": min(mins)})
    # (d)
    ok, meas = True, []
    for run in runs:
        a2 = run["g0_norm"] ** 2
        bound = calibration.moment_bound(a2, run["C_moment"], run["T_star"])
        val = run["kappa_moment_sq"]
        ok &= math.isfinite(val) and val <= bound * (1 + 1e-12) + 1e-300
        meas.append({"kappa_M_sq": val, "bound": bound, "C": run["C_moment"]})
    checks["moment_gain"] = _record("moment_gain", "pass" if ok else "fail", meas)
    # (h), (i), (j)
    order = sorted(runs, key=lambda r: -r["eps"])
    stats = [r["bilinear_ratio"] for r in order]
    finite = all(math.isfinite(s) for s in stats)
    mono = all(b >= a * (1 - 1e-12) for a, b in zip(stats, stats[1:]))
    checks["bilinear_ratio"] = _record(
        "bilinear_ratio", "pass" if finite and mono else "fail",
        {"eps": [r["eps"] for r in order], "ratio": stats})
    conv = [r["convolution_constant"] for r in runs]
    checks["convolution_constant"] = _record(
        "convolution_constant", "pass" if all(math.isfinite(c) for c in conv) else "fail",
        {"constant": conv})
    tested = [(R, v) for r in runs for R, v in r["r_equivalence"].items()]
    if tested:
        checks["r_equivalence"] = _record(
            "r_equivalence", "pass" if all(v["lower_ok"] for _, v in tested) else "fail",
            {R: v for R, v in tested})
    else:
        checks["r_equivalence"] = _record("r_equivalence", "skipped",
                                          reason="box too small for R = 2 or 3")
    return checks


def verify(run_dir):
    """Evaluate every check from the run artifacts; writes verification.json.

    Returns a report dict whose ``checks`` always enumerate every name.
    """
    run_dir = Path(run_dir)
    checks = {}
    report_path = run_dir / "report.json"
    cfg = None
    if report_path.exists():
        report = io.read_json(report_path)
        cfg = loads(report["config"])
        runs = report.get("runs", [])
        diag = report.get("diagnostics", {})
        if runs:
            checks.update(_check_runs(cfg, runs, _recompute_profiles(cfg, run_dir, runs)))
        ident = diag.get("identities")
        if ident is not None:
            worst = max(ident["mu_factorization"], ident["momentum"], ident["energy"])
            ok = worst <= IDENTITY_TOL and ident["weight_ratio_max"] <= 1.0 + IDENTITY_TOL
            checks["mu_factorization"] = _record("mu_factorization",
                                                 "pass" if ok else "fail", ident)
        cons = diag.get("conservation")
        if cons is not None:
            ok = all(b < a for a, b in zip(cons, cons[1:])) or max(cons) == 0.0
            checks["conservation_trend"] = _record(
                "conservation_trend", "pass" if ok else "fail",
                {"n_v": diag.get("conservation_n_v"), "residual": cons})
    ordered = []
    for name in CHECK_NAMES:
        ordered.append(checks.get(name) or _record(
            name, "skipped", reason="artifact missing" if cfg is None else "not measured"))
    all_pass = all(c["status"] != "fail" for c in ordered)
    result = {"run_dir": str(run_dir), "checks": ordered, "all_pass": all_pass,
              "environment": environment()}
    io.write_json(run_dir / "verification.json", result)
    return result
