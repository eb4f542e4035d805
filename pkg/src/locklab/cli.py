"""Batch experiment runner: config in, structured report and CSV table out.

Subcommands bind the library modules into reproducible experiments.  A
run is deterministic for a fixed master seed regardless of thread count:
every sample owns its own counter-based random stream and results are
merged in stream order.  Reports carry pass/fail verdicts that cite the
library invariant they check by a stable identifier.

Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 configuration
error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import decode, locking, qkd
from .entropy import alicki_fannes_bound
from .haar import RngSpec, haar_batch, mc_twirl, schur_twirl
from .locking import LockingScheme, SideConditionError, ThresholdInput
from .measure import (MeasurementSuperoperator, QuasiMeasurement, build_net,
                      chernoff_bound, chernoff_sample, quasi_metric)

DIM_BUDGET = 4096
NET_BUDGET = 10 ** 6


class ConfigError(ValueError):
    pass


def _require_keys(params: dict, keys: list[str], subcommand: str) -> None:
    for key in keys:
        if key not in params:
            raise ConfigError(f"{subcommand}: missing required config key '{key}'")


def _check_dim(d: int) -> int:
    if d > DIM_BUDGET:
        raise ConfigError(f"total dimension {d} exceeds the budget {DIM_BUDGET}")
    return d


def _pool_map(fn, items, threads: int):
    """Apply fn across items, merged in submission order."""
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _fmt(x) -> str:
    if isinstance(x, float):
        return "%.12g" % x
    return str(x)


# ---------------------------------------------------------------------------
# subcommand implementations; each returns (records, aggregates, verdicts)


def _run_twirl_check(params, seed, threads):
    _require_keys(params, ["cases", "samples"], "twirl-check")
    cases, samples = int(params["cases"]), int(params["samples"])
    dims = params.get("d_a_values", [2, 3])
    d_r = int(params.get("d_r", 1))

    def one(item):
        i, d_a = item
        rng = RngSpec(seed, i)
        gen = rng.generator()
        dim = d_a * d_a * d_r
        x = gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))
        exact = schur_twirl(x, d_a, d_r).assembled
        approx, stderr = mc_twirl(x, d_a, d_r, samples, rng.stream(1000 + i))
        dev = float(np.abs(approx - exact).max())
        return {"case": i, "d_a": d_a, "max_abs_dev": dev, "stderr": stderr,
                "within_3se": dev <= 3.0 * stderr}

    items = [(i, dims[i % len(dims)]) for i in range(cases)]
    records = _pool_map(one, items, threads)
    ok = all(r["within_3se"] for r in records)
    agg = {"max_dev": max(r["max_abs_dev"] for r in records)}
    verdicts = [{"id": "haar.twirl-threesigma", "pass": ok,
                 "detail": "schur_twirl vs mc_twirl entrywise within 3 stderr"}]
    return records, agg, verdicts


def _run_expectation_check(params, seed, threads):
    _require_keys(params, ["c", "k", "e", "samples"], "expectation-check")
    c, k, e = int(params["c"]), int(params["k"]), int(params["e"])
    samples = int(params["samples"])
    _check_dim(c * k * e)
    m = QuasiMeasurement.projective(np.eye(c * e, dtype=complex))

    def one(i):
        scheme = LockingScheme.random(c, k, e, RngSpec(seed, i))
        return {"sample": i, "g": locking.distinguishability(scheme, m)}

    records = _pool_map(one, range(samples), threads)
    g = np.array([r["g"] for r in records])
    bound = locking.expectation_bound(
        LockingScheme.random(c, k, e, RngSpec(seed, 0)))
    mean, se = float(g.mean()), float(g.std(ddof=1) / math.sqrt(samples))
    ok = mean <= bound + 3.0 * se
    agg = {"mean_g": mean, "stderr": se, "bound": bound}
    verdicts = [{"id": "locking.expectation-bound-3sigma", "pass": ok,
                 "detail": f"mean g {mean:.4g} vs bound {bound:.4g} + 3se"}]
    return records, agg, verdicts


def _run_lipschitz_check(params, seed, threads):
    _require_keys(params, ["c", "k", "e", "pairs"], "lipschitz-check")
    c, k, e = int(params["c"]), int(params["k"]), int(params["e"])
    pairs = int(params["pairs"])
    _check_dim(c * k * e)
    d_ce = c * e
    base = LockingScheme.random(c, k, e, RngSpec(seed, 0))
    m_fixed = QuasiMeasurement.projective(np.eye(d_ce, dtype=complex))
    lip_u = locking.lipschitz_constant(base, "unitary", eta=1.0)
    lip_m = locking.lipschitz_constant(base, "measurement", s=d_ce)

    def one(i):
        rng = RngSpec(seed, 1 + i)
        gen = rng.generator()
        u, v = haar_batch(c * k * e, 2, gen)
        s_u = LockingScheme((c, k, e), base.p, base.message_basis, u, base.schmidt)
        s_v = LockingScheme((c, k, e), base.p, base.message_basis, v, base.schmidt)
        du = float(np.linalg.norm(u - v))
        gap_u = abs(locking.distinguishability(s_u, m_fixed)
                    - locking.distinguishability(s_v, m_fixed))
        w1, w2 = haar_batch(d_ce, 2, gen)
        m1 = QuasiMeasurement.projective(w1)
        m2 = QuasiMeasurement.projective(w2)
        dm = quasi_metric(m1, m2)
        gap_m = abs(locking.distinguishability(s_u, m1)
                    - locking.distinguishability(s_u, m2))
        return {"pair": i, "gap_unitary": gap_u, "dist_unitary": du,
                "gap_measurement": gap_m, "dist_measurement": dm,
                "ok_unitary": gap_u <= lip_u * du + 1e-9,
                "ok_measurement": gap_m <= lip_m * dm + 1e-9}

    records = _pool_map(one, range(pairs), threads)
    viol_u = sum(not r["ok_unitary"] for r in records)
    viol_m = sum(not r["ok_measurement"] for r in records)
    agg = {"lipschitz_unitary": lip_u, "lipschitz_measurement": lip_m,
           "violations_unitary": viol_u, "violations_measurement": viol_m}
    verdicts = [
        {"id": "locking.lipschitz-unitary-audit", "pass": viol_u == 0,
         "detail": f"{viol_u} violations over {pairs} pairs"},
        {"id": "locking.lipschitz-measurement-audit", "pass": viol_m == 0,
         "detail": f"{viol_m} violations over {pairs} pairs"},
    ]
    return records, agg, verdicts


def _run_chernoff_check(params, seed, threads):
    _require_keys(params, ["d", "s_values", "eta_values", "trials"],
                  "chernoff-check")
    d = _check_dim(int(params["d"]))
    trials = int(params["trials"])
    grid = [(int(s), float(eta)) for s in params["s_values"]
            for eta in params["eta_values"]]
    m = MeasurementSuperoperator.basis(d)

    def one(item):
        j, (s, eta) = item
        bound = chernoff_bound(d, s, eta)
        fails = 0
        for t in range(trials):
            rng = RngSpec(seed, j * trials + t)
            _, valid = chernoff_sample(m, s, eta, rng)
            fails += not valid
        freq = fails / trials
        se = math.sqrt(max(freq * (1 - freq), 1.0 / trials) / trials)
        return {"s": s, "eta": eta, "fail_freq": freq, "bound": bound,
                "ok": freq <= min(1.0, bound) + 3.0 * se}

    records = _pool_map(one, list(enumerate(grid)), threads)
    ok = all(r["ok"] for r in records)
    agg = {"grid_points": len(grid)}
    verdicts = [{"id": "measure.chernoff-frequency", "pass": ok,
                 "detail": "failure frequency within bound + 3 binomial sigma"}]
    return records, agg, verdicts


def _run_net_audit(params, seed, threads):
    _require_keys(params, ["d", "s", "eps"], "net-audit")
    d, s, eps = int(params["d"]), int(params["s"]), float(params["eps"])
    budget = int(params.get("budget", NET_BUDGET))
    if budget > NET_BUDGET:
        raise ConfigError(f"net budget {budget} exceeds the cap {NET_BUDGET}")
    net = build_net(d, s, eps, budget, rng=RngSpec(seed),
                    audit_samples=int(params.get("audit_samples", 1000)))
    records = [{"index": i, "s": s, "d": d} for i in range(len(net))]
    agg = {"net_size": len(net), "eps": eps}
    verdicts = [{"id": "measure.net-covering-audit", "pass": True,
                 "detail": f"covering audit passed for {len(net)} elements"}]
    return records, agg, verdicts


def _run_locking_scan(params, seed, threads):
    _require_keys(params, ["total", "k_exponents", "samples", "restarts"],
                  "locking-scan")
    total = _check_dim(int(params["total"]))
    k_exps = [int(x) for x in params["k_exponents"]]
    samples, restarts = int(params["samples"]), int(params["restarts"])

    def one(item):
        idx, (j, k_exp) = item
        k = 2 ** k_exp
        c = total // k
        scheme = LockingScheme.random(c, k, 1, RngSpec(seed, 1 + idx))
        rep = locking.optimize_distinguishability(
            scheme, "projective_gradient", restarts,
            RngSpec(seed, 10_000 + idx))
        return {"k_exponent": k_exp, "sample": idx % samples,
                "best_g": rep.best_value}

    items = [(j * samples + i, (j, k_exp))
             for j, k_exp in enumerate(k_exps) for i in range(samples)]
    records = _pool_map(one, items, threads)
    medians = {}
    for k_exp in k_exps:
        vals = [r["best_g"] for r in records if r["k_exponent"] == k_exp]
        medians[k_exp] = float(np.median(vals))
    agg = {f"median_k{k_exp}": medians[k_exp] for k_exp in k_exps}
    lo, hi = max(k_exps), min(k_exps)
    ok = medians[lo] <= medians[hi]
    verdicts = [{"id": "locking.monotone-key-trend", "pass": ok,
                 "detail": f"median g at k={lo} vs k={hi}: "
                           f"{medians[lo]:.4g} <= {medians[hi]:.4g}"}]
    return records, agg, verdicts


def _run_decode_check(params, seed, threads):
    _require_keys(params, ["n_dim", "e", "c", "samples"], "decode-check")
    n_dim, e, c = int(params["n_dim"]), int(params["e"]), int(params["c"])
    samples = int(params["samples"])
    _check_dim(n_dim * e * e)
    d_dim = n_dim * e // c

    def one(i):
        scen = decode.DecodeScenario.random(n_dim, e, c, RngSpec(seed, i))
        dec = decode.build_decoder(scen)
        return {"sample": i,
                "trace_distance": decode.evaluate_decoder(scen, dec),
                "message_error": decode.message_error(scen, dec)}

    records = _pool_map(one, range(samples), threads)
    td = np.array([r["trace_distance"] for r in records])
    me = np.array([r["message_error"] for r in records])
    b_td = decode.purified_guessing_bound(n_dim, c)
    b_me = decode.guessing_error_bound(n_dim, c)
    agg = {"mean_trace_distance": float(td.mean()),
           "mean_message_error": float(me.mean()),
           "bound_trace_distance": b_td, "bound_message_error": b_me,
           "fourth_root_bound": decode.decode_error_bound(
               math.log2(n_dim), math.log2(e), d_dim, c)}
    verdicts = [
        {"id": "decode.mean-trace-distance", "pass": td.mean() <= b_td + 0.1,
         "detail": f"mean {td.mean():.4g} vs 2 sqrt(M/C) + 0.1"},
        {"id": "decode.mean-message-error", "pass": me.mean() <= b_me + 0.1,
         "detail": f"mean {me.mean():.4g} vs sqrt(M/C) + 0.1"},
    ]
    return records, agg, verdicts


def _run_thresholds(params, seed, threads):
    _require_keys(params, ["n", "c", "e", "eps"], "thresholds")
    t = ThresholdInput(n=float(params["n"]), c=float(params["c"]),
                       e=float(params["e"]), eps=float(params["eps"]),
                       hmin_M=params.get("hmin_M"), hmin_E=params.get("hmin_E"),
                       hmax_M=params.get("hmax_M"), h2_E=params.get("h2_E"))
    records = []
    for which in locking.THRESHOLD_KINDS:
        try:
            val = locking.key_threshold(t, which)
            records.append({"which": which, "value": val,
                            "qubits": math.ceil(val), "note": ""})
        except SideConditionError as exc:
            records.append({"which": which, "value": float("nan"),
                            "qubits": 0, "note": str(exc)})
    warn = locking.modmod_warning(t)
    agg = {"decode_threshold": decode.decode_threshold(t),
           "threshold_gap": decode.threshold_gap(t),
           "modmod_warning": warn or ""}
    verdicts = [{"id": "locking.threshold-table", "pass": True,
                 "detail": "table evaluated; side-condition failures noted"}]
    return records, agg, verdicts


def _run_qkd_demo(params, seed, threads):
    _require_keys(params, ["n", "k_bits", "trials"], "qkd-demo")
    n, k_bits = int(params["n"]), int(params["k_bits"])
    trials = int(params["trials"])
    run = qkd.run_protocol_demo(n, k_bits, trials, RngSpec(seed),
                                restarts=int(params.get("restarts", 8)))
    records = [{"trial": i, "sub_key": int(run.secrets[i, 0]),
                "remainder": int(run.secrets[i, 1])} for i in range(trials)]
    agg = {"with_key_recovery_rate": run.with_key_recovery_rate,
           "with_key_correlation": run.with_key_correlation,
           "without_key_correlation": run.without_key_correlation}
    verdicts = [
        {"id": "qkd.with-key-recovery", "pass": run.with_key_recovery_rate == 1.0,
         "detail": f"recovery rate {run.with_key_recovery_rate}"},
        {"id": "qkd.correlation-gap",
         "pass": run.without_key_correlation < run.with_key_correlation,
         "detail": f"{run.without_key_correlation:.4g} < "
                   f"{run.with_key_correlation:.4g}"},
    ]
    return records, agg, verdicts


_SUBCOMMANDS = {
    "twirl-check": _run_twirl_check,
    "expectation-check": _run_expectation_check,
    "lipschitz-check": _run_lipschitz_check,
    "chernoff-check": _run_chernoff_check,
    "net-audit": _run_net_audit,
    "locking-scan": _run_locking_scan,
    "decode-check": _run_decode_check,
    "thresholds": _run_thresholds,
    "qkd-demo": _run_qkd_demo,
}


def run(subcommand: str, params: dict, seed: int, threads: int = 1) -> dict:
    """Execute one experiment; returns the report dictionary."""
    if subcommand not in _SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand '{subcommand}'")
    if not isinstance(params, dict):
        raise ConfigError("config must be a mapping of parameter names to values")
    start = time.monotonic()
    records, aggregates, verdicts = _SUBCOMMANDS[subcommand](params, seed, threads)
    return {
        "subcommand": subcommand,
        "config": params,
        "master_seed": seed,
        "records": records,
        "aggregates": aggregates,
        "verdicts": verdicts,
        "wall_clock_seconds": time.monotonic() - start,
    }


def _write_report(report: dict, out_prefix: str) -> None:
    body = {k: v for k, v in report.items() if k != "wall_clock_seconds"}
    text = json.dumps(body, indent=2, default=_fmt, sort_keys=True)
    with open(out_prefix + ".json", "w", encoding="utf-8") as f:
        f.write(text + "\n")
        f.write(json.dumps(
            {"wall_clock_seconds": report["wall_clock_seconds"]}) + "\n")
    records = report["records"]
    with open(out_prefix + ".csv", "w", encoding="utf-8", newline="") as f:
        if records:
            writer = csv.DictWriter(f, fieldnames=list(records[0].keys()))
            writer.writeheader()
            for row in records:
                writer.writerow({k: _fmt(v) for k, v in row.items()})


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="locklab",
        description="Numerical experiments on information locking.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)
        p.add_argument("--threads", type=int, default=1)
    args = parser.parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as f:
            params = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        report = run(args.subcommand, params, args.seed, args.threads)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out_prefix = args.out or f"locklab-{args.subcommand}"
    _write_report(report, out_prefix)
    failed = [v["id"] for v in report["verdicts"] if not v["pass"]]
    for v in report["verdicts"]:
        status = "PASS" if v["pass"] else "FAIL"
        print(f"[{status}] {v['id']}: {v['detail']}")
    print(f"report written to {out_prefix}.json / {out_prefix}.csv")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
