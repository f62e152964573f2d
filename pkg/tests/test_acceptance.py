"""Acceptance gate: every criterion at its stated tolerance, one line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.  The pass/fail thresholds come from the replication module's
TOLERANCES table, which the replicate command also enforces; the meta
test at the bottom pins those numbers.
"""
import itertools
import json
import time

import numpy as np
import pytest

from latent_chain.estimation import FitOptions, canonicalize_labels, em_fit, em_step, log_likelihood
from latent_chain.inference import bootstrap_gof, g_squared, simulate
from latent_chain.model_core import (
    build_model_spec,
    forward_backward,
    pattern_lattice,
    random_parameter_set,
)
from latent_chain.replication import (
    REPLICATION_BOUNDARY_TOL,
    REPLICATION_SEED,
    TOLERANCES,
    load_bundled_table,
    main_model_spec,
    reference_parameter_set,
    run_replication,
)


def report(criterion: int, description: str, ok: bool):
    print(f"\nACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {description}")
    assert ok, f"criterion {criterion}: {description}"


@pytest.fixture(scope="module")
def replication(tmp_path_factory):
    out = tmp_path_factory.mktemp("replication_a")
    code, doc = run_replication(out, seed=REPLICATION_SEED)
    return out, code, doc


def _checks(doc, table):
    return [c for c in doc["checks"] if c["table"] == table]


def test_criterion_1_table3_replication(replication):
    _, _, doc = replication
    table3 = _checks(doc, "table3a") + _checks(doc, "table3b")
    assert len(table3) == 12 + 36
    bad = [c for c in table3 if c["status"] == "fail"]

    t0 = time.time()
    fit = em_fit(
        main_model_spec(),
        load_bundled_table(),
        FitOptions(starts=32, seed=REPLICATION_SEED, boundary_tol=REPLICATION_BOUNDARY_TOL),
        compute_se=False,
    )
    elapsed = time.time() - t0
    ok = not bad and elapsed < 30.0 and fit.diagnostics.converged
    report(1, f"Table 3 values within ±{TOLERANCES['table3_param']}, boundaries exact, "
              f"32-start fit in {elapsed:.1f}s", ok)


def test_criterion_2_df_accounting(replication):
    _, _, doc = replication
    reference = _checks(doc, "df")
    fitted = [c for c in _checks(doc, "table4")
              if c["name"].endswith("M1 df") or c["name"].endswith("M2 df")]
    expected_df = {"doctoral M1": 39, "doctoral M2": 31,
                   "post-doctoral M1": 38, "post-doctoral M2": 32}
    seen = {}
    for c in fitted:
        key = c["name"].rsplit(" ", 1)[0]
        seen[key] = c["actual"]
    ok = (
        len(reference) == 4
        and all(c["status"] == "pass" for c in reference)
        and seen == expected_df
        and all(c["status"] == "pass" for c in fitted)
    )
    report(2, f"df accounting 39/31/38/32 (reference patterns and fixture fits): {seen}", ok)


def test_criterion_3_table4_statistics(replication):
    _, _, doc = replication
    lr_checks = [
        c for c in _checks(doc, "table4")
        if any(c["name"].endswith(f"{m} {stat}") for m in ("M1", "M2") for stat in ("LR", "p_boot"))
    ]
    skipped = [c for c in lr_checks if c["status"] == "skip"]
    ok = len(skipped) == 8 and all("data not public" in c["note"] for c in skipped)
    report(3, "Table 4 LR and bootstrap p: skipped (gender split not public); "
              "enforced at ±0.5 / ±0.07 when real data is supplied", ok)


def test_criterion_4_nested_comparison(replication):
    _, _, doc = replication
    ddf = {c["name"]: c for c in _checks(doc, "table4") if "delta df" in c["name"]}
    dlr_skips = [c for c in _checks(doc, "table4")
                 if "delta LR" in c["name"] and c["status"] == "skip"]
    fixture_dlr = {c["name"]: c["actual"] for c in _checks(doc, "table4")
                   if "delta LR (fixture)" in c["name"]}
    ok = (
        ddf["doctoral delta df"]["status"] == "pass"
        and ddf["doctoral delta df"]["actual"] == 8
        and ddf["post-doctoral delta df"]["status"] == "pass"
        and ddf["post-doctoral delta df"]["actual"] == 6
        and len(dlr_skips) == 2
    )
    report(4, f"nested comparison: delta df 8/6 exact; delta LR checks skipped "
              f"(fixture values {fixture_dlr})", ok)


def test_criterion_5_table2_replication(replication):
    _, _, doc = replication
    table2 = _checks(doc, "table2")
    enforced = [c for c in table2 if c["status"] in ("pass", "fail")]
    data_cols = {c["name"]: c["actual"] for c in table2 if "data stability" in c["name"]}
    ok = (
        len(enforced) == 16
        and all(c["status"] == "pass" for c in enforced)
        and data_cols["doctoral data stability"] == pytest.approx(0.2469, abs=5e-5)
        and data_cols["post-doctoral data stability"] == pytest.approx(0.2375, abs=5e-5)
    )
    report(5, f"Table 2 model columns within ±{TOLERANCES['table2_component']}; data "
              f"stability printed as 0.2469/0.2375 with the published-value flag", ok)


def test_criterion_6_forward_backward_oracle():
    rng = np.random.default_rng(606)
    worst = 0.0
    for _ in range(1000):
        A = int(rng.integers(1, 5))
        T = int(rng.integers(1, 6))
        J = int(rng.integers(2, 5))
        spec = build_model_spec(1, J, T, A)
        params = random_parameter_set(spec, rng)
        pattern = tuple(int(c) for c in rng.integers(1, J + 1, size=T))
        fb = forward_backward(params, 0, pattern)

        paths = pattern_lattice(A, T)
        prior = params.delta[0][paths[:, 0]]
        for t in range(T - 1):
            prior = prior * params.tau[t, 0][paths[:, t], paths[:, t + 1]]
        emission = np.ones(paths.shape[0])
        for t in range(T):
            emission *= params.rho[t, 0][paths[:, t], pattern[t] - 1]
        oracle = float(prior @ emission)
        worst = max(worst, abs(fb.likelihood - oracle) / oracle)
    ok = worst <= TOLERANCES["fb_enumeration_rel"]
    report(6, f"forward-backward vs path enumeration on 1000 draws: "
              f"worst relative error {worst:.2e}", ok)


def test_criterion_7_estimator_soundness():
    table = load_bundled_table()
    spec = main_model_spec()

    # EM monotone on every iteration
    rng = np.random.default_rng(7)
    params = random_parameter_set(spec, rng, gamma=np.array([1474 / 1954, 480 / 1954]))
    lls = [log_likelihood(params, table)]
    for _ in range(60):
        params = em_step(params, table, spec)
        lls.append(log_likelihood(params, table))
    monotone = all(b >= a - 1e-9 for a, b in zip(lls, lls[1:]))

    # simulate-then-fit recovery at n = 50000 per group
    generating = reference_parameter_set()
    big = simulate(generating, {"doctoral": 50000, "post-doctoral": 50000}, seed=50,
                   category_labels=("1", "2", "3"))
    fit = em_fit(spec, big,
                 FitOptions(starts=8, seed=2, convergence=1e-6,
                            boundary_tol=REPLICATION_BOUNDARY_TOL),
                 compute_se=False)
    recovered = canonicalize_labels(fit.params)
    tol = TOLERANCES["recovery_param"]
    deviations = [
        float(np.abs(recovered.delta - generating.delta).max()),
        float(np.abs(recovered.rho - generating.rho).max()),
        float(np.abs(recovered.tau - generating.tau).max()),
    ]
    recovery_ok = max(deviations) <= tol

    # bootstrap replicate mean G-squared near the model df when the model is true
    main = em_fit(spec, table,
                  FitOptions(starts=16, seed=3, boundary_tol=REPLICATION_BOUNDARY_TOL),
                  compute_se=False)
    main.g_squared = g_squared(table, main.params)
    boot = bootstrap_gof(
        main, spec, table, B=200, seed=4,
        options=FitOptions(starts=16, seed=3, convergence=1e-7, max_iterations=2000,
                           boundary_tol=REPLICATION_BOUNDARY_TOL),
    )
    lrs = boot.replicate_lrs
    mean_gsq = float(lrs[np.isfinite(lrs)].mean())
    df = main.degrees_of_freedom
    gsq_ok = abs(mean_gsq - df) <= TOLERANCES["bootstrap_mean_gsq_rel"] * df

    ok = monotone and recovery_ok and gsq_ok
    report(7, f"EM monotone; recovery max |err| {max(deviations):.4f} <= {tol}; "
              f"bootstrap mean G2 {mean_gsq:.1f} within 15% of df {df}", ok)


def test_criterion_8_deterministic_replication(replication, tmp_path_factory):
    out1, code1, _ = replication
    out2 = tmp_path_factory.mktemp("replication_b")
    code2, _ = run_replication(out2, seed=REPLICATION_SEED)
    a = (out1 / "replication.json").read_bytes()
    b = (out2 / "replication.json").read_bytes()
    artifacts = all(
        (out1 / name).exists()
        for name in ("replication.json", "replication.txt", "checks.csv",
                     "transitions.png", "reliability.png")
    )
    ok = code1 == 0 and code2 == 0 and a == b and artifacts
    report(8, f"replicate twice with seed {REPLICATION_SEED}: byte-identical JSON "
              f"({len(a)} bytes), all report artifacts present", ok)


def test_meta_replication_thresholds_are_the_acceptance_tolerances():
    # One source of truth: the replicate command enforces exactly these.
    assert TOLERANCES["table3_param"] == 0.02
    assert TOLERANCES["table2_component"] == 0.01
    assert TOLERANCES["table4_lr"] == 0.5
    assert TOLERANCES["table4_boot_p"] == 0.07
    assert TOLERANCES["delta_lr"] == 0.5
    assert TOLERANCES["recovery_param"] == 0.01
    assert TOLERANCES["bootstrap_mean_gsq_rel"] == 0.15
    assert TOLERANCES["fb_enumeration_rel"] == 1e-12
