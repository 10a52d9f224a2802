"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines alongside the pytest verdicts.
"""
import json
import math
import time

import numpy as np

from boolperc.branching import (
    TYPE_LARGE,
    kappa_critical,
    mean_matrix,
    mean_total_progeny,
    perron_root,
    perron_root_log,
    simulate_gw,
)
from boolperc.cli import main as cli_main
from boolperc.embedding import (
    EmbeddingGeometry,
    bernoulli_survival,
    branch_parameters,
    certify_inclusions,
    estimate_g_plus,
    rate_limits,
    rate_slopes,
    region_volumes,
    simulate_oriented,
)
from boolperc.estimator import bisect_threshold
from boolperc.geometry import Ball, balls_intersect, log_unit_ball_volume
from boolperc.measures import (
    ModelParams,
    dirac,
    make_mu_d,
    two_type_intensities,
)
from boolperc.percolation import build_clusters, genealogy
from boolperc.sampling import BallConfiguration, cube_window, sample_boolean_model


def report(num: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"\n[ACCEPTANCE {num:02d}] {status} {name}" + (f" :: {detail}" if detail else ""))
    assert ok, f"criterion {num} failed: {detail}"


def test_c01_perron_root_closed_form_vs_eigensolver():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1001)
    worst = 0.0
    for _ in range(1000):
        kappa = float(rng.uniform(0.3, 1.6))
        rho = float(rng.uniform(1.05, 1.95))
        d = int(rng.integers(1, 31))
        m = mean_matrix(kappa, rho, d)
        reference = float(np.max(np.linalg.eigvals(m.linear()).real))
        worst = max(worst, abs(perron_root(m) - reference) / reference)
    elapsed = time.perf_counter() - t0
    report(
        1,
        "closed-form perron root vs dense eigensolver (1000 draws, d<=30)",
        worst < 1e-12 and elapsed < 1.0,
        f"worst rel err {worst:.2e}, {elapsed:.2f}s",
    )


def test_c02_criticality_boundary_bisection():
    t0 = time.perf_counter()
    rho, d = 1.5, 2000
    lo, hi = 0.5, 1.5
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if perron_root_log(mean_matrix(mid, rho, d)) > 0.0:
            hi = mid
        else:
            lo = mid
    found = 0.5 * (lo + hi)
    err = abs(found - kappa_critical(rho))
    elapsed = time.perf_counter() - t0
    report(
        2,
        "rate-sign bisection at d=2000 recovers the critical ratio",
        err < 1e-6 and elapsed < 1.0,
        f"err {err:.2e}, {elapsed:.2f}s",
    )


def test_c03_volume_asymptotics_and_sector_sandwich():
    t0 = time.perf_counter()
    rho = 1.5
    d = 500
    rv = region_volumes(EmbeddingGeometry(d, rho, 1.0))
    dev1 = abs((rv.log_c1 - log_unit_ball_volume(d)) / d - math.log(1.0 + rho))
    dev2 = abs(
        (rv.log_c2 - log_unit_ball_volume(d)) / d - math.log(math.sqrt(2.0) * (1.0 + rho))
    )
    dev3 = abs((rv.log_d2pp - log_unit_ball_volume(d - 2)) / d - math.log(1.0 + rho))
    # region_volumes enforces the sector sandwich internally; sweep every d
    for dd in range(5, 2001):
        region_volumes(EmbeddingGeometry(dd, rho, 1.0))
    elapsed = time.perf_counter() - t0
    report(
        3,
        "volume growth rates at d=500 and sector sandwich on [5, 2000]",
        max(dev1, dev2, dev3) < 0.05 and elapsed < 1.0,
        f"rate devs ({dev1:.3f}, {dev2:.3f}, {dev3:.3f}), {elapsed:.2f}s",
    )


def test_c04_branch_parameter_rates_and_monotonicity():
    t0 = time.perf_counter()
    rho, kappa = 1.5, 0.99
    limits = rate_limits(rho, kappa)
    slopes = rate_slopes(rho, kappa, 800, delta=20)
    eta_target = 2.0 * math.log(kappa / kappa_critical(rho))
    dev_eta = abs(slopes["eta"] - eta_target)
    dev_intf = abs(slopes["interference"] - limits["interference"])
    ds = list(range(100, 2001, 50))
    log_eta = [branch_parameters(EmbeddingGeometry(d, rho, kappa)).log_eta for d in ds]
    log_intf = [
        branch_parameters(EmbeddingGeometry(d, rho, kappa)).log_interference for d in ds
    ]
    tail = [i for i, d in enumerate(ds) if d >= 200]
    # exp(-eta) eventually decreasing <=> log eta eventually increasing
    eta_monotone = all(log_eta[i] > log_eta[i - 1] for i in tail)
    intf_monotone = all(log_intf[i] < log_intf[i - 1] for i in tail)
    elapsed = time.perf_counter() - t0
    report(
        4,
        "survival/interference terms: monotone tails and log-rates at d=800",
        dev_eta < 0.02 and dev_intf < 0.02 and eta_monotone and intf_monotone and elapsed < 1.0,
        f"eta rate dev {dev_eta:.4f}, interference rate dev {dev_intf:.4f}, {elapsed:.2f}s",
    )


def test_c05_inclusion_certification_with_sampled_validation():
    t0 = time.perf_counter()
    cert = certify_inclusions(EmbeddingGeometry(1000, 1.5, 0.99), sample_pairs=100_000, seed=55)
    elapsed = time.perf_counter() - t0
    report(
        5,
        "inclusion inequalities certified at d=1000, 1e5 sampled pairs clean",
        cert.inclus1
        and cert.inclus2
        and cert.counterexamples1 == 0
        and cert.counterexamples2 == 0
        and cert.sampled_pairs == 100_000
        and elapsed < 10.0,
        f"margins ({cert.margin1:.3f}, {cert.margin2:.3f}), {elapsed:.1f}s",
    )


def test_c06_cluster_labeling_equals_brute_force_closure():
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components
    from scipy.spatial.distance import pdist, squareform

    t0 = time.perf_counter()
    rng = np.random.default_rng(66)
    checked = 0
    for _ in range(100):
        d = int(rng.choice([2, 3]))
        side = float(rng.uniform(4.0, 12.0))
        n = int(rng.integers(0, 501))
        centers = rng.uniform(-1.5, side + 1.5, size=(n, d))
        radii = rng.choice([0.5, 1.0, 1.5], size=n)
        cfg = BallConfiguration(cube_window(d, side, padding=1.5), centers, radii)
        lab = build_clusters(cfg)
        if n:
            dist = squareform(pdist(centers))
            adj = csr_matrix(dist < radii[:, None] + radii[None, :])
            _, oracle = connected_components(adj, directed=False)
        else:
            oracle = np.empty(0, dtype=int)

        def canon(labels):
            seen = {}
            return [seen.setdefault(int(v), len(seen)) for v in labels]

        assert canon(lab.labels) == canon(oracle)
        checked += 1
    elapsed = time.perf_counter() - t0
    report(
        6,
        "union-find partition equals O(n^2) closure on 100 configurations",
        checked == 100 and elapsed < 10.0,
        f"{checked} configs exact, {elapsed:.1f}s",
    )


def test_c07_gw_total_progeny_identity():
    t0 = time.perf_counter()
    runs = 100_000
    acc = 0
    for k in range(runs):
        acc += simulate_gw(0.5, seed=70_000 + k).total
    mean = acc / runs
    elapsed = time.perf_counter() - t0
    report(
        7,
        "Poisson(0.5) branching: mean total progeny within 2% of 2",
        abs(mean - 2.0) / 2.0 < 0.02 and elapsed < 10.0,
        f"mean {mean:.4f}, {elapsed:.1f}s",
    )


def test_c08_genealogy_dominated_by_branching_mean():
    t0 = time.perf_counter()
    kappa, rho, d = 0.5, 1.5, 2
    lam1, _ = two_type_intensities(kappa, rho, d)
    params = ModelParams(d, lam1, make_mu_d(rho, d))
    window = cube_window(d, 60.0, padding=rho)
    root = Ball([30.0, 30.0], rho)
    runs = 10_000
    totals = np.empty(runs)
    truncated = 0
    for rep in range(runs):
        cfg = sample_boolean_model(params, window, seed=88, replicate=rep)
        rep_out = genealogy(cfg, root)
        totals[rep] = rep_out.total
        truncated += rep_out.truncated
    gw_mean = mean_total_progeny(mean_matrix(kappa, rho, d), root_type=TYPE_LARGE)
    sigma = totals.std(ddof=1) / math.sqrt(runs)
    elapsed = time.perf_counter() - t0
    report(
        8,
        "genealogy mean is dominated by the branching total-progeny mean",
        totals.mean() <= gw_mean + 3.0 * sigma and elapsed < 120.0,
        f"E[N]={totals.mean():.3f} vs GW {gw_mean:.3f} (+3sg {3 * sigma:.3f}), "
        f"{truncated} truncated, {elapsed:.1f}s",
    )


def test_c09_threshold_sanity_and_scaling():
    t0 = time.perf_counter()
    est1 = bisect_threshold(2, dirac(1.0), side=30.0, replicates=400, seed=901)
    est2 = bisect_threshold(2, dirac(2.0), side=30.0, replicates=400, seed=902)
    above_one = est1.lambda_tilde > 1.0
    ratio = est1.lam_hat / est2.lam_hat
    sig_ratio = ratio * math.hypot(est1.stderr / est1.lam_hat, est2.stderr / est2.lam_hat)
    ratio_ok = abs(ratio - 4.0) < 3.0 * sig_ratio
    sig_c = math.hypot(est1.c_hat_stderr, est2.c_hat_stderr)
    c_ok = abs(est1.c_hat - est2.c_hat) < 3.0 * sig_c
    elapsed = time.perf_counter() - t0
    report(
        9,
        "d=2 threshold: normalized value > 1, radius-scaling checks within 3 sigma",
        above_one and ratio_ok and c_ok and elapsed < 600.0,
        f"lambda_tilde {est1.lambda_tilde:.3f}, ratio {ratio:.3f} (3sg {3 * sig_ratio:.3f}), "
        f"c_hats ({est1.c_hat:.3f}, {est2.c_hat:.3f}), {elapsed:.0f}s",
    )


def test_c10_oriented_percolation_bernoulli_and_embedded():
    t0 = time.perf_counter()
    ps = [0.55, 0.65, 0.70, 0.80, 0.90]
    freqs = []
    for k, p in enumerate(ps):
        f, _ = bernoulli_survival(p, 200, 2000, seed=100 + k)
        freqs.append(f)
    low_ok = freqs[0] < 0.01
    high_ok = freqs[3] > 0.2
    monotone = all(b >= a for a, b in zip(freqs, freqs[1:]))
    chains_ok = True
    grew = 0
    for kappa in (0.9, 1.6, 2.2):
        g = EmbeddingGeometry(6, 1.5, kappa)
        for s in range(12):
            out = simulate_oriented(0.25, 6, seed=s, mode="embedded", geometry=g)
            chains_ok &= out.chain_verified is True
            grew += out.reached_level >= 1
    elapsed = time.perf_counter() - t0
    report(
        10,
        "oriented survival frequencies bracket the crossover; embedded chains verify",
        low_ok and high_ok and monotone and chains_ok and grew > 0 and elapsed < 300.0,
        f"freqs {['%.3f' % f for f in freqs]}, {grew} growing runs, {elapsed:.0f}s",
    )


def test_c11_two_hop_event_bound_consistency():
    t0 = time.perf_counter()
    ok = True
    details = []
    for d in (6, 8, 10):
        g = EmbeddingGeometry(d, 1.5, 0.9)
        est = estimate_g_plus(g, replicates=3000, seed=110 + d)
        bp = branch_parameters(g)
        bound = 1.0 - math.exp(-math.exp(bp.log_eta)) - math.exp(bp.log_interference)
        ok &= est.p_hat >= bound - 3.0 * est.stderr
        details.append(f"d={d}: p={est.p_hat:.4f} bound={bound:.1e}")
    elapsed = time.perf_counter() - t0
    report(
        11,
        "Monte Carlo two-hop frequency respects the analytic lower bound",
        ok and elapsed < 300.0,
        "; ".join(details) + f", {elapsed:.0f}s",
    )


def test_c12_cli_determinism_including_threads(tmp_path):
    t0 = time.perf_counter()
    invocations = {
        "sample": ["sample", "--d", "2", "--measure", "dirac:1", "--intensity", "0.3",
                   "--L", "8", "--seed", "5"],
        "clusters": ["clusters", "--d", "2", "--measure", "mud:1.5", "--intensity", "0.2",
                     "--L", "8", "--seed", "6"],
        "threshold": ["threshold", "--d", "2", "--measure", "dirac:1", "--L", "8",
                      "--replicates", "40", "--seed", "7"],
        "sweep": ["sweep", "--d", "2", "--rho", "2", "--alphas", "0,1", "--L", "6",
                  "--replicates", "30", "--seed", "8"],
        "gw": ["gw", "--rho", "1.5", "--kappa", "0.9", "--d-max", "50", "--seed", "1"],
        "embed-volumes": ["embed-volumes", "--rho", "1.5", "--d", "10,100", "--seed", "1"],
        "embed-bounds": ["embed-bounds", "--rho", "1.5", "--kappa", "0.99",
                         "--d", "100,400", "--seed", "1"],
        "embed-gplus": ["embed-gplus", "--d", "6", "--rho", "1.5", "--kappa", "1.5",
                        "--replicates", "200", "--seed", "9"],
        "oriented": ["oriented", "--mode", "embedded", "--d", "6", "--rho", "1.5",
                     "--kappa", "2.0", "--p-floor", "0.2", "--n-max", "4", "--seed", "10"],
    }
    ok = True
    for name, args in invocations.items():
        a = tmp_path / f"{name}_a.out"
        b = tmp_path / f"{name}_b.out"
        assert cli_main(args + ["--out", str(a)]) == 0
        assert cli_main(args + ["--out", str(b)]) == 0
        same = a.read_bytes() == b.read_bytes()
        ok &= same
    t1 = tmp_path / "thr1.json"
    t8 = tmp_path / "thr8.json"
    base = invocations["threshold"]
    assert cli_main(base + ["--threads", "1", "--out", str(t1)]) == 0
    assert cli_main(base + ["--threads", "8", "--out", str(t8)]) == 0
    r1 = json.loads(t1.read_text())["results"]
    r8 = json.loads(t8.read_text())["results"]
    threads_same = r1 == r8
    elapsed = time.perf_counter() - t0
    report(
        12,
        "every CLI subcommand reruns byte-identical; threads do not change results",
        ok and threads_same and elapsed < 300.0,
        f"{len(invocations)} subcommands, threads 1 vs 8 identical={threads_same}, {elapsed:.0f}s",
    )
