"""End-to-end acceptance checks.

Each test prints one ``[PASS]``/``[FAIL]`` line (also repeated in the pytest
terminal summary). Expensive training runs are shared through module-scoped
fixtures; the whole module takes a few minutes on one core.
"""

import time

import numpy as np
import pytest

from dualgbc.baselines import lloyd_kmeans
from dualgbc.datasets import (
    Dataset,
    gen_circles,
    gen_hypercube_clusters,
    gen_moons,
    gen_spiral,
    standardize,
)
from dualgbc.evaluation import cluster_accuracy, prune, valid_prototype_count
from dualgbc.layers import (
    DeepDgbcModel,
    DgbcModel,
    GbcModel,
    check_duality_conditions,
    deep_backward,
    deep_forward,
    dgbc_backward,
    init_model,
)
from dualgbc.numerics import finite_difference_gradient, make_rng, orthonormalize_columns
from dualgbc.topology import chl_edges, loss, loss_gradient, voronoi_assign
from dualgbc.training import TrainConfig, multi_seed_run, train

pytestmark = pytest.mark.acceptance

SEEDS10 = list(range(10))
FIG2_DATA = {"spiral": gen_spiral, "moons": gen_moons, "circles": gen_circles}

# Every training run made for criteria 4-6, for the invariant checks of criterion 7.
ALL_RUNS: list[tuple[str, np.ndarray, object]] = []


def rel_err(a, b):
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-12))


def well_separated(X, P, mask, gap=1e-4):
    D = ((X[:, None, :] - P[None, :, :]) ** 2).sum(-1)
    srt = np.sort(D, axis=1)
    if np.min(srt[:, 1] - srt[:, 0]) < gap:
        return False
    PD = ((P[:, None, :] - P[None, :, :]) ** 2).sum(-1)
    return not np.any((mask != 0) & (PD < gap))


def random_fixture(rng):
    """A random (X, k, lam) whose three prototype configurations are all non-degenerate."""
    while True:
        n = int(rng.integers(5, 51))
        d = int(rng.integers(1, 11))
        k = int(rng.integers(2, 9))
        lam = float(rng.choice([0.0, 0.01, 0.5]))
        X = rng.standard_normal((n, d))
        P = rng.standard_normal((k, d))
        W2 = rng.standard_normal((k, n)) / np.sqrt(n)
        hidden = tuple(int(h) for h in rng.integers(2, 8, size=int(rng.integers(1, 3))))
        deep = init_model("deep_dgbc", k, d, n, hidden, rng)
        configs = [P, W2 @ X, deep_forward(deep, X)[0]]
        if all(well_separated(X, Q, chl_edges(X, Q)) for Q in configs):
            return X, k, lam, P, W2, deep


def test_c1_gradient_correctness(criterion):
    rng = make_rng(2024)
    t0 = time.perf_counter()
    worst = {"loss_gradient": 0.0, "dgbc_backward": 0.0, "deep_backward": 0.0}
    for _ in range(50):
        X, k, lam, P, W2, deep = random_fixture(rng)

        a, m = voronoi_assign(X, P), chl_edges(X, P)
        g = loss_gradient(X, P, m, lam, a)
        fd = finite_difference_gradient(lambda Q: loss(X, Q, m, lam, a), P, h=1e-5)
        worst["loss_gradient"] = max(worst["loss_gradient"], rel_err(g, fd))

        P2 = W2 @ X
        a, m = voronoi_assign(X, P2), chl_edges(X, P2)
        g = dgbc_backward(DgbcModel(W2), X, loss_gradient(X, P2, m, lam, a))
        fd = finite_difference_gradient(lambda W: loss(X, W @ X, m, lam, a), W2, h=1e-5)
        worst["dgbc_backward"] = max(worst["dgbc_backward"], rel_err(g, fd))

        P3, cache = deep_forward(deep, X)
        a, m = voronoi_assign(X, P3), chl_edges(X, P3)
        grads = deep_backward(deep, cache, loss_gradient(X, P3, m, lam, a))
        for idx, W in enumerate(deep.params):
            def f(M, idx=idx):
                params = list(deep.params)
                params[idx] = M
                net = DeepDgbcModel(params[:-1], params[-1])
                return loss(X, deep_forward(net, X)[0], m, lam, a)
            fd = finite_difference_gradient(f, W, h=1e-5)
            worst["deep_backward"] = max(worst["deep_backward"], rel_err(grads[idx], fd))
    elapsed = time.perf_counter() - t0
    ok = all(v < 1e-5 for v in worst.values()) and elapsed < 10.0
    detail = ", ".join(f"{k} max rel err {v:.1e}" for k, v in worst.items())
    criterion("C1 gradient correctness", ok, f"{detail}; {elapsed:.1f}s (< 10s)")


def test_c2_half_duality_trajectories(criterion):
    t0 = time.perf_counter()
    rng = make_rng(7)
    X = orthonormalize_columns(rng.standard_normal((50, 10)), rng=rng)
    W2 = rng.standard_normal((30, 50)) / np.sqrt(50)
    ds = Dataset(X)
    cfg = dict(k=30, epochs=100, lr=0.01, lam=0.01, optimizer="gd")
    base, dual = [], []
    train(TrainConfig(arch="gbc", **cfg), ds, model=GbcModel(W2 @ X),
          callback=lambda e, P: base.append(P.copy()))
    train(TrainConfig(arch="dgbc", **cfg), ds, model=DgbcModel(W2.copy()),
          callback=lambda e, P: dual.append(P.copy()))
    dev = max(float(np.max(np.abs(b - d))) for b, d in zip(base, dual))
    moved = float(np.max(np.abs(base[-1] - base[0])))
    elapsed = time.perf_counter() - t0
    ok = len(base) == len(dual) == 100 and dev <= 1e-8 and moved > 1e-3 and elapsed < 5.0
    criterion("C2 half-duality trajectory equivalence", ok,
              f"max |P_gbc - P_dgbc| over 100 epochs = {dev:.1e} (<= 1e-8), "
              f"prototypes moved {moved:.2f}; {elapsed:.1f}s (< 5s)")


def test_c3_complete_duality_impossible(criterion):
    t0 = time.perf_counter()
    X = standardize(gen_moons(500, seed=0)).X
    rep = check_duality_conditions(X)
    elapsed = time.perf_counter() - t0
    ok = rep.features_deviation > 0.1 and rep.samples_deviation > 0.1 and elapsed < 1.0
    criterion("C3 complete-duality impossibility witness", ok,
              f"feature deviation {rep.features_deviation:.3g}, sample deviation "
              f"{rep.samples_deviation:.3g} (both > 0.1); {elapsed:.2f}s (< 1s)")


def fig2_pipeline():
    out = {}
    for name, gen in FIG2_DATA.items():
        ds = standardize(gen(500, seed=0))
        for arch in ("gbc", "dgbc"):
            runs = multi_seed_run(TrainConfig(arch=arch, k=30, epochs=400, lam=0.01), SEEDS10, ds)
            out[name, arch] = (ds, runs)
    return out


@pytest.fixture(scope="module")
def fig2():
    t0 = time.perf_counter()
    results = fig2_pipeline()
    elapsed = time.perf_counter() - t0
    for (name, arch), (ds, runs) in results.items():
        for r in runs:
            ALL_RUNS.append((f"{name}/{arch}/seed{r.seed}", ds.X, r.result))
    return results, elapsed


def test_c4_fig2_convergence(criterion, fig2):
    results, train_time = fig2
    t0 = time.perf_counter()
    lines, faster, stabler, quality_ok = [], 0, 0, True
    assert all(r.ok for _, runs in results.values() for r in runs)
    for name in FIG2_DATA:
        ds = results[name, "gbc"][0]
        kmeans = float(np.mean([lloyd_kmeans(ds.X, 30, s, iters=100)[1] for s in SEEDS10]))
        stats = {}
        for arch in ("gbc", "dgbc"):
            Q = np.array([r.result.trace.column("quantization_error") for r in results[name, arch][1]])
            stats[arch] = (Q[:, -1].mean(), Q[:, 100].mean(), Q[:, -1].var())
        ratio = {a: stats[a][0] / kmeans for a in stats}
        quality_ok &= all(r <= 1.5 for r in ratio.values())
        faster += stats["dgbc"][1] <= stats["gbc"][1]
        stabler += stats["dgbc"][2] <= stats["gbc"][2]
        lines.append(
            f"{name}: Q/kmeans gbc {ratio['gbc']:.2f} dgbc {ratio['dgbc']:.2f}; "
            f"Q@100 gbc {stats['gbc'][1]:.4f} dgbc {stats['dgbc'][1]:.4f}; "
            f"var gbc {stats['gbc'][2]:.1e} dgbc {stats['dgbc'][2]:.1e}"
        )
    elapsed = train_time + time.perf_counter() - t0
    ok = quality_ok and faster >= 2 and stabler >= 2 and elapsed < 300
    criterion("C4 2-D convergence speed and stability", ok,
              f"(a) all <= 1.5x k-means: {quality_ok}; (b) dgbc faster on {faster}/3; "
              f"(c) dgbc lower variance on {stabler}/3; {elapsed:.0f}s (< 300s) | " + " | ".join(lines))


def hypercube_accuracy(ds, arch, k, seeds, **kw):
    accs = []
    for seed in seeds:
        res = train(TrainConfig(arch=arch, k=k, epochs=400, lam=0.01, seed=seed, **kw), ds)
        ALL_RUNS.append((f"hypercube{ds.d}x{ds.n}/{arch}/seed{seed}", ds.X, res))
        accs.append(cluster_accuracy(prune(ds.X, res.prototypes), ds.labels))
    return np.array(accs)


def test_c5_high_dimensional_accuracy(criterion):
    t0 = time.perf_counter()
    ds = standardize(gen_hypercube_clusters(100, 1000, seed=0))
    k = 100 // 10
    dgbc = hypercube_accuracy(ds, "dgbc", k, SEEDS10)
    gbc = hypercube_accuracy(ds, "gbc", k, SEEDS10)
    elapsed = time.perf_counter() - t0
    ok = dgbc.mean() >= 0.95 and gbc.mean() < dgbc.mean() and elapsed < 600
    criterion("C5 few samples, n_s=100 n_f=1000 k=10", ok,
              f"mean accuracy dgbc {dgbc.mean():.3f} (>= 0.95: {dgbc.mean() >= 0.95}), "
              f"gbc {gbc.mean():.3f} (< dgbc: {gbc.mean() < dgbc.mean()}); {elapsed:.0f}s (< 600s)")


def test_c6_many_samples_accuracy(criterion):
    t0 = time.perf_counter()
    ds = standardize(gen_hypercube_clusters(1000, 100, seed=0))
    dgbc = hypercube_accuracy(ds, "dgbc", 100, range(5))
    deep = hypercube_accuracy(ds, "deep_dgbc", 100, range(5), hidden_sizes=(10, 10))
    elapsed = time.perf_counter() - t0
    ok = dgbc.mean() >= 0.95 and deep.mean() >= 0.95 and elapsed < 900
    criterion("C6 many samples, n_s=1000 n_f=100 k=100", ok,
              f"mean accuracy dgbc {dgbc.mean():.3f}, deep_dgbc {deep.mean():.3f} (both >= 0.95); "
              f"{elapsed:.0f}s (< 900s)")


def test_c7_pruning_invariants(criterion, fig2):
    # runs from C4 (fixture) plus whatever C5 and C6 appended before this test
    bad = []
    for name, X, res in ALL_RUNS:
        ps = res.prototypes
        if valid_prototype_count(X, ps.P) > ps.k:
            bad.append(f"{name}: too many valid prototypes")
        out = prune(X, ps)
        winners = set(voronoi_assign(X, ps.P).tolist())
        if not winners <= set(out.kept.tolist()):
            bad.append(f"{name}: pruned a winner")
        if sorted(set(out.component_of.tolist())) != list(range(out.n_components)):
            bad.append(f"{name}: component ids not contiguous")
        if sorted(set(out.sample_component.tolist())) != list(range(out.n_components)):
            bad.append(f"{name}: sample components not contiguous")
        if np.any(res.trace.column("valid_prototypes") > ps.k):
            bad.append(f"{name}: trace valid count exceeds k")
    ok = not bad and len(ALL_RUNS) >= 60
    criterion("C7 pruning/validity invariants", ok,
              f"{len(ALL_RUNS)} runs checked, {len(bad)} violations {bad[:3]}")


def test_c8_determinism(criterion, fig2):
    first, _ = fig2
    second = fig2_pipeline()
    mismatches = 0
    for key, (_, runs) in first.items():
        for a, b in zip(runs, second[key][1]):
            mismatches += a.result.trace.to_csv_string() != b.result.trace.to_csv_string()
    criterion("C8 determinism", mismatches == 0,
              f"{mismatches} of 60 trace CSVs differ between two full C4 pipeline runs")


def chl_oracle(X, P):
    k = len(P)
    mask = np.zeros((k, k), dtype=np.uint8)
    for x in X:
        dists = [float(np.sum((x - p) ** 2)) for p in P]
        a, b = sorted(range(k), key=lambda j: (dists[j], j))[:2]
        mask[a, b] = mask[b, a] = 1
    return mask


def test_c9_chl_oracle(criterion):
    rng = make_rng(99)
    mismatches, ties = 0, 0
    for i in range(200):
        n = int(rng.integers(1, 31))
        k = int(rng.integers(2, 9))
        d = int(rng.integers(1, 4))
        if i % 2:
            # small integer grid with duplicated prototypes: plenty of exact ties
            X = rng.integers(-2, 3, size=(n, d)).astype(float)
            P = rng.integers(-2, 3, size=(k, d)).astype(float)
            P[-1] = P[0]
        else:
            X, P = rng.standard_normal((n, d)), rng.standard_normal((k, d))
        D = ((X[:, None] - P[None]) ** 2).sum(-1)
        srt = np.sort(D, axis=1)
        ties += int(np.any(srt[:, 1] == srt[:, 0]) or (k > 2 and np.any(srt[:, 2] == srt[:, 1])))
        mismatches += not np.array_equal(chl_edges(X, P), chl_oracle(X, P))
    criterion("C9 CHL oracle equivalence", mismatches == 0 and ties > 0,
              f"{mismatches} mismatches over 200 instances ({ties} with exact distance ties)")
