import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regpd.classifiers import AreaFractionOracle, ConstantOracle, FunctionClassifier
from regpd.difference import (INFO_DIFFERENCE, SUBTRACTION, WEIGHT_OF_EVIDENCE,
                              DifferenceFunction)
from regpd.engines import (BaselineConfig, PDConfig, TabularInstance, pixelwise_call_budget,
                           pixelwise_pd, regional_call_budget, regional_pd, regional_pd_trace,
                           resolve_class, ring_statistics, tabular_marginals, tabular_pd)
from regpd.imagery import RasterImage
from regpd.scenes import disk_image

# --- difference functions ------------------------------------------------------


def test_subtraction():
    assert SUBTRACTION(0.9, 0.5) == pytest.approx(0.4)


def test_weight_of_evidence():
    assert WEIGHT_OF_EVIDENCE(0.8, 0.5) == pytest.approx(np.log2(4.0))
    assert np.isfinite(WEIGHT_OF_EVIDENCE(1.0, 0.0))
    assert WEIGHT_OF_EVIDENCE(1.0, 0.0) == pytest.approx(2 * np.log2((1 - 1e-6) / 1e-6))


def test_info_difference():
    assert INFO_DIFFERENCE(0.5, 0.25) == pytest.approx(1.0)
    assert np.isfinite(INFO_DIFFERENCE(0.5, 0.0))


def test_difference_aliases():
    assert DifferenceFunction("woe") == WEIGHT_OF_EVIDENCE
    assert DifferenceFunction("info").short == "info"
    with pytest.raises(ValueError):
        DifferenceFunction("ratio")


def test_resolve_class():
    assert resolve_class([0.2, 0.4, 0.4], "argmax") == 1
    assert resolve_class([0.2, 0.8], 0) == 0
    with pytest.raises(ValueError):
        resolve_class([0.2, 0.8], 2)


# --- tabular -----------------------------------------------------------------------


def binary_instance():
    return TabularInstance(values=("a1",), domains=(("a1", "a2"),), priors=((0.5, 0.5),))


def test_tabular_ignored_feature_is_zero():
    x = TabularInstance((0, 1), ((0, 1), (0, 1, 2)), ((0.3, 0.7), (0.2, 0.5, 0.3)))
    f = FunctionClassifier(lambda v: [0.2 + 0.5 * v[0], 0.8 - 0.5 * v[0]], 2)
    s = tabular_pd(f, x, 0)
    assert s[1] == pytest.approx(0.0, abs=1e-15)


def test_tabular_hand_example():
    f = FunctionClassifier(lambda v: [0.1, 0.9] if v[0] == "a1" else [0.9, 0.1], 2)
    base, marginals = tabular_marginals(f, binary_instance(), 1)
    assert marginals[0] == pytest.approx(0.5)
    assert tabular_pd(f, binary_instance(), 1)[0] == pytest.approx(0.4)


def test_tabular_call_count():
    x = TabularInstance((0, 0, 0), (range(2), range(3), range(4)),
                        ((0.5, 0.5), (1 / 3,) * 3, (0.25,) * 4))
    f = ConstantOracle([0.5, 0.5])
    tabular_pd(f, x, 0)
    assert f.calls == 1 + 9


def test_tabular_validation():
    with pytest.raises(ValueError):
        TabularInstance(("z",), (("a", "b"),), ((0.5, 0.5),))
    with pytest.raises(ValueError):
        TabularInstance(("a",), (("a", "b"),), ((1.0,),))
    with pytest.raises(ValueError):
        TabularInstance(("a",), (("a", "b"),), ((0.6, 0.6),))


def random_tabular_case(rng):
    """Random instance plus a random lookup-table classifier over it."""
    d = int(rng.integers(1, 5))
    sizes = rng.integers(1, 5, size=d)
    domains = tuple(tuple(range(m)) for m in sizes)
    priors = []
    for m in sizes:
        p = rng.dirichlet(np.ones(m))
        p[-1] = 1.0 - p[:-1].sum()
        priors.append(tuple(p))
    values = tuple(int(rng.integers(0, m)) for m in sizes)
    n_classes = int(rng.integers(2, 4))
    table = {}
    for combo in itertools.product(*domains):
        table[combo] = rng.dirichlet(np.ones(n_classes))
    return TabularInstance(values, domains, tuple(priors)), table, n_classes


def brute_force_marginals(x, table, cls):
    """Second summation of the marginalisation, evaluated straight from the table."""
    out = []
    for i in range(len(x.values)):
        total = 0.0
        for j, a in enumerate(x.domains[i]):
            probe = list(x.values)
            probe[i] = a
            total += x.priors[i][j] * table[tuple(probe)][cls]
        out.append(total)
    return np.array(out)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_tabular_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    x, table, n = random_tabular_case(rng)
    cls = int(rng.integers(0, n))
    f = FunctionClassifier(lambda v: table[tuple(v)], n)
    base, marginals = tabular_marginals(f, x, cls)
    assert base == table[x.values][cls]
    assert np.allclose(marginals, brute_force_marginals(x, table, cls), atol=1e-9, rtol=0)
    assert f.calls == 1 + sum(len(d) for d in x.domains)


# --- pixel-wise ------------------------------------------------------------------------


def brute_ring_stats(pixels, k, l):
    height, width = pixels.shape[:2]
    mean = np.empty(pixels.shape)
    var = np.empty(pixels.shape)
    for y in range(height):
        for x in range(width):
            ring = []
            for yy in range(y - l // 2, y - l // 2 + l):
                for xx in range(x - l // 2, x - l // 2 + l):
                    if not (0 <= yy < height and 0 <= xx < width):
                        continue
                    inner = (y - k // 2 <= yy < y - k // 2 + k) and (x - k // 2 <= xx < x - k // 2 + k)
                    if not inner:
                        ring.append(pixels[yy, xx])
            ring = np.array(ring) if ring else pixels.reshape(-1, 3)
            mean[y, x] = ring.mean(axis=0)
            var[y, x] = np.maximum(ring.var(axis=0), 1.0)
    return mean, var


@pytest.mark.parametrize("k,l", [(3, 5), (2, 4), (10, 14), (3, 4)])
def test_ring_statistics_match_brute_force(k, l):
    rng = np.random.default_rng(k * 100 + l)
    pixels = rng.uniform(0, 255, (15, 17, 3))
    pixels[:5, :5] = 100.0
    mean, var = ring_statistics(pixels, k, l)
    want_mean, want_var = brute_ring_stats(pixels, k, l)
    assert np.allclose(mean, want_mean, atol=1e-8)
    assert np.allclose(var, want_var, atol=1e-6)


@pytest.mark.parametrize("n,samples", [(6, 1), (8, 2)])
def test_pixelwise_call_count(n, samples):
    f = ConstantOracle([0.5, 0.5])
    pixelwise_pd(f, RasterImage(np.full((n, n, 3), 10.0)), 0, BaselineConfig(3, 5, samples))
    assert f.calls == samples * n * n + 1 == pixelwise_call_budget(n, n, samples)


def test_pixelwise_constant_classifier_is_zero():
    image = RasterImage(np.random.default_rng(0).uniform(0, 255, (8, 8, 3)))
    smap = pixelwise_pd(ConstantOracle([0.2, 0.8]), image, 1, BaselineConfig(3, 5, 2))
    assert smap.signed
    assert np.all(smap.values == 0.0)


def test_pixelwise_highlights_disk():
    image, mask = disk_image(16, radius=4.5)
    f = AreaFractionOracle((255, 0, 0), 30, float(mask.values.mean()))
    smap = pixelwise_pd(f, image, 1, BaselineConfig(3, 5, 4, seed=1))
    assert smap.values[mask.values].mean() > smap.values[~mask.values].mean()


def test_pixelwise_is_deterministic():
    image, mask = disk_image(12, radius=3.5)
    f = AreaFractionOracle((255, 0, 0), 30, float(mask.values.mean()))
    cfg = BaselineConfig(3, 5, 2, seed=4)
    assert pixelwise_pd(f, image, 1, cfg).values.tobytes() == \
        pixelwise_pd(f, image, 1, cfg).values.tobytes()


def test_pixelwise_rejects_small_image_and_bad_config():
    with pytest.raises(ValueError):
        pixelwise_pd(ConstantOracle([1.0]), RasterImage(np.zeros((4, 4, 3))), 0,
                     BaselineConfig(3, 5, 1))
    with pytest.raises(ValueError):
        BaselineConfig(5, 5, 1)
    with pytest.raises(ValueError):
        BaselineConfig(3, 5, 0)


# --- regional ------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def disk_run():
    image, mask = disk_image(64)
    f = AreaFractionOracle((255, 0, 0), 30, float(mask.values.mean()))
    trace = regional_pd_trace(f, image, 1, PDConfig(r=5, seed=3))
    return image, mask, f, trace


def test_regional_call_budget(disk_run):
    _, _, f, trace = disk_run
    low, high = regional_call_budget(5)
    assert (low, high) == (63, 125)
    assert low <= f.calls <= high
    assert f.calls == 1 + sum(s.region_count for s in trace.segmentations)


def test_regional_exact_calls_on_uniform_image(uniform_image):
    f = ConstantOracle([0.5, 0.5])
    fused, scales = regional_pd(f, uniform_image, 0, PDConfig(r=5))
    assert f.calls == 63


def test_regional_constant_classifier_is_zero(disk64):
    fused, scales = regional_pd(ConstantOracle([0.4, 0.6]), disk64[0], 1, PDConfig(r=3))
    assert np.all(fused.values == 0.0)
    assert all(np.all(s.values == 0.0) for s in scales)


def test_regional_fusion_is_mean(disk_run):
    trace = disk_run[3]
    mean = np.mean([s.values.astype(np.float64) for s in trace.scales], axis=0)
    assert np.allclose(trace.fused.values, mean, rtol=1e-6, atol=1e-7)


def test_regional_nonnegative_and_piecewise_constant(disk_run):
    trace = disk_run[3]
    assert np.all(trace.fused.values >= 0)
    for smap, seg in zip(trace.scales, trace.segmentations):
        assert np.all(smap.values >= 0)
        for region in range(seg.region_count):
            assert np.unique(smap.values[seg.labels == region]).size == 1


def test_regional_localizes_disk(disk_run):
    _, mask, _, trace = disk_run
    fused = trace.fused.values
    found = fused >= 0.5 * fused.max()
    iou = (found & mask.values).sum() / (found | mask.values).sum()
    assert iou >= 0.5


def test_regional_causal_monotonicity(disk_run):
    image, mask, _, trace = disk_run
    m = mask.values
    for smap, seg in zip(trace.scales, trace.segmentations):
        inside = [r for r in range(seg.region_count) if m[seg.labels == r].all()]
        outside = [r for r in range(seg.region_count) if not m[seg.labels == r].any()]
        value = {r: smap.values[seg.labels == r][0] for r in range(seg.region_count)}
        for r in outside:
            assert value[r] <= 1e-3
        for r in inside:
            assert value[r] > max((value[o] for o in outside), default=0.0)


def test_regional_is_deterministic_and_thread_safe(disk64):
    image, mask = disk64
    f = AreaFractionOracle((255, 0, 0), 30, float(mask.values.mean()))
    a = regional_pd(f, image, 1, PDConfig(r=3, seed=11))
    b = regional_pd(f, image, 1, PDConfig(r=3, seed=11, workers=4))
    assert a.fused.values.tobytes() == b.fused.values.tobytes()


def test_regional_argmax_class(disk64):
    image, mask = disk64
    f = AreaFractionOracle((255, 0, 0), 30, float(mask.values.mean()))
    trace = regional_pd_trace(f, image, "argmax", PDConfig(r=2))
    assert trace.target_class == 1


def test_regional_config_validation():
    with pytest.raises(ValueError):
        PDConfig(r=0)
