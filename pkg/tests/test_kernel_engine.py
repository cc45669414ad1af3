import math
import warnings

import numpy as np
import pytest
from scipy import integrate
from scipy.integrate import IntegrationWarning

from oracles import frac_moment_quad, memory_block
from vidg.functions import constant, zero
from vidg.kernel_engine import (HistoryAccumulator, KernelWeight, default_points, frac_moment,
                                history_memory_block, local_memory_block, tensor_gauss_block)
from vidg.mesh import build_graded
from vidg.polyspace import LocalBasis


@pytest.fixture(autouse=True)
def _quiet_quadpack():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        yield


def rel_err(B, R):
    return np.max(np.abs(B - R)) / np.max(np.abs(R))


def test_frac_moment_examples():
    for a in (0.2, 0.5, 1.0, 2.5):
        assert frac_moment(a, 0, 0.0, 0.7, 0.7) == pytest.approx(0.7**a / a, rel=1e-14)
    assert frac_moment(0.5, 1, 0.0, 1.0, 1.0) == pytest.approx(4 / 3, rel=1e-14)
    assert frac_moment(0.5, 2, 0.0, 0.5, 1.0) == pytest.approx(frac_moment_quad(0.5, 2, 0.0, 0.5, 1.0),
                                                                rel=1e-12)


def test_frac_moment_short_source_far_away():
    # a binomial expansion in (t - s0) loses about 5 digits here
    args = (0.2, 4, 0.8581304890839089, 0.8709292509486627, 0.9867120122321652)
    assert frac_moment(*args) == pytest.approx(frac_moment_quad(*args), rel=1e-13)


@pytest.mark.parametrize("args", [(0.0, 0, 0, 1, 1), (0.5, -1, 0, 1, 1), (0.5, 1.5, 0, 1, 1),
                                  (0.5, 1, 0.5, 0.2, 1), (0.5, 1, 0, 1.2, 1)])
def test_frac_moment_domain(args):
    with pytest.raises(ValueError):
        frac_moment(*args)


def test_kernel_weight_validation_and_scaling():
    with pytest.raises(ValueError):
        KernelWeight(0.0)
    kw = KernelWeight(0.5, np.exp)
    assert not kw.integer_alpha and KernelWeight(2.0).integer_alpha
    assert KernelWeight(0.5, zero).is_zero
    assert np.allclose(kw.scaled(3.0).b(np.array([0.2])), 3 * np.exp(0.2))
    assert np.array_equal(kw.c(np.zeros(3)), np.ones(3))


def test_default_points():
    assert default_points(2) == 6


def test_zero_weight_blocks():
    kw = KernelWeight(0.5, zero)
    assert not np.any(local_memory_block(kw, LocalBasis(2, 0, 0.5)))
    assert not np.any(history_memory_block(kw, LocalBasis(2, 0, 0.25), LocalBasis(2, 0.5, 1)))


@pytest.mark.parametrize("a", [0.2, 0.5, 1.0, 2.0])
def test_local_p0_closed_form(a):
    k = 0.3
    B = local_memory_block(KernelWeight(a, constant(1.0)), LocalBasis(0, 0.4, 0.4 + k))
    assert B[0, 0] == pytest.approx(k ** (a + 1) / (a * (a + 1)), rel=1e-13)


def test_history_constant_kernel():
    kw = KernelWeight(1.0, constant(1.0))
    for target in ((0.25, 0.5), (0.75, 1.0)):
        B = history_memory_block(kw, LocalBasis(0, 0.0, 0.25), LocalBasis(0, *target))
        assert B[0, 0] == pytest.approx(0.25 * 0.25, rel=1e-14)


def test_local_block_against_oracle():
    b = 1 / math.gamma(0.5)
    kw = KernelWeight(0.5, constant(b), s_weight_degree_hint=0)
    B = local_memory_block(kw, LocalBasis(1, 0.0, 1.0))
    R = memory_block(0.5, lambda s: b, lambda t: 1.0, 1, (0.0, 1.0), (0.0, 1.0))
    assert rel_err(B, R) <= 1e-10


@pytest.mark.parametrize("target", [(0.25, 0.5), (0.75, 1.0)])
def test_history_block_against_oracle(target):
    b = 1 / math.gamma(0.2)
    kw = KernelWeight(0.2, constant(b), s_weight_degree_hint=0)
    B = history_memory_block(kw, LocalBasis(2, 0.0, 0.25), LocalBasis(2, *target))
    R = memory_block(0.2, lambda s: b, lambda t: 1.0, 2, (0.0, 0.25), target)
    assert np.max(np.abs(B - R) / np.abs(R)) <= 1e-10


def test_t_weight_against_oracle():
    kw = KernelWeight(0.7, constant(1.0), t_weight=lambda t: np.exp(-2 * np.asarray(t)))
    for src, tgt in [((0.1, 0.3), (0.1, 0.3)), ((0.1, 0.3), (0.3, 0.35)), ((0.0, 0.1), (0.4, 0.6))]:
        basis_s, basis_t = LocalBasis(2, *src), LocalBasis(2, *tgt)
        B = local_memory_block(kw, basis_t) if src == tgt else history_memory_block(kw, basis_s, basis_t)
        R = memory_block(0.7, lambda s: 1.0, lambda t: math.exp(-2 * t), 2, src, tgt)
        assert rel_err(B, R) <= 1e-11


def test_history_argument_checks():
    kw = KernelWeight(0.5)
    with pytest.raises(ValueError):
        history_memory_block(kw, LocalBasis(1, 0, 0.5), LocalBasis(2, 0.5, 1))
    with pytest.raises(ValueError):
        history_memory_block(kw, LocalBasis(1, 0.2, 0.6), LocalBasis(1, 0.5, 1))


def test_alpha_one_matches_tensor_path():
    kw = KernelWeight(1.0, lambda s: 1 + np.asarray(s) ** 2)
    m = build_graded(1.0, 6, 1.5)
    bases = [LocalBasis(3, *m.interval(n)) for n in range(1, 7)]
    for n in range(6):
        ref = tensor_gauss_block(kw, bases[n], bases[n], 12)
        assert np.allclose(local_memory_block(kw, bases[n]), ref, rtol=0, atol=1e-12 * np.abs(ref).max())
        for j in range(n):
            ref = tensor_gauss_block(kw, bases[j], bases[n], 12)
            got = history_memory_block(kw, bases[j], bases[n])
            assert np.max(np.abs(got - ref)) <= 1e-12 * np.abs(ref).max()


def test_positive_constant_pairing():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = float(rng.choice([0.2, 0.5, 0.9, 1.0, 2.0]))
        kw = KernelWeight(a, lambda s: np.exp(-np.asarray(s)))
        s0, h, k = rng.uniform(0, 0.5), rng.uniform(0.01, 0.2), rng.uniform(0.01, 0.2)
        assert local_memory_block(kw, LocalBasis(2, s0, s0 + k))[0, 0] >= 0
        assert history_memory_block(kw, LocalBasis(2, s0, s0 + h), LocalBasis(2, s0 + h, s0 + h + k))[0, 0] >= 0


def test_accumulator_matches_pairwise_blocks():
    a = 0.3
    kw = KernelWeight(a, lambda s: np.cos(np.asarray(s)))
    m = build_graded(1.0, 12, 2.0)
    p = 2
    rng = np.random.default_rng(5)
    coeffs = rng.normal(size=(12, p + 1))
    acc = HistoryAccumulator(kw, m, p)
    for n in range(1, 13):
        target = LocalBasis(p, *m.interval(n))
        ref = np.zeros(p + 1)
        for j in range(1, n - 1):
            ref += history_memory_block(kw, LocalBasis(p, *m.interval(j)), target) @ coeffs[j - 1]
        got = acc.far_vector(n)
        assert np.allclose(got, ref, rtol=0, atol=1e-14 * (1 + np.abs(ref).max()))
        acc.record(n, coeffs[n - 1])
