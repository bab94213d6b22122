import math

import numpy as np
import pytest
from conftest import GC_SMALL, OMEGA_SMALL, state_from

from asymrabi.eigensolver import ground_state
from asymrabi.model import ModelParams
from asymrabi.wavefunction import (
    GridSpec,
    PolaronWeights,
    check_recurrence,
    default_grid,
    is_anti_polaron_overweighted,
    occupied_levels,
    oscillator_functions,
    polaron_weights,
    synthesize,
    trapezoid_split,
)

EPS_SMALL = 1e-3 * OMEGA_SMALL


def small(ratio, epsilon=0.0):
    p = ModelParams(omega=OMEGA_SMALL, epsilon=epsilon, g=ratio * GC_SMALL)
    return p, ground_state(p)


def test_vacuum_gaussian():
    p = ModelParams(omega=1.0)
    wf = synthesize(state_from([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], p), p)
    np.testing.assert_allclose(wf.phi_minus, math.pi ** -0.25 * np.exp(-0.5 * wf.grid**2), atol=1e-15)
    assert not wf.phi_plus.any()


def test_oscillator_functions_closed_forms():
    omega = 0.7
    x = np.linspace(-6, 6, 101)
    psi = oscillator_functions(omega, x, 3)
    xi = math.sqrt(omega) * x
    base = (omega / math.pi) ** 0.25 * np.exp(-0.5 * xi**2)
    np.testing.assert_allclose(psi[0], base, atol=1e-15)
    np.testing.assert_allclose(psi[1], base * math.sqrt(2) * xi, atol=1e-15)
    np.testing.assert_allclose(psi[2], base * (2 * xi**2 - 1) / math.sqrt(2), atol=1e-14)


def test_recurrence_far_tail_without_underflow():
    # psi_600 lives far out where the Gaussian factor alone underflows
    x = np.linspace(-40, 40, 8001)
    assert check_recurrence(1.0, x, 600) < 1e-8
    assert np.all(np.isfinite(oscillator_functions(1.0, x, 600)))


def test_decoupled_single_packet():
    p = ModelParams(omega=0.2, epsilon=0.3, g=0.6, Omega=0.0)
    wf = synthesize(ground_state(p), p)
    assert wf.grid[np.argmax(np.abs(wf.phi_minus))] == pytest.approx(p.x0, abs=2 * (wf.grid[1] - wf.grid[0]))
    assert np.max(np.abs(wf.phi_plus)) < 1e-12
    pw = polaron_weights(wf)
    assert pw.polaron_minus == pytest.approx(1.0, abs=1e-6)
    assert pw.anti_polaron_minus < 1e-6
    assert pw.polaron_plus < 1e-20 and pw.anti_polaron_plus < 1e-20


def test_overweighted_packet_on_the_far_side():
    p, gs = small(1.13, EPS_SMALL)
    pw = polaron_weights(synthesize(gs, p))
    # spin-up well is at -x0: anti-polaron side x > 0 now carries more
    assert pw.anti_polaron_plus > pw.polaron_plus


@pytest.mark.parametrize("ratio", [0.5, 1.0, 1.5])
def test_parity_pointwise(ratio):
    p, gs = small(ratio)
    wf = synthesize(gs, p)
    np.testing.assert_allclose(wf.phi_plus, -wf.phi_minus[::-1], atol=1e-8)
    pw = polaron_weights(wf)
    assert pw.anti_polaron_plus == pytest.approx(pw.anti_polaron_minus, abs=1e-8)
    assert pw.polaron_plus == pytest.approx(pw.polaron_minus, abs=1e-8)


@pytest.mark.parametrize("ratio, epsilon", [(0.1, 0.0), (1.07, EPS_SMALL), (1.5, EPS_SMALL), (2.0, 0.05)])
def test_parseval_and_weight_split(ratio, epsilon):
    p, gs = small(ratio, epsilon)
    wf = synthesize(gs, p)
    assert wf.norm() == pytest.approx(1.0, abs=1e-6)
    pw = polaron_weights(wf)
    for s in (1, -1):
        total = np.trapezoid(wf.component(s) ** 2, wf.grid)
        assert pw.polaron(s) + pw.anti_polaron(s) == pytest.approx(total, abs=1e-8)
        assert total == pytest.approx(np.sum(gs.spin(s) ** 2), abs=1e-6)


def test_parseval_tightens_with_refinement():
    p, gs = small(0.3, EPS_SMALL)
    coarse = abs(synthesize(gs, p, default_grid(p, points=512)).norm() - 1)
    fine = abs(synthesize(gs, p, default_grid(p, points=8192)).norm() - 1)
    assert fine <= coarse + 1e-15


def test_recurrence_self_test_on_occupied_support():
    p, gs = small(1.5, EPS_SMALL)
    assert check_recurrence(p.omega, default_grid(p).array(), occupied_levels(gs)) < 1e-8


@pytest.mark.parametrize("grid", [
    GridSpec(100.0, 256),
    GridSpec(10.0, 4096),
    np.linspace(300, -300, 4096),
])
def test_grid_preconditions(grid):
    p, gs = small(0.5)
    with pytest.raises(ValueError, match="grid"):
        synthesize(gs, p, grid)


def test_split_requires_symmetric_grid():
    p, gs = small(0.5)
    wf = synthesize(gs, p, np.linspace(-260.0, 300.0, 4096))
    with pytest.raises(ValueError, match="symmetric"):
        polaron_weights(wf)


def test_trapezoid_split_is_exact_partition():
    x = np.linspace(-3, 3, 1000)
    f = np.exp(-(x - 0.4) ** 2)
    left, right = trapezoid_split(f, x)
    assert left + right == pytest.approx(np.trapezoid(f, x), rel=1e-14)
    assert trapezoid_split(f, x, at=-10.0) == (0.0, pytest.approx(np.trapezoid(f, x)))


def test_overweighted_predicate():
    assert not is_anti_polaron_overweighted(PolaronWeights(0.3, 0.3, 0.3, 0.3), 1)
    assert is_anti_polaron_overweighted(PolaronWeights(0.01, 0.02, 0.5, 0.1), 1)
    assert not is_anti_polaron_overweighted(PolaronWeights(0.01, 0.02, 0.5, 0.1), -1)


def test_overweighted_sequence():
    for ratio, expected in ((1.07, False), (1.5, True)):
        p, gs = small(ratio, EPS_SMALL)
        assert is_anti_polaron_overweighted(polaron_weights(synthesize(gs, p)), 1) is expected
