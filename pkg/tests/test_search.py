import math

import numpy as np
import pytest

from mixedlingam.dists import InvalidArgument, RngStream
from mixedlingam.marginal import MarginalEstimate
from mixedlingam.model import Direction, ErrorFamily, HyperParams, PairDataset
from mixedlingam.search import (DirectionEstimate, GridSpec, aggregate_ordering, estimate_direction,
                                gaussianity_check, grid_hyperparams, select_direction)
from mixedlingam.synth import GenConfig, gen_pair

DATA, _ = gen_pair(GenConfig(n=40, seed=3))
HYPER = HyperParams((1.0,) * 6)


def cell(model, log_ml, hyper=HYPER):
    return MarginalEstimate(log_ml, 0.1, 10, 0, model, hyper)


def decided(winner):
    return DirectionEstimate(winner, HYPER, 0.0, -1.0, [], True)


UNDECIDED = DirectionEstimate(None, HYPER, 0.0, 0.0, [], False)


def test_default_grid_size():
    assert len(grid_hyperparams(DATA, GridSpec())) == 236


def test_undeduplicated_grid_size():
    assert len(grid_hyperparams(DATA, GridSpec(dedupe=False))) == 324


def test_tau_values_are_squared_fractions():
    x = DATA.x / np.sqrt(DATA.variances())
    taus = {h.tau_indvdl1 for h in grid_hyperparams(PairDataset(x), GridSpec())}
    assert sorted(taus) == pytest.approx([0, 0.04, 0.16, 0.36, 0.64, 1.0])


def test_dedup_keeps_only_zero_correlation_at_degenerate_points():
    for h in grid_hyperparams(DATA, GridSpec()):
        if h.tau_indvdl1 == 0 or h.tau_indvdl2 == 0:
            assert h.sigma12 == 0


def test_grid_structure_under_affine_rescaling():
    a = grid_hyperparams(DATA, GridSpec())
    x = DATA.x * np.array([3.0, -0.2]) + np.array([10.0, 1.0])
    b = grid_hyperparams(PairDataset(x), GridSpec())
    assert [(h.fracs, h.sigma12) for h in a] == [(h.fracs, h.sigma12) for h in b]
    for ha, hb in zip(a, b):
        assert hb.tau_indvdl1 == pytest.approx(9.0 * ha.tau_indvdl1)
        assert hb.tau_indvdl2 == pytest.approx(0.04 * ha.tau_indvdl2)
        assert np.allclose(hb.tau_cmmn, np.array(ha.tau_cmmn) * [9, 0.04, 9, 0.04, 9, 0.04])


@pytest.mark.parametrize("bad", [dict(tau_fracs=()), dict(sigma12_values=()), dict(tau_fracs=(0.2, 0.0)),
                                 dict(tau_fracs=(0.2, 0.4)), dict(sigma12_values=(0.5,)),
                                 dict(sigma12_values=(0.0, 1.0)), dict(samples=0)])
def test_grid_spec_validation(bad):
    with pytest.raises(InvalidArgument):
        GridSpec(**bad)


def test_canonical_profile():
    assert GridSpec().is_canonical()
    assert not GridSpec.fast().is_canonical()


def test_exact_tie_is_undecided():
    est = select_direction([cell(Direction.M1, -5.0), cell(Direction.M2, -5.0)])
    assert not est.decided and est.winner is None


def test_selection_picks_argmax():
    h2 = HyperParams((1.0,) * 6, 0.5, 0.5, 0.3)
    table = [cell(Direction.M1, -7.0), cell(Direction.M2, -6.0), cell(Direction.M1, -4.0, h2),
             cell(Direction.M2, -9.0, h2)]
    est = select_direction(table)
    assert est.winner is Direction.M1 and est.best_hyper is h2
    assert est.best_log_ml == -4.0 and est.runner_up_log_ml == -6.0
    assert est.winning_cell is table[2]


@pytest.mark.parametrize("shift", [-1e3, -3.5, 0.0, 17.25, 1e4])
def test_argmax_invariant_to_constant_shift(shift):
    rng = np.random.default_rng(8)
    hypers = [HyperParams((1.0,) * 6, f, f, 0.0) for f in (0.0, 0.1, 0.2, 0.3)]
    vals = rng.normal(-50, 5, size=(4, 2))
    base = [cell(m, vals[i, j], h) for i, h in enumerate(hypers) for j, m in enumerate(Direction)]
    moved = [cell(c.model, c.log_ml + shift, c.hyper) for c in base]
    a, b = select_direction(base), select_direction(moved)
    assert a.winner is b.winner and a.best_hyper is b.best_hyper


def test_estimate_is_max_of_its_table():
    est = estimate_direction(DATA, GridSpec.fast(samples=30), 2)
    assert est.best_log_ml == max(e.log_ml for e in est.table)
    assert est.winning_cell.model is est.winner and est.winning_cell.hyper == est.best_hyper
    assert len(est.table) == 2 * len(grid_hyperparams(DATA, GridSpec.fast()))


def test_estimate_is_deterministic():
    spec = GridSpec.fast(samples=30)
    a, b = estimate_direction(DATA, spec, 9), estimate_direction(DATA, spec, 9)
    assert a.table == b.table and a.winner is b.winner


def test_gaussianity_check_is_deterministic():
    spec = GridSpec.fast(samples=20)
    a, b = gaussianity_check(DATA, spec, 4), gaussianity_check(DATA, spec, 4)
    assert (a.laplace_best_log_ml, a.gaussian_best_log_ml) == (b.laplace_best_log_ml, b.gaussian_best_log_ml)
    assert a.gaussian.best_hyper.error_family is ErrorFamily.GAUSSIAN
    assert a.gaussian_preferred == (a.gaussian_best_log_ml > a.laplace_best_log_ml)


def test_ordering_tournament():
    res = [(("a", "b"), decided(Direction.M1)), (("a", "c"), decided(Direction.M1)),
           (("c", "b"), decided(Direction.M2))]
    o = aggregate_ordering(res)
    assert o.labels == ["a", "b", "c"] and o.wins == {"a": 2, "b": 1, "c": 0}
    assert not o.tied and not o.cyclic


@pytest.mark.parametrize("winner, expected", [(Direction.M1, ["x", "y"]), (Direction.M2, ["y", "x"])])
def test_ordering_two_variables(winner, expected):
    assert aggregate_ordering([(("x", "y"), decided(winner))]).labels == expected


def test_ordering_cycle():
    res = [(("a", "b"), decided(Direction.M1)), (("b", "c"), decided(Direction.M1)),
           (("c", "a"), decided(Direction.M1))]
    o = aggregate_ordering(res)
    assert o.labels == ["a", "b", "c"] and set(o.wins.values()) == {1}
    assert o.tied and o.cyclic


def test_ordering_undecided_pair_gives_no_win():
    o = aggregate_ordering([(("p", "q"), UNDECIDED)])
    assert o.wins == {"p": 0, "q": 0} and o.tied and not o.cyclic


def test_ordering_requires_every_pair():
    with pytest.raises(InvalidArgument):
        aggregate_ordering([(("a", "b"), decided(Direction.M1)), (("a", "c"), decided(Direction.M1))])
    with pytest.raises(InvalidArgument):
        aggregate_ordering([(("a", "b"), decided(Direction.M1)), (("b", "a"), decided(Direction.M1))])


# Harness examples.  These run the reduced grid with the full 1000 draws per cell
# and share one Laplace-error dataset per trial between the direction, swap and
# gaussianity checks.
HARNESS_SPEC = GridSpec.fast(samples=1000)
TRIALS = 20
ESTIMATOR_REASON = ("prior Monte Carlo with 1000 draws under vague priors is dominated by single draws; "
                    "direction recovery sits near chance")


def laplace_pair(t):
    return gen_pair(GenConfig(n=200, sources=(2,), b21=1.0, permute=False), RngStream(500, t))[0]


@pytest.fixture(scope="module")
def laplace_runs():
    return [(laplace_pair(t), gaussianity_check(laplace_pair(t), HARNESS_SPEC, t)) for t in range(TRIALS)]


def _wins(est, truth):
    return est.decided and est.winner is truth


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason=ESTIMATOR_REASON)
def test_harness_direction_recovered(laplace_runs):
    # the Laplace half of the gaussianity check is exactly estimate_direction(data, spec, t)
    hits = sum(_wins(chk.laplace, Direction.M1) for _, chk in laplace_runs)
    print(f"direction recovered in {hits}/{TRIALS}")
    assert hits >= 16


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason=ESTIMATOR_REASON)
def test_harness_swapped_columns_flip(laplace_runs):
    hits = sum(_wins(estimate_direction(d.swapped(), HARNESS_SPEC, t), Direction.M2)
               for t, (d, _) in enumerate(laplace_runs))
    print(f"swapped direction recovered in {hits}/{TRIALS}")
    assert hits >= 16


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason=ESTIMATOR_REASON)
def test_harness_laplace_errors_not_flagged(laplace_runs):
    hits = sum(not chk.gaussian_preferred for _, chk in laplace_runs)
    print(f"laplace errors preferred in {hits}/{TRIALS}")
    assert hits >= 16


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason=ESTIMATOR_REASON)
def test_harness_gaussian_errors_flagged():
    hits = 0
    for t in range(TRIALS):
        g = RngStream(600, t).generator()
        x1 = g.standard_normal(200)
        x2 = x1 + g.standard_normal(200)
        hits += gaussianity_check(PairDataset(np.column_stack([x1, x2])), HARNESS_SPEC, t).gaussian_preferred
    print(f"gaussian errors preferred in {hits}/{TRIALS}")
    assert hits >= 16


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason=ESTIMATOR_REASON)
def test_harness_degenerate_grid_without_confounders():
    hits = 0
    for t in range(TRIALS):
        data, truth = gen_pair(GenConfig(n=200), RngStream(700, t))
        hits += _wins(estimate_direction(data, GridSpec.no_individual_effects(), t), truth.true_direction)
    print(f"degenerate grid recovered {hits}/{TRIALS}")
    assert hits >= math.ceil(0.75 * TRIALS)
