import pytest

from advoverlay.evaluation.metrics import TrialResult, mean_box_increase, success_rate


def trial(name, benign, counts):
    return TrialResult(image_id=name, benign_boxes=benign,
                       per_iteration_boxes=tuple(counts))


def test_first_success_iteration():
    t = trial("a", 2, [2, 2, 3, 2, 4])
    assert t.first_success_iteration == 3
    assert trial("b", 2, [2, 2, 2]).first_success_iteration is None


def test_success_rate_all_immediate():
    trials = [trial(f"t{i}", 0, [1, 1, 1]) for i in range(4)]
    for k in (1, 2, 3):
        assert success_rate(trials, k) == 1.0


def test_success_rate_none():
    trials = [trial(f"t{i}", 1, [1, 1, 1]) for i in range(4)]
    for k in (1, 2, 3):
        assert success_rate(trials, k) == 0.0


def test_success_rate_mixed():
    trials = [
        trial("a", 1, [1, 2, 2, 2, 2]),   # first success 2
        trial("b", 1, [1, 1, 1, 1, 2]),   # first success 5
        trial("c", 1, [1, 1, 1, 1, 1]),   # never
    ]
    assert success_rate(trials, 4) == pytest.approx(1 / 3)
    assert success_rate(trials, 5) == pytest.approx(2 / 3)


def test_success_rate_monotone():
    trials = [
        trial("a", 0, [0, 1, 1, 0, 1]),
        trial("b", 2, [2, 2, 3, 3, 3]),
        trial("c", 1, [0, 0, 0, 0, 2]),
    ]
    rates = [success_rate(trials, k) for k in range(1, 6)]
    assert rates == sorted(rates)


def test_mean_box_increase_zero_when_equal():
    trials = [trial("a", 3, [3, 3]), trial("b", 1, [1, 1])]
    assert mean_box_increase(trials, 2) == 0.0


def test_mean_box_increase_simple_mean():
    trials = [trial("a", 1, [4]), trial("b", 2, [3])]
    assert mean_box_increase(trials, 1) == pytest.approx(2.0)


def test_mean_box_increase_hand_computed_fixture():
    # five synthetic trials; expected means computed by hand per iteration
    trials = [
        trial("a", 1, [1, 2, 3]),
        trial("b", 0, [0, 0, 1]),
        trial("c", 2, [2, 2, 2]),
        trial("d", 3, [2, 3, 5]),
        trial("e", 1, [4, 4, 4]),
    ]
    assert mean_box_increase(trials, 1) == pytest.approx((0 + 0 + 0 - 1 + 3) / 5)
    assert mean_box_increase(trials, 2) == pytest.approx((1 + 0 + 0 + 0 + 3) / 5)
    assert mean_box_increase(trials, 3) == pytest.approx((2 + 1 + 0 + 2 + 3) / 5)


def test_empty_trials_rejected():
    with pytest.raises(ValueError):
        success_rate([], 1)
    with pytest.raises(ValueError):
        mean_box_increase([], 1)


def test_iteration_beyond_budget_rejected():
    trials = [trial("a", 0, [1, 1])]
    with pytest.raises(ValueError):
        success_rate(trials, 3)
    with pytest.raises(ValueError):
        mean_box_increase(trials, 0)
