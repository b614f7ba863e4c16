"""Tests for UAR, fairness gaps, FLOPs, gender leakage and metrics reports."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emotrust.core.exceptions import MetricError
from emotrust.core.types import EMOTIONS, FoldScheme, Gender, ValPolicy
from emotrust.dataio import Manifest, SynthConfig, load_manifest, make_folds, synth_dataset
from emotrust.metrics import (
    GroupedPredictions,
    MetricsReport,
    accuracy,
    confusion_matrix,
    equal_opportunity,
    equality_of_odds,
    flops_count,
    load_report,
    statistical_parity,
    uar,
)
from emotrust.metrics.flops import elementwise_flops, linear_flops
from emotrust.metrics.privacy import privacy_probe
from emotrust.model import HeadConfig, ToyEncoderConfig
from emotrust.training import TrainConfig

GENDER_NAMES = [g.value for g in Gender]


def _brute_uar(truth, pred, k):
    recalls = []
    for c in range(k):
        support = sum(1 for t in truth if t == c)
        if support:
            recalls.append(sum(1 for t, p in zip(truth, pred) if t == c and p == c) / support)
    return sum(recalls) / len(recalls)


def _brute_rates(truth, pred, groups, group, c):
    pos = [p for t, p, g in zip(truth, pred, groups) if g == group and t == c]
    neg = [p for t, p, g in zip(truth, pred, groups) if g == group and t != c]
    tpr = sum(1 for p in pos if p == c) / len(pos)
    fpr = sum(1 for p in neg if p == c) / len(neg)
    return tpr, fpr


def _brute_eo(truth, pred, groups, k, with_fpr=True):
    gaps = []
    for c in range(k):
        tf, ff = _brute_rates(truth, pred, groups, "female", c)
        tm, fm = _brute_rates(truth, pred, groups, "male", c)
        gaps.append((abs(tf - tm) + abs(ff - fm)) / 2 if with_fpr else abs(tf - tm))
    return 100.0 * sum(gaps) / len(gaps)


def _brute_sp(pred, groups, k):
    gaps = []
    for c in range(k):
        rates = []
        for group in GENDER_NAMES:
            mine = [p for p, g in zip(pred, groups) if g == group]
            rates.append(sum(1 for p in mine if p == c) / len(mine))
        gaps.append(abs(rates[0] - rates[1]))
    return 100.0 * sum(gaps) / len(gaps)


@st.composite
def grouped_instances(draw):
    """Random 4-class predictions where every class occurs in both groups."""
    n = draw(st.integers(min_value=0, max_value=40))
    truth = draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    pred = draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    groups = draw(st.lists(st.sampled_from(GENDER_NAMES), min_size=n, max_size=n))
    for group in GENDER_NAMES:
        for c in range(4):
            truth.append(c)
            pred.append(draw(st.integers(0, 3)))
            groups.append(group)
    return truth, pred, groups


@settings(max_examples=100, deadline=None)
@given(grouped_instances())
def test_metrics_match_brute_force(instance):
    """Test UAR, EO, EOpp and SP against full enumeration."""
    truth, pred, groups = instance
    preds = GroupedPredictions.build(truth, pred, 4, groups)
    assert abs(uar(preds) - _brute_uar(truth, pred, 4)) < 1e-12
    assert abs(equality_of_odds(preds) - _brute_eo(truth, pred, groups, 4)) < 1e-12
    assert abs(equal_opportunity(preds) - _brute_eo(truth, pred, groups, 4, False)) < 1e-12
    assert abs(statistical_parity(preds) - _brute_sp(pred, groups, 4)) < 1e-12
    assert not preds.warnings


@settings(max_examples=50, deadline=None)
@given(grouped_instances(), st.permutations(range(4)))
def test_uar_is_invariant_under_relabeling(instance, perm):
    """Test UAR does not depend on class naming."""
    truth, pred, _ = instance
    base = uar(GroupedPredictions.build(truth, pred, 4))
    mapped = uar(GroupedPredictions.build([perm[t] for t in truth], [perm[p] for p in pred], 4))
    assert abs(base - mapped) < 1e-12


@settings(max_examples=50, deadline=None)
@given(grouped_instances())
def test_fairness_is_symmetric_in_group_swap(instance):
    """Test swapping group labels leaves the gaps unchanged."""
    truth, pred, groups = instance
    swapped = ["male" if g == "female" else "female" for g in groups]
    a = GroupedPredictions.build(truth, pred, 4, groups)
    b = GroupedPredictions.build(truth, pred, 4, swapped)
    assert abs(equality_of_odds(a) - equality_of_odds(b)) < 1e-12
    assert abs(statistical_parity(a) - statistical_parity(b)) < 1e-12


def test_identical_groups_have_zero_gaps():
    """Test mirrored group behaviour yields exactly zero EO and SP."""
    truth = [0, 1, 2, 3, 0, 1, 2, 3]
    pred = [0, 2, 2, 1, 3, 1, 0, 3]
    preds = GroupedPredictions.build(truth * 2, pred * 2, 4, ["female"] * 8 + ["male"] * 8)
    assert equality_of_odds(preds) == 0.0
    assert statistical_parity(preds) == 0.0
    assert equal_opportunity(preds) == 0.0


def test_uar_examples():
    """Test hand-computed UAR, accuracy and the confusion matrix."""
    preds = GroupedPredictions.build([0, 0, 0, 1], [0, 0, 1, 1], 2)
    assert uar(preds) == pytest.approx((2 / 3 + 1) / 2)
    assert accuracy(preds) == 0.75
    np.testing.assert_array_equal(confusion_matrix(preds), [[2, 1], [0, 1]])
    assert uar(GroupedPredictions.build([0, 1, 2, 3], [0, 1, 2, 3], 4)) == 1.0


def test_uar_excludes_absent_classes():
    """Test classes with no true items are dropped with a warning."""
    preds = GroupedPredictions.build([0, 0, 1], [0, 1, 1], 4)
    assert uar(preds) == pytest.approx(0.75)
    assert preds.warnings == ["classes [2, 3] absent from true labels; excluded from UAR"]


def test_uar_ignores_predicted_only_classes():
    """Test a class that is only predicted costs recall but adds no term."""
    preds = GroupedPredictions.build([0, 0, 1, 1], [3, 0, 1, 1], 4)
    assert uar(preds) == pytest.approx(0.75)
    matrix = confusion_matrix(preds)
    assert matrix.shape == (4, 4)
    assert matrix[0, 3] == 1
    assert matrix.sum() == 4


def test_metric_input_errors():
    """Test empty sets, bad labels and missing groups."""
    with pytest.raises(MetricError):
        uar(GroupedPredictions.build([], [], 4))
    with pytest.raises(MetricError):
        GroupedPredictions.build([0, 1], [0], 4)
    with pytest.raises(MetricError):
        GroupedPredictions.build([0, 4], [0, 1], 4)
    with pytest.raises(MetricError):
        equality_of_odds(GroupedPredictions.build([0, 1], [0, 1], 2))
    with pytest.raises(MetricError):
        statistical_parity(GroupedPredictions.build([0, 1], [0, 1], 2, ["female", "female"]))


def test_fairness_skips_undefined_classes():
    """Test a class missing from one group is skipped with a warning."""
    preds = GroupedPredictions.build(
        [0, 1, 0, 0], [0, 1, 0, 1], 2, ["female", "female", "male", "male"]
    )
    # class 0: TPR 1 vs 0.5, FPR 0 vs undefined; class 1 undefined for male
    assert equal_opportunity(preds) == pytest.approx(50.0)
    assert len(preds.warnings) == 1
    with pytest.raises(MetricError):
        equality_of_odds(preds)


def test_flops_primitives():
    """Test the single-linear and relu hand counts."""
    assert linear_flops(1, 2, 3) == 15
    assert elementwise_flops(10, 128) == 1280


def test_head_flops_hand_totals(small_head_config):
    """Test the head total against a hand enumeration at one and 598 frames."""
    one = flops_count(small_head_config, duration_s=0.025)
    assert one.frames == 1
    assert one.total == 2267 + 34185

    six = flops_count(small_head_config)
    assert six.frames == 598
    assert six.total == 20444897
    assert six.backbone is None


def test_flops_are_linear_in_frames(small_head_config):
    """Test totals grow by a constant per added frame."""
    totals = [
        flops_count(small_head_config, duration_s=(400 + 160 * (t - 1)) / 16000).total
        for t in (1, 2, 3, 10)
    ]
    step = totals[1] - totals[0]
    assert totals[2] - totals[1] == step
    assert totals[3] - totals[0] == 9 * step


def test_toy_encoder_flops(small_head_config):
    """Test the encoder stages are enumerated and added to the head."""
    encoder = ToyEncoderConfig(frame_len=16, hop=8, num_layers=2, dim=3)
    report = flops_count(small_head_config, encoder, duration_s=40 / 16000)
    assert report.frames == 4
    assert report.backbone == "toy-encoder"
    assert report.total == 2976 + 2267 + 34185 * 4
    assert report.as_dict()["total"] == report.total


def test_declared_backbone_flops(small_head_config):
    """Test catalogued and declared backbones add a constant."""
    head = flops_count(small_head_config).total
    assert flops_count(small_head_config, "apc").total == 2_500_000_000 + head
    declared = flops_count(small_head_config, 1e9)
    assert declared.total == 1_000_000_000 + head
    assert declared.backbone == "declared"


def test_privacy_requires_both_genders(small_manifest):
    """Test a single-gender manifest is rejected."""
    females = Manifest(
        dataset_name="f",
        records=[r for r in small_manifest.records if r.gender == Gender.FEMALE],
    )
    plan = make_folds(small_manifest, FoldScheme.SESSION, 2, ValPolicy.FRACTION)
    with pytest.raises(MetricError, match="only female"):
        privacy_probe(females, TrainConfig(), HeadConfig(num_layers=2, input_dim=3), plan)


def test_privacy_uses_its_own_epoch_budget(synth_dir):
    """Test the gender classifier trains two-class heads for the privacy epoch budget."""
    manifest = load_manifest(synth_dir / "manifest.jsonl")
    plan = make_folds(manifest, FoldScheme.SESSION, 5)
    cfg = TrainConfig(max_epochs=30, privacy_max_epochs=2, batch_size=16)
    result = privacy_probe(manifest, cfg, HeadConfig(num_layers=2, input_dim=4, fc_hidden=8), plan)

    assert result.epochs == 2
    assert 0.0 <= result.accuracy_percent <= 100.0
    assert all(len(f.model.history) == 2 for f in result.cv.folds)
    assert all(f.model.config.num_classes == 2 for f in result.cv.folds)


def _gender_accuracy(tmp_path, leakage: float) -> float:
    cfg = SynthConfig(
        counts={e: [125, 125] for e in EMOTIONS},
        layers=2,
        frames=5,
        dim=4,
        separation=0.0,
        gender_leakage=leakage,
    )
    manifest = synth_dataset(cfg, tmp_path / f"leak{leakage}", seed=1)
    plan = make_folds(manifest, FoldScheme.SESSION, 5)
    result = privacy_probe(
        manifest, TrainConfig(), HeadConfig(num_layers=2, input_dim=4), plan, max_workers=5
    )
    assert result.epochs == 10
    return result.accuracy_percent


@pytest.mark.slow
def test_privacy_detects_gender_leakage(tmp_path):
    """Test strongly gender-coded embeddings reveal gender accurately."""
    assert _gender_accuracy(tmp_path, 5.0) >= 95.0


@pytest.mark.slow
def test_privacy_without_leakage_is_near_chance(tmp_path):
    """Test embeddings carrying no gender signal stay near coin-flip accuracy."""
    assert 40.0 <= _gender_accuracy(tmp_path, 0.0) <= 60.0


def test_metrics_report_round_trip(tmp_path):
    """Test reports dump with sorted keys and reload."""
    report = MetricsReport(model_name="m", uar_percent=61.5, flops=2.3e9, warnings=["w"])
    path = tmp_path / "metrics.json"
    path.write_text(report.dump())
    assert load_report(path) == report
    assert report.dump().endswith("\n")

    path.write_text('{"model_name": "m", "uar_percent": 140}')
    with pytest.raises(MetricError):
        load_report(path)
