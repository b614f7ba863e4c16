"""Tests for SNR budgets, FGSM, PGD, Gaussian noise and success rates."""

import math

import numpy as np
import pytest

from emotrust.attacks import (
    AttackConfig,
    AttackItem,
    EncoderHeadTarget,
    HeadTarget,
    LinearTarget,
    attack_success_rate,
    build_target,
    epsilon_for_snr,
    fgsm,
    gaussian_perturb,
    items_from_examples,
    measured_snr_db,
    pgd,
    pooled_attack_success_rate,
    pooled_robustness_curve,
    robustness_curve,
)
from emotrust.core.exceptions import AttackError, ModelError
from emotrust.core.types import AttackKind, AttackSurface
from emotrust.model import HeadConfig, ToyEncoderConfig, init_head
from emotrust.training import Example


def _unit_rms(rng: np.random.Generator, *shape: int) -> np.ndarray:
    x = rng.standard_normal(shape)
    return (x / np.sqrt(np.mean(x * x))).astype(np.float32)


def _margin_target() -> LinearTarget:
    # logits are the two input coordinates
    return LinearTarget(np.eye(2), np.zeros(2))


def _margin_items():
    # the true class wins by 0.2 on every item; rms is sqrt(0.26)
    return [
        AttackItem("m0", np.array([0.6, 0.4]), 0),
        AttackItem("m1", np.array([0.4, 0.6]), 1),
        AttackItem("m2", np.array([-0.4, -0.6]), 0),
    ]


def test_epsilon_for_snr():
    """Test the budget for unit-rms, zero and clean inputs."""
    ones = np.ones(16, dtype=np.float32)
    assert epsilon_for_snr(ones, 20.0) == pytest.approx(0.1)
    assert epsilon_for_snr(ones, 45.0) == pytest.approx(10 ** (-45 / 20))
    assert epsilon_for_snr(np.zeros(4), 20.0) == 0.0
    assert epsilon_for_snr(ones, math.inf) == 0.0
    with pytest.raises(AttackError):
        epsilon_for_snr(np.array([]), 20.0)


def test_fgsm_perturbation_is_sign_scaled(rng):
    """Test every coordinate moves by exactly zero or epsilon."""
    target = LinearTarget(rng.standard_normal((6, 3)), rng.standard_normal(3))
    x = _unit_rms(rng, 6)
    eps = epsilon_for_snr(x, 45.0)
    delta = np.abs(fgsm(target, x, 1, eps).astype(np.float64) - x)
    assert np.all(np.isclose(delta, 0.0, atol=1e-7) | np.isclose(delta, eps, rtol=1e-4))
    assert target.gradient_calls == 1


def test_fgsm_hits_requested_snr(rng):
    """Test the measured SNR of an FGSM perturbation on unit-rms input."""
    target = LinearTarget(rng.standard_normal((32, 4)), rng.standard_normal(4))
    x = _unit_rms(rng, 32)
    adv = fgsm(target, x, 2, epsilon_for_snr(x, 45.0))
    assert abs(measured_snr_db(x, adv) - 45.0) < 0.1


def test_single_full_pgd_step_equals_fgsm(small_head, rng):
    """Test PGD with one step of size epsilon reproduces FGSM bit for bit."""
    target = HeadTarget(small_head)
    for label in range(4):
        x = rng.standard_normal((2, 4, 3)).astype(np.float32)
        eps = epsilon_for_snr(x, 30.0)
        np.testing.assert_array_equal(
            pgd(target, x, label, eps, alpha=eps, steps=1), fgsm(target, x, label, eps)
        )


def test_pgd_stays_in_budget(small_head, rng):
    """Test every iterate is projected back into the epsilon ball."""
    target = HeadTarget(small_head)
    x = rng.standard_normal((2, 4, 3)).astype(np.float32)
    eps = epsilon_for_snr(x, 20.0)
    adv = pgd(target, x, 0, eps, alpha=eps / 3, steps=7)
    assert np.max(np.abs(adv.astype(np.float64) - x)) <= eps * (1 + 1e-5)
    assert target.gradient_calls == 7


def test_invalid_budgets_are_rejected(small_head):
    """Test negative budgets and empty PGD schedules."""
    target = HeadTarget(small_head)
    x = np.zeros((2, 1, 3), dtype=np.float32)
    with pytest.raises(AttackError):
        fgsm(target, x, 0, -1.0)
    with pytest.raises(AttackError):
        pgd(target, x, 0, 0.1, alpha=0.1, steps=0)


def test_zero_budget_returns_input(small_head, rng):
    """Test a zero budget leaves the input untouched."""
    target = HeadTarget(small_head)
    x = rng.standard_normal((2, 3, 3)).astype(np.float32)
    np.testing.assert_array_equal(fgsm(target, x, 0, 0.0), x)
    np.testing.assert_array_equal(pgd(target, x, 0, 0.0, alpha=0.1, steps=3), x)


def test_gaussian_noise_has_exact_power(rng):
    """Test noise is rescaled to the requested SNR and seeded."""
    x = _unit_rms(rng, 500)
    noisy = gaussian_perturb(x, 30.0, seed=4)
    assert measured_snr_db(x, noisy) == pytest.approx(30.0, abs=1e-3)
    np.testing.assert_array_equal(noisy, gaussian_perturb(x, 30.0, seed=4))
    assert not np.array_equal(noisy, gaussian_perturb(x, 30.0, seed=5))
    np.testing.assert_array_equal(gaussian_perturb(x, math.inf, seed=4), x)
    with pytest.raises(AttackError):
        gaussian_perturb(np.zeros(8), 30.0, seed=0)


def test_asr_matches_margin_oracle():
    """Test FGSM flips exactly when the budget exceeds half the margin."""
    items = _margin_items()
    # budget 0.2555 moves the margin by 0.511 > 0.2
    strong = attack_success_rate(_margin_target(), items, AttackConfig(snr_db=6.0))
    assert strong.correct == 3
    assert strong.asr == 1.0
    # budget 0.051 moves the margin by 0.102 < 0.2
    weak = attack_success_rate(_margin_target(), items, AttackConfig(snr_db=20.0))
    assert weak.asr == 0.0
    assert all(row.loss_after >= row.loss_before for row in strong.rows)


def test_clean_run_has_zero_success():
    """Test the infinite-SNR switch gives a zero budget and ASR 0."""
    report = attack_success_rate(_margin_target(), _margin_items(), AttackConfig(clean=True))
    assert report.asr == 0.0
    assert report.snr_db is None
    assert all(row.epsilon == 0.0 for row in report.rows)
    assert report.summary()["correct"] == 3
    assert "rows" not in report.summary()


def test_misclassified_items_are_excluded():
    """Test wrong clean predictions are skipped and an empty pool is undefined."""
    wrong = [AttackItem("w", np.array([0.6, 0.4]), 1)]
    report = attack_success_rate(_margin_target(), wrong, AttackConfig(snr_db=6.0))
    assert report.correct == 0
    assert report.asr is None
    assert report.warnings
    assert report.rows[0].success is None
    with pytest.raises(AttackError):
        attack_success_rate(_margin_target(), [], AttackConfig())


def test_gradient_calls_per_attack():
    """Test FGSM costs one gradient per attacked item and PGD costs K."""
    items = _margin_items()
    assert attack_success_rate(_margin_target(), items, AttackConfig()).gradient_calls == 3
    pgd_cfg = AttackConfig(kind=AttackKind.PGD, pgd_steps=4)
    assert attack_success_rate(_margin_target(), items, pgd_cfg).gradient_calls == 12
    noise_cfg = AttackConfig(kind=AttackKind.GAUSSIAN)
    assert attack_success_rate(_margin_target(), items, noise_cfg).gradient_calls == 0


def test_workers_do_not_change_rows(small_head, rng):
    """Test threaded attacks give the same rows as serial ones."""
    items = [
        AttackItem(f"x{i}", rng.standard_normal((2, 3, 3)).astype(np.float32), i % 4)
        for i in range(12)
    ]
    cfg = AttackConfig(kind=AttackKind.GAUSSIAN, snr_db=10.0, seed=2)
    serial = attack_success_rate(HeadTarget(small_head), items, cfg)
    threaded = attack_success_rate(HeadTarget(small_head), items, cfg, max_workers=4)
    assert serial.rows == threaded.rows


def test_pgd_step_defaults_to_budget_ratio():
    """Test the PGD step is relative unless set explicitly."""
    assert AttackConfig().step_size(0.4) == pytest.approx(0.1)
    assert AttackConfig(pgd_step_size=0.05).step_size(0.4) == 0.05
    with pytest.raises(ValueError):
        AttackConfig(snr_db=math.inf)


def test_robustness_curve_pairs_attack_with_noise():
    """Test one point per SNR and the gradient-attack requirement."""
    curve = robustness_curve(_margin_target(), _margin_items(), [6.0, 20.0], AttackConfig())
    assert [p.snr_db for p in curve.points] == [6.0, 20.0]
    assert curve.points[0].attack_asr == 1.0
    assert curve.points[1].attack_asr == 0.0
    with pytest.raises(AttackError):
        robustness_curve(
            _margin_target(), _margin_items(), [10.0], AttackConfig(kind=AttackKind.GAUSSIAN)
        )


def test_waveform_surface_attack():
    """Test FGSM through the toy encoder at the raw waveform."""
    encoder = ToyEncoderConfig(frame_len=16, hop=8, num_layers=2, dim=3, seed=1)
    params = init_head(HeadConfig(num_layers=2, input_dim=3, fc_hidden=8), seed=0)
    target = build_target(params, AttackSurface.WAVEFORM, encoder)
    assert isinstance(target, EncoderHeadTarget)

    wave = (0.5 * np.sin(np.linspace(0.0, 12.0, 64))).astype(np.float32)
    eps = epsilon_for_snr(wave, 20.0)
    adv = fgsm(target, wave, 0, eps, clip=True)
    assert adv.shape == wave.shape
    assert np.max(np.abs(adv.astype(np.float64) - wave)) <= eps * (1 + 1e-5)
    assert np.all(np.abs(adv) <= 1.0)

    with pytest.raises(ModelError):
        EncoderHeadTarget(params, encoder.model_copy(update={"dim": 4}))


def test_items_from_examples_needs_waveforms(small_manifest):
    """Test waveform surfaces refuse embedding-only examples."""
    record = small_manifest.records[0]
    ex = Example(id=record.id, emb=np.zeros((2, 1, 3), dtype=np.float32), label=0, record=record)
    items = items_from_examples([ex], AttackSurface.EMBEDDING)
    assert items[0].x.shape == (2, 1, 3)
    with pytest.raises(AttackError):
        items_from_examples([ex], AttackSurface.WAVEFORM)


def test_pooled_success_rate_sums_fold_counts():
    """Test pooled counts are fold sums and the rate is pooled, not averaged."""
    items = _margin_items()
    flipped_fold = (_margin_target(), items)
    # this target swaps the two logits, so every item is misclassified
    swapped = (LinearTarget(np.array([[0.0, 1.0], [1.0, 0.0]]), np.zeros(2)), items[:1])
    cfg = AttackConfig(snr_db=6.0)

    report = pooled_attack_success_rate([flipped_fold, swapped, (_margin_target(), [])], cfg)
    assert report.correct == 3
    assert report.flipped == 3
    assert report.asr == 1.0
    assert len(report.rows) == 4
    assert report.gradient_calls == 3
    with pytest.raises(AttackError):
        pooled_attack_success_rate([(_margin_target(), [])], cfg)


def test_pooled_robustness_curve_matches_single_fold():
    """Test one fold through the pooled sweep equals the single-target sweep."""
    cfg = AttackConfig()
    single = robustness_curve(_margin_target(), _margin_items(), [6.0, 20.0], cfg)
    pooled = pooled_robustness_curve([(_margin_target(), _margin_items())], [6.0, 20.0], cfg)
    assert pooled == single


def test_pgd_reaches_at_least_fgsm_loss(rng):
    """Test ten PGD steps of a quarter budget match or beat FGSM on most items."""
    head = init_head(HeadConfig(num_layers=2, input_dim=6, fc_hidden=16), seed=11)
    target = HeadTarget(head)
    wins = 0
    for i in range(50):
        x = rng.standard_normal((2, 8, 6)).astype(np.float32)
        label = i % 4
        eps = epsilon_for_snr(x, 10.0)
        fgsm_loss = target.loss(fgsm(target, x, label, eps), label)
        pgd_loss = target.loss(pgd(target, x, label, eps, eps / 4, 10), label)
        wins += pgd_loss >= fgsm_loss - 1e-6
    assert wins >= 45
