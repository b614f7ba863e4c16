"""Tests for the downstream head, toy encoder, bundles and parameter counts."""

import json

import numpy as np
import pytest

from emotrust.core.exceptions import ModelError
from emotrust.model import (
    BACKBONES,
    HeadConfig,
    ToyEncoderConfig,
    argmax,
    bind_params,
    count_params,
    cross_entropy,
    encode,
    encoder_forward,
    get_backbone,
    head_forward,
    init_head,
    load_head,
    save_head,
)
from emotrust.model.head import PARAM_NAMES, layer_weights
from emotrust.tensor import ComputationTape, Primitive, apply
from emotrust.tensor.gradcheck import check_gradient


def _reference_logits(params, emb: np.ndarray) -> np.ndarray:
    """Straight-line float64 version of the head pipeline."""
    p = {n: np.asarray(params[n], dtype=np.float64) for n in PARAM_NAMES}
    z = p["layer_logits"] - p["layer_logits"].max()
    w = np.exp(z) / np.exp(z).sum()
    h = np.tensordot(w, emb.astype(np.float64), axes=1)
    h = np.maximum(h @ p["conv1_weight"] + p["conv1_bias"], 0.0)
    h = np.maximum(h @ p["conv2_weight"] + p["conv2_bias"], 0.0)
    pooled = h.mean(axis=0)
    hidden = np.maximum(pooled @ p["fc1_weight"] + p["fc1_bias"], 0.0)
    return hidden @ p["fc2_weight"] + p["fc2_bias"]


def test_head_parameter_counts():
    """Test exact trainable counts for two head shapes."""
    assert count_params(HeadConfig(num_layers=4, input_dim=8)).trainable == 26184
    assert count_params(HeadConfig(num_layers=1, input_dim=1, num_classes=2)).trainable == 25155
    assert count_params(HeadConfig(num_layers=4, input_dim=8)).frozen == 0


def test_encoder_parameter_counts():
    """Test the encoder reports projection and layers as frozen."""
    cfg = ToyEncoderConfig(frame_len=16, dim=3, num_layers=2)
    counts = count_params(cfg)
    assert counts.trainable == 0
    assert counts.frozen == 9 * 3 + 3 + 2 * (9 + 3)
    assert counts.total == counts.frozen


def test_init_is_seeded_and_layers_start_uniform(small_head_config):
    """Test identical seeds give identical heads with uniform layer weights."""
    a = init_head(small_head_config, seed=5)
    b = init_head(small_head_config, seed=5)
    c = init_head(small_head_config, seed=6)
    assert a.equals(b)
    assert not a.equals(c)
    assert layer_weights(a) == pytest.approx([0.5, 0.5])
    assert np.all(a["fc2_bias"] <= 1.0 / np.sqrt(8))


def test_head_params_are_immutable(small_head):
    """Test parameter arrays are read-only and replace builds a copy."""
    with pytest.raises(ValueError):
        small_head["fc2_bias"][0] = 1.0
    updated = small_head.replace({"fc2_bias": np.ones(4)})
    assert np.all(updated["fc2_bias"] == 1.0)
    assert not np.all(small_head["fc2_bias"] == 1.0)


def test_head_params_validate_shapes(small_head):
    """Test wrong shapes and non-finite values are rejected."""
    with pytest.raises(ModelError):
        small_head.replace({"fc2_bias": np.ones(5)})
    with pytest.raises(ModelError):
        small_head.replace({"fc2_bias": np.array([1.0, np.inf, 0.0, 0.0])})


def test_head_forward_matches_reference(small_head, rng):
    """Test the recorded pipeline against the straight-line reference."""
    for _ in range(100):
        emb = rng.standard_normal((2, int(rng.integers(1, 7)), 3)).astype(np.float32)
        logits = head_forward(small_head, emb, ComputationTape()).numpy()
        np.testing.assert_allclose(logits, _reference_logits(small_head, emb), rtol=1e-4, atol=1e-5)


def test_head_forward_rejects_wrong_shape(small_head):
    """Test mismatched L or D raises a ModelError."""
    with pytest.raises(ModelError):
        head_forward(small_head, np.zeros((3, 4, 3)), ComputationTape())
    with pytest.raises(ModelError):
        head_forward(small_head, np.zeros((2, 4)), ComputationTape())


def test_head_gradients_match_finite_differences(small_head, rng):
    """Test every head parameter and the input against central differences."""
    for trial in range(3):
        emb = rng.standard_normal((2, 4, 3))
        tape = ComputationTape()
        bound = bind_params(small_head, tape)
        x = tape.leaf(emb, name="emb")
        loss = cross_entropy(tape, head_forward(small_head, x, tape, bound), trial % 4)

        for leaf in list(bound.values()) + [x]:
            result = check_gradient(tape, loss, leaf, step=1e-5, max_elements=12, seed=trial)
            assert result.max_relative_error < 1e-4, leaf


def test_argmax_ties_go_to_lowest_index():
    """Test deterministic tie breaking."""
    assert argmax(np.array([0.5, 2.0, 2.0, -1.0])) == 1
    assert argmax(np.zeros(4)) == 0


def test_bundle_round_trip(tmp_path, small_head):
    """Test saved heads reload bit-identically."""
    index = save_head(small_head, tmp_path / "bundle")
    payload = json.loads(index.read_text())
    assert payload["version"] == 1
    assert [t["name"] for t in payload["tensors"]] == list(PARAM_NAMES)
    assert load_head(tmp_path / "bundle").equals(small_head)


def test_bundle_shape_mismatch(tmp_path, small_head):
    """Test an index disagreeing with a tensor file is rejected."""
    index = save_head(small_head, tmp_path / "bundle")
    payload = json.loads(index.read_text())
    payload["tensors"][0]["shape"] = [99]
    index.write_text(json.dumps(payload))
    with pytest.raises(ModelError):
        load_head(tmp_path / "bundle")
    with pytest.raises(ModelError):
        load_head(tmp_path / "missing")


def test_encoder_output_shape():
    """Test K stacked layers over T = (N - frame_len) // hop + 1 frames."""
    cfg = ToyEncoderConfig(num_layers=3, dim=5)
    wave = np.random.default_rng(0).standard_normal(16000).astype(np.float32) * 0.1
    emb = encode(cfg, wave)
    assert emb.shape == (3, 98, 5)
    assert np.all(np.abs(emb) <= 1.0)


def test_encoder_is_deterministic_per_seed():
    """Test encoder weights derive only from the seed."""
    wave = np.sin(np.linspace(0.0, 50.0, 800)).astype(np.float32)
    a = encode(ToyEncoderConfig(seed=1), wave)
    b = encode(ToyEncoderConfig(seed=1), wave)
    c = encode(ToyEncoderConfig(seed=2), wave)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_encoder_rejects_short_waveforms():
    """Test signals shorter than one frame are refused."""
    with pytest.raises(ModelError):
        encode(ToyEncoderConfig(), np.zeros(100, dtype=np.float32))


def test_encoder_gradient_wrt_waveform():
    """Test gradients through framing, DFT magnitude and layers."""
    cfg = ToyEncoderConfig(frame_len=16, hop=8, num_layers=2, dim=3, seed=4)
    wave = np.random.default_rng(11).standard_normal(40)
    tape = ComputationTape()
    x = tape.leaf(wave, name="wave")
    emb = encoder_forward(cfg, x, tape)
    assert emb.shape == (2, 4, 3)
    loss = apply(tape, Primitive.SUM, apply(tape, Primitive.MUL, emb, emb))
    result = check_gradient(tape, loss, x, step=1e-5)
    assert result.max_relative_error < 1e-3


def test_backbone_catalogue():
    """Test the seven backbones and case-insensitive lookup."""
    assert len(BACKBONES) == 7
    assert get_backbone("whisper tiny").inference_flops == 2.3e9
    assert get_backbone("Wav2vec 2.0 Base").layers == 12
    with pytest.raises(ModelError):
        get_backbone("HuBERT")


def test_frame_order_does_not_change_logits(small_head, rng):
    """Test mean pooling makes the head invariant to frame permutations."""
    for _ in range(20):
        emb = rng.standard_normal((2, 7, 3)).astype(np.float32)
        shuffled = emb[:, rng.permutation(7), :]
        np.testing.assert_allclose(
            head_forward(small_head, shuffled, ComputationTape()).numpy(),
            head_forward(small_head, emb, ComputationTape()).numpy(),
            rtol=1e-5,
            atol=1e-6,
        )


@pytest.mark.parametrize("layer", [0, 2, 3])
def test_dominant_layer_logit_selects_that_layer(rng, layer):
    """Test a layer logit of 50 routes the head through that layer alone."""
    params = init_head(HeadConfig(num_layers=4, input_dim=5, fc_hidden=8), seed=3)
    logits = np.zeros(4)
    logits[layer] = 50.0
    params = params.replace({"layer_logits": logits})

    weights = layer_weights(params)
    assert int(np.argmax(weights)) == layer
    assert weights[layer] == pytest.approx(1.0, abs=1e-12)

    emb = rng.standard_normal((4, 6, 5)).astype(np.float32)
    only = np.repeat(emb[layer : layer + 1], 4, axis=0)
    np.testing.assert_allclose(
        head_forward(params, emb, ComputationTape()).numpy(),
        head_forward(params, only, ComputationTape()).numpy(),
        rtol=1e-5,
        atol=1e-6,
    )


@pytest.mark.slow
def test_full_size_head_gradients_match_finite_differences():
    """Test a four-layer head at step 1e-3 over a hundred random instances."""
    head_cfg = HeadConfig(num_layers=4, input_dim=16, num_classes=4)
    checked = {}
    worst = 0.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        params = init_head(head_cfg, seed=seed)
        tape = ComputationTape()
        bound = bind_params(params, tape)
        x = tape.leaf(rng.standard_normal((4, 10, 16)), name="emb")
        loss = cross_entropy(tape, head_forward(params, x, tape, bound), seed % 4)

        for name, leaf in list(bound.items()) + [("emb", x)]:
            result = check_gradient(tape, loss, leaf, step=1e-3, max_elements=5, seed=seed)
            checked[name] = checked.get(name, 0) + result.checked
            worst = max(worst, result.max_relative_error)

    assert worst <= 1e-2
    assert set(checked) == set(PARAM_NAMES) | {"emb"}
    assert all(count > 0 for count in checked.values())
    assert sum(checked.values()) >= 0.5 * 100 * 5 * len(checked)
