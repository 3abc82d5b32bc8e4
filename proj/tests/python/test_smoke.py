"""Smoke tests for the python module built from the C++ core."""

import math

import pytest

import speechgrade as sg


def sine(freq, amp, n, rate=16000):
    return [amp * math.sin(2 * math.pi * freq * t / rate) for t in range(n)]


def test_wav_round_trip(tmp_path):
    path = str(tmp_path / "tone.wav")
    samples = sine(300, 0.4, 3200)
    sg.write_wav(samples, 16000, path)
    decoded, rate = sg.decode_wav(path)
    assert rate == 16000
    assert len(decoded) == len(samples)
    assert max(abs(a - b) for a, b in zip(samples, decoded)) < 1.0 / 32768


def test_mfcc_shape_and_features():
    samples = sine(440, 0.8, 16000)
    frames = sg.compute_mfcc(samples)
    assert len(frames) == 98
    assert len(frames[0]) == 13

    feats = sg.extract_perceptual_features(samples)
    assert abs(feats.f_sc - 440.0) <= 16000.0 / 512.0
    assert feats.f_e > 0.0

    track = sg.estimate_pitch_track(sine(200, 0.5, 16000))
    voiced = [f for f in track if f is not None]
    assert voiced and all(f == 200.0 for f in voiced[1:-1])


def test_confidence_math():
    assert sg.normalize_minmax([2, 4, 6]) == [0.0, 0.5, 1.0]
    assert sg.aggregate_fixed(0.5, 1.0, 1.0) == pytest.approx(0.8, abs=1e-12)
    w = sg.softmax_weights(0.0, 0.0, 0.0)
    assert w == pytest.approx((1 / 3, 1 / 3, 1 / 3))
    g = sg.aggregation_gradient(1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    assert g == pytest.approx((2 / 9, -1 / 9, -1 / 9))
    assert sg.model_confidence([[1.0, 0.0], [0.5, 0.5]]) == pytest.approx(0.5)
    assert sg.lambda_at_epoch(1.0, 0.5, 50, 0) == 1.0
    assert sg.lambda_at_epoch(1.0, 0.5, 50, 49) == 0.5
    assert sg.hybrid_confidence(0.8, 0.4, 0.5) == pytest.approx(0.6)
    with pytest.raises(ValueError):
        sg.aggregate_fixed(1.0, 1.0, 1.0, alpha=0.9)


def test_text_metrics():
    assert sg.word_error_rate("a b c", "a x c") == pytest.approx(1 / 3)
    summary = sg.edit_distance(["a", "b", "c"], ["a", "c"])
    assert summary["deletions"] == 1 and summary["wer"] == pytest.approx(1 / 3)
    assert sg.char_edit_distance("సుగర్", "సుగర") == 1
    assert sg.wer_score(["a"], ["x", "y", "z"]) == 0.0


def test_manifest(tmp_path):
    path = tmp_path / "manifest.tsv"
    path.write_text(
        "utt_id\tsource\taudio_path\ttranscript\taligned_ref_id\n"
        "u1\treal\ta.wav\thello there\t\n"
        "u2\tsynth_aligned\tb.wav\thello there\tu1\n",
        encoding="utf-8")
    records = sg.load_manifest(str(path))
    assert [r.utt_id for r in records] == ["u1", "u2"]
    assert records[0].source == sg.SourceKind.REAL
    has_sim, has_wer, fixed_sim, fixed_wer = sg.availability_mask(records[0])
    assert (has_sim, has_wer, fixed_sim, fixed_wer) == (False, False, 1.0, 1.0)
    with pytest.raises(ValueError):
        sg.load_manifest(str(tmp_path / "manifest.tsv").replace("manifest", "no"))


def test_ngram_model(tmp_path):
    corpus = [["the", "dose", "is", "small"]] * 5 + [["take", "the", "tablet"]] * 3
    model = sg.NGramModel.train(corpus, 3)
    assert model.order == 3
    assert model.perplexity(corpus) >= 1.0
    assert model.logprob(["the", "dose", "is", "small"]) > model.logprob(
        ["small", "the", "is", "dose"])

    path = str(tmp_path / "model.arpa")
    model.dump_arpa(path)
    reloaded = sg.NGramModel.load_arpa(path)
    assert reloaded.to_arpa() == model.to_arpa()

    best = sg.rescore_nbest(
        [(["small", "the", "is", "dose"], -2.0),
         (["the", "dose", "is", "small"], -2.0)], model)
    assert best == 1

    fixed = sg.correct_transcript(["the", "dosx", "is", "small"], model,
                                  ["the", "dose", "is", "small", "take", "tablet"])
    assert fixed == ["the", "dose", "is", "small"]


def test_trainer():
    features, labels, scores = [], [], []
    for i in range(80):
        label = i % 2
        base = 1.0 if label else -1.0
        features.append([base + 0.05 * ((i + j) % 3) for j in range(3)])
        labels.append(label)
        scores.append((0.9, 0.8, 0.7))
    out = sg.train_classifier(features, labels, scores, epochs=20, seed=1)
    assert len(out["log"]) == 20
    assert out["log"][0]["lambda"] == 1.0
    assert out["log"][-1]["lambda"] == 0.5
    assert math.isfinite(out["log"][-1]["loss"])

    acc_w, acc_u = sg.noise_robustness_experiment(0, 0.3)
    assert 0.0 <= acc_u <= acc_w <= 1.0
