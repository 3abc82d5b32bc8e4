"""Speech data quality scoring, confidence-weighted training and Kneser-Ney
n-gram transcript correction."""

from speechgrade._core import (
    CorpusRecord,
    IoError,
    NGramModel,
    NumericError,
    PerceptualFeatures,
    SourceKind,
    ValidationError,
    acoustic_similarity,
    aggregate_fixed,
    aggregate_learnable,
    aggregation_gradient,
    availability_mask,
    char_edit_distance,
    compute_mfcc,
    correct_transcript,
    decode_wav,
    edit_distance,
    estimate_pitch_track,
    extract_perceptual_features,
    hybrid_confidence,
    lambda_at_epoch,
    load_manifest,
    model_confidence,
    noise_robustness_experiment,
    normalize_minmax,
    perceptual_score,
    posterior_entropy,
    rescore_nbest,
    softmax_weights,
    train_classifier,
    wer_score,
    word_error_rate,
    write_wav,
)

__all__ = [
    "CorpusRecord",
    "IoError",
    "NGramModel",
    "NumericError",
    "PerceptualFeatures",
    "SourceKind",
    "ValidationError",
    "acoustic_similarity",
    "aggregate_fixed",
    "aggregate_learnable",
    "aggregation_gradient",
    "availability_mask",
    "char_edit_distance",
    "compute_mfcc",
    "correct_transcript",
    "decode_wav",
    "edit_distance",
    "estimate_pitch_track",
    "extract_perceptual_features",
    "hybrid_confidence",
    "lambda_at_epoch",
    "load_manifest",
    "model_confidence",
    "noise_robustness_experiment",
    "normalize_minmax",
    "perceptual_score",
    "posterior_entropy",
    "rescore_nbest",
    "softmax_weights",
    "train_classifier",
    "wer_score",
    "word_error_rate",
    "write_wav",
]
