#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "speechgrade/confidence.hpp"
#include "speechgrade/corpus.hpp"
#include "speechgrade/dsp.hpp"
#include "speechgrade/ngramlm.hpp"
#include "speechgrade/textmetrics.hpp"
#include "speechgrade/trainer.hpp"

namespace py = pybind11;
using namespace speechgrade;

namespace {

FrameConfig make_config(std::size_t frame_len, std::size_t hop, std::size_t fft_size,
                        double preemphasis, std::size_t n_mels, std::size_t n_mfcc,
                        double rolloff_fraction) {
  FrameConfig cfg;
  cfg.frame_len = frame_len;
  cfg.hop = hop;
  cfg.fft_size = fft_size;
  cfg.preemphasis = preemphasis;
  cfg.n_mels = n_mels;
  cfg.n_mfcc = n_mfcc;
  cfg.rolloff_fraction = rolloff_fraction;
  cfg.validate();
  return cfg;
}

MfccSequence as_sequence(const std::vector<std::vector<double>>& frames) {
  MfccSequence seq;
  seq.frames = frames;
  return seq;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Speech data quality scoring, confidence-weighted training and "
            "Kneser-Ney n-gram transcript correction";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::enum_<SourceKind>(m, "SourceKind")
      .value("REAL", SourceKind::Real)
      .value("SYNTHETIC_ALIGNED", SourceKind::SyntheticAligned)
      .value("SYNTHETIC_UNALIGNED", SourceKind::SyntheticUnaligned);

  py::class_<CorpusRecord>(m, "CorpusRecord")
      .def_readonly("utt_id", &CorpusRecord::utt_id)
      .def_readonly("source", &CorpusRecord::source)
      .def_readonly("audio_path", &CorpusRecord::audio_path)
      .def_readonly("transcript", &CorpusRecord::transcript)
      .def_readonly("aligned_ref_id", &CorpusRecord::aligned_ref_id);

  py::class_<PerceptualFeatures>(m, "PerceptualFeatures")
      .def_readonly("f_sc", &PerceptualFeatures::f_sc)
      .def_readonly("f_sr", &PerceptualFeatures::f_sr)
      .def_readonly("f_mfcc", &PerceptualFeatures::f_mfcc)
      .def_readonly("f_pv", &PerceptualFeatures::f_pv)
      .def_readonly("f_e", &PerceptualFeatures::f_e)
      .def("__repr__", [](const PerceptualFeatures& f) {
        return "PerceptualFeatures(f_sc=" + std::to_string(f.f_sc) +
               ", f_sr=" + std::to_string(f.f_sr) +
               ", f_mfcc=" + std::to_string(f.f_mfcc) +
               ", f_pv=" + std::to_string(f.f_pv) +
               ", f_e=" + std::to_string(f.f_e) + ")";
      });

  m.def("load_manifest", &load_manifest, py::arg("path"));
  m.def(
      "availability_mask",
      [](const CorpusRecord& rec) {
        const auto mask = availability_mask(rec);
        return py::make_tuple(mask.has_sim, mask.has_wer, mask.fixed_sim,
                              mask.fixed_wer);
      },
      py::arg("record"));
  m.def(
      "decode_wav",
      [](const std::string& path) {
        const auto clip = decode_wav(path);
        return py::make_tuple(clip.samples, clip.sample_rate_hz);
      },
      py::arg("path"));
  m.def(
      "write_wav",
      [](const std::vector<double>& samples, int sample_rate_hz,
         const std::string& path) {
        write_wav({samples, sample_rate_hz}, path);
      },
      py::arg("samples"), py::arg("sample_rate_hz"), py::arg("path"));

  m.def(
      "compute_mfcc",
      [](const std::vector<double>& samples, int sample_rate_hz,
         std::size_t frame_len, std::size_t hop, std::size_t fft_size,
         double preemphasis, std::size_t n_mels, std::size_t n_mfcc,
         double rolloff_fraction) {
        return compute_mfcc({samples, sample_rate_hz},
                            make_config(frame_len, hop, fft_size, preemphasis,
                                        n_mels, n_mfcc, rolloff_fraction))
            .frames;
      },
      py::arg("samples"), py::arg("sample_rate_hz") = 16000,
      py::arg("frame_len") = 400, py::arg("hop") = 160, py::arg("fft_size") = 512,
      py::arg("preemphasis") = 0.97, py::arg("n_mels") = 26, py::arg("n_mfcc") = 13,
      py::arg("rolloff_fraction") = 0.85);
  m.def(
      "extract_perceptual_features",
      [](const std::vector<double>& samples, int sample_rate_hz,
         std::size_t frame_len, std::size_t hop, std::size_t fft_size,
         double preemphasis, std::size_t n_mels, std::size_t n_mfcc,
         double rolloff_fraction) {
        return extract_perceptual_features(
            {samples, sample_rate_hz},
            make_config(frame_len, hop, fft_size, preemphasis, n_mels, n_mfcc,
                        rolloff_fraction));
      },
      py::arg("samples"), py::arg("sample_rate_hz") = 16000,
      py::arg("frame_len") = 400, py::arg("hop") = 160, py::arg("fft_size") = 512,
      py::arg("preemphasis") = 0.97, py::arg("n_mels") = 26, py::arg("n_mfcc") = 13,
      py::arg("rolloff_fraction") = 0.85);
  m.def(
      "estimate_pitch_track",
      [](const std::vector<double>& samples, int sample_rate_hz) {
        return estimate_pitch_track({samples, sample_rate_hz}, FrameConfig{});
      },
      py::arg("samples"), py::arg("sample_rate_hz") = 16000);

  m.def("normalize_minmax", &normalize_minmax, py::arg("values"));
  m.def(
      "perceptual_score",
      [](double f_sc, double f_sr, double f_mfcc, double f_pv, double f_e) {
        return perceptual_score({f_sc, f_sr, f_mfcc, f_pv, f_e});
      },
      py::arg("f_sc"), py::arg("f_sr"), py::arg("f_mfcc"), py::arg("f_pv"),
      py::arg("f_e"));
  m.def(
      "acoustic_similarity",
      [](const std::vector<std::vector<double>>& real_frames,
         const std::vector<std::vector<double>>& synth_frames) {
        return acoustic_similarity(as_sequence(real_frames),
                                   as_sequence(synth_frames));
      },
      py::arg("real_frames"), py::arg("synth_frames"));
  m.def("wer_score", &wer_score, py::arg("ref_words"), py::arg("hyp_words"));
  m.def("word_error_rate", &word_error_rate, py::arg("ref_line"),
        py::arg("hyp_line"));
  m.def(
      "edit_distance",
      [](const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
        const auto s = edit_distance(ref, hyp);
        py::dict out;
        out["substitutions"] = s.substitutions;
        out["insertions"] = s.insertions;
        out["deletions"] = s.deletions;
        out["ref_len"] = s.ref_len;
        out["wer"] = s.wer;
        return out;
      },
      py::arg("ref"), py::arg("hyp"));
  m.def("char_edit_distance", &char_edit_distance, py::arg("a"), py::arg("b"));

  m.def(
      "aggregate_fixed",
      [](double s_perceptual, double s_sim, double s_wer, double alpha, double beta,
         double gamma) {
        return aggregate_fixed({s_perceptual, s_sim, s_wer}, {alpha, beta, gamma});
      },
      py::arg("s_perceptual"), py::arg("s_sim"), py::arg("s_wer"),
      py::arg("alpha") = 0.4, py::arg("beta") = 0.3, py::arg("gamma") = 0.3);
  m.def(
      "softmax_weights",
      [](double w1, double w2, double w3) {
        const auto w = softmax_weights({w1, w2, w3});
        return py::make_tuple(w.alpha, w.beta, w.gamma);
      },
      py::arg("w1"), py::arg("w2"), py::arg("w3"));
  m.def(
      "aggregate_learnable",
      [](double s_perceptual, double s_sim, double s_wer, double w1, double w2,
         double w3) {
        return aggregate_learnable({s_perceptual, s_sim, s_wer}, {w1, w2, w3});
      },
      py::arg("s_perceptual"), py::arg("s_sim"), py::arg("s_wer"), py::arg("w1"),
      py::arg("w2"), py::arg("w3"));
  m.def(
      "aggregation_gradient",
      [](double s_perceptual, double s_sim, double s_wer, double w1, double w2,
         double w3) {
        const auto g = aggregation_gradient({s_perceptual, s_sim, s_wer},
                                            {w1, w2, w3});
        return py::make_tuple(g[0], g[1], g[2]);
      },
      py::arg("s_perceptual"), py::arg("s_sim"), py::arg("s_wer"), py::arg("w1"),
      py::arg("w2"), py::arg("w3"));
  m.def("posterior_entropy", &posterior_entropy, py::arg("p"));
  m.def("model_confidence", &model_confidence, py::arg("posteriors"));
  m.def(
      "lambda_at_epoch",
      [](double lambda_start, double lambda_end, std::size_t total_epochs,
         std::size_t epoch) {
        return lambda_at_epoch({lambda_start, lambda_end, total_epochs}, epoch);
      },
      py::arg("lambda_start"), py::arg("lambda_end"), py::arg("total_epochs"),
      py::arg("epoch"));
  m.def("hybrid_confidence", &hybrid_confidence, py::arg("c_static_or_learnable"),
        py::arg("c_model"), py::arg("lambda_"));

  py::class_<NGramModel>(m, "NGramModel")
      .def_static("train", &NGramModel::train, py::arg("sentences"),
                  py::arg("order"))
      .def_static("load_arpa", &NGramModel::load_arpa, py::arg("path"))
      .def_static("from_arpa_text", &NGramModel::from_arpa_text, py::arg("text"))
      .def_property_readonly("order", &NGramModel::order)
      .def("predictable_vocab", &NGramModel::predictable_vocab)
      .def("conditional_log10", &NGramModel::conditional_log10, py::arg("context"),
           py::arg("word"))
      .def("logprob", &NGramModel::logprob, py::arg("words"))
      .def("perplexity", &NGramModel::perplexity, py::arg("sentences"))
      .def("to_arpa", &NGramModel::to_arpa)
      .def("dump_arpa", &NGramModel::dump_arpa, py::arg("path"));

  m.def(
      "rescore_nbest",
      [](const std::vector<std::pair<std::vector<std::string>, double>>& hypotheses,
         const NGramModel& model, double lm_weight, double length_bonus) {
        std::vector<Hypothesis> hs;
        hs.reserve(hypotheses.size());
        for (const auto& [words, score] : hypotheses) hs.push_back({words, score});
        return rescore_nbest(hs, model, lm_weight, length_bonus);
      },
      py::arg("hypotheses"), py::arg("model"), py::arg("lm_weight") = 1.0,
      py::arg("length_bonus") = 0.0);
  m.def(
      "correct_transcript",
      [](const std::vector<std::string>& hyp, const NGramModel& model,
         const std::vector<std::string>& lexicon, std::size_t max_char_edits,
         double edit_penalty, std::size_t beam_width, double lm_weight) {
        CorrectionConfig cfg;
        cfg.max_char_edits = max_char_edits;
        cfg.edit_penalty = edit_penalty;
        cfg.beam_width = beam_width;
        cfg.lm_weight = lm_weight;
        return correct_transcript(hyp, model, lexicon, cfg);
      },
      py::arg("hyp"), py::arg("model"), py::arg("lexicon"),
      py::arg("max_char_edits") = 2, py::arg("edit_penalty") = 0.8,
      py::arg("beam_width") = 8, py::arg("lm_weight") = 1.0);

  m.def(
      "train_classifier",
      [](const std::vector<std::vector<double>>& features,
         const std::vector<std::size_t>& labels,
         const std::vector<std::array<double, 3>>& scores, const std::string& mode,
         std::size_t epochs, double learning_rate, std::size_t batch_size,
         std::uint64_t seed, double alpha, double beta, double gamma,
         double lambda_start, double lambda_end) {
        if (features.size() != labels.size() || features.size() != scores.size())
          throw ValidationError("features, labels and scores must align");
        std::vector<TrainSample> dataset(features.size());
        for (std::size_t i = 0; i < features.size(); ++i) {
          dataset[i].features = features[i];
          dataset[i].label = labels[i];
          dataset[i].scores = {scores[i][0], scores[i][1], scores[i][2]};
        }
        TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.learning_rate = learning_rate;
        cfg.batch_size = batch_size;
        cfg.seed = seed;
        cfg.schedule = {lambda_start, lambda_end, epochs};
        if (mode == "fixed") {
          cfg.mode = WeightMode::Fixed;
          cfg.fixed_weights = {alpha, beta, gamma};
        } else if (mode == "learnable") {
          cfg.mode = WeightMode::Learnable;
        } else if (mode == "unweighted") {
          cfg.mode = WeightMode::Unweighted;
        } else {
          throw ValidationError("mode must be fixed, learnable or unweighted");
        }
        const auto result = train(dataset, cfg);
        py::dict out;
        out["weights"] = result.state.model.weights;
        out["bias"] = result.state.model.bias;
        out["logits"] = py::make_tuple(result.state.logits.w1,
                                       result.state.logits.w2,
                                       result.state.logits.w3);
        py::list log;
        for (const auto& e : result.log) {
          py::dict row;
          row["epoch"] = e.epoch;
          row["loss"] = e.loss;
          row["lambda"] = e.lambda;
          row["alpha"] = e.alpha;
          row["beta"] = e.beta;
          row["gamma"] = e.gamma;
          row["lr"] = e.lr;
          log.append(row);
        }
        out["log"] = log;
        return out;
      },
      py::arg("features"), py::arg("labels"), py::arg("scores"),
      py::arg("mode") = "fixed", py::arg("epochs") = 50,
      py::arg("learning_rate") = 1e-2, py::arg("batch_size") = 16,
      py::arg("seed") = 0, py::arg("alpha") = 0.4, py::arg("beta") = 0.3,
      py::arg("gamma") = 0.3, py::arg("lambda_start") = 1.0,
      py::arg("lambda_end") = 0.5);
  m.def(
      "noise_robustness_experiment",
      [](std::uint64_t seed, double corruption_rate) {
        const auto r = noise_robustness_experiment(seed, corruption_rate);
        return py::make_tuple(r.acc_weighted, r.acc_unweighted);
      },
      py::arg("seed"), py::arg("corruption_rate") = 0.3);
}
