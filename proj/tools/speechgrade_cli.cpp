// speechgrade: score mixed real/synthetic speech corpora, train the
// confidence-weighted reference classifier, and correct transcripts with a
// Kneser-Ney n-gram model.
//
// Exit codes: 0 success, 1 validation/format error, 2 I/O error,
// 3 numeric failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "speechgrade/confidence.hpp"
#include "speechgrade/corpus.hpp"
#include "speechgrade/dsp.hpp"
#include "speechgrade/io.hpp"
#include "speechgrade/ngramlm.hpp"
#include "speechgrade/textmetrics.hpp"
#include "speechgrade/trainer.hpp"

namespace sg = speechgrade;

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

struct FrameFlags {
  std::size_t frame_len = 400;
  std::size_t hop = 160;
  std::size_t fft_size = 512;
  double preemphasis = 0.97;
  std::size_t n_mels = 26;
  std::size_t n_mfcc = 13;
  double rolloff = 0.85;

  void attach(CLI::App* cmd) {
    cmd->add_option("--frame-len", frame_len, "Frame length in samples")
        ->capture_default_str();
    cmd->add_option("--hop", hop, "Hop size in samples")->capture_default_str();
    cmd->add_option("--fft-size", fft_size, "FFT size (power of two)")
        ->capture_default_str();
    cmd->add_option("--preemphasis", preemphasis, "Pre-emphasis coefficient")
        ->capture_default_str();
    cmd->add_option("--n-mels", n_mels, "Mel filter count")->capture_default_str();
    cmd->add_option("--n-mfcc", n_mfcc, "MFCC coefficient count")
        ->capture_default_str();
    cmd->add_option("--rolloff", rolloff, "Spectral rolloff energy fraction")
        ->capture_default_str();
  }

  sg::FrameConfig config() const {
    sg::FrameConfig cfg;
    cfg.frame_len = frame_len;
    cfg.hop = hop;
    cfg.fft_size = fft_size;
    cfg.preemphasis = preemphasis;
    cfg.n_mels = n_mels;
    cfg.n_mfcc = n_mfcc;
    cfg.rolloff_fraction = rolloff;
    cfg.validate();
    return cfg;
  }
};

void run_features(const std::string& manifest_path, const std::string& out_path,
                  const FrameFlags& flags) {
  const auto cfg = flags.config();
  const auto records = sg::load_manifest(manifest_path);
  std::vector<std::pair<std::string, sg::PerceptualFeatures>> rows;
  rows.reserve(records.size());
  for (const auto& rec : records) {
    const auto clip = sg::decode_wav(rec.audio_path);
    rows.emplace_back(rec.utt_id, sg::extract_perceptual_features(clip, cfg));
  }
  sg::write_text_file(out_path, sg::format_feature_table(rows));
}

void run_score(const std::string& manifest_path, const std::string& features_path,
               const std::string& out_path, const std::string& hyp_path,
               const std::string& posteriors_dir, const std::vector<double>& logits,
               double alpha, double beta, double gamma, double lambda,
               bool fallback_transcript) {
  sg::ScoreInputs in;
  in.records = sg::load_manifest(manifest_path);

  const auto feature_rows = sg::parse_feature_table(sg::read_text_file(features_path));
  std::map<std::string, sg::PerceptualFeatures> by_id;
  for (const auto& [id, f] : feature_rows) by_id[id] = f;
  for (const auto& rec : in.records) {
    const auto it = by_id.find(rec.utt_id);
    if (it == by_id.end())
      throw sg::ValidationError("feature table has no row for " + rec.utt_id);
    in.features.push_back(it->second);
  }

  // MFCCs are only needed for aligned records and their Real partners.
  std::set<std::string> need_mfcc;
  for (const auto& rec : in.records)
    if (rec.source == sg::SourceKind::SyntheticAligned) {
      need_mfcc.insert(rec.utt_id);
      need_mfcc.insert(rec.aligned_ref_id);
    }
  const sg::FrameConfig cfg;
  for (const auto& rec : in.records)
    if (need_mfcc.count(rec.utt_id))
      in.mfccs.emplace(rec.utt_id,
                       sg::compute_mfcc(sg::decode_wav(rec.audio_path), cfg));

  if (!hyp_path.empty())
    in.hypotheses = sg::parse_hypotheses(sg::read_text_file(hyp_path));

  if (!posteriors_dir.empty()) {
    for (const auto& rec : in.records) {
      const auto file = std::filesystem::path(posteriors_dir) / (rec.utt_id + ".tsv");
      if (!std::filesystem::exists(file)) continue;
      const auto matrix = sg::parse_posterior_matrix(sg::read_text_file(file.string()));
      in.model_confidences[rec.utt_id] = sg::model_confidence(matrix);
    }
  }

  sg::ScoreOptions opt;
  if (!logits.empty()) {
    if (logits.size() != 3)
      throw sg::ValidationError("--logits needs exactly three values");
    opt.weighting = sg::WeightLogits{logits[0], logits[1], logits[2]};
  } else {
    sg::AggregationWeights w{alpha, beta, gamma};
    w.validate();
    opt.weighting = w;
  }
  opt.lambda = lambda;
  if (lambda < 0.0 || lambda > 1.0)
    throw sg::ValidationError("--lambda must lie in [0,1]");
  opt.fallback_to_transcript = fallback_transcript;

  sg::write_text_file(out_path, sg::format_report_table(sg::score_corpus(in, opt)));
}

void run_wer(const std::string& ref_path, const std::string& hyp_path, bool per_utt) {
  const auto refs = sg::read_lines(ref_path);
  const auto hyps = sg::read_lines(hyp_path);
  if (refs.size() != hyps.size())
    throw sg::ValidationError("reference and hypothesis files differ in line count (" +
                              std::to_string(refs.size()) + " vs " +
                              std::to_string(hyps.size()) + ")");
  std::size_t errors = 0, ref_len = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto ref_words = sg::tokenize(refs[i]);
    if (ref_words.empty())
      throw sg::ValidationError("EmptyReference at line " + std::to_string(i + 1));
    const auto s = sg::edit_distance(ref_words, sg::tokenize(hyps[i]));
    errors += s.substitutions + s.insertions + s.deletions;
    ref_len += s.ref_len;
    if (per_utt)
      std::printf("%zu\t%zu\t%zu\t%zu\t%zu\t%s\n", i + 1, s.substitutions,
                  s.insertions, s.deletions, s.ref_len, fmt("%.4f", s.wer).c_str());
  }
  std::printf("%s\n",
              fmt("%.4f", static_cast<double>(errors) / static_cast<double>(ref_len))
                  .c_str());
}

void run_lm_train(const std::string& text_path, std::size_t order,
                  const std::string& out_path, const std::vector<std::size_t>& orders,
                  const std::string& out_prefix, const std::string& ppl_text,
                  const std::string& report_path) {
  const auto sentences = sg::read_sentences(text_path);
  if (!orders.empty()) {
    if (out_prefix.empty())
      throw sg::ValidationError("--orders requires --out-prefix");
    const auto eval = ppl_text.empty() ? sentences : sg::read_sentences(ppl_text);
    std::string report = "order\tperplexity\n";
    for (const std::size_t k : orders) {
      const auto model = sg::NGramModel::train(sentences, k);
      model.dump_arpa(out_prefix + std::to_string(k) + ".arpa");
      report += std::to_string(k) + "\t" + fmt("%.6f", model.perplexity(eval)) + "\n";
    }
    if (report_path.empty())
      std::fputs(report.c_str(), stdout);
    else
      sg::write_text_file(report_path, report);
    return;
  }
  if (out_path.empty())
    throw sg::ValidationError("--order requires --out (or use --orders)");
  sg::NGramModel::train(sentences, order).dump_arpa(out_path);
}

void run_lm_ppl(const std::string& model_path, const std::string& text_path) {
  const auto model = sg::NGramModel::load_arpa(model_path);
  const auto ppl = model.perplexity(sg::read_sentences(text_path));
  if (!std::isfinite(ppl)) throw sg::NumericError("perplexity is not finite");
  std::printf("%s\n", fmt("%.6f", ppl).c_str());
}

void run_lm_dump_check(const std::string& model_path, const std::string& out_path) {
  const auto original = sg::read_text_file(model_path);
  const auto model = sg::NGramModel::from_arpa_text(original);
  const auto dumped = model.to_arpa();
  if (!out_path.empty()) sg::write_text_file(out_path, dumped);
  std::size_t total = 0;
  for (const auto& line : sg::NGramModel::from_arpa_text(dumped).predictable_vocab())
    (void)line, ++total;
  std::printf("order=%zu\tvocab=%zu\tcanonical=%s\n", model.order(), total,
              dumped == original ? "yes" : "no");
}

void run_correct(const std::string& model_path, const std::string& lexicon_path,
                 const std::string& hyp_path, const std::string& out_path,
                 std::size_t max_edits, double edit_penalty, std::size_t beam,
                 double lm_weight) {
  const auto model = sg::NGramModel::load_arpa(model_path);
  const auto lexicon = sg::read_lexicon(lexicon_path);
  sg::CorrectionConfig cfg;
  cfg.max_char_edits = max_edits;
  cfg.edit_penalty = edit_penalty;
  cfg.beam_width = beam;
  cfg.lm_weight = lm_weight;
  cfg.validate();

  auto rows = sg::parse_hypothesis_rows(sg::read_text_file(hyp_path));
  for (auto& [id, words] : rows)
    words = sg::correct_transcript(words, model, lexicon, cfg);
  sg::write_text_file(out_path, sg::format_hypotheses(rows));
}

void run_rescore(const std::string& model_path, const std::string& nbest_path,
                 const std::string& out_path, double lm_weight, double length_bonus) {
  const auto model = sg::NGramModel::load_arpa(model_path);
  const auto groups = sg::parse_nbest(sg::read_text_file(nbest_path));
  if (groups.empty()) throw sg::ValidationError("EmptyNBest: no hypotheses");
  std::string out;
  for (const auto& [utt_id, hypotheses] : groups) {
    const std::size_t best =
        sg::rescore_nbest(hypotheses, model, lm_weight, length_bonus);
    out += utt_id + "\t" + std::to_string(best) + "\t";
    const auto& words = hypotheses[best].words;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) out += ' ';
      out += words[i];
    }
    out += '\n';
  }
  sg::write_text_file(out_path, out);
}

void run_train(const std::string& data_path, const std::string& log_path,
               const std::string& mode, std::size_t epochs, double lr,
               double logits_lr, std::size_t batch, std::uint64_t seed, double alpha,
               double beta, double gamma, const std::vector<double>& init_logits,
               double lambda_start, double lambda_end, double mu, bool freeze) {
  const auto dataset = sg::parse_dataset(sg::read_text_file(data_path));
  sg::TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.learning_rate = lr;
  if (logits_lr > 0.0) cfg.logits_learning_rate = logits_lr;
  cfg.batch_size = batch;
  cfg.seed = seed;
  cfg.schedule = {lambda_start, lambda_end, epochs};
  cfg.weight_entropy_reg = mu;
  cfg.freeze_confidence_per_epoch = freeze;
  if (mode == "fixed") {
    cfg.mode = sg::WeightMode::Fixed;
    cfg.fixed_weights = {alpha, beta, gamma};
  } else if (mode == "learnable") {
    cfg.mode = sg::WeightMode::Learnable;
    if (!init_logits.empty()) {
      if (init_logits.size() != 3)
        throw sg::ValidationError("--init-logits needs exactly three values");
      cfg.initial_logits = {init_logits[0], init_logits[1], init_logits[2]};
    }
  } else {
    throw sg::ValidationError("--mode must be 'fixed' or 'learnable'");
  }

  const auto result = sg::train(dataset, cfg);
  if (!log_path.empty())
    sg::write_text_file(log_path, sg::format_train_log(result.log));
  const auto& last = result.log.back();
  std::printf("final_loss=%s\tlambda=%s\talpha=%s\tbeta=%s\tgamma=%s\n",
              fmt("%.6f", last.loss).c_str(), fmt("%.6f", last.lambda).c_str(),
              fmt("%.6f", last.alpha).c_str(), fmt("%.6f", last.beta).c_str(),
              fmt("%.6f", last.gamma).c_str());
}

void run_experiment(std::size_t seeds, double corruption) {
  if (seeds == 0) throw sg::ValidationError("--seeds must be positive");
  std::vector<double> acc_w, acc_u;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    const auto r = sg::noise_robustness_experiment(seed, corruption);
    acc_w.push_back(r.acc_weighted);
    acc_u.push_back(r.acc_unweighted);
    std::printf("%llu\t%s\t%s\n", static_cast<unsigned long long>(seed),
                fmt("%.4f", r.acc_weighted).c_str(),
                fmt("%.4f", r.acc_unweighted).c_str());
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto stddev = [&](const std::vector<double>& v, double m) {
    double s = 0.0;
    for (const double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
  };
  const double mw = mean(acc_w), mu_ = mean(acc_u);
  std::printf("mean\t%s\t%s\n", fmt("%.4f", mw).c_str(), fmt("%.4f", mu_).c_str());
  std::printf("std\t%s\t%s\n", fmt("%.4f", stddev(acc_w, mw)).c_str(),
              fmt("%.4f", stddev(acc_u, mu_)).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speech data quality scoring, confidence-weighted training and "
               "n-gram transcript correction"};
  app.require_subcommand(1);

  // features
  auto* features = app.add_subcommand("features", "Extract perceptual features");
  std::string f_manifest, f_out;
  FrameFlags f_flags;
  features->add_option("--manifest", f_manifest, "Corpus manifest TSV")->required();
  features->add_option("--out", f_out, "Output feature TSV")->required();
  f_flags.attach(features);

  // score
  auto* score = app.add_subcommand("score", "Compute per-utterance confidence");
  std::string s_manifest, s_features, s_out, s_hyp, s_posteriors;
  std::vector<double> s_logits;
  double s_alpha = 0.4, s_beta = 0.3, s_gamma = 0.3, s_lambda = 1.0;
  bool s_fallback = false;
  score->add_option("--manifest", s_manifest, "Corpus manifest TSV")->required();
  score->add_option("--features", s_features, "Feature TSV from 'features'")
      ->required();
  score->add_option("--out", s_out, "Output confidence report TSV")->required();
  score->add_option("--hyp", s_hyp, "Decoded hypotheses TSV (utt_id<TAB>words)");
  score->add_option("--posteriors", s_posteriors,
                    "Directory of <utt_id>.tsv posterior matrices");
  score->add_option("--alpha", s_alpha, "Perceptual score weight")
      ->capture_default_str();
  score->add_option("--beta", s_beta, "Similarity score weight")
      ->capture_default_str();
  score->add_option("--gamma", s_gamma, "WER score weight")->capture_default_str();
  score
      ->add_option("--logits", s_logits,
                   "Learnable logits w1,w2,w3 (overrides alpha/beta/gamma)")
      ->delimiter(',');
  score->add_option("--lambda", s_lambda, "Static/model blend in [0,1]")
      ->capture_default_str();
  score->add_flag("--fallback-transcript", s_fallback,
                  "Score aligned records against their own transcript when no "
                  "hypothesis is given");

  // wer
  auto* wer = app.add_subcommand("wer", "Corpus word error rate");
  std::string w_ref, w_hyp;
  bool w_per_utt = false;
  wer->add_option("--ref", w_ref, "Reference text, one line per utterance")
      ->required();
  wer->add_option("--hyp", w_hyp, "Hypothesis text, parallel lines")->required();
  wer->add_flag("--per-utt", w_per_utt, "Print one TSV row per line pair");

  // lm
  auto* lm = app.add_subcommand("lm", "Kneser-Ney n-gram language model");
  lm->require_subcommand(1);
  auto* lm_train = lm->add_subcommand("train", "Train and dump ARPA");
  std::string lt_text, lt_out, lt_prefix, lt_ppl_text, lt_report;
  std::size_t lt_order = 5;
  std::vector<std::size_t> lt_orders;
  lm_train->add_option("--text", lt_text, "Training text, one sentence per line")
      ->required();
  lm_train->add_option("--order", lt_order, "n-gram order in [1,5]")
      ->capture_default_str();
  lm_train->add_option("--out", lt_out, "Output ARPA path (single order)");
  lm_train->add_option("--orders", lt_orders, "Order sweep, e.g. 3,4,5")
      ->delimiter(',');
  lm_train->add_option("--out-prefix", lt_prefix,
                       "ARPA path prefix for the sweep (<prefix><k>.arpa)");
  lm_train->add_option("--ppl-text", lt_ppl_text,
                       "Evaluation text for the sweep report (default: training)");
  lm_train->add_option("--report", lt_report, "Sweep report TSV (default: stdout)");

  auto* lm_ppl = lm->add_subcommand("ppl", "Perplexity of text under a model");
  std::string lp_model, lp_text;
  lm_ppl->add_option("--model", lp_model, "ARPA model")->required();
  lm_ppl->add_option("--text", lp_text, "Text, one sentence per line")->required();

  auto* lm_check = lm->add_subcommand("dump-check", "Canonicalize an ARPA file");
  std::string lc_model, lc_out;
  lm_check->add_option("--model", lc_model, "ARPA model")->required();
  lm_check->add_option("--out", lc_out, "Write the canonical dump here");

  // correct
  auto* correct = app.add_subcommand("correct", "Lattice transcript correction");
  std::string c_model, c_lexicon, c_hyp, c_out;
  std::size_t c_max_edits = 2, c_beam = 8;
  double c_penalty = 0.8, c_lm_weight = 1.0;
  correct->add_option("--model", c_model, "ARPA model")->required();
  correct->add_option("--lexicon", c_lexicon, "Lexicon, one word per line")
      ->required();
  correct->add_option("--hyp", c_hyp, "Hypotheses TSV (utt_id<TAB>words)")
      ->required();
  correct->add_option("--out", c_out, "Corrected hypotheses TSV")->required();
  correct->add_option("--max-edits", c_max_edits, "Character edit radius")
      ->capture_default_str();
  correct->add_option("--edit-penalty", c_penalty, "log10 penalty per char edit")
      ->capture_default_str();
  correct->add_option("--beam", c_beam, "Beam width")->capture_default_str();
  correct->add_option("--lm-weight", c_lm_weight, "LM log-prob scale")
      ->capture_default_str();

  // rescore
  auto* rescore = app.add_subcommand("rescore", "N-best shallow fusion");
  std::string r_model, r_nbest, r_out;
  double r_lm_weight = 1.0, r_length_bonus = 0.0;
  rescore->add_option("--model", r_model, "ARPA model")->required();
  rescore->add_option("--nbest", r_nbest, "N-best TSV (utt_id, score, words)")
      ->required();
  rescore->add_option("--out", r_out, "Selection TSV")->required();
  rescore->add_option("--lm-weight", r_lm_weight, "LM log-prob scale")
      ->capture_default_str();
  rescore->add_option("--length-bonus", r_length_bonus, "Per-word bonus")
      ->capture_default_str();

  // train
  auto* train_cmd = app.add_subcommand("train", "Confidence-weighted training");
  std::string t_data, t_log, t_mode = "fixed";
  std::size_t t_epochs = 50, t_batch = 16;
  std::uint64_t t_seed = 0;
  double t_lr = 1e-2, t_logits_lr = 0.0;
  double t_alpha = 0.4, t_beta = 0.3, t_gamma = 0.3;
  std::vector<double> t_init_logits;
  double t_lambda_start = 1.0, t_lambda_end = 0.5, t_mu = 0.0;
  bool t_freeze = false;
  train_cmd->add_option("--data", t_data, "Dataset TSV (features, label, scores)")
      ->required();
  train_cmd->add_option("--log", t_log, "Per-epoch log TSV");
  train_cmd->add_option("--mode", t_mode, "fixed | learnable")->capture_default_str();
  train_cmd->add_option("--epochs", t_epochs, "Training epochs")
      ->capture_default_str();
  train_cmd->add_option("--lr", t_lr, "Learning rate (cosine annealed)")
      ->capture_default_str();
  train_cmd->add_option("--logits-lr", t_logits_lr,
                        "Separate learning rate for the weight logits");
  train_cmd->add_option("--batch", t_batch, "Batch size")->capture_default_str();
  train_cmd->add_option("--seed", t_seed, "RNG seed")->capture_default_str();
  train_cmd->add_option("--alpha", t_alpha, "Fixed perceptual weight")
      ->capture_default_str();
  train_cmd->add_option("--beta", t_beta, "Fixed similarity weight")
      ->capture_default_str();
  train_cmd->add_option("--gamma", t_gamma, "Fixed WER weight")
      ->capture_default_str();
  train_cmd->add_option("--init-logits", t_init_logits, "Initial logits w1,w2,w3")
      ->delimiter(',');
  train_cmd->add_option("--lambda-start", t_lambda_start, "Initial lambda")
      ->capture_default_str();
  train_cmd->add_option("--lambda-end", t_lambda_end, "Final lambda")
      ->capture_default_str();
  train_cmd->add_option("--mu", t_mu, "Weight-entropy regularizer")
      ->capture_default_str();
  train_cmd->add_flag("--freeze-epoch-confidence", t_freeze,
                      "Cache model confidence per epoch instead of per step");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Built-in experiments");
  experiment->require_subcommand(1);
  auto* noise = experiment->add_subcommand(
      "noise-robustness", "Weighted vs unweighted training under label noise");
  std::size_t e_seeds = 10;
  double e_corruption = 0.3;
  noise->add_option("--seeds", e_seeds, "Number of seeds")->capture_default_str();
  noise->add_option("--corruption", e_corruption, "Label corruption rate")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
    if (*features) run_features(f_manifest, f_out, f_flags);
    if (*score)
      run_score(s_manifest, s_features, s_out, s_hyp, s_posteriors, s_logits,
                s_alpha, s_beta, s_gamma, s_lambda, s_fallback);
    if (*wer) run_wer(w_ref, w_hyp, w_per_utt);
    if (*lm_train)
      run_lm_train(lt_text, lt_order, lt_out, lt_orders, lt_prefix, lt_ppl_text,
                   lt_report);
    if (*lm_ppl) run_lm_ppl(lp_model, lp_text);
    if (*lm_check) run_lm_dump_check(lc_model, lc_out);
    if (*correct)
      run_correct(c_model, c_lexicon, c_hyp, c_out, c_max_edits, c_penalty, c_beam,
                  c_lm_weight);
    if (*rescore) run_rescore(r_model, r_nbest, r_out, r_lm_weight, r_length_bonus);
    if (*train_cmd)
      run_train(t_data, t_log, t_mode, t_epochs, t_lr, t_logits_lr, t_batch, t_seed,
                t_alpha, t_beta, t_gamma, t_init_logits, t_lambda_start,
                t_lambda_end, t_mu, t_freeze);
    if (*noise) run_experiment(e_seeds, e_corruption);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  } catch (const sg::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 2;
  } catch (const sg::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const sg::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
