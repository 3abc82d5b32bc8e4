#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "speechgrade/confidence.hpp"
#include "speechgrade/corpus.hpp"
#include "speechgrade/dsp.hpp"
#include "speechgrade/ngramlm.hpp"
#include "speechgrade/trainer.hpp"

namespace speechgrade {

// TSV file contracts used by the CLI. Numeric columns are printed with six
// decimal places so reruns are byte-identical.

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::vector<std::string> read_lines(const std::string& path);

// Feature table: header utt_id/f_sc/f_sr/f_mfcc/f_pv/f_e.
std::string format_feature_table(
    const std::vector<std::pair<std::string, PerceptualFeatures>>& rows);
std::vector<std::pair<std::string, PerceptualFeatures>> parse_feature_table(
    const std::string& content);

// Confidence report: header utt_id/s_perceptual/s_sim/s_wer/c_static/
// c_model/c_final/lambda.
std::string format_report_table(const std::vector<ConfidenceReport>& reports);

// Hypotheses: utt_id<TAB>space-separated words, no header.
std::unordered_map<std::string, std::vector<std::string>> parse_hypotheses(
    const std::string& content);
std::vector<std::pair<std::string, std::vector<std::string>>> parse_hypothesis_rows(
    const std::string& content);
std::string format_hypotheses(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& rows);

// N-best: utt_id<TAB>acoustic_score<TAB>words; consecutive rows with the
// same utt_id form one list.
std::vector<std::pair<std::string, std::vector<Hypothesis>>> parse_nbest(
    const std::string& content);

// One word per line.
std::vector<std::string> read_lexicon(const std::string& path);

// One sentence per line, whitespace-tokenized; blank lines are skipped.
std::vector<std::vector<std::string>> read_sentences(const std::string& path);

// Posterior matrix: one frame per line, tab-separated probabilities.
std::vector<std::vector<double>> parse_posterior_matrix(const std::string& content);

// Train dataset: f0..fD-1<TAB>label<TAB>s_perc<TAB>s_sim<TAB>s_wer, no header.
std::vector<TrainSample> parse_dataset(const std::string& content);
std::string format_dataset(const std::vector<TrainSample>& samples);

// Training log: epoch/loss/lambda/alpha/beta/gamma/lr.
std::string format_train_log(const std::vector<EpochLog>& log);

}  // namespace speechgrade
