#include "speechgrade/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "speechgrade/textmetrics.hpp"

namespace speechgrade {

namespace {

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

double parse_num(const std::string& s, const std::string& what, std::size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw ValidationError("MalformedLine(" + std::to_string(line_no) + "): bad " +
                          what + " '" + s + "'");
  return v;
}

std::vector<std::string> split_lines(const std::string& content) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string::npos) end = content.size();
    lines.push_back(content.substr(pos, end - pos));
    pos = end + 1;
  }
  return lines;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

std::vector<std::string> read_lines(const std::string& path) {
  return split_lines(read_text_file(path));
}

std::string format_feature_table(
    const std::vector<std::pair<std::string, PerceptualFeatures>>& rows) {
  std::string out = "utt_id\tf_sc\tf_sr\tf_mfcc\tf_pv\tf_e\n";
  for (const auto& [id, f] : rows) {
    out += id;
    out += '\t';
    out += fmt6(f.f_sc);
    out += '\t';
    out += fmt6(f.f_sr);
    out += '\t';
    out += fmt6(f.f_mfcc);
    out += '\t';
    out += fmt6(f.f_pv);
    out += '\t';
    out += fmt6(f.f_e);
    out += '\n';
  }
  return out;
}

std::vector<std::pair<std::string, PerceptualFeatures>> parse_feature_table(
    const std::string& content) {
  const auto lines = split_lines(content);
  if (lines.empty() || lines[0] != "utt_id\tf_sc\tf_sr\tf_mfcc\tf_pv\tf_e")
    throw ValidationError("MalformedLine(1): bad feature table header");
  std::vector<std::pair<std::string, PerceptualFeatures>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_tabs(lines[i]);
    if (fields.size() != 6)
      throw ValidationError("MalformedLine(" + std::to_string(i + 1) +
                            "): expected 6 fields");
    PerceptualFeatures f;
    f.f_sc = parse_num(fields[1], "f_sc", i + 1);
    f.f_sr = parse_num(fields[2], "f_sr", i + 1);
    f.f_mfcc = parse_num(fields[3], "f_mfcc", i + 1);
    f.f_pv = parse_num(fields[4], "f_pv", i + 1);
    f.f_e = parse_num(fields[5], "f_e", i + 1);
    rows.emplace_back(fields[0], f);
  }
  return rows;
}

std::string format_report_table(const std::vector<ConfidenceReport>& reports) {
  std::string out =
      "utt_id\ts_perceptual\ts_sim\ts_wer\tc_static\tc_model\tc_final\tlambda\n";
  for (const auto& r : reports) {
    out += r.utt_id;
    out += '\t';
    out += fmt6(r.scores.s_perceptual);
    out += '\t';
    out += fmt6(r.scores.s_sim);
    out += '\t';
    out += fmt6(r.scores.s_wer);
    out += '\t';
    out += fmt6(r.c_static);
    out += '\t';
    out += fmt6(r.c_model);
    out += '\t';
    out += fmt6(r.c_final);
    out += '\t';
    out += fmt6(r.lambda_used);
    out += '\n';
  }
  return out;
}

std::vector<std::pair<std::string, std::vector<std::string>>> parse_hypothesis_rows(
    const std::string& content) {
  std::vector<std::pair<std::string, std::vector<std::string>>> out;
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_tabs(lines[i]);
    if (fields.size() != 2)
      throw ValidationError("MalformedLine(" + std::to_string(i + 1) +
                            "): expected utt_id<TAB>words");
    out.emplace_back(fields[0], tokenize(fields[1]));
  }
  return out;
}

std::unordered_map<std::string, std::vector<std::string>> parse_hypotheses(
    const std::string& content) {
  std::unordered_map<std::string, std::vector<std::string>> out;
  for (auto& [id, words] : parse_hypothesis_rows(content))
    if (!out.emplace(id, std::move(words)).second)
      throw ValidationError("DuplicateId(" + id + ")");
  return out;
}

std::string format_hypotheses(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& rows) {
  std::string out;
  for (const auto& [id, words] : rows) {
    out += id;
    out += '\t';
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) out += ' ';
      out += words[i];
    }
    out += '\n';
  }
  return out;
}

std::vector<std::pair<std::string, std::vector<Hypothesis>>> parse_nbest(
    const std::string& content) {
  std::vector<std::pair<std::string, std::vector<Hypothesis>>> out;
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_tabs(lines[i]);
    if (fields.size() != 3)
      throw ValidationError("MalformedLine(" + std::to_string(i + 1) +
                            "): expected utt_id<TAB>score<TAB>words");
    Hypothesis h;
    h.acoustic_score = parse_num(fields[1], "acoustic_score", i + 1);
    h.words = tokenize(fields[2]);
    if (out.empty() || out.back().first != fields[0])
      out.emplace_back(fields[0], std::vector<Hypothesis>{});
    out.back().second.push_back(std::move(h));
  }
  return out;
}

std::vector<std::string> read_lexicon(const std::string& path) {
  std::vector<std::string> words;
  for (const auto& line : read_lines(path)) {
    const auto toks = tokenize(line);
    if (toks.empty()) continue;
    if (toks.size() > 1)
      throw ValidationError("lexicon lines must hold one word: '" + line + "'");
    words.push_back(toks[0]);
  }
  if (words.empty()) throw ValidationError("lexicon is empty: " + path);
  return words;
}

std::vector<std::vector<std::string>> read_sentences(const std::string& path) {
  std::vector<std::vector<std::string>> out;
  for (const auto& line : read_lines(path)) {
    auto toks = tokenize(line);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

std::vector<std::vector<double>> parse_posterior_matrix(const std::string& content) {
  std::vector<std::vector<double>> out;
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_tabs(lines[i]);
    std::vector<double> row(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j)
      row[j] = parse_num(fields[j], "posterior", i + 1);
    out.push_back(std::move(row));
  }
  if (out.empty()) throw ValidationError("posterior matrix is empty");
  return out;
}

std::vector<TrainSample> parse_dataset(const std::string& content) {
  std::vector<TrainSample> samples;
  const auto lines = split_lines(content);
  std::size_t dim = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_tabs(lines[i]);
    if (fields.size() < 5)
      throw ValidationError("MalformedLine(" + std::to_string(i + 1) +
                            "): need features, label and three scores");
    if (dim == 0) dim = fields.size() - 4;
    if (fields.size() != dim + 4)
      throw ValidationError("MalformedLine(" + std::to_string(i + 1) +
                            "): inconsistent column count");
    TrainSample s;
    s.features.resize(dim);
    for (std::size_t j = 0; j < dim; ++j)
      s.features[j] = parse_num(fields[j], "feature", i + 1);
    const double label = parse_num(fields[dim], "label", i + 1);
    if (label < 0 || label != std::floor(label))
      throw ValidationError("MalformedLine(" + std::to_string(i + 1) +
                            "): label must be a nonnegative integer");
    s.label = static_cast<std::size_t>(label);
    s.scores.s_perceptual = parse_num(fields[dim + 1], "s_perc", i + 1);
    s.scores.s_sim = parse_num(fields[dim + 2], "s_sim", i + 1);
    s.scores.s_wer = parse_num(fields[dim + 3], "s_wer", i + 1);
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw ValidationError("EmptyCorpus: dataset has no rows");
  return samples;
}

std::string format_dataset(const std::vector<TrainSample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    for (const double f : s.features) {
      out += fmt_g(f);
      out += '\t';
    }
    out += std::to_string(s.label);
    out += '\t';
    out += fmt_g(s.scores.s_perceptual);
    out += '\t';
    out += fmt_g(s.scores.s_sim);
    out += '\t';
    out += fmt_g(s.scores.s_wer);
    out += '\n';
  }
  return out;
}

std::string format_train_log(const std::vector<EpochLog>& log) {
  std::string out;
  for (const auto& e : log) {
    out += std::to_string(e.epoch);
    out += '\t';
    out += fmt6(e.loss);
    out += '\t';
    out += fmt6(e.lambda);
    out += '\t';
    out += fmt6(e.alpha);
    out += '\t';
    out += fmt6(e.beta);
    out += '\t';
    out += fmt6(e.gamma);
    out += '\t';
    out += fmt6(e.lr);
    out += '\n';
  }
  return out;
}

}  // namespace speechgrade
