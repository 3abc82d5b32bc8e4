#include "speechgrade/ngramlm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "speechgrade/textmetrics.hpp"

namespace speechgrade {

namespace {

std::string fmt7(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.7g", v);
  return buf;
}

double parse_double(const std::string& s, std::size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty())
    throw ValidationError("MalformedArpa(" + std::to_string(line_no) +
                          "): bad numeric field '" + s + "'");
  return v;
}

std::vector<std::string> split_char(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

void CorrectionConfig::validate() const {
  if (edit_penalty <= 0.0 || lm_weight <= 0.0 || beam_width == 0)
    throw ValidationError("CorrectionConfig: edit_penalty, lm_weight and "
                          "beam_width must be positive");
}

std::uint32_t NGramModel::intern(const std::string& token) {
  const auto it = token_to_id_.find(token);
  if (it != token_to_id_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(id_to_token_.size());
  id_to_token_.push_back(token);
  token_to_id_.emplace(token, id);
  return id;
}

std::uint32_t NGramModel::lookup_or_unk(const std::string& token) const {
  const auto it = token_to_id_.find(token);
  if (it != token_to_id_.end()) return it->second;
  const auto unk = token_to_id_.find(kUnk);
  if (unk == token_to_id_.end())
    throw ValidationError("OOV token '" + token + "' and model has no <unk>");
  return unk->second;
}

NGramModel NGramModel::train(const std::vector<std::vector<std::string>>& sentences,
                             std::size_t order) {
  if (order < 1 || order > kMaxOrder)
    throw ValidationError("BadOrder: order must be in [1, " +
                          std::to_string(kMaxOrder) + "], got " +
                          std::to_string(order));
  bool any_nonempty = false;
  for (const auto& s : sentences)
    if (!s.empty()) any_nonempty = true;
  if (!any_nonempty) throw ValidationError("EmptyCorpus: no non-empty sentences");

  NGramModel m;
  m.order_ = order;
  const std::uint32_t bos = m.intern(kBos);
  const std::uint32_t eos = m.intern(kEos);
  const std::uint32_t unk = m.intern(kUnk);

  // raw k-gram counts over <s> w1..wm </s>
  std::vector<std::unordered_map<Gram, std::uint64_t, GramHash>> raw(order + 1);
  for (const auto& sent : sentences) {
    Gram toks;
    toks.reserve(sent.size() + 2);
    toks.push_back(bos);
    for (const auto& w : sent) toks.push_back(m.intern(w));
    toks.push_back(eos);
    for (std::size_t k = 1; k <= order; ++k) {
      if (toks.size() < k) continue;
      for (std::size_t i = 0; i + k <= toks.size(); ++i)
        ++raw[k][Gram(toks.begin() + i, toks.begin() + i + k)];
    }
  }

  // Adjusted counts: continuation counts below the top order, except
  // <s>-initial grams which have no left extension and keep raw counts.
  // The bare <s> unigram never enters the mass.
  std::vector<std::unordered_map<Gram, std::uint64_t, GramHash>> adj(order + 1);
  if (order == 1) {
    for (const auto& [gram, count] : raw[1])
      if (gram[0] != bos) adj[1][gram] = count;
  } else {
    adj[order] = raw[order];
    for (std::size_t k = order - 1; k >= 1; --k) {
      std::unordered_map<Gram, std::uint64_t, GramHash> cont;
      for (const auto& [gram, count] : raw[k + 1])
        ++cont[Gram(gram.begin() + 1, gram.end())];
      for (const auto& [gram, count] : raw[k]) {
        if (gram.size() == 1 && gram[0] == bos) continue;  // never predicted
        if (gram[0] == bos)
          adj[k][gram] = count;
        else
          adj[k][gram] = cont[gram];
      }
    }
  }

  // Per-order discount from the count-of-counts of the table in use.
  m.discounts_.assign(order + 1, 0.75);
  for (std::size_t k = 1; k <= order; ++k) {
    std::uint64_t n1 = 0, n2 = 0;
    for (const auto& [gram, count] : adj[k]) {
      if (count == 1) ++n1;
      if (count == 2) ++n2;
    }
    m.discounts_[k] = (n1 > 0 && n2 > 0)
                          ? static_cast<double>(n1) /
                                (static_cast<double>(n1) + 2.0 * static_cast<double>(n2))
                          : 0.75;
  }

  m.tables_.resize(order + 1);

  // Unigrams: interpolate with the uniform distribution over the
  // predictable vocabulary so <unk> gets the interpolation floor.
  std::vector<std::uint32_t> vpred;
  for (const auto& [gram, count] : adj[1]) vpred.push_back(gram[0]);
  if (!std::count(vpred.begin(), vpred.end(), unk)) vpred.push_back(unk);
  const double uniform = 1.0 / static_cast<double>(vpred.size());
  double total1 = 0.0;
  for (const auto& [gram, count] : adj[1]) total1 += static_cast<double>(count);
  const double gamma1 =
      m.discounts_[1] * static_cast<double>(adj[1].size()) / total1;
  for (const std::uint32_t w : vpred) {
    const auto it = adj[1].find(Gram{w});
    const double a = it != adj[1].end() ? static_cast<double>(it->second) : 0.0;
    const double p = std::max(a - m.discounts_[1], 0.0) / total1 + gamma1 * uniform;
    m.tables_[1][Gram{w}] = {std::log10(p), 0.0};
  }
  m.tables_[1][Gram{bos}] = {-99.0, 0.0};  // context-only token

  // Higher orders, bottom-up; backoff weight of a context equals its
  // interpolation weight, which keeps every conditional normalized.
  for (std::size_t k = 2; k <= order; ++k) {
    std::unordered_map<Gram, double, GramHash> ctx_sum;
    std::unordered_map<Gram, std::uint64_t, GramHash> ctx_types;
    for (const auto& [gram, count] : adj[k]) {
      const Gram h(gram.begin(), gram.end() - 1);
      ctx_sum[h] += static_cast<double>(count);
      ++ctx_types[h];
    }
    const double d = m.discounts_[k];
    for (const auto& [h, sum] : ctx_sum) {
      const double gamma = d * static_cast<double>(ctx_types[h]) / sum;
      const auto it = m.tables_[k - 1].find(h);
      if (it == m.tables_[k - 1].end())
        throw NumericError("internal: context missing at order " +
                           std::to_string(k - 1));
      it->second.log10_backoff = std::log10(gamma);
    }
    for (const auto& [gram, count] : adj[k]) {
      const Gram h(gram.begin(), gram.end() - 1);
      const Gram suffix(gram.begin() + 1, gram.end() - 1);
      const double sum = ctx_sum[h];
      const double gamma = d * static_cast<double>(ctx_types[h]) / sum;
      const double lower =
          std::pow(10.0, m.conditional_log10_ids(suffix, gram.back()));
      const double p =
          std::max(static_cast<double>(count) - d, 0.0) / sum + gamma * lower;
      m.tables_[k][gram] = {std::log10(p), 0.0};
    }
  }
  return m;
}

std::vector<std::string> NGramModel::predictable_vocab() const {
  std::vector<std::string> v;
  for (const auto& [gram, entry] : tables_[1])
    if (id_to_token_[gram[0]] != kBos) v.push_back(id_to_token_[gram[0]]);
  std::sort(v.begin(), v.end());
  return v;
}

double NGramModel::conditional_log10_ids(const Gram& context,
                                         std::uint32_t word) const {
  const std::size_t max_ctx = order_ - 1;
  std::size_t len = std::min(context.size(), max_ctx);
  double acc = 0.0;
  for (;; --len) {
    Gram g(context.end() - static_cast<std::ptrdiff_t>(len), context.end());
    g.push_back(word);
    const auto it = tables_[len + 1].find(g);
    if (it != tables_[len + 1].end()) return acc + it->second.log10_prob;
    if (len == 0) break;
    const Gram h(context.end() - static_cast<std::ptrdiff_t>(len), context.end());
    const auto hit = tables_[len].find(h);
    if (hit != tables_[len].end()) acc += hit->second.log10_backoff;
  }
  throw ValidationError("token '" + id_to_token_[word] +
                        "' not scorable and model has no <unk>");
}

double NGramModel::conditional_log10(const std::vector<std::string>& context,
                                     const std::string& word) const {
  if (order_ == 0) throw ValidationError("model is untrained");
  Gram ctx;
  ctx.reserve(context.size());
  for (const auto& t : context) ctx.push_back(lookup_or_unk(t));
  return conditional_log10_ids(ctx, lookup_or_unk(word));
}

double NGramModel::logprob(const std::vector<std::string>& words) const {
  if (order_ == 0) throw ValidationError("model is untrained");
  const std::uint32_t bos = token_to_id_.at(kBos);
  const std::uint32_t eos = token_to_id_.at(kEos);
  Gram ctx{bos};
  double total = 0.0;
  for (const auto& w : words) {
    const std::uint32_t id = lookup_or_unk(w);
    total += conditional_log10_ids(ctx, id);
    ctx.push_back(id);
  }
  total += conditional_log10_ids(ctx, eos);
  return total;
}

double NGramModel::perplexity(
    const std::vector<std::vector<std::string>>& sentences) const {
  if (sentences.empty()) throw ValidationError("EmptyCorpus: nothing to evaluate");
  double total = 0.0;
  std::size_t predicted = 0;
  for (const auto& s : sentences) {
    total += logprob(s);
    predicted += s.size() + 1;  // terminal </s> is predicted too
  }
  return std::pow(10.0, -total / static_cast<double>(predicted));
}

std::string NGramModel::to_arpa() const {
  if (order_ == 0) throw ValidationError("model is untrained");
  std::string out = "\\data\\\n";
  for (std::size_t k = 1; k <= order_; ++k)
    out += "ngram " + std::to_string(k) + "=" + std::to_string(tables_[k].size()) +
           "\n";
  for (std::size_t k = 1; k <= order_; ++k) {
    out += "\n\\" + std::to_string(k) + "-grams:\n";
    std::vector<std::pair<std::string, const Entry*>> rows;
    rows.reserve(tables_[k].size());
    for (const auto& [gram, entry] : tables_[k]) {
      std::string joined;
      for (std::size_t i = 0; i < gram.size(); ++i) {
        if (i) joined += ' ';
        joined += id_to_token_[gram[i]];
      }
      rows.emplace_back(std::move(joined), &entry);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [tokens, entry] : rows) {
      out += fmt7(entry->log10_prob);
      out += '\t';
      out += tokens;
      if (k < order_) {
        out += '\t';
        out += fmt7(entry->log10_backoff);
      }
      out += '\n';
    }
  }
  out += "\n\\end\\\n";
  return out;
}

void NGramModel::dump_arpa(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write ARPA file: " + path);
  out << to_arpa();
}

NGramModel NGramModel::from_arpa_text(const std::string& text) {
  const auto lines = split_char(text, '\n');
  std::size_t i = 0;
  auto line_no = [&i]() { return i + 1; };

  while (i < lines.size() && lines[i].empty()) ++i;
  if (i >= lines.size() || lines[i] != "\\data\\")
    throw ValidationError("MalformedArpa(" + std::to_string(line_no()) +
                          "): expected \\data\\");
  ++i;

  std::vector<std::size_t> declared;  // declared[k] = count
  while (i < lines.size() && !lines[i].empty()) {
    const auto& l = lines[i];
    if (l.rfind("ngram ", 0) != 0)
      throw ValidationError("MalformedArpa(" + std::to_string(line_no()) +
                            "): expected 'ngram k=count'");
    const std::size_t eq = l.find('=');
    if (eq == std::string::npos)
      throw ValidationError("MalformedArpa(" + std::to_string(line_no()) +
                            "): expected 'ngram k=count'");
    const std::size_t k = static_cast<std::size_t>(
        parse_double(l.substr(6, eq - 6), line_no()));
    const std::size_t count =
        static_cast<std::size_t>(parse_double(l.substr(eq + 1), line_no()));
    if (k != declared.size() + 1)
      throw ValidationError("MissingSection(" + std::to_string(declared.size() + 1) +
                            "): ngram orders must be contiguous from 1");
    declared.push_back(count);
    ++i;
  }
  const std::size_t order = declared.size();
  if (order < 1 || order > kMaxOrder)
    throw ValidationError("BadOrder: ARPA declares " + std::to_string(order) +
                          " orders");

  NGramModel m;
  m.order_ = order;
  m.tables_.resize(order + 1);
  m.discounts_.assign(order + 1, 0.0);

  for (std::size_t k = 1; k <= order; ++k) {
    while (i < lines.size() && lines[i].empty()) ++i;
    const std::string header = "\\" + std::to_string(k) + "-grams:";
    if (i >= lines.size() || lines[i] != header)
      throw ValidationError("MissingSection(" + std::to_string(k) + ")");
    ++i;
    std::size_t read = 0;
    while (i < lines.size() && !lines[i].empty()) {
      const auto fields = split_char(lines[i], '\t');
      if (fields.size() < 2 || fields.size() > 3 ||
          (k == order && fields.size() == 3))
        throw ValidationError("MalformedArpa(" + std::to_string(line_no()) +
                              "): expected logprob<TAB>tokens" +
                              (k < order ? "<TAB>backoff" : ""));
      Entry entry;
      entry.log10_prob = parse_double(fields[0], line_no());
      if (fields.size() == 3) entry.log10_backoff = parse_double(fields[2], line_no());
      const auto tokens = tokenize(fields[1]);
      if (tokens.size() != k)
        throw ValidationError("MalformedArpa(" + std::to_string(line_no()) +
                              "): expected " + std::to_string(k) + " tokens");
      Gram gram;
      gram.reserve(k);
      for (const auto& t : tokens) {
        if (k == 1) {
          gram.push_back(m.intern(t));
        } else {
          const auto it = m.token_to_id_.find(t);
          if (it == m.token_to_id_.end())
            throw ValidationError("MalformedArpa(" + std::to_string(line_no()) +
                                  "): token '" + t + "' not in unigram section");
          gram.push_back(it->second);
        }
      }
      if (!m.tables_[k].emplace(std::move(gram), entry).second)
        throw ValidationError("MalformedArpa(" + std::to_string(line_no()) +
                              "): duplicate " + std::to_string(k) + "-gram");
      ++read;
      ++i;
    }
    if (read != declared[k - 1])
      throw ValidationError("MalformedArpa(" + std::to_string(line_no()) +
                            "): section " + std::to_string(k) + " declares " +
                            std::to_string(declared[k - 1]) + " entries, found " +
                            std::to_string(read));
  }

  while (i < lines.size() && lines[i].empty()) ++i;
  if (i >= lines.size() || lines[i] != "\\end\\")
    throw ValidationError("MalformedArpa(" + std::to_string(line_no()) +
                          "): expected \\end\\");
  ++i;
  for (; i < lines.size(); ++i)
    if (!lines[i].empty())
      throw ValidationError("MalformedArpa(" + std::to_string(line_no()) +
                            "): content after \\end\\");
  if (!m.token_to_id_.count(kBos) || !m.token_to_id_.count(kEos))
    throw ValidationError("MalformedArpa: unigram section must contain <s> and </s>");
  return m;
}

NGramModel NGramModel::load_arpa(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open ARPA file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_arpa_text(ss.str());
}

std::size_t rescore_nbest(const std::vector<Hypothesis>& hypotheses,
                          const NGramModel& model, double lm_weight,
                          double length_bonus) {
  if (hypotheses.empty()) throw ValidationError("EmptyNBest");
  constexpr double kLn10 = std::numbers::ln10;
  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto& h = hypotheses[i];
    if (h.words.empty())
      throw ValidationError("EmptyHypothesis: n-best entry " + std::to_string(i));
    const double score = h.acoustic_score +
                         lm_weight * kLn10 * model.logprob(h.words) +
                         length_bonus * static_cast<double>(h.words.size());
    if (i == 0 || score > best_score) {
      best = i;
      best_score = score;
    }
  }
  return best;
}

std::vector<std::string> correct_transcript(const std::vector<std::string>& hyp,
                                            const NGramModel& model,
                                            const std::vector<std::string>& lexicon,
                                            const CorrectionConfig& cfg) {
  cfg.validate();
  if (hyp.empty()) throw ValidationError("EmptyHypothesis");
  if (lexicon.empty()) throw ValidationError("lexicon is empty");

  struct State {
    std::vector<std::string> path;
    double score = 0.0;
  };

  std::vector<State> beam{State{}};
  for (std::size_t t = 0; t < hyp.size(); ++t) {
    // candidate -> char edits; the incumbent always costs zero edits
    std::vector<std::pair<std::string, std::size_t>> candidates;
    candidates.emplace_back(hyp[t], 0);
    const std::size_t hyp_cps = decode_utf8(hyp[t]).size();
    for (const auto& w : lexicon) {
      if (w == hyp[t]) continue;
      const std::size_t w_cps = decode_utf8(w).size();
      const std::size_t len_gap = w_cps > hyp_cps ? w_cps - hyp_cps : hyp_cps - w_cps;
      if (len_gap > cfg.max_char_edits) continue;
      const std::size_t d = char_edit_distance(w, hyp[t]);
      if (d <= cfg.max_char_edits) candidates.emplace_back(w, d);
    }
    std::sort(candidates.begin(), candidates.end());

    // expand and merge states that share a scoring context
    std::unordered_map<std::string, State> merged;
    const std::size_t ctx_len = model.order() - 1;
    for (const auto& state : beam) {
      std::vector<std::string> ctx{kBos};
      const std::size_t from =
          state.path.size() > ctx_len ? state.path.size() - ctx_len : 0;
      for (std::size_t j = from; j < state.path.size(); ++j)
        ctx.push_back(state.path[j]);
      for (const auto& [word, edits] : candidates) {
        const double inc = cfg.lm_weight * model.conditional_log10(ctx, word) -
                           cfg.edit_penalty * static_cast<double>(edits);
        State next;
        next.path = state.path;
        next.path.push_back(word);
        next.score = state.score + inc;

        std::string key;
        const std::size_t kf =
            next.path.size() > ctx_len ? next.path.size() - ctx_len : 0;
        for (std::size_t j = kf; j < next.path.size(); ++j) {
          key += next.path[j];
          key += '\x1f';
        }
        auto [it, inserted] = merged.try_emplace(key);
        if (inserted || next.score > it->second.score ||
            (next.score == it->second.score && next.path < it->second.path)) {
          it->second = std::move(next);
        }
      }
    }
    beam.clear();
    for (auto& [key, state] : merged) beam.push_back(std::move(state));
    std::sort(beam.begin(), beam.end(), [](const State& a, const State& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.path < b.path;
    });
    if (beam.size() > cfg.beam_width) beam.resize(cfg.beam_width);
  }
  return beam.front().path;
}

}  // namespace speechgrade
