#include "augmentarium/textaug.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "augmentarium/error.hpp"

namespace augmentarium::textaug {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::RD: return "rd";
    case Method::RI: return "ri";
    case Method::RS: return "rs";
    case Method::SR: return "sr";
    case Method::W2V: return "w2v";
    case Method::AEDA: return "aeda";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

void Config::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be in [0, 1]");
  if (!(rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "rate must be positive");
  if (method == Method::AEDA && punctuation_set.empty()) {
    throw Error(ErrorCode::InvalidArgument, "AEDA needs a nonempty punctuation set");
  }
}

// ---------------------------------------------------------------------------

Thesaurus Thesaurus::load(const std::filesystem::path& path) {
  Thesaurus t;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error(ErrorCode::ParseError, path.string() + " line " + std::to_string(i + 1) +
                                             ": expected word<TAB>synonyms");
    }
    std::vector<std::string> synonyms;
    std::stringstream rest(line.substr(tab + 1));
    std::string syn;
    while (std::getline(rest, syn, ',')) {
      if (!syn.empty()) synonyms.push_back(preprocess(syn));
    }
    t.add(preprocess(line.substr(0, tab)), std::move(synonyms));
  }
  return t;
}

void Thesaurus::add(const std::string& word, std::vector<std::string> synonyms) {
  std::erase(synonyms, word);
  if (synonyms.empty()) return;
  auto& slot = entries_[word];
  for (auto& s : synonyms) {
    if (std::find(slot.begin(), slot.end(), s) == slot.end()) slot.push_back(std::move(s));
  }
}

const std::vector<std::string>* Thesaurus::find(const std::string& word) const {
  auto it = entries_.find(word);
  return it == entries_.end() ? nullptr : &it->second;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw Error(ErrorCode::ParseError, path.string() + ": empty lexicon file");
  std::istringstream header(lines[0]);
  std::size_t count = 0;
  std::size_t dim = 0;
  if (!(header >> count >> dim) || dim == 0) {
    throw Error(ErrorCode::ParseError, path.string() + " line 1: expected '<count> <dim>'");
  }
  Lexicon lex;
  std::size_t rows = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::istringstream row(lines[i]);
    std::string word;
    row >> word;
    std::vector<double> vec;
    vec.reserve(dim);
    double x = 0.0;
    while (row >> x) vec.push_back(x);
    if (!row.eof()) {
      throw Error(ErrorCode::ParseError, path.string() + " line " + std::to_string(i + 1) +
                                             ": malformed number");
    }
    if (vec.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch, path.string() + " line " + std::to_string(i + 1) +
                                                    ": expected " + std::to_string(dim) + " values");
    }
    lex.add(preprocess(word), std::move(vec));
    ++rows;
  }
  if (rows != count) {
    throw Error(ErrorCode::ParseError, path.string() + ": header promises " + std::to_string(count) +
                                           " words, found " + std::to_string(rows));
  }
  return lex;
}

void Lexicon::add(const std::string& word, std::vector<double> vec) {
  if (vec.empty()) throw Error(ErrorCode::InvalidArgument, "empty word vector");
  if (dim_ == 0) dim_ = vec.size();
  if (vec.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "word vector for '" + word + "'");
  if (index_.contains(word)) return;
  const double norm = l2_norm(vec);
  for (double x : vec) unit_.push_back(norm > 0.0 ? x / norm : 0.0);
  index_.emplace(word, words_.size());
  words_.push_back(word);
}

std::optional<std::string> Lexicon::nearest(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  const std::size_t q = it->second;
  const double* qv = unit_.data() + q * dim_;
  if (l2_norm({qv, dim_}) == 0.0) return std::nullopt;
  std::optional<std::size_t> best;
  double best_sim = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (i == q) continue;
    const double* v = unit_.data() + i * dim_;
    double sim = 0.0;
    bool nonzero = false;
    for (std::size_t k = 0; k < dim_; ++k) {
      sim += qv[k] * v[k];
      nonzero = nonzero || v[k] != 0.0;
    }
    if (nonzero && sim > best_sim) {
      best_sim = sim;
      best = i;
    }
  }
  if (!best) return std::nullopt;
  return words_[*best];
}

// ---------------------------------------------------------------------------

std::size_t operation_count(double alpha, std::size_t len) {
  if (alpha <= 0.0) return 0;
  const auto n = static_cast<std::size_t>(std::llround(alpha * static_cast<double>(len)));
  return std::max<std::size_t>(1, n);
}

namespace {

void require_nonempty(std::span<const std::string> tokens) {
  if (tokens.empty()) throw Error(ErrorCode::EmptyInput, "token list is empty");
}

/// First `n` entries of a partial Fisher-Yates shuffle of `candidates`.
std::vector<std::size_t> pick_distinct(std::vector<std::size_t> candidates, std::size_t n,
                                       RandomSource& rng) {
  n = std::min(n, candidates.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.index(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(n);
  return candidates;
}

}  // namespace

Tokens random_deletion(std::span<const std::string> tokens, double alpha, RandomSource& rng) {
  require_nonempty(tokens);
  Tokens out;
  for (const auto& t : tokens) {
    if (!(rng.uniform() < alpha)) out.push_back(t);
  }
  if (out.empty()) out.push_back(tokens[rng.index(tokens.size())]);
  return out;
}

Tokens random_insertion(std::span<const std::string> tokens, double alpha,
                        const Thesaurus& thesaurus, RandomSource& rng) {
  require_nonempty(tokens);
  Tokens out(tokens.begin(), tokens.end());
  const std::size_t n = operation_count(alpha, tokens.size());
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::size_t> with_synonyms;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (thesaurus.find(out[i])) with_synonyms.push_back(i);
    }
    std::string inserted;
    if (with_synonyms.empty()) {
      inserted = out[rng.index(out.size())];
    } else {
      const auto& syns = *thesaurus.find(out[with_synonyms[rng.index(with_synonyms.size())]]);
      inserted = syns[rng.index(syns.size())];
    }
    const std::size_t pos = rng.index(out.size() + 1);
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), std::move(inserted));
  }
  return out;
}

Tokens random_swap(std::span<const std::string> tokens, double alpha, RandomSource& rng) {
  require_nonempty(tokens);
  Tokens out(tokens.begin(), tokens.end());
  if (out.size() < 2) return out;
  const std::size_t n = operation_count(alpha, tokens.size());
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = rng.index(out.size() - 1);
    std::swap(out[i], out[i + 1]);
  }
  return out;
}

Tokens synonym_replacement(std::span<const std::string> tokens, double alpha,
                           const Thesaurus& thesaurus, RandomSource& rng) {
  require_nonempty(tokens);
  Tokens out(tokens.begin(), tokens.end());
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (thesaurus.find(out[i])) candidates.push_back(i);
  }
  const auto picked = pick_distinct(std::move(candidates), operation_count(alpha, out.size()), rng);
  for (std::size_t pos : picked) {
    const auto& syns = *thesaurus.find(tokens[pos]);
    out[pos] = syns[rng.index(syns.size())];
  }
  return out;
}

Tokens w2v_replacement(std::span<const std::string> tokens, double alpha, const Lexicon& lexicon,
                       RandomSource& rng) {
  require_nonempty(tokens);
  if (lexicon.empty()) throw Error(ErrorCode::EmptyLexicon, "w2v replacement needs a lexicon");
  Tokens out(tokens.begin(), tokens.end());
  std::vector<std::size_t> candidates;
  std::vector<std::optional<std::string>> neighbours(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    neighbours[i] = lexicon.nearest(out[i]);
    if (neighbours[i]) candidates.push_back(i);
  }
  const auto picked = pick_distinct(std::move(candidates), operation_count(alpha, out.size()), rng);
  for (std::size_t pos : picked) out[pos] = *neighbours[pos];
  return out;
}

Tokens aeda(std::span<const std::string> tokens, std::span<const std::string> punctuation_set,
            RandomSource& rng) {
  require_nonempty(tokens);
  if (punctuation_set.empty()) throw Error(ErrorCode::InvalidArgument, "empty punctuation set");
  Tokens out(tokens.begin(), tokens.end());
  const std::size_t n = rng.between(1, std::max<std::size_t>(1, tokens.size() / 3));
  for (std::size_t k = 0; k < n; ++k) {
    const auto& mark = punctuation_set[rng.index(punctuation_set.size())];
    const std::size_t pos = rng.index(out.size() + 1);
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), mark);
  }
  return out;
}

Tokens augment_tokens(std::span<const std::string> tokens, const Config& cfg, const Resources& res,
                      RandomSource& rng) {
  const auto need_thesaurus = [&]() -> const Thesaurus& {
    if (!res.thesaurus) throw Error(ErrorCode::InvalidArgument, "method needs a thesaurus");
    return *res.thesaurus;
  };
  switch (cfg.method) {
    case Method::RD: return random_deletion(tokens, cfg.alpha, rng);
    case Method::RI: return random_insertion(tokens, cfg.alpha, need_thesaurus(), rng);
    case Method::RS: return random_swap(tokens, cfg.alpha, rng);
    case Method::SR: return synonym_replacement(tokens, cfg.alpha, need_thesaurus(), rng);
    case Method::W2V:
      if (!res.lexicon) throw Error(ErrorCode::EmptyLexicon, "w2v replacement needs a lexicon");
      return w2v_replacement(tokens, cfg.alpha, *res.lexicon, rng);
    case Method::AEDA: return aeda(tokens, cfg.punctuation_set, rng);
  }
  return Tokens(tokens.begin(), tokens.end());
}

std::string augmented_id(std::string_view parent_id, std::string_view method, std::size_t replica) {
  std::string id(parent_id);
  id += '~';
  id += method;
  id += '-';
  id += std::to_string(replica);
  return id;
}

std::vector<Sample> augment_corpus(const Dataset& real, const Config& cfg, const Resources& res) {
  cfg.validate();
  if (real.samples.empty()) return {};
  const auto count = static_cast<std::size_t>(std::llround(cfg.rate * static_cast<double>(real.size())));

  // (parent index, replica index) pairs.
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  jobs.reserve(count);
  {
    Rng pick(derive_seed(cfg.seed, "parents"));
    std::vector<std::size_t> replicas(real.size(), 0);
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t p = pick.index(real.size());
      jobs.emplace_back(p, replicas[p]++);
    }
  }
  std::sort(jobs.begin(), jobs.end(), [&](const auto& a, const auto& b) {
    const auto& ia = real.samples[a.first].id;
    const auto& ib = real.samples[b.first].id;
    return ia != ib ? ia < ib : a.second < b.second;
  });

  const std::string method(to_string(cfg.method));
  std::vector<Sample> out;
  out.reserve(jobs.size());
  for (const auto& [p, replica] : jobs) {
    const Sample& parent = real.samples[p];
    Rng rng(derive_seed(cfg.seed, parent.id, replica));
    const Tokens tokens = tokenize(parent.text);
    std::string text = tokens.empty() ? preprocess(parent.text)
                                      : preprocess(join_tokens(augment_tokens(tokens, cfg, res, rng)));
    out.push_back({augmented_id(parent.id, method, replica), std::move(text), parent.label,
                   Origin::Augmented, method, parent.id});
  }
  return out;
}

std::vector<Sample> import_adapter_output(const std::filesystem::path& path, const Dataset& real) {
  using json = nlohmann::json;
  std::unordered_map<std::string_view, const Sample*> parents;
  for (const auto& s : real.samples) parents.emplace(s.id, &s);

  std::map<std::pair<std::string, std::string>, std::size_t> replicas;
  std::vector<Sample> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = path.string() + " line " + std::to_string(i + 1);
    std::string parent_id;
    std::string method;
    std::string text;
    try {
      const json j = json::parse(lines[i]);
      parent_id = j.at("parent_id").get<std::string>();
      method = j.at("method").get<std::string>();
      text = j.at("text").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, where + ": " + e.what());
    }
    if (method.empty()) throw Error(ErrorCode::ParseError, where + ": empty method");
    auto it = parents.find(parent_id);
    if (it == parents.end() || !it->second->is_real()) {
      throw Error(ErrorCode::UnknownParent, where + ": parent '" + parent_id + "'");
    }
    const std::size_t replica = replicas[{parent_id, method}]++;
    out.push_back({augmented_id(parent_id, method, replica), preprocess(text), it->second->label,
                   Origin::Augmented, method, parent_id});
  }
  return out;
}

}  // namespace augmentarium::textaug
