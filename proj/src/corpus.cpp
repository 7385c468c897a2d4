#include "augmentarium/corpus.hpp"

#include <algorithm>
#include <clocale>
#include <cmath>
#include <cwctype>
#include <fstream>
#include <locale.h>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "augmentarium/error.hpp"
#include "augmentarium/random.hpp"

namespace augmentarium {

using json = nlohmann::json;

std::string_view to_string(Origin origin) {
  return origin == Origin::Real ? "real" : "augmented";
}

namespace {

Origin parse_origin(std::string_view s, std::size_t line) {
  if (s == "real") return Origin::Real;
  if (s == "augmented") return Origin::Augmented;
  throw Error(ErrorCode::ParseError,
              "line " + std::to_string(line) + ": unknown origin '" + std::string(s) + "'");
}

// Process-wide UTF-8 ctype locale used for case mapping; null when the
// platform has none, in which case only ASCII is folded.
locale_t utf8_ctype() {
  static const locale_t loc = [] {
    locale_t l = newlocale(LC_CTYPE_MASK, "C.UTF-8", static_cast<locale_t>(nullptr));
    if (l == nullptr) l = newlocale(LC_CTYPE_MASK, "C.utf8", static_cast<locale_t>(nullptr));
    return l;
  }();
  return loc;
}

char32_t to_lower(char32_t c) {
  if (c < 0x80) return (c >= 'A' && c <= 'Z') ? c + 32 : c;
  if (locale_t loc = utf8_ctype()) {
    return static_cast<char32_t>(towlower_l(static_cast<wint_t>(c), loc));
  }
  return c;
}

}  // namespace

void Dataset::validate() const {
  if (num_classes <= 0) {
    throw Error(ErrorCode::InvalidArgument, "num_classes must be positive");
  }
  std::unordered_map<std::string_view, const Sample*> by_id;
  by_id.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.label < 0 || s.label >= num_classes) {
      throw Error(ErrorCode::InvalidArgument,
                  "sample '" + s.id + "' has label " + std::to_string(s.label) + " outside [0, " +
                      std::to_string(num_classes) + ")");
    }
    if (!by_id.emplace(s.id, &s).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate sample id '" + s.id + "'");
    }
    const bool real = s.origin == Origin::Real;
    if (real != s.method.empty() || real != s.parent_id.empty()) {
      throw Error(ErrorCode::InvalidArgument,
                  "sample '" + s.id + "': origin, method and parent_id disagree");
    }
  }
  for (const auto& s : samples) {
    if (s.is_real()) continue;
    auto it = by_id.find(s.parent_id);
    if (it == by_id.end()) continue;  // parent may live in another file
    if (!it->second->is_real() || it->second->label != s.label) {
      throw Error(ErrorCode::InvalidArgument,
                  "sample '" + s.id + "': parent must be a real sample with the same label");
    }
  }
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(num_classes, 0)), 0);
  for (const auto& s : samples) ++counts.at(static_cast<std::size_t>(s.label));
  return counts;
}

double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

SoftLabel SoftLabel::one_hot(int label, int num_classes) {
  if (label < 0 || label >= num_classes) {
    throw Error(ErrorCode::InvalidArgument, "label out of range");
  }
  SoftLabel y;
  y.probs.assign(static_cast<std::size_t>(num_classes), 0.0);
  y.probs[static_cast<std::size_t>(label)] = 1.0;
  return y;
}

int SoftLabel::argmax() const {
  if (probs.empty()) return 0;
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

// ---------------------------------------------------------------------------

std::u32string utf8_decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  while (i < s.size()) {
    const unsigned char b0 = byte(i);
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2, cp = b0 & 0x1F, min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3, cp = b0 & 0x0F, min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4, cp = b0 & 0x07, min = 0x10000;
    } else {
      out.push_back(U'\uFFFD');
      ++i;
      continue;
    }
    bool ok = i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const unsigned char b = byte(i + k);
      if ((b & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    if (!ok || cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(U'\uFFFD');
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string utf8_encode(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

bool is_unicode_space(char32_t c) {
  // White_Space property.
  switch (c) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

std::string preprocess(std::string_view text) {
  std::u32string chars = utf8_decode(text);
  for (auto& c : chars) c = to_lower(c);
  if (chars.size() > kMaxChars) chars.resize(kMaxChars);
  return utf8_encode(chars);
}

std::vector<std::string> tokenize(std::string_view text) {
  const std::u32string chars = utf8_decode(preprocess(text));
  std::vector<std::string> tokens;
  std::u32string current;
  for (char32_t c : chars) {
    if (is_unicode_space(c)) {
      if (!current.empty()) tokens.push_back(utf8_encode(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(utf8_encode(current));
  return tokens;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> largest_remainder_quotas(std::span<const std::size_t> counts,
                                                  std::size_t total) {
  const std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  std::vector<std::size_t> quotas(counts.size(), 0);
  if (n == 0) return quotas;
  std::vector<std::size_t> remainders(counts.size());
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const unsigned long long scaled = static_cast<unsigned long long>(total) * counts[c];
    quotas[c] = static_cast<std::size_t>(scaled / n);
    remainders[c] = static_cast<std::size_t>(scaled % n);
    assigned += quotas[c];
  }
  std::vector<std::size_t> order(counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++quotas[order[k % order.size()]];
  return quotas;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, std::size_t train_n,
                                             std::size_t test_n, std::uint64_t seed) {
  if (train_n + test_n > ds.size()) {
    throw Error(ErrorCode::InvalidSizes, "requested " + std::to_string(train_n) + " + " +
                                             std::to_string(test_n) + " samples from a dataset of " +
                                             std::to_string(ds.size()));
  }
  const auto counts = ds.class_counts();
  const auto train_q = largest_remainder_quotas(counts, train_n);
  const auto test_q = largest_remainder_quotas(counts, test_n);

  std::vector<std::vector<std::size_t>> members(counts.size());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    members[static_cast<std::size_t>(ds.samples[i].label)].push_back(i);
  }

  // 0 = unused, 1 = train, 2 = test
  std::vector<unsigned char> assignment(ds.size(), 0);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (train_q[c] + test_q[c] > counts[c]) {
      throw Error(ErrorCode::InsufficientSamples,
                  "class " + std::to_string(c) + " has " + std::to_string(counts[c]) +
                      " samples but needs " + std::to_string(train_q[c] + test_q[c]));
    }
    Rng rng(derive_seed(seed, "stratified_split", c));
    auto& idx = members[c];
    std::shuffle(idx.begin(), idx.end(), rng.engine());
    for (std::size_t k = 0; k < train_q[c]; ++k) assignment[idx[k]] = 1;
    for (std::size_t k = train_q[c]; k < train_q[c] + test_q[c]; ++k) assignment[idx[k]] = 2;
  }

  Dataset train{ds.name + ".train", ds.num_classes, {}};
  Dataset test{ds.name + ".test", ds.num_classes, {}};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (assignment[i] == 1) train.samples.push_back(ds.samples[i]);
    if (assignment[i] == 2) test.samples.push_back(ds.samples[i]);
  }
  return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------

FeatureVector featurize(std::string_view text, const FeaturizerConfig& cfg) {
  if (cfg.dim < 2) throw Error(ErrorCode::InvalidArgument, "featurizer dim must be >= 2");
  FeatureVector v(cfg.dim);
  for (const auto& token : tokenize(text)) {
    const std::uint64_t h = mix64(stable_hash(token) ^ cfg.salt);
    const std::size_t bucket = static_cast<std::size_t>(h % cfg.dim);
    const double sign = (mix64(h) >> 63) ? -1.0 : 1.0;
    v.values[bucket] += sign;
  }
  const double norm = l2_norm(v.values);
  if (norm > 0.0) {
    for (auto& x : v.values) x /= norm;
  }
  return v;
}

std::vector<LabeledVector> featurize_dataset(const Dataset& ds, const FeaturizerConfig& cfg) {
  std::vector<LabeledVector> out;
  out.reserve(ds.size());
  for (const auto& s : ds.samples) {
    out.push_back({s.id, featurize(s.text, cfg), SoftLabel::one_hot(s.label, ds.num_classes),
                   s.origin, s.parent_id, s.method});
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

namespace {

json parse_line(const std::string& line, std::size_t lineno) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected an object");
    }
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": " + e.what());
  }
}

template <typename T>
T required(const json& j, const char* key, std::size_t lineno) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(lineno) + ": missing field '" + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(lineno) + ": field '" + key + "' has the wrong type");
  }
}

std::string optional_string(const json& j, const char* key, std::size_t lineno) {
  if (!j.contains(key) || j.at(key).is_null()) return {};
  return required<std::string>(j, key, lineno);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path, std::optional<int> num_classes) {
  Dataset ds;
  ds.name = path.stem().string();
  const auto lines = read_lines(path);
  int max_label = -1;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t lineno = i + 1;
    const json j = parse_line(lines[i], lineno);
    Sample s;
    s.id = required<std::string>(j, "id", lineno);
    s.text = required<std::string>(j, "text", lineno);
    s.label = required<int>(j, "label", lineno);
    if (s.label < 0) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": negative label");
    }
    if (j.contains("origin")) s.origin = parse_origin(required<std::string>(j, "origin", lineno), lineno);
    s.method = optional_string(j, "method", lineno);
    s.parent_id = optional_string(j, "parent_id", lineno);
    if (!j.contains("origin") && !s.parent_id.empty()) s.origin = Origin::Augmented;
    max_label = std::max(max_label, s.label);
    ds.samples.push_back(std::move(s));
  }
  ds.num_classes = num_classes.value_or(std::max(max_label + 1, 1));
  ds.validate();
  return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  auto out = open_out(path);
  for (const auto& s : ds.samples) {
    json j = {{"id", s.id}, {"text", s.text}, {"label", s.label}, {"origin", to_string(s.origin)}};
    if (!s.is_real()) {
      j["method"] = s.method;
      j["parent_id"] = s.parent_id;
    }
    out << j.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

VectorTable import_vectors(const std::filesystem::path& path) {
  VectorTable table;
  std::size_t dim = 0;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t lineno = i + 1;
    const json j = parse_line(lines[i], lineno);
    auto id = required<std::string>(j, "id", lineno);
    auto values = required<std::vector<double>>(j, "vec", lineno);
    if (values.empty()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": empty vector");
    }
    if (!all_finite(values)) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": non-finite entry");
    }
    if (dim == 0) dim = values.size();
    if (values.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "line " + std::to_string(lineno) + ": dim " +
                                                    std::to_string(values.size()) + " != " +
                                                    std::to_string(dim));
    }
    if (!table.emplace(id, FeatureVector(std::move(values))).second) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": duplicate id '" + id + "'");
    }
  }
  return table;
}

VectorTable import_vectors(const std::filesystem::path& path, const Dataset& ds) {
  VectorTable table = import_vectors(path);
  std::unordered_set<std::string_view> ids;
  for (const auto& s : ds.samples) ids.insert(s.id);
  for (const auto& [id, v] : table) {
    if (!ids.contains(id)) throw Error(ErrorCode::UnknownId, "vector for unknown sample '" + id + "'");
  }
  return table;
}

std::vector<LabeledVector> attach_vectors(const Dataset& ds, const VectorTable& table) {
  std::vector<LabeledVector> out;
  out.reserve(ds.size());
  for (const auto& s : ds.samples) {
    auto it = table.find(s.id);
    if (it == table.end()) throw Error(ErrorCode::MissingVector, "no vector for sample '" + s.id + "'");
    out.push_back({s.id, it->second, SoftLabel::one_hot(s.label, ds.num_classes), s.origin,
                   s.parent_id, s.method});
  }
  return out;
}

void save_vectors(const std::filesystem::path& path, std::span<const LabeledVector> items,
                  bool with_labels) {
  auto out = open_out(path);
  for (const auto& item : items) {
    json j = {{"id", item.id}, {"vec", item.x.values}};
    if (with_labels) {
      j["label"] = item.label();
      j["probs"] = item.y.probs;
      j["origin"] = to_string(item.origin);
      if (!item.is_real()) {
        j["method"] = item.method;
        j["parent_id"] = item.parent_id;
      }
    }
    out << j.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<LabeledVector> load_labeled_vectors(const std::filesystem::path& path,
                                                std::optional<int> num_classes) {
  struct Raw {
    LabeledVector item;
    std::optional<int> label;
    std::size_t lineno;
  };
  std::vector<Raw> raw;
  std::size_t dim = 0;
  int inferred = 0;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t lineno = i + 1;
    const json j = parse_line(lines[i], lineno);
    Raw r{LabeledVector{}, std::nullopt, lineno};
    r.item.id = required<std::string>(j, "id", lineno);
    r.item.x = FeatureVector(required<std::vector<double>>(j, "vec", lineno));
    if (dim == 0) dim = r.item.x.dim();
    if (r.item.x.dim() != dim || dim == 0) {
      throw Error(ErrorCode::DimensionMismatch, "line " + std::to_string(lineno));
    }
    if (!all_finite(r.item.x.values)) throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": non-finite value");
    if (j.contains("probs")) {
      r.item.y.probs = required<std::vector<double>>(j, "probs", lineno);
      inferred = std::max(inferred, static_cast<int>(r.item.y.probs.size()));
    } else {
      r.label = required<int>(j, "label", lineno);
      if (*r.label < 0) throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(lineno) + ": negative label");
      inferred = std::max(inferred, *r.label + 1);
    }
    if (j.contains("origin")) r.item.origin = parse_origin(required<std::string>(j, "origin", lineno), lineno);
    r.item.method = optional_string(j, "method", lineno);
    r.item.parent_id = optional_string(j, "parent_id", lineno);
    raw.push_back(std::move(r));
  }
  const int classes = num_classes.value_or(inferred);
  std::vector<LabeledVector> out;
  out.reserve(raw.size());
  for (auto& r : raw) {
    if (r.label) {
      if (*r.label >= classes) {
        throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(r.lineno) + ": label out of range");
      }
      r.item.y = SoftLabel::one_hot(*r.label, classes);
    } else if (r.item.y.probs.size() != static_cast<std::size_t>(classes)) {
      throw Error(ErrorCode::DimensionMismatch,
                  "line " + std::to_string(r.lineno) + ": probs length != num_classes");
    }
    out.push_back(std::move(r.item));
  }
  return out;
}

}  // namespace augmentarium
