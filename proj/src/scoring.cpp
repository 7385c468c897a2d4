#include "augmentarium/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include "augmentarium/error.hpp"

namespace augmentarium::scoring {

std::vector<EasinessScore> score(const nnet::MLP& scorer, std::span<const LabeledVector> items) {
  const auto losses = nnet::per_sample_losses(scorer, items);
  std::vector<EasinessScore> out;
  out.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) out.push_back({items[i].id, losses[i]});
  return out;
}

ScoreMap to_map(std::span<const EasinessScore> scores) {
  ScoreMap map;
  map.reserve(scores.size());
  for (const auto& s : scores) {
    if (!map.emplace(s.sample_id, s.loss).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate score for '" + s.sample_id + "'");
    }
  }
  return map;
}

std::size_t ceil_count(double fraction, std::size_t n) {
  const double raw = std::ceil(fraction * static_cast<double>(n) - 1e-9);
  if (raw <= 0.0) return 0;
  return std::min(n, static_cast<std::size_t>(raw));
}

std::vector<std::size_t> lowest_loss_indices(std::span<const double> losses, double q) {
  std::vector<std::size_t> order(losses.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return losses[a] < losses[b]; });
  order.resize(ceil_count(q, losses.size()));
  std::sort(order.begin(), order.end());
  return order;
}

namespace {

template <typename Item, typename IdOf, typename LabelOf>
std::vector<Item> filter_impl(std::span<const Item> aug, const ScoreMap& scores, double q,
                              bool per_class, IdOf id_of, LabelOf label_of) {
  if (!(q > 0.0 && q <= 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile must be in (0, 1]");
  std::vector<double> losses;
  losses.reserve(aug.size());
  for (const auto& item : aug) {
    auto it = scores.find(id_of(item));
    if (it == scores.end()) throw Error(ErrorCode::MissingScore, "no score for '" + id_of(item) + "'");
    losses.push_back(it->second);
  }

  std::vector<std::size_t> keep;
  if (!per_class) {
    keep = lowest_loss_indices(losses, q);
  } else {
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < aug.size(); ++i) groups[label_of(aug[i])].push_back(i);
    for (const auto& [label, members] : groups) {
      std::vector<double> sub;
      for (std::size_t i : members) sub.push_back(losses[i]);
      for (std::size_t k : lowest_loss_indices(sub, q)) keep.push_back(members[k]);
    }
    std::sort(keep.begin(), keep.end());
  }

  std::vector<Item> out;
  out.reserve(keep.size());
  for (std::size_t i : keep) out.push_back(aug[i]);
  return out;
}

}  // namespace

std::vector<LabeledVector> filter_by_loss(std::span<const LabeledVector> aug, const ScoreMap& scores,
                                          double q, bool per_class) {
  return filter_impl(
      aug, scores, q, per_class, [](const LabeledVector& v) -> const std::string& { return v.id; },
      [](const LabeledVector& v) { return v.label(); });
}

std::vector<Sample> filter_by_loss(std::span<const Sample> aug, const ScoreMap& scores, double q,
                                   bool per_class) {
  return filter_impl(
      aug, scores, q, per_class, [](const Sample& s) -> const std::string& { return s.id; },
      [](const Sample& s) { return s.label; });
}

void save_scores(const std::filesystem::path& path, std::span<const EasinessScore> scores) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "sample_id,loss\n";
  char buf[64];
  for (const auto& s : scores) {
    if (s.sample_id.find_first_of(",\n\"") != std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "sample id '" + s.sample_id + "' cannot be written to CSV");
    }
    std::snprintf(buf, sizeof buf, "%.17g", s.loss);
    out << s.sample_id << ',' << buf << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<EasinessScore> load_scores(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  std::vector<EasinessScore> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.empty()) continue;
    if (i == 0 && line.rfind("sample_id", 0) == 0) continue;
    const auto comma = line.rfind(',');
    const std::string where = path.string() + " line " + std::to_string(i + 1);
    if (comma == std::string::npos || comma == 0) throw Error(ErrorCode::ParseError, where + ": expected id,loss");
    double loss = 0.0;
    const char* first = line.data() + comma + 1;
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, loss);
    if (ec != std::errc() || ptr != last || !std::isfinite(loss) || loss < 0.0) {
      throw Error(ErrorCode::ParseError, where + ": bad loss value");
    }
    out.push_back({line.substr(0, comma), loss});
  }
  return out;
}

}  // namespace augmentarium::scoring
