#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "augmentarium/runner.hpp"

namespace augmentarium::runner {

namespace {

std::string fixed(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string general(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

stats::Outcome parse_outcome(const std::string& s) {
  if (s == "win") return stats::Outcome::Win;
  if (s == "loss") return stats::Outcome::Loss;
  return stats::Outcome::Tie;
}

}  // namespace

std::string format_rate(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g%%", rate * 100.0);
  return buf;
}

std::string summary_csv(std::span<const ExperimentReport> reports) {
  std::ostringstream out;
  out << "dataset,method,aug_rate,mean,std,p,outcome,heatmap_value\n";
  for (const auto& r : reports) {
    out << csv_field(r.dataset) << ',' << csv_field(r.method) << ',' << format_rate(r.aug_rate) << ','
        << fixed(r.method_mean) << ',' << fixed(r.method_std) << ',' << general(r.verdict.p_value) << ','
        << stats::to_string(r.verdict.outcome) << ',' << fixed(r.heatmap) << '\n';
  }
  return out.str();
}

std::string tally_csv(std::span<const ExperimentReport> reports) {
  // First-appearance order of (method, rate) rows.
  std::vector<std::pair<std::string, std::string>> keys;
  std::map<std::pair<std::string, std::string>, std::vector<stats::Verdict>> groups;
  for (const auto& r : reports) {
    auto key = std::make_pair(r.method, format_rate(r.aug_rate));
    if (!groups.contains(key)) keys.push_back(key);
    groups[key].push_back(r.verdict);
  }
  std::ostringstream out;
  out << "Method,Aug Rate,Wins,Losses\n";
  for (const auto& key : keys) {
    const auto t = stats::tally(groups[key]);
    out << csv_field(key.first) << ',' << key.second << ',' << t.wins << ',' << t.losses << '\n';
  }
  return out.str();
}

std::string heatmap_csv(std::span<const ExperimentReport> reports) {
  std::vector<std::string> datasets;
  std::vector<std::string> rows;
  std::map<std::pair<std::string, std::string>, double> cells;
  for (const auto& r : reports) {
    const std::string row = r.method + " " + format_rate(r.aug_rate);
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
    if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
    cells[{row, r.dataset}] = r.heatmap;
  }
  std::ostringstream out;
  out << "pair";
  for (const auto& d : datasets) out << ',' << csv_field(d);
  out << '\n';
  for (const auto& row : rows) {
    out << csv_field(row);
    for (const auto& d : datasets) {
      out << ',';
      if (auto it = cells.find({row, d}); it != cells.end()) out << fixed(it->second);
    }
    out << '\n';
  }
  return out.str();
}

std::string runs_csv(std::span<const ExperimentReport> reports) {
  std::ostringstream out;
  out << "dataset,method,aug_rate,repetition,baseline_accuracy,method_accuracy\n";
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.method_accuracies.size(); ++i) {
      out << csv_field(r.dataset) << ',' << csv_field(r.method) << ',' << format_rate(r.aug_rate) << ','
          << i << ',' << fixed(r.baseline_accuracies[i], 9) << ',' << fixed(r.method_accuracies[i], 9) << '\n';
    }
  }
  return out.str();
}

void write_reports(const std::filesystem::path& dir, std::span<const ExperimentReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::InvalidArgument, "no reports to write");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "summary.csv", summary_csv(reports));
  write_file(dir / "tally.csv", tally_csv(reports));
  write_file(dir / "heatmap.csv", heatmap_csv(reports));
  write_file(dir / "runs.csv", runs_csv(reports));
}

void save_report_json(const std::filesystem::path& path, const ExperimentReport& r) {
  nlohmann::json j = {
      {"dataset", r.dataset},
      {"method", r.method},
      {"strategy", r.strategy},
      {"augmentation", r.augmentation},
      {"aug_rate", r.aug_rate},
      {"baseline_accuracies", r.baseline_accuracies},
      {"method_accuracies", r.method_accuracies},
      {"baseline_mean", r.baseline_mean},
      {"baseline_std", r.baseline_std},
      {"method_mean", r.method_mean},
      {"method_std", r.method_std},
      {"p_value", r.verdict.p_value},
      {"mean_diff", r.verdict.mean_diff},
      {"outcome", stats::to_string(r.verdict.outcome)},
      {"heatmap_value", r.heatmap},
      {"timings_s",
       {{"prepare", r.timings.prepare},
        {"augment", r.timings.augment},
        {"filter", r.timings.filter},
        {"train_baseline", r.timings.train_baseline},
        {"train_method", r.timings.train_method}}},
  };
  write_file(path, j.dump(2) + "\n");
}

ExperimentReport load_report_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  ExperimentReport r;
  try {
    const auto j = nlohmann::json::parse(in);
    r.dataset = j.at("dataset").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.strategy = j.at("strategy").get<std::string>();
    r.augmentation = j.at("augmentation").get<std::string>();
    r.aug_rate = j.at("aug_rate").get<double>();
    r.baseline_accuracies = j.at("baseline_accuracies").get<std::vector<double>>();
    r.method_accuracies = j.at("method_accuracies").get<std::vector<double>>();
    r.baseline_mean = j.at("baseline_mean").get<double>();
    r.baseline_std = j.at("baseline_std").get<double>();
    r.method_mean = j.at("method_mean").get<double>();
    r.method_std = j.at("method_std").get<double>();
    r.verdict.p_value = j.at("p_value").get<double>();
    r.verdict.mean_diff = j.at("mean_diff").get<double>();
    r.verdict.outcome = parse_outcome(j.at("outcome").get<std::string>());
    r.heatmap = j.at("heatmap_value").get<double>();
    if (j.contains("timings_s")) {
      const auto& t = j.at("timings_s");
      r.timings = {t.value("prepare", 0.0), t.value("augment", 0.0), t.value("filter", 0.0),
                   t.value("train_baseline", 0.0), t.value("train_method", 0.0)};
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  if (r.baseline_accuracies.size() != r.method_accuracies.size()) {
    throw Error(ErrorCode::ParseError, path.string() + ": arms have different repetition counts");
  }
  return r;
}

}  // namespace augmentarium::runner
