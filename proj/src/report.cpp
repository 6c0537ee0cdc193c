#include "glinkx/report.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "glinkx/error.hpp"
#include "json.hpp"

namespace glinkx {

std::string run_line(const RunRecord& r) {
  nlohmann::ordered_json j;
  j["type"] = "run";
  j["method"] = r.method;
  j["seed"] = r.seed;
  j["split"] = r.split;
  j["valid_accuracy"] = r.valid_accuracy;
  j["test_accuracy"] = r.test_accuracy;
  j["stage2_best_epoch"] = r.stage2_best_epoch;
  j["stage3_best_epoch"] = r.stage3_best_epoch;
  j["seconds"] = r.seconds;
  if (r.test_auc >= 0) j["test_auc"] = r.test_auc;
  return j.dump();
}

std::string summary_line(const SummaryRow& s) {
  nlohmann::ordered_json j;
  j["type"] = "summary";
  j["method"] = s.method;
  j["runs"] = s.count;
  j["mean_test_accuracy"] = s.mean;
  j["std_test_accuracy"] = s.std;
  return j.dump();
}

std::vector<SummaryRow> summarize(std::span<const RunRecord> runs) {
  if (runs.empty()) throw InvalidArgument("empty logs: nothing to summarize");
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> acc;
  for (const auto& r : runs) {
    if (!acc.count(r.method)) order.push_back(r.method);
    acc[r.method].push_back(r.test_accuracy);
  }
  std::vector<SummaryRow> out;
  for (const auto& m : order) {
    const auto& v = acc[m];
    SummaryRow s;
    s.method = m;
    s.count = v.size();
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0;
      for (double x : v) ss += (x - s.mean) * (x - s.mean);
      s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    out.push_back(s);
  }
  return out;
}

std::vector<RunRecord> parse_runs(const std::string& jsonl) {
  std::vector<RunRecord> runs;
  std::istringstream in(jsonl);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("report line " + std::to_string(number) + ": " + e.what());
    }
    if (j.value("type", "run") != "run") continue;
    try {
      RunRecord r;
      r.method = j.at("method");
      r.seed = j.value("seed", 0ULL);
      r.split = j.value("split", 0ULL);
      r.valid_accuracy = j.value("valid_accuracy", 0.0);
      r.test_accuracy = j.at("test_accuracy");
      r.stage2_best_epoch = j.value("stage2_best_epoch", -1);
      r.stage3_best_epoch = j.value("stage3_best_epoch", -1);
      r.seconds = j.value("seconds", 0.0);
      r.test_auc = j.value("test_auc", -1.0);
      runs.push_back(r);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("report line " + std::to_string(number) + ": " + e.what());
    }
  }
  return runs;
}

std::string report(const std::string& jsonl) {
  const auto runs = parse_runs(jsonl);
  std::string out;
  for (const auto& r : runs) out += run_line(r) + "\n";
  for (const auto& s : summarize(runs)) out += summary_line(s) + "\n";
  return out;
}

std::string summary_table(std::span<const SummaryRow> rows) {
  std::size_t width = 6;
  for (const auto& r : rows) width = std::max(width, r.method.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-*s  %4s  %s\n", static_cast<int>(width), "method", "runs", "test accuracy (%)");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-*s  %4zu  %6.2f +- %.2f\n", static_cast<int>(width), r.method.c_str(), r.count,
                  100 * r.mean, 100 * r.std);
    out += buf;
  }
  return out;
}

}  // namespace glinkx
