#pragma once

#include <span>
#include <string>
#include <vector>

#include "glinkx/mlap.hpp"

namespace glinkx {

struct SummaryRow {
  std::string method;
  std::size_t count = 0;
  double mean = 0;
  double std = 0;  // sample standard deviation; 0 for a single run
};

std::string run_line(const RunRecord& r);
std::string summary_line(const SummaryRow& s);

std::vector<SummaryRow> summarize(std::span<const RunRecord> runs);

// Parses JSON lines, keeps the "run" records, drops any existing
// "summary" lines and appends fresh ones, so report(report(x)) == report(x).
std::string report(const std::string& jsonl);
std::vector<RunRecord> parse_runs(const std::string& jsonl);

// Human-readable table: method, runs, accuracy mean +- std in percent.
std::string summary_table(std::span<const SummaryRow> rows);

}  // namespace glinkx
