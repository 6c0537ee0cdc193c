#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "glinkx/baselines.hpp"
#include "glinkx/kge.hpp"
#include "glinkx/mlap.hpp"

namespace glinkx {

struct RunConfig {
  std::string profile = "paper-defaults";
  PeSource pe = PeSource::adjacency;
  PipelineConfig pipeline;
  KgeConfig kge;
  LpConfig lp;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
};

// Known profiles: "paper-defaults" plus "<dataset>-adjacency" and
// "<dataset>-kge" rows of the published tuned hyperparameters
// (arxiv-year, pubmed, squirrel, yelp-chi; ogbn-arxiv for kge).
std::vector<std::string> profile_names();
RunConfig profile(const std::string& name);

// Flat "key = value" text with [run], [stage2], [stage3], [stages], [kge]
// and [lp] sections; '#' starts a comment. [stages] sets both stages.
void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);
std::string render_config(const RunConfig& cfg);

// Throws InvalidArgument listing every value outside the published sweep grids.
void validate_paper_grid(const RunConfig& cfg);

// "0..9", "3", "0,2,5" -> seed list.
std::vector<std::uint64_t> parse_seeds(const std::string& s);

}  // namespace glinkx
