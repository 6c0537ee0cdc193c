#include "glinkx/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "glinkx/error.hpp"

namespace glinkx {

namespace {

struct Row {
  int layers_p, layers_x, layers_agg;
  double lr;
};

// Published tuned rows (layers for the PE/adjacency branch, ego branch,
// aggregation MLP; learning rate). Inner dropout is 0.5 everywhere.
const std::map<std::string, Row>& tuned_rows() {
  static const std::map<std::string, Row> rows = {
      {"arxiv-year-adjacency", {1, 2, 1, 0.001}},
      {"pubmed-adjacency", {1, 2, 1, 0.001}},
      {"squirrel-adjacency", {2, 1, 1, 0.001}},
      {"yelp-chi-adjacency", {2, 2, 1, 0.01}},
      {"arxiv-year-kge", {2, 1, 1, 0.01}},
      {"ogbn-arxiv-kge", {2, 2, 2, 0.001}},
      {"pubmed-kge", {2, 2, 2, 0.01}},
      {"squirrel-kge", {2, 1, 2, 0.001}},
      {"yelp-chi-kge", {2, 2, 2, 0.01}},
  };
  return rows;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& v, const std::string& where) {
  double d;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec != std::errc() || p != v.data() + v.size()) throw InvalidArgument(where + ": '" + v + "' is not a number");
  return d;
}

long to_long(const std::string& v, const std::string& where) {
  long d;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec != std::errc() || p != v.data() + v.size()) throw InvalidArgument(where + ": '" + v + "' is not an integer");
  return d;
}

bool to_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidArgument(where + ": '" + v + "' is not a boolean");
}

bool apply_stage(StageConfig& s, const std::string& key, const std::string& v, const std::string& where) {
  if (key == "hidden") s.hidden = static_cast<std::size_t>(to_long(v, where));
  else if (key == "layers_x") s.layers_x = static_cast<int>(to_long(v, where));
  else if (key == "layers_p" || key == "layers_a") s.layers_p = static_cast<int>(to_long(v, where));
  else if (key == "layers_prop") s.layers_prop = static_cast<int>(to_long(v, where));
  else if (key == "layers_agg") s.layers_agg = static_cast<int>(to_long(v, where));
  else if (key == "dropout") s.dropout = to_double(v, where);
  else if (key == "lr") s.train.optimizer.lr = to_double(v, where);
  else if (key == "weight_decay") s.train.optimizer.weight_decay = to_double(v, where);
  else if (key == "beta1") s.train.optimizer.beta1 = to_double(v, where);
  else if (key == "beta2") s.train.optimizer.beta2 = to_double(v, where);
  else if (key == "eps") s.train.optimizer.eps = to_double(v, where);
  else if (key == "epochs") s.train.epochs = static_cast<int>(to_long(v, where));
  else if (key == "batch") s.train.batch_size = static_cast<std::size_t>(to_long(v, where));
  else return false;
  return true;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

void render_stage(std::ostringstream& out, const char* name, const StageConfig& s) {
  out << "[" << name << "]\n"
      << "hidden = " << s.hidden << "\n"
      << "layers_x = " << s.layers_x << "\n"
      << "layers_p = " << s.layers_p << "\n"
      << "layers_prop = " << s.layers_prop << "\n"
      << "layers_agg = " << s.layers_agg << "\n"
      << "dropout = " << fmt(s.dropout) << "\n"
      << "lr = " << fmt(s.train.optimizer.lr) << "\n"
      << "weight_decay = " << fmt(s.train.optimizer.weight_decay) << "\n"
      << "beta1 = " << fmt(s.train.optimizer.beta1) << "\n"
      << "beta2 = " << fmt(s.train.optimizer.beta2) << "\n"
      << "eps = " << fmt(s.train.optimizer.eps) << "\n"
      << "epochs = " << s.train.epochs << "\n"
      << "batch = " << s.train.batch_size << "\n\n";
}

}  // namespace

std::vector<std::string> profile_names() {
  std::vector<std::string> out = {"paper-defaults"};
  for (const auto& [name, row] : tuned_rows()) out.push_back(name);
  return out;
}

RunConfig profile(const std::string& name) {
  RunConfig cfg;
  cfg.profile = name;
  for (StageConfig* s : {&cfg.pipeline.stage2, &cfg.pipeline.stage3}) {
    s->hidden = 64;
    s->dropout = 0.5;
    s->train.epochs = 200;
    s->train.batch_size = 4096;
    s->train.optimizer.lr = 0.01;
  }
  if (name == "paper-defaults") return cfg;
  auto it = tuned_rows().find(name);
  if (it == tuned_rows().end()) {
    std::string known;
    for (const auto& n : profile_names()) known += " " + n;
    throw InvalidArgument("unknown profile '" + name + "'; known:" + known);
  }
  const Row& r = it->second;
  cfg.pe = name.ends_with("-kge") ? PeSource::kge : PeSource::adjacency;
  for (StageConfig* s : {&cfg.pipeline.stage2, &cfg.pipeline.stage3}) {
    s->layers_p = r.layers_p;
    s->layers_x = r.layers_x;
    s->layers_agg = r.layers_agg;
    s->train.optimizer.lr = r.lr;
  }
  return cfg;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::istringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    const auto dots = part.find("..");
    if (dots != std::string::npos) {
      const long a = to_long(trim(part.substr(0, dots)), "seeds");
      const long b = to_long(trim(part.substr(dots + 2)), "seeds");
      if (a < 0 || b < a) throw InvalidArgument("seeds: bad range '" + part + "'");
      for (long v = a; v <= b; ++v) out.push_back(static_cast<std::uint64_t>(v));
    } else {
      const long v = to_long(part, "seeds");
      if (v < 0) throw InvalidArgument("seeds must be nonnegative");
      out.push_back(static_cast<std::uint64_t>(v));
    }
  }
  if (out.empty()) throw InvalidArgument("empty seed list");
  return out;
}

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line, section = "run";
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(number);
    if (line.front() == '[') {
      if (line.back() != ']') throw InvalidArgument(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    bool ok = true;
    if (section == "run") {
      if (key == "profile") {
        if (v != cfg.profile) {
          RunConfig base = profile(v);
          base.seeds = cfg.seeds;
          cfg = base;
        }
      } else if (key == "pe") cfg.pe = parse_pe_source(v);
      else if (key == "seeds") cfg.seeds = parse_seeds(v);
      else if (key == "symmetrize") cfg.pipeline.symmetrize = to_bool(v, where);
      else ok = false;
    } else if (section == "stage2") {
      ok = apply_stage(cfg.pipeline.stage2, key, v, where);
    } else if (section == "stage3") {
      ok = apply_stage(cfg.pipeline.stage3, key, v, where);
    } else if (section == "stages") {
      ok = apply_stage(cfg.pipeline.stage2, key, v, where) && apply_stage(cfg.pipeline.stage3, key, v, where);
    } else if (section == "kge") {
      if (key == "dim") cfg.kge.dim = static_cast<std::size_t>(to_long(v, where));
      else if (key == "epochs") cfg.kge.epochs = static_cast<int>(to_long(v, where));
      else if (key == "negatives") cfg.kge.negatives = static_cast<std::size_t>(to_long(v, where));
      else if (key == "batch") cfg.kge.batch = static_cast<std::size_t>(to_long(v, where));
      else if (key == "lr") cfg.kge.lr = to_double(v, where);
      else if (key == "loss") cfg.kge.loss = parse_kge_loss(v);
      else if (key == "margin") cfg.kge.margin = to_double(v, where);
      else ok = false;
    } else if (section == "lp") {
      if (key == "alpha") cfg.lp.alpha = to_double(v, where);
      else if (key == "hops") cfg.lp.hops = static_cast<int>(to_long(v, where));
      else if (key == "iterations") cfg.lp.iterations = static_cast<int>(to_long(v, where));
      else if (key == "clamp") cfg.lp.clamp = to_bool(v, where);
      else if (key == "symmetrize") cfg.lp.symmetrize = to_bool(v, where);
      else ok = false;
    } else {
      throw InvalidArgument(where + ": unknown section [" + section + "]");
    }
    if (!ok) throw InvalidArgument(where + ": unknown key '" + key + "' in [" + section + "]");
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = profile("paper-defaults");
  apply_config_text(cfg, ss.str(), path.string());
  return cfg;
}

std::string render_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[run]\nprofile = " << cfg.profile << "\npe = " << pe_source_name(cfg.pe) << "\nseeds = ";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) out << (i ? "," : "") << cfg.seeds[i];
  out << "\nsymmetrize = " << (cfg.pipeline.symmetrize ? "true" : "false") << "\n\n";
  render_stage(out, "stage2", cfg.pipeline.stage2);
  render_stage(out, "stage3", cfg.pipeline.stage3);
  out << "[kge]\ndim = " << cfg.kge.dim << "\nepochs = " << cfg.kge.epochs
      << "\nnegatives = " << cfg.kge.negatives << "\nbatch = " << cfg.kge.batch
      << "\nlr = " << fmt(cfg.kge.lr) << "\nloss = " << (cfg.kge.loss == KgeLoss::softmax ? "softmax" : "margin")
      << "\nmargin = " << fmt(cfg.kge.margin) << "\n\n";
  out << "[lp]\nalpha = " << fmt(cfg.lp.alpha) << "\nhops = " << cfg.lp.hops
      << "\niterations = " << cfg.lp.iterations << "\nclamp = " << (cfg.lp.clamp ? "true" : "false")
      << "\nsymmetrize = " << (cfg.lp.symmetrize ? "true" : "false") << "\n";
  return out.str();
}

void validate_paper_grid(const RunConfig& cfg) {
  std::vector<std::string> bad;
  auto in = [](double v, std::initializer_list<double> grid) {
    return std::any_of(grid.begin(), grid.end(), [&](double g) { return std::abs(v - g) < 1e-12; });
  };
  auto stage = [&](const char* name, const StageConfig& s) {
    const std::string p = std::string(name) + ".";
    if (!in(s.layers_x, {1, 2})) bad.push_back(p + "layers_x=" + std::to_string(s.layers_x) + " not in {1,2}");
    if (!in(s.layers_p, {1, 2})) bad.push_back(p + "layers_p=" + std::to_string(s.layers_p) + " not in {1,2}");
    if (!in(s.layers_agg, {1, 2})) bad.push_back(p + "layers_agg=" + std::to_string(s.layers_agg) + " not in {1,2}");
    if (!in(s.dropout, {0.5})) bad.push_back(p + "dropout=" + fmt(s.dropout) + " not in {0.5}");
    if (!in(s.train.optimizer.lr, {0.1, 0.01, 0.001}))
      bad.push_back(p + "lr=" + fmt(s.train.optimizer.lr) + " not in {0.1,0.01,0.001}");
    if (s.train.epochs != 200) bad.push_back(p + "epochs=" + std::to_string(s.train.epochs) + " != 200");
  };
  stage("stage2", cfg.pipeline.stage2);
  stage("stage3", cfg.pipeline.stage3);
  if (cfg.pe == PeSource::kge) {
    if (cfg.kge.dim != 400) bad.push_back("kge.dim=" + std::to_string(cfg.kge.dim) + " != 400");
    if (cfg.kge.epochs != 50) bad.push_back("kge.epochs=" + std::to_string(cfg.kge.epochs) + " != 50");
    if (cfg.kge.negatives != 1000) bad.push_back("kge.negatives != 1000");
    if (cfg.kge.batch != 10000) bad.push_back("kge.batch != 10000");
    if (!in(cfg.kge.lr, {0.1})) bad.push_back("kge.lr != 0.1");
  }
  if (!in(cfg.lp.alpha, {0.01, 0.1, 0.25, 0.5, 0.75, 0.99}))
    bad.push_back("lp.alpha=" + fmt(cfg.lp.alpha) + " not in {0.01,0.1,0.25,0.5,0.75,0.99}");
  if (bad.empty()) return;
  std::string msg = "configuration outside the published sweep grid:";
  for (const auto& b : bad) msg += " " + b + ";";
  throw InvalidArgument(msg);
}

}  // namespace glinkx
