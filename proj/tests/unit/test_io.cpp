#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "glinkx/config.hpp"
#include "glinkx/dataset.hpp"
#include "glinkx/error.hpp"
#include "glinkx/report.hpp"

using namespace glinkx;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("glinkx_unit_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

IngestPaths toy_files(const TempDir& t) {
  IngestPaths p;
  p.labels = t.write("labels.tsv", "# id label\na\t0\nb\t1\nc\t?\n");
  p.edges = t.write("edges.tsv", "a\tb\nb\tc\n\n# trailing comment\n");
  p.features = t.write("feats.tsv", "c\t1,2\na\t0.5 -1\nb\t3\t4\n");
  p.splits = {t.write("split0.tsv", "a\ttrain\nb\tvalid\nc\ttest\n")};
  return p;
}

}  // namespace

TEST_CASE("ingest a three-node toy and round trip the bundle") {
  TempDir t("ingest");
  IngestFlags flags;
  flags.name = "toy";
  Dataset d = ingest(toy_files(t), flags);
  CHECK(d.graph.num_nodes() == 3);
  CHECK(d.graph.num_edges() == 2);
  CHECK(d.labels.classes == 2);
  CHECK(!d.labels.known(2));
  CHECK(d.features(0, 1) == -1.0);
  CHECK(d.features(2, 0) == 1.0);
  CHECK(d.splits[0].role(1) == Role::valid);

  save_bundle(d, t.path / "bundle");
  Dataset back = load_bundle(t.path / "bundle");
  CHECK(back.name == "toy");
  CHECK(back.graph.edges() == d.graph.edges());
  CHECK(back.labels.y == d.labels.y);
  CHECK(back.node_ids == d.node_ids);
  CHECK(back.splits[0].roles() == d.splits[0].roles());
  // features go through f32 storage; toy values are exact in f32
  CHECK(back.features == d.features);
  CHECK(serialize_bundle(back) == serialize_bundle(d));

  std::ifstream manifest(t.path / "bundle" / "manifest.json");
  std::string text((std::istreambuf_iterator<char>(manifest)), {});
  CHECK(text.find("\"n\": 3") != std::string::npos);
}

TEST_CASE("manifest checksums catch a flipped payload byte") {
  TempDir t("corrupt");
  Dataset d = ingest(toy_files(t), IngestFlags{});
  save_bundle(d, t.path / "b");
  auto bytes = read_file_bytes(t.path / "b" / "features.dmat");
  for (std::size_t pos = sizeof(kDmatMagic) + 16; pos < bytes.size(); ++pos) {
    auto bad = bytes;
    bad[pos] ^= 0x01;
    write_file_bytes(t.path / "b" / "features.dmat", bad);
    CHECK_THROWS_AS(load_bundle(t.path / "b"), FormatError);
  }
}

TEST_CASE("ingest errors name the file and line") {
  TempDir t("errors");
  auto p = toy_files(t);
  p.features = t.write("short.tsv", "a\t1 2\nb\t3 4\n");
  CHECK_THROWS_AS(ingest(p, IngestFlags{}), IngestError);

  p = toy_files(t);
  p.edges = t.write("bad_edges.tsv", "a\tb\n\nb\tzzz\n");
  try {
    ingest(p, IngestFlags{});
    FAIL("expected an ingest error");
  } catch (const IngestError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("zzz") != std::string::npos);
  }

  p = toy_files(t);
  IngestFlags two;
  two.classes = 2;
  p.labels = t.write("big.tsv", "a\t0\nb\t5\nc\t1\n");
  try {
    ingest(p, two);
    FAIL("expected an ingest error");
  } catch (const IngestError& e) {
    CHECK(e.line() == 2);
  }

  p = toy_files(t);
  p.splits = {t.write("partial.tsv", "a\ttrain\nb\ttest\n")};
  CHECK_THROWS_AS(ingest(p, IngestFlags{}), IngestError);
  p.splits = {t.write("nonsense.tsv", "a\ttrain\nb\tdev\nc\ttest\n")};
  CHECK_THROWS_AS(ingest(p, IngestFlags{}), IngestError);
}

TEST_CASE("DMAT1 features are accepted and symmetrize is honoured") {
  TempDir t("dmat");
  auto p = toy_files(t);
  Matrix x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  write_dmat(t.path / "x.dmat", x);
  p.features = t.path / "x.dmat";
  IngestFlags f;
  f.symmetrize = true;
  Dataset d = ingest(p, f);
  CHECK(d.features == x);
  CHECK(d.graph.num_edges() == 4);
  CHECK(!d.directed);
}

TEST_CASE("DMAT1 layout") {
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6.5;
  auto b = encode_dmat(m);
  REQUIRE(b.size() == 5 + 16 + 6 * 4);
  CHECK(std::string(b.begin(), b.begin() + 5) == "DMAT1");
  CHECK(b[5] == 2);
  CHECK(b[13] == 3);
  CHECK(decode_dmat(b) == m);
}

TEST_CASE("report: mean and sample std, idempotent") {
  std::string logs =
      "{\"type\":\"run\",\"method\":\"lp-1hop\",\"seed\":0,\"test_accuracy\":0.5}\n"
      "{\"type\":\"run\",\"method\":\"lp-1hop\",\"seed\":1,\"test_accuracy\":0.7}\n";
  auto runs = parse_runs(logs);
  auto rows = summarize(runs);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].mean == doctest::Approx(0.6));
  CHECK(rows[0].std == doctest::Approx(0.1414213562).epsilon(1e-9));
  const std::string once = report(logs);
  CHECK(report(once) == once);
  CHECK(once.find("\"type\":\"summary\"") != std::string::npos);

  std::string ten;
  for (int s = 0; s < 10; ++s)
    ten += run_line(RunRecord{"lp-2hop", std::uint64_t(s), std::size_t(s), 0, 0.4 + 0.01 * s}) + "\n";
  auto r10 = summarize(parse_runs(ten));
  REQUIRE(r10.size() == 1);
  CHECK(r10[0].count == 10);
  CHECK(r10[0].std > 0);
  CHECK(summary_table(r10).find("+-") != std::string::npos);

  CHECK_THROWS_AS(summarize(std::vector<RunRecord>{}), InvalidArgument);
  CHECK_THROWS_AS(parse_runs("{not json"), FormatError);
}

TEST_CASE("config: profiles, text overrides, paper grid") {
  auto sq = profile("squirrel-adjacency");
  CHECK(sq.pe == PeSource::adjacency);
  CHECK(sq.pipeline.stage3.layers_p == 2);
  CHECK(sq.pipeline.stage3.layers_x == 1);
  CHECK(sq.pipeline.stage3.train.optimizer.lr == 0.001);
  CHECK_NOTHROW(validate_paper_grid(sq));
  CHECK_THROWS_AS(profile("cora"), InvalidArgument);

  RunConfig c = profile("paper-defaults");
  apply_config_text(c, "[run]\nseeds = 0..2\n[stages]\nhidden = 32 # narrower\n[stage3]\nlr = 0.1\n[lp]\nhops = 2\n");
  CHECK(c.seeds == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(c.pipeline.stage2.hidden == 32);
  CHECK(c.pipeline.stage3.hidden == 32);
  CHECK(c.pipeline.stage3.train.optimizer.lr == 0.1);
  CHECK(c.pipeline.stage2.train.optimizer.lr == 0.01);
  CHECK(c.lp.hops == 2);

  RunConfig again = profile("paper-defaults");
  apply_config_text(again, render_config(c));
  CHECK(render_config(again) == render_config(c));

  CHECK_THROWS_AS(apply_config_text(c, "[stage2]\nwidth = 3\n"), InvalidArgument);
  CHECK_THROWS_AS(apply_config_text(c, "[optim]\nlr = 3\n"), InvalidArgument);
  RunConfig off = profile("paper-defaults");
  off.pipeline.stage3.train.optimizer.lr = 0.05;
  off.lp.alpha = 0.3;
  try {
    validate_paper_grid(off);
    FAIL("expected a grid violation");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("stage3.lr") != std::string::npos);
    CHECK(std::string(e.what()).find("lp.alpha") != std::string::npos);
  }
  CHECK(parse_seeds("3,5..6") == std::vector<std::uint64_t>{3, 5, 6});
  CHECK_THROWS_AS(parse_seeds("4..2"), InvalidArgument);
}
