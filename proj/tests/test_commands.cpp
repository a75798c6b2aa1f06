#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "seq4d/commands.hpp"
#include "seq4d/fixture.hpp"
#include "seq4d/io.hpp"
#include "seq4d/matrix_io.hpp"
#include "temp_dir.hpp"

using namespace seq4d;
namespace fs = std::filesystem;

namespace {

cmd::CommandContext default_context() {
  cmd::CommandContext ctx;
  ctx.config = default_config();
  ctx.threads = 1;
  return ctx;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

void write_fixture(const fs::path& dir, int scans = 5) {
  fixture::FixtureConfig fcfg;
  fcfg.num_scans = scans;
  fixture::write(fixture::generate(fcfg), dir);
}

}  // namespace

TEST_CASE("external ground masks reproduce the built-in segmentation") {
  TempDir tmp("seq4d_cmd");
  write_fixture(tmp.path / "fx");
  const auto ctx = default_context();

  // labels via the built-in RANSAC
  REQUIRE(cmd::run_pseudo_label(tmp.path / "fx" / "scans",
                                tmp.path / "fx" / "poses.txt",
                                tmp.path / "ransac", ctx) == 0);

  // dump the same masks to files and feed them back as external masks
  const Sequence seq = io::load_sequence(tmp.path / "fx" / "scans",
                                         tmp.path / "fx" / "poses.txt");
  const auto masks = cluster::sequence_ground_masks(seq, ctx.config.ground, 1);
  fs::create_directories(tmp.path / "masks");
  for (std::size_t s = 0; s < masks.size(); ++s) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu.mask", s);
    io::write_ground_mask(masks[s], tmp.path / "masks" / name);
  }
  REQUIRE(cmd::run_pseudo_label(tmp.path / "fx" / "scans",
                                tmp.path / "fx" / "poses.txt",
                                tmp.path / "external", ctx,
                                tmp.path / "masks") == 0);

  for (int s = 0; s < 5; ++s) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06d.label", s);
    CHECK(slurp(tmp.path / "ransac" / name) ==
          slurp(tmp.path / "external" / name));
  }
}

TEST_CASE("non-empty output directories are refused unless forced") {
  TempDir tmp("seq4d_cmd");
  write_fixture(tmp.path / "fx");
  fs::create_directories(tmp.path / "out");
  std::ofstream(tmp.path / "out" / "precious.txt") << "keep me";

  auto ctx = default_context();
  CHECK(cmd::run_pseudo_label(tmp.path / "fx" / "scans",
                              tmp.path / "fx" / "poses.txt", tmp.path / "out",
                              ctx) != 0);
  CHECK(fs::exists(tmp.path / "out" / "precious.txt"));

  ctx.force = true;
  CHECK(cmd::run_pseudo_label(tmp.path / "fx" / "scans",
                              tmp.path / "fx" / "poses.txt", tmp.path / "out",
                              ctx) == 0);
  CHECK_FALSE(fs::exists(tmp.path / "out" / "precious.txt"));
  CHECK(fs::exists(tmp.path / "out" / "summary.txt"));
}

TEST_CASE("failed commands remove their partial output directory") {
  TempDir tmp("seq4d_cmd");
  const auto ctx = default_context();
  CHECK(cmd::run_pseudo_label(tmp.path / "does_not_exist", "",
                              tmp.path / "out", ctx) != 0);
  CHECK_FALSE(fs::exists(tmp.path / "out"));
}

TEST_CASE("sample-pairs manifest lists one pair per line") {
  TempDir tmp("seq4d_cmd");
  auto ctx = default_context();
  ctx.config.sampling.seed = 9;
  REQUIRE(cmd::run_sample_pairs(30, 100, tmp.path / "pairs.txt", ctx) == 0);

  const auto pairs = sampling::sample_pairs(30, 100, ctx.config.sampling);
  std::ifstream in(tmp.path / "pairs.txt");
  int first, second;
  std::size_t i = 0;
  while (in >> first >> second) {
    REQUIRE(i < pairs.size());
    CHECK(first == pairs[i].first);
    CHECK(second == pairs[i].second);
    ++i;
  }
  CHECK(i == pairs.size());
}

TEST_CASE("loss-check single-frame mode writes a parseable report") {
  TempDir tmp("seq4d_cmd");
  Eigen::MatrixXd s(4, 2), m(4, 2);
  s << 0.9, 0.1, 0.8, 0.2, 0.1, 0.9, 0.2, 0.8;
  m << 1, 0, 1, 0, 0, 1, 0, 1;
  io::write_matrix(s, tmp.path / "s.txt");
  io::write_matrix(m, tmp.path / "m.txt");

  cmd::LossCheckInputs inputs;
  inputs.s_t = tmp.path / "s.txt";
  inputs.m_t = tmp.path / "m.txt";
  REQUIRE(cmd::run_loss_check(inputs, tmp.path / "report.txt",
                              default_context()) == 0);
  const std::string report = slurp(tmp.path / "report.txt");
  CHECK(report.find("object=0 query=0") != std::string::npos);
  CHECK(report.find("object=1 query=1") != std::string::npos);
  CHECK(report.find("matching_cost=") != std::string::npos);
}

TEST_CASE("placement manifest round trips") {
  TempDir tmp("seq4d_cmd");
  std::vector<synth::PlacementRecord> records(2);
  records[0].snippet_id = 3;
  records[0].instance_id = 11;
  records[0].anchor_x = 1.25;
  records[0].anchor_y = -4.5;
  records[0].yaw = 2.125;
  records[0].frame_boxes = {{0, Aabb2D{0, 1, 2, 3}}, {1, Aabb2D{0.5, 1.5, 2, 3}}};
  records[1].snippet_id = 1;
  records[1].instance_id = 12;
  records[1].anchor_x = -0.001953125;
  records[1].anchor_y = 7.75;
  records[1].yaw = 0.0;
  records[1].frame_boxes = {{4, Aabb2D{-2, -1, -2, -1}}};

  cmd::write_placements(records, tmp.path / "p.txt");
  const auto back = cmd::read_placements(tmp.path / "p.txt");
  REQUIRE(back.size() == 2);
  CHECK(back[0].snippet_id == 3);
  CHECK(back[0].anchor_x == 1.25);
  CHECK(back[0].yaw == 2.125);
  REQUIRE(back[0].frame_boxes.size() == 2);
  CHECK(back[0].frame_boxes[1].first == 1);
  CHECK(back[0].frame_boxes[1].second.x_min == 0.5);
  CHECK(back[1].anchor_x == -0.001953125);
}

TEST_CASE("synth with zero attempts copies the inputs byte for byte") {
  TempDir tmp("seq4d_cmd");
  write_fixture(tmp.path / "fx", 3);
  auto ctx = default_context();
  REQUIRE(cmd::run_pseudo_label(tmp.path / "fx" / "scans",
                                tmp.path / "fx" / "poses.txt",
                                tmp.path / "pred", ctx) == 0);
  REQUIRE(cmd::run_extract_db(tmp.path / "fx" / "scans",
                              tmp.path / "fx" / "poses.txt", tmp.path / "pred",
                              tmp.path / "db", ctx) == 0);
  ctx.config.synth.n_s = 0;
  REQUIRE(cmd::run_synth(tmp.path / "fx" / "scans",
                         tmp.path / "fx" / "poses.txt", tmp.path / "pred",
                         tmp.path / "db", tmp.path / "out", ctx) == 0);
  for (int s = 0; s < 3; ++s) {
    char scan[32], label[32];
    std::snprintf(scan, sizeof(scan), "%06d.bin", s);
    std::snprintf(label, sizeof(label), "%06d.label", s);
    CHECK(slurp(tmp.path / "fx" / "scans" / scan) ==
          slurp(tmp.path / "out" / "scans" / scan));
    CHECK(slurp(tmp.path / "pred" / label) ==
          slurp(tmp.path / "out" / "labels" / label));
  }
}

TEST_CASE("eval command writes the key=value report") {
  TempDir tmp("seq4d_cmd");
  write_fixture(tmp.path / "fx");
  const auto ctx = default_context();
  REQUIRE(cmd::run_eval(tmp.path / "fx" / "labels", tmp.path / "fx" / "labels",
                        tmp.path / "fx" / "scans", tmp.path / "report.txt",
                        ctx) == 0);
  const std::string report = slurp(tmp.path / "report.txt");
  CHECK(report.find("s_assoc_temp=1.0000") != std::string::npos);
  CHECK(report.find("iou_star=1.0000") != std::string::npos);
}
