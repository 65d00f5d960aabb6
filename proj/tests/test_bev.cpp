#include <doctest.h>

#include <numbers>

#include "fco/bev.hpp"
#include "support.hpp"

using namespace fco;
using testing::make_pose;

TEST_CASE("grid spec geometry") {
  const GridSpec full = GridSpec::full();
  CHECK(full.meters_per_pixel() == 0.390625);
  CHECK(GridSpec::desk().meters_per_pixel() == 3.125);
  CHECK(full.pixel_center(0, 0).isApprox(Vec2(-99.8046875, 99.8046875)));
  CHECK(full.pixel_center(256, 256).isApprox(Vec2(0.1953125, -0.1953125)));
  CHECK_THROWS_AS((GridSpec{0, Vec2::Zero(), 10}.validate()), ConfigError);
  CHECK_THROWS_AS((GridSpec{8, Vec2::Zero(), 0}.validate()), ConfigError);
}

TEST_CASE("property: pixel transform round-trips for every pixel") {
  for (const GridSpec spec : {GridSpec::full(Vec2(3.3, -7.1)), GridSpec{37, Vec2(1, 2), 55.5}}) {
    for (int i = 0; i < spec.size_px; ++i) {
      for (int j = 0; j < spec.size_px; ++j) {
        CHECK(spec.world_to_pixel(spec.pixel_center(i, j)) == std::pair{i, j});
      }
    }
  }
}

TEST_CASE("rasterize: empty list gives an all-zero grid") {
  const auto g = rasterize(std::vector<VehiclePose>{}, GridSpec::desk());
  CHECK(g.data.isZero());
  CHECK(g.rows() == 64);
}

TEST_CASE("rasterize: axis-aligned 4 m x 2 m vehicle at the center of the default grid") {
  const GridSpec spec = GridSpec::full();
  const std::vector<VehiclePose> v = {make_pose(1, 0, 0, 0.0, 4.0, 2.0)};
  const auto g = rasterize(v, spec);
  // Pixel centers at +-(k + 0.5) * 0.390625: 5 per side along 2 m, 3 per side along 1 m.
  CHECK(g.data.cast<int>().sum() == 60);
  CHECK(testing::same_raster(g, testing::oracle_raster(v, 512, 0, 0, 100)));

  SUBCASE("rotating by 90 degrees rotates the footprint about the center") {
    const std::vector<VehiclePose> r = {make_pose(1, 0, 0, std::numbers::pi / 2, 4.0, 2.0)};
    const auto gr = rasterize(r, spec);
    bool same = true;
    for (int i = 0; i < 512; ++i) {
      for (int j = 0; j < 512; ++j) same = same && gr.data(511 - j, i) == g.data(i, j);
    }
    CHECK(same);
  }
}

TEST_CASE("footprints") {
  const GridSpec spec{32, Vec2::Zero(), 16.0};
  const auto a = make_pose(1, -5, 3, 0.3);
  const auto b = make_pose(2, 6, -4, 2.0);
  const std::vector<VehiclePose> both = {a, b};
  const auto fa = footprint_mask(a, spec);
  const auto fb = footprint_mask(b, spec);
  CHECK(fa.mask == rasterize(std::vector<VehiclePose>{a}, spec));
  CHECK_FALSE(fa.degenerate());
  CHECK((fa.mask.data * fb.mask.data).isZero());
  CHECK(BinaryGrid{spec, fa.mask.data.max(fb.mask.data)} == rasterize(both, spec));
  CHECK(fa.pixel_count == footprint_pixels(a, spec).size());

  const auto off = footprint_mask(make_pose(3, 40, 40), spec);
  CHECK(off.degenerate());
  CHECK(off.mask.data.isZero());
  CHECK_THROWS_AS(footprint_pixels(make_pose(4, 0, 0, 0, -1.0, 1.0), spec), InputError);
  CHECK_THROWS_AS(rasterize(std::vector<VehiclePose>{make_pose(4, 0, 0, 0, 1.0, 0.0)}, spec), InputError);
}

TEST_CASE("property: rasterize matches the pixel-center oracle and is union consistent") {
  testing::Gen gen(31);
  const GridSpec spec{48, Vec2(2.0, -1.0), 30.0};
  for (int trial = 0; trial < 150; ++trial) {
    std::vector<VehiclePose> a, b;
    for (int i = gen.integer(0, 3); i > 0; --i) a.push_back(gen.pose(1, 35.0));
    for (int i = gen.integer(0, 3); i > 0; --i) b.push_back(gen.pose(2, 35.0));
    std::vector<VehiclePose> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    const auto ga = rasterize(a, spec), gb = rasterize(b, spec), gab = rasterize(ab, spec);
    CHECK(testing::same_raster(gab, testing::oracle_raster(ab, 48, 2.0, -1.0, 30.0)));
    CHECK((gab.data == ga.data.max(gb.data)).all());
  }
}

TEST_CASE("pgm round-trip and errors") {
  testing::TempDir dir("pgm");
  testing::Gen gen(32);
  BinaryGrid g = BinaryGrid::zeros(GridSpec{20, Vec2::Zero(), 10});
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) g.data(i, j) = gen.coin() ? 1 : 0;
  }
  write_pgm(g, dir / "g.pgm");
  const auto raw = read_pgm(dir / "g.pgm");
  CHECK(raw.rows() == 20);
  CHECK((raw == (g.data * 255).cast<std::uint8_t>()).all());
  CHECK(read_binary_pgm(dir / "g.pgm", g.spec) == g);
  CHECK(testing::slurp(dir / "g.pgm").starts_with("P5\n20 20\n255\n"));

  std::ofstream(dir / "bad.pgm") << "P2\n2 2\n255\n0 0 0 0\n";
  CHECK_THROWS_AS(read_pgm(dir / "bad.pgm"), ParseError);
  std::ofstream(dir / "short.pgm", std::ios::binary) << "P5\n4 4\n255\n" << std::string(3, '\0');
  CHECK_THROWS_AS(read_pgm(dir / "short.pgm"), ParseError);
  CHECK_THROWS_AS(read_pgm(dir / "none.pgm"), IoError);
  CHECK_THROWS_AS(read_binary_pgm(dir / "g.pgm", GridSpec{21, Vec2::Zero(), 10}), ParseError);
}

namespace {

// Ten frames; vehicle 1 parks at (10, 0) and is detected only at t <= 5, vehicle 2 drives east
// at 5 m/s and is always detected.
struct ParkedScene {
  Run run;
  DetectionSeries rec;

  ParkedScene() {
    std::vector<std::vector<VehiclePose>> frames;
    std::vector<std::vector<std::uint64_t>> det;
    for (int k = 0; k < 10; ++k) {
      frames.push_back({make_pose(1, 10, 0), make_pose(2, -40 + 5.0 * k, -20, 0.0, 4.5, 1.8, 5.0)});
      det.push_back(k <= 5 ? std::vector<std::uint64_t>{1, 2} : std::vector<std::uint64_t>{2});
    }
    run = testing::manual_run(frames);
    rec = testing::manual_records(det);
  }
};

}  // namespace

TEST_CASE("make_sample") {
  const ParkedScene scene;
  const GridSpec spec{64, Vec2::Zero(), 50.0};

  SUBCASE("s = 0 has one frame equal to the target") {
    const auto s = make_sample(scene.run, scene.rec, 7.0, 0.0, spec);
    REQUIRE(s.frames.size() == 1);
    CHECK(s.frames[0] == s.target);
  }
  SUBCASE("s = 5 has six frames; the parked vehicle persists in early frames and in G") {
    const auto s = make_sample(scene.run, scene.rec, 8.0, 5.0, spec);
    REQUIRE(s.frames.size() == 6);
    const auto parked = footprint_mask(make_pose(1, 10, 0), spec).mask;
    for (int k = 0; k < 6; ++k) {
      const bool has = ((s.frames[static_cast<std::size_t>(k)].data * parked.data) == parked.data).all();
      CHECK(has == (k <= 2));  // frames t = 3, 4, 5
    }
    CHECK(((s.target.data * parked.data) == parked.data).all());
    CHECK(pose_ids(s.detected) == IdSet{VehicleId{2}});
    CHECK(pose_ids(s.window_set) == (IdSet{VehicleId{1}, VehicleId{2}}));
    CHECK(rasterize(s.detected, spec) == s.frames.back());
    CHECK(rasterize(s.window_set, spec) == s.target);
    CHECK(s.history.size() == 6);
    CHECK(s.history[0].size() == 2);
    CHECK(s.history[0][1].position.isApprox(Vec2(-25, -20)));  // historical pose, t = 3
    CHECK(s.n_vt == 2);
    CHECK(s.frame_time(0) == 3.0);
  }
  SUBCASE("window before the run start or a missing record is a window error") {
    CHECK_THROWS_AS(make_sample(scene.run, scene.rec, 3.0, 5.0, spec), WindowError);
    DetectionSeries partial = scene.rec;
    partial.records.resize(7);
    CHECK_THROWS_AS(make_sample(scene.run, partial, 8.0, 5.0, spec), WindowError);
  }
}

TEST_CASE("sample write/read round-trip") {
  testing::TempDir dir("sample");
  const ParkedScene scene;
  const GridSpec spec{32, Vec2::Zero(), 50.0};
  const auto s = make_sample(scene.run, scene.rec, 9.0, 4.0, spec, 3);
  const auto where = dir / sample_dir_name(3, 9.0);
  write_sample(s, where);
  for (const char* f : {"S_000.pgm", "S_004.pgm", "G.pgm", "meta.csv", "history.csv", "sample.txt"}) {
    CHECK(std::filesystem::exists(where / f));
  }
  CHECK(testing::slurp(where / "meta.csv").starts_with("role,id,x,y,heading,length,width\nd,2,"));
  const auto back = read_sample(where, DatasetInfo{spec, 4.0, 1.0});
  CHECK(back.frames == s.frames);
  CHECK(back.target == s.target);
  // meta.csv stores footprints only; speed travels through history.csv.
  auto footprints = [](std::vector<VehiclePose> v) {
    for (auto& p : v) p.speed = 0.0;
    return v;
  };
  CHECK(back.detected == footprints(s.detected));
  CHECK(back.window_set == footprints(s.window_set));
  CHECK(back.history == s.history);
  CHECK(back.n_vt == s.n_vt);
  CHECK(back.t == 9.0);
  CHECK(back.run_id == 3);
  CHECK(sample_dir_name(3, 9.0) == "sample_3_9");
}

TEST_CASE("build_dataset splits by run with the expected counts") {
  testing::TempDir dir("ds");
  std::vector<Run> runs;
  std::vector<DetectionSeries> recs;
  for (int r = 0; r < 10; ++r) {
    ScenarioConfig c;
    c.t_end = 20;
    c.seed = 100 + static_cast<std::uint64_t>(r);
    runs.push_back(assign_fcos(build_and_run(c), 0.3, c.seed));
    recs.push_back(detect_run(runs.back(), SensorConfig{}));
  }
  const GridSpec spec{16, Vec2::Zero(), 100.0};
  build_dataset(runs, recs, 5.0, spec, dir / "a");
  const auto train = DatasetSplit::open(dir / "a", "train");
  const auto val = DatasetSplit::open(dir / "a", "val");
  const auto test = DatasetSplit::open(dir / "a", "test");
  CHECK(train.size() == 8 * 16);
  CHECK(val.size() == 16);
  CHECK(test.size() == 16);
  CHECK(train.info() == DatasetInfo{spec, 5.0, 1.0});
  std::set<int> train_runs, other_runs;
  for (std::size_t i = 0; i < train.size(); i += 5) train_runs.insert(train.load(i).run_id);
  other_runs.insert(val.load(0).run_id);
  other_runs.insert(test.load(0).run_id);
  for (int r : other_runs) CHECK_FALSE(train_runs.contains(r));
  CHECK(val.load(0).run_id != test.load(0).run_id);
  CHECK(train.load(0).t == 5.0);
  CHECK(train.load(1).t == 6.0);  // numeric, not lexicographic, order

  SUBCASE("rebuilding gives byte-identical files") {
    build_dataset(runs, recs, 5.0, spec, dir / "b");
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir / "a")) {
      if (!entry.is_regular_file()) continue;
      const auto rel = std::filesystem::relative(entry.path(), dir / "a");
      CHECK(testing::slurp(entry.path()) == testing::slurp(dir / "b" / rel));
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(build_dataset(std::span(runs).first(9), std::span(recs).first(9), 5.0, spec, dir / "c"),
                    ConfigError);
    auto dup = runs;
    dup[1].config.seed = dup[0].config.seed;
    CHECK_THROWS_AS(build_dataset(dup, recs, 5.0, spec, dir / "c"), ConfigError);
    CHECK_THROWS_AS(DatasetSplit::open(dir / "nothing", "train"), IoError);
  }
}
