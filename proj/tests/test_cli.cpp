#include <doctest.h>

#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fco/text.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using fco::testing::slurp;
using fco::testing::TempDir;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result fcobench(const std::string& args, const TempDir& dir) {
  const auto log = dir / "stdout.txt";
  const std::string cmd = std::string(FCOBENCH_EXE) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(log);
  return r;
}

void write_config(const fs::path& path, const std::string& extra = "") {
  std::ofstream(path) << "t_end = 120\nseed = 3\ndemand = 500\n" << extra;
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& path) {
  std::istringstream in(slurp(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    for (auto f : fco::text::split(line, ',')) row.emplace_back(f);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("cli: usage and help") {
  TempDir dir("cli_usage");
  CHECK(fcobench("--help", dir).code == 0);
  const auto help = fcobench("run-sim --help", dir);
  CHECK(help.code == 0);
  CHECK(help.out.find("--seed") != std::string::npos);
  CHECK(fcobench("", dir).code == 2);
  CHECK(fcobench("frobnicate", dir).code == 2);
  CHECK(fcobench("run-sim --out x", dir).code == 2);
}

TEST_CASE("cli: run-sim") {
  TempDir dir("cli_sim");
  write_config(dir / "c.cfg");
  const auto ok = fcobench("run-sim --config " + (dir / "c.cfg").string() + " --out " + (dir / "a").string(), dir);
  REQUIRE(ok.code == 0);
  CHECK(ok.out.find("vehicles") != std::string::npos);
  CHECK(ok.out.find("mean |V_t|") != std::string::npos);
  CHECK(fs::exists(dir / "a" / "run_0.trajectory.csv"));
  CHECK(fs::exists(dir / "a" / "run_0.detections.csv"));

  SUBCASE("missing or bad config exits 2") {
    CHECK(fcobench("run-sim --config " + (dir / "none.cfg").string() + " --out " + (dir / "b").string(), dir).code == 2);
    write_config(dir / "bad.cfg", "dt = -1\n");
    CHECK(fcobench("run-sim --config " + (dir / "bad.cfg").string() + " --out " + (dir / "b").string(), dir).code == 2);
  }
  SUBCASE("seed override is deterministic") {
    const std::string base = "run-sim --config " + (dir / "c.cfg").string() + " --seed 11 --out ";
    REQUIRE(fcobench(base + (dir / "s1").string(), dir).code == 0);
    REQUIRE(fcobench(base + (dir / "s2").string(), dir).code == 0);
    CHECK(slurp(dir / "s1" / "run_0.trajectory.csv") == slurp(dir / "s2" / "run_0.trajectory.csv"));
    CHECK(slurp(dir / "s1" / "run_0.detections.csv") == slurp(dir / "s2" / "run_0.detections.csv"));
    CHECK(slurp(dir / "s1" / "run_0.trajectory.csv") != slurp(dir / "a" / "run_0.trajectory.csv"));
  }
  SUBCASE("unwritable output exits 3") {
    std::ofstream(dir / "file") << "x";
    CHECK(fcobench("run-sim --config " + (dir / "c.cfg").string() + " --out " + (dir / "file" / "sub").string(), dir)
              .code == 3);
  }
}

TEST_CASE("cli: analysis commands") {
  TempDir dir("cli_analyze");
  write_config(dir / "c.cfg");
  REQUIRE(fcobench("run-sim --config " + (dir / "c.cfg").string() + " --out " + (dir / "a").string(), dir).code == 0);
  const std::string traj = (dir / "a" / "run_0.trajectory.csv").string();

  SUBCASE("full penetration puts all distribution mass at 1") {
    REQUIRE(fcobench("analyze-detectability --traj " + traj + " --penetrations 1.0 --out " + (dir / "d.csv").string(),
                     dir)
                .code == 0);
    const auto rows = csv_rows(dir / "d.csv");
    REQUIRE(!rows.empty());
    for (const auto& r : rows) CHECK(r[4] == "1");
  }
  SUBCASE("grid rows and monotone potential") {
    const auto r = fcobench("analyze-potential --traj " + traj +
                                " --penetrations 0.1,0.5,1 --windows 0,5,10,20 --out " + (dir / "g.csv").string(),
                            dir);
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(dir / "g.csv");
    CHECK(rows.size() == 12);
    std::map<std::string, double> last;
    for (const auto& row : rows) {
      const double v = fco::text::parse_double(row[2]);
      if (last.contains(row[0])) CHECK(v >= last[row[0]]);
      last[row[0]] = v;
      if (row[0] == "1") CHECK(v == 0.0);
    }
  }
  SUBCASE("explicit config works for a trajectory without a sidecar") {
    fs::copy_file(traj, dir / "plain.csv");
    CHECK(fcobench("analyze-detectability --traj " + (dir / "plain.csv").string() + " --config " +
                       (dir / "c.cfg").string() + " --penetrations 0.2 --out " + (dir / "d2.csv").string(),
                   dir)
              .code == 0);
    CHECK(fcobench("analyze-detectability --traj " + (dir / "plain.csv").string() + " --penetrations 0.2 --out " +
                       (dir / "d3.csv").string(),
                   dir)
              .code == 0);
  }
  SUBCASE("errors") {
    CHECK(fcobench("analyze-detectability --traj " + traj + " --penetrations '0.1;0.5' --out x.csv", dir).code == 2);
    CHECK(fcobench("analyze-detectability --traj " + traj + " --penetrations 2 --out x.csv", dir).code == 2);
    CHECK(fcobench("analyze-potential --traj " + traj + " --penetrations 0.1 --windows 2.5 --out x.csv", dir).code ==
          2);
    CHECK(fcobench("analyze-potential --traj " + traj + " --penetrations 0.1 --windows 500 --out x.csv", dir).code ==
          2);
    CHECK(fcobench("analyze-detectability --traj " + (dir / "nope.csv").string() + " --penetrations 0.1 --out x.csv",
                   dir)
              .code == 3);
    std::ofstream(dir / "junk.csv") << "t,id,x,y,heading,length,width,speed,is_fco\n0,1,a,b\n";
    CHECK(fcobench("analyze-detectability --traj " + (dir / "junk.csv").string() + " --penetrations 0.1 --out x.csv",
                   dir)
              .code == 3);
  }
}

TEST_CASE("cli: dataset, training and evaluation") {
  TempDir dir("cli_pipeline");
  write_config(dir / "c.cfg", "t_end = 30\n");
  REQUIRE(fcobench("run-sim --config " + (dir / "c.cfg").string() + " --count 3 --out " + (dir / "runs").string(), dir)
              .code == 0);
  REQUIRE(fcobench("make-dataset --runs " + (dir / "runs").string() + " --s 5 --grid 64 --split 1,1,1 --out " +
                       (dir / "ds").string(),
                   dir)
              .code == 0);
  const std::string ds = (dir / "ds").string();

  const auto oracle = fcobench("evaluate --data " + ds + " --enhancer oracle --out " + (dir / "o.csv").string(), dir);
  REQUIRE(oracle.code == 0);
  CHECK(oracle.out.find("\n1.000  ") != std::string::npos);
  const auto rows = csv_rows(dir / "o.csv");
  CHECK(rows.size() == 26);
  for (const auto& r : rows) CHECK(r[2] == "1");

  CHECK(fcobench("evaluate --data " + ds + " --enhancer model --out m.csv", dir).code == 2);
  CHECK(fcobench("evaluate --data " + ds + " --enhancer magic --out m.csv", dir).code == 2);
  CHECK(fcobench("evaluate --data " + ds + " --enhancer identity --tau 1.5 --out m.csv", dir).code == 2);
  CHECK(fcobench("evaluate --data " + (dir / "nothing").string() + " --enhancer identity --out m.csv", dir).code == 3);
  CHECK(fcobench("make-dataset --runs " + (dir / "runs").string() + " --s 5 --out " + (dir / "ds2").string(), dir)
            .code == 2);  // 3 runs < default 8/1/1
  CHECK(fcobench("make-dataset --runs " + (dir / "runs").string() + " --s 5 --grid 100 --out x", dir).code == 2);

  const auto trained = fcobench("train --data " + ds + " --out " + (dir / "p.txt").string() +
                                    " --epochs 2 --loss-out " + (dir / "loss.csv").string(),
                                dir);
  REQUIRE(trained.code == 0);
  CHECK(csv_rows(dir / "loss.csv").size() == 2);
  CHECK(slurp(dir / "p.txt").starts_with("6 5 2\n"));
  const auto model = fcobench("evaluate --data " + ds + " --enhancer model --params " + (dir / "p.txt").string() +
                                  " --out " + (dir / "m.csv").string(),
                              dir);
  CHECK(model.code == 0);
  CHECK(model.out.find("IoU    RVM    LVM    HPM") != std::string::npos);
}
