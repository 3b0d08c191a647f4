#include <doctest.h>

#include <cstdlib>
#include <map>
#include <string>

#include "cdrmig/pipeline.hpp"
#include "cdrmig/textio.hpp"
#include "tmpdir.hpp"

using namespace cdrmig;
namespace fs = std::filesystem;

namespace {

int cli(const std::string &args, const fs::path &log) {
  const std::string cmd = std::string(CDRMIG_CLI) + " " + args + " >" + log.string() + " 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string contents(const fs::path &p) {
  LineReader r(p);
  std::string line, out;
  while (r.next(line)) out += line + "\n";
  return out;
}

std::map<std::string, std::string> report(const fs::path &p) {
  std::map<std::string, std::string> out;
  LineReader r(p);
  std::string line;
  while (r.next(line)) {
    auto eq = line.find('=');
    if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

int64_t num(const std::map<std::string, std::string> &r, const std::string &key) {
  REQUIRE(r.count(key));
  return std::stoll(r.at(key));
}

struct Corpus {
  testutil::TempDir dir;
  Corpus() {
    REQUIRE(cli("synth --set agents=60 --set day_dropout=0.1 --set gap_rate=0.005 --out-dir " +
                    (dir / "syn").string(),
                dir / "log") == 0);
  }
  std::string p(const std::string &name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("dataset names") {
  CHECK(dataset_name(false, "A", 20) == "unweighted_A_20days.csv.gz");
  CHECK(dataset_name(true, "B", 60) == "weighted_B_60days.csv.gz");
}

TEST_CASE("staged commands reproduce the end-to-end run") {
  Corpus c;
  const auto syn = c.p("syn");
  REQUIRE(cli("run --cdr " + syn + "/cdr.csv.gz --towers " + syn + "/towers.csv --cell-population " + syn +
                  "/cells.csv --out-dir " + c.p("run"),
              c.dir / "log") == 0);
  REQUIRE(cli("network --towers " + syn + "/towers.csv --out-dir " + c.p("net"), c.dir / "log") == 0);
  const auto net = " --network " + c.p("net") + "/network.csv --regions " + c.p("net") + "/regions.csv";
  REQUIRE(cli("ingest --network " + c.p("net") + "/network.csv --cdr " + syn + "/cdr.csv.gz --out-dir " + c.p("ing"),
              c.dir / "log") == 0);
  REQUIRE(cli("filter --daily " + c.p("ing") + "/daily.csv.gz --profiles " + c.p("ing") +
                  "/profiles.csv --subset A --out " + c.p("a.csv.gz"),
              c.dir / "log") == 0);
  REQUIRE(cli("detect --daily " + c.p("a.csv.gz") + " --out " + c.p("seg.csv.gz"), c.dir / "log") == 0);
  REQUIRE(cli("aggregate" + net + " --segments " + c.p("seg.csv.gz") + " --tau 20 --outcomes " + c.p("out.csv.gz") +
                  " --out " + c.p("u.csv.gz"),
              c.dir / "log") == 0);
  REQUIRE(cli("weight" + net + " --outcomes " + c.p("out.csv.gz") + " --cell-population " + syn +
                  "/cells.csv --out " + c.p("w.csv.gz"),
              c.dir / "log") == 0);

  CHECK(contents(c.dir / "u.csv.gz") == contents(c.dir / "run" / "unweighted_A_20days.csv.gz"));
  CHECK(contents(c.dir / "w.csv.gz") == contents(c.dir / "run" / "weighted_A_20days.csv.gz"));
  CHECK(contents(c.dir / "ing" / "ingest_report.txt").size() > 0);

  for (const char *s : {"A", "B"})
    for (int tau : {20, 30, 60})
      for (bool w : {false, true}) CHECK(fs::exists(c.dir / "run" / dataset_name(w, s, tau)));

  // Report reconciliation.
  auto r = report(c.dir / "run" / "run_report.txt");
  CHECK(num(r, "lines") == num(r, "malformed_lines") + num(r, "unknown_tower_records") + num(r, "accepted_records"));
  for (const char *s : {"A", "B"}) {
    const std::string k = std::string("subset_") + s;
    CHECK(num(r, k + "_users_kept") + num(r, k + "_users_filtered") == num(r, "users_in") - num(r, "bots"));
  }
  CHECK(num(r, "users_in") == 60);
}

TEST_CASE("configuration errors exit with 2") {
  testutil::TempDir dir;
  CHECK(cli("run --cdr x.csv --out-dir " + (dir / "o").string(), dir / "log") == 2);
  CHECK(cli("frobnicate", dir / "log") == 2);
  CHECK(cli("aggregate --network a --regions b --segments c --outcomes d --out e --confidence medium", dir / "log") ==
        2);
  CHECK(cli("synth --set agents=-1 --out-dir " + (dir / "s").string(), dir / "log") == 2);
}

TEST_CASE("data errors exit with 3") {
  testutil::TempDir dir;
  testutil::write_file(dir / "towers.csv", "tower_id,x,y\nT1,0\n");
  CHECK(cli("network --towers " + (dir / "towers.csv").string() + " --out-dir " + (dir / "n").string(),
            dir / "log") == 3);
  CHECK(cli("network --towers " + (dir / "missing.csv").string() + " --out-dir " + (dir / "n").string(),
            dir / "log") == 3);
  testutil::write_file(dir / "t2.csv", "tower_id,x,y\nT1,0,0\n");
  testutil::write_file(dir / "cdr.csv", "u1,1357040000,T1\n");
  CHECK(cli("run --cdr " + (dir / "cdr.csv").string() + " --towers " + (dir / "t2.csv").string() + " --cell-population " +
                (dir / "missing.csv").string() + " --out-dir " + (dir / "o").string(),
            dir / "log") == 3);
  CHECK_FALSE(fs::exists(dir / "o" / "run_report.txt"));
}
