// End-to-end tests of the command-line front end, run in-process.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "sigfdr/io.hpp"
#include "sigfdr/simulate.hpp"

using namespace sigfdr;
using io::Json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("sigfdr_cli_" + std::to_string(::getpid()) + "_" + std::to_string(++counter));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  std::string file(const std::string& name, const std::string& content) const {
    const fs::path p = path_ / name;
    std::ofstream(p) << content;
    return p.string();
  }
  std::string path(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string column_file(const std::string& header, const std::vector<double>& values) {
  std::string s = header + "\n";
  for (double v : values) s += io::format_number(v) + "\n";
  return s;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    rows.push_back(fields);
  }
  return rows;
}

}  // namespace

TEST_CASE("fit: plugin HND reports s = 0.862") {
  TempDir dir;
  const std::string in = dir.file("z.csv", "id,z\na,0.5\nb,-2.0\nc,3.1\n");
  const Run r = run({"fit", "--input", in, "--kind", "hnd", "--mode", "plugin",
                     "--eta0", "0.8", "--sigma", "1"});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["command"] == "fit");
  CHECK(std::abs(j["fit"]["s_hat"].get<double>() - 0.862) <= 1e-3);
  CHECK(j["fit"]["eta0_hat"].get<double>() == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(j["fit"]["mode"] == "plugin");
  CHECK(j["rows"].size() == 3);
  CHECK(j["rows"][1]["raw"].get<double>() == -2.0);
}

TEST_CASE("fit: MLE on 5000 HND draws recovers eta0") {
  TempDir dir;
  const StatisticBatch b = sample_hnd(HndModel(0.862), 5000, 1);
  const std::string in = dir.file("z.csv", column_file("z", b.values));
  const Run r = run({"fit", "--input", in, "--kind", "hnd", "--mode", "mle"});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(std::abs(j["fit"]["eta0_hat"].get<double>() - 0.8) <= 0.05);
  CHECK(j["fit"]["converged"] == true);
  CHECK(j["fit"]["n_obs"] == 5000);
  CHECK(j["fit"]["log_likelihood"].is_number());

  const Run csv = run({"fit", "--input", in, "--format", "csv"});
  REQUIRE(csv.code == 0);
  const auto rows = parse_csv(csv.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][0] == "kind");
  CHECK(rows[1][0] == "hnd");
  CHECK(rows[1][1] == "mle");
}

TEST_CASE("fit: input errors exit 2 with a diagnostic") {
  TempDir dir;
  const std::string empty = dir.file("empty.csv", "");
  Run r = run({"fit", "--input", empty});
  CHECK(r.code == 2);
  CHECK(r.out.empty());
  CHECK(r.err.find("empty") != std::string::npos);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

  const std::string bad = dir.file("bad.csv", "z\n1.0\nabc\n");
  r = run({"fit", "--input", bad});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 3") != std::string::npos);

  const std::string few = dir.file("few.csv", "z\n1\n2\n3\n");
  CHECK(run({"fit", "--input", few}).code == 2);
  CHECK(run({"fit", "--input", few, "--mode", "plugin", "--eta0", "0.8"}).code == 2);
  CHECK(run({"fit", "--input", few, "--mode", "plugin", "--eta0", "1.0", "--sigma", "1"}).code == 2);
  CHECK(run({"fit", "--input", few, "--kind", "xyz"}).code == 2);
  CHECK(run({"fit", "--input", dir.path("missing.csv")}).code == 2);
  CHECK(run({"fit", "--input", few, "--scale", "q"}).code == 2);
  CHECK(run({"fit", "--input", few, "--scale", "p"}).code == 2);
  CHECK(run({"fit", "--bogus-flag"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("score: boundary rows") {
  TempDir dir;
  const std::string z = dir.file("z.csv", "z\n0\n1.862\n-1.862\n");
  Run r = run({"score", "--input", z, "--kind", "hnd", "--eta0", "0.8"});
  REQUIRE(r.code == 0);
  Json j = Json::parse(r.out);
  CHECK(j["rows"][0]["fdr"].get<double>() == 1.0);
  CHECK(std::abs(j["rows"][0]["Fdr"].get<double>() - 0.8) <= 1e-12);

  r = run({"score", "--input", z, "--kind", "hnd", "--s", "0.862", "--sigma", "1"});
  REQUIRE(r.code == 0);
  j = Json::parse(r.out);
  CHECK(std::abs(j["rows"][1]["fdr"].get<double>() - 0.60653) <= 1e-5);
  CHECK(j["rows"][1]["fdr"] == j["rows"][2]["fdr"]);
  CHECK(j["model"]["s"].get<double>() == 0.862);

  const std::string p = dir.file("p.csv", "p\n1\n0.05\n");
  r = run({"score", "--input", p, "--scale", "p", "--kind", "hnd", "--eta0", "0.8"});
  REQUIRE(r.code == 0);
  j = Json::parse(r.out);
  CHECK(j["rows"][0]["y"].get<double>() == 0.0);
  CHECK(j["rows"][0]["fdr"].get<double>() == 1.0);

  r = run({"score", "--input", p, "--scale", "p", "--kind", "bum", "--eta0", "0.8",
           "--format", "csv"});
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"row", "raw", "y", "fdr", "Fdr"});
  CHECK(rows[1][2] == "0");

  CHECK(run({"score", "--input", z, "--kind", "hnd"}).code == 2);
  CHECK(run({"score", "--input", z, "--kind", "hnd", "--eta0", "0.8", "--s", "1"}).code == 2);
  const std::string bad_p = dir.file("badp.csv", "p\n0.5\n1.5\n");
  r = run({"score", "--input", bad_p, "--scale", "p", "--eta0", "0.8"});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("score after plugin fit matches the library") {
  TempDir dir;
  const StatisticBatch b = generate(SimulationScenario::overlapping(), 0);
  const std::string in = dir.file("z.csv", column_file("z", b.values));
  for (const char* kind : {"hnd", "bum"}) {
    const Run fit = run({"fit", "--input", in, "--kind", kind, "--mode", "plugin",
                         "--eta0", "0.8", "--sigma", "2"});
    const Run score = run({"score", "--input", in, "--kind", kind, "--eta0", "0.8",
                           "--sigma", "2"});
    REQUIRE(fit.code == 0);
    REQUIRE(score.code == 0);
    const Json jf = Json::parse(fit.out);
    const Json js = Json::parse(score.out);
    const ModelKind k = std::string(kind) == "hnd" ? ModelKind::Hnd : ModelKind::Bum;
    const FitOutput lib =
        plugin_fit(k, 0.8, 2.0, io::read_statistics_file(in, StatisticScale::ZScore));
    CHECK(jf["rows"] == io::to_json(lib.table));
    CHECK(js["rows"] == jf["rows"]);
  }
}

TEST_CASE("curve: grid rows") {
  Run r = run({"curve", "--kind", "hnd", "--eta0", "0.8", "--scale", "z", "--grid", "601"});
  REQUIRE(r.code == 0);
  auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 602);
  CHECK(rows[0] == std::vector<std::string>{"x", "fdr", "Fdr", "f", "f0", "fA"});
  CHECK(rows[1][0] == "0");
  CHECK(std::stod(rows[1][1]) == 1.0);
  CHECK(std::abs(std::stod(rows[1][2]) - 0.8) <= 1e-12);
  CHECK(rows[601][0] == "6");
  const double hnd_at_2 = std::stod(rows[201][1]);
  CHECK(rows[201][0] == "2");

  r = run({"curve", "--kind", "bum", "--eta0", "0.8", "--scale", "z", "--grid", "601"});
  REQUIRE(r.code == 0);
  rows = parse_csv(r.out);
  CHECK(std::abs(hnd_at_2 - std::stod(rows[201][1])) > 0.05);

  r = run({"curve", "--kind", "bum", "--s", "1", "--scale", "p", "--grid", "100"});
  REQUIRE(r.code == 0);
  rows = parse_csv(r.out);
  REQUIRE(rows.size() == 101);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(rows[i][1]) == 1.0);
  CHECK(rows[1][0] == "0");
  CHECK(std::stod(rows[100][0]) == 0.99);

  // trapezoid mass of f over [0, 6] matches F(6); the rest sits in the tail
  r = run({"curve", "--kind", "hnd", "--eta0", "0.8", "--grid", "2001"});
  rows = parse_csv(r.out);
  double mass = 0.0;
  for (std::size_t i = 2; i < rows.size(); ++i) {
    mass += 0.5 * (std::stod(rows[i][3]) + std::stod(rows[i - 1][3])) * 0.003;
  }
  const double F6 = hnd_densities(HndModel(hnd_s_from_eta0(0.8)), 6.0).F;
  CHECK(std::abs(mass - F6) < 1e-5);

  r = run({"curve", "--kind", "hnd", "--eta0", "0.8", "--format", "json", "--grid", "5"});
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["points"].size() == 5);
  CHECK(run({"curve", "--kind", "hnd", "--eta0", "0.8", "--grid", "1"}).code == 2);
  CHECK(run({"curve", "--kind", "hnd", "--eta0", "0.8", "--scale", "w"}).code == 2);
}

TEST_CASE("simulate: deterministic output") {
  TempDir dir;
  const std::vector<std::string> args = {"simulate", "--preset", "separated", "--methods",
                                         "hnd-native", "--B", "20", "--seed", "7"};
  const Run a = run(args);
  const Run b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const Json j = Json::parse(a.out);
  CHECK(j["summary"]["scenario"]["B"] == 20);
  CHECK(j["summary"]["scenario"]["seed"] == 7);
  CHECK(j["summary"]["methods"][0]["per_rep"]["mae_fdr"].size() == 20);

  std::vector<std::string> with_table = args;
  with_table.insert(with_table.end(), {"--table", dir.path("reps.csv"), "--threads", "3"});
  const Run c = run(with_table);
  REQUIRE(c.code == 0);
  CHECK(c.out == a.out);
  std::ifstream t(dir.path("reps.csv"));
  std::stringstream ss;
  ss << t.rdbuf();
  const auto rows = parse_csv(ss.str());
  CHECK(rows.size() == 21);
  CHECK(rows[0][0] == "scenario");
  CHECK(rows[1][0] == "separated");

  const std::string sc = dir.file("sc.txt", "eta0 = 0.9\nm = 50\nB = 3\n");
  const Run d = run({"simulate", "--scenario", sc, "--methods", "truth,hnd-plugin",
                     "--format", "csv"});
  REQUIRE(d.code == 0);
  CHECK(parse_csv(d.out).size() == 7);

  CHECK(run({"simulate", "--preset", "nope"}).code == 2);
  CHECK(run({"simulate", "--methods", "foo", "--B", "2"}).code == 2);
  CHECK(run({"simulate", "--B", "0"}).code == 2);
}

TEST_CASE("simulate: BUM-native overestimates eta0, HND-native underestimates sigma") {
  Run r = run({"simulate", "--preset", "separated", "--methods", "bum-native", "--B", "100"});
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["summary"]["methods"][0]["eta0_hat"]["q50"].get<double>() > 0.8);
  r = run({"simulate", "--preset", "overlapping", "--methods", "hnd-native", "--B", "100"});
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["summary"]["methods"][0]["sigma_hat"]["q50"].get<double>() < 2.0);
}

TEST_CASE("--out writes atomically and never leaves partial files") {
  TempDir dir;
  const std::string in = dir.file("z.csv", "z\n0\n1\n2\n");
  const std::string dest = dir.path("scores.json");
  Run r = run({"score", "--input", in, "--eta0", "0.8", "--out", dest});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  REQUIRE(fs::exists(dest));
  CHECK_FALSE(fs::exists(dest + ".tmp"));
  std::ifstream f(dest);
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(Json::parse(ss.str())["rows"].size() == 3);

  const std::string bad = dir.file("bad.csv", "z\n0\nnope\n");
  const std::string dest2 = dir.path("never.json");
  r = run({"score", "--input", bad, "--eta0", "0.8", "--out", dest2});
  CHECK(r.code == 2);
  CHECK_FALSE(fs::exists(dest2));
  CHECK_FALSE(fs::exists(dest2 + ".tmp"));

  // an existing file survives a failed run untouched
  r = run({"score", "--input", bad, "--eta0", "0.8", "--out", dest});
  CHECK(r.code == 2);
  std::ifstream again(dest);
  std::stringstream ss2;
  ss2 << again.rdbuf();
  CHECK(ss2.str() == ss.str());
}

TEST_CASE("column selection") {
  TempDir dir;
  const std::string in = dir.file("t.tsv", "gene\tp\tz\ng1\t0.5\t1.0\ng2\t0.01\t-2.5\n");
  Run r = run({"score", "--input", in, "--eta0", "0.8", "--column", "z"});
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["rows"][1]["raw"].get<double>() == -2.5);
  r = run({"score", "--input", in, "--eta0", "0.8", "--scale", "p"});
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["rows"][1]["raw"].get<double>() == 0.01);
  CHECK(run({"score", "--input", in, "--eta0", "0.8", "--column", "q"}).code == 2);
}
