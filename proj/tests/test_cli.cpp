#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "hypflow/cli.hpp"
#include "hypflow/io.hpp"
#include "hypflow/triangulation.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace hypflow;

namespace {

fs::path workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "hypflow_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string at(const std::string& name) { return (workdir() / name).string(); }

int run(std::initializer_list<std::string> args) {
  std::vector<std::string> store{"hypflow"};
  store.insert(store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : store) argv.push_back(s.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const std::string& path, const io::json& doc) { io::write_json_file(path, doc); }

const std::string& census_path() {
  static const std::string path = [] {
    std::string p = at("census.json");
    REQUIRE(run({"search", "--tets", "2", "--out", at("search.json"), "--emit-first", p}) == 0);
    return p;
  }();
  return path;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("search emits the census instance") {
    census_path();
    auto doc = io::read_json_file(at("search.json"));
    CHECK(doc["count"] == 8);
    CHECK(io::gluing_from_json(io::read_json_file(census_path())) == census_two_tet());
    CHECK(doc["manifest"]["command"] == "search");
    CHECK_FALSE(doc["manifest"].contains("started"));
    CHECK(io::read_json_file(at("search.json.manifest.json")).contains("started"));
  }

  TEST_CASE("validate reports structure and exit codes") {
    CHECK(run({"validate", "--tri", census_path(), "--out", at("validate.json")}) == 0);
    auto rep = io::read_json_file(at("validate.json"));
    CHECK(rep["edges"][0]["valence"] == 12);
    CHECK(rep["boundary_hyperbolic"] == true);

    auto bad = io::read_json_file(census_path());
    bad["pairings"][0][4] = {1, 0, 2, 3};
    write(at("bad.json"), bad);
    CHECK(run({"validate", "--tri", at("bad.json")}) == cli::kInputError);

    std::ofstream(at("garbage.json")) << "{ not json";
    CHECK(run({"validate", "--tri", at("garbage.json")}) == cli::kInputError);
    CHECK(run({"validate", "--tri", at("missing.json")}) == cli::kInputError);

    auto torus = search_gluings(2, [](const Triangulation& t) { return !t.boundary_hyperbolic(); });
    REQUIRE_FALSE(torus.empty());
    write(at("torus.json"), io::gluing_to_json(torus.front()));
    CHECK(run({"validate", "--tri", at("torus.json")}) == cli::kBoundaryError);
    CHECK(run({"lp", "--tri", at("torus.json"), "--out", at("lp_torus.json")}) == cli::kBoundaryError);
  }

  TEST_CASE("minimize then flow converges immediately") {
    write(at("unit.json"), io::metric_to_json(Eigen::VectorXd::Ones(1)));
    REQUIRE(run({"minimize", "--tri", census_path(), "--metric", at("unit.json"), "--out", at("min.json")}) == 0);
    auto min = io::read_json_file(at("min.json"));
    CHECK(min["report"]["converged"] == true);
    CHECK(std::abs(min["lengths"][0].get<double>() - oracle::equilibrium_length()) < 1e-10);
    REQUIRE(run({"flow", "--tri", census_path(), "--metric", at("min.json"), "--out", at("flow_eq.json")}) == 0);
    auto st = io::read_json_file(at("flow_eq.json"));
    CHECK(st["status"] == "converged");
    CHECK(st["accepted_steps"] == 0);
  }

  TEST_CASE("flow writes a trace and maps statuses to exit codes") {
    write(at("unit.json"), io::metric_to_json(Eigen::VectorXd::Ones(1)));
    CHECK(run({"flow", "--tri", census_path(), "--metric", at("unit.json"), "--out", at("flow.json")}) == 0);
    std::string csv = slurp(at("flow.csv"));
    CHECK(csv.rfind("t,x_0,K_0,total_curv,H\n", 0) == 0);
    CHECK(run({"flow", "--tri", census_path(), "--metric", at("unit.json"), "--out", at("short.json"), "--t-max",
               "0.01"}) == cli::kTMaxReached);
    CHECK(run({"flow", "--tri", census_path(), "--metric", at("unit.json"), "--out", at("deg.json"), "--margin",
               "0.99"}) == cli::kDegenerated);
    write(at("neg.json"), io::metric_to_json(Eigen::VectorXd::Constant(1, -1.0)));
    CHECK(run({"flow", "--tri", census_path(), "--metric", at("neg.json"), "--out", at("neg_out.json")}) ==
          cli::kInadmissible);
    write(at("two.json"), io::metric_to_json(Eigen::VectorXd::Ones(2)));
    CHECK(run({"flow", "--tri", census_path(), "--metric", at("two.json"), "--out", at("two_out.json")}) ==
          cli::kInputError);
    CHECK(run({"flow", "--tri", census_path(), "--metric", at("unit.json"), "--out", at("m.json"), "--method",
               "euler"}) == cli::kInputError);
  }

  TEST_CASE("lp, volmax and shapes") {
    REQUIRE(run({"lp", "--tri", census_path(), "--out", at("lp.json")}) == 0);
    auto lp = io::read_json_file(at("lp.json"));
    CHECK(lp["feasible"] == true);
    CHECK(lp["epsilon"].get<double>() == doctest::Approx(oracle::kPi / 6));
    REQUIRE(run({"volmax", "--tri", census_path(), "--out", at("vol.json")}) == 0);
    auto vol = io::read_json_file(at("vol.json"));
    CHECK(std::abs(vol["report"]["edge_lengths"][0].get<double>() - oracle::equilibrium_length()) < 1e-6);
    write(at("unit.json"), io::metric_to_json(Eigen::VectorXd::Ones(1)));
    REQUIRE(run({"shapes", "--tri", census_path(), "--metric", at("unit.json"), "--out", at("shapes.json")}) == 0);
    auto sh = io::read_json_file(at("shapes.json"));
    CHECK(sh["tetrahedra"].size() == 2);
    CHECK(sh["rigidity"]["nonsingular"] == true);
  }

  TEST_CASE("seeded commands are byte-identical on rerun") {
    for (int k = 0; k < 2; ++k) {
      std::string tag = std::to_string(k);
      REQUIRE(run({"convexity", "--trials", "200", "--seed", "5", "--out", at("cv" + tag + ".json")}) == 0);
    }
    CHECK(slurp(at("cv0.json")) == slurp(at("cv1.json")));
    CHECK(io::read_json_file(at("cv0.json"))["witnesses_found"].get<int>() > 0);
  }

  TEST_CASE("metric JSON round trip keeps every bit") {
    Eigen::VectorXd x(3);
    x << 0.1, oracle::equilibrium_length(), 1.0 / 3.0;
    write(at("rt.json"), io::metric_to_json(x));
    Eigen::VectorXd back = io::metric_from_json(io::read_json_file(at("rt.json")));
    CHECK(back == x);
  }

  TEST_CASE("argument errors") {
    CHECK(run({"flow", "--tri", census_path()}) == cli::kInputError);
    CHECK(run({"search", "--tets", "3", "--out", at("s3.json")}) == cli::kInputError);
    CHECK(run({"search", "--predicate", "nonsense", "--out", at("s3.json")}) == cli::kInputError);
  }
}
