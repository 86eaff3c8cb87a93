#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fraisse/cli.hpp"
#include "fraisse/errors.hpp"
#include "fraisse/io.hpp"
#include "support.hpp"

using namespace fraisse;
using namespace fraisse::testing;
namespace fs = std::filesystem;

namespace {

const fs::path kData = FRAISSE_DATA_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "fraisse_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fraisse");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string data(const char* name) { return (kData / name).string(); }

}  // namespace

TEST_CASE("rational json") {
  Rational big{mpz_class("123456789012345678901234567891"), mpz_class(7)};
  big.canonicalize();
  REQUIRE(big.get_den() == 7);
  const auto j = io::rational_to_json(big);
  CHECK(j[0].is_string());
  CHECK(io::rational_from_json(j) == big);
  CHECK(io::rational_from_json(io::json::parse("[6, 4]")) == q(3, 2));
  CHECK(io::rational_from_json(io::json::parse("\"3/2\"")) == q(3, 2));
  CHECK(io::rational_from_json(io::json::parse("2")) == 2);
  CHECK_THROWS_AS(io::rational_from_json(io::json::parse("[1, 0]")), MalformedSpace);
  CHECK_THROWS_AS(io::rational_from_json(io::json::parse("1.5")), MalformedSpace);
  CHECK_THROWS_AS(io::rational_from_json(io::json::parse("\"x\"")), MalformedSpace);
}

TEST_CASE("space json") {
  const auto s = random_member(4, 3);
  CHECK(io::space_from_json(io::space_to_json(s)) == s);
  const auto flat = io::json::parse(R"({"labels":["a","b"],"sq_dist":["0","1","1","0"]})");
  CHECK(io::space_from_json(flat).sq(0, 1) == 1);
  const auto nested = io::json::parse(R"({"labels":["a","b"],"sq_dist":[[[0,1],[1,2]],[[1,2],[0,1]]]})");
  CHECK(io::space_from_json(nested).sq(0, 1) == q(1, 2));
  const auto one = io::json::parse(R"({"labels":["x"],"sq_dist":[["0"]]})");
  CHECK(io::space_from_json(one).size() == 1);
  CHECK_THROWS_AS(io::space_from_json(io::json::parse(R"({"labels":["a"]})")), MalformedSpace);
  CHECK_THROWS_AS(io::space_from_json(io::json::parse(R"({"labels":["a","b"],"sq_dist":["0","1","1"]})")),
                  MalformedSpace);
  CHECK_THROWS_AS(io::read_space_file(data("asymmetric.json")), MalformedSpace);
  CHECK_THROWS_AS(io::read_space_file("/nonexistent/space.json"), MalformedSpace);
  CHECK(io::space_hash(s) == io::space_hash(io::space_from_json(io::space_to_json(s))));
}

TEST_CASE("sha256") {
  CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("certify command") {
  const auto dir = scratch("certify");
  auto r = run_cli({"certify", data("equilateral.json"), "--out", (dir / "eq").string()});
  CHECK(r.code == 0);
  const auto cert = io::read_json_file(dir / "eq" / "certificate.json");
  CHECK(cert["member"] == true);
  CHECK(io::rational_from_json(cert["pivots"][1]) == q(3, 4));
  CHECK(io::rational_from_json(cert["pivots"][2]) == q(2, 3));
  CHECK(cert.contains("config_hash"));
  CHECK(cert["seed"] == 0);

  r = run_cli({"certify", data("antipodal.json"), "--out", (dir / "anti").string()});
  CHECK(r.code == 2);
  const auto rej = io::read_json_file(dir / "anti" / "certificate.json");
  CHECK(io::rational_from_json(rej["leading_minor"]) == 0);

  CHECK(run_cli({"certify", data("asymmetric.json"), "--out", (dir / "bad").string()}).code == 1);
  CHECK(run_cli({"certify", "/nonexistent.json", "--out", (dir / "none").string()}).code == 1);
  CHECK(run_cli({"certify", "--out", (dir / "noinput").string()}).code == 1);
  CHECK(run_cli({"frobnicate"}).code == 1);
  CHECK(run_cli({"certify", data("equilateral.json"), "--seed", "notanumber"}).code == 1);
}

TEST_CASE("mixing command") {
  const auto dir = scratch("mixing");
  auto r = run_cli({"mixing", data("point.json"), "--k", "2,4,8", "--samples", "100000", "--out",
                    (dir / "a").string()});
  REQUIRE(r.code == 0);
  std::istringstream csv(slurp(dir / "a" / "mixing.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line.rfind("# config_hash=", 0) == 0);
  std::getline(csv, line);
  CHECK(line == "k,joint,product,kl,tv_bound");
  std::vector<double> kls;
  while (std::getline(csv, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 5);
    kls.push_back(std::stod(cells[3]));
  }
  REQUIRE(kls.size() == 3);
  CHECK(kls[0] > kls[1]);
  CHECK(kls[1] > kls[2]);

  r = run_cli({"mixing", data("point.json"), "--k", "", "--out", (dir / "empty").string()});
  CHECK(r.code == 0);
  const std::string empty = slurp(dir / "empty" / "mixing.csv");
  CHECK(empty.substr(empty.find('\n') + 1) == "k,joint,product,kl,tv_bound\n");

  CHECK(run_cli({"mixing", data("point.json"), "--event", "3>0", "--out", (dir / "bad").string()}).code == 1);
  CHECK(run_cli({"mixing", data("point.json"), "--event", "zero", "--out", (dir / "bad2").string()}).code == 1);
}

TEST_CASE("orders command") {
  const auto dir = scratch("orders");
  auto r = run_cli({"orders", data("isoceles.json"), "--out", (dir / "iso").string()});
  CHECK(r.code == 2);
  CHECK(r.out.find("REJECT uniform (p < 1e-3)") != std::string::npos);
  const auto rep = io::read_json_file(dir / "iso" / "orders.json");
  CHECK(rep["probs"].size() == 6);
  CHECK(rep.contains("space_hash"));
  CHECK(rep["full_support"] == true);

  r = run_cli({"orders", data("equilateral.json"), "--out", (dir / "eq").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("no evidence against uniform") != std::string::npos);

  r = run_cli({"orders", data("point.json"), "--out", (dir / "one").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("degenerate") != std::string::npos);
}

TEST_CASE("config file with flag overrides") {
  const auto dir = scratch("config");
  const io::json cfg{{"inputs", {data("equilateral.json")}},
                     {"seed", 5},
                     {"samples", 10},
                     {"out", (dir / "from_file").string()}};
  io::write_json_file(dir / "cfg.json", cfg);
  auto r = run_cli({"sample", "--config", (dir / "cfg.json").string()});
  REQUIRE(r.code == 0);
  auto used = io::read_json_file(dir / "from_file" / "config.json");
  CHECK(used["seed"] == 5);
  CHECK(used["samples"] == 10);

  r = run_cli({"sample", "--config", (dir / "cfg.json").string(), "--seed", "6", "--out", (dir / "flag").string()});
  REQUIRE(r.code == 0);
  used = io::read_json_file(dir / "flag" / "config.json");
  CHECK(used["seed"] == 6);
  CHECK(used["samples"] == 10);
  CHECK(slurp(dir / "flag" / "samples.csv") != slurp(dir / "from_file" / "samples.csv"));

  cli::ExperimentConfig a;
  a.command = "sample";
  cli::ExperimentConfig b = a;
  b.out = "elsewhere";
  CHECK(a.hash() == b.hash());
  b.seed = 1;
  CHECK(a.hash() != b.hash());
  CHECK(cli::ExperimentConfig::from_json(a.to_json()).hash() == a.hash());
}

TEST_CASE("every command is reproducible") {
  const std::vector<std::vector<std::string>> commands = {
      {"certify", data("isoceles.json")},
      {"embed", data("isoceles.json")},
      {"amalgamate", data("equilateral.json"), data("isoceles.json"), "--common-left", "0,1", "--common-right", "2,0"},
      {"grow", "--stages", "4", "--per-stage", "2", "--seed", "3"},
      {"witness", data("equilateral.json"), "--type", "1,1,1", "--kind", "theta"},
      {"witness", data("equilateral.json"), "--type", "1,1,1", "--kind", "connect", "--seed", "4"},
      {"witness", data("isoceles.json"), "--type", "1,1,3/2", "--kind", "chain", "--step", "1/10"},
      {"sample", data("isoceles.json"), "--samples", "1000", "--seed", "9"},
      {"mixing", data("point.json"), "--k", "2,4", "--samples", "20000"},
      {"orders", data("isoceles.json"), "--samples", "20000"},
  };
  int i = 0;
  for (auto cmd : commands) {
    const auto dir = scratch("repro" + std::to_string(i++));
    std::vector<fs::path> outs{dir / "a", dir / "b"};
    std::vector<int> codes;
    for (const auto& o : outs) {
      auto args = cmd;
      args.push_back("--out");
      args.push_back(o.string());
      codes.push_back(run_cli(args).code);
    }
    CAPTURE(cmd[0]);
    CHECK(codes[0] != 1);
    CHECK(codes[0] == codes[1]);
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(outs[0])) {
      if (!e.is_regular_file()) continue;
      ++files;
      const auto rel = fs::relative(e.path(), outs[0]);
      CHECK(slurp(e.path()) == slurp(outs[1] / rel));
      if (e.path().extension() == ".json") CHECK(slurp(e.path()).find("config_hash") != std::string::npos);
    }
    CHECK(files >= 2);
  }
}
