#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tcrisk/cli.hpp"
#include "tcrisk/errors.hpp"
#include "tcrisk/io.hpp"

using namespace tcrisk;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tcrisk_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& path, const io::json& j) { std::ofstream(path) << j.dump(); }

bool has(const std::string& s, const std::string& needle) { return s.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("market round trip is bit-exact") {
  const MarketModel market = s4_market();
  const MarketModel back = io::market_from_json(io::json::parse(io::to_json(market).dump()));
  CHECK(back.tree.size() == market.tree.size());
  CHECK(back.initial_wealth == market.initial_wealth);
  for (int t = 0; t <= 3; ++t) {
    CHECK(back.prices[static_cast<std::size_t>(t)] == market.prices[static_cast<std::size_t>(t)]);
    for (Index k = 0; k < market.tree.level_size(t); ++k) CHECK(back.tree.node(t, k).id == market.tree.node(t, k).id);
  }
}

TEST_CASE("s4 increments and initial price") {
  const MarketModel market = s4_market();
  CHECK(market.prices[0](0, 0) == 20.0);
  CHECK(market.increments(0)(market.tree.find("ru").slot - 0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(market.increments(1)(market.tree.find("rud").slot, 0) == doctest::Approx(-10.0).epsilon(1e-14));
  CHECK(market.increments(2)(market.tree.find("rudu").slot, 0) == doctest::Approx(100.0).epsilon(1e-14));
  for (const auto& n : market.tree.level(3)) CHECK(n.branch_prob == 0.5);
}

TEST_CASE("malformed documents are input errors") {
  CHECK_THROWS_AS(io::tree_spec_from_json(io::json::parse(R"({"nodes": []})")), InputError);
  CHECK_THROWS_AS(io::operator_from_json(io::json::parse(R"({"kind": "cubic"})")), InputError);
  CHECK_THROWS_AS(io::value_function_from_json(io::json::parse(R"({"variant": "simple", "m": 0,
                    "operator": {"kind": "linear"}})")),
                  InputError);
  CHECK_THROWS_AS(io::load_json_file("/nonexistent/tcrisk.json"), InputError);
}

TEST_CASE("operator configs") {
  const auto p10 = io::operator_from_json(io::json::parse(R"({"kind": "entropic", "gamma": 10, "kappa": "paper10"})"));
  CHECK(p10.kappa == doctest::Approx(10.0 / std::log(10.0)));
  const auto std_op = io::operator_from_json(io::json::parse(R"({"kind": "entropic", "gamma": 4})"));
  CHECK(std_op.kappa == 4.0);
  CHECK(io::operator_from_json(io::json::parse(R"({"kind": "linear"})")).is_linear());
}

TEST_CASE("cli reproduces the s4 example") {
  const Run simple = invoke({"run", "--example", "s4", "--operator", "paper10", "--mode", "simple"});
  CHECK(simple.code == 1);
  CHECK(has(simple.out, "0.1889"));
  CHECK(has(simple.out, "-2.4926"));
  CHECK(has(simple.out, "verdict: INCONSISTENT"));

  const Run modified = invoke({"run", "--example", "s4", "--mode", "modified"});
  CHECK(modified.code == 0);
  CHECK(has(modified.out, "0.1889"));
  CHECK(has(modified.out, "0.4741"));
  CHECK(has(modified.out, "verdict: DEPENDABLE"));
}

TEST_CASE("cli run on exported files and a singleton space") {
  const fs::path dir = scratch("run");
  const Run exported = invoke({"export-example", "--example", "s4", "--out-dir", dir.string()});
  REQUIRE(exported.code == 0);
  const Run from_files = invoke({"run", "--market", (dir / "s4_market.json").string(), "--space",
                              (dir / "s4_space.json").string(), "--paper10"});
  CHECK(from_files.code == 1);
  CHECK(has(from_files.out, "-2.4926"));

  const io::json policy = io::load_json_file((dir / "s4_policy.json").string());
  write(dir / "single.json", {{"policies", io::json::array({policy})}});
  const Run single = invoke({"run", "--market", (dir / "s4_market.json").string(), "--space",
                          (dir / "single.json").string(), "--paper10"});
  CHECK(single.code == 0);
  CHECK(has(single.out, "verdict: CONSISTENT"));

  write(dir / "vf.json", {{"variant", "modified"}, {"m", 2}, {"operator", {{"kind", "paper10"}}}});
  const Run vf = invoke({"run", "--market", (dir / "s4_market.json").string(), "--space", (dir / "s4_space.json").string(),
                      "--vf", (dir / "vf.json").string()});
  CHECK(vf.code == 0);
  CHECK(has(vf.out, "0.4741"));
}

TEST_CASE("cli axiom checks") {
  const Run standard = invoke({"check-axioms", "--depth", "4", "--operator", "entropic", "--gamma", "10", "--seed", "3"});
  CHECK(standard.code == 0);
  const Run example = invoke({"check-axioms", "--example", "s4"});
  CHECK(example.code == 0);
  const Run linear = invoke({"check-axioms", "--depth", "3", "--operator", "linear"});
  CHECK(linear.code == 0);
  const Run base10 = invoke({"check-axioms", "--depth", "3", "--paper10"});
  CHECK(base10.code == 1);
  CHECK(has(base10.out, "constant_invariance: FAIL"));
  CHECK(has(base10.out, "counterexample"));
}

TEST_CASE("cli acceptability") {
  const Run s4 = invoke({"acceptability", "--example", "s4", "--m", "2"});
  CHECK(s4.code == 0);
  CHECK(has(s4.out, "0.4741 >= V~_0(X^0) = 0.1889"));

  const fs::path dir = scratch("accept");
  REQUIRE(invoke({"export-example", "--example", "s4", "--out-dir", dir.string()}).code == 0);
  const MarketModel market = s4_market();
  write(dir / "zero.json", io::to_json(market.tree, zero_policy(market.tree, 1)));
  const Run zero = invoke({"acceptability", "--market", (dir / "s4_market.json").string(), "--policy",
                        (dir / "zero.json").string()});
  CHECK(zero.code == 0);
  CHECK(has(zero.out, "V~_0(X^) = 0.0000 >= V~_0(X^0) = 0.0000 >= V~_0(I[0,m[ x) = 0.0000"));

  const Run capped = invoke({"acceptability", "--market", (dir / "s4_market.json").string(), "--policy",
                          (dir / "s4_policy.json").string(), "--cap", "10"});
  CHECK(capped.code == 2);
  CHECK(has(capped.err, "cap of 10"));
}

TEST_CASE("cli input errors exit with 2") {
  CHECK(invoke({"run", "--market", "/nonexistent.json", "--space", "/nonexistent.json"}).code == 2);
  CHECK(invoke({"run", "--example", "s9"}).code == 2);
  CHECK(invoke({"run", "--example", "s4", "--m", "0"}).code == 2);
  CHECK(invoke({"run", "--example", "s4", "--mode", "other"}).code == 2);
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("structured output is deterministic and versioned") {
  const std::vector<std::string> args{"run", "--example", "s4", "--format", "structured"};
  const Run a = invoke(args);
  const Run b = invoke(args);
  CHECK(a.out == b.out);
  const io::json j = io::json::parse(a.out);
  CHECK(j.at("schema") == io::kReportSchema);
  CHECK(j.at("verdict") == false);
  CHECK(j.at("check") == "time_consistency");
  CHECK(j.at("per_time").size() == 3);

  const std::vector<std::string> axioms{"check-axioms", "--depth", "3", "--paper10", "--format", "structured",
                                        "--seed", "9"};
  CHECK(invoke(axioms).out == invoke(axioms).out);
}

TEST_CASE("cli monotonicity") {
  const Run simple = invoke({"monotonicity", "--example", "s4", "--m", "2"});
  CHECK(simple.code == 1);
  CHECK(has(simple.out, "witness"));
  const Run terminal = invoke({"monotonicity", "--example", "s4", "--mode", "terminal"});
  CHECK(terminal.code == 0);
}
