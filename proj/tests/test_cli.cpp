#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = bgw::cli::parse_and_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) v.push_back(line);
  return v;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> v;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) v.push_back(f);
  return v;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("bgwf_test_" + name);
}

}  // namespace

TEST_CASE("llt row for catalan n=101") {
  const auto r = run({"llt", "--family", "catalan", "--n", "101"});
  CHECK(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 2);
  CHECK(l[0] == "mode,family,gamma,kappa,n,R,alpha_prime,beta,estimate,stderr,theory,zscore,drops,seed");
  const auto f = fields(l[1]);
  REQUIRE(f.size() == 14);
  CHECK(f[0] == "llt");
  CHECK(f[4] == "101");
  CHECK(std::stod(f[10]) == doctest::Approx(0.398942).epsilon(1e-6));
  CHECK(std::stod(f[8]) == doctest::Approx(0.398942).epsilon(0.01));
  // llt is exact: no seed line
  CHECK(r.err.find("seed:") == std::string::npos);
}

TEST_CASE("moment row carries the Brownian theory value") {
  const auto r = run({"moment", "--family", "catalan", "--n", "1001", "--R", "50", "--alpha-prime", "2", "--beta",
                      "0", "--seed", "42"});
  CHECK((r.code == 0 || r.code == 2));
  const auto l = lines(r.out);
  REQUIRE(l.size() == 2);
  const auto f = fields(l[1]);
  CHECK(std::stod(f[10]) == doctest::Approx(0.626657).epsilon(1e-6));
  CHECK(f[13] == "42");
  CHECK(r.err.find("seed: 42") != std::string::npos);
}

TEST_CASE("selftest") {
  const auto r = run({"selftest"});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("checks passed") != std::string::npos);
}

TEST_CASE("usage errors exit 64") {
  CHECK(run({"moment", "--n", "101", "--bogus", "1"}).code == bgw::cli::kExitUsage);
  CHECK(run({"nope"}).code == bgw::cli::kExitUsage);
  CHECK(run({}).code == bgw::cli::kExitUsage);
  CHECK(run({"moment", "--family", "catalan", "--n", "10000", "--R", "10", "--seed", "1"}).code == 64);
  CHECK(run({"moment", "--n", "101", "--R", "1", "--seed", "1"}).code == 64);
  CHECK(run({"phase-scan", "--n", "101,1001,10001", "--max-contraction", "1.5"}).code == 64);
  CHECK(run({"moment", "--family", "poisson", "--n", "101"}).code == 64);
  CHECK(run({"moment", "--n", "101", "--workers", "0"}).code == 64);
  CHECK(run({"moment", "--config", temp_file("missing.json").string()}).code == 64);
}

TEST_CASE("auto-generated seed is printed") {
  const auto r = run({"sample", "--n", "7"});
  CHECK(r.code == 0);
  CHECK(r.err.rfind("seed: ", 0) == 0);
  const auto again = run({"sample", "--n", "7", "--seed", r.err.substr(6, r.err.find('\n') - 6)});
  CHECK(again.out == r.out);
}

TEST_CASE("config round trip and flag precedence") {
  const auto cfg = temp_file("config.json");
  {
    std::ofstream f(cfg);
    f << R"({"family": "geometric", "n": [51, 101], "R": 30, "seed": 5, "alpha-prime": [1.5], "beta": [0.5]})";
  }
  const auto first = run({"moment", "--config", cfg.string(), "--print-config"});
  REQUIRE(first.code == 0);
  const auto j = nlohmann::json::parse(first.out);
  CHECK(j["family"] == "geometric");
  CHECK(j["seed"] == 5);
  CHECK(j["R"] == 30);
  CHECK(j["n"] == nlohmann::json::array({51, 101}));

  // echoed config reparses to the same config
  const auto echoed = temp_file("echoed.json");
  {
    std::ofstream f(echoed);
    f << first.out;
  }
  const auto second = run({"moment", "--config", echoed.string(), "--print-config"});
  REQUIRE(second.code == 0);
  CHECK(nlohmann::json::parse(second.out) == j);

  // flags override the file
  const auto over = run({"moment", "--config", cfg.string(), "--seed", "6", "--R", "40", "--print-config"});
  const auto jo = nlohmann::json::parse(over.out);
  CHECK(jo["seed"] == 6);
  CHECK(jo["R"] == 40);
  CHECK(jo["family"] == "geometric");

  // same run from the file and from flags
  const auto from_file = run({"moment", "--config", cfg.string()});
  const auto from_flags = run({"moment", "--family", "geometric", "--n", "51,101", "--R", "30", "--seed", "5",
                               "--alpha-prime", "1.5", "--beta", "0.5"});
  CHECK(from_file.out == from_flags.out);
  CHECK(!from_file.out.empty());

  {
    std::ofstream f(cfg);
    f << R"({"family": "catalan", "nested": {"n": 3}})";
  }
  CHECK(run({"moment", "--config", cfg.string()}).code == 64);
  {
    std::ofstream f(cfg);
    f << R"({"colour": "blue"})";
  }
  CHECK(run({"moment", "--config", cfg.string()}).code == 64);
  std::filesystem::remove(cfg);
  std::filesystem::remove(echoed);
}

TEST_CASE("output is identical across worker counts") {
  const std::vector<std::string> base{"moment", "--n", "101,1001", "--R", "120", "--alpha-prime", "1,2",
                                      "--beta", "0,0", "--seed", "9"};
  auto with = [&](const std::string& w) {
    auto a = base;
    a.insert(a.end(), {"--workers", w});
    return run(a).out;
  };
  const auto one = with("1");
  CHECK(with("3") == one);
  CHECK(with("8") == one);

  auto continuum = [](const std::string& w) {
    return run({"continuum", "--m", "400", "--R", "20", "--seed", "3", "--workers", w}).out;
  };
  CHECK(continuum("1") == continuum("4"));

  // BGWF_WORKERS supplies the default
  ::setenv("BGWF_WORKERS", "4", 1);
  const auto cfg = run({"moment", "--n", "101", "--print-config"});
  CHECK(nlohmann::json::parse(cfg.out)["workers"] == 4);
  CHECK(run(base).out == one);
  ::unsetenv("BGWF_WORKERS");
}

TEST_CASE("json output mirrors csv keys") {
  const auto r = run({"moment", "--n", "101", "--R", "20", "--seed", "1", "--format", "json"});
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j["rows"].size() == 1);
  for (const char* key : {"mode", "family", "gamma", "kappa", "n", "R", "alpha_prime", "beta", "estimate", "stderr",
                          "theory", "zscore", "drops", "seed"}) {
    CHECK(j["rows"][0].contains(key));
  }
}

TEST_CASE("out file and other subcommands") {
  const auto path = temp_file("out.csv");
  CHECK(run({"height-moments", "--n", "101,1001", "--R", "20", "--seed", "2", "--out", path.string()}).code != 64);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("mode,family", 0) == 0);
  std::filesystem::remove(path);

  const auto f = run({"functional", "--n", "101", "--seed", "4"});
  CHECK(f.code == 0);
  CHECK(f.out.find("tv_ok,1") != std::string::npos);
  CHECK(f.out.find("mass_bound_ok,1") != std::string::npos);
  CHECK(run({"tail", "--n", "101", "--R", "200", "--seed", "4"}).code != 64);
}

#ifdef BGWF_EXE
TEST_CASE("executable exit codes") {
  const std::string exe = BGWF_EXE;
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(s);
  };
  CHECK(status(exe + " selftest") == 0);
  CHECK(status(exe + " moment --n 101 --bogus") == 64);
  CHECK(status(exe + " llt --family catalan --n 101") == 0);
}
#endif
