// Copyright 2026 The twoslit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include "twoslit/cli.hpp"

using namespace twoslit;
using namespace twoslit::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "twoslit");
  std::vector<const char *> argv;
  for (const auto &a : args) {
    argv.push_back(a.c_str());
  }
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv(const std::string &text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> row;
    std::istringstream cells(line);
    for (std::string cell; std::getline(cells, cell, ',');) {
      row.push_back(cell);
    }
    rows.push_back(row);
  }
  return rows;
}

/// Sum of the probability column over rows whose outcome contains `needle`.
double marginal(const std::string &text, const std::string &needle) {
  double total = 0.0;
  const auto rows = csv(text);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k][0].find(needle) != std::string::npos) {
      total += std::stod(rows[k][1]);
    }
  }
  return total;
}

std::filesystem::path temp_file(const std::string &name) {
  return std::filesystem::temp_directory_path() / ("twoslit_test_" + std::to_string(::getpid()) + "_" + name);
}

class ScopedEnv {
public:
  ScopedEnv(const char *name, const char *value) : name_(name) {
    if (const char *old = std::getenv(name)) {
      old_ = old;
    }
    ::setenv(name, value, 1);
  }
  ~ScopedEnv() {
    if (old_) {
      ::setenv(name_, old_->c_str(), 1);
    } else {
      ::unsetenv(name_);
    }
  }

private:
  const char *name_;
  std::optional<std::string> old_;
};

} // namespace

TEST(Format, TwelveSignificantDigits) {
  EXPECT_EQ(fmt(0.5), "0.5");
  EXPECT_EQ(fmt(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(fmt(1.0), "1");
  EXPECT_EQ(fmt(-2.5e21), "-2.5e+21");
}

TEST(Exact, DoubleSlitCsv) {
  const auto r = invoke({"exact", "--scenario", "double-slit", "--format", "csv"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "outcome,probability\nscreen=A,1\nscreen=B,0\n");
}

TEST(Exact, DoubleSlitTable) {
  const auto r = invoke({"exact", "--scenario", "double-slit"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("screen=A"), std::string::npos);
  EXPECT_EQ(r.out.find(','), std::string::npos);
}

TEST(Exact, RealBombFourCells) {
  const auto r = invoke({"exact", "--scenario", "bomb", "--bomb", "real", "--format", "csv"});
  ASSERT_EQ(r.code, 0);
  const auto rows = csv(r.out);
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k][1], "0.25") << rows[k][0];
  }
}

TEST(Exact, WhichPathOverlap) {
  const auto r = invoke({"exact", "--scenario", "which-path", "--epsilon", "0.2", "--format", "csv"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NEAR(marginal(r.out, "screen=A"), 0.6, 1e-12);
}

TEST(Run, DoubleSlitTenTrials) {
  const auto r = invoke({"run", "--scenario", "double-slit", "--trials", "10", "--format", "csv"});
  ASSERT_EQ(r.code, 0);
  const auto rows = csv(r.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"outcome", "count", "freq", "ci95", "exact", "z", "pass"}));
  EXPECT_EQ(rows[1][0], "screen=A");
  EXPECT_EQ(rows[1][1], "10");
  EXPECT_EQ(rows[2][1], "0");
  EXPECT_EQ(rows[1][6], "yes");
}

TEST(Run, WhichPathCollapseAllPass) {
  const auto r = invoke({"run", "--scenario", "which-path", "--policy", "collapse", "--trials", "100000", "--seed",
                      "42"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("sigma: yes"), std::string::npos) << r.out;
}

TEST(Run, SeedPrecedence) {
  const std::vector<std::string> base{"run", "--scenario", "single-slit-left", "--trials", "2000", "--format", "csv"};
  auto with_seed = base;
  with_seed.insert(with_seed.end(), {"--seed", "5"});
  std::string env5, env6, flag5;
  {
    ScopedEnv e("SIM_SEED", "5");
    env5 = invoke(base).out;
    EXPECT_EQ(env5, invoke(base).out);
  }
  {
    ScopedEnv e("SIM_SEED", "6");
    env6 = invoke(base).out;
    flag5 = invoke(with_seed).out;
  }
  EXPECT_NE(env5, env6);
  EXPECT_EQ(env5, flag5);
  {
    ScopedEnv e("SIM_SEED", "banana");
    EXPECT_EQ(invoke(base).code, 2);
  }
}

TEST(BombProtocol, RealFractions) {
  const auto r = invoke({"bomb-protocol", "--bomb", "real", "--bombs", "20000", "--max-rounds", "50", "--seed", "7",
                      "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1][0], "verdict=Exploded");
  EXPECT_EQ(rows[2][0], "verdict=CertifiedGood");
  EXPECT_NEAR(std::stod(rows[2][2]), 1.0 / 3.0, 5.0 * std::sqrt(2.0 / 9.0 / 20000));
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k][6], "yes");
  }
}

TEST(BombProtocol, RejectsOtherScenario) {
  EXPECT_EQ(invoke({"bomb-protocol", "--scenario", "double-slit"}).code, 2);
}

TEST(Sweep, DecoherenceWithThreshold) {
  const auto r = invoke({"sweep", "--scenario", "decoherence", "--lambda", "1", "--policy", "threshold", "--tau-star",
                      "2", "--tau", "0:5:0.1", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv(r.out);
  ASSERT_EQ(rows.size(), 52u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"tau", "p_A_exact_unitary", "p_A_exact_policy", "p_B_exact_unitary",
                                               "c_tau"}));
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double tau = std::stod(rows[k][0]);
    EXPECT_NEAR(std::stod(rows[k][1]), 0.5 + 0.5 * std::exp(-tau), 1e-11);
    EXPECT_NEAR(std::stod(rows[k][2]), tau >= 2.0 ? 0.5 : 0.5 + 0.5 * std::exp(-tau), 1e-11);
    EXPECT_NEAR(std::stod(rows[k][4]), std::exp(-tau), 1e-11);
  }
}

TEST(Sweep, RotatingIdlerAndFiniteEnvHeaders) {
  const auto rot = invoke({"sweep", "--scenario", "rotating-idler", "--tau", "0:12.5:0.5", "--format", "csv"});
  ASSERT_EQ(rot.code, 0) << rot.err;
  EXPECT_EQ(csv(rot.out)[0], (std::vector<std::string>{"tau", "p_A", "p_B"}));
  const auto env = invoke({"sweep", "--scenario", "finite-env", "--env-dim", "4", "--env-seed", "3", "--tau", "0:2:1",
                        "--format", "csv"});
  ASSERT_EQ(env.code, 0) << env.err;
  const auto rows = csv(env.out);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "re_c", "im_c", "abs_c", "abs_c_paperform"}));
  EXPECT_EQ(rows[1][1], "1");
  EXPECT_EQ(rows.size(), 4u);
}

TEST(Sweep, RejectsUntimedScenario) { EXPECT_EQ(invoke({"sweep", "--scenario", "bomb", "--tau", "0:1:0.5"}).code, 2); }

TEST(EnvOverlap, Examples) {
  const auto r = invoke({"env-overlap", "--lambda-atom", "0.99", "--n", "6.022e23"});
  ASSERT_EQ(r.code, 0);
  const auto rows = csv(r.out);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0][0], "log10_overlap");
  const double v = std::stod(rows[0][1]);
  EXPECT_GE(v, -2.7e21);
  EXPECT_LE(v, -2.6e21);
  EXPECT_EQ(invoke({"env-overlap", "--lambda-atom", "1.0", "--n", "1e23"}).out, "log10_overlap,0\n");
  EXPECT_NEAR(std::stod(csv(invoke({"env-overlap", "--lambda-atom", "0.5", "--n", "10"}).out)[0][1]), -3.0103, 1e-4);
  EXPECT_EQ(invoke({"env-overlap", "--lambda-atom", "0", "--n", "10"}).code, 2);
}

TEST(Errors, OneLineDiagnostics) {
  for (const auto &args : std::vector<std::vector<std::string>>{
           {"exact", "--scenario", "nope"},
           {"exact", "--scenario", "double-slit", "--epsilon", "0.1"},
           {"exact", "--scenario", "decoherence", "--policy", "threshold", "--tau", "1"},
           {"exact", "--scenario", "decoherence", "--tau", "0:1:0.5"},
           {"exact", "--scenario", "which-path", "--epsilon", "1.5"},
           {"run", "--scenario", "double-slit", "--trials", "0"},
           {"exact"},
           {"exact", "--config", "/nonexistent/config.json"},
       }) {
    const auto r = invoke(args);
    EXPECT_EQ(r.code, 2) << args.back();
    EXPECT_EQ(r.err.rfind("error: ", 0), 0u) << r.err;
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << r.err;
  }
  EXPECT_NE(invoke({}).code, 0);
  EXPECT_NE(invoke({"bogus"}).code, 0);
  EXPECT_NE(invoke({"exact", "--unknown-flag"}).code, 0);
}

TEST(Config, FileWithFlagOverride) {
  const auto path = temp_file("config.json");
  {
    std::ofstream f(path);
    f << R"({"scenario": {"kind": "decoherence", "lambda": 1.0, "tau": 1.0}, "output": "csv"})";
  }
  const auto base = invoke({"exact", "--config", path.string()});
  ASSERT_EQ(base.code, 0) << base.err;
  EXPECT_NEAR(marginal(base.out, "screen=A"), 0.5 + 0.5 * std::exp(-1.0), 1e-11);
  const auto over = invoke({"exact", "--config", path.string(), "--lambda", "2"});
  ASSERT_EQ(over.code, 0) << over.err;
  EXPECT_NEAR(marginal(over.out, "screen=A"), 0.5 + 0.5 * std::exp(-2.0), 1e-11);
  std::filesystem::remove(path);
}

TEST(Config, RejectsUnknownFields) {
  EXPECT_THROW(config_from_json(json::parse(R"({"scenario": {"kind": "bomb"}, "extra": 1})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"scenario": {"kind": "bomb", "colour": 1}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"trials": "many"})")), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  std::mt19937_64 g(59);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    RunConfig c;
    auto &s = c.scenario;
    s.kind = kAllScenarioKinds[g() % kAllScenarioKinds.size()];
    switch (s.kind) {
    case ScenarioKind::WhichPathDetector:
      s.epsilon = unit(g);
      break;
    case ScenarioKind::Bomb:
    case ScenarioKind::BombSavingProtocol:
      s.bomb_kind = g() % 2 ? BombKind::Real : BombKind::Dud;
      if (s.kind == ScenarioKind::BombSavingProtocol) {
        s.max_rounds = 1 + static_cast<int>(g() % 100);
      }
      break;
    case ScenarioKind::IdlerDelayedChoice:
      s.idler_basis = g() % 2 ? IdlerBasis::WhichPath : IdlerBasis::PlusMinus;
      s.measure_order = g() % 2 ? MeasureOrder::ScreenFirst : MeasureOrder::IdlerFirst;
      break;
    case ScenarioKind::DecoherenceSweep:
      s.lambda_rate = 3.0 * unit(g);
      s.tau_grid = tau_range(0.0, 5.0 * unit(g), 0.1 + unit(g));
      s.policy = CollapsePolicy::threshold(unit(g) * 4.0);
      break;
    case ScenarioKind::RotatingIdler:
      s.omega = 2.0 * unit(g);
      s.tau = 10.0 * unit(g);
      break;
    case ScenarioKind::FiniteEnvironment:
      s.env_dim = 1 + static_cast<int>(g() % 8);
      s.env_seed = g();
      s.tau = unit(g);
      break;
    default:
      break;
    }
    c.trials = 1 + static_cast<std::int64_t>(g() % 1000000);
    if (g() % 2) {
      c.seed = g();
    }
    c.output = g() % 2 ? OutputFormat::Csv : OutputFormat::Table;
    if (g() % 2) {
      c.out_path = "out_" + std::to_string(trial) + ".csv";
    }
    const json j = config_to_json(c);
    const RunConfig back = config_from_json(json::parse(j.dump()));
    EXPECT_EQ(config_to_json(back), j);
    EXPECT_EQ(back.scenario.policy, c.scenario.policy);
    EXPECT_EQ(back.scenario.tau_grid, c.scenario.tau_grid);
    EXPECT_EQ(back.seed, c.seed);
    EXPECT_EQ(back.out_path, c.out_path);
  }
}

TEST(Output, OutFlagWritesFile) {
  const auto path = temp_file("out.csv");
  const auto r = invoke({"exact", "--scenario", "double-slit", "--format", "csv", "--out", path.string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(path);
  std::stringstream buf;
  buf << f.rdbuf();
  EXPECT_EQ(buf.str(), "outcome,probability\nscreen=A,1\nscreen=B,0\n");
  std::filesystem::remove(path);
}

TEST(Binary, ExitCodesAndOutput) {
  const std::string exe = TWOSLIT_CLI_PATH;
  const auto capture = [&](const std::string &args, int &status) {
    std::string out;
    FILE *p = ::popen((exe + " " + args + " 2>/dev/null").c_str(), "r");
    char buf[256];
    while (std::fgets(buf, sizeof buf, p)) {
      out += buf;
    }
    status = ::pclose(p);
    return out;
  };
  int status = -1;
  EXPECT_EQ(capture("exact --scenario double-slit --format csv", status), "outcome,probability\nscreen=A,1\nscreen=B,0\n");
  EXPECT_EQ(WEXITSTATUS(status), 0);
  capture("exact --scenario nope", status);
  EXPECT_NE(WEXITSTATUS(status), 0);
}
