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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "test_helpers.hpp"

using namespace twoslit;

namespace {

constexpr double pi = std::numbers::pi;

/// Collects failed checks for one criterion; keeps the first few messages.
class Check {
public:
  void near(double got, double want, double tol, const std::string &what) {
    if (!(std::abs(got - want) <= tol)) {
      std::ostringstream msg;
      msg.precision(15);
      msg << what << ": got " << got << ", want " << want << " (tol " << tol << ")";
      fail(msg.str());
    }
  }
  void that(bool ok, const std::string &what) {
    if (!ok) {
      fail(what);
    }
  }
  void fail(const std::string &what) {
    if (failures_.size() < 3) {
      failures_.push_back(what);
    }
    ++count_;
  }
  [[nodiscard]] bool ok() const { return count_ == 0; }
  [[nodiscard]] std::string summary() const {
    std::string s = std::to_string(count_) + " failed check(s)";
    for (const auto &f : failures_) {
      s += "; " + f;
    }
    return s;
  }

private:
  std::vector<std::string> failures_;
  int count_ = 0;
};

Scenario make(ScenarioKind kind, CollapsePolicy policy = {}) {
  Scenario s;
  s.kind = kind;
  s.policy = policy;
  return s;
}

double screen_a(const Scenario &s) { return exact_distribution(s).probability("screen", "A"); }

void oracle(Check &c, const Scenario &s, std::int64_t trials, std::uint64_t seed, const std::string &what) {
  const auto report = compare_to_oracle(run_many(s, trials, seed), exact_distribution(s));
  for (const auto &cell : report.cells) {
    c.that(cell.pass, what + " cell " + cell.label + " z=" + std::to_string(cell.z));
  }
}

void interference(Check &c) {
  const auto s = make(ScenarioKind::DoubleSlit);
  c.near(screen_a(s), 1.0, 1e-12, "P[A]");
  c.near(exact_distribution(s).probability("screen", "B"), 0.0, 1e-12, "P[B]");
  const auto stats = run_many(s, 10000, 1);
  c.that(stats.count("screen=A") == 10000, "10^4 trials all at A");
}

void single_slit(Check &c) {
  std::uint64_t seed = 2;
  for (auto k : {ScenarioKind::SingleSlitLeft, ScenarioKind::SingleSlitRight}) {
    const auto s = make(k);
    c.near(screen_a(s), 0.5, 1e-12, std::string(kind_name(k)) + " P[A]");
    c.near(exact_distribution(s).probability("screen", "B"), 0.5, 1e-12, std::string(kind_name(k)) + " P[B]");
    oracle(c, s, 100000, seed++, std::string(kind_name(k)));
  }
}

void which_path(Check &c) {
  Scenario u = make(ScenarioKind::WhichPathDetector);
  u.epsilon = 0.0;
  Scenario k = u;
  k.policy = CollapsePolicy::collapse_at_detector();
  for (const char *label : {"A", "B"}) {
    const double pu = exact_distribution(u).probability("screen", label);
    const double pk = exact_distribution(k).probability("screen", label);
    c.near(pu, pk, 1e-12, std::string("eps=0 unitary vs collapse ") + label);
    c.near(pu, 0.5, 1e-12, std::string("eps=0 P[") + label + "]");
  }
  u.epsilon = 0.2;
  k.epsilon = 0.2;
  c.near(screen_a(u), 0.6, 1e-12, "eps=0.2 unitary P[A]");
  c.near(screen_a(k), 0.5, 1e-12, "eps=0.2 collapse P[A]");
  c.near(screen_a(u) - screen_a(k), 0.1, 1e-12, "eps/2 gap");
}

void overlap(Check &c) {
  const double v = overlap_estimate(0.99, 6.022e23).log10_overlap;
  c.that(v >= -2.7e21 && v <= -2.6e21, "log10_overlap = " + std::to_string(v));
}

void bomb(Check &c) {
  const auto single = exact_distribution(make(ScenarioKind::Bomb));
  for (const char *b : {"NoExplosion", "Exploded"}) {
    for (const char *scr : {"A", "B"}) {
      c.near(single.probability({{"bomb", b}, {"screen", scr}}), 0.25, 1e-12, std::string(b) + "," + scr);
    }
  }
  Scenario real = make(ScenarioKind::BombSavingProtocol);
  real.bomb_kind = BombKind::Real;
  real.max_rounds = 50;
  const std::int64_t n = 100000;
  const auto stats = run_many(real, n, 7);
  const double sigma = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / static_cast<double>(n));
  c.near(stats.freq("verdict=CertifiedGood"), 1.0 / 3.0, 5.0 * sigma, "certified fraction");
  c.near(stats.freq("verdict=Exploded"), 2.0 / 3.0, 5.0 * sigma, "exploded fraction");

  Scenario dud = real;
  dud.bomb_kind = BombKind::Dud;
  try {
    const auto d = run_many(dud, 20000, 8);
    c.that(d.count("verdict=CertifiedGood") == 0, "dud certified");
    c.that(d.count("verdict=Inconclusive") == 20000, "dud not always inconclusive");
  } catch (const std::logic_error &e) {
    c.fail(std::string("dud reached certification: ") + e.what());
  }
  c.that(exact_distribution(dud).probability("verdict", "CertifiedGood") == 0.0, "dud certify probability");
}

void delayed_choice(Check &c) {
  for (auto b : {IdlerBasis::WhichPath, IdlerBasis::PlusMinus}) {
    Scenario first = make(ScenarioKind::IdlerDelayedChoice);
    first.idler_basis = b;
    first.measure_order = MeasureOrder::ScreenFirst;
    Scenario later = first;
    later.measure_order = MeasureOrder::IdlerFirst;
    const auto d1 = exact_distribution(first);
    const auto d2 = exact_distribution(later);
    c.that(d1.cells().size() == d2.cells().size(), "cell count differs");
    for (const auto &cell : d1.cells()) {
      c.near(cell.probability, d2.probability(cell.key), 1e-12, flatten_key(cell.key));
    }
    if (b == IdlerBasis::PlusMinus) {
      c.near(d1.probability({{"screen", "A"}, {"idler", "I+"}}), 0.5, 1e-12, "(A,I+)");
      c.near(d1.probability({{"screen", "B"}, {"idler", "I-"}}), 0.5, 1e-12, "(B,I-)");
      c.near(d1.probability({{"screen", "A"}, {"idler", "I-"}}), 0.0, 1e-12, "(A,I-)");
      c.near(d1.probability({{"screen", "B"}, {"idler", "I+"}}), 0.0, 1e-12, "(B,I+)");
    }
  }
}

void decoherence(Check &c) {
  for (int k = 0; k < 50; ++k) {
    const double tau = 5.0 * k / 49.0;
    Scenario s = make(ScenarioKind::DecoherenceSweep);
    s.lambda_rate = 1.0;
    s.tau = tau;
    const auto d = exact_distribution(s);
    const double pa = d.probability("screen", "A");
    const double pb = d.probability("screen", "B");
    c.near(pa, 0.5 + 0.5 * std::exp(-tau), 1e-12, "P[A] at " + std::to_string(tau));
    c.near(pa - pb, std::exp(-tau), 1e-12, "P[A]-P[B] at " + std::to_string(tau));
    const auto rho = partial_trace(DensityOperator::pure(prepared_state(s)), {kParticle});
    c.near(std::abs(rho.at("L", "R")), std::exp(-tau) / 2.0, 1e-12, "|rho_LR| at " + std::to_string(tau));
  }
  std::uint64_t seed = 70;
  for (double tau : {0.5, 2.0, 4.0}) {
    Scenario s = make(ScenarioKind::DecoherenceSweep);
    s.lambda_rate = 1.0;
    s.tau = tau;
    oracle(c, s, 20000, seed++, "tau=" + std::to_string(tau));
  }
}

void threshold(Check &c) {
  Scenario u = make(ScenarioKind::DecoherenceSweep);
  u.lambda_rate = 1.0;
  u.tau_grid = tau_range(0.0, 5.0, 0.05);
  Scenario t = u;
  t.policy = CollapsePolicy::threshold(2.0);
  const auto pu = sweep(u);
  const auto pt = sweep(t);
  for (std::size_t k = 0; k < pu.size(); ++k) {
    const double tau = pu[k].tau;
    const double a_u = pu[k].distribution.probability("screen", "A");
    const double a_t = pt[k].distribution.probability("screen", "A");
    const double unitary = 0.5 + 0.5 * std::exp(-tau);
    c.near(a_u, unitary, 1e-12, "unitary at " + std::to_string(tau));
    c.near(a_t, tau < 2.0 ? unitary : 0.5, 1e-12, "threshold at " + std::to_string(tau));
    c.near(a_u - a_t, tau < 2.0 ? 0.0 : std::exp(-tau) / 2.0, 1e-12, "divergence at " + std::to_string(tau));
  }
  // The jump at tau* itself.
  Scenario just_before = make(ScenarioKind::DecoherenceSweep, CollapsePolicy::threshold(2.0));
  just_before.tau = std::nextafter(2.0, 0.0);
  Scenario at = just_before;
  at.tau = 2.0;
  c.near(screen_a(just_before) - screen_a(at), std::exp(-2.0) / 2.0, 1e-12, "jump at tau*");
}

void rotating(Check &c) {
  for (double omega : {1.0, 2.5}) {
    for (int k = 0; k <= 400; ++k) {
      const double tau = 4.0 * pi * k / 400.0;
      Scenario s = make(ScenarioKind::RotatingIdler);
      s.omega = omega;
      s.tau = tau;
      c.near(screen_a(s), 0.5 + 0.5 * std::cos(omega * tau), 1e-12, "P[A] at " + std::to_string(tau));
    }
    Scenario anti = make(ScenarioKind::RotatingIdler);
    anti.omega = omega;
    anti.tau = pi / omega;
    c.near(screen_a(anti), 0.0, 1e-12, "anti-fringe");
  }
}

void finite_env(Check &c) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto bh = random_block_hamiltonian(1 + (seed - 1) % 8, seed);
    c.near(std::abs(finite_env_overlap(bh, 0.0) - Complex(1.0, 0.0)), 0.0, 1e-12, "c(0)");
    for (double t = 0.0; t <= 100.0; t += 0.25) {
      c.that(std::abs(finite_env_overlap(bh, t)) <= 1.0 + 1e-12, "|c| > 1");
    }
  }

  std::mt19937_64 g(61);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 1 + g() % 8;
    CMatrix hl = CMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    CMatrix hr = hl;
    for (Eigen::Index k = 0; k < hl.rows(); ++k) {
      hl(k, k) = normal(g);
      hr(k, k) = normal(g);
    }
    const CMatrix u = twoslit::testing::random_unitary(g, d);
    const BlockHamiltonian bh(u * hl * u.adjoint(), u * hr * u.adjoint(),
                              twoslit::testing::random_ket(g, finite_env_layout(d)));
    for (double t : {0.1, 1.0, 5.0, 25.0}) {
      c.that(std::abs(finite_env_overlap(bh, t) - commuting_form_overlap(bh, t)) <= 1e-10, "commuting forms");
    }
  }

  // H_L = sigma_x, H_R = sigma_z, E0 = e0.
  const BlockHamiltonian nc((CMatrix(2, 2) << 0, 1, 1, 0).finished(), (CMatrix(2, 2) << 1, 0, 0, -1).finished(),
                            Ket::basis(finite_env_layout(2), {"e0"}));
  c.that(std::abs(finite_env_overlap(nc, 1.0) - commuting_form_overlap(nc, 1.0)) > 1e-3,
         "non-commuting counterexample does not deviate");

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto bh = random_block_hamiltonian(4, seed);
    for (double t0 = 0.0; t0 < 1000.0; t0 += 40.0) {
      double best = 0.0;
      for (double t = t0; t <= t0 + 40.0; t += 0.05) {
        best = std::max(best, std::abs(finite_env_overlap(bh, t)));
      }
      c.that(best > 0.5, "seed " + std::to_string(seed) + " window at " + std::to_string(t0) + " max |c| = " +
                             std::to_string(best));
    }
  }
}

void properties(Check &c) {
  std::mt19937_64 g(67);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  using twoslit::testing::random_ket;
  using twoslit::testing::random_layout;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto layout = random_layout(g);
    const Ket psi = random_ket(g, layout);
    const Operator u(layout, twoslit::testing::random_unitary(g, layout.total_dim()), true);
    c.near(apply(u, psi).norm(), 1.0, 1e-12, "unitary norm");
    const Operator h(layout, twoslit::testing::random_hermitian(g, layout.total_dim()));
    c.near(evolve_hermitian(h, 10.0 * unit(g), psi).norm(), 1.0, 1e-12, "evolution norm");
  }
  for (int trial = 0; trial < 1000; ++trial) {
    const auto layout = random_layout(g);
    const auto rho = DensityOperator::pure(random_ket(g, layout));
    std::vector<std::string> keep;
    for (const auto &sub : layout.subsystems()) {
      if (g() % 2) {
        keep.push_back(sub.name);
      }
    }
    if (keep.empty()) {
      keep.push_back(layout.subsystems().front().name);
    }
    const auto red = partial_trace(rho, keep);
    c.near(red.matrix().trace().real(), 1.0, 1e-12, "trace");
    c.that(detail::is_hermitian(red.matrix(), 1e-12), "hermitian");
    c.that(red.min_eigenvalue() >= -1e-10, "positive");
  }
  for (int trial = 0; trial < 1000; ++trial) {
    const auto layout = random_layout(g);
    const Ket psi = random_ket(g, layout);
    const auto &sub = layout.subsystems()[g() % layout.subsystems().size()];
    const auto basis = twoslit::testing::random_basis(g, sub);
    double total = 0.0;
    for (const auto &lp : born_probabilities(psi, basis)) {
      c.that(lp.probability >= 0.0, "negative probability");
      total += lp.probability;
    }
    c.near(total, 1.0, 1e-12, "Born sum");
  }
  for (int trial = 0; trial < 1000; ++trial) {
    const auto layout = random_layout(g);
    const Ket psi = random_ket(g, layout);
    const auto &sub = layout.subsystems()[g() % layout.subsystems().size()];
    const auto basis = twoslit::testing::random_basis(g, sub);
    const auto probs = born_probabilities(psi, basis);
    const auto &pick = probs[select_outcome(probs, unit(g))];
    if (pick.probability < 1e-9) {
      continue;
    }
    const Ket once = project_collapse(psi, basis, pick.label);
    const Ket twice = project_collapse(once, basis, pick.label);
    c.that(twoslit::testing::max_abs_diff(once.amps(), twice.amps()) <= 1e-12, "idempotence");
  }
  for (int trial = 0; trial < 1000; ++trial) {
    const auto kind = kAllScenarioKinds[g() % kAllScenarioKinds.size()];
    Scenario s = make(kind);
    if (is_timed(kind)) {
      s.tau = 3.0 * unit(g);
    }
    const auto trials = 1 + static_cast<std::int64_t>(g() % 40);
    const auto seed = g();
    const auto a = run_many(s, trials, seed, 1);
    const auto b = run_many(s, trials, seed, 1 + static_cast<unsigned>(g() % 4));
    c.that(a == b, "run_many differs for " + std::string(kind_name(kind)));
  }
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check &)>>> criteria = {
      {"interference", interference},
      {"single slit", single_slit},
      {"which-path equivalence", which_path},
      {"detector overlap estimate", overlap},
      {"bomb", bomb},
      {"delayed choice", delayed_choice},
      {"decoherence curve", decoherence},
      {"threshold collapse signature", threshold},
      {"rotating idler", rotating},
      {"finite environment", finite_env},
      {"core property suite", properties},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Check c;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[k].second(c);
    } catch (const std::exception &e) {
      c.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2zu %-30s %6.2fs%s%s\n", c.ok() ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), secs,
                c.ok() ? "" : "  ", c.ok() ? "" : c.summary().c_str());
    failed += c.ok() ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
