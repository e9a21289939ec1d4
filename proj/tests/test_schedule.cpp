#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "lnse/schedule.hpp"

using namespace lnse;

namespace {

std::map<double, double> power_decay_table(double c, double alpha) {
  std::map<double, double> table;
  for (int i = 0; i <= 2000; ++i) {
    double t = 2.0 * std::pow(1e-4 / 2.0, double(i) / 2000.0);
    table[t] = c * std::pow(t, alpha);
  }
  return table;
}

}  // namespace

TEST_CASE("delta sequence") {
  CHECK(delta_q(0) == 1.0);
  CHECK(delta_q(2) == doctest::Approx(1e-6));
}

TEST_CASE("desk parameters validate and carry the stated recursions") {
  ScheduleSpec spec = desk_scale_params({8, 16, 32, 64});
  CHECK(spec.ell[2] == doctest::Approx(1.0 / (32.0 * 32.0)));
  CHECK(spec.delta[3] == doctest::Approx(1e-9));
  CHECK(spec.t_back[1] == doctest::Approx(1.0));
  CHECK_NOTHROW(validate(spec));
  CHECK_THROWS(desk_scale_params({8, 8, 16}));
  CHECK_THROWS(desk_scale_params({1, 2}));
}

TEST_CASE("paper mode refuses unrepresentable frequencies with a log-space hint") {
  CHECK_THROWS_WITH_AS(paper_faithful_params(2.0, 2.2e5, 1e-3 / 2.0, 3),
                       doctest::Contains("log space"), std::runtime_error);
  CHECK_THROWS(paper_faithful_params(2.0, 50.0, 1e-2, 1));  // b too small for eps
  CHECK_THROWS(h3_params(2.0, 2e4 + 1, 1.0, 1e-18, 1));     // odd b
}

TEST_CASE("backward time selection satisfies the inequalities") {
  std::vector<double> delta;
  for (int q = 0; q < 8; ++q) delta.push_back(delta_q(q));
  auto table = power_decay_table(1.0, 35.0);
  BackwardTimes bt = select_backward_times(table, 1e-4, delta, 2.0);
  CHECK(bt.depth >= 4);
  for (int q = 0; q + 1 < int(bt.t_prime.size()); ++q) {
    CHECK(bt.t_prime[q + 1] <= bt.t_prime[q] / 2.0 + 1e-15);
    // the selected point satisfies its threshold
    CHECK(table.at(bt.t_prime[q + 1]) <= 1e-4 * delta[q + 3] / 8.0 + 1e-30);
  }
  for (size_t q = 0; q + 1 < bt.t_back.size(); ++q) CHECK(bt.t_back[q + 1] < bt.t_back[q]);
  for (size_t q = 0; q < bt.ell_prime.size(); ++q) {
    CHECK(bt.ell_prime[q] > 0.0);
    if (q + 2 < bt.t_back.size())
      CHECK(bt.ell_prime[q] <= (bt.t_back[q + 1] - bt.t_back[q + 2]) / 20.0);
  }
}

TEST_CASE("backward selection reports unreachable levels") {
  std::vector<double> delta;
  for (int q = 0; q < 8; ++q) delta.push_back(delta_q(q));
  auto table = power_decay_table(1.0, 2.0);  // far too slow
  CHECK_THROWS_WITH_AS(select_backward_times(table, 1e-4, delta, 2.0),
                       doctest::Contains("level"), std::runtime_error);
}

TEST_CASE("energy profile stays inside the bands and pins the datum") {
  std::vector<double> delta;
  for (int q = 0; q < 10; ++q) delta.push_back(delta_q(q));
  auto table = power_decay_table(1.0, 35.0);
  BackwardTimes bt = select_backward_times(table, 1e-4, delta, 2.0);
  std::vector<double> t_back(bt.t_back.begin(), bt.t_back.begin() + bt.ell_prime.size() + 1);
  EnergyProfile p = build_energy_profile([](double) { return 1.0; }, delta, t_back,
                                         bt.ell_prime, 0.5);
  CHECK_NOTHROW(validate_profile(p, 2000));
  CHECK(p.gap(0.0) == 0.0);
  CHECK(p(0.0) == 1.0);

  EnergyProfile p0 = p, p1 = p;
  p0.theta = 0.0;
  p1.theta = 1.0;
  CHECK_NOTHROW(validate_profile(p0, 2000));
  CHECK_NOTHROW(validate_profile(p1, 2000));
  // family members separate by at least a quarter band on every interval
  const int m = int(t_back.size()) - 1;
  for (int q = 0; q < m; ++q) {
    double lo = t_back[size_t(q + 1)] - bt.ell_prime[size_t(q)];
    double hi = (q == 0) ? t_back[0] : t_back[size_t(q)];
    double best = 0.0;
    for (int i = 0; i <= 4000; ++i) {
      double t = lo + (hi - lo) * double(i) / 4000.0;
      best = std::max(best, std::abs(p1.gap(t) - p0.gap(t)));
    }
    CHECK(best >= 0.25 * delta[size_t(q + 2)]);
  }
}

TEST_CASE("profile validator reports the offending time") {
  std::vector<double> delta{1.0, 1e-3, 1e-6, 1e-9, 1e-12};
  std::vector<double> t_back{2.0, 1.0, 0.5};
  std::vector<double> ell{0.01, 0.01};
  EnergyProfile p = build_energy_profile([](double) { return 1.0; }, delta, t_back, ell, 0.5);
  p.delta[3] = 2.0 * p.delta[2];  // empties the band of interval 1
  CHECK_THROWS_WITH_AS(validate_profile(p, 500), doctest::Contains("t = "), std::runtime_error);
}
