// Copyright 2026 The fincad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fincad/calibrator.hpp"
#include "fincad/error.hpp"
#include "fincad/rng.hpp"
#include "fincad/synthetic_model.hpp"
#include "fincad/synthetic_world.hpp"

using namespace fincad;
namespace fs = std::filesystem;

namespace {

// Textbook binary entropy in bits of sigmoid(l_up - l_down).
double naive_entropy(double l_up, double l_down) {
  const double p = 1.0 / (1.0 + std::exp(l_down - l_up));
  const double q = 1.0 - p;
  double h = 0.0;
  if (p > 0) h -= p * std::log2(p);
  if (q > 0) h -= q * std::log2(q);
  return h;
}

double naive_alpha(double mean_h, double std_h, double h, double sigma_ref, double delta,
                   double a_min, double a_max, double a_cap) {
  const double s_sigma = std_h / sigma_ref < 1.0 ? std_h / sigma_ref : 1.0;
  const double s_h = (mean_h - h) / delta > 0.0 ? (mean_h - h) / delta : 0.0;
  const double raw = a_max * s_sigma * s_h;
  return std::max(a_min, raw < a_cap ? raw : a_cap);
}

EntityStats stats(double mean, double sd) {
  EntityStats s;
  s.ticker = "X";
  s.mean_entropy = mean;
  s.std_entropy = sd;
  s.n_dates = 12;
  return s;
}

ModelProfile profile(double sigma_ref, double delta) {
  ModelProfile p;
  p.model_id = "m";
  p.sigma_ref = sigma_ref;
  p.delta_range = delta;
  return p;
}

}  // namespace

TEST_CASE("probe entropy matches the textbook formula and is symmetric") {
  CHECK(probe_from_logits(0.3, 0.3).entropy == 1.0);
  CHECK(probe_from_logits(0.3, 0.3).p_up == 0.5);
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double a = 20.0 * rng.uniform() - 10.0, b = 20.0 * rng.uniform() - 10.0;
    const auto r = probe_from_logits(a, b);
    CHECK(r.entropy == doctest::Approx(naive_entropy(a, b)).epsilon(1e-12));
    CHECK(r.p_up + r.p_down == doctest::Approx(1.0));
    CHECK(r.p_up == doctest::Approx(1.0 / (1.0 + std::exp(b - a))).epsilon(1e-12));
    CHECK(probe_from_logits(b, a).entropy == r.entropy);
  }
  CHECK(probe_from_logits(1000.0, -1000.0).entropy == 0.0);
}

TEST_CASE("population statistics") {
  const auto [m, s] = mean_and_population_std({1.0, 2.0, 3.0, 4.0});
  CHECK(m == 2.5);
  CHECK(s == doctest::Approx(std::sqrt(1.25)));
  CHECK(mean_and_population_std({0.7, 0.7, 0.7}).second == 0.0);
}

TEST_CASE("default calibration dates are the last weekday on or before May/Nov 15") {
  const auto dates = default_calibration_dates();
  REQUIRE(dates.size() == 12);
  std::size_t i = 0;
  for (int y : {2007, 2008, 2009, 2012, 2013, 2014}) {
    for (unsigned m : {5u, 11u}) {
      Date want = Date::from_ymd(y, m, 15);
      while (want.iso_weekday() > 5) want = want - 1;
      CHECK(dates[i++] == want);
    }
  }
  CHECK(dates[3] == Date::from_ymd(2008, 11, 14));
}

TEST_CASE("adaptive alpha matches the closed form and its properties") {
  Rng rng(11);
  for (int i = 0; i < 3000; ++i) {
    const double mean = rng.uniform(), sd = 0.3 * rng.uniform(), h = rng.uniform();
    const double sigma_ref = 0.01 + 0.3 * rng.uniform(), delta = 0.01 + 0.3 * rng.uniform();
    const auto p = profile(sigma_ref, delta);
    const auto st = stats(mean, sd);
    const double a = adaptive_alpha(st, h, p);
    CHECK(a == doctest::Approx(naive_alpha(mean, sd, h, sigma_ref, delta, 0, 2, 4)).epsilon(1e-12));
    CHECK(a >= p.alpha_min);
    CHECK(a <= p.alpha_cap);
    if (h >= mean) CHECK(a == 0.0);
    CHECK(adaptive_alpha(st, h + 0.05, p) <= a);
    CHECK(adaptive_alpha(stats(mean, sd + 0.05), h, p) >= a);
  }
  // Saturation and floor.
  auto p = profile(0.1, 0.01);
  CHECK(adaptive_alpha(stats(0.9, 0.5), 0.0, p) == 4.0);
  p.alpha_min = 0.5;
  CHECK(adaptive_alpha(stats(0.2, 0.5), 0.9, p) == 0.5);
}

TEST_CASE("profile from entropies uses population standard deviations") {
  const auto p = profile_from_entropies({0.1, 0.5, 0.9}, {0.8, 1.0});
  CHECK(p.delta_range == doctest::Approx(std::sqrt(((0.4 * 0.4) * 2) / 3.0)));
  CHECK(p.sigma_ref == doctest::Approx(0.1));
  CHECK(p.n_in_sample == 3);
  CHECK(p.n_out_of_sample == 2);
  try {
    profile_from_entropies({0.5, 0.5}, {0.8, 1.0});
    FAIL("expected CalibrationError");
  } catch (const CalibrationError& e) {
    CHECK(std::string(e.what()).size() > 20);
  }
  CHECK_THROWS_AS(profile_from_entropies({}, {0.8, 1.0}), CalibrationError);
}

TEST_CASE("entity calibration on the synthetic memoriser") {
  const auto world = make_synthetic_world(2, 5);
  const auto provider = build_synthetic(world.spec);
  const auto labels = provider->labels();
  const std::string recall = "Recall what you remember about this stock.";
  const auto dates = default_calibration_dates();
  const auto s = calibrate_entity(*provider, recall, "MEM1", dates, labels);
  CHECK(s.n_dates == 12);
  std::vector<double> hs;
  for (Date d : dates) hs.push_back(probe_entropy(*provider, recall, "MEM1", d, labels).entropy);
  CHECK(s.entropies == hs);
  const auto [m, sd] = mean_and_population_std(hs);
  CHECK(s.mean_entropy == m);
  CHECK(s.std_entropy == sd);
  // Memory lowers entropy relative to an unknown ticker.
  const auto unknown = calibrate_entity(*provider, recall, "NOPE", dates, labels);
  CHECK(s.mean_entropy < unknown.mean_entropy);
  CHECK(unknown.mean_entropy > 0.99);
}

TEST_CASE("profile_model measures in-sample and out-of-sample spread") {
  const auto world = make_synthetic_world(2, 5);
  const auto provider = build_synthetic(world.spec);
  const std::string recall = "Recall the outcome.";
  std::vector<EntityDate> is, oos;
  for (int m = 1; m <= 12; ++m) {
    is.emplace_back("MEM1", Date::from_ymd(2015, m, 10));
    is.emplace_back("MEM2", Date::from_ymd(2016, m, 10));
    oos.emplace_back("MEM1", Date::from_ymd(2025, m, 10));
  }
  const auto p1 = profile_model(*provider, recall, is, oos, provider->labels(), {}, 1);
  const auto p4 = profile_model(*provider, recall, is, oos, provider->labels(), {}, 4);
  CHECK(p1.sigma_ref == p4.sigma_ref);
  CHECK(p1.delta_range == p4.delta_range);
  CHECK(p1.model_id == world.spec.model_id);
  CHECK(p1.delta_range > p1.sigma_ref);
}

TEST_CASE("sidecars round-trip and missing ones are actionable") {
  const fs::path dir = fs::temp_directory_path() / "fincad_calib_test";
  fs::remove_all(dir);
  const auto s = entity_stats_from_entropies("ABC", default_calibration_dates(),
                                             std::vector<double>(12, 0.5));
  save_entity_stats(dir, s);
  const auto back = load_entity_stats(dir, "ABC");
  CHECK(back.entropies == s.entropies);
  CHECK(back.dates == s.dates);
  CHECK(back.mean_entropy == 0.5);

  auto p = profile(0.2, 0.3);
  save_profile(dir, p);
  CHECK(load_profile(dir).sigma_ref == 0.2);
  try {
    load_entity_stats(dir, "ZZZ");
    FAIL("expected CalibrationError");
  } catch (const CalibrationError& e) {
    CHECK(std::string(e.what()).find("fincad") != std::string::npos);
  }
  fs::remove_all(dir);
  CHECK_THROWS_AS(load_profile(dir), CalibrationError);

  CHECK(probe_trace_csv({{"A", Date::from_ymd(2020, 1, 2), 1.0, 0.0, 0.5, 0.25}})
            .starts_with("ticker,date,l_up,l_down,entropy,alpha\nA,2020-01-02,"));
}
