#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gnncl/metrics.hpp"
#include "gnncl/rng.hpp"

using namespace gnncl;

namespace {

struct Oracle {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  double auc = 0.0;
  bool has_auc = false;
};

// Independent recount: direct confusion loop and the O(pos * neg) pairwise
// comparison count for the ranking statistic.
Oracle recount(const std::vector<double>& scores,
               const std::vector<std::uint8_t>& labels, double threshold) {
  Oracle o;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool hit = scores[i] >= threshold;
    if (labels[i]) {
      (hit ? o.tp : o.fn) += 1;
    } else {
      (hit ? o.fp : o.tn) += 1;
    }
  }
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      ++pairs;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  if (pairs > 0) {
    o.auc = wins / double(pairs);
    o.has_auc = true;
  }
  return o;
}

}  // namespace

TEST_CASE("fixed confusion example") {
  std::vector<std::uint8_t> labels = {1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
  std::vector<double> scores = {0.9, 0.8, 0.2,  0.7, 0.1,
                                0.2, 0.3, 0.1, 0.05, 0.4};
  MetricsReport m = compute_metrics(scores, labels);
  CHECK(m.tp == 2);
  CHECK(m.fp == 1);
  CHECK(m.fn == 1);
  CHECK(m.tn == 6);
  CHECK(m.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.f == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.accuracy == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("a perfect ranking scores AUC 1") {
  std::vector<std::uint8_t> labels = {0, 0, 1, 1, 0};
  std::vector<double> scores = {0.1, 0.3, 0.8, 0.9, 0.2};
  MetricsReport m = compute_metrics(scores, labels);
  REQUIRE(m.auc.has_value());
  CHECK(*m.auc == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.f == 1.0);
  CHECK(m.accuracy == 1.0);
}

TEST_CASE("all-tied scores give AUC one half and predict positive") {
  std::vector<std::uint8_t> labels = {1, 0, 1, 0, 0};
  std::vector<double> scores(5, 0.5);
  MetricsReport m = compute_metrics(scores, labels);
  REQUIRE(m.auc.has_value());
  CHECK(*m.auc == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m.tp == 2);
  CHECK(m.fp == 3);
  CHECK(m.tn == 0);
  CHECK(m.fn == 0);
  CHECK(m.recall == 1.0);
}

TEST_CASE("threshold moves the confusion boundary") {
  std::vector<std::uint8_t> labels = {1, 1, 0};
  std::vector<double> scores = {0.95, 0.6, 0.7};
  MetricsReport loose = compute_metrics(scores, labels, 0.5);
  CHECK(loose.tp == 2);
  CHECK(loose.fp == 1);
  MetricsReport strict = compute_metrics(scores, labels, 0.9);
  CHECK(strict.tp == 1);
  CHECK(strict.fp == 0);
  CHECK(strict.fn == 1);
  CHECK(strict.tn == 1);
}

TEST_CASE("random sets agree with the recount oracle") {
  Rng rng(55);
  for (int it = 0; it < 200; ++it) {
    const std::size_t n = 2 + rng.below(60);
    std::vector<double> scores(n);
    std::vector<std::uint8_t> labels(n);
    bool saw_pos = false, saw_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse score grid forces plenty of ties.
      scores[i] = double(rng.below(10)) / 10.0;
      labels[i] = rng.bernoulli(0.3) ? 1 : 0;
      (labels[i] ? saw_pos : saw_neg) = true;
    }
    const double threshold = double(rng.below(10)) / 10.0;
    MetricsReport m = compute_metrics(scores, labels, threshold);
    Oracle o = recount(scores, labels, threshold);
    CHECK(m.tp == o.tp);
    CHECK(m.tn == o.tn);
    CHECK(m.fp == o.fp);
    CHECK(m.fn == o.fn);
    REQUIRE(m.auc.has_value() == (saw_pos && saw_neg));
    if (m.auc.has_value())
      CHECK(std::abs(*m.auc - o.auc) < 1e-9);

    // Recomputed ratios from the oracle counts.
    const double tp = double(o.tp), fp = double(o.fp), fn = double(o.fn);
    const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    const double f =
        prec + rec > 0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    CHECK(m.precision == doctest::Approx(prec).epsilon(1e-12));
    CHECK(m.recall == doctest::Approx(rec).epsilon(1e-12));
    CHECK(m.f == doctest::Approx(f).epsilon(1e-12));
    CHECK(m.accuracy ==
          doctest::Approx((tp + double(o.tn)) / double(n)).epsilon(1e-12));
  }
}

TEST_CASE("single-class inputs have no ranking statistic") {
  MetricsReport pos = compute_metrics({0.9, 0.4}, {1, 1});
  CHECK_FALSE(pos.auc.has_value());
  CHECK(pos.recall == 0.5);
  MetricsReport neg = compute_metrics({0.9, 0.4}, {0, 0});
  CHECK_FALSE(neg.auc.has_value());
  CHECK(neg.precision == 0.0);
}

TEST_CASE("degenerate inputs are rejected") {
  CHECK_THROWS_AS(compute_metrics({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(compute_metrics({0.5}, {1, 0}), std::invalid_argument);
}
