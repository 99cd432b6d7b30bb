#include "gnncl/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace gnncl {

MetricsReport compute_metrics(const std::vector<double>& scores,
                              const std::vector<std::uint8_t>& labels,
                              double threshold) {
  if (scores.empty()) throw std::invalid_argument("metrics: empty input");
  if (scores.size() != labels.size())
    throw std::invalid_argument("metrics: score/label length mismatch");

  MetricsReport report;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    const bool actual = labels[i] != 0;
    if (predicted && actual) ++report.tp;
    else if (predicted && !actual) ++report.fp;
    else if (!predicted && actual) ++report.fn;
    else ++report.tn;
  }
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0
                    : static_cast<double>(num) / static_cast<double>(den);
  };
  report.precision = ratio(report.tp, report.tp + report.fp);
  report.recall = ratio(report.tp, report.tp + report.fn);
  report.f = (report.precision + report.recall) > 0.0
                 ? 2.0 * report.precision * report.recall /
                       (report.precision + report.recall)
                 : 0.0;
  report.accuracy = ratio(report.tp + report.tn, scores.size());

  const std::size_t pos = report.tp + report.fn;
  const std::size_t neg = report.fp + report.tn;
  if (pos > 0 && neg > 0) {
    // Rank statistic with midranks on ties; equals the pairwise count with
    // ties worth one half.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores[a] < scores[b];
    });
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
      const double midrank = 0.5 * static_cast<double>(i + 1 + j);
      for (std::size_t k = i; k < j; ++k)
        if (labels[order[k]]) pos_rank_sum += midrank;
      i = j;
    }
    const double p = static_cast<double>(pos);
    const double n = static_cast<double>(neg);
    report.auc = (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
  }
  return report;
}

}  // namespace gnncl
