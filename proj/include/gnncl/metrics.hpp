#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace gnncl {

struct MetricsReport {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
  double accuracy = 0.0;
  // Empty when only one class is present.
  std::optional<double> auc;
};

// Confusion counts at `threshold` (score >= threshold predicts fraud),
// precision/recall/F/accuracy, and rank-statistic AUC with ties counted
// one half.
MetricsReport compute_metrics(const std::vector<double>& scores,
                              const std::vector<std::uint8_t>& labels,
                              double threshold = 0.5);

}  // namespace gnncl
