#pragma once

#include <filesystem>
#include <optional>

#include "gnncl/model.hpp"
#include "gnncl/reinforcer.hpp"
#include "gnncl/trainer.hpp"

namespace gnncl {

struct Checkpoint {
  TrainConfig config;
  Model model;
  std::optional<ThresholdController> controller;
};

// Versioned JSON container: config echo, named parameter arrays, controller
// state, seed. Doubles survive the round trip exactly.
void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const ThresholdController* controller,
                     const TrainConfig& config);

// Throws on version mismatch, malformed content, or any missing/extra/
// misshapen parameter; never partially loads.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gnncl
