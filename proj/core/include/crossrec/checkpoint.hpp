#pragma once

#include <string>

#include "crossrec/neucdcf.hpp"

namespace crossrec {

/// Versioned JSON checkpoint: model kind, dimensions, mode flags, alpha,
/// rating bounds, every tensor, and the TrainConfig that produced it.
/// Doubles are written round-trippably, so a reloaded model predicts
/// bit-exactly.
void save_checkpoint(const Model& model, const TrainConfig& cfg, const std::string& path);

struct Checkpoint {
  Model model;
  TrainConfig config;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace crossrec
