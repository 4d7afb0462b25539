#pragma once

#include <string>

#include "pure/trained_model.hpp"

namespace pure {

// Binary checkpoint, little-endian, layout documented in the README. Holds the
// model kind, shapes, and raw parameter tensors; load(save(x)) reproduces the
// tensors bit for bit. Hyper-parameters and history live in config.resolved
// and train.log, not here.
void save_checkpoint(const TrainedModel& model, const std::string& path);
TrainedModel load_checkpoint(const std::string& path);

}  // namespace pure
