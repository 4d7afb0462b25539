#pragma once

#include <string>

#include "pure/interactions.hpp"

namespace pure {

// Two tab-separated (user, item) files with a one-line
// "# seed=S users=M items=N" header each.
void save_split(const DatasetSplit& split, const std::string& train_path,
                const std::string& test_path);
DatasetSplit load_split(const std::string& train_path, const std::string& test_path);

}  // namespace pure
