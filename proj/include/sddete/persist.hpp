#pragma once

#include <filesystem>

#include "sddete/ensemble.hpp"
#include "sddete/tree.hpp"

namespace sddete {

enum class ModelKind { decision_tree, random_forest, sd_dete };

// Reads just enough of a model file to tell which kind it holds.
ModelKind peek_model_kind(const std::filesystem::path& path);

void save_tree_model(const TreeModel& model, const std::filesystem::path& path);
TreeModel load_tree_model(const std::filesystem::path& path);

void save_forest_model(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_forest_model(const std::filesystem::path& path);

}  // namespace sddete
