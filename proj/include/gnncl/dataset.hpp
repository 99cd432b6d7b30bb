#pragma once

#include <cstdint>
#include <filesystem>

#include "gnncl/graph.hpp"

namespace gnncl {

// Directory layout (UTF-8, LF):
//   meta.json       {"num_nodes": N, "feature_dim": d, "relations": [names]}
//   features.csv    node_id,f_1,...,f_d
//   labels.csv      node_id,label
//   rel_<name>.edges  one "u<TAB>v" per line
MultiRelationGraph load_graph(const std::filesystem::path& dir);

// Emits canonical form: node ids ascending, edges u < v sorted.
void save_graph(const MultiRelationGraph& g, const std::filesystem::path& dir);

// FNV-1a 64 over the dataset files, in layout order.
std::uint64_t fingerprint_dataset(const std::filesystem::path& dir);

}  // namespace gnncl
