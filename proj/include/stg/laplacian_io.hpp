#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stg/graph_core.hpp"

namespace stg {

// Dense CSV: header "node,<id_0>,...,<id_n-1>", then one row per node
// "<id_i>,L_i0,...". Ids default to 0..n-1.
void write_laplacian_csv(const std::filesystem::path& path, const GraphLaplacian& laplacian,
                         const std::vector<std::string>& node_ids = {});
GraphLaplacian read_laplacian_csv(const std::filesystem::path& path,
                                  std::vector<std::string>* node_ids = nullptr);

// Edge list: header "i,j,weight", one row per pair i<j in canonical order,
// zero weights included; n_nodes is recovered as the largest j + 1.
void write_edge_list_csv(const std::filesystem::path& path, const EdgeWeightVector& w);
EdgeWeightVector read_edge_list_csv(const std::filesystem::path& path);

}  // namespace stg
