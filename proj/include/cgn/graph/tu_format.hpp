#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "cgn/graph/graph.hpp"

namespace cgn::graph {

/// Raised for malformed TU files; the message names file and line.
class TuFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reads a TU-format collection (`DS_A.txt`, `DS_graph_indicator.txt`,
/// `DS_graph_labels.txt`, optional `DS_node_labels.txt`). `DS` is inferred
/// from the `*_A.txt` file in `dir`. Node labels become one-hot features
/// (constant 1 when absent); graph labels are mapped to 0..l-1 in sorted order.
Dataset load_tu_dataset(const std::filesystem::path& dir);

/// Writes a dataset in TU format under `dir` with prefix `prefix`. Node tasks
/// are written as one graph whose node labels are the task labels, plus a
/// `DS_roles.txt` sidecar when annotations exist.
void export_tu_dataset(const Dataset& d, const std::filesystem::path& dir, const std::string& prefix);

/// Seeded subsample of `count` graphs (all graphs when count >= total).
Dataset subsample_graphs(const Dataset& d, std::size_t count, std::uint64_t seed);

}  // namespace cgn::graph
