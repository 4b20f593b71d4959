#pragma once

#include <cstdint>
#include <string>

#include "figraph/graph.hpp"

namespace figraph {

/// Benchmark graph whose labels are the sign of the product of two designated
/// feature groups: every node activates one feature from each group with a
/// random +-1 value (plus a few +-1 noise features), and the class is decided
/// by whether the two group values agree. No single feature carries any label
/// signal on its own; the topology is label-independent Erdos-Renyi.
SparseGraph make_planted_graph(int n, std::uint64_t seed);

/// Two-community graph: dense within blocks, sparse across, with each block
/// drawing its sparse features from a mostly block-specific pool. Labels are
/// the block ids.
SparseGraph make_two_block_graph(int n, double p_within, double p_across,
                                 std::uint64_t seed);

/// Writes edges.txt, features.txt and (when labels exist) labels.txt in the
/// loader's format.
void write_graph_files(const SparseGraph& g, const std::string& dir);

} // namespace figraph
