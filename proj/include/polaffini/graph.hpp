#pragma once

#include <array>
#include <string>
#include <vector>

#include "polaffini/affine.hpp"

namespace polaffini {

/// Delaunay-edge neighborhoods over a reference point set. N(i) contains i
/// itself plus every point sharing a tetrahedron edge with it, so each
/// neighborhood has at least 4 members and is symmetric.
struct NeighborhoodGraph {
    std::vector<int> labels;                  // of the point set it was built on
    std::vector<std::vector<int>> neighbors;  // per point, sorted indices, includes self
    std::vector<Eigen::Vector3d> centers;     // mean of each neighborhood
    std::vector<std::array<int, 4>> tetrahedra;  // sorted; empty on a deserialized graph

    std::size_t size() const { return neighbors.size(); }
};

// Builds the graph from a 3D Delaunay triangulation (incremental
// Bowyer-Watson). Exact degeneracies fall back once to a deterministic
// symbolic jitter; if that still fails, degenerate_input is thrown.
NeighborhoodGraph delaunay_graph(const PointSet& points);

// Mean of the points indexed by N(i); pass the transformed reference set to
// get neighborhood centers in the space the weights act in.
Eigen::Vector3d neighborhood_center(const NeighborhoodGraph& graph, int i,
                                    const PointSet& points);

// Plain-text adjacency keyed by label: `label: l1 l2 ...`, both sides
// sorted; round-trips bit-stably.
std::string graph_to_text(const NeighborhoodGraph& graph);
NeighborhoodGraph graph_from_text(const std::string& text, const PointSet& points);

void write_graph_text(const NeighborhoodGraph& graph, const std::string& path);
NeighborhoodGraph read_graph_text(const std::string& path, const PointSet& points);

}  // namespace polaffini
