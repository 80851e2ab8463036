#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>

#include "polaffini/field.hpp"

namespace polaffini {

/// Which labels to drop and which to regroup before centroid extraction or
/// overlap scoring. Excluded ids and merge sources must be disjoint.
struct LabelSelection {
    std::set<int> excluded;
    std::map<int, int> merge_map;  // source label -> group label

    // 0 stays background; excluded labels map to 0; merge sources map to
    // their group label.
    int remap(int label) const {
        if (label == 0 || excluded.count(label))
            return 0;
        auto it = merge_map.find(label);
        return it == merge_map.end() ? label : it->second;
    }
};

// Config format: one label id per line to exclude, or `merge <src> <dst>`;
// `#` starts a comment.
LabelSelection parse_label_selection(const std::string& text);
LabelSelection load_label_selection(const std::string& path);

// One world-space point per retained label: the mean position of the
// label's voxel centers. Labels absent from the volume are omitted.
PointSet extract_centroids(const LabelVolume& vol, const LabelSelection& sel = {},
                           int threads = 1);

// Restrict both sets to their common labels, in ascending label order.
std::pair<PointSet, PointSet> pair_point_sets(const PointSet& reference,
                                              const PointSet& moving);

}  // namespace polaffini
