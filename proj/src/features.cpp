#include "polaffini/features.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "polaffini/parallel.hpp"

namespace polaffini {

LabelSelection parse_label_selection(const std::string& text) {
    LabelSelection sel;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first))
            continue;
        if (first == "merge") {
            int src, dst;
            if (!(ls >> src >> dst))
                throw data_error("label config line " + std::to_string(lineno) +
                                 ": expected `merge <src> <dst>`");
            sel.merge_map[src] = dst;
        } else {
            try {
                sel.excluded.insert(std::stoi(first));
            } catch (const std::exception&) {
                throw data_error("label config line " + std::to_string(lineno) +
                                 ": expected a label id or `merge <src> <dst>`");
            }
        }
    }
    for (const auto& [src, dst] : sel.merge_map)
        if (sel.excluded.count(src))
            throw data_error("label " + std::to_string(src) +
                             " is both excluded and a merge source");
    return sel;
}

LabelSelection load_label_selection(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw data_error("cannot open label config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_label_selection(ss.str());
}

PointSet extract_centroids(const LabelVolume& vol, const LabelSelection& sel, int threads) {
    const int nx = vol.grid.dims[0], ny = vol.grid.dims[1], nz = vol.grid.dims[2];
    if (vol.grid.voxel_count() == 0)
        throw empty_point_set("label volume is empty");

    // Integer index sums per label are exact, so the reduction order (and
    // with it the thread count) cannot change the result.
    struct Acc {
        std::int64_t sx = 0, sy = 0, sz = 0, count = 0;
    };
    std::vector<std::map<int, Acc>> per_slice(static_cast<std::size_t>(nz));

    parallel_for(nz, threads, [&](std::int64_t k) {
        auto& accs = per_slice[static_cast<std::size_t>(k)];
        const std::int32_t* slice =
            vol.data.data() + static_cast<std::size_t>(k) * nx * ny;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int label = sel.remap(slice[static_cast<std::size_t>(j) * nx + i]);
                if (label == 0)
                    continue;
                Acc& a = accs[label];
                a.sx += i;
                a.sy += j;
                a.sz += static_cast<std::int64_t>(k);
                ++a.count;
            }
    });

    std::map<int, Acc> total;
    for (const auto& slice : per_slice)
        for (const auto& [label, a] : slice) {
            Acc& t = total[label];
            t.sx += a.sx;
            t.sy += a.sy;
            t.sz += a.sz;
            t.count += a.count;
        }

    if (total.empty())
        throw empty_point_set("no retained label has any voxel");

    std::vector<int> labels;
    std::vector<Eigen::VectorXd> points;
    labels.reserve(total.size());
    points.reserve(total.size());
    for (const auto& [label, a] : total) {
        const double n = static_cast<double>(a.count);
        const Eigen::Vector3d mean_index(a.sx / n, a.sy / n, a.sz / n);
        points.push_back(vol.grid.voxel_to_world.apply3(mean_index));
        labels.push_back(label);
    }
    return make_point_set(std::move(labels), std::move(points));
}

std::pair<PointSet, PointSet> pair_point_sets(const PointSet& reference,
                                              const PointSet& moving) {
    if (reference.points.empty() || moving.points.empty())
        throw empty_point_set("cannot pair an empty point set");
    const int d = reference.dim();

    std::vector<int> common;
    std::set_intersection(reference.labels.begin(), reference.labels.end(),
                          moving.labels.begin(), moving.labels.end(),
                          std::back_inserter(common));
    if (common.size() < static_cast<std::size_t>(d) + 1)
        throw insufficient_points(
            "only " + std::to_string(common.size()) +
            " labels are shared; at least d+1 = " + std::to_string(d + 1) +
            " are needed");

    auto select = [&](const PointSet& ps) {
        std::vector<int> labels;
        std::vector<Eigen::VectorXd> points;
        std::size_t cursor = 0;
        for (int label : common) {
            while (ps.labels[cursor] != label)
                ++cursor;
            labels.push_back(label);
            points.push_back(ps.points[cursor]);
        }
        return make_point_set(std::move(labels), std::move(points));
    };
    return {select(reference), select(moving)};
}

}  // namespace polaffini
