#include "polaffini/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polaffini/parallel.hpp"

namespace polaffini {

OverlapReport dice(const LabelVolume& reference, const LabelVolume& warped,
                   const LabelSelection& sel) {
    if (!reference.grid.same_geometry(warped.grid))
        throw grid_mismatch("Dice needs both volumes on the same grid");

    struct Counts {
        std::int64_t a = 0, b = 0, both = 0;
    };
    std::map<int, Counts> counts;
    const std::int64_t n = reference.grid.voxel_count();
    for (std::int64_t v = 0; v < n; ++v) {
        const int la = sel.remap(reference.data[v]);
        const int lb = sel.remap(warped.data[v]);
        if (la != 0)
            ++counts[la].a;
        if (lb != 0)
            ++counts[lb].b;
        if (la != 0 && la == lb)
            ++counts[la].both;
    }

    OverlapReport report;
    double sum = 0.0, wsum = 0.0;
    std::int64_t wtotal = 0;
    for (const auto& [label, c] : counts) {
        if (c.a + c.b == 0)
            continue;
        const double d = 2.0 * static_cast<double>(c.both) / static_cast<double>(c.a + c.b);
        report.per_label[label] = d;
        sum += d;
        wsum += d * static_cast<double>(c.a + c.b);
        wtotal += c.a + c.b;
    }
    report.labels_evaluated = static_cast<int>(report.per_label.size());
    if (report.labels_evaluated > 0) {
        report.mean_dice = sum / report.labels_evaluated;
        report.weighted_mean_dice = wsum / static_cast<double>(wtotal);
    }
    return report;
}

JacobianReport jacobian_report(const VectorField& full_displacement, int threads) {
    const Grid& g = full_displacement.grid;
    if (g.dims[0] < 3 || g.dims[1] < 3 || g.dims[2] < 3)
        throw grid_too_small("Jacobian needs at least 3 voxels per axis");

    const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
    const std::int64_t inx = nx - 2, iny = ny - 2, inz = nz - 2;
    const std::int64_t interior = inx * iny * inz;

    // dT/dindex, then to world derivatives through the inverse voxel step.
    const Eigen::Matrix3d to_world = g.voxel_to_world.linear.inverse();

    std::vector<double> dets(static_cast<std::size_t>(interior));
    parallel_for(interior, threads, [&](std::int64_t v) {
        const int k = static_cast<int>(v / (inx * iny)) + 1;
        const std::int64_t rem = v % (inx * iny);
        const int j = static_cast<int>(rem / inx) + 1;
        const int i = static_cast<int>(rem % inx) + 1;

        Eigen::Matrix3d jac;
        for (int axis = 0; axis < 3; ++axis) {
            const int di = axis == 0, dj = axis == 1, dk = axis == 2;
            const Eigen::Vector3d tp =
                g.world_at(i + di, j + dj, k + dk) +
                full_displacement.at(g.index(i + di, j + dj, k + dk));
            const Eigen::Vector3d tm =
                g.world_at(i - di, j - dj, k - dk) +
                full_displacement.at(g.index(i - di, j - dj, k - dk));
            jac.col(axis) = 0.5 * (tp - tm);
        }
        dets[static_cast<std::size_t>(v)] = (jac * to_world).determinant();
    });

    JacobianReport report;
    report.interior_voxels = interior;
    report.min_det = dets[0];
    report.max_det = dets[0];
    double sum = 0.0;
    for (double d : dets) {
        if (d < 0.0)
            ++report.negative_count;
        report.min_det = std::min(report.min_det, d);
        report.max_det = std::max(report.max_det, d);
        sum += d;
    }
    report.mean_det = sum / static_cast<double>(interior);
    return report;
}

JacobianReport jacobian_report(const PolyaffineResult& result, int threads) {
    return jacobian_report(result.full_displacement, threads);
}

std::string to_json(const OverlapReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "{\n  \"labels_evaluated\": " << report.labels_evaluated
        << ",\n  \"mean_dice\": " << report.mean_dice
        << ",\n  \"weighted_mean_dice\": " << report.weighted_mean_dice
        << ",\n  \"per_label\": {";
    bool first = true;
    for (const auto& [label, d] : report.per_label) {
        out << (first ? "" : ",") << "\n    \"" << label << "\": " << d;
        first = false;
    }
    out << "\n  }\n}\n";
    return out.str();
}

std::string to_table(const OverlapReport& report) {
    std::ostringstream out;
    out << "label      dice\n";
    char buf[64];
    for (const auto& [label, d] : report.per_label) {
        std::snprintf(buf, sizeof(buf), "%-9d %8.6f\n", label, d);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "mean      %8.6f  (%d labels)\n", report.mean_dice,
                  report.labels_evaluated);
    out << buf;
    return out.str();
}

std::string to_json(const JacobianReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "{\n  \"negative_count\": " << report.negative_count
        << ",\n  \"min_det\": " << report.min_det << ",\n  \"max_det\": " << report.max_det
        << ",\n  \"mean_det\": " << report.mean_det
        << ",\n  \"interior_voxels\": " << report.interior_voxels << "\n}\n";
    return out.str();
}

std::string to_table(const JacobianReport& report) {
    std::ostringstream out;
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "negative: %lld / %lld interior voxels\ndet range: [%g, %g], mean %g\n",
                  static_cast<long long>(report.negative_count),
                  static_cast<long long>(report.interior_voxels), report.min_det,
                  report.max_det, report.mean_det);
    out << buf;
    return out.str();
}

}  // namespace polaffini
