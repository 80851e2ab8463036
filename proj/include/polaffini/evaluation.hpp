#pragma once

#include <map>
#include <string>

#include "polaffini/features.hpp"
#include "polaffini/field.hpp"
#include "polaffini/polyaffine.hpp"

namespace polaffini {

struct OverlapReport {
    std::map<int, double> per_label;  // Dice in [0, 1]
    double mean_dice = 0.0;           // unweighted over labels
    double weighted_mean_dice = 0.0;  // volume-weighted variant, behind a flag
    int labels_evaluated = 0;
};

// Per-label Dice 2|A^B| / (|A|+|B|) between two label volumes on the same
// grid; the selection's exclusions and merges apply to both volumes before
// counting. Labels with no voxels in either volume are omitted.
OverlapReport dice(const LabelVolume& reference, const LabelVolume& warped,
                   const LabelSelection& sel = {});

struct JacobianReport {
    std::int64_t negative_count = 0;
    double min_det = 0.0;
    double max_det = 0.0;
    double mean_det = 0.0;
    std::int64_t interior_voxels = 0;
};

// Jacobian determinant of T(x) = x + full_displacement(x) by central
// differences in world coordinates; boundary voxels are excluded (no
// one-sided stencils).
JacobianReport jacobian_report(const VectorField& full_displacement, int threads = 1);
JacobianReport jacobian_report(const PolyaffineResult& result, int threads = 1);

std::string to_json(const OverlapReport& report);
std::string to_table(const OverlapReport& report);
std::string to_json(const JacobianReport& report);
std::string to_table(const JacobianReport& report);

}  // namespace polaffini
