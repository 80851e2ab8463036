#pragma once

#include <array>
#include <cstdint>

#include "polaffini/field.hpp"
#include "polaffini/polyaffine.hpp"

namespace polaffini {

enum class WarpKind { identity, affine, polyaffine, sinusoidal_fold };

/// Recipe for a synthetic paired segmentation with known ground truth:
/// a Voronoi labeling of seeded random sites, and a moving copy pulled
/// through the inverse of the ground-truth warp.
struct SynthSpec {
    std::uint64_t seed = 1;
    int n_regions = 12;
    std::array<int, 3> dims{64, 64, 64};
    double spacing_mm = 2.0;
    WarpKind warp = WarpKind::identity;

    AffineTransform affine = AffineTransform::identity(3);  // warp == affine

    int anchors = 8;         // warp == polyaffine
    double magnitude = 0.2;  // scale of the random local logs

    double fold_amplitude_mm = 12.0;  // warp == sinusoidal_fold
    double fold_period_mm = 24.0;
};

struct SynthResult {
    LabelVolume reference;
    LabelVolume moving;
    WarpKind kind = WarpKind::identity;
    AffineTransform gt_affine = AffineTransform::identity(3);  // affine warps
    VectorField gt_svf;                // polyaffine warps
    VectorField gt_full_displacement;  // polyaffine and fold warps, reference grid
};

// Deterministic in the seed: same spec, byte-identical volumes. Every label
// is guaranteed at least 27 voxels in both volumes (sites are redrawn from a
// sub-seed otherwise, bounded retries).
SynthResult generate(const SynthSpec& spec, int threads = 1);

// Random invertible affine for test workloads: rotation up to max_angle,
// determinant inside [det_min, det_max], bounded shear and translation.
AffineTransform random_affine(std::uint64_t seed, double max_angle = 0.5,
                              double det_min = 0.5, double det_max = 2.0,
                              double shear = 0.1, double max_translation_mm = 5.0);

// Uniform double in [lo, hi) from a counter-based generator; stable across
// platforms and thread counts.
double uniform(std::uint64_t& state, double lo, double hi);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace polaffini
