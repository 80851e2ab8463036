#include "polaffini/synth.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "polaffini/parallel.hpp"
#include "polaffini/volume.hpp"

namespace polaffini {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

double uniform(std::uint64_t& state, double lo, double hi) {
    state = splitmix64(state);
    const double u = static_cast<double>(state >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

AffineTransform random_affine(std::uint64_t seed, double max_angle, double det_min,
                              double det_max, double shear, double max_translation_mm) {
    std::uint64_t s = splitmix64(seed);

    // Rodrigues rotation about a random axis.
    Eigen::Vector3d axis(uniform(s, -1.0, 1.0), uniform(s, -1.0, 1.0),
                         uniform(s, -1.0, 1.0));
    if (axis.norm() < 1e-6)
        axis = Eigen::Vector3d::UnitZ();
    axis.normalize();
    const double angle = uniform(s, -max_angle, max_angle);
    Eigen::Matrix3d cross;
    cross << 0, -axis[2], axis[1], axis[2], 0, -axis[0], -axis[1], axis[0], 0;
    const Eigen::Matrix3d rot = Eigen::Matrix3d::Identity() + std::sin(angle) * cross +
                                (1.0 - std::cos(angle)) * cross * cross;

    // Anisotropic scaling whose product lands in the determinant window.
    const double det = uniform(s, det_min, det_max);
    const double aniso = uniform(s, 0.9, 1.1);
    const double base = std::cbrt(det);
    Eigen::Matrix3d scale = Eigen::Matrix3d::Zero();
    scale(0, 0) = base * aniso;
    scale(1, 1) = base / aniso;
    scale(2, 2) = base;

    Eigen::Matrix3d sh = Eigen::Matrix3d::Identity();
    sh(0, 1) = uniform(s, -shear, shear);
    sh(0, 2) = uniform(s, -shear, shear);
    sh(1, 2) = uniform(s, -shear, shear);

    AffineTransform a;
    a.linear = rot * scale * sh;
    a.translation = Eigen::Vector3d(uniform(s, -max_translation_mm, max_translation_mm),
                                    uniform(s, -max_translation_mm, max_translation_mm),
                                    uniform(s, -max_translation_mm, max_translation_mm));
    return a;
}

namespace {

Grid centered_grid(const std::array<int, 3>& dims, double spacing) {
    AffineTransform v2w = AffineTransform::identity(3);
    v2w.linear *= spacing;
    for (int a = 0; a < 3; ++a)
        v2w.translation(a) = -0.5 * spacing * (dims[a] - 1);
    return make_grid(dims, v2w);
}

// Voronoi cells restricted to a central ball; outside is background, so a
// moderately warped copy keeps all its regions inside the field of view.
LabelVolume voronoi_labels(const Grid& grid, const std::vector<Eigen::Vector3d>& sites,
                           double mask_radius, int threads) {
    LabelVolume vol = make_label_volume(grid);
    const int nx = grid.dims[0], ny = grid.dims[1];
    const std::int64_t plane = static_cast<std::int64_t>(nx) * ny;
    const double r2 = mask_radius * mask_radius;
    parallel_for(grid.voxel_count(), threads, [&](std::int64_t v) {
        const int k = static_cast<int>(v / plane);
        const int rem = static_cast<int>(v % plane);
        const int j = rem / nx;
        const int i = rem % nx;
        const Eigen::Vector3d x = grid.world_at(i, j, k);
        if (x.squaredNorm() > r2) {
            vol.data[v] = 0;
            return;
        }
        double best = std::numeric_limits<double>::infinity();
        int label = 0;
        for (std::size_t sidx = 0; sidx < sites.size(); ++sidx) {
            const double d2 = (x - sites[sidx]).squaredNorm();
            if (d2 < best) {
                best = d2;
                label = static_cast<int>(sidx) + 1;
            }
        }
        vol.data[v] = label;
    });
    return vol;
}

bool all_labels_big_enough(const LabelVolume& vol, int n_regions, std::int64_t min_voxels) {
    std::map<int, std::int64_t> counts;
    for (std::int32_t l : vol.data)
        ++counts[l];
    for (int label = 1; label <= n_regions; ++label) {
        auto it = counts.find(label);
        if (it == counts.end() || it->second < min_voxels)
            return false;
    }
    return true;
}

// Synthetic SVF: random local logs fused with narrow weights, so the
// ground-truth warp is markedly non-affine yet stays a clean exponential.
VectorField synth_svf(const SynthSpec& spec, const Grid& grid, int threads) {
    LocalTransformSet locals;
    locals.model = LocalModel::affine;
    const double extent = spec.spacing_mm * spec.dims[0];
    std::uint64_t s = mix_seed(spec.seed, 7);
    for (int a = 0; a < spec.anchors; ++a) {
        Eigen::Vector3d anchor(uniform(s, -0.3 * extent, 0.3 * extent),
                               uniform(s, -0.3 * extent, 0.3 * extent),
                               uniform(s, -0.3 * extent, 0.3 * extent));
        Eigen::Matrix4d g = Eigen::Matrix4d::Zero();
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                g(r, c) = uniform(s, -spec.magnitude, spec.magnitude) * 0.6;
        // Local translation pushes each anchor its own way; the -G*anchor
        // term keeps the motion's fixed point near the anchor.
        const Eigen::Vector3d t(uniform(s, -1.0, 1.0), uniform(s, -1.0, 1.0),
                                uniform(s, -1.0, 1.0));
        g.block<3, 1>(0, 3) =
            0.25 * spec.magnitude * extent * t - g.block<3, 3>(0, 0) * anchor;
        locals.transforms.push_back(AffineTransform::identity(3));
        locals.logs.push_back(LogAffine{g});
        locals.anchors.push_back(anchor);
    }
    WeightConfig cfg;
    cfg.sigma = 0.13 * extent;
    cfg.background_weight = 1e-5;
    return build_svf(locals, cfg, grid, threads);
}

}  // namespace

SynthResult generate(const SynthSpec& spec, int threads) {
    if (spec.n_regions < 5)
        throw data_error("synthetic volumes need at least 5 regions");
    if (spec.warp == WarpKind::polyaffine && spec.magnitude > 0.5)
        throw data_error("polyaffine warp magnitude above 0.5 is not guaranteed invertible");

    const Grid grid = centered_grid(spec.dims, spec.spacing_mm);

    SynthResult result;
    result.kind = spec.warp;

    // Ground-truth warp first (fixed by the seed, independent of the site
    // retries below); `pullback` maps moving-grid positions into the
    // reference so resampling realizes moving = reference o T^-1.
    AffineTransform affine_pullback = AffineTransform::identity(3);
    VectorField pullback_field;
    WarpRef pullback;
    switch (spec.warp) {
        case WarpKind::identity:
            break;
        case WarpKind::affine: {
            result.gt_affine = spec.affine;
            affine_pullback = invert(spec.affine);
            pullback.affine = &affine_pullback;
            break;
        }
        case WarpKind::polyaffine: {
            const Grid svf_grid = downsample_grid(grid, 2);
            result.gt_svf = synth_svf(spec, svf_grid, threads);
            const VectorField fwd = exponentiate(result.gt_svf, 8, threads);
            result.gt_full_displacement = resample_field(fwd, grid, threads);
            const VectorField bwd = exponentiate(negated(result.gt_svf), 8, threads);
            pullback_field = resample_field(bwd, grid, threads);
            pullback.displacement = &pullback_field;
            break;
        }
        case WarpKind::sinusoidal_fold: {
            // u_x = a sin(2 pi x / lambda): d(T_x)/dx = 1 + a (2 pi/lambda)
            // cos(...), so the map folds wherever a 2 pi / lambda > 1.
            result.gt_full_displacement = make_vector_field(grid);
            const double a = spec.fold_amplitude_mm;
            const double lambda = spec.fold_period_mm;
            const int nx = grid.dims[0], ny = grid.dims[1];
            const std::int64_t plane = static_cast<std::int64_t>(nx) * ny;
            parallel_for(grid.voxel_count(), threads, [&](std::int64_t v) {
                const int k = static_cast<int>(v / plane);
                const int rem = static_cast<int>(v % plane);
                const int j = rem / nx;
                const int i = rem % nx;
                const Eigen::Vector3d x = grid.world_at(i, j, k);
                result.gt_full_displacement.set(
                    v, Eigen::Vector3d(
                           a * std::sin(2.0 * std::numbers::pi * x[0] / lambda), 0.0, 0.0));
            });
            // A folded map has no inverse; the negated field is only used to
            // drag some labels around for completeness.
            pullback_field = negated(result.gt_full_displacement);
            pullback.displacement = &pullback_field;
            break;
        }
    }

    // Voronoi cells of random sites, redrawn while any region of either
    // volume is too small for a stable centroid.
    double half_min = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a)
        half_min = std::min(half_min, 0.5 * spec.spacing_mm * (spec.dims[a] - 1));
    const double mask_radius = 0.72 * half_min;
    for (int attempt = 0; attempt < 20; ++attempt) {
        std::uint64_t s = mix_seed(spec.seed, static_cast<std::uint64_t>(attempt));
        std::vector<Eigen::Vector3d> sites;
        sites.reserve(static_cast<std::size_t>(spec.n_regions));
        while (sites.size() < static_cast<std::size_t>(spec.n_regions)) {
            const Eigen::Vector3d cand(uniform(s, -0.85 * mask_radius, 0.85 * mask_radius),
                                       uniform(s, -0.85 * mask_radius, 0.85 * mask_radius),
                                       uniform(s, -0.85 * mask_radius, 0.85 * mask_radius));
            if (cand.norm() <= 0.85 * mask_radius)
                sites.push_back(cand);
        }
        result.reference = voronoi_labels(grid, sites, mask_radius, threads);
        if (!all_labels_big_enough(result.reference, spec.n_regions, 27))
            continue;

        if (spec.warp == WarpKind::identity)
            result.moving = result.reference;
        else
            result.moving = resample_labels(result.reference, pullback, grid, nullptr, threads);
        if (spec.warp == WarpKind::sinusoidal_fold ||
            all_labels_big_enough(result.moving, spec.n_regions, 27))
            return result;
    }
    throw data_error("could not draw sites giving every region at least 27 voxels");
}

}  // namespace polaffini
