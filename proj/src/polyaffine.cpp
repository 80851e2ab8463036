#include "polaffini/polyaffine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polaffini/parallel.hpp"

namespace polaffini {

std::string to_string(LocalModel m) {
    switch (m) {
        case LocalModel::affine: return "affine";
        case LocalModel::rigid: return "rigid";
        case LocalModel::translation: return "translation";
    }
    return "affine";
}

LocalModel local_model_from_string(const std::string& s) {
    if (s == "affine") return LocalModel::affine;
    if (s == "rigid") return LocalModel::rigid;
    if (s == "translation") return LocalModel::translation;
    throw data_error("unknown local model `" + s + "`");
}

LocalTransformSet estimate_local_transforms(const NeighborhoodGraph& graph,
                                            const PointSet& aligned_reference,
                                            const PointSet& moving, LocalModel model) {
    const std::size_t n = aligned_reference.size();
    if (graph.size() != n || moving.size() != n)
        throw pairing_mismatch("graph and point sets must cover the same points");

    LocalTransformSet out;
    out.model = model;
    out.transforms.resize(n);
    out.logs.resize(n);
    out.anchors.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        std::vector<Eigen::VectorXd> x, y;
        if (model == LocalModel::translation) {
            // Translations need no context: singleton neighborhoods.
            x.push_back(aligned_reference.points[i]);
            y.push_back(moving.points[i]);
        } else {
            for (int p : graph.neighbors[i]) {
                x.push_back(aligned_reference.points[static_cast<std::size_t>(p)]);
                y.push_back(moving.points[static_cast<std::size_t>(p)]);
            }
        }

        AffineTransform fit;
        bool fell_back = false;
        switch (model) {
            case LocalModel::affine:
                try {
                    fit = fit_affine_core(x, y);
                } catch (const degenerate_configuration&) {
                    fell_back = true;
                    try {
                        fit = fit_rigid_core(x, y);
                    } catch (const degenerate_configuration&) {
                        fit = fit_translation_core(x, y);
                    }
                }
                break;
            case LocalModel::rigid:
                try {
                    fit = fit_rigid_core(x, y);
                } catch (const degenerate_configuration&) {
                    fell_back = true;
                    fit = fit_translation_core(x, y);
                }
                break;
            case LocalModel::translation:
                fit = fit_translation_core(x, y);
                break;
        }
        if (fell_back)
            out.fallbacks.push_back(static_cast<int>(i));

        try {
            out.logs[i] = matrix_log(fit);
        } catch (log_undefined& e) {
            e.set_stage("local transform " + std::to_string(i) + " (label " +
                        std::to_string(aligned_reference.labels[i]) + ")");
            throw;
        }
        out.transforms[i] = std::move(fit);

        Eigen::Vector3d anchor = Eigen::Vector3d::Zero();
        for (const auto& p : x)
            anchor += Eigen::Vector3d(p);
        out.anchors[i] = anchor / static_cast<double>(x.size());
    }
    return out;
}

double sigma_heuristic(const PointSet& points) {
    const std::size_t n = points.size();
    if (n < 2)
        throw insufficient_points("sigma heuristic needs at least 2 points");
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < n; ++p) {
            if (p == i)
                continue;
            best = std::min(best, (points.points[i] - points.points[p]).norm());
        }
        sum += best;
    }
    return 2.0 * sum / static_cast<double>(n);
}

VectorField build_svf(const LocalTransformSet& locals, const WeightConfig& cfg,
                      const Grid& grid, int threads) {
    const std::size_t n = locals.size();
    if (n == 0)
        throw no_transforms("no local transforms to fuse");
    if (cfg.sigma <= 0.0)
        throw data_error("weight kernel sigma must be positive");
    if (cfg.background_weight < 0.0)
        throw data_error("background weight must be non-negative");
    if (cfg.cutoff_radius != 0.0 && cfg.cutoff_radius < 3.0 * cfg.sigma)
        throw data_error("cutoff radius must be at least 3 sigma");

    // Flatten per-anchor data for the voxel loop: anchor position and the
    // top d rows of log(A_i).
    struct AnchorData {
        double ax, ay, az;
        double m[12];  // row-major 3x4
    };
    std::vector<AnchorData> anchors(n);
    for (std::size_t i = 0; i < n; ++i) {
        AnchorData& a = anchors[i];
        a.ax = locals.anchors[i][0];
        a.ay = locals.anchors[i][1];
        a.az = locals.anchors[i][2];
        const Eigen::MatrixXd& m = locals.logs[i].matrix;
        if (m.rows() != 4)
            throw data_error("SVF fusion is 3D only");
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 4; ++c)
                a.m[4 * r + c] = m(r, c);
    }

    const double inv_two_sigma_sq = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
    // Weights below 1e-12 are dropped: the background weight dominates far
    // sooner. Only safe when there is a background weight; with w_B = 0 the
    // ratio must stay exact at any distance.
    const bool use_cutoff = cfg.background_weight > 0.0;
    double cutoff_r2 = std::numeric_limits<double>::infinity();
    if (use_cutoff)
        cutoff_r2 = 2.0 * cfg.sigma * cfg.sigma * std::log(1e12);
    if (cfg.cutoff_radius > 0.0)
        cutoff_r2 = std::min(cutoff_r2, cfg.cutoff_radius * cfg.cutoff_radius);

    VectorField field = make_vector_field(grid);
    const int nx = grid.dims[0], ny = grid.dims[1];
    const std::int64_t plane = static_cast<std::int64_t>(nx) * ny;

    // Voxel positions via the affine's raw coefficients.
    const Eigen::Matrix3d lin = grid.voxel_to_world.linear;
    const Eigen::Vector3d off = grid.voxel_to_world.translation;

    parallel_for(grid.voxel_count(), threads, [&](std::int64_t v) {
        const int k = static_cast<int>(v / plane);
        const int rem = static_cast<int>(v % plane);
        const int j = rem / nx;
        const int i = rem % nx;

        const double x = lin(0, 0) * i + lin(0, 1) * j + lin(0, 2) * k + off[0];
        const double y = lin(1, 0) * i + lin(1, 1) * j + lin(1, 2) * k + off[1];
        const double z = lin(2, 0) * i + lin(2, 1) * j + lin(2, 2) * k + off[2];

        double vx = 0.0, vy = 0.0, vz = 0.0, wsum = 0.0;
        for (const AnchorData& a : anchors) {
            const double dx = x - a.ax, dy = y - a.ay, dz = z - a.az;
            const double r2 = dx * dx + dy * dy + dz * dz;
            if (r2 > cutoff_r2)
                continue;
            const double w = std::exp(-r2 * inv_two_sigma_sq);
            vx += w * (a.m[0] * x + a.m[1] * y + a.m[2] * z + a.m[3]);
            vy += w * (a.m[4] * x + a.m[5] * y + a.m[6] * z + a.m[7]);
            vz += w * (a.m[8] * x + a.m[9] * y + a.m[10] * z + a.m[11]);
            wsum += w;
        }
        const double denom = cfg.background_weight + wsum;
        double* out = field.data.data() + 3 * v;
        if (denom > 0.0) {
            out[0] = vx / denom;
            out[1] = vy / denom;
            out[2] = vz / denom;
        } else {
            out[0] = out[1] = out[2] = 0.0;
        }
    });
    return field;
}

VectorField exponentiate(const VectorField& svf, int steps, int threads) {
    if (steps < 1)
        throw data_error("exponentiation needs at least 1 step");

    VectorField disp = make_vector_field(svf.grid);
    const std::int64_t nvox = svf.grid.voxel_count();
    const double scale = std::ldexp(1.0, -steps);
    parallel_for(nvox, threads, [&](std::int64_t v) {
        disp.data[3 * v] = svf.data[3 * v] * scale;
        disp.data[3 * v + 1] = svf.data[3 * v + 1] * scale;
        disp.data[3 * v + 2] = svf.data[3 * v + 2] * scale;
    });

    const int nx = svf.grid.dims[0], ny = svf.grid.dims[1];
    const std::int64_t plane = static_cast<std::int64_t>(nx) * ny;
    const Eigen::Matrix3d lin = svf.grid.voxel_to_world.linear;
    const Eigen::Vector3d off = svf.grid.voxel_to_world.translation;

    VectorField next = make_vector_field(svf.grid);
    for (int s = 0; s < steps; ++s) {
        parallel_for(nvox, threads, [&](std::int64_t v) {
            const int k = static_cast<int>(v / plane);
            const int rem = static_cast<int>(v % plane);
            const int j = rem / nx;
            const int i = rem % nx;

            const Eigen::Vector3d x(lin(0, 0) * i + lin(0, 1) * j + lin(0, 2) * k + off[0],
                                    lin(1, 0) * i + lin(1, 1) * j + lin(1, 2) * k + off[1],
                                    lin(2, 0) * i + lin(2, 1) * j + lin(2, 2) * k + off[2]);
            const Eigen::Vector3d d = disp.at(v);
            const Eigen::Vector3d d2 = sample_trilinear(disp, x + d);
            next.set(v, d + d2);
        });
        disp.data.swap(next.data);
    }
    return disp;
}

VectorField resample_field(const VectorField& field, const Grid& target, int threads) {
    VectorField out = make_vector_field(target);
    const int nx = target.dims[0], ny = target.dims[1];
    const std::int64_t plane = static_cast<std::int64_t>(nx) * ny;
    parallel_for(target.voxel_count(), threads, [&](std::int64_t v) {
        const int k = static_cast<int>(v / plane);
        const int rem = static_cast<int>(v % plane);
        const int j = rem / nx;
        const int i = rem % nx;
        out.set(v, sample_trilinear(field, target.world_at(i, j, k)));
    });
    return out;
}

VectorField negated(const VectorField& field) {
    VectorField out = field;
    for (double& v : out.data)
        v = -v;
    return out;
}

namespace {

template <class Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (error& e) {
        e.set_stage(name);
        throw;
    }
}

// full_displacement(x) = background(x) + disp(background(x)) - x.
VectorField compose_full_displacement(const Grid& grid, const AffineTransform& background,
                                      const VectorField& disp, int threads) {
    VectorField out = make_vector_field(grid);
    const int nx = grid.dims[0], ny = grid.dims[1];
    const std::int64_t plane = static_cast<std::int64_t>(nx) * ny;
    const Eigen::Matrix3d lin = grid.voxel_to_world.linear;
    const Eigen::Vector3d off = grid.voxel_to_world.translation;
    const Eigen::Matrix3d bl = background.linear;
    const Eigen::Vector3d bt = background.translation;

    parallel_for(grid.voxel_count(), threads, [&](std::int64_t v) {
        const int k = static_cast<int>(v / plane);
        const int rem = static_cast<int>(v % plane);
        const int j = rem / nx;
        const int i = rem % nx;
        const Eigen::Vector3d x(lin(0, 0) * i + lin(0, 1) * j + lin(0, 2) * k + off[0],
                                lin(1, 0) * i + lin(1, 1) * j + lin(1, 2) * k + off[1],
                                lin(2, 0) * i + lin(2, 1) * j + lin(2, 2) * k + off[2]);
        const Eigen::Vector3d bx = bl * x + bt;
        out.set(v, bx + sample_trilinear(disp, bx) - x);
    });
    return out;
}

}  // namespace

PolyaffineResult estimate_polyaffine(const LabelVolume& ref_seg,
                                     const LabelVolume& mov_seg,
                                     const LabelSelection& sel,
                                     const EstimateOptions& opts) {
    const int threads = opts.threads;
    if (opts.svf_downsample < 1)
        throw data_error("svf downsample factor must be >= 1");

    const PointSet ref_points = stage("feature extraction (reference)", [&] {
        return extract_centroids(ref_seg, sel, threads);
    });
    const PointSet mov_points = stage("feature extraction (moving)", [&] {
        return extract_centroids(mov_seg, sel, threads);
    });

    auto [reference, moving] = stage("pairing", [&] {
        return pair_point_sets(ref_points, mov_points);
    });

    const AffineTransform background = stage("background affine", [&] {
        return fit_affine_lls(reference, moving);
    });

    // Reference points carried into the background-aligned space.
    std::vector<Eigen::VectorXd> aligned_pts;
    aligned_pts.reserve(reference.size());
    for (const auto& p : reference.points)
        aligned_pts.push_back(background.apply(p));
    const PointSet aligned = make_point_set(reference.labels, std::move(aligned_pts));

    NeighborhoodGraph graph = stage("neighborhood graph", [&] {
        return delaunay_graph(reference);
    });

    const LocalTransformSet locals = stage("local transforms", [&] {
        return estimate_local_transforms(graph, aligned, moving, opts.model);
    });

    WeightConfig cfg = opts.weights;
    if (cfg.sigma == kSigmaAuto)
        cfg.sigma = stage("sigma heuristic", [&] { return sigma_heuristic(aligned); });

    PolyaffineResult result;
    result.background = background;
    result.graph = std::move(graph);
    result.info.n_points = static_cast<int>(reference.size());
    result.info.sigma = cfg.sigma;
    result.info.background_weight = cfg.background_weight;
    result.info.steps = opts.steps;
    result.info.svf_downsample = opts.svf_downsample;
    result.info.model = opts.model;
    result.info.fallback_indices = locals.fallbacks;

    const Grid svf_grid = downsample_grid(ref_seg.grid, opts.svf_downsample);
    result.svf = stage("svf fusion", [&] {
        return build_svf(locals, cfg, svf_grid, threads);
    });

    const VectorField disp_small = stage("exponentiation", [&] {
        return exponentiate(result.svf, opts.steps, threads);
    });

    result.displacement = stage("upsampling", [&] {
        return opts.svf_downsample == 1 ? disp_small
                                        : resample_field(disp_small, ref_seg.grid, threads);
    });

    result.full_displacement = stage("composition", [&] {
        return compose_full_displacement(ref_seg.grid, background, result.displacement,
                                         threads);
    });
    return result;
}

PolyaffineResult assemble_result(const AffineTransform& background, VectorField svf,
                                 const Grid& reference_grid, int steps, int threads) {
    PolyaffineResult result;
    result.background = background;
    result.svf = std::move(svf);
    result.info.steps = steps;
    const VectorField disp_small = exponentiate(result.svf, steps, threads);
    result.displacement = result.svf.grid.same_geometry(reference_grid)
                              ? disp_small
                              : resample_field(disp_small, reference_grid, threads);
    result.full_displacement =
        compose_full_displacement(reference_grid, background, result.displacement, threads);
    return result;
}

Eigen::Vector3d full_transform_at(const PolyaffineResult& result, const Eigen::Vector3d& x,
                                  bool* out_of_domain) {
    const Grid& g = result.full_displacement.grid;
    if (out_of_domain) {
        const Eigen::Vector3d c = g.index_of(x);
        *out_of_domain = c[0] < -0.5 || c[1] < -0.5 || c[2] < -0.5 ||
                         c[0] > g.dims[0] - 0.5 || c[1] > g.dims[1] - 0.5 ||
                         c[2] > g.dims[2] - 0.5;
    }
    return x + sample_trilinear(result.full_displacement, x);
}

PolyaffineResult invert_transform(const PolyaffineResult& result, int threads) {
    const AffineTransform background_inv = invert(result.background);

    // T = exp(V) o B, so T^-1 = B^-1 o exp(-V) = exp(W) o B^-1 with the
    // conjugated field W(x) = -B_L^-1 V(B x).
    const Grid& svf_grid = result.svf.grid;
    VectorField w = make_vector_field(svf_grid);
    const int nx = svf_grid.dims[0], ny = svf_grid.dims[1];
    const std::int64_t plane = static_cast<std::int64_t>(nx) * ny;
    const Eigen::Matrix3d lin = svf_grid.voxel_to_world.linear;
    const Eigen::Vector3d off = svf_grid.voxel_to_world.translation;
    const Eigen::Matrix3d bl = result.background.linear;
    const Eigen::Vector3d bt = result.background.translation;
    const Eigen::Matrix3d bli = background_inv.linear;

    parallel_for(svf_grid.voxel_count(), threads, [&](std::int64_t v) {
        const int k = static_cast<int>(v / plane);
        const int rem = static_cast<int>(v % plane);
        const int j = rem / nx;
        const int i = rem % nx;
        const Eigen::Vector3d x(lin(0, 0) * i + lin(0, 1) * j + lin(0, 2) * k + off[0],
                                lin(1, 0) * i + lin(1, 1) * j + lin(1, 2) * k + off[1],
                                lin(2, 0) * i + lin(2, 1) * j + lin(2, 2) * k + off[2]);
        w.set(v, -(bli * sample_trilinear(result.svf, bl * x + bt)));
    });

    const int steps = result.info.steps > 0 ? result.info.steps : 7;
    PolyaffineResult inv = assemble_result(background_inv, std::move(w),
                                           result.full_displacement.grid, steps, threads);
    inv.info = result.info;
    return inv;
}

}  // namespace polaffini
