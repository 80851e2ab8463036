#pragma once

#include <string>
#include <vector>

#include "polaffini/features.hpp"
#include "polaffini/field.hpp"
#include "polaffini/graph.hpp"

namespace polaffini {

enum class LocalModel { affine, rigid, translation };

std::string to_string(LocalModel m);
LocalModel local_model_from_string(const std::string& s);

/// One transform per feature point, fitted on its neighborhood, with its
/// principal logarithm and the weight-map center (mean of the
/// background-transformed neighborhood).
struct LocalTransformSet {
    std::vector<AffineTransform> transforms;
    std::vector<LogAffine> logs;
    std::vector<Eigen::Vector3d> anchors;
    LocalModel model = LocalModel::affine;
    std::vector<int> fallbacks;  // indices where a lower-dof model was substituted

    std::size_t size() const { return transforms.size(); }
};

// Sentinel for WeightConfig::sigma: derive it from the point spacing.
inline constexpr double kSigmaAuto = 0.0;

struct WeightConfig {
    enum class Kernel { gaussian };

    double sigma = 20.0;             // mm; kSigmaAuto derives it from the data
    double background_weight = 1e-5; // uniform pull toward the background affine
    Kernel kernel = Kernel::gaussian;
    double cutoff_radius = 0.0;      // mm; 0 keeps the kernel unbounded
};

/// Everything the estimation produces. The composition order is
/// T(x) = exp(V)(background(x)): the flow acts on background-aligned
/// coordinates, which makes a single-global-affine input reproduce that
/// affine exactly.
struct PolyaffineResult {
    AffineTransform background = AffineTransform::identity(3);
    VectorField svf;                // V on the (downsampled) estimation grid
    VectorField displacement;       // exp(V) - id, resampled onto the reference grid
    VectorField full_displacement;  // T - id on the reference grid
    NeighborhoodGraph graph;        // Delaunay neighborhoods on the reference points

    struct Provenance {
        int n_points = 0;
        double sigma = 0.0;
        double background_weight = 0.0;
        int steps = 0;
        int svf_downsample = 1;
        LocalModel model = LocalModel::affine;
        std::vector<int> fallback_indices;
    } info;
};

// Fits one transform per neighborhood of the graph, matching the
// background-transformed reference points to the moving points. Neighborhood
// degeneracies fall back affine -> rigid -> translation, recorded in
// `fallbacks`. With the translation model each neighborhood is the singleton
// {i}. matrix_log failures carry the offending point index.
LocalTransformSet estimate_local_transforms(const NeighborhoodGraph& graph,
                                            const PointSet& aligned_reference,
                                            const PointSet& moving, LocalModel model);

// Twice the mean nearest-neighbor distance (self excluded).
double sigma_heuristic(const PointSet& points);

// Fuses the local transform logarithms into a stationary velocity field:
// V(x) = [sum_i w_i(x) log(A_i) / (w_B + sum_i w_i(x))] applied to (x, 1),
// with w_i a Gaussian of the distance to anchor i.
VectorField build_svf(const LocalTransformSet& locals, const WeightConfig& cfg,
                      const Grid& grid, int threads = 1);

// Group exponential by scaling and squaring: halve `steps` times, then
// self-compose the displacement `steps` times with clamped trilinear
// sampling. Returns the displacement of the time-1 flow.
VectorField exponentiate(const VectorField& svf, int steps, int threads = 1);

// Trilinear resample of a vector field onto another grid.
VectorField resample_field(const VectorField& field, const Grid& target,
                           int threads = 1);

VectorField negated(const VectorField& field);

struct EstimateOptions {
    LocalModel model = LocalModel::affine;
    WeightConfig weights;
    int svf_downsample = 2;
    int steps = 7;
    int threads = 1;
};

// The whole pipeline: centroids, pairing, background affine, Delaunay graph
// on the reference points, local fits, SVF on the downsampled reference
// grid, exponentiation, upsampling, composition into T.
PolyaffineResult estimate_polyaffine(const LabelVolume& ref_seg,
                                     const LabelVolume& mov_seg,
                                     const LabelSelection& sel,
                                     const EstimateOptions& opts);

// Rebuilds displacement and full_displacement from a background affine and
// an SVF (e.g. reloaded from disk): the tail of the estimation pipeline.
PolyaffineResult assemble_result(const AffineTransform& background, VectorField svf,
                                 const Grid& reference_grid, int steps, int threads = 1);

// T(x) = x + full_displacement(x), clamped outside the reference grid; the
// flag reports when x fell outside.
Eigen::Vector3d full_transform_at(const PolyaffineResult& result,
                                  const Eigen::Vector3d& x,
                                  bool* out_of_domain = nullptr);

// T^-1 = exp(W) o background^-1 with W the background-conjugated negated
// velocity field.
PolyaffineResult invert_transform(const PolyaffineResult& result, int threads = 1);

}  // namespace polaffini
