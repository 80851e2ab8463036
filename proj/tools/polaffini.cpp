// polaffini: feature-based polyaffine initialization for non-linear
// registration. Estimates a dense diffeomorphic transformation from two
// segmentation label volumes, applies transformations, and scores alignment.

#include <CLI11.hpp>
#include <json.hpp>

#include <polaffini/evaluation.hpp>
#include <polaffini/parallel.hpp>
#include <polaffini/polyaffine.hpp>
#include <polaffini/synth.hpp>
#include <polaffini/volume.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace polaffini;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int default_threads() {
    if (const char* env = std::getenv("POLAFFINI_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1)
            return v;
    }
    return 0;  // all hardware threads
}

double parse_sigma(const std::string& s) {
    if (s == "auto")
        return kSigmaAuto;
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || v <= 0.0)
        throw CLI::ValidationError("--sigma", "expected a positive number of mm or `auto`");
    return v;
}

LabelSelection selection_from(const std::string& path) {
    return path.empty() ? LabelSelection{} : load_label_selection(path);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw data_error("cannot open " + path + " for writing");
    out << text;
    if (!out)
        throw data_error("failed writing " + path);
}

double max_displacement_mm(const VectorField& f) {
    double peak = 0.0;
    for (std::int64_t v = 0; v < f.grid.voxel_count(); ++v)
        peak = std::max(peak, f.at(v).norm());
    return peak;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

struct EstimateArgs {
    std::string ref, mov, out_prefix, labels, graph_out, model = "polyaffine", sigma = "20";
    double background_weight = 1e-5;
    int steps = 7;
    int svf_downsample = 2;
    int threads = default_threads();
};

int cmd_estimate(const EstimateArgs& a) {
    const LabelSelection sel = selection_from(a.labels);
    const LabelVolume ref = read_label_volume(a.ref);
    const LabelVolume mov = read_label_volume(a.mov);

    json sidecar;
    sidecar["tool"] = "polaffini";
    sidecar["subcommand"] = "estimate";
    sidecar["reference"] = a.ref;
    sidecar["moving"] = a.mov;
    sidecar["model"] = a.model;
    sidecar["threads"] = resolve_threads(a.threads);

    const fs::path prefix(a.out_prefix);
    if (prefix.has_parent_path())
        fs::create_directories(prefix.parent_path());

    if (a.model == "affine") {
        // Feature-based affine baseline: the background fit alone.
        Timer timer;
        const PointSet ref_pts = extract_centroids(ref, sel, a.threads);
        const PointSet mov_pts = extract_centroids(mov, sel, a.threads);
        const auto [rp, mp] = pair_point_sets(ref_pts, mov_pts);
        const AffineTransform background = fit_affine_lls(rp, mp);
        const double elapsed = timer.seconds();

        write_affine_text(background, a.out_prefix + "_affine.txt");
        sidecar["n_points"] = rp.size();
        sidecar["timing"] = {{"estimate_s", elapsed}};
        write_text(a.out_prefix + "_params.json", sidecar.dump(2) + "\n");
        std::printf("ok n_points=%zu fallbacks=0 time_s=%.3f\n", rp.size(), elapsed);
        return 0;
    }

    EstimateOptions opts;
    opts.model = local_model_from_string(a.model == "polyaffine" ? "affine" : a.model);
    opts.weights.sigma = parse_sigma(a.sigma);
    opts.weights.background_weight = a.background_weight;
    opts.steps = a.steps;
    opts.svf_downsample = a.svf_downsample;
    opts.threads = a.threads;

    Timer timer;
    const PolyaffineResult result = estimate_polyaffine(ref, mov, sel, opts);
    const double elapsed = timer.seconds();
    const double max_disp = max_displacement_mm(result.full_displacement);

    write_affine_text(result.background, a.out_prefix + "_affine.txt");
    write_vector_field(result.svf, a.out_prefix + "_svf.nii.gz");
    write_vector_field(result.displacement, a.out_prefix + "_disp.nii.gz");
    write_vector_field(result.full_displacement, a.out_prefix + "_fulldisp.nii.gz");
    if (!a.graph_out.empty())
        write_graph_text(result.graph, a.graph_out);

    sidecar["n_points"] = result.info.n_points;
    sidecar["sigma_mm"] = result.info.sigma;
    sidecar["background_weight"] = result.info.background_weight;
    sidecar["steps"] = result.info.steps;
    sidecar["svf_downsample"] = result.info.svf_downsample;
    sidecar["local_model"] = to_string(result.info.model);
    sidecar["fallback_indices"] = result.info.fallback_indices;
    sidecar["max_displacement_mm"] = max_disp;
    sidecar["timing"] = {{"estimate_s", elapsed}};
    write_text(a.out_prefix + "_params.json", sidecar.dump(2) + "\n");

    std::printf("ok n_points=%d fallbacks=%zu sigma=%g max_disp_mm=%.6g time_s=%.3f\n",
                result.info.n_points, result.info.fallback_indices.size(),
                result.info.sigma, max_disp, elapsed);
    return 0;
}

// ---------------------------------------------------------------------------
// apply
// ---------------------------------------------------------------------------

struct ApplyArgs {
    std::string in, ref, out, affine, disp, interp = "auto";
    int threads = default_threads();
};

int cmd_apply(const ApplyArgs& a) {
    const Volume moving = read_volume(a.in);
    const Grid target = a.ref.empty() ? moving.grid : read_volume(a.ref).grid;

    std::optional<AffineTransform> affine;
    if (!a.affine.empty())
        affine = read_affine_text(a.affine);
    std::optional<VectorField> disp;
    if (!a.disp.empty())
        disp = read_vector_field(a.disp);

    WarpRef warp;
    if (affine)
        warp.affine = &*affine;
    if (disp)
        warp.displacement = &*disp;

    Interp interp;
    if (a.interp == "nearest")
        interp = Interp::nearest;
    else if (a.interp == "trilinear")
        interp = Interp::trilinear;
    else
        interp = dtype_is_integer(moving.dtype) ? Interp::nearest : Interp::trilinear;

    ResampleReport report;
    const Volume out = resample(moving, warp, target, interp, &report, a.threads);
    if (fs::path(a.out).has_parent_path())
        fs::create_directories(fs::path(a.out).parent_path());
    write_volume(out, a.out);
    std::printf("ok clamped_samples=%lld\n", static_cast<long long>(report.clamped_samples));
    return 0;
}

// ---------------------------------------------------------------------------
// dice / jacobian
// ---------------------------------------------------------------------------

struct DiceArgs {
    std::string ref, warped, labels, json_out;
    bool weighted = false;
};

int cmd_dice(const DiceArgs& a) {
    const OverlapReport report =
        dice(read_label_volume(a.ref), read_label_volume(a.warped), selection_from(a.labels));
    std::fputs(to_table(report).c_str(), stdout);
    if (a.weighted)
        std::printf("weighted  %8.6f\n", report.weighted_mean_dice);
    std::printf("mean_dice=%.6f\n", report.mean_dice);
    if (!a.json_out.empty())
        write_text(a.json_out, to_json(report));
    return 0;
}

struct JacobianArgs {
    std::string disp, json_out;
    int threads = default_threads();
};

int cmd_jacobian(const JacobianArgs& a) {
    const JacobianReport report = jacobian_report(read_vector_field(a.disp), a.threads);
    std::fputs(to_table(report).c_str(), stdout);
    std::printf("negative_count=%lld\n", static_cast<long long>(report.negative_count));
    if (!a.json_out.empty())
        write_text(a.json_out, to_json(report));
    return 0;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string out_dir, warp = "identity";
    std::uint64_t seed = 1;
    int regions = 12;
    int dim = 64;
    double spacing = 2.0;
    int anchors = 8;
    double magnitude = 0.2;
    double fold_amplitude = 12.0;
    double fold_period = 24.0;
    int threads = default_threads();
};

int cmd_synth(const SynthArgs& a) {
    SynthSpec spec;
    spec.seed = a.seed;
    spec.n_regions = a.regions;
    spec.dims = {a.dim, a.dim, a.dim};
    spec.spacing_mm = a.spacing;
    spec.anchors = a.anchors;
    spec.magnitude = a.magnitude;
    spec.fold_amplitude_mm = a.fold_amplitude;
    spec.fold_period_mm = a.fold_period;
    if (a.warp == "identity")
        spec.warp = WarpKind::identity;
    else if (a.warp == "affine") {
        spec.warp = WarpKind::affine;
        spec.affine = random_affine(mix_seed(a.seed, 99), 0.3, 0.85, 1.2, 0.05, 5.0);
    } else if (a.warp == "polyaffine")
        spec.warp = WarpKind::polyaffine;
    else if (a.warp == "fold")
        spec.warp = WarpKind::sinusoidal_fold;
    else
        throw CLI::ValidationError("--warp", "expected identity|affine|polyaffine|fold");

    const SynthResult result = generate(spec, a.threads);

    fs::create_directories(a.out_dir);
    const fs::path dir(a.out_dir);
    write_label_volume(result.reference, (dir / "ref.nii.gz").string());
    write_label_volume(result.moving, (dir / "mov.nii.gz").string());

    json sidecar;
    sidecar["tool"] = "polaffini";
    sidecar["subcommand"] = "synth";
    sidecar["seed"] = a.seed;
    sidecar["regions"] = a.regions;
    sidecar["dim"] = a.dim;
    sidecar["spacing_mm"] = a.spacing;
    sidecar["warp"] = a.warp;

    switch (result.kind) {
        case WarpKind::identity:
            break;
        case WarpKind::affine:
            write_affine_text(result.gt_affine, (dir / "gt_affine.txt").string());
            break;
        case WarpKind::polyaffine:
            sidecar["anchors"] = a.anchors;
            sidecar["magnitude"] = a.magnitude;
            write_vector_field(result.gt_svf, (dir / "gt_svf.nii.gz").string());
            write_vector_field(result.gt_full_displacement,
                               (dir / "gt_fulldisp.nii.gz").string());
            break;
        case WarpKind::sinusoidal_fold:
            sidecar["fold_amplitude_mm"] = a.fold_amplitude;
            sidecar["fold_period_mm"] = a.fold_period;
            write_vector_field(result.gt_full_displacement,
                               (dir / "gt_fulldisp.nii.gz").string());
            break;
    }
    write_text((dir / "synth.json").string(), sidecar.dump(2) + "\n");
    std::printf("ok regions=%d dim=%d warp=%s\n", a.regions, a.dim, a.warp.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// invert
// ---------------------------------------------------------------------------

struct InvertArgs {
    std::string affine, svf, ref, out_prefix;
    int steps = 7;
    int threads = default_threads();
};

int cmd_invert(const InvertArgs& a) {
    const AffineTransform background = read_affine_text(a.affine);
    VectorField svf = read_vector_field(a.svf);
    const Grid full_grid = read_volume(a.ref).grid;

    const PolyaffineResult forward =
        assemble_result(background, std::move(svf), full_grid, a.steps, a.threads);
    const PolyaffineResult inverse = invert_transform(forward, a.threads);

    const fs::path prefix(a.out_prefix);
    if (prefix.has_parent_path())
        fs::create_directories(prefix.parent_path());
    write_affine_text(inverse.background, a.out_prefix + "_affine.txt");
    write_vector_field(inverse.svf, a.out_prefix + "_svf.nii.gz");
    write_vector_field(inverse.displacement, a.out_prefix + "_disp.nii.gz");
    write_vector_field(inverse.full_displacement, a.out_prefix + "_fulldisp.nii.gz");
    std::printf("ok max_disp_mm=%.6g\n", max_displacement_mm(inverse.full_displacement));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feature-based polyaffine initialization for non-linear registration"};
    app.require_subcommand(1);

    EstimateArgs est;
    auto* est_cmd = app.add_subcommand(
        "estimate", "Estimate a polyaffine transformation from two label volumes");
    est_cmd->add_option("--ref", est.ref, "Reference segmentation (.nii/.nii.gz)")->required();
    est_cmd->add_option("--mov", est.mov, "Moving segmentation")->required();
    est_cmd->add_option("--out-prefix", est.out_prefix, "Prefix for output files")->required();
    est_cmd->add_option("--model", est.model, "polyaffine|affine|rigid|translation")
        ->check(CLI::IsMember({"polyaffine", "affine", "rigid", "translation"}))
        ->capture_default_str();
    est_cmd->add_option("--sigma", est.sigma, "Weight kernel sigma in mm, or `auto`")
        ->capture_default_str();
    est_cmd->add_option("--background-weight", est.background_weight, "Uniform background weight")
        ->capture_default_str();
    est_cmd->add_option("--steps", est.steps, "Scaling-and-squaring steps")
        ->capture_default_str();
    est_cmd->add_option("--svf-downsample", est.svf_downsample, "SVF grid downsampling factor")
        ->capture_default_str();
    est_cmd->add_option("--labels", est.labels, "Label selection config (exclusions/merges)");
    est_cmd->add_option("--graph-out", est.graph_out,
                        "Also write the Delaunay neighborhood graph (label-keyed text)");
    est_cmd->add_option("--threads", est.threads,
                        "Worker threads (default: POLAFFINI_THREADS or all cores)");

    ApplyArgs apply_args;
    auto* apply_cmd = app.add_subcommand("apply", "Resample a volume through a transformation");
    apply_cmd->add_option("--in", apply_args.in, "Moving volume")->required();
    apply_cmd->add_option("--ref", apply_args.ref,
                          "Volume defining the target grid (default: input grid)");
    apply_cmd->add_option("--out", apply_args.out, "Output volume")->required();
    apply_cmd->add_option("--affine", apply_args.affine, "Affine text file (applied first)");
    apply_cmd->add_option("--disp", apply_args.disp,
                          "Displacement field sampled after the affine");
    apply_cmd->add_option("--interp", apply_args.interp, "nearest|trilinear|auto")
        ->check(CLI::IsMember({"nearest", "trilinear", "auto"}))
        ->capture_default_str();
    apply_cmd->add_option("--threads", apply_args.threads, "Worker threads");

    DiceArgs dice_args;
    auto* dice_cmd = app.add_subcommand("dice", "Dice overlap between two label volumes");
    dice_cmd->add_option("--ref", dice_args.ref, "Reference labels")->required();
    dice_cmd->add_option("--warped", dice_args.warped, "Transformed moving labels")->required();
    dice_cmd->add_option("--labels", dice_args.labels, "Label selection config");
    dice_cmd->add_option("--json", dice_args.json_out, "Write the report as JSON here");
    dice_cmd->add_flag("--weighted", dice_args.weighted, "Also print the volume-weighted mean");

    JacobianArgs jac_args;
    auto* jac_cmd = app.add_subcommand("jacobian", "Jacobian determinant report of a warp");
    jac_cmd->add_option("--disp", jac_args.disp, "Full displacement field (T - id)")->required();
    jac_cmd->add_option("--json", jac_args.json_out, "Write the report as JSON here");
    jac_cmd->add_option("--threads", jac_args.threads, "Worker threads");

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic segmentation pair");
    synth_cmd->add_option("--out-dir", synth_args.out_dir, "Output directory")->required();
    synth_cmd->add_option("--seed", synth_args.seed, "Random seed")->capture_default_str();
    synth_cmd->add_option("--regions", synth_args.regions, "Number of regions")
        ->capture_default_str();
    synth_cmd->add_option("--dim", synth_args.dim, "Voxels per axis")->capture_default_str();
    synth_cmd->add_option("--spacing", synth_args.spacing, "Voxel size in mm")
        ->capture_default_str();
    synth_cmd->add_option("--warp", synth_args.warp, "identity|affine|polyaffine|fold")
        ->capture_default_str();
    synth_cmd->add_option("--anchors", synth_args.anchors, "Polyaffine warp anchors")
        ->capture_default_str();
    synth_cmd->add_option("--magnitude", synth_args.magnitude, "Polyaffine warp magnitude")
        ->capture_default_str();
    synth_cmd->add_option("--fold-amplitude", synth_args.fold_amplitude, "Fold amplitude in mm")
        ->capture_default_str();
    synth_cmd->add_option("--fold-period", synth_args.fold_period, "Fold period in mm")
        ->capture_default_str();
    synth_cmd->add_option("--threads", synth_args.threads, "Worker threads");

    InvertArgs inv_args;
    auto* inv_cmd = app.add_subcommand("invert", "Invert an estimated transformation");
    inv_cmd->add_option("--affine", inv_args.affine, "Background affine text file")->required();
    inv_cmd->add_option("--svf", inv_args.svf, "Stationary velocity field")->required();
    inv_cmd->add_option("--ref", inv_args.ref, "Volume defining the full-resolution grid")
        ->required();
    inv_cmd->add_option("--out-prefix", inv_args.out_prefix, "Prefix for output files")
        ->required();
    inv_cmd->add_option("--steps", inv_args.steps, "Scaling-and-squaring steps")
        ->capture_default_str();
    inv_cmd->add_option("--threads", inv_args.threads, "Worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (est_cmd->parsed())
            return cmd_estimate(est);
        if (apply_cmd->parsed())
            return cmd_apply(apply_args);
        if (dice_cmd->parsed())
            return cmd_dice(dice_args);
        if (jac_cmd->parsed())
            return cmd_jacobian(jac_args);
        if (synth_cmd->parsed())
            return cmd_synth(synth_args);
        if (inv_cmd->parsed())
            return cmd_invert(inv_args);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const numeric_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
