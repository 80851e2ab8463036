#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polaffini/field.hpp"

namespace polaffini {

enum class DType : int { u8, i16, i32, f32, f64 };

int dtype_size(DType t);
bool dtype_is_integer(DType t);

/// Raw volume as stored on disk: scalar (channels == 1) or 3-vector.
/// Vector payloads are planar (whole component volumes back to back), the
/// NIfTI 4D layout.
struct Volume {
    Grid grid;
    int channels = 1;
    DType dtype = DType::u8;
    std::vector<std::uint8_t> bytes;

    std::int64_t element_count() const { return grid.voxel_count() * channels; }
};

// NIfTI-1 single-file volumes (magic "n+1"), plain or deflate-compressed.
// The voxel-to-world affine comes from the sform when sform_code > 0, else
// the qform, else diagonal pixdim.
Volume read_volume(const std::string& path);
void write_volume(const Volume& vol, const std::string& path);

// Conversions between the on-disk carrier and the typed grids.
LabelVolume to_label_volume(const Volume& vol);
Volume from_label_volume(const LabelVolume& vol, DType dtype = DType::i16);
VectorField to_vector_field(const Volume& vol);
Volume from_vector_field(const VectorField& field, DType dtype = DType::f32);

LabelVolume read_label_volume(const std::string& path);
void write_label_volume(const LabelVolume& vol, const std::string& path,
                        DType dtype = DType::i16);
VectorField read_vector_field(const std::string& path);
void write_vector_field(const VectorField& field, const std::string& path,
                        DType dtype = DType::f32);

enum class Interp { nearest, trilinear };

/// World-to-world map used by resampling: x -> A x + D(A x), either part
/// optional. A PolyaffineResult applies as {&background, &displacement};
/// a composed warp file alone as {nullptr, &full_displacement}.
struct WarpRef {
    const AffineTransform* affine = nullptr;    // applied first
    const VectorField* displacement = nullptr;  // sampled at the affine image

    Eigen::Vector3d apply(const Eigen::Vector3d& x) const {
        Eigen::Vector3d y = affine ? affine->apply3(x) : x;
        if (displacement)
            y += sample_trilinear(*displacement, y);
        return y;
    }
};

struct ResampleReport {
    std::int64_t clamped_samples = 0;  // target voxels that sampled outside the moving volume
};

// Pulls the moving volume onto the target grid through the transform with a
// single interpolation. Out-of-domain samples clamp to the nearest edge
// voxel and are counted in the report. Integer (label) data must use
// nearest interpolation.
Volume resample(const Volume& moving, const WarpRef& transform, const Grid& target,
                Interp interp, ResampleReport* report = nullptr, int threads = 1);

LabelVolume resample_labels(const LabelVolume& moving, const WarpRef& transform,
                            const Grid& target, ResampleReport* report = nullptr,
                            int threads = 1);

}  // namespace polaffini
