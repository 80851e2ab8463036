#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "polaffini/affine.hpp"

namespace polaffini {

/// A regular 3D voxel grid with its voxel-index-to-world-mm affine. A
/// voxel's world position is the affine applied to its integer index
/// (center-of-voxel convention).
struct Grid {
    std::array<int, 3> dims{0, 0, 0};
    AffineTransform voxel_to_world = AffineTransform::identity(3);
    AffineTransform world_to_voxel = AffineTransform::identity(3);

    std::int64_t voxel_count() const {
        return static_cast<std::int64_t>(dims[0]) * dims[1] * dims[2];
    }
    std::int64_t index(int i, int j, int k) const {
        return (static_cast<std::int64_t>(k) * dims[1] + j) * dims[0] + i;
    }
    Eigen::Vector3d world_at(int i, int j, int k) const {
        return voxel_to_world.apply3(Eigen::Vector3d(i, j, k));
    }
    Eigen::Vector3d index_of(const Eigen::Vector3d& world) const {
        return world_to_voxel.apply3(world);
    }
    bool same_geometry(const Grid& other, double tol = 1e-5) const;
};

Grid make_grid(std::array<int, 3> dims, const AffineTransform& voxel_to_world);

// Grid spanning the same world box as `g` with every axis decimated by
// `factor` (svf voxel (i,j,k) sits at reference voxel (f*i, f*j, f*k)).
Grid downsample_grid(const Grid& g, int factor);

/// Dense 3-component field; vectors are world-space mm, stored interleaved.
struct VectorField {
    Grid grid;
    std::vector<double> data;  // 3 per voxel, x fastest

    Eigen::Vector3d at(std::int64_t v) const {
        return {data[3 * v], data[3 * v + 1], data[3 * v + 2]};
    }
    void set(std::int64_t v, const Eigen::Vector3d& u) {
        data[3 * v] = u[0];
        data[3 * v + 1] = u[1];
        data[3 * v + 2] = u[2];
    }
};

VectorField make_vector_field(const Grid& grid);

/// 3D integer label grid; label 0 is background.
struct LabelVolume {
    Grid grid;
    std::vector<std::int32_t> data;

    std::int32_t at(int i, int j, int k) const { return data[grid.index(i, j, k)]; }
};

LabelVolume make_label_volume(const Grid& grid);

// Trilinear sample of a vector field at a world position, with the sample
// index clamped to the grid so the lookup is total.
Eigen::Vector3d sample_trilinear(const VectorField& f, const Eigen::Vector3d& world);

}  // namespace polaffini
