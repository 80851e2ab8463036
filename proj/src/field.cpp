#include "polaffini/field.hpp"

#include <cmath>

namespace polaffini {

bool Grid::same_geometry(const Grid& other, double tol) const {
    if (dims != other.dims)
        return false;
    const Eigen::MatrixXd a = voxel_to_world.matrix();
    const Eigen::MatrixXd b = other.voxel_to_world.matrix();
    return ((a - b).cwiseAbs().maxCoeff() <= tol);
}

Grid make_grid(std::array<int, 3> dims, const AffineTransform& voxel_to_world) {
    for (int d : dims)
        if (d <= 0)
            throw data_error("grid dimensions must be positive");
    Grid g;
    g.dims = dims;
    g.voxel_to_world = voxel_to_world;
    g.world_to_voxel = invert(voxel_to_world);
    return g;
}

Grid downsample_grid(const Grid& g, int factor) {
    if (factor < 1)
        throw data_error("downsample factor must be >= 1");
    std::array<int, 3> dims{};
    for (int a = 0; a < 3; ++a)
        dims[a] = (g.dims[a] + factor - 1) / factor;
    AffineTransform v2w = g.voxel_to_world;
    v2w.linear *= static_cast<double>(factor);
    return make_grid(dims, v2w);
}

VectorField make_vector_field(const Grid& grid) {
    VectorField f;
    f.grid = grid;
    f.data.assign(static_cast<std::size_t>(grid.voxel_count()) * 3, 0.0);
    return f;
}

LabelVolume make_label_volume(const Grid& grid) {
    LabelVolume v;
    v.grid = grid;
    v.data.assign(static_cast<std::size_t>(grid.voxel_count()), 0);
    return v;
}

Eigen::Vector3d sample_trilinear(const VectorField& f, const Eigen::Vector3d& world) {
    const Eigen::Vector3d c = f.grid.index_of(world);
    const int nx = f.grid.dims[0], ny = f.grid.dims[1], nz = f.grid.dims[2];

    double fx = std::floor(c[0]), fy = std::floor(c[1]), fz = std::floor(c[2]);
    double rx = c[0] - fx, ry = c[1] - fy, rz = c[2] - fz;

    auto clampi = [](double v, int n) {
        if (v < 0.0) return 0;
        if (v > n - 1) return n - 1;
        return static_cast<int>(v);
    };
    const int x0 = clampi(fx, nx), x1 = clampi(fx + 1, nx);
    const int y0 = clampi(fy, ny), y1 = clampi(fy + 1, ny);
    const int z0 = clampi(fz, nz), z1 = clampi(fz + 1, nz);

    Eigen::Vector3d out = Eigen::Vector3d::Zero();
    const double wz[2] = {1.0 - rz, rz};
    const double wy[2] = {1.0 - ry, ry};
    const double wx[2] = {1.0 - rx, rx};
    const int xs[2] = {x0, x1}, ys[2] = {y0, y1}, zs[2] = {z0, z1};
    for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
                const double w = wx[dx] * wy[dy] * wz[dz];
                if (w == 0.0)
                    continue;
                const std::int64_t v = f.grid.index(xs[dx], ys[dy], zs[dz]);
                out[0] += w * f.data[3 * v];
                out[1] += w * f.data[3 * v + 1];
                out[2] += w * f.data[3 * v + 2];
            }
    return out;
}

}  // namespace polaffini
