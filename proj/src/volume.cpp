#include "polaffini/volume.hpp"

#include <zlib.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>

#include "polaffini/parallel.hpp"

namespace polaffini {

namespace {

// 348-byte NIfTI-1 header, field-for-field.
#pragma pack(push, 1)
struct Nifti1Header {
    std::int32_t sizeof_hdr;
    char data_type[10];
    char db_name[18];
    std::int32_t extents;
    std::int16_t session_error;
    char regular;
    char dim_info;
    std::int16_t dim[8];
    float intent_p1;
    float intent_p2;
    float intent_p3;
    std::int16_t intent_code;
    std::int16_t datatype;
    std::int16_t bitpix;
    std::int16_t slice_start;
    float pixdim[8];
    float vox_offset;
    float scl_slope;
    float scl_inter;
    std::int16_t slice_end;
    char slice_code;
    char xyzt_units;
    float cal_max;
    float cal_min;
    float slice_duration;
    float toffset;
    std::int32_t glmax;
    std::int32_t glmin;
    char descrip[80];
    char aux_file[24];
    std::int16_t qform_code;
    std::int16_t sform_code;
    float quatern_b;
    float quatern_c;
    float quatern_d;
    float qoffset_x;
    float qoffset_y;
    float qoffset_z;
    float srow_x[4];
    float srow_y[4];
    float srow_z[4];
    char intent_name[16];
    char magic[4];
};
#pragma pack(pop)
static_assert(sizeof(Nifti1Header) == 348, "NIfTI-1 header must be 348 bytes");

constexpr std::int16_t kDtU8 = 2;
constexpr std::int16_t kDtI16 = 4;
constexpr std::int16_t kDtI32 = 8;
constexpr std::int16_t kDtF32 = 16;
constexpr std::int16_t kDtF64 = 64;
constexpr std::int16_t kIntentDispVect = 1006;

std::int16_t nifti_code(DType t) {
    switch (t) {
        case DType::u8: return kDtU8;
        case DType::i16: return kDtI16;
        case DType::i32: return kDtI32;
        case DType::f32: return kDtF32;
        case DType::f64: return kDtF64;
    }
    return 0;
}

template <class T>
void swap_bytes(T& v) {
    auto* p = reinterpret_cast<std::uint8_t*>(&v);
    std::reverse(p, p + sizeof(T));
}

void swap_header(Nifti1Header& h) {
    swap_bytes(h.sizeof_hdr);
    swap_bytes(h.extents);
    swap_bytes(h.session_error);
    for (auto& d : h.dim) swap_bytes(d);
    swap_bytes(h.intent_p1);
    swap_bytes(h.intent_p2);
    swap_bytes(h.intent_p3);
    swap_bytes(h.intent_code);
    swap_bytes(h.datatype);
    swap_bytes(h.bitpix);
    swap_bytes(h.slice_start);
    for (auto& p : h.pixdim) swap_bytes(p);
    swap_bytes(h.vox_offset);
    swap_bytes(h.scl_slope);
    swap_bytes(h.scl_inter);
    swap_bytes(h.slice_end);
    swap_bytes(h.cal_max);
    swap_bytes(h.cal_min);
    swap_bytes(h.slice_duration);
    swap_bytes(h.toffset);
    swap_bytes(h.glmax);
    swap_bytes(h.glmin);
    swap_bytes(h.qform_code);
    swap_bytes(h.sform_code);
    swap_bytes(h.quatern_b);
    swap_bytes(h.quatern_c);
    swap_bytes(h.quatern_d);
    swap_bytes(h.qoffset_x);
    swap_bytes(h.qoffset_y);
    swap_bytes(h.qoffset_z);
    for (auto& v : h.srow_x) swap_bytes(v);
    for (auto& v : h.srow_y) swap_bytes(v);
    for (auto& v : h.srow_z) swap_bytes(v);
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw data_error("cannot open " + path);
    std::vector<std::uint8_t> head(2);
    in.read(reinterpret_cast<char*>(head.data()), 2);
    const bool gz = in.gcount() == 2 && head[0] == 0x1f && head[1] == 0x8b;
    in.close();

    if (gz) {
        gzFile f = gzopen(path.c_str(), "rb");
        if (!f)
            throw data_error("cannot open " + path);
        std::vector<std::uint8_t> out;
        std::uint8_t buf[1 << 16];
        int got;
        while ((got = gzread(f, buf, sizeof(buf))) > 0)
            out.insert(out.end(), buf, buf + got);
        const bool bad = got < 0;
        gzclose(f);
        if (bad)
            throw data_error("deflate stream in " + path + " is corrupt");
        return out;
    }

    std::ifstream raw(path, std::ios::binary | std::ios::ate);
    const auto size = raw.tellg();
    raw.seekg(0);
    std::vector<std::uint8_t> out(static_cast<std::size_t>(size));
    raw.read(reinterpret_cast<char*>(out.data()), size);
    if (!raw)
        throw data_error("failed reading " + path);
    return out;
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    const bool gz = path.size() > 3 && path.substr(path.size() - 3) == ".gz";
    if (gz) {
        gzFile f = gzopen(path.c_str(), "wb6");
        if (!f)
            throw data_error("cannot open " + path + " for writing");
        std::size_t off = 0;
        while (off < bytes.size()) {
            const unsigned chunk =
                static_cast<unsigned>(std::min<std::size_t>(bytes.size() - off, 1u << 28));
            if (gzwrite(f, bytes.data() + off, chunk) != static_cast<int>(chunk)) {
                gzclose(f);
                throw data_error("failed writing " + path);
            }
            off += chunk;
        }
        gzclose(f);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw data_error("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw data_error("failed writing " + path);
}

AffineTransform affine_from_quaternion(const Nifti1Header& h) {
    const double b = h.quatern_b, c = h.quatern_c, d = h.quatern_d;
    double a = 1.0 - (b * b + c * c + d * d);
    a = a < 0.0 ? 0.0 : std::sqrt(a);
    const double qfac = (h.pixdim[0] < 0.0f) ? -1.0 : 1.0;

    Eigen::Matrix3d r;
    r << a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c),
        2 * (b * c + a * d), a * a + c * c - b * b - d * d, 2 * (c * d - a * b),
        2 * (b * d - a * c), 2 * (c * d + a * b), a * a + d * d - b * b - c * c;

    AffineTransform t = AffineTransform::identity(3);
    for (int col = 0; col < 3; ++col) {
        const double scale = (col == 2 ? qfac : 1.0) * h.pixdim[col + 1];
        t.linear.col(col) = r.col(col) * scale;
    }
    t.translation = Eigen::Vector3d(h.qoffset_x, h.qoffset_y, h.qoffset_z);
    return t;
}

template <class Src>
void apply_scaling(std::vector<std::uint8_t>& bytes, std::int64_t count, double slope,
                   double inter) {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(count) * sizeof(double));
    const auto* src = reinterpret_cast<const Src*>(bytes.data());
    auto* dst = reinterpret_cast<double*>(out.data());
    for (std::int64_t i = 0; i < count; ++i)
        dst[i] = static_cast<double>(src[i]) * slope + inter;
    bytes.swap(out);
}

}  // namespace

int dtype_size(DType t) {
    switch (t) {
        case DType::u8: return 1;
        case DType::i16: return 2;
        case DType::i32: return 4;
        case DType::f32: return 4;
        case DType::f64: return 8;
    }
    return 0;
}

bool dtype_is_integer(DType t) {
    return t == DType::u8 || t == DType::i16 || t == DType::i32;
}

Volume read_volume(const std::string& path) {
    const std::vector<std::uint8_t> bytes = read_file_bytes(path);
    if (bytes.size() < sizeof(Nifti1Header))
        throw malformed_header(path + ": shorter than a NIfTI-1 header");

    Nifti1Header h;
    std::memcpy(&h, bytes.data(), sizeof(h));

    bool swapped = false;
    if (h.sizeof_hdr != 348) {
        swap_header(h);
        swapped = true;
        if (h.sizeof_hdr != 348)
            throw malformed_header(path + ": sizeof_hdr is not 348 in either byte order");
    }
    if (std::strncmp(h.magic, "n+1", 4) != 0)
        throw malformed_header(path + ": magic is not \"n+1\" (two-file NIfTI and ANALYZE unsupported)");

    const int ndim = h.dim[0];
    if (ndim < 3 || ndim > 5)
        throw dimensionality_unsupported(path + ": dim[0] = " + std::to_string(ndim) +
                                         " unsupported (want 3D or vector 4D)");
    for (int i = 1; i <= ndim; ++i)
        if (h.dim[i] <= 0)
            throw malformed_header(path + ": non-positive dim[" + std::to_string(i) + "]");

    int channels = 1;
    if (ndim == 4) {
        channels = h.dim[4];
    } else if (ndim == 5) {
        if (h.dim[4] != 1)
            throw dimensionality_unsupported(path + ": time series unsupported");
        channels = h.dim[5];
    }
    if (channels != 1 && channels != 3)
        throw dimensionality_unsupported(path + ": " + std::to_string(channels) +
                                         " components per voxel unsupported (want 1 or 3)");

    DType dtype;
    switch (h.datatype) {
        case kDtU8: dtype = DType::u8; break;
        case kDtI16: dtype = DType::i16; break;
        case kDtI32: dtype = DType::i32; break;
        case kDtF32: dtype = DType::f32; break;
        case kDtF64: dtype = DType::f64; break;
        default:
            throw unsupported_datatype(path + ": NIfTI datatype code " +
                                       std::to_string(h.datatype) + " unsupported");
    }

    AffineTransform v2w = AffineTransform::identity(3);
    if (h.sform_code > 0) {
        const float* rows[3] = {h.srow_x, h.srow_y, h.srow_z};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j)
                v2w.linear(i, j) = rows[i][j];
            v2w.translation(i) = rows[i][3];
        }
    } else if (h.qform_code > 0) {
        v2w = affine_from_quaternion(h);
    } else {
        for (int i = 0; i < 3; ++i) {
            const double p = h.pixdim[i + 1];
            v2w.linear(i, i) = (p != 0.0) ? p : 1.0;
        }
    }
    if (std::abs(v2w.linear.determinant()) <= 1e-12)
        throw malformed_header(path + ": voxel-to-world affine is singular");

    Volume vol;
    vol.grid = make_grid({h.dim[1], h.dim[2], h.dim[3]}, v2w);
    vol.channels = channels;
    vol.dtype = dtype;

    const std::size_t offset = static_cast<std::size_t>(std::max(h.vox_offset, 348.0f));
    const std::size_t need =
        static_cast<std::size_t>(vol.element_count()) * dtype_size(dtype);
    if (bytes.size() < offset + need)
        throw malformed_header(path + ": file truncated (payload shorter than header dims)");
    vol.bytes.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                     bytes.begin() + static_cast<std::ptrdiff_t>(offset + need));

    if (swapped && dtype_size(dtype) > 1) {
        const int es = dtype_size(dtype);
        for (std::size_t i = 0; i < vol.bytes.size(); i += es)
            std::reverse(vol.bytes.begin() + static_cast<std::ptrdiff_t>(i),
                         vol.bytes.begin() + static_cast<std::ptrdiff_t>(i + es));
    }

    // Honor scl_slope/scl_inter on read (promoting to f64); never written.
    const double slope = h.scl_slope;
    const double inter = h.scl_inter;
    if (slope != 0.0 && (slope != 1.0 || inter != 0.0)) {
        const std::int64_t count = vol.element_count();
        switch (dtype) {
            case DType::u8: apply_scaling<std::uint8_t>(vol.bytes, count, slope, inter); break;
            case DType::i16: apply_scaling<std::int16_t>(vol.bytes, count, slope, inter); break;
            case DType::i32: apply_scaling<std::int32_t>(vol.bytes, count, slope, inter); break;
            case DType::f32: apply_scaling<float>(vol.bytes, count, slope, inter); break;
            case DType::f64: apply_scaling<double>(vol.bytes, count, slope, inter); break;
        }
        vol.dtype = DType::f64;
    }
    return vol;
}

void write_volume(const Volume& vol, const std::string& path) {
    if (vol.channels != 1 && vol.channels != 3)
        throw dimensionality_unsupported("only scalar or 3-vector volumes can be written");
    if (static_cast<std::int64_t>(vol.bytes.size()) !=
        vol.element_count() * dtype_size(vol.dtype))
        throw data_error("volume byte buffer does not match its header dims");

    Nifti1Header h;
    std::memset(&h, 0, sizeof(h));
    h.sizeof_hdr = 348;
    h.regular = 'r';
    h.dim[0] = static_cast<std::int16_t>(vol.channels == 1 ? 3 : 4);
    h.dim[1] = static_cast<std::int16_t>(vol.grid.dims[0]);
    h.dim[2] = static_cast<std::int16_t>(vol.grid.dims[1]);
    h.dim[3] = static_cast<std::int16_t>(vol.grid.dims[2]);
    h.dim[4] = static_cast<std::int16_t>(vol.channels == 1 ? 1 : 3);
    for (int i = h.dim[0] + 1; i < 8; ++i)
        h.dim[i] = 1;
    h.intent_code = (vol.channels == 3) ? kIntentDispVect : 0;
    h.datatype = nifti_code(vol.dtype);
    h.bitpix = static_cast<std::int16_t>(8 * dtype_size(vol.dtype));
    h.pixdim[0] = 1.0f;
    for (int i = 0; i < 3; ++i)
        h.pixdim[i + 1] = static_cast<float>(vol.grid.voxel_to_world.linear.col(i).norm());
    h.pixdim[4] = 1.0f;
    h.vox_offset = 352.0f;
    h.scl_slope = 1.0f;
    h.scl_inter = 0.0f;
    h.xyzt_units = 2;  // millimetres
    std::strncpy(h.descrip, "polaffini", sizeof(h.descrip) - 1);
    h.qform_code = 0;
    h.sform_code = 2;  // aligned anatomy
    for (int j = 0; j < 3; ++j) {
        h.srow_x[j] = static_cast<float>(vol.grid.voxel_to_world.linear(0, j));
        h.srow_y[j] = static_cast<float>(vol.grid.voxel_to_world.linear(1, j));
        h.srow_z[j] = static_cast<float>(vol.grid.voxel_to_world.linear(2, j));
    }
    h.srow_x[3] = static_cast<float>(vol.grid.voxel_to_world.translation(0));
    h.srow_y[3] = static_cast<float>(vol.grid.voxel_to_world.translation(1));
    h.srow_z[3] = static_cast<float>(vol.grid.voxel_to_world.translation(2));
    std::memcpy(h.magic, "n+1", 4);

    std::vector<std::uint8_t> bytes(352 + vol.bytes.size(), 0);
    std::memcpy(bytes.data(), &h, sizeof(h));
    std::memcpy(bytes.data() + 352, vol.bytes.data(), vol.bytes.size());
    write_file_bytes(path, bytes);
}

// ---------------------------------------------------------------------------
// Typed conversions
// ---------------------------------------------------------------------------

namespace {

template <class T>
const T* typed(const Volume& v) {
    return reinterpret_cast<const T*>(v.bytes.data());
}

}  // namespace

LabelVolume to_label_volume(const Volume& vol) {
    if (vol.channels != 1)
        throw dimensionality_unsupported("label volume must be scalar");
    if (!dtype_is_integer(vol.dtype))
        throw unsupported_datatype("label volume must hold integers (u8/i16/i32)");
    LabelVolume out = make_label_volume(vol.grid);
    const std::int64_t n = vol.grid.voxel_count();
    switch (vol.dtype) {
        case DType::u8:
            for (std::int64_t i = 0; i < n; ++i) out.data[i] = typed<std::uint8_t>(vol)[i];
            break;
        case DType::i16:
            for (std::int64_t i = 0; i < n; ++i) out.data[i] = typed<std::int16_t>(vol)[i];
            break;
        default:
            for (std::int64_t i = 0; i < n; ++i) out.data[i] = typed<std::int32_t>(vol)[i];
            break;
    }
    for (std::int64_t i = 0; i < n; ++i)
        if (out.data[i] < 0)
            throw data_error("label volume holds negative labels");
    return out;
}

Volume from_label_volume(const LabelVolume& vol, DType dtype) {
    if (!dtype_is_integer(dtype))
        throw unsupported_datatype("labels must be written as an integer datatype");
    Volume out;
    out.grid = vol.grid;
    out.channels = 1;
    out.dtype = dtype;
    const std::int64_t n = vol.grid.voxel_count();
    out.bytes.resize(static_cast<std::size_t>(n) * dtype_size(dtype));
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int32_t v = vol.data[i];
        switch (dtype) {
            case DType::u8:
                if (v > 255) throw data_error("label exceeds u8 range");
                out.bytes[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v);
                break;
            case DType::i16: {
                if (v > 32767) throw data_error("label exceeds i16 range");
                const std::int16_t s = static_cast<std::int16_t>(v);
                std::memcpy(out.bytes.data() + i * 2, &s, 2);
                break;
            }
            default:
                std::memcpy(out.bytes.data() + i * 4, &v, 4);
                break;
        }
    }
    return out;
}

VectorField to_vector_field(const Volume& vol) {
    if (vol.channels != 3)
        throw dimensionality_unsupported("vector field volume must carry 3 components");
    if (vol.dtype != DType::f32 && vol.dtype != DType::f64)
        throw unsupported_datatype("vector field must be f32 or f64");
    VectorField f = make_vector_field(vol.grid);
    const std::int64_t n = vol.grid.voxel_count();
    for (int c = 0; c < 3; ++c)
        for (std::int64_t i = 0; i < n; ++i)
            f.data[3 * i + c] = (vol.dtype == DType::f32)
                                    ? typed<float>(vol)[c * n + i]
                                    : typed<double>(vol)[c * n + i];
    return f;
}

Volume from_vector_field(const VectorField& field, DType dtype) {
    if (dtype != DType::f32 && dtype != DType::f64)
        throw unsupported_datatype("vector field must be written as f32 or f64");
    Volume out;
    out.grid = field.grid;
    out.channels = 3;
    out.dtype = dtype;
    const std::int64_t n = field.grid.voxel_count();
    out.bytes.resize(static_cast<std::size_t>(3 * n) * dtype_size(dtype));
    if (dtype == DType::f32) {
        auto* dst = reinterpret_cast<float*>(out.bytes.data());
        for (int c = 0; c < 3; ++c)
            for (std::int64_t i = 0; i < n; ++i)
                dst[c * n + i] = static_cast<float>(field.data[3 * i + c]);
    } else {
        auto* dst = reinterpret_cast<double*>(out.bytes.data());
        for (int c = 0; c < 3; ++c)
            for (std::int64_t i = 0; i < n; ++i)
                dst[c * n + i] = field.data[3 * i + c];
    }
    return out;
}

LabelVolume read_label_volume(const std::string& path) {
    return to_label_volume(read_volume(path));
}

void write_label_volume(const LabelVolume& vol, const std::string& path, DType dtype) {
    write_volume(from_label_volume(vol, dtype), path);
}

VectorField read_vector_field(const std::string& path) {
    return to_vector_field(read_volume(path));
}

void write_vector_field(const VectorField& field, const std::string& path, DType dtype) {
    write_volume(from_vector_field(field, dtype), path);
}

// ---------------------------------------------------------------------------
// Resampling
// ---------------------------------------------------------------------------

namespace {

template <class T>
Volume resample_typed(const Volume& moving, const WarpRef& transform, const Grid& target,
                      Interp interp, ResampleReport* report, int threads) {
    Volume out;
    out.grid = target;
    out.channels = moving.channels;
    out.dtype = moving.dtype;
    out.bytes.resize(static_cast<std::size_t>(out.element_count()) * sizeof(T));

    const T* src = reinterpret_cast<const T*>(moving.bytes.data());
    T* dst = reinterpret_cast<T*>(out.bytes.data());
    const std::int64_t src_n = moving.grid.voxel_count();
    const std::int64_t dst_n = target.voxel_count();
    const int nx = moving.grid.dims[0], ny = moving.grid.dims[1], nz = moving.grid.dims[2];
    const int tx = target.dims[0], ty = target.dims[1];
    const int channels = moving.channels;

    std::atomic<std::int64_t> clamped{0};

    parallel_for(dst_n, threads, [&](std::int64_t v) {
        const int k = static_cast<int>(v / (static_cast<std::int64_t>(tx) * ty));
        const int rem = static_cast<int>(v % (static_cast<std::int64_t>(tx) * ty));
        const int j = rem / tx;
        const int i = rem % tx;

        const Eigen::Vector3d y = transform.apply(target.world_at(i, j, k));
        const Eigen::Vector3d c = moving.grid.index_of(y);

        const bool outside = c[0] < -0.5 || c[1] < -0.5 || c[2] < -0.5 ||
                             c[0] > nx - 0.5 || c[1] > ny - 0.5 || c[2] > nz - 0.5;
        if (outside)
            clamped.fetch_add(1, std::memory_order_relaxed);

        if (interp == Interp::nearest) {
            auto near = [](double q, int n) {
                const long r = std::lround(q);
                return static_cast<int>(std::clamp<long>(r, 0, n - 1));
            };
            const std::int64_t s =
                moving.grid.index(near(c[0], nx), near(c[1], ny), near(c[2], nz));
            for (int ch = 0; ch < channels; ++ch)
                dst[static_cast<std::int64_t>(ch) * dst_n + v] =
                    src[static_cast<std::int64_t>(ch) * src_n + s];
            return;
        }

        const double fx = std::floor(c[0]), fy = std::floor(c[1]), fz = std::floor(c[2]);
        const double rx = c[0] - fx, ry = c[1] - fy, rz = c[2] - fz;
        auto clampi = [](double q, int n) {
            if (q < 0.0) return 0;
            if (q > n - 1) return n - 1;
            return static_cast<int>(q);
        };
        const int xs[2] = {clampi(fx, nx), clampi(fx + 1, nx)};
        const int ys[2] = {clampi(fy, ny), clampi(fy + 1, ny)};
        const int zs[2] = {clampi(fz, nz), clampi(fz + 1, nz)};
        const double wx[2] = {1.0 - rx, rx}, wy[2] = {1.0 - ry, ry}, wz[2] = {1.0 - rz, rz};

        for (int ch = 0; ch < channels; ++ch) {
            double acc = 0.0;
            for (int dz = 0; dz < 2; ++dz)
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) {
                        const double w = wx[dx] * wy[dy] * wz[dz];
                        if (w == 0.0)
                            continue;
                        acc += w * static_cast<double>(
                                       src[static_cast<std::int64_t>(ch) * src_n +
                                           moving.grid.index(xs[dx], ys[dy], zs[dz])]);
                    }
            dst[static_cast<std::int64_t>(ch) * dst_n + v] = static_cast<T>(acc);
        }
    });

    if (report)
        report->clamped_samples += clamped.load();
    return out;
}

}  // namespace

Volume resample(const Volume& moving, const WarpRef& transform, const Grid& target,
                Interp interp, ResampleReport* report, int threads) {
    if (interp == Interp::trilinear && dtype_is_integer(moving.dtype))
        throw interpolation_mismatch(
            "trilinear interpolation would blend integer labels; use nearest");
    switch (moving.dtype) {
        case DType::u8:
            return resample_typed<std::uint8_t>(moving, transform, target, interp, report, threads);
        case DType::i16:
            return resample_typed<std::int16_t>(moving, transform, target, interp, report, threads);
        case DType::i32:
            return resample_typed<std::int32_t>(moving, transform, target, interp, report, threads);
        case DType::f32:
            return resample_typed<float>(moving, transform, target, interp, report, threads);
        case DType::f64:
            return resample_typed<double>(moving, transform, target, interp, report, threads);
    }
    throw unsupported_datatype("unknown element type");
}

LabelVolume resample_labels(const LabelVolume& moving, const WarpRef& transform,
                            const Grid& target, ResampleReport* report, int threads) {
    const Volume src = from_label_volume(moving, DType::i32);
    return to_label_volume(resample(src, transform, target, Interp::nearest, report, threads));
}

}  // namespace polaffini
