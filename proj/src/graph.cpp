#include "polaffini/graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace polaffini {

namespace {

// --- sign predicates -------------------------------------------------------
// Evaluated in double with a conservative error bound; ambiguous results are
// re-evaluated in long double, and only then reported as exact degeneracy.

template <class T>
T det3(T a, T b, T c, T d, T e, T f, T g, T h, T i) {
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

// Same expansion with every product taken positively; an upper bound on the
// magnitudes floating through det3, used for the rounding-error bound.
template <class T>
T perm3(T a, T b, T c, T d, T e, T f, T g, T h, T i) {
    return a * (e * i + f * h) + b * (d * i + f * g) + c * (d * h + e * g);
}

template <class T>
struct SignedValue {
    T value;
    T magnitude;
};

template <class T>
SignedValue<T> orient3d_value(const T* a, const T* b, const T* c, const T* d) {
    const T adx = a[0] - d[0], ady = a[1] - d[1], adz = a[2] - d[2];
    const T bdx = b[0] - d[0], bdy = b[1] - d[1], bdz = b[2] - d[2];
    const T cdx = c[0] - d[0], cdy = c[1] - d[1], cdz = c[2] - d[2];
    const T v = det3(adx, ady, adz, bdx, bdy, bdz, cdx, cdy, cdz);
    const T m = perm3(std::abs(adx), std::abs(ady), std::abs(adz),
                      std::abs(bdx), std::abs(bdy), std::abs(bdz),
                      std::abs(cdx), std::abs(cdy), std::abs(cdz));
    return {v, m};
}

template <class T>
SignedValue<T> insphere_value(const T* a, const T* b, const T* c, const T* d,
                              const T* e) {
    T rows[4][4];
    T mags[4][4];
    const T* pts[4] = {a, b, c, d};
    for (int r = 0; r < 4; ++r) {
        T sq = 0, sqm = 0;
        for (int k = 0; k < 3; ++k) {
            const T diff = pts[r][k] - e[k];
            rows[r][k] = diff;
            mags[r][k] = std::abs(diff);
            sq += diff * diff;
            sqm += diff * diff;
        }
        rows[r][3] = sq;
        mags[r][3] = sqm;
    }
    // 4x4 determinant by expansion along the last column.
    T v = 0, m = 0;
    for (int r = 0; r < 4; ++r) {
        int o[3], oi = 0;
        for (int q = 0; q < 4; ++q)
            if (q != r)
                o[oi++] = q;
        const T minor = det3(rows[o[0]][0], rows[o[0]][1], rows[o[0]][2],
                             rows[o[1]][0], rows[o[1]][1], rows[o[1]][2],
                             rows[o[2]][0], rows[o[2]][1], rows[o[2]][2]);
        const T minor_mag = perm3(mags[o[0]][0], mags[o[0]][1], mags[o[0]][2],
                                  mags[o[1]][0], mags[o[1]][1], mags[o[1]][2],
                                  mags[o[2]][0], mags[o[2]][1], mags[o[2]][2]);
        const T sign = ((r % 2) == 0) ? T(1) : T(-1);
        v += sign * rows[r][3] * minor;
        m += mags[r][3] * minor_mag;
    }
    // Row swap parity: expansion above computes det with the column order
    // (x,y,z,sq); the conventional predicate is that determinant negated.
    return {-v, m};
}

struct Pt {
    double x[3];
};

int orient3d_sign(const Pt& a, const Pt& b, const Pt& c, const Pt& d) {
    const auto v = orient3d_value<double>(a.x, b.x, c.x, d.x);
    if (std::abs(v.value) > 1e-12 * v.magnitude + 1e-300)
        return v.value > 0 ? 1 : -1;
    long double ax[3], bx[3], cx[3], dx[3];
    for (int k = 0; k < 3; ++k) {
        ax[k] = a.x[k]; bx[k] = b.x[k]; cx[k] = c.x[k]; dx[k] = d.x[k];
    }
    const auto vl = orient3d_value<long double>(ax, bx, cx, dx);
    if (std::abs(vl.value) > 1e-16L * vl.magnitude + 1e-300L)
        return vl.value > 0 ? 1 : -1;
    return 0;
}

int insphere_sign(const Pt& a, const Pt& b, const Pt& c, const Pt& d, const Pt& e) {
    const auto v = insphere_value<double>(a.x, b.x, c.x, d.x, e.x);
    if (std::abs(v.value) > 1e-12 * v.magnitude + 1e-300)
        return v.value > 0 ? 1 : -1;
    long double ax[3], bx[3], cx[3], dx[3], ex[3];
    for (int k = 0; k < 3; ++k) {
        ax[k] = a.x[k]; bx[k] = b.x[k]; cx[k] = c.x[k]; dx[k] = d.x[k]; ex[k] = e.x[k];
    }
    const auto vl = insphere_value<long double>(ax, bx, cx, dx, ex);
    if (std::abs(vl.value) > 1e-16L * vl.magnitude + 1e-300L)
        return vl.value > 0 ? 1 : -1;
    return 0;
}

// --- Bowyer-Watson ---------------------------------------------------------

struct Tet {
    std::array<int, 4> v;  // positively oriented
};

using Face = std::array<int, 3>;

Face sorted_face(int a, int b, int c) {
    Face f{a, b, c};
    std::sort(f.begin(), f.end());
    return f;
}

// Returns the real-point tetrahedra, or an empty list when the insertion ran
// into an exact degeneracy or the result fails the Delaunay self-check.
std::vector<Tet> bowyer_watson(const std::vector<Pt>& pts, int n) {
    std::vector<Tet> tets;

    // pts[n..n+3] hold the super-tetrahedron appended by the caller.
    {
        Tet super{{n, n + 1, n + 2, n + 3}};
        if (orient3d_sign(pts[super.v[0]], pts[super.v[1]], pts[super.v[2]],
                          pts[super.v[3]]) < 0)
            std::swap(super.v[0], super.v[1]);
        tets.push_back(super);
    }

    for (int p = 0; p < n; ++p) {
        std::vector<std::size_t> bad;
        for (std::size_t t = 0; t < tets.size(); ++t) {
            const Tet& tt = tets[t];
            if (insphere_sign(pts[tt.v[0]], pts[tt.v[1]], pts[tt.v[2]], pts[tt.v[3]],
                              pts[p]) > 0)
                bad.push_back(t);
        }
        if (bad.empty())
            return {};  // point swallowed by round-off; caller retries

        // Boundary of the carved cavity: faces owned by exactly one bad tet.
        std::map<Face, int> face_count;
        for (std::size_t t : bad) {
            const auto& v = tets[t].v;
            face_count[sorted_face(v[0], v[1], v[2])]++;
            face_count[sorted_face(v[0], v[1], v[3])]++;
            face_count[sorted_face(v[0], v[2], v[3])]++;
            face_count[sorted_face(v[1], v[2], v[3])]++;
        }

        std::vector<Tet> next;
        next.reserve(tets.size());
        std::set<std::size_t> bad_set(bad.begin(), bad.end());
        for (std::size_t t = 0; t < tets.size(); ++t)
            if (!bad_set.count(t))
                next.push_back(tets[t]);

        for (const auto& [face, count] : face_count) {
            if (count != 1)
                continue;
            Tet nt{{face[0], face[1], face[2], p}};
            const int o = orient3d_sign(pts[nt.v[0]], pts[nt.v[1]], pts[nt.v[2]],
                                        pts[nt.v[3]]);
            if (o == 0)
                return {};  // flat tetrahedron: exact degeneracy
            if (o < 0)
                std::swap(nt.v[0], nt.v[1]);
            next.push_back(nt);
        }
        tets.swap(next);
    }

    std::vector<Tet> real;
    for (const Tet& t : tets)
        if (t.v[0] < n && t.v[1] < n && t.v[2] < n && t.v[3] < n)
            real.push_back(t);

    if (real.empty())
        return {};

    // Self-check: every retained tetrahedron must have an empty circumsphere
    // with respect to all input points.
    for (const Tet& t : real)
        for (int p = 0; p < n; ++p) {
            if (p == t.v[0] || p == t.v[1] || p == t.v[2] || p == t.v[3])
                continue;
            if (insphere_sign(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]], pts[t.v[3]],
                              pts[p]) > 0)
                return {};
        }

    return real;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double unit_jitter(std::uint64_t seed) {
    return 2.0 * (static_cast<double>(splitmix64(seed) >> 11) * 0x1.0p-53) - 1.0;
}

}  // namespace

NeighborhoodGraph delaunay_graph(const PointSet& points) {
    const int n = static_cast<int>(points.size());
    if (n < 4)
        throw degenerate_input("Delaunay neighborhoods need at least 4 points");
    if (points.dim() != 3)
        throw degenerate_input("Delaunay neighborhoods are 3D only");

    // Normalize into a unit box so the predicates see O(1) coordinates.
    Eigen::Vector3d lo = points.points[0], hi = points.points[0];
    for (const auto& p : points.points) {
        lo = lo.cwiseMin(Eigen::Vector3d(p));
        hi = hi.cwiseMax(Eigen::Vector3d(p));
    }
    const Eigen::Vector3d center = 0.5 * (lo + hi);
    const double scale = std::max((hi - lo).norm(), 1e-12);

    std::vector<Tet> tets;
    for (int attempt = 0; attempt < 2 && tets.empty(); ++attempt) {
        std::vector<Pt> pts(static_cast<std::size_t>(n) + 4);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < 3; ++k) {
                double q = (points.points[i][k] - center[k]) / scale;
                if (attempt == 1)
                    q += 1e-8 * unit_jitter(static_cast<std::uint64_t>(i) * 3 + k);
                pts[static_cast<std::size_t>(i)].x[k] = q;
            }
        const double r = 1e4;
        const double s[4][3] = {{r, r, r}, {r, -r, -r}, {-r, r, -r}, {-r, -r, r}};
        for (int k = 0; k < 4; ++k)
            for (int c = 0; c < 3; ++c)
                pts[static_cast<std::size_t>(n + k)].x[c] = s[k][c];

        tets = bowyer_watson(pts, n);
    }
    if (tets.empty())
        throw degenerate_input(
            "points are degenerate (coplanar or collinear); Delaunay neighborhoods undefined");

    std::vector<std::set<int>> nb(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        nb[static_cast<std::size_t>(i)].insert(i);
    for (const Tet& t : tets)
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b) {
                nb[static_cast<std::size_t>(t.v[a])].insert(t.v[b]);
                nb[static_cast<std::size_t>(t.v[b])].insert(t.v[a]);
            }

    NeighborhoodGraph g;
    g.labels = points.labels;
    g.neighbors.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (nb[static_cast<std::size_t>(i)].size() < 4)
            throw degenerate_input("point " + std::to_string(points.labels[i]) +
                                   " belongs to no tetrahedron; input is degenerate");
        g.neighbors.emplace_back(nb[static_cast<std::size_t>(i)].begin(),
                                 nb[static_cast<std::size_t>(i)].end());
    }
    g.tetrahedra.reserve(tets.size());
    for (const Tet& t : tets) {
        std::array<int, 4> v = t.v;
        std::sort(v.begin(), v.end());
        g.tetrahedra.push_back(v);
    }
    std::sort(g.tetrahedra.begin(), g.tetrahedra.end());
    g.centers.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        g.centers.push_back(neighborhood_center(g, i, points));
    return g;
}

Eigen::Vector3d neighborhood_center(const NeighborhoodGraph& graph, int i,
                                    const PointSet& points) {
    const auto& nb = graph.neighbors.at(static_cast<std::size_t>(i));
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (int j : nb)
        sum += Eigen::Vector3d(points.points.at(static_cast<std::size_t>(j)));
    return sum / static_cast<double>(nb.size());
}

std::string graph_to_text(const NeighborhoodGraph& graph) {
    std::ostringstream out;
    for (std::size_t i = 0; i < graph.neighbors.size(); ++i) {
        out << graph.labels[i] << ":";
        for (int j : graph.neighbors[i])
            out << " " << graph.labels[static_cast<std::size_t>(j)];
        out << "\n";
    }
    return out.str();
}

NeighborhoodGraph graph_from_text(const std::string& text, const PointSet& points) {
    std::map<int, int> index_of;
    for (std::size_t i = 0; i < points.labels.size(); ++i)
        index_of[points.labels[i]] = static_cast<int>(i);

    NeighborhoodGraph g;
    g.labels = points.labels;
    g.neighbors.assign(points.size(), {});

    std::istringstream in(text);
    std::string line;
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos)
            throw data_error("graph line lacks `label:` prefix: " + line);
        const int label = std::stoi(line.substr(0, colon));
        auto it = index_of.find(label);
        if (it == index_of.end())
            throw data_error("graph label " + std::to_string(label) +
                             " not present in the point set");
        std::istringstream rest(line.substr(colon + 1));
        std::vector<int> nb;
        int nb_label;
        while (rest >> nb_label) {
            auto jt = index_of.find(nb_label);
            if (jt == index_of.end())
                throw data_error("graph neighbor label " + std::to_string(nb_label) +
                                 " not present in the point set");
            nb.push_back(jt->second);
        }
        std::sort(nb.begin(), nb.end());
        g.neighbors[static_cast<std::size_t>(it->second)] = std::move(nb);
        ++seen;
    }
    if (seen != points.size())
        throw data_error("graph file covers " + std::to_string(seen) + " of " +
                         std::to_string(points.size()) + " points");
    g.centers.clear();
    for (int i = 0; i < static_cast<int>(points.size()); ++i)
        g.centers.push_back(neighborhood_center(g, i, points));
    return g;
}

void write_graph_text(const NeighborhoodGraph& graph, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw data_error("cannot open " + path + " for writing");
    out << graph_to_text(graph);
    if (!out)
        throw data_error("failed writing " + path);
}

NeighborhoodGraph read_graph_text(const std::string& path, const PointSet& points) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw data_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return graph_from_text(ss.str(), points);
}

}  // namespace polaffini
