#include "rodnet/xsection.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <tuple>
#include <utility>

namespace rodnet::xsection {

MeshingError::MeshingError(const std::string &what, std::size_t vertex_index)
    : ValidationError(what + " (vertex " + std::to_string(vertex_index) + ")"), vertex_index_(vertex_index)
{
}

double TriMesh::total_area() const
{
    double a = 0.0;
    for (double x : areas)
        a += x;
    return a;
}

double TriMesh::max_edge() const
{
    double m = 0.0;
    for (const auto &t : triangles)
        for (int j = 0; j < 3; ++j)
            m = std::max(m, (nodes[t[j]] - nodes[t[(j + 1) % 3]]).norm());
    return m;
}

namespace {

double orient(const Vec2 &a, const Vec2 &b, const Vec2 &c)
{
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

// Positive when d lies inside the circumcircle of counter-clockwise (a, b, c).
double incircle(const Vec2 &a, const Vec2 &b, const Vec2 &c, const Vec2 &d)
{
    const double adx = a.x() - d.x(), ady = a.y() - d.y();
    const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
    const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

bool point_in_triangle(const Vec2 &p, const Vec2 &a, const Vec2 &b, const Vec2 &c, double tol)
{
    return orient(a, b, p) >= -tol && orient(b, c, p) >= -tol && orient(c, a, p) >= -tol;
}

// Triangulation with adjacency. nb[t][j] is the triangle across the edge
// opposite vertex j, or -1 on the boundary.
class Triangulation {
public:
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> v;
    std::vector<std::array<int, 3>> nb;
    double incircle_tol = 0.0;

    void build_adjacency()
    {
        nb.assign(v.size(), {-1, -1, -1});
        std::map<std::pair<int, int>, std::pair<int, int>> open;
        for (int t = 0; t < static_cast<int>(v.size()); ++t) {
            for (int j = 0; j < 3; ++j) {
                const int a = v[t][(j + 1) % 3], b = v[t][(j + 2) % 3];
                auto it = open.find({b, a});
                if (it != open.end()) {
                    nb[t][j] = it->second.first;
                    nb[it->second.first][it->second.second] = t;
                    open.erase(it);
                } else {
                    open.emplace(std::make_pair(a, b), std::make_pair(t, j));
                }
            }
        }
    }

    int slot_of(int t, int neighbor) const
    {
        for (int j = 0; j < 3; ++j)
            if (nb[t][j] == neighbor)
                return j;
        throw NumericalError("triangulation adjacency is inconsistent");
    }

    void replace_neighbor(int t, int old_nb, int new_nb)
    {
        if (t < 0)
            return;
        nb[t][slot_of(t, old_nb)] = new_nb;
    }

    double edge_length(int t, int j) const
    {
        return (nodes[v[t][(j + 1) % 3]] - nodes[v[t][(j + 2) % 3]]).norm();
    }

    bool needs_flip(int t, int j) const
    {
        const int u = nb[t][j];
        if (u < 0)
            return false;
        const int ju = slot_of(u, t);
        const Vec2 &a = nodes[v[t][j]];
        const Vec2 &b = nodes[v[t][(j + 1) % 3]];
        const Vec2 &c = nodes[v[t][(j + 2) % 3]];
        const Vec2 &d = nodes[v[u][ju]];
        if (incircle(a, b, c, d) <= incircle_tol)
            return false;
        // Only flip when both new triangles are proper.
        return orient(a, b, d) > 0.0 && orient(a, d, c) > 0.0;
    }

    // Flips the edge opposite vertex j of t; returns the two new triangles,
    // (a, b, d) stored in t and (a, d, c) stored in u.
    std::pair<int, int> flip(int t, int j)
    {
        const int u = nb[t][j];
        const int ju = slot_of(u, t);
        const int a = v[t][j], b = v[t][(j + 1) % 3], c = v[t][(j + 2) % 3];
        const int d = v[u][ju];
        const int t_ab = nb[t][(j + 2) % 3]; // across (a, b)
        const int t_ca = nb[t][(j + 1) % 3]; // across (c, a)
        const int u_bd = nb[u][(ju + 1) % 3]; // across (b, d)
        const int u_dc = nb[u][(ju + 2) % 3]; // across (d, c)

        v[t] = {a, b, d};
        nb[t] = {u_bd, u, t_ab};
        v[u] = {a, d, c};
        nb[u] = {u_dc, t_ca, t};
        replace_neighbor(u_bd, u, t);
        replace_neighbor(t_ca, t, u);
        return {t, u};
    }

    void legalize(std::vector<std::pair<int, int>> stack)
    {
        std::size_t guard = 0;
        const std::size_t limit = 64 * (v.size() + 16) * (v.size() + 16);
        while (!stack.empty()) {
            if (++guard > limit)
                throw NumericalError("edge flipping did not terminate");
            auto [t, j] = stack.back();
            stack.pop_back();
            if (!needs_flip(t, j))
                continue;
            auto [t1, u1] = flip(t, j);
            // Re-check every edge of both new triangles.
            for (int k = 0; k < 3; ++k) {
                stack.emplace_back(t1, k);
                stack.emplace_back(u1, k);
            }
        }
    }

    void make_delaunay()
    {
        std::vector<std::pair<int, int>> stack;
        for (int t = 0; t < static_cast<int>(v.size()); ++t)
            for (int j = 0; j < 3; ++j)
                if (nb[t][j] > t)
                    stack.emplace_back(t, j);
        legalize(std::move(stack));
    }

    void split_edge(int t, int j)
    {
        const int u = nb[t][j];
        const int a = v[t][j], b = v[t][(j + 1) % 3], c = v[t][(j + 2) % 3];
        const int m = static_cast<int>(nodes.size());
        nodes.push_back(0.5 * (nodes[b] + nodes[c]));
        const int t_ab = nb[t][(j + 2) % 3];
        const int t_ca = nb[t][(j + 1) % 3];

        const int T1 = t;
        const int T2 = static_cast<int>(v.size());
        v.push_back({a, m, c});
        nb.push_back({-1, t_ca, T1});
        v[T1] = {a, b, m};
        nb[T1] = {-1, T2, t_ab};
        replace_neighbor(t_ca, t, T2);

        std::vector<std::pair<int, int>> stack{{T1, 2}, {T2, 1}};
        if (u >= 0) {
            const int ju = slot_of(u, t);
            const int d = v[u][ju];
            const int u_bd = nb[u][(ju + 1) % 3];
            const int u_dc = nb[u][(ju + 2) % 3];
            const int U1 = u;
            const int U2 = static_cast<int>(v.size());
            v.push_back({d, m, b});
            nb.push_back({T1, u_bd, U1});
            v[U1] = {d, c, m};
            nb[U1] = {T2, U2, u_dc};
            replace_neighbor(u_bd, u, U2);
            nb[T1][0] = U2;
            nb[T2][0] = U1;
            stack.emplace_back(U1, 2);
            stack.emplace_back(U2, 1);
        }
        legalize(std::move(stack));
    }
};

struct BoundaryPoint {
    Vec2 p;
    std::size_t source_vertex; // index into the input polygon
};

std::vector<BoundaryPoint> subdivide_boundary(const std::vector<Vec2> &poly, double target_edge)
{
    std::vector<BoundaryPoint> out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 &p = poly[i];
        const Vec2 &q = poly[(i + 1) % n];
        const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil((q - p).norm() / target_edge - 1e-12)));
        for (std::size_t k = 0; k < pieces; ++k) {
            const double s = static_cast<double>(k) / static_cast<double>(pieces);
            out.push_back({(1.0 - s) * p + s * q, i});
        }
    }
    return out;
}

void reject_slivers(const std::vector<Vec2> &poly)
{
    const std::size_t n = poly.size();
    double diam = 0.0;
    for (const auto &p : poly)
        for (const auto &q : poly)
            diam = std::max(diam, (p - q).norm());
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 e1 = (poly[(i + n - 1) % n] - poly[i]).normalized();
        const Vec2 e2 = (poly[(i + 1) % n] - poly[i]).normalized();
        const double angle = std::atan2(std::abs(e1.x() * e2.y() - e1.y() * e2.x()), e1.dot(e2));
        if (angle < 1e-6)
            throw MeshingError("sliver spike in section polygon", i);
        // Vertex almost touching a non-incident edge.
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || (j + 1) % n == i)
                continue;
            const Vec2 &a = poly[j];
            const Vec2 &b = poly[(j + 1) % n];
            const double len2 = (b - a).squaredNorm();
            const double s = std::clamp((poly[i] - a).dot(b - a) / len2, 0.0, 1.0);
            if ((poly[i] - (a + s * (b - a))).norm() < 1e-9 * diam)
                throw MeshingError("section polygon nearly touches itself", i);
        }
    }
}

std::vector<std::array<int, 3>> ear_clip(const std::vector<BoundaryPoint> &pts, double diam)
{
    std::vector<int> ring(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        ring[i] = static_cast<int>(i);
    std::vector<std::array<int, 3>> tris;
    const double tol = 1e-14 * diam * diam;

    std::size_t cursor = 0;
    std::size_t since_last = 0;
    while (ring.size() > 3) {
        const std::size_t m = ring.size();
        const std::size_t i = cursor % m;
        const int ip = ring[(i + m - 1) % m], ic = ring[i], in = ring[(i + 1) % m];
        const Vec2 &a = pts[ip].p, &b = pts[ic].p, &c = pts[in].p;
        bool ear = orient(a, b, c) > tol;
        if (ear) {
            for (std::size_t k = 0; k < m && ear; ++k) {
                const int r = ring[k];
                if (r == ip || r == ic || r == in)
                    continue;
                if (point_in_triangle(pts[r].p, a, b, c, tol))
                    ear = false;
            }
        }
        if (ear) {
            tris.push_back({ip, ic, in});
            ring.erase(ring.begin() + static_cast<std::ptrdiff_t>(i));
            since_last = 0;
            cursor = i == 0 ? 0 : i - 1;
        } else {
            ++cursor;
            if (++since_last > 2 * m) {
                // No ear left: the polygon is degenerate near the sharpest vertex.
                std::size_t worst = 0;
                double worst_angle = 10.0;
                for (std::size_t k = 0; k < m; ++k) {
                    const Vec2 &pa = pts[ring[(k + m - 1) % m]].p, &pb = pts[ring[k]].p, &pc = pts[ring[(k + 1) % m]].p;
                    const double ang = std::abs(std::atan2(orient(pa, pb, pc), (pa - pb).dot(pc - pb)));
                    if (ang < worst_angle) {
                        worst_angle = ang;
                        worst = k;
                    }
                }
                throw MeshingError("cannot triangulate section polygon", pts[ring[worst]].source_vertex);
            }
        }
    }
    if (orient(pts[ring[0]].p, pts[ring[1]].p, pts[ring[2]].p) <= tol)
        throw MeshingError("cannot triangulate section polygon", pts[ring[1]].source_vertex);
    tris.push_back({ring[0], ring[1], ring[2]});
    return tris;
}

} // namespace

TriMesh triangulate(const SectionGeometry &geometry, double target_edge)
{
    if (!(target_edge > 0.0) || !std::isfinite(target_edge))
        throw ValidationError("target_edge must be positive");
    // Validates, orients counter-clockwise.
    const std::vector<Vec2> poly = SectionGeometry::polygon(boundary_polygon(geometry, target_edge)).vertices;
    reject_slivers(poly);

    double diam = 0.0;
    for (const auto &p : poly)
        for (const auto &q : poly)
            diam = std::max(diam, (p - q).norm());

    const std::vector<BoundaryPoint> pts = subdivide_boundary(poly, target_edge);

    Triangulation tri;
    tri.nodes.reserve(pts.size());
    for (const auto &bp : pts)
        tri.nodes.push_back(bp.p);
    tri.v = ear_clip(pts, diam);
    tri.incircle_tol = 1e-12 * diam * diam * diam * diam;
    tri.build_adjacency();
    tri.make_delaunay();

    // Longest-edge midpoint refinement with Delaunay repair after every split.
    for (;;) {
        struct Candidate {
            double length;
            int t, j, a, b;
        };
        std::vector<Candidate> long_edges;
        for (int t = 0; t < static_cast<int>(tri.v.size()); ++t) {
            for (int j = 0; j < 3; ++j) {
                const int u = tri.nb[t][j];
                if (u >= 0 && u < t)
                    continue;
                const double len = tri.edge_length(t, j);
                if (len > target_edge)
                    long_edges.push_back({len, t, j, tri.v[t][(j + 1) % 3], tri.v[t][(j + 2) % 3]});
            }
        }
        if (long_edges.empty())
            break;
        std::stable_sort(long_edges.begin(), long_edges.end(),
                         [](const Candidate &x, const Candidate &y) { return x.length > y.length; });
        for (const auto &e : long_edges) {
            // Skip edges destroyed by earlier flips in this pass.
            const auto &tv = tri.v[e.t];
            if (tv[(e.j + 1) % 3] != e.a || tv[(e.j + 2) % 3] != e.b)
                continue;
            tri.split_edge(e.t, e.j);
        }
    }

    TriMesh mesh;
    mesh.nodes = std::move(tri.nodes);
    mesh.triangles = std::move(tri.v);
    mesh.areas.reserve(mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto &tv = mesh.triangles[t];
        const double a = 0.5 * orient(mesh.nodes[tv[0]], mesh.nodes[tv[1]], mesh.nodes[tv[2]]);
        if (!(a > 0.0))
            throw NumericalError("triangulation produced a non-positive element");
        mesh.areas.push_back(a);
    }
    return mesh;
}

TriMesh refine_uniform(const TriMesh &mesh)
{
    TriMesh out;
    out.nodes = mesh.nodes;
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
        const auto key = std::minmax(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end())
            return it->second;
        const int idx = static_cast<int>(out.nodes.size());
        out.nodes.push_back(0.5 * (mesh.nodes[a] + mesh.nodes[b]));
        midpoint.emplace(key, idx);
        return idx;
    };
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto [a, b, c] = mesh.triangles[t];
        const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
        out.triangles.push_back({a, ab, ca});
        out.triangles.push_back({ab, b, bc});
        out.triangles.push_back({ca, bc, c});
        out.triangles.push_back({ab, bc, ca});
    }
    for (const auto &tv : out.triangles)
        out.areas.push_back(0.5 * orient(out.nodes[tv[0]], out.nodes[tv[1]], out.nodes[tv[2]]));
    return out;
}

} // namespace rodnet::xsection
