#include "rodnet/xsection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace rodnet::xsection {

namespace {

double cross2(const Vec2 &a, const Vec2 &b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const std::vector<Vec2> &v)
{
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += cross2(v[i], v[(i + 1) % v.size()]);
    return 0.5 * s;
}

bool segments_intersect(const Vec2 &p1, const Vec2 &p2, const Vec2 &q1, const Vec2 &q2)
{
    const double d1 = cross2(q2 - q1, p1 - q1);
    const double d2 = cross2(q2 - q1, p2 - q1);
    const double d3 = cross2(p2 - p1, q1 - p1);
    const double d4 = cross2(p2 - p1, q2 - p1);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    auto on_segment = [](const Vec2 &a, const Vec2 &b, const Vec2 &p) {
        return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
               std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
    };
    if (d1 == 0 && on_segment(q1, q2, p1)) return true;
    if (d2 == 0 && on_segment(q1, q2, p2)) return true;
    if (d3 == 0 && on_segment(p1, p2, q1)) return true;
    if (d4 == 0 && on_segment(p1, p2, q2)) return true;
    return false;
}

// Validates a simple polygon and returns it counter-clockwise.
std::vector<Vec2> checked_polygon(std::vector<Vec2> v)
{
    if (v.size() < 3)
        throw ValidationError("section polygon needs at least 3 vertices");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].allFinite())
            throw ValidationError("section polygon vertex " + std::to_string(i) + " is not finite");
        if ((v[i] - v[(i + 1) % v.size()]).norm() == 0.0)
            throw ValidationError("section polygon vertex " + std::to_string(i) + " repeats its successor");
    }
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (adjacent)
                continue;
            if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]))
                throw ValidationError("section polygon is self-intersecting at edges " + std::to_string(i) +
                                      " and " + std::to_string(j));
        }
    }
    double diam = 0.0;
    for (const auto &p : v)
        for (const auto &q : v)
            diam = std::max(diam, (p - q).norm());
    const double area = signed_area(v);
    if (std::abs(area) <= 1e-14 * diam * diam)
        throw ValidationError("section polygon has zero area");
    if (area < 0.0)
        std::reverse(v.begin(), v.end());
    return v;
}

} // namespace

void Material::validate() const
{
    if (!(mu > 0.0) || !std::isfinite(mu))
        throw ValidationError("material.mu must be positive");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw ValidationError("material.lambda must be nonnegative");
}

SectionGeometry SectionGeometry::circle(double radius, Vec2 center)
{
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw ValidationError("circle radius must be positive");
    SectionGeometry g;
    g.kind = SectionKind::circle;
    g.radius = radius;
    g.center = center;
    return g;
}

SectionGeometry SectionGeometry::rectangle(double width, double height)
{
    if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height))
        throw ValidationError("rectangle sides must be positive");
    SectionGeometry g;
    g.kind = SectionKind::rectangle;
    g.width = width;
    g.height = height;
    const double a = 0.5 * width, b = 0.5 * height;
    g.vertices = {Vec2(-a, -b), Vec2(a, -b), Vec2(a, b), Vec2(-a, b)};
    return g;
}

SectionGeometry SectionGeometry::polygon(std::vector<Vec2> vertices)
{
    SectionGeometry g;
    g.kind = SectionKind::polygon;
    g.vertices = checked_polygon(std::move(vertices));
    return g;
}

SectionGeometry SectionGeometry::scaled(double factor) const
{
    SectionGeometry g = *this;
    for (auto &p : g.vertices)
        p *= factor;
    g.center *= factor;
    g.radius *= factor;
    g.width *= factor;
    g.height *= factor;
    return g;
}

std::vector<Vec2> boundary_polygon(const SectionGeometry &geometry, double target_edge)
{
    if (geometry.kind != SectionKind::circle)
        return geometry.vertices;
    if (!(target_edge > 0.0))
        throw ValidationError("target_edge must be positive");
    // Chord 2 r sin(pi/n) <= target_edge.
    const double r = geometry.radius;
    std::size_t n = 96;
    while (2.0 * r * std::sin(std::numbers::pi / static_cast<double>(n)) > target_edge)
        ++n;
    std::vector<Vec2> v(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        v[k] = geometry.center + r * Vec2(std::cos(t), std::sin(t));
    }
    return v;
}

PolygonMoments polygon_moments(const std::vector<Vec2> &v)
{
    PolygonMoments m;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 &p = v[i];
        const Vec2 &q = v[(i + 1) % n];
        const double c = cross2(p, q);
        m.area += c;
        m.first_x2 += (p.x() + q.x()) * c;
        m.first_x3 += (p.y() + q.y()) * c;
        m.second_x2 += (p.x() * p.x() + p.x() * q.x() + q.x() * q.x()) * c;
        m.second_x3 += (p.y() * p.y() + p.y() * q.y() + q.y() * q.y()) * c;
        m.product += (p.x() * q.y() + 2.0 * p.x() * p.y() + 2.0 * q.x() * q.y() + q.x() * p.y()) * c;
    }
    m.area /= 2.0;
    m.first_x2 /= 6.0;
    m.first_x3 /= 6.0;
    m.second_x2 /= 12.0;
    m.second_x3 /= 12.0;
    m.product /= 24.0;
    return m;
}

NormalizedSection normalize_section(const SectionGeometry &geometry)
{
    NormalizedSection out;
    out.geometry = geometry;
    switch (geometry.kind) {
    case SectionKind::circle:
        out.transform.centroid = geometry.center;
        out.geometry.center = Vec2::Zero();
        return out;
    case SectionKind::rectangle:
        return out; // centered and axis-aligned by construction
    case SectionKind::polygon:
        break;
    }

    const std::vector<Vec2> v = checked_polygon(geometry.vertices);
    const PolygonMoments m = polygon_moments(v);
    const Vec2 c(m.first_x2 / m.area, m.first_x3 / m.area);
    const double i22 = m.second_x2 - m.area * c.x() * c.x();
    const double i33 = m.second_x3 - m.area * c.y() * c.y();
    const double i23 = m.product - m.area * c.x() * c.y();

    double angle = 0.0;
    const double scale = std::abs(i22) + std::abs(i33);
    // Isotropic second moments: every rotation is principal; keep zero.
    if (std::abs(i22 - i33) > 1e-12 * scale || std::abs(i23) > 1e-12 * scale)
        angle = 0.5 * std::atan2(2.0 * i23, i22 - i33);

    const double cs = std::cos(angle), sn = std::sin(angle);
    std::vector<Vec2> moved(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 d = v[i] - c;
        moved[i] = Vec2(cs * d.x() + sn * d.y(), -sn * d.x() + cs * d.y());
    }
    // Re-center on the rotated polygon to remove the rounding of the first pass.
    const PolygonMoments m2 = polygon_moments(moved);
    const Vec2 c2(m2.first_x2 / m2.area, m2.first_x3 / m2.area);
    for (auto &p : moved)
        p -= c2;

    out.geometry.vertices = std::move(moved);
    out.transform.centroid = c;
    out.transform.rotation_angle = angle;
    return out;
}

} // namespace rodnet::xsection
