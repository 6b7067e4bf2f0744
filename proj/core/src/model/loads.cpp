#include "rodnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rodnet {

namespace {

// Integral of the linear interpolant between (xa, va) and (xb, vb) over [a, b],
// with [a, b] inside [xa, xb].
Vec3 linear_piece_integral(double xa, const Vec3 &va, double xb, const Vec3 &vb, double a, double b)
{
    const double w = xb - xa;
    auto at = [&](double x) -> Vec3 { return va + (vb - va) * ((x - xa) / w); };
    return 0.5 * (b - a) * (at(a) + at(b));
}

} // namespace

LoadProfile LoadProfile::constant(const Vec3 &value)
{
    if (!value.allFinite())
        throw ValidationError("distributed load must be finite");
    LoadProfile p;
    p.coefficients_ = {value};
    return p;
}

LoadProfile LoadProfile::polynomial(std::vector<Vec3> coefficients)
{
    if (coefficients.empty())
        coefficients.push_back(Vec3::Zero());
    for (const auto &c : coefficients)
        if (!c.allFinite())
            throw ValidationError("polynomial load coefficients must be finite");
    LoadProfile p;
    p.kind_ = coefficients.size() == 1 ? Kind::constant : Kind::polynomial;
    p.coefficients_ = std::move(coefficients);
    return p;
}

LoadProfile LoadProfile::sampled(std::vector<double> abscissae, std::vector<Vec3> values)
{
    if (abscissae.size() != values.size())
        throw ValidationError("sampled load needs one value per abscissa");
    if (abscissae.empty())
        throw ValidationError("sampled load needs at least one sample");
    for (std::size_t i = 0; i < abscissae.size(); ++i) {
        if (!std::isfinite(abscissae[i]) || !values[i].allFinite())
            throw ValidationError("sampled load entry " + std::to_string(i) + " is not finite");
        if (i > 0 && !(abscissae[i] > abscissae[i - 1]))
            throw ValidationError("sampled load abscissae must be strictly increasing (entry " +
                                  std::to_string(i) + ")");
    }
    LoadProfile p;
    p.kind_ = Kind::samples;
    p.coefficients_.clear();
    p.abscissae_ = std::move(abscissae);
    p.values_ = std::move(values);
    return p;
}

Vec3 LoadProfile::value(double x) const
{
    if (kind_ != Kind::samples) {
        Vec3 acc = Vec3::Zero();
        for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it)
            acc = acc * x + *it;
        return acc;
    }
    if (x <= abscissae_.front())
        return values_.front();
    if (x >= abscissae_.back())
        return values_.back();
    const auto hi = std::upper_bound(abscissae_.begin(), abscissae_.end(), x);
    const std::size_t j = static_cast<std::size_t>(hi - abscissae_.begin());
    const double t = (x - abscissae_[j - 1]) / (abscissae_[j] - abscissae_[j - 1]);
    return (1.0 - t) * values_[j - 1] + t * values_[j];
}

Vec3 LoadProfile::integral(double a, double b) const
{
    if (a == b)
        return Vec3::Zero();
    if (a > b)
        return -integral(b, a);
    if (kind_ != Kind::samples) {
        Vec3 acc = Vec3::Zero();
        for (std::size_t k = 0; k < coefficients_.size(); ++k) {
            const double e = static_cast<double>(k + 1);
            acc += coefficients_[k] * ((std::pow(b, e) - std::pow(a, e)) / e);
        }
        return acc;
    }
    const auto &xs = abscissae_;
    const auto &vs = values_;
    Vec3 acc = Vec3::Zero();
    // Constant extension to the left and right of the samples.
    if (a < xs.front())
        acc += vs.front() * (std::min(b, xs.front()) - a);
    if (b > xs.back())
        acc += vs.back() * (b - std::max(a, xs.back()));
    for (std::size_t j = 0; j + 1 < xs.size(); ++j) {
        const double lo = std::max(a, xs[j]);
        const double hi = std::min(b, xs[j + 1]);
        if (hi > lo)
            acc += linear_piece_integral(xs[j], vs[j], xs[j + 1], vs[j + 1], lo, hi);
    }
    return acc;
}

bool LoadProfile::is_zero() const
{
    if (kind_ == Kind::samples)
        return std::all_of(values_.begin(), values_.end(), [](const Vec3 &v) { return v.isZero(0.0); });
    return std::all_of(coefficients_.begin(), coefficients_.end(), [](const Vec3 &v) { return v.isZero(0.0); });
}

void LoadProfile::validate_support(double length) const
{
    if (kind_ != Kind::samples)
        return;
    if (abscissae_.front() < 0.0 || abscissae_.back() > length)
        throw ValidationError("sampled load abscissae must lie in [0, L]");
}

LoadProfile LoadProfile::rotated(const Mat3 &G) const
{
    LoadProfile p = *this;
    for (auto &c : p.coefficients_)
        c = G * c;
    for (auto &v : p.values_)
        v = G * v;
    return p;
}

LoadProfile LoadProfile::scaled(double factor) const
{
    LoadProfile p = *this;
    for (auto &c : p.coefficients_)
        c *= factor;
    for (auto &v : p.values_)
        v *= factor;
    return p;
}

Vec3 cumulative_load(const RodSpec &rod, double x1)
{
    if (!(x1 >= 0.0 && x1 <= rod.length))
        throw ValidationError("cumulative_load: x1 = " + std::to_string(x1) + " outside [0, " +
                              std::to_string(rod.length) + "]");
    if (x1 == rod.length)
        return rod.end_force;
    return rod.distributed.integral(x1, rod.length) + rod.end_force;
}

double contact_force_sup(const RodSpec &rod)
{
    constexpr int samples = 256;
    double sup = 0.0;
    for (int k = 0; k <= samples; ++k) {
        const double x = rod.length * static_cast<double>(k) / samples;
        sup = std::max(sup, cumulative_load(rod, std::min(x, rod.length)).norm());
    }
    if (rod.distributed.kind() == LoadProfile::Kind::samples)
        for (double x : rod.distributed.abscissae())
            if (x >= 0.0 && x <= rod.length)
                sup = std::max(sup, cumulative_load(rod, x).norm());
    return sup;
}

BalanceReport check_balance(const Network &network, double tol)
{
    BalanceReport r;
    double scale = 0.0;
    for (const auto &rod : network.rods) {
        const Vec3 p0 = cumulative_load(rod, 0.0);
        r.junction_forces.push_back(p0);
        r.resultant += p0;
        scale = std::max(scale, contact_force_sup(rod) + std::numeric_limits<double>::epsilon());
    }
    r.threshold = tol * scale;
    r.passed = r.resultant.norm() <= r.threshold;
    return r;
}

} // namespace rodnet
