#include "rodnet/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rodnet::reference {

double rectangle_torsion_constant(double a, double b)
{
    const double l = std::max(a, b);
    const double w = std::min(a, b);
    const double pi = std::numbers::pi;
    double sum = 0.0;
    for (int j = 0; j < 10; ++j) {
        const double n = 2.0 * j + 1.0;
        sum += std::tanh(n * pi * l / (2.0 * w)) / std::pow(n, 5);
    }
    return l * w * w * w * (1.0 / 3.0 - 64.0 / std::pow(pi, 5) * (w / l) * sum);
}

ClassicalConstants classical_constants(const std::string &section, const std::vector<double> &dimensions,
                                       double lambda, double mu)
{
    if (!(mu > 0.0) || !(lambda >= 0.0))
        throw ValidationError("classical_constants: need mu > 0 and lambda >= 0");
    ClassicalConstants c;
    c.young = mu * (3.0 * lambda + 2.0 * mu) / (lambda + mu);
    const double pi = std::numbers::pi;
    if (section == "circle") {
        if (dimensions.size() != 1 || !(dimensions[0] > 0.0))
            throw ValidationError("classical_constants: circle needs one positive radius");
        const double r4 = std::pow(dimensions[0], 4);
        c.torsion = mu * pi * r4 / 2.0;
        c.bending2 = c.bending3 = c.young * pi * r4 / 4.0;
        return c;
    }
    if (section == "rectangle") {
        if (dimensions.size() != 2 || !(dimensions[0] > 0.0) || !(dimensions[1] > 0.0))
            throw ValidationError("classical_constants: rectangle needs two positive sides");
        const double a = dimensions[0], b = dimensions[1];
        c.torsion = mu * rectangle_torsion_constant(a, b);
        c.bending2 = c.young * a * b * b * b / 12.0;
        c.bending3 = c.young * a * a * a * b / 12.0;
        return c;
    }
    throw ValidationError("classical_constants: unsupported section '" + section + "'");
}

} // namespace rodnet::reference
