#include "rodnet/app.hpp"

#include "json.hpp"

#include <cstdio>
#include <sstream>

namespace rodnet::app {

using ojson = nlohmann::ordered_json;

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string section_json(const xsection::SectionStiffness &st)
{
    ojson o;
    ojson H = ojson::array();
    for (int r = 0; r < 3; ++r)
        H.push_back(ojson::array({st.stiffness.H(r, 0), st.stiffness.H(r, 1), st.stiffness.H(r, 2)}));
    o["H"] = H;
    o["mesh"] = {{"nodes", st.mesh_nodes}, {"triangles", st.mesh_triangles}};
    o["normalization"] = {
        {"centroid", ojson::array({st.normalization.centroid.x(), st.normalization.centroid.y()})},
        {"rotation_angle", st.normalization.rotation_angle}};
    return o.dump(2) + "\n";
}

namespace {

constexpr const char *rod_header = "x1,y1,y2,y3,qw,qx,qy,qz,s1,s2,s3,p1,p2,p3,m1,m2,m3";

void append(std::string &line, double v)
{
    if (!line.empty())
        line += ',';
    line += format_double(v);
}

} // namespace

std::string rod_csv(const post::RodReport &rod)
{
    std::string out = std::string(rod_header) + "\n";
    for (std::size_t k = 0; k < rod.x.size(); ++k) {
        std::string line;
        append(line, rod.x[k]);
        for (int c = 0; c < 3; ++c)
            append(line, rod.y[k](c));
        append(line, rod.R[k].w());
        append(line, rod.R[k].x());
        append(line, rod.R[k].y());
        append(line, rod.R[k].z());
        for (const Vec3 *v : {&rod.strain[k], &rod.force[k], &rod.couple[k]})
            for (int c = 0; c < 3; ++c)
                append(line, (*v)(c));
        out += line + "\n";
    }
    return out;
}

std::string trace_csv(const solver::SolveTrace &trace)
{
    std::string out = "iteration,energy,grad_norm,step\n";
    for (const auto &e : trace.entries)
        out += std::to_string(e.iteration) + "," + format_double(e.energy) + "," + format_double(e.grad_norm) + "," +
               format_double(e.step) + "\n";
    return out;
}

std::string plot_csv(const post::EquilibriumReport &report)
{
    static const char *names[] = {"y1", "y2", "y3", "s1", "s2", "s3", "p1", "p2", "p3", "m1", "m2", "m3"};
    std::string out = "rod,x1,quantity,value\n";
    for (std::size_t i = 0; i < report.rods.size(); ++i) {
        const auto &rod = report.rods[i];
        for (std::size_t k = 0; k < rod.x.size(); ++k) {
            const Vec3 *fields[] = {&rod.y[k], &rod.strain[k], &rod.force[k], &rod.couple[k]};
            for (int f = 0; f < 4; ++f)
                for (int c = 0; c < 3; ++c)
                    out += std::to_string(i) + "," + format_double(rod.x[k]) + "," + names[3 * f + c] + "," +
                           format_double((*fields[f])(c)) + "\n";
        }
    }
    return out;
}

std::vector<Quat> read_rod_quaternions(const std::string &path)
{
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || line != rod_header)
        throw ValidationError(path + ": unexpected header (expected " + std::string(rod_header) + ")");
    std::vector<Quat> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty())
            continue;
        std::vector<double> v;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const std::size_t next = line.find(',', pos);
            const std::string cell = line.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
            char *end = nullptr;
            const double d = std::strtod(cell.c_str(), &end);
            if (cell.empty() || *end != '\0')
                throw ValidationError(path + ": row " + std::to_string(row) + ": malformed number '" + cell + "'");
            v.push_back(d);
            if (next == std::string::npos)
                break;
            pos = next + 1;
        }
        if (v.size() != 17)
            throw ValidationError(path + ": row " + std::to_string(row) + ": expected 17 columns");
        out.emplace_back(v[4], v[5], v[6], v[7]);
    }
    if (out.size() < 3)
        throw ValidationError(path + ": a rod needs at least 3 nodes");
    return out;
}

} // namespace rodnet::app
