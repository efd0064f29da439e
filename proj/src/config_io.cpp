#include "softarm/config_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace softarm {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<double> parse_numbers(const std::string& value, const std::string& where) {
    std::vector<double> out;
    std::istringstream ss(value);
    std::string tok;
    while (ss >> tok) {
        try {
            size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw BadInputFile(where + ": cannot parse number '" + tok + "'");
        }
    }
    if (out.empty()) throw BadInputFile(where + ": missing value");
    return out;
}

double parse_one(const std::string& value, const std::string& where) {
    const auto nums = parse_numbers(value, where);
    if (nums.size() != 1) throw BadInputFile(where + ": expected a single value");
    return nums[0];
}

bool parse_bool(const std::string& value, const std::string& where) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw BadInputFile(where + ": expected true/false, got '" + value + "'");
}

}  // namespace

RobotFile parse_robot_text(const std::string& text, const std::string& origin) {
    RobotFile out;
    out.robot.segments.clear();
    out.robot.masses.clear();

    bool planar = false;
    std::vector<double> damping_values;

    std::string section;  // "" = globals
    std::istringstream stream(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(stream, raw)) {
        ++lineno;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno);

        if (line.front() == '[') {
            if (line.back() != ']') throw BadInputFile(where + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section == "segment") {
                SegmentSpec seg;
                seg.planar = planar;
                if (planar) {
                    seg.theta_min = -3.141592653589793;
                    seg.theta_max = 3.141592653589793;
                }
                out.robot.segments.push_back(seg);
                out.robot.masses.push_back(17.3);
            } else if (section != "stiffness" && section != "actuation" && section != "damping") {
                throw BadInputFile(where + ": unknown section [" + section + "]");
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) throw BadInputFile(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (section.empty()) {
            if (key == "planar") {
                planar = parse_bool(value, where);
                if (!out.robot.segments.empty()) {
                    throw BadInputFile(where + ": planar must precede the segment sections");
                }
            } else if (key == "gravity_mm_s2") {
                const auto g = parse_numbers(value, where);
                if (g.size() != 3) throw BadInputFile(where + ": gravity needs 3 components");
                out.robot.gravity = Vec3(g[0], g[1], g[2]);
            } else if (key == "bellows") {
                out.robot.bellows = static_cast<int>(parse_one(value, where));
                out.params.actuation.bellows = out.robot.bellows;
            } else {
                throw BadInputFile(where + ": unknown global key '" + key + "'");
            }
        } else if (section == "segment") {
            auto& seg = out.robot.segments.back();
            if (key == "rest_length_mm") seg.rest_length = parse_one(value, where);
            else if (key == "links") seg.links = static_cast<int>(parse_one(value, where));
            else if (key == "dl_min_mm") seg.dl_min = parse_one(value, where);
            else if (key == "dl_max_mm") seg.dl_max = parse_one(value, where);
            else if (key == "theta_min_rad") seg.theta_min = parse_one(value, where);
            else if (key == "theta_max_rad") seg.theta_max = parse_one(value, where);
            else if (key == "mass_g") out.robot.masses.back() = parse_one(value, where);
            else throw BadInputFile(where + ": unknown segment key '" + key + "'");
        } else if (section == "stiffness") {
            auto& st = out.params.stiffness;
            if (key == "a1") st.a1 = parse_one(value, where);
            else if (key == "a2") st.a2 = parse_one(value, where);
            else if (key == "a3") st.a3 = parse_one(value, where);
            else if (key == "a4") st.a4 = parse_one(value, where);
            else if (key == "a5") st.a5 = parse_one(value, where);
            else if (key == "a6") st.a6 = parse_one(value, where);
            else if (key == "lobes") st.lobes = static_cast<int>(parse_one(value, where));
            else throw BadInputFile(where + ": unknown stiffness key '" + key + "'");
        } else if (section == "damping") {
            if (key == "r") damping_values = parse_numbers(value, where);
            else throw BadInputFile(where + ": unknown damping key '" + key + "'");
        } else if (section == "actuation") {
            auto& ac = out.params.actuation;
            if (key == "h1") ac.h1 = parse_one(value, where);
            else if (key == "h2") ac.h2 = parse_one(value, where);
            else if (key == "p_max_kpa") ac.p_max = parse_one(value, where);
            else if (key == "erratum_fix") ac.erratum_fix = parse_bool(value, where);
            else throw BadInputFile(where + ": unknown actuation key '" + key + "'");
        }
    }

    if (out.robot.segments.empty()) {
        throw BadInputFile(origin + ": robot file declares no [segment] section");
    }
    validate_robot(out.robot);

    const int dim = state_dim(out.robot);
    if (damping_values.empty()) {
        out.params.damping = DampingParams::uniform(0.1, dim);
    } else if (damping_values.size() == 1) {
        out.params.damping = DampingParams::uniform(damping_values[0], dim);
    } else if (static_cast<int>(damping_values.size()) == dim) {
        out.params.damping.r =
            Eigen::Map<const Eigen::VectorXd>(damping_values.data(), dim);
    } else {
        throw BadInputFile(origin + ": damping r needs 1 or " + std::to_string(dim) + " values");
    }
    if ((out.params.damping.r.array() < 0.0).any()) {
        throw std::invalid_argument("damping entries must be non-negative");
    }
    return out;
}

RobotFile load_robot_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInputFile("cannot open robot file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_robot_text(buf.str(), path);
}

std::string format_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

Trajectory load_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInputFile("cannot open trajectory file: " + path);

    std::string header;
    if (!std::getline(in, header)) throw BadInputFile(path + ": empty trajectory file");
    header.erase(std::remove_if(header.begin(), header.end(),
                                [](char c) { return c == ' ' || c == '\r'; }),
                 header.end());
    bool planar;
    if (header == "t,x,y,z") planar = false;
    else if (header == "t,x,y") planar = true;
    else throw BadInputFile(path + ": header must be 't,x,y[,z]', got '" + header + "'");

    Trajectory traj;
    traj.shape = "csv";
    traj.planar = planar;

    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        const auto nums = parse_numbers(line, path + ":" + std::to_string(lineno));
        const size_t expect = planar ? 3 : 4;
        if (nums.size() != expect) {
            throw BadInputFile(path + ":" + std::to_string(lineno) + ": wrong column count");
        }
        TrajectoryPoint pt;
        pt.t = nums[0];
        pt.target = planar ? Vec3(nums[1], nums[2], 0.0) : Vec3(nums[1], nums[2], nums[3]);
        traj.points.push_back(pt);
    }
    if (traj.points.size() < 2) throw BadInputFile(path + ": trajectory needs at least 2 points");
    for (size_t i = 1; i < traj.points.size(); ++i) {
        if (!(traj.points[i].t > traj.points[i - 1].t)) {
            throw BadInputFile(path + ": timestamps must be strictly increasing");
        }
    }

    // Characteristic radius for percentage metrics: spread about the centroid.
    Vec3 centroid = Vec3::Zero();
    for (const auto& p : traj.points) centroid += p.target;
    centroid /= static_cast<double>(traj.points.size());
    for (const auto& p : traj.points) {
        traj.characteristic_radius =
            std::max(traj.characteristic_radius, (p.target - centroid).norm());
    }
    return traj;
}

void save_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw BadInputFile("cannot write trajectory file: " + path);
    out << (traj.planar ? "t,x,y\n" : "t,x,y,z\n");
    for (const auto& p : traj.points) {
        out << format_number(p.t) << ',' << format_number(p.target.x()) << ','
            << format_number(p.target.y());
        if (!traj.planar) out << ',' << format_number(p.target.z());
        out << '\n';
    }
}

}  // namespace softarm
