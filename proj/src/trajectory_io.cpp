#include "ubmlab/trajectory_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace ubmlab {

void write_trajectory_csv(const PhaseTrajectory& traj, std::ostream& out) {
    out << std::setprecision(17);
    out << "# n=" << traj.n << " dt=" << traj.dt << " beta=" << traj.beta << " seed_path=" << traj.seed_path
        << '\n';
    out << "time";
    for (int j = 1; j <= traj.n; ++j) out << ",phase_" << j;
    out << '\n';
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        out << traj.times[s];
        for (double p : traj.phases[s]) out << ',' << p;
        out << '\n';
    }
}

void write_trajectory_csv(const PhaseTrajectory& traj, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    write_trajectory_csv(traj, f);
    if (!f) throw std::runtime_error("write failed: " + path);
}

PhaseTrajectory read_trajectory_csv(std::istream& in) {
    PhaseTrajectory traj;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw std::runtime_error("trajectory csv: missing header");
    std::istringstream header(line.substr(2));
    std::string field;
    while (header >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        if (key == "n") traj.n = std::stoi(value);
        else if (key == "dt") traj.dt = std::stod(value);
        else if (key == "beta") traj.beta = std::stod(value);
        else if (key == "seed_path") traj.seed_path = value;
    }
    if (traj.n < 1) throw std::runtime_error("trajectory csv: bad n");
    if (!std::getline(in, line) || line.rfind("time", 0) != 0) throw std::runtime_error("trajectory csv: missing columns");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
        if (static_cast<int>(values.size()) != traj.n + 1) throw std::runtime_error("trajectory csv: bad row width");
        traj.times.push_back(values[0]);
        traj.phases.emplace_back(values.begin() + 1, values.end());
    }
    return traj;
}

PhaseTrajectory read_trajectory_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    return read_trajectory_csv(f);
}

}  // namespace ubmlab
