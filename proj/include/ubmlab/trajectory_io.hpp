#pragma once

#include <iosfwd>
#include <string>

#include "ubmlab/unitary_dynamics.hpp"

namespace ubmlab {

/// CSV dump: `# n=<n> dt=<dt> beta=<beta> seed_path=<...>` then `time,phase_1,...,phase_n`.
void write_trajectory_csv(const PhaseTrajectory& traj, std::ostream& out);
void write_trajectory_csv(const PhaseTrajectory& traj, const std::string& path);

PhaseTrajectory read_trajectory_csv(std::istream& in);
PhaseTrajectory read_trajectory_csv(const std::string& path);

}  // namespace ubmlab
