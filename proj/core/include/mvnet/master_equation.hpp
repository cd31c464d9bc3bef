#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mvnet/meanfield.hpp"
#include "mvnet/network.hpp"
#include "mvnet/rk4.hpp"
#include "mvnet/virus_model.hpp"

namespace mvnet {

constexpr std::size_t kMaxJointStates = 100000;

/// (|R| + 1)^n, saturating above kMaxJointStates.
std::size_t joint_state_count(int hosts, int sets);

struct MasterEquationResult {
    HostTrajectory marginals;                  // any / per-virus marginals per host
    std::vector<std::vector<double>> subsets;  // [k][i * r + s]: exact x_i^S
    double max_mass_error = 0.0;               // max_k |sum p - 1|
};

/// Exact Kolmogorov forward integration of the joint chain with static patch
/// rates and filtering probability. Hosts start independently from the
/// categorical law init[i * m + v]. Throws StateSpaceTooLarge.
MasterEquationResult master_equation(const Network& net, const VirusModel& model, std::span<const double> init,
                                     std::span<const double> beta, double q, std::span<const double> grid,
                                     const Rk4Options& opts = {});

}  // namespace mvnet
