#pragma once

#include <string>

#include "mvnet/markov.hpp"
#include "mvnet/meanfield.hpp"
#include "mvnet/virus_model.hpp"

namespace mvnet {

/// Column order: t, mean_frac_any, se_any, mean_frac_<virus>..., mean_beta, mean_q.
/// Values use shortest round-trip formatting.
std::string csv_header(const VirusModel& model);

/// Deterministic trajectory (se_any = 0). Per-virus columns are empty when
/// the trajectory carries no per-virus marginals.
std::string trajectory_csv(const HostTrajectory& tr, const VirusModel& model);

std::string monte_carlo_csv(const MonteCarloResult& mc, const VirusModel& model);

}  // namespace mvnet
