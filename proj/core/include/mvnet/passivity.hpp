#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mvnet/meanfield.hpp"
#include "mvnet/network.hpp"
#include "mvnet/virus_model.hpp"

namespace mvnet {

/// Diagonal of Q_i over realizable_sets() for a host of the given degree.
Eigen::VectorXd build_Qi(int degree, const VirusModel& model);

/// 0-1 membership matrix: H(k, v) = 1 iff v is in realizable_sets()[k].
Eigen::MatrixXd build_H(const VirusModel& model);

/// Lambda_vv = (1/12) sum of lambda^{S,v} over clean or realizable S without v.
Eigen::VectorXd build_Lambda(const VirusModel& model);

/// Q = H Lambda H^T.
Eigen::MatrixXd build_Q(const VirusModel& model);

/// A (x) Q + blockdiag(Q_1, ..., Q_n); dimension n * |R|.
Eigen::MatrixXd build_Qbar(const Network& net, const VirusModel& model);

struct PassivityReport {
    double rho_bound = 0.0;          // max_i mu_1(Q_i + |N_i| Q)
    double mu1_qbar = 0.0;
    std::vector<double> per_host;    // mu_1(Q_i + |N_i| Q)
};

PassivityReport passivity_report(const Network& net, const VirusModel& model);
double passivity_index_bound(const Network& net, const VirusModel& model);

/// Pointwise check of W-dot <= x^T Qbar x + u^T x with u_i = -beta_i x_i and
/// W = x^T x / 2 under the subset dynamics without filtering. Returns
/// W-dot minus the bound (positive means violated).
class StorageCheck {
public:
    StorageCheck(const Network& net, const VirusModel& model);

    double violation(std::span<const double> x, std::span<const double> beta) const;
    /// Same inequality with blockdiag(Q_i + |N_i| Q) in place of Qbar.
    double violation_blockdiag(std::span<const double> x, std::span<const double> beta) const;

    double storage_derivative(std::span<const double> x, std::span<const double> beta) const;

private:
    MeanField mf_;
    std::vector<Eigen::VectorXd> qi_;
    Eigen::MatrixXd q_;
};

/// Max violation over the given states (each of length n * |R|).
double verify_storage_decrement(std::span<const std::vector<double>> states, std::span<const double> beta,
                                const Network& net, const VirusModel& model);

}  // namespace mvnet
