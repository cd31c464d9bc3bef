#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mvnet/markov.hpp"
#include "mvnet/meanfield.hpp"
#include "mvnet/network.hpp"
#include "mvnet/rk4.hpp"
#include "mvnet/virus_model.hpp"

namespace mvnet {

enum class ControllerKind { None, Monotone, NonMonotone, Filter, Joint };

/// How the non-monotone law treats alpha x - gamma (1 - x) < 0.
/// Projection: the raw value, held at zero only while beta sits at the
/// floor; its expected event drift matches exactly. PositivePart:
/// max(value, 0), so beta never decreases.
enum class NonMonotoneMode { Projection, PositivePart };

struct ControllerConfig {
    ControllerKind kind = ControllerKind::None;
    double alpha = 1.0;   // patch gain
    double gamma = 0.1;   // non-monotone decrement gain, or filter gain
    double beta_floor = 1e-3;
    double q_cap = 1.0;
    NonMonotoneMode mode = NonMonotoneMode::Projection;

    bool operator==(const ControllerConfig&) const = default;

    bool patches() const noexcept {
        return kind == ControllerKind::Monotone || kind == ControllerKind::NonMonotone || kind == ControllerKind::Joint;
    }
    bool filters() const noexcept { return kind == ControllerKind::Filter || kind == ControllerKind::Joint; }
    void validate() const;  // throws InvalidModel
};

ControllerKind parse_controller_kind(const std::string& s);  // none|monotone|nonmonotone|filter|joint
std::string to_string(ControllerKind k);
NonMonotoneMode parse_nonmonotone_mode(const std::string& s);  // projection|positive-part
std::string to_string(NonMonotoneMode m);

/// alpha * xbar.
double monotone_patch_deriv(double alpha, double xbar);

/// Non-monotone law at infection probability x and current beta.
double nonmonotone_patch_deriv(double alpha, double gamma, double x, double beta, double beta_floor,
                               NonMonotoneMode mode = NonMonotoneMode::Projection);

struct NonMonotoneFixedPoint {
    double x = 0.0;
    std::vector<double> beta;
};

/// x* = gamma / (alpha + gamma), beta_i* = alpha / (alpha + gamma) |N_i| lambda.
/// Throws MultiVirusUnsupported unless the model has one virus.
NonMonotoneFixedPoint fixed_point(double alpha, double gamma, const VirusModel& model, const Network& net);
double fixed_point_x(double alpha, double gamma);
double fixed_point_beta(double alpha, double gamma, double lambda, int degree);

/// gamma * sum over edges and viruses of mu^v (x_i^v (1 - x_j^v) + x_j^v (1 - x_i^v)),
/// zero once q >= q_cap.
double filter_deriv(double gamma, double q, std::span<const double> xbar_v, const Network& net,
                    const VirusModel& model, double q_cap = 1.0);

/// Event-driven controller: reacts to inspections and detections only.
class EventController : public EventHook {
public:
    explicit EventController(ControllerConfig cfg);

    bool needs_clean_inspections() const override { return cfg_.kind == ControllerKind::NonMonotone; }
    void on_event(const Event& e, SystemState& state) override;
    const ControllerConfig& config() const noexcept { return cfg_; }

private:
    ControllerConfig cfg_;
};

std::unique_ptr<EventHook> make_event_controller(const ControllerConfig& cfg);

/// [[Abar, -gamma/(alpha+gamma) I], [(alpha+gamma) I, 0]] with
/// Abar_ii = -|N_i| lambda, Abar_ij = lambda alpha / (alpha+gamma) on edges.
Eigen::MatrixXd linearized_jacobian(const Network& net, double alpha, double gamma, double lambda);

struct CoSimConfig {
    ControllerConfig controller;
    Dynamics dynamics = Dynamics::Aggregate;  // filtering laws require Subset
    std::vector<double> init;                 // hosts x viruses
    std::vector<double> beta0;                // per host
    double q0 = 0.0;
    std::vector<double> grid;
    Rk4Options rk4;
    bool certificates = true;
};

/// Maximum certificate residuals along a co-simulated trajectory (<= 0 is
/// satisfied), evaluated after every integrator step.
struct Certificates {
    /// d/dt (1/2 sum xbar^2) - sum (|N_i| lambda_hat - beta_i) xbar_i^2.
    double aggregate_storage = 0.0;
    /// d/dt of 1/2 sum xbar^2 + sum Gamma_i(beta_i) (monotone law).
    double lasalle = 0.0;
    /// Largest increase of the LaSalle storage between steps.
    double lasalle_step = 0.0;
    /// Largest decrease of any beta_i (monotone law) and of q (filter law).
    double beta_decrease = 0.0;
    double q_decrease = 0.0;
};

struct CoSimResult {
    HostTrajectory trajectory;
    Certificates certificates;
};

/// Integrates the propagation dynamics jointly with the ODE form of the
/// configured controller. State: [x | beta | q].
CoSimResult co_simulate(const Network& net, const VirusModel& model, const CoSimConfig& cfg);

/// Gamma_i(beta) = (|N_i| lambda_hat - beta)^2 / (2 alpha) below the
/// threshold, 0 above.
double lasalle_gamma(double beta, double threshold, double alpha);

}  // namespace mvnet
