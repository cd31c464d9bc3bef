#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mvnet/meanfield.hpp"
#include "mvnet/network.hpp"
#include "mvnet/rng.hpp"
#include "mvnet/virus_model.hpp"

namespace mvnet {

/// Joint Markov state: infection sets, patch rates, filtering probability.
struct SystemState {
    std::vector<VirusSet> infection;
    std::vector<double> beta;
    double q = 0.0;
    double t = 0.0;
};

enum class EventKind { Infection, FilterDetect, Patch };

/// Infection(host, virus, other = infecting neighbor), FilterDetect(host =
/// sender, virus, other = target), Patch(host).
struct Event {
    EventKind kind = EventKind::Patch;
    HostId host = 0;
    VirusId virus = -1;
    HostId other = -1;
    double rate = 0.0;

    bool same_as(const Event& e) const noexcept {
        return kind == e.kind && host == e.host && virus == e.virus && other == e.other;
    }
};

/// Observer of applied events. on_event runs after the event is chosen and
/// before its effect on the infection sets, so state.infection[e.host] still
/// holds the pre-event set; hooks may modify beta and q.
class EventHook {
public:
    virtual ~EventHook() = default;
    /// When true, patch clocks also run on clean hosts; such inspections
    /// leave the infection sets unchanged.
    virtual bool needs_clean_inspections() const { return false; }
    virtual void on_event(const Event& e, SystemState& state) = 0;
};

/// Every enabled event with its rate, ordered host by host: infections by
/// (virus, neighbor), then filter detections by (virus, neighbor), then patch.
std::vector<Event> event_rates(const SystemState& state, const Network& net, const VirusModel& model,
                               bool clean_inspections = false);

struct StepResult {
    Event event;
    double dt = 0.0;
};

/// Applies an event's effect on the infection sets (hooks not run).
void apply_event(const Event& e, SystemState& state, const VirusModel& model);

/// Reference step: rebuilds the event list and selects by linear scan.
/// Returns nullopt when no event is enabled (absorption).
std::optional<StepResult> gillespie_step(SystemState& state, const Network& net, const VirusModel& model,
                                         EventHook* hook, Rng& rng);

/// Incremental simulator: keeps per-host neighbor counts and rates. Draws
/// the same events as gillespie_step for the same random stream (up to
/// floating-point ties).
class Simulator {
public:
    Simulator(const Network& net, const VirusModel& model, SystemState initial, EventHook* hook = nullptr);

    std::optional<StepResult> step(Rng& rng);
    const SystemState& state() const noexcept { return state_; }
    double total_rate() const noexcept;

private:
    double host_rate(HostId i) const;
    void refresh(HostId i);
    Event select_in_host(HostId i, double u) const;
    void set_infection(HostId i, VirusSet s);

    const Network* net_;
    const VirusModel* model_;
    SystemState state_;
    EventHook* hook_;
    bool clean_inspections_;
    int m_;
    std::vector<int> count_;  // count_[i * m + v] = neighbors of i holding v
    std::vector<double> rate_;
};

/// Categorical initial law: host i starts with {v} with probability
/// init[i * m + v] and clean otherwise (sum over v must be <= 1).
std::vector<VirusSet> draw_initial(std::span<const double> init, int hosts, int viruses, Rng& rng);

struct MonteCarloConfig {
    std::vector<double> init;   // hosts x viruses
    std::vector<double> beta0;  // per host
    double q0 = 0.0;
    std::vector<double> grid;
    long long trials = 100;
    std::uint64_t seed = 1;
    /// Worker threads; 0 reads EXPCTL_THREADS, falling back to hardware concurrency.
    int threads = 0;
    /// Creates a fresh controller per trial (may return nullptr).
    std::function<std::unique_ptr<EventHook>()> hook_factory;
};

/// Trial-averaged results. Host-averaged fractions carry standard errors
/// across trials; per-host marginals are in `host_means`.
struct MonteCarloResult {
    long long trials = 0;
    std::vector<double> t;
    std::vector<double> mean_any, se_any;
    std::vector<std::vector<double>> mean_virus, se_virus;  // [k][v]
    std::vector<double> mean_beta, se_beta;
    std::vector<double> mean_q;
    HostTrajectory host_means;
};

MonteCarloResult monte_carlo(const Network& net, const VirusModel& model, const MonteCarloConfig& cfg);

/// Thread count from EXPCTL_THREADS (>= 1), else hardware concurrency.
int default_threads();

}  // namespace mvnet
