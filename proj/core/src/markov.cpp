#include "mvnet/markov.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "mvnet/error.hpp"

namespace mvnet {
namespace {

void check_state(const SystemState& s, const Network& net) {
    const auto n = static_cast<std::size_t>(net.size());
    if (s.infection.size() != n || s.beta.size() != n) throw InvalidModel("state size does not match the network");
}

}  // namespace

std::vector<Event> event_rates(const SystemState& state, const Network& net, const VirusModel& model,
                               bool clean_inspections) {
    check_state(state, net);
    const int m = model.size();
    std::vector<Event> out;
    for (HostId i = 0; i < net.size(); ++i) {
        const VirusSet si = state.infection[static_cast<std::size_t>(i)];
        for (VirusId v = 0; v < m; ++v) {
            if (contains(si, v)) continue;
            const double lam = model.lambda(si, v);
            if (lam <= 0.0) continue;
            for (HostId j : net.neighbors(i)) {
                if (contains(state.infection[static_cast<std::size_t>(j)], v)) out.push_back({EventKind::Infection, i, v, j, lam});
            }
        }
        if (state.q > 0.0) {
            for (VirusId v = 0; v < m; ++v) {
                if (!contains(si, v)) continue;
                const double rate = state.q * model.mu(v);
                for (HostId j : net.neighbors(i)) {
                    if (!contains(state.infection[static_cast<std::size_t>(j)], v)) out.push_back({EventKind::FilterDetect, i, v, j, rate});
                }
            }
        }
        const double b = state.beta[static_cast<std::size_t>(i)];
        if (b > 0.0 && (si != kClean || clean_inspections)) out.push_back({EventKind::Patch, i, -1, -1, b});
    }
    return out;
}

void apply_event(const Event& e, SystemState& state, const VirusModel& model) {
    auto& s = state.infection[static_cast<std::size_t>(e.host)];
    if (e.kind == EventKind::Infection) {
        s = model.infect_target(s, e.virus);
        if (!model.is_realizable(s)) throw Error("internal: host holds competing viruses");
    } else {
        s = kClean;
    }
}

std::optional<StepResult> gillespie_step(SystemState& state, const Network& net, const VirusModel& model,
                                         EventHook* hook, Rng& rng) {
    const bool clean = hook != nullptr && hook->needs_clean_inspections();
    const std::vector<Event> events = event_rates(state, net, model, clean);
    double total = 0.0;
    for (const Event& e : events) total += e.rate;
    if (events.empty() || !(total > 0.0)) return std::nullopt;
    const double dt = rng.exponential(total);
    const double target = rng.uniform() * total;
    double acc = 0.0;
    std::size_t pick = events.size() - 1;
    for (std::size_t k = 0; k < events.size(); ++k) {
        acc += events[k].rate;
        if (target < acc) {
            pick = k;
            break;
        }
    }
    const Event e = events[pick];
    state.t += dt;
    if (hook != nullptr) hook->on_event(e, state);
    apply_event(e, state, model);
    return StepResult{e, dt};
}

Simulator::Simulator(const Network& net, const VirusModel& model, SystemState initial, EventHook* hook)
    : net_(&net), model_(&model), state_(std::move(initial)), hook_(hook),
      clean_inspections_(hook != nullptr && hook->needs_clean_inspections()), m_(model.size()) {
    check_state(state_, net);
    const int n = net.size();
    count_.assign(static_cast<std::size_t>(n * m_), 0);
    for (HostId i = 0; i < n; ++i) {
        const VirusSet si = state_.infection[static_cast<std::size_t>(i)];
        if (si != kClean && !model.is_realizable(si)) throw InvalidModel("initial state holds competing viruses");
        for (VirusId v = 0; v < m_; ++v) {
            if (!contains(si, v)) continue;
            for (HostId j : net.neighbors(i)) ++count_[static_cast<std::size_t>(j * m_ + v)];
        }
    }
    rate_.assign(static_cast<std::size_t>(n), 0.0);
    for (HostId i = 0; i < n; ++i) refresh(i);
}

double Simulator::host_rate(HostId i) const {
    const VirusSet si = state_.infection[static_cast<std::size_t>(i)];
    const int* c = count_.data() + static_cast<std::ptrdiff_t>(i * m_);
    const int d = net_->degree(i);
    double r = 0.0;
    for (VirusId v = 0; v < m_; ++v) {
        if (!contains(si, v) && c[v] > 0) {
            const double lam = model_->lambda(si, v);
            if (lam > 0.0) r += lam * c[v];
        }
    }
    if (state_.q > 0.0) {
        for (VirusId v = 0; v < m_; ++v) {
            if (contains(si, v) && d - c[v] > 0) r += state_.q * model_->mu(v) * (d - c[v]);
        }
    }
    const double b = state_.beta[static_cast<std::size_t>(i)];
    if (b > 0.0 && (si != kClean || clean_inspections_)) r += b;
    return r;
}

void Simulator::refresh(HostId i) { rate_[static_cast<std::size_t>(i)] = host_rate(i); }

double Simulator::total_rate() const noexcept {
    double total = 0.0;
    for (double r : rate_) total += r;
    return total;
}

Event Simulator::select_in_host(HostId i, double u) const {
    const VirusSet si = state_.infection[static_cast<std::size_t>(i)];
    const int* c = count_.data() + static_cast<std::ptrdiff_t>(i * m_);
    const int d = net_->degree(i);
    double acc = 0.0;
    Event last{};
    bool have_last = false;
    for (VirusId v = 0; v < m_; ++v) {
        if (contains(si, v) || c[v] == 0) continue;
        const double lam = model_->lambda(si, v);
        if (lam <= 0.0) continue;
        for (HostId j : net_->neighbors(i)) {
            if (!contains(state_.infection[static_cast<std::size_t>(j)], v)) continue;
            acc += lam;
            last = {EventKind::Infection, i, v, j, lam};
            have_last = true;
            if (u < acc) return last;
        }
    }
    if (state_.q > 0.0) {
        for (VirusId v = 0; v < m_; ++v) {
            if (!contains(si, v) || d - c[v] == 0) continue;
            const double rate = state_.q * model_->mu(v);
            for (HostId j : net_->neighbors(i)) {
                if (contains(state_.infection[static_cast<std::size_t>(j)], v)) continue;
                acc += rate;
                last = {EventKind::FilterDetect, i, v, j, rate};
                have_last = true;
                if (u < acc) return last;
            }
        }
    }
    const double b = state_.beta[static_cast<std::size_t>(i)];
    if (b > 0.0 && (si != kClean || clean_inspections_)) return {EventKind::Patch, i, -1, -1, b};
    if (!have_last) throw Error("internal: selected host has no enabled event");
    return last;  // rounding spill past the host's last event
}

void Simulator::set_infection(HostId i, VirusSet s) {
    const VirusSet old = state_.infection[static_cast<std::size_t>(i)];
    if (old == s) return;
    state_.infection[static_cast<std::size_t>(i)] = s;
    for (VirusId v = 0; v < m_; ++v) {
        const bool was = contains(old, v);
        const bool now = contains(s, v);
        if (was == now) continue;
        for (HostId j : net_->neighbors(i)) count_[static_cast<std::size_t>(j * m_ + v)] += now ? 1 : -1;
    }
}

std::optional<StepResult> Simulator::step(Rng& rng) {
    const double total = total_rate();
    if (!(total > 0.0)) return std::nullopt;
    const double dt = rng.exponential(total);
    const double target = rng.uniform() * total;
    const int n = net_->size();
    double acc = 0.0;
    HostId host = -1;
    for (HostId i = 0; i < n; ++i) {
        const double r = rate_[static_cast<std::size_t>(i)];
        if (r <= 0.0) continue;
        if (target < acc + r) {
            host = i;
            break;
        }
        acc += r;
        host = i;  // fallback for rounding at the top end
    }
    const Event e = select_in_host(host, target - acc >= 0.0 ? target - acc : 0.0);

    state_.t += dt;
    const double q_before = state_.q;
    if (hook_ != nullptr) hook_->on_event(e, state_);

    VirusSet next = state_.infection[static_cast<std::size_t>(e.host)];
    if (e.kind == EventKind::Infection) {
        next = model_->infect_target(next, e.virus);
        if (!model_->is_realizable(next)) throw Error("internal: host holds competing viruses");
    } else {
        next = kClean;
    }
    set_infection(e.host, next);

    if (state_.q != q_before) {
        for (HostId i = 0; i < n; ++i) refresh(i);
    } else {
        refresh(e.host);
        for (HostId j : net_->neighbors(e.host)) refresh(j);
    }
    return StepResult{e, dt};
}

std::vector<VirusSet> draw_initial(std::span<const double> init, int hosts, int viruses, Rng& rng) {
    if (init.size() != static_cast<std::size_t>(hosts * viruses)) throw InvalidModel("initial law: expected hosts x viruses entries");
    std::vector<VirusSet> s(static_cast<std::size_t>(hosts), kClean);
    for (int i = 0; i < hosts; ++i) {
        double total = 0.0;
        for (int v = 0; v < viruses; ++v) {
            const double p = init[static_cast<std::size_t>(i * viruses + v)];
            if (!(p >= 0.0 && p <= 1.0)) throw InvalidProbability("initial probability outside [0, 1]");
            total += p;
        }
        if (total > 1.0 + 1e-12) throw InvalidProbability("initial probabilities of a host sum above 1");
        const double u = rng.uniform();
        double acc = 0.0;
        for (int v = 0; v < viruses; ++v) {
            acc += init[static_cast<std::size_t>(i * viruses + v)];
            if (u < acc) {
                s[static_cast<std::size_t>(i)] = single(v);
                break;
            }
        }
    }
    return s;
}

int default_threads() {
    if (const char* env = std::getenv("EXPCTL_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<int>(std::min<long>(v, 256));
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

namespace {

// One trial sampled on the grid.
struct TrialRecord {
    std::vector<VirusSet> sets;  // [k * n + i]
    std::vector<double> beta;    // [k * n + i]
    std::vector<double> q;       // [k]
};

TrialRecord run_trial(const Network& net, const VirusModel& model, const MonteCarloConfig& cfg, long long index) {
    const int n = net.size();
    const int m = model.size();
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(index)));
    SystemState s;
    s.infection = draw_initial(cfg.init, n, m, rng);
    s.beta = cfg.beta0;
    s.q = cfg.q0;
    std::unique_ptr<EventHook> hook = cfg.hook_factory ? cfg.hook_factory() : nullptr;
    Simulator sim(net, model, std::move(s), hook.get());

    TrialRecord rec;
    const std::size_t k_count = cfg.grid.size();
    rec.sets.reserve(k_count * static_cast<std::size_t>(n));
    rec.beta.reserve(k_count * static_cast<std::size_t>(n));
    rec.q.reserve(k_count);
    std::size_t next = 0;
    auto record = [&](const SystemState& st) {
        rec.sets.insert(rec.sets.end(), st.infection.begin(), st.infection.end());
        rec.beta.insert(rec.beta.end(), st.beta.begin(), st.beta.end());
        rec.q.push_back(st.q);
        ++next;
    };
    while (next < k_count) {
        // The state is constant on [t, t + dt): grid points before the next
        // event see the current state.
        const SystemState& before = sim.state();
        Rng peek = rng;
        const double total = sim.total_rate();
        if (!(total > 0.0)) {
            while (next < k_count) record(before);
            break;
        }
        const double dt = peek.exponential(total);
        while (next < k_count && cfg.grid[next] < before.t + dt) record(before);
        if (next == k_count) break;
        sim.step(rng);
    }
    return rec;
}

}  // namespace

MonteCarloResult monte_carlo(const Network& net, const VirusModel& model, const MonteCarloConfig& cfg) {
    if (cfg.trials < 1) throw InvalidModel("monte_carlo: trials must be >= 1");
    const int n = net.size();
    const int m = model.size();
    if (cfg.beta0.size() != static_cast<std::size_t>(n)) throw InvalidModel("beta0: expected one rate per host");
    const std::size_t kc = cfg.grid.size();
    const auto nn = static_cast<std::size_t>(n);
    const auto mm = static_cast<std::size_t>(m);

    // Per-grid accumulators (trial order).
    std::vector<double> host_any(kc * nn, 0.0), host_v(kc * nn * mm, 0.0), host_beta(kc * nn, 0.0), qsum(kc, 0.0);
    // Welford state for host-averaged quantities.
    std::vector<double> any_mean(kc, 0.0), any_m2(kc, 0.0), beta_mean(kc, 0.0), beta_m2(kc, 0.0);
    std::vector<double> v_mean(kc * mm, 0.0), v_m2(kc * mm, 0.0);
    long long seen = 0;
    auto welford = [&](double& mean, double& m2, double x) {
        const double d = x - mean;
        mean += d / static_cast<double>(seen);
        m2 += d * (x - mean);
    };

    const int threads = std::max(1, cfg.threads > 0 ? cfg.threads : default_threads());
    const long long block = 256;
    std::vector<TrialRecord> recs;
    for (long long start = 0; start < cfg.trials; start += block) {
        const long long count = std::min(block, cfg.trials - start);
        recs.assign(static_cast<std::size_t>(count), TrialRecord{});
        std::atomic<long long> next{0};
        std::exception_ptr failure;
        std::atomic<bool> failed{false};
        auto worker = [&] {
            for (;;) {
                const long long k = next.fetch_add(1);
                if (k >= count || failed.load()) return;
                try {
                    recs[static_cast<std::size_t>(k)] = run_trial(net, model, cfg, start + k);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                    return;
                }
            }
        };
        const int nt = static_cast<int>(std::min<long long>(threads, count));
        if (nt <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < nt; ++w) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }
        if (failure) std::rethrow_exception(failure);

        for (const TrialRecord& r : recs) {
            ++seen;
            for (std::size_t k = 0; k < kc; ++k) {
                double any = 0.0, bsum = 0.0;
                std::vector<double> vf(mm, 0.0);
                for (std::size_t i = 0; i < nn; ++i) {
                    const VirusSet s = r.sets[k * nn + i];
                    const double b = r.beta[k * nn + i];
                    if (s != kClean) {
                        host_any[k * nn + i] += 1.0;
                        any += 1.0;
                    }
                    for (std::size_t v = 0; v < mm; ++v) {
                        if (contains(s, static_cast<VirusId>(v))) {
                            host_v[(k * nn + i) * mm + v] += 1.0;
                            vf[v] += 1.0;
                        }
                    }
                    host_beta[k * nn + i] += b;
                    bsum += b;
                }
                qsum[k] += r.q[k];
                welford(any_mean[k], any_m2[k], any / static_cast<double>(n));
                welford(beta_mean[k], beta_m2[k], bsum / static_cast<double>(n));
                for (std::size_t v = 0; v < mm; ++v) welford(v_mean[k * mm + v], v_m2[k * mm + v], vf[v] / static_cast<double>(n));
            }
        }
    }

    MonteCarloResult out;
    out.trials = cfg.trials;
    out.t = cfg.grid;
    const double nt = static_cast<double>(cfg.trials);
    auto se = [&](double m2) { return cfg.trials > 1 ? std::sqrt(std::max(0.0, m2 / (nt - 1.0)) / nt) : 0.0; };
    out.host_means.hosts = n;
    out.host_means.viruses = m;
    out.host_means.t = cfg.grid;
    for (std::size_t k = 0; k < kc; ++k) {
        out.mean_any.push_back(any_mean[k]);
        out.se_any.push_back(se(any_m2[k]));
        out.mean_beta.push_back(beta_mean[k]);
        out.se_beta.push_back(se(beta_m2[k]));
        out.mean_q.push_back(qsum[k] / nt);
        std::vector<double> mv(mm), sv(mm);
        for (std::size_t v = 0; v < mm; ++v) {
            mv[v] = v_mean[k * mm + v];
            sv[v] = se(v_m2[k * mm + v]);
        }
        out.mean_virus.push_back(std::move(mv));
        out.se_virus.push_back(std::move(sv));
        std::vector<double> ha(nn), hv(nn * mm), hb(nn);
        for (std::size_t i = 0; i < nn; ++i) {
            ha[i] = host_any[k * nn + i] / nt;
            hb[i] = host_beta[k * nn + i] / nt;
            for (std::size_t v = 0; v < mm; ++v) hv[i * mm + v] = host_v[(k * nn + i) * mm + v] / nt;
        }
        out.host_means.any.push_back(std::move(ha));
        out.host_means.virus.push_back(std::move(hv));
        out.host_means.beta.push_back(std::move(hb));
        out.host_means.q.push_back(qsum[k] / nt);
    }
    return out;
}

}  // namespace mvnet
