#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mvnet {

using VirusId = int;

/// Subset of the virus set as a bitmask; bit v set <=> virus v present.
using VirusSet = std::uint32_t;

constexpr VirusSet kClean = 0;

constexpr VirusSet single(VirusId v) noexcept { return VirusSet{1} << v; }
constexpr bool contains(VirusSet s, VirusId v) noexcept { return (s >> v) & 1u; }
int popcount(VirusSet s) noexcept;

/// A (T, v) pair such that infecting a host holding T with v yields the
/// queried set. T == kClean denotes the clean host.
struct Predecessor {
    VirusSet from;
    VirusId virus;
    bool operator==(const Predecessor&) const = default;
};

/// Virus set, competition structure, packet rates and infection
/// probabilities. lambda(S, v) = p(S, v) * mu(v).
///
/// Infection probabilities default to one constant per virus; overrides may
/// be given for realizable (or clean) sets S with v not in S.
class VirusModel {
public:
    static constexpr int kMaxViruses = 16;

    struct Override {
        VirusSet set;
        VirusId virus;
        double p;
    };

    VirusModel() = default;
    VirusModel(std::vector<std::string> names, std::vector<double> mu, std::vector<double> p_default,
               std::span<const std::pair<VirusId, VirusId>> competing_pairs,
               std::span<const Override> overrides = {});

    /// Viruses with lambda(S, v) = rates[v] for all S (mu = rate, p = 1).
    static VirusModel coexisting(std::span<const double> rates);
    static VirusModel competing(std::span<const double> rates);

    int size() const noexcept { return static_cast<int>(mu_.size()); }
    VirusSet all() const noexcept { return (VirusSet{1} << size()) - 1; }
    const std::string& name(VirusId v) const { return names_.at(static_cast<std::size_t>(v)); }
    VirusId find(const std::string& name) const;  // -1 when absent

    double mu(VirusId v) const { return mu_.at(static_cast<std::size_t>(v)); }
    double p_default(VirusId v) const { return p_default_.at(static_cast<std::size_t>(v)); }
    VirusSet competitors(VirusId v) const { return compete_.at(static_cast<std::size_t>(v)); }
    bool competes(VirusId v, VirusId w) const { return contains(competitors(v), w); }

    /// p^{S,v}; unlisted sets (including unrealizable ones) use the default.
    double p(VirusSet s, VirusId v) const;
    double lambda(VirusSet s, VirusId v) const { return p(s, v) * mu(v); }

    bool is_realizable(VirusSet s) const noexcept;

    /// Nonempty realizable sets in ascending bitmask order.
    std::span<const VirusSet> realizable_sets() const noexcept { return realizable_; }
    int num_sets() const noexcept { return static_cast<int>(realizable_.size()); }
    /// Position of s in realizable_sets(), or -1 for clean/unrealizable.
    int set_index(VirusSet s) const noexcept;

    /// S \ C_v ∪ {v}. Throws AlreadyInfected if v ∈ S.
    VirusSet infect_target(VirusSet s, VirusId v) const;

    /// All (T, v) with infect_target(T, v) == S, T realizable or clean.
    std::vector<Predecessor> predecessors(VirusSet s) const;

    // Extremes over the rate table {(S, v) : S clean or realizable, v ∉ S}.
    double lambda_max() const noexcept { return lambda_max_; }
    double lambda_min() const noexcept { return lambda_min_; }
    double lambda_max(VirusId v) const { return lambda_max_v_.at(static_cast<std::size_t>(v)); }
    double p_max() const noexcept { return p_max_; }
    double p_min() const noexcept { return p_min_; }
    double p_max(VirusId v) const { return p_max_v_.at(static_cast<std::size_t>(v)); }
    double p_min(VirusId v) const { return p_min_v_.at(static_cast<std::size_t>(v)); }
    double mu_min() const noexcept;
    /// Sum over v of lambda(clean, v).
    double lambda_hat() const noexcept;

    std::string set_name(VirusSet s) const;  // "{v1,v2}"
    VirusSet parse_set(const std::string& text) const;

    /// Structured text (key = value lines); see README for the format.
    std::string serialize() const;
    static VirusModel parse(const std::string& text);
    static VirusModel load(const std::string& path);

    const std::map<std::pair<VirusSet, VirusId>, double>& overrides() const noexcept { return p_table_; }

private:
    void finalize();

    std::vector<std::string> names_;
    std::vector<double> mu_;
    std::vector<double> p_default_;
    std::vector<VirusSet> compete_;
    std::map<std::pair<VirusSet, VirusId>, double> p_table_;

    std::vector<VirusSet> realizable_;
    std::vector<int> index_;  // size 2^m
    double lambda_max_ = 0, lambda_min_ = 0, p_max_ = 0, p_min_ = 0;
    std::vector<double> lambda_max_v_, p_max_v_, p_min_v_;
};

}  // namespace mvnet
