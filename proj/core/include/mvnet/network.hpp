#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mvnet {

using HostId = int;
using Edge = std::pair<HostId, HostId>;

/// Undirected host network without self-loops or parallel edges.
///
/// Edges are stored canonically as (min, max) pairs in ascending order, and
/// each host's neighbor list is sorted. Immutable after construction.
class Network {
public:
    Network() = default;

    /// Builds a network from arbitrary host pairs; duplicates and reversed
    /// duplicates collapse to a single edge.
    /// Throws IndexOutOfRange or SelfLoop.
    static Network from_edge_list(int n, std::span<const Edge> pairs);

    /// G(n, p): every unordered pair is included independently with
    /// probability p. Deterministic for a fixed seed.
    static Network erdos_renyi(int n, double p, std::uint64_t seed);

    static Network complete(int n);
    static Network cycle(int n);
    static Network path(int n);

    int size() const noexcept { return n_; }
    std::size_t num_edges() const noexcept { return edges_.size(); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    std::span<const HostId> neighbors(HostId i) const { return neighbors_[static_cast<std::size_t>(i)]; }
    int degree(HostId i) const { return static_cast<int>(neighbors_[static_cast<std::size_t>(i)].size()); }
    std::vector<int> degrees() const;
    bool has_edge(HostId i, HostId j) const;

    int min_degree() const;
    int max_degree() const;
    double average_degree() const;

    /// Dense symmetric 0-1 adjacency matrix.
    Eigen::MatrixXd adjacency() const;

    /// Edge-list text: first line "n m", then m lines "i j".
    void write(std::ostream& out) const;
    static Network read(std::istream& in);
    static Network load(const std::string& path);
    void save(const std::string& path) const;

    bool operator==(const Network& other) const noexcept {
        return n_ == other.n_ && edges_ == other.edges_;
    }

private:
    Network(int n, std::vector<Edge> canonical_edges);

    int n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<HostId>> neighbors_;
};

}  // namespace mvnet
