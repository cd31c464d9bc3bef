#include "mvnet/network.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mvnet/error.hpp"
#include "mvnet/rng.hpp"

namespace mvnet {

Network::Network(int n, std::vector<Edge> canonical_edges) : n_(n), edges_(std::move(canonical_edges)) {
    neighbors_.assign(static_cast<std::size_t>(n_), {});
    for (const auto& [i, j] : edges_) {
        neighbors_[static_cast<std::size_t>(i)].push_back(j);
        neighbors_[static_cast<std::size_t>(j)].push_back(i);
    }
    for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
}

Network Network::from_edge_list(int n, std::span<const Edge> pairs) {
    if (n < 1) throw IndexOutOfRange("network needs at least one host, got n=" + std::to_string(n));
    std::vector<Edge> edges;
    edges.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
        if (a < 0 || a >= n || b < 0 || b >= n) {
            throw IndexOutOfRange("edge (" + std::to_string(a) + "," + std::to_string(b) +
                                  ") outside [0," + std::to_string(n) + ")");
        }
        if (a == b) throw SelfLoop("self-loop at host " + std::to_string(a));
        edges.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return Network(n, std::move(edges));
}

Network Network::erdos_renyi(int n, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidProbability("edge probability must be in [0,1]");
    if (n < 1) throw IndexOutOfRange("network needs at least one host");
    Rng rng(seed);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            // Always draw, so the stream does not depend on p's special values.
            if (rng.uniform() < p) edges.emplace_back(i, j);
        }
    }
    return Network(n, std::move(edges));
}

Network Network::complete(int n) {
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    return from_edge_list(n, edges);
}

Network Network::cycle(int n) {
    std::vector<Edge> edges;
    for (int i = 0; i < n && n > 2; ++i) edges.emplace_back(i, (i + 1) % n);
    if (n == 2) edges.emplace_back(0, 1);
    return from_edge_list(n, edges);
}

Network Network::path(int n) {
    std::vector<Edge> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return from_edge_list(n, edges);
}

std::vector<int> Network::degrees() const {
    std::vector<int> d(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) d[static_cast<std::size_t>(i)] = degree(i);
    return d;
}

bool Network::has_edge(HostId i, HostId j) const {
    const auto nb = neighbors(i);
    return std::binary_search(nb.begin(), nb.end(), j);
}

int Network::min_degree() const {
    int m = n_ > 0 ? degree(0) : 0;
    for (int i = 1; i < n_; ++i) m = std::min(m, degree(i));
    return m;
}

int Network::max_degree() const {
    int m = 0;
    for (int i = 0; i < n_; ++i) m = std::max(m, degree(i));
    return m;
}

double Network::average_degree() const {
    return n_ > 0 ? 2.0 * static_cast<double>(edges_.size()) / n_ : 0.0;
}

Eigen::MatrixXd Network::adjacency() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
    for (const auto& [i, j] : edges_) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
    }
    return a;
}

void Network::write(std::ostream& out) const {
    out << n_ << ' ' << edges_.size() << '\n';
    for (const auto& [i, j] : edges_) out << i << ' ' << j << '\n';
}

Network Network::read(std::istream& in) {
    int n = 0;
    long long m = 0;
    if (!(in >> n >> m) || m < 0) throw ConfigError(1, "header", "expected \"n m\"");
    std::vector<Edge> pairs;
    pairs.reserve(static_cast<std::size_t>(m));
    for (long long k = 0; k < m; ++k) {
        int i = 0, j = 0;
        if (!(in >> i >> j)) {
            throw ConfigError(static_cast<int>(k + 2), "edge", "expected \"i j\"");
        }
        pairs.emplace_back(i, j);
    }
    return from_edge_list(n, pairs);
}

Network Network::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, path, "cannot open network file");
    return read(in);
}

void Network::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    write(out);
}

}  // namespace mvnet
