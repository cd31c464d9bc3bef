#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Characteristic polynomial det(zI - M) by Faddeev-LeVerrier; c[k] is the
// coefficient of z^(n-k), c[0] = 1.
inline std::vector<double> charpoly(const Eigen::MatrixXd& m) {
    const auto n = m.rows();
    std::vector<double> c(static_cast<std::size_t>(n + 1), 0.0);
    c[0] = 1.0;
    Eigen::MatrixXd mk = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        mk = m * mk + c[static_cast<std::size_t>(k - 1)] * id;
        c[static_cast<std::size_t>(k)] = -(m * mk).trace() / static_cast<double>(k);
    }
    return c;
}

inline std::complex<double> horner(const std::vector<double>& c, std::complex<double> z) {
    std::complex<double> p = 0.0;
    for (double a : c) p = p * z + a;
    return p;
}

// Aberth-Ehrlich iteration on all roots simultaneously, then sorted real parts.
inline std::vector<double> poly_roots(const std::vector<double>& c) {
    const std::size_t n = c.size() - 1;
    std::vector<double> dc;
    for (std::size_t k = 0; k < n; ++k) dc.push_back(c[k] * static_cast<double>(n - k));
    double bound = 0.0;
    for (std::size_t k = 1; k <= n; ++k) bound = std::max(bound, std::abs(c[k]));
    std::vector<std::complex<double>> z(n);
    for (std::size_t k = 0; k < n; ++k)
        z[k] = std::polar(1.0 + bound, 0.4 + 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n));
    for (int it = 0; it < 500; ++it) {
        double move = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const auto ratio = horner(c, z[k]) / horner(dc, z[k]);
            std::complex<double> s = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != k) s += 1.0 / (z[k] - z[j]);
            const auto w = ratio / (1.0 - ratio * s);
            z[k] -= w;
            move = std::max(move, std::abs(w));
        }
        if (move < 1e-15) break;
    }
    std::vector<double> r;
    for (const auto& x : z) r.push_back(x.real());
    std::sort(r.begin(), r.end());
    return r;
}

inline Eigen::MatrixXd random_symmetric(int n, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = u(gen);
    return m;
}

}  // namespace oracle
