#pragma once
// Independent reference computations used by the tests. These deliberately
// avoid the library's fast paths: distances accumulate in long double with a
// naive loop, k-NN sorts all n distances, eigenpairs come from Eigen.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "frann/dataset.hpp"
#include "frann/trees.hpp"

namespace oracles {

inline double naive_l2_sq(std::span<const float> a, std::span<const float> b) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const long double diff = (long double)a[i] - (long double)b[i];
        acc += diff * diff;
    }
    return double(acc);
}

inline double dense_dot(std::span<const float> x, const frann::Direction& dir,
                        std::size_t d) {
    std::vector<long double> dense(d, 0.0L);
    for (std::size_t j = 0; j < dir.nnz(); ++j) dense[dir.idx[j]] = dir.w[j];
    long double acc = 0.0L;
    for (std::size_t i = 0; i < d; ++i) acc += dense[i] * (long double)x[i];
    return double(acc);
}

// full sort of all n distances, ties by index
inline std::vector<std::uint32_t> full_sort_knn(const frann::DataMatrix& data,
                                                std::span<const float> q, std::uint32_t k) {
    std::vector<std::pair<double, std::uint32_t>> dist(data.n);
    for (std::uint64_t i = 0; i < data.n; ++i) {
        dist[i] = {naive_l2_sq(data.row_span(i), q), std::uint32_t(i)};
    }
    std::sort(dist.begin(), dist.end());
    std::vector<std::uint32_t> out(k);
    for (std::uint32_t i = 0; i < k; ++i) out[i] = dist[i].second;
    return out;
}

// sample covariance (population normalization) of the given corpus points
// restricted to the given coordinates, centered by the node mean
inline Eigen::MatrixXd restricted_covariance(const frann::DataMatrix& data,
                                             std::span<const std::uint32_t> points,
                                             std::span<const std::uint32_t> coords) {
    const auto s = std::ptrdiff_t(points.size());
    const auto a = std::ptrdiff_t(coords.size());
    Eigen::MatrixXd sub(s, a);
    for (std::ptrdiff_t i = 0; i < s; ++i) {
        for (std::ptrdiff_t j = 0; j < a; ++j) {
            sub(i, j) = data.row(points[std::size_t(i)])[coords[std::size_t(j)]];
        }
    }
    const Eigen::RowVectorXd mean = sub.colwise().mean();
    sub.rowwise() -= mean;
    return (sub.transpose() * sub) / double(s);
}

struct EigenPair {
    double value;
    Eigen::VectorXd vector;
};

inline EigenPair leading_eigenpair(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    const auto last = m.rows() - 1;  // eigenvalues come out ascending
    return {solver.eigenvalues()(last), solver.eigenvectors().col(last)};
}

inline double rayleigh_quotient(const Eigen::MatrixXd& m, std::span<const float> w) {
    Eigen::VectorXd v(std::ptrdiff_t(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i) v(std::ptrdiff_t(i)) = w[i];
    return v.dot(m * v) / v.dot(v);
}

// pairwise-slope enumeration with the even-count mean rule, kept separate
// from the library implementation
inline std::pair<double, double> theil_sen_enumeration(
    std::span<const std::pair<double, double>> pts) {
    std::vector<double> slopes;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            if (pts[i].first != pts[j].first) {
                slopes.push_back((pts[j].second - pts[i].second) /
                                 (pts[j].first - pts[i].first));
            }
        }
    }
    std::sort(slopes.begin(), slopes.end());
    const auto mid = slopes.size() / 2;
    const double slope =
        slopes.size() % 2 == 1 ? slopes[mid] : 0.5 * (slopes[mid - 1] + slopes[mid]);
    std::vector<double> res;
    res.reserve(pts.size());
    for (const auto& [x, y] : pts) res.push_back(y - slope * x);
    std::sort(res.begin(), res.end());
    const auto rmid = res.size() / 2;
    const double intercept =
        res.size() % 2 == 1 ? res[rmid] : 0.5 * (res[rmid - 1] + res[rmid]);
    return {slope, intercept};
}

// uniform random matrix in [lo, hi]
inline frann::DataMatrix random_matrix(std::uint64_t n, std::uint64_t d, std::uint64_t seed,
                                       float lo = -1.0f, float hi = 1.0f) {
    frann::DataMatrix data;
    data.n = n;
    data.d = d;
    data.values.resize(std::size_t(n * d));
    frann::Rng rng(seed);
    for (auto& v : data.values) v = lo + float(rng.uniform_real()) * (hi - lo);
    return data;
}

// node data with one planted high-variance direction; the restriction to any
// sampled coordinate subset keeps a dominant eigengap, which is what the
// gradient-ascent eigenvector approximation needs to converge
inline frann::DataMatrix spiked_node_data(std::uint64_t s, std::uint64_t d,
                                          std::uint64_t seed) {
    frann::DataMatrix data;
    data.n = s;
    data.d = d;
    data.values.resize(std::size_t(s * d));
    frann::Rng rng(seed);
    std::vector<double> spike(d);
    for (auto& u : spike) u = rng.uniform(2) == 0 ? -1.0 : 1.0;
    const double spike_scale = std::sqrt(3000.0 / double(d));
    const double noise_scale = 10.0;
    for (std::uint64_t i = 0; i < s; ++i) {
        const double z = rng.normal();
        for (std::uint64_t j = 0; j < d; ++j) {
            data.values[i * d + j] =
                float(spike_scale * z * spike[j] + noise_scale * rng.normal());
        }
    }
    return data;
}

}  // namespace oracles
