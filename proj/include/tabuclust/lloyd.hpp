#ifndef TABUCLUST_LLOYD_HPP
#define TABUCLUST_LLOYD_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "objective.hpp"

/**
 * @file lloyd.hpp
 * @brief Lloyd's K-Means with random-point or K-Means++ seeding.
 */

namespace tabuclust {

enum class LloydInit { random_points, kmeans_plus_plus };

struct LloydConfig {
    std::size_t max_iterations = 300;
    std::uint64_t seed = 0;
    LloydInit init = LloydInit::random_points;
};

struct ClusteringResult {
    CenterSet centers;
    Assignment assignment;
    /// ICSS of `centers` under `assignment`.
    double j = 0;
    std::size_t iterations = 0;
    bool converged = false;
    /// J after every centroid update, in order.
    std::vector<double> history;
};

namespace detail {

inline void check_k(const Dataset& ds, std::size_t k) {
    if (k == 0 || k > ds.n()) {
        throw std::invalid_argument("k=" + std::to_string(k) + " must lie in [1, " + std::to_string(ds.n()) + "]");
    }
}

} // namespace detail

/// `k` distinct rows drawn uniformly without replacement (partial Fisher-Yates).
inline CenterSet init_random(const Dataset& ds, std::size_t k, std::uint64_t seed) {
    detail::check_k(ds, k);
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> idx(ds.n());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, ds.n() - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(k);
    return CenterSet::quantized(ds, std::move(idx));
}

/**
 * K-Means++ seeding with exact D^2 sampling: the first row is uniform, each
 * further row is drawn with probability proportional to its squared
 * distance to the closest row chosen so far. Rows at distance zero are only
 * drawn once no positive-weight row is left, and then uniformly among the
 * rows not yet chosen.
 */
inline CenterSet init_kmeanspp(const Dataset& ds, std::size_t k, std::uint64_t seed) {
    detail::check_k(ds, k);
    const std::size_t n = ds.n();
    std::mt19937_64 rng(seed);

    std::vector<std::size_t> chosen;
    chosen.reserve(k);
    std::vector<char> taken(n, 0);
    std::vector<double> weight(n);

    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    chosen.push_back(first(rng));
    taken[chosen.back()] = 1;
    for (std::size_t i = 0; i < n; ++i) {
        weight[i] = squared_distance(ds.row(i), ds.row(chosen.back()));
    }

    while (chosen.size() < k) {
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i]) {
                total += weight[i];
            }
        }

        std::size_t next = n;
        if (total > 0) {
            const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
            double acc = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i] || weight[i] <= 0) {
                    continue;
                }
                acc += weight[i];
                next = i;
                if (target < acc) {
                    break;
                }
            }
        } else {
            std::vector<std::size_t> free_rows;
            for (std::size_t i = 0; i < n; ++i) {
                if (!taken[i]) {
                    free_rows.push_back(i);
                }
            }
            next = free_rows[std::uniform_int_distribution<std::size_t>(0, free_rows.size() - 1)(rng)];
        }

        chosen.push_back(next);
        taken[next] = 1;
        for (std::size_t i = 0; i < n; ++i) {
            weight[i] = std::min(weight[i], squared_distance(ds.row(i), ds.row(next)));
        }
    }
    return CenterSet::quantized(ds, std::move(chosen));
}

/**
 * Alternates centroid updates and nearest-center assignment from `init`
 * until no label changes or `cfg.max_iterations` centroid updates have run.
 * Empty clusters keep their previous center. The returned J sequence in
 * `history` is non-increasing.
 */
inline ClusteringResult lloyd_run(const Dataset& ds, const CenterSet& init, const LloydConfig& cfg = {}) {
    if (cfg.max_iterations == 0) {
        throw std::invalid_argument("max_iterations must be at least 1");
    }
    ClusteringResult res;
    res.centers = init;
    res.centers.unquantize();
    res.assignment = assign(ds, init);

    while (res.iterations < cfg.max_iterations) {
        res.centers = centroids(ds, res.assignment, res.centers);
        ++res.iterations;
        res.history.push_back(icss(ds, res.centers, res.assignment));

        auto next = assign(ds, res.centers);
        if (next.labels() == res.assignment.labels()) {
            res.converged = true;
            break;
        }
        res.assignment = std::move(next);
    }

    res.j = icss(ds, res.centers, res.assignment);
    return res;
}

/// Seeds according to `cfg.init`, then runs Lloyd.
inline ClusteringResult kmeans(const Dataset& ds, std::size_t k, const LloydConfig& cfg = {}) {
    const auto init = cfg.init == LloydInit::kmeans_plus_plus ? init_kmeanspp(ds, k, cfg.seed)
                                                              : init_random(ds, k, cfg.seed);
    return lloyd_run(ds, init, cfg);
}

} // namespace tabuclust

#endif
