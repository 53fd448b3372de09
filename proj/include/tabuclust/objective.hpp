#ifndef TABUCLUST_OBJECTIVE_HPP
#define TABUCLUST_OBJECTIVE_HPP

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dataset.hpp"

/**
 * @file objective.hpp
 * @brief Intra-cluster sum of squares, nearest-center assignment and centroids.
 *
 * Cluster indices are 0-based throughout the library.
 */

namespace tabuclust {

inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double sum = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double t = a[j] - b[j];
        sum += t * t;
    }
    return sum;
}

/**
 * K centers of dimension d, row-major.
 *
 * A quantized center set additionally records, for every center, the dataset
 * row it was copied from. Free center sets (centroids, refined solutions)
 * carry no row indices.
 */
class CenterSet {
public:
    CenterSet() = default;

    CenterSet(std::vector<double> values, std::size_t k, std::size_t d) : values_(std::move(values)), k_(k), d_(d) {
        if (k_ == 0 || d_ == 0 || values_.size() != k_ * d_) {
            throw std::invalid_argument("center set must hold k >= 1 centers of matching dimension");
        }
    }

    /// Centers copied from the given dataset rows.
    static CenterSet quantized(const Dataset& ds, std::vector<std::size_t> rows) {
        if (rows.empty()) {
            throw std::invalid_argument("center set must hold at least one center");
        }
        std::vector<double> values;
        values.reserve(rows.size() * ds.d());
        for (std::size_t r : rows) {
            if (r >= ds.n()) {
                throw std::out_of_range("center row " + std::to_string(r) + " is not a dataset row");
            }
            const auto x = ds.row(r);
            values.insert(values.end(), x.begin(), x.end());
        }
        CenterSet out(std::move(values), rows.size(), ds.d());
        out.rows_ = std::move(rows);
        return out;
    }

    static CenterSet from_rows(const std::vector<std::vector<double>>& centers) {
        if (centers.empty()) {
            throw std::invalid_argument("center set must hold at least one center");
        }
        std::vector<double> values;
        for (const auto& c : centers) {
            if (c.size() != centers.front().size()) {
                throw std::invalid_argument("centers must share one dimension");
            }
            values.insert(values.end(), c.begin(), c.end());
        }
        return CenterSet(std::move(values), centers.size(), centers.front().size());
    }

    std::size_t k() const noexcept { return k_; }
    std::size_t d() const noexcept { return d_; }

    std::span<const double> center(std::size_t c) const noexcept { return {values_.data() + c * d_, d_}; }
    std::span<double> center(std::size_t c) noexcept { return {values_.data() + c * d_, d_}; }

    std::span<const double> values() const noexcept { return values_; }

    bool is_quantized() const noexcept { return !rows_.empty(); }

    /// Dataset row behind each center; empty for free center sets.
    const std::vector<std::size_t>& rows() const noexcept { return rows_; }

    /// Drops the row provenance, e.g. after centers have been moved.
    void unquantize() noexcept { rows_.clear(); }

    friend bool operator==(const CenterSet&, const CenterSet&) = default;

private:
    std::vector<double> values_;
    std::size_t k_ = 0;
    std::size_t d_ = 0;
    std::vector<std::size_t> rows_;
};

/// Cluster label of every observation plus per-cluster sizes.
class Assignment {
public:
    Assignment() = default;

    Assignment(std::vector<std::size_t> labels, std::size_t k) : labels_(std::move(labels)), counts_(k, 0) {
        for (std::size_t l : labels_) {
            if (l >= k) {
                throw std::out_of_range("cluster label " + std::to_string(l) + " out of range for k=" +
                                        std::to_string(k));
            }
            ++counts_[l];
        }
    }

    std::size_t n() const noexcept { return labels_.size(); }
    std::size_t k() const noexcept { return counts_.size(); }

    std::size_t operator[](std::size_t i) const noexcept { return labels_[i]; }

    const std::vector<std::size_t>& labels() const noexcept { return labels_; }
    const std::vector<std::size_t>& counts() const noexcept { return counts_; }

    /// Row indices of the members of each cluster, in increasing row order.
    std::vector<std::vector<std::size_t>> members() const {
        std::vector<std::vector<std::size_t>> out(counts_.size());
        for (std::size_t c = 0; c < counts_.size(); ++c) {
            out[c].reserve(counts_[c]);
        }
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            out[labels_[i]].push_back(i);
        }
        return out;
    }

    friend bool operator==(const Assignment&, const Assignment&) = default;

private:
    std::vector<std::size_t> labels_;
    std::vector<std::size_t> counts_;
};

/**
 * Assigns every observation to its nearest center by squared Euclidean
 * distance. Equidistant centers resolve to the lowest cluster index, and
 * clusters may come out empty.
 */
inline Assignment assign(const Dataset& ds, const CenterSet& centers) {
    if (centers.d() != ds.d()) {
        throw std::invalid_argument("center dimension " + std::to_string(centers.d()) +
                                    " does not match dataset dimension " + std::to_string(ds.d()));
    }
    std::vector<std::size_t> labels(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const auto x = ds.row(i);
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_c = 0;
        for (std::size_t c = 0; c < centers.k(); ++c) {
            const double dist = squared_distance(x, centers.center(c));
            if (dist < best) {
                best = dist;
                best_c = c;
            }
        }
        labels[i] = best_c;
    }
    return Assignment(std::move(labels), centers.k());
}

/// J: sum over observations of the squared distance to their assigned center.
inline double icss(const Dataset& ds, const CenterSet& centers, const Assignment& a) {
    if (centers.d() != ds.d() || a.n() != ds.n() || a.k() != centers.k()) {
        throw std::invalid_argument("assignment is inconsistent with dataset and centers");
    }
    double j = 0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        j += squared_distance(ds.row(i), centers.center(a[i]));
    }
    return j;
}

/**
 * Mean of each cluster. A cluster with no members keeps the matching
 * `fallback` center so that K stays fixed. The result is always free.
 */
inline CenterSet centroids(const Dataset& ds, const Assignment& a, const CenterSet& fallback) {
    const std::size_t k = a.k();
    const std::size_t d = ds.d();
    if (a.n() != ds.n() || fallback.k() != k || fallback.d() != d) {
        throw std::invalid_argument("assignment is inconsistent with dataset and fallback centers");
    }

    std::vector<double> sums(k * d, 0.0);
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const auto x = ds.row(i);
        double* dst = sums.data() + a[i] * d;
        for (std::size_t j = 0; j < d; ++j) {
            dst[j] += x[j];
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t count = a.counts()[c];
        for (std::size_t j = 0; j < d; ++j) {
            auto& v = sums[c * d + j];
            v = count ? v / static_cast<double>(count) : fallback.center(c)[j];
        }
    }
    return CenterSet(std::move(sums), k, d);
}

} // namespace tabuclust

#endif
