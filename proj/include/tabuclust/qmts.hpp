#ifndef TABUCLUST_QMTS_HPP
#define TABUCLUST_QMTS_HPP

#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dataset.hpp"
#include "lloyd.hpp"
#include "objective.hpp"

/**
 * @file qmts.hpp
 * @brief Quantized-means tabu search for the K-Means objective.
 *
 * During exploration every center is a dataset row. Each iteration replaces
 * center k by the non-tabu member x of its cluster with the smallest change
 * in J when center k alone moves to x and memberships stay fixed:
 *
 *     dJ(x) = sum_{n in C_k} ( -2 (x_n - mu_k)^T (x - mu_k) + |x - mu_k|^2 )
 *
 * The move is taken even when dJ > 0, which is what lets the search leave
 * local minima. Previously used centers are kept in a per-cluster tabu row.
 * The best solution seen is refined with free centers at the end.
 */

namespace tabuclust {

enum class Refinement { centroid_step, full_kmeans };

inline std::string_view to_string(Refinement r) {
    return r == Refinement::centroid_step ? "centroid" : "kmeans";
}

inline Refinement parse_refinement(std::string_view s) {
    if (s == "centroid" || s == "centroid-step") return Refinement::centroid_step;
    if (s == "kmeans" || s == "full-kmeans") return Refinement::full_kmeans;
    throw std::invalid_argument("unknown refinement mode '" + std::string(s) + "'");
}

struct QmtsConfig {
    /// Maximum number of tabu-search iterations.
    std::size_t it_max = 400;
    /// Cut-out: stop after this many consecutive iterations without a new best.
    std::size_t r_max = 100;
    std::uint64_t seed = 0;
    Refinement refinement = Refinement::full_kmeans;
    /// Iteration cap for the Lloyd refinement.
    std::size_t refine_max_iterations = 300;
    /// Maximum length of a tabu row; 0 keeps every entry.
    std::size_t tabu_capacity = 0;

    void validate() const {
        if (r_max < 1 || r_max > it_max) {
            throw std::invalid_argument("r_max must lie in [1, it_max]");
        }
    }
};

/**
 * K rows of dataset-row indices. Row k lists the rows that have served as
 * center k, oldest first, without duplicates. Membership is exact by index.
 */
class TabuList {
public:
    TabuList() = default;
    TabuList(std::size_t k, std::size_t n, std::size_t capacity = 0)
        : rows_(k), marks_(k, std::vector<char>(n, 0)), capacity_(capacity) {}

    std::size_t k() const noexcept { return rows_.size(); }

    bool contains(std::size_t k, std::size_t row) const noexcept { return marks_[k][row] != 0; }

    /// Appends `row` to row k unless already present. Returns whether it was added.
    bool push(std::size_t k, std::size_t row) {
        if (marks_[k][row]) {
            return false;
        }
        rows_[k].push_back(row);
        marks_[k][row] = 1;
        if (capacity_ && rows_[k].size() > capacity_) {
            marks_[k][rows_[k].front()] = 0;
            rows_[k].pop_front();
        }
        return true;
    }

    /// Removes and returns the most recent entry of row k.
    std::optional<std::size_t> evict_last(std::size_t k) {
        if (rows_[k].empty()) {
            return std::nullopt;
        }
        const std::size_t row = rows_[k].back();
        rows_[k].pop_back();
        marks_[k][row] = 0;
        return row;
    }

    const std::deque<std::size_t>& row(std::size_t k) const noexcept { return rows_[k]; }

private:
    std::vector<std::deque<std::size_t>> rows_;
    std::vector<std::vector<char>> marks_;
    std::size_t capacity_ = 0;
};

/// Counters collected while searching. Used by tests and reports.
struct QmtsTrace {
    std::size_t iterations = 0;
    /// Tabu entries deleted because every member of a cluster was tabu.
    std::size_t evictions = 0;
    /// Empty clusters reseeded with a far-away point.
    std::size_t repairs = 0;
    /// Selected centers that were tabu at selection time. Always 0 unless broken.
    std::size_t tabu_violations = 0;
    /// Iterations whose neighbor had a larger J than the current solution.
    std::size_t worsening_moves = 0;
    bool cut_out = false;
    double j_initial = 0;
    /// Best exploration-stage J, before refinement.
    double j_best = 0;
    std::vector<double> j_neighbor;
    std::vector<double> j_best_history;
    CenterSet best;
};

/// Exploration state carried between iterations.
struct SearchState {
    CenterSet current;
    CenterSet best;
    double j_current = 0;
    double j_best = 0;
    /// Iterations since `j_best` last decreased.
    std::size_t stall = 0;
    std::size_t iteration = 0;
    /// Memberships induced by `current`.
    Assignment assignment;
};

/**
 * Change in the within-cluster sum of squares of `members` when their
 * center moves from `mu` to `candidate`, memberships held fixed.
 * Evaluated term by term; 0 for an empty member set.
 */
inline double delta_j(const Dataset& ds, std::span<const std::size_t> members, std::span<const double> mu,
                      std::span<const double> candidate) {
    if (mu.size() != ds.d() || candidate.size() != ds.d()) {
        throw std::invalid_argument("delta_j: dimension mismatch");
    }
    const std::size_t d = ds.d();
    double step_sq = 0;
    for (std::size_t j = 0; j < d; ++j) {
        const double s = candidate[j] - mu[j];
        step_sq += s * s;
    }
    double total = 0;
    for (std::size_t n : members) {
        const auto x = ds.row(n);
        double dot = 0;
        for (std::size_t j = 0; j < d; ++j) {
            dot += (x[j] - mu[j]) * (candidate[j] - mu[j]);
        }
        total += -2.0 * dot + step_sq;
    }
    return total;
}

/**
 * Precomputed form of `delta_j` for one cluster: with g = sum_n (x_n - mu),
 * dJ(x) = N_k |x - mu|^2 - 2 g^T (x - mu), O(d) per candidate.
 */
class ClusterDelta {
public:
    ClusterDelta(const Dataset& ds, std::span<const std::size_t> members, std::span<const double> mu)
        : mu_(mu.begin(), mu.end()), offset_sum_(mu.size(), 0.0), count_(static_cast<double>(members.size())) {
        for (std::size_t n : members) {
            const auto x = ds.row(n);
            for (std::size_t j = 0; j < mu_.size(); ++j) {
                offset_sum_[j] += x[j] - mu_[j];
            }
        }
    }

    double operator()(std::span<const double> candidate) const noexcept {
        double step_sq = 0;
        double dot = 0;
        for (std::size_t j = 0; j < mu_.size(); ++j) {
            const double s = candidate[j] - mu_[j];
            step_sq += s * s;
            dot += offset_sum_[j] * s;
        }
        return count_ * step_sq - 2.0 * dot;
    }

private:
    std::vector<double> mu_;
    std::vector<double> offset_sum_;
    double count_;
};

struct NeighborSelection {
    std::size_t row = 0;
    double delta = 0;
    /// Entries evicted from the tabu row to make a member available.
    std::size_t evictions = 0;
};

/**
 * Picks the member of cluster k outside tabu row k with the smallest dJ,
 * ties to the lowest row index. If every member is tabu, the most recent
 * entry of the row is deleted and the selection retried.
 * Returns nothing for an empty cluster.
 */
inline std::optional<NeighborSelection> select_neighbor_component(const Dataset& ds, std::size_t k,
                                                                  std::span<const std::size_t> members,
                                                                  std::span<const double> mu, TabuList& tabu) {
    if (members.empty()) {
        return std::nullopt;
    }
    const ClusterDelta delta(ds, members, mu);
    NeighborSelection sel;
    while (true) {
        bool found = false;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t n : members) {
            if (tabu.contains(k, n)) {
                continue;
            }
            const double v = delta(ds.row(n));
            if (!found || v < best || (v == best && n < sel.row)) {
                found = true;
                best = v;
                sel.row = n;
            }
        }
        if (found) {
            sel.delta = best;
            return sel;
        }
        if (!tabu.evict_last(k)) {
            // Unreachable: with an empty row every member is available.
            throw std::logic_error("tabu row empty but no member selectable");
        }
        ++sel.evictions;
    }
}

/**
 * Forms the neighbor of `state.current`: every center is replaced by the
 * selection from its own cluster, independently of the others. An empty
 * cluster is reseeded with the non-tabu row farthest from its assigned
 * center that no other cluster has taken.
 */
inline CenterSet build_neighbor(const Dataset& ds, const SearchState& state, TabuList& tabu,
                                QmtsTrace* trace = nullptr) {
    const std::size_t k = state.current.k();
    const auto members = state.assignment.members();
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> rows(k, none);
    std::vector<char> used(ds.n(), 0);

    for (std::size_t c = 0; c < k; ++c) {
        const auto sel = select_neighbor_component(ds, c, members[c], state.current.center(c), tabu);
        if (!sel) {
            continue;
        }
        if (trace) {
            trace->evictions += sel->evictions;
            if (tabu.contains(c, sel->row)) {
                ++trace->tabu_violations;
            }
        }
        if (used[sel->row]) {
            throw std::logic_error("two clusters selected the same row");
        }
        rows[c] = sel->row;
        used[sel->row] = 1;
    }

    for (std::size_t c = 0; c < k; ++c) {
        if (rows[c] != none) {
            continue;
        }
        while (true) {
            std::size_t pick = none;
            double far = -1;
            for (std::size_t i = 0; i < ds.n(); ++i) {
                if (used[i] || tabu.contains(c, i)) {
                    continue;
                }
                const double dist = squared_distance(ds.row(i), state.current.center(state.assignment[i]));
                if (dist > far) {
                    far = dist;
                    pick = i;
                }
            }
            if (pick != none) {
                rows[c] = pick;
                used[pick] = 1;
                break;
            }
            if (!tabu.evict_last(c)) {
                throw std::logic_error("no row available to reseed an empty cluster");
            }
            if (trace) {
                ++trace->evictions;
            }
        }
        if (trace) {
            ++trace->repairs;
        }
    }
    return CenterSet::quantized(ds, std::move(rows));
}

/**
 * Replaces the quantized centers by free ones: either one centroid step
 * over the clusters they induce, or a full Lloyd run started from them.
 * The result never has a larger J than `best` under its own assignment.
 */
inline ClusteringResult refine(const Dataset& ds, const CenterSet& best, Refinement mode,
                               std::size_t max_iterations = 300) {
    const auto quantized_assignment = assign(ds, best);
    const double j_quantized = icss(ds, best, quantized_assignment);

    ClusteringResult res;
    if (mode == Refinement::full_kmeans) {
        LloydConfig cfg;
        cfg.max_iterations = max_iterations;
        res = lloyd_run(ds, best, cfg);
    } else {
        res.assignment = quantized_assignment;
        res.centers = centroids(ds, res.assignment, best);
        res.j = icss(ds, res.centers, res.assignment);
        res.iterations = 1;
        res.history = {res.j};
        res.converged = assign(ds, res.centers).labels() == res.assignment.labels();
    }

    // Only reachable through rounding when `best` already sits on centroids.
    if (res.j > j_quantized) {
        res.centers = best;
        res.centers.unquantize();
        res.assignment = quantized_assignment;
        res.j = j_quantized;
    }
    return res;
}

/**
 * Full search: random distinct rows as the start, neighbor moves with tabu
 * memory until `it_max` iterations or `r_max` iterations without a new
 * best, then refinement of the best quantized solution. The returned
 * `iterations` counts tabu-search iterations and `history` holds the J of
 * each neighbor.
 */
inline ClusteringResult qmts_run(const Dataset& ds, std::size_t k, const QmtsConfig& cfg = {},
                                 QmtsTrace* trace = nullptr) {
    cfg.validate();
    QmtsTrace local;
    QmtsTrace& tr = trace ? *trace : local;
    tr = QmtsTrace{};

    SearchState state;
    state.current = init_random(ds, k, cfg.seed);
    state.assignment = assign(ds, state.current);
    state.j_current = icss(ds, state.current, state.assignment);
    state.best = state.current;
    state.j_best = state.j_current;
    tr.j_initial = state.j_current;

    TabuList tabu(k, ds.n(), cfg.tabu_capacity);

    while (true) {
        ++state.iteration;
        auto neighbor = build_neighbor(ds, state, tabu, &tr);
        auto neighbor_assignment = assign(ds, neighbor);
        const double j_neighbor = icss(ds, neighbor, neighbor_assignment);
        tr.j_neighbor.push_back(j_neighbor);
        if (j_neighbor > state.j_current) {
            ++tr.worsening_moves;
        }

        if (j_neighbor < state.j_best) {
            state.j_best = j_neighbor;
            state.best = neighbor;
            state.stall = 0;
        } else {
            ++state.stall;
        }
        tr.j_best_history.push_back(state.j_best);

        for (std::size_t c = 0; c < k; ++c) {
            tabu.push(c, state.current.rows()[c]);
        }
        state.current = std::move(neighbor);
        state.assignment = std::move(neighbor_assignment);
        state.j_current = j_neighbor;

        if (state.stall >= cfg.r_max) {
            tr.cut_out = true;
            break;
        }
        if (state.iteration >= cfg.it_max) {
            break;
        }
    }

    tr.iterations = state.iteration;
    tr.j_best = state.j_best;
    tr.best = state.best;

    auto res = refine(ds, state.best, cfg.refinement, cfg.refine_max_iterations);
    res.iterations = state.iteration;
    res.history = tr.j_neighbor;
    return res;
}

} // namespace tabuclust

#endif
