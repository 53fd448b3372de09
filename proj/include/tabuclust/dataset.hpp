#ifndef TABUCLUST_DATASET_HPP
#define TABUCLUST_DATASET_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

/**
 * @file dataset.hpp
 * @brief Dense observation matrix, CSV input/output, normalization and
 * synthetic Gaussian-mixture fixtures.
 */

namespace tabuclust {

/**
 * Thrown when a CSV file cannot be turned into a `Dataset`.
 * `line()` is the 1-based line of the offending record, or 0 when the
 * problem is not tied to a line (missing file, empty file).
 */
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t line)
        : std::runtime_error(line == 0 ? message : "line " + std::to_string(line) + ": " + message),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/**
 * Immutable N x d matrix of finite reals, stored row-major.
 * Row `i` always denotes the same observation.
 */
class Dataset {
public:
    Dataset() = default;

    Dataset(std::vector<double> values, std::size_t n, std::size_t d, std::string name = {},
            std::vector<std::string> labels = {})
        : values_(std::move(values)), n_(n), d_(d), name_(std::move(name)), labels_(std::move(labels)) {
        if (n_ == 0 || d_ == 0) {
            throw std::invalid_argument("dataset must have at least one row and one column");
        }
        if (values_.size() != n_ * d_) {
            throw std::invalid_argument("dataset buffer size does not match n * d");
        }
        if (!labels_.empty() && labels_.size() != n_) {
            throw std::invalid_argument("dataset label count does not match row count");
        }
        for (double v : values_) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("dataset entries must be finite");
            }
        }
    }

    /// Builds a dataset from a list of rows; all rows must have the same width.
    static Dataset from_rows(const std::vector<std::vector<double>>& rows, std::string name = {}) {
        if (rows.empty()) {
            throw std::invalid_argument("dataset must have at least one row and one column");
        }
        const std::size_t d = rows.front().size();
        std::vector<double> values;
        values.reserve(rows.size() * d);
        for (const auto& r : rows) {
            if (r.size() != d) {
                throw std::invalid_argument("dataset rows must all have the same width");
            }
            values.insert(values.end(), r.begin(), r.end());
        }
        return Dataset(std::move(values), rows.size(), d, std::move(name));
    }

    std::size_t n() const noexcept { return n_; }
    std::size_t d() const noexcept { return d_; }
    const std::string& name() const noexcept { return name_; }

    std::span<const double> row(std::size_t i) const noexcept {
        return {values_.data() + i * d_, d_};
    }

    double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * d_ + j]; }

    std::span<const double> values() const noexcept { return values_; }

    /// Per-row labels taken from the label column, empty if none was loaded.
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::vector<double> values_;
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::string name_;
    std::vector<std::string> labels_;
};

struct CsvOptions {
    char delimiter = ',';
    bool has_header = false;
    std::optional<std::size_t> label_column;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

inline std::optional<double> parse_real(std::string_view s) {
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

/// Shortest representation that parses back to the same double.
inline std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace detail

/// Parses CSV text. `name` becomes the dataset name.
inline Dataset parse_csv(std::istream& in, const CsvOptions& options = {}, std::string name = {}) {
    std::vector<double> values;
    std::vector<std::string> labels;
    std::size_t width = 0;
    std::size_t rows = 0;
    std::size_t lineno = 0;
    bool header_pending = options.has_header;
    std::string line;

    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) {
            line.erase(0, 3);
        }
        if (detail::trim(line).empty()) {
            continue;
        }
        if (header_pending) {
            header_pending = false;
            continue;
        }

        const auto fields = detail::split(line, options.delimiter);
        if (options.label_column && *options.label_column >= fields.size()) {
            throw ParseError("label column " + std::to_string(*options.label_column) + " out of range", lineno);
        }
        const std::size_t numeric = fields.size() - (options.label_column ? 1 : 0);
        if (rows == 0) {
            width = numeric;
            if (width == 0) {
                throw ParseError("row has no numeric fields", lineno);
            }
        } else if (numeric != width) {
            throw ParseError("expected " + std::to_string(width) + " numeric fields, found " + std::to_string(numeric),
                             lineno);
        }

        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (options.label_column && c == *options.label_column) {
                labels.emplace_back(fields[c]);
                continue;
            }
            const auto v = detail::parse_real(fields[c]);
            if (!v) {
                throw ParseError("field " + std::to_string(c + 1) + " is not a finite number: '" +
                                     std::string(fields[c]) + "'",
                                 lineno);
            }
            values.push_back(*v);
        }
        ++rows;
    }

    if (rows == 0) {
        throw ParseError("no data rows", 0);
    }
    return Dataset(std::move(values), rows, width, std::move(name), std::move(labels));
}

inline Dataset load_csv(const std::string& path, const CsvOptions& options = {}) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path + "'", 0);
    }
    auto stem = path.substr(path.find_last_of("/\\") + 1);
    if (const auto dot = stem.rfind('.'); dot != std::string::npos && dot > 0) {
        stem.erase(dot);
    }
    return parse_csv(in, options, std::move(stem));
}

/// Writes values (and the label column last, if present) in shortest round-trip form.
inline void write_csv(std::ostream& out, const Dataset& ds, char delimiter = ',') {
    const bool labelled = !ds.labels().empty();
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const auto r = ds.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (j) {
                out << delimiter;
            }
            out << detail::format_real(r[j]);
        }
        if (labelled) {
            out << delimiter << ds.labels()[i];
        }
        out << '\n';
    }
}

enum class Normalization { none, zscore, minmax };

inline std::string_view to_string(Normalization mode) {
    switch (mode) {
    case Normalization::zscore:
        return "zscore";
    case Normalization::minmax:
        return "minmax";
    default:
        return "none";
    }
}

inline Normalization parse_normalization(std::string_view s) {
    if (s == "none") return Normalization::none;
    if (s == "zscore" || s == "z-score") return Normalization::zscore;
    if (s == "minmax" || s == "min-max") return Normalization::minmax;
    throw std::invalid_argument("unknown normalization mode '" + std::string(s) + "'");
}

/**
 * Parameters of an affine per-feature map `(x - offset) / scale`.
 * For z-score the offset is the mean and the scale the population standard
 * deviation; for min-max they are the minimum and the range. Constant
 * features get scale 0 and map to 0.
 */
struct NormalizationSpec {
    Normalization mode = Normalization::none;
    std::vector<double> offset;
    std::vector<double> scale;
};

inline std::pair<Dataset, NormalizationSpec> normalize(const Dataset& ds, Normalization mode) {
    NormalizationSpec spec{mode, {}, {}};
    if (mode == Normalization::none) {
        return {ds, spec};
    }

    const std::size_t n = ds.n();
    const std::size_t d = ds.d();
    spec.offset.assign(d, 0.0);
    spec.scale.assign(d, 0.0);

    for (std::size_t j = 0; j < d; ++j) {
        if (mode == Normalization::zscore) {
            double mean = 0;
            for (std::size_t i = 0; i < n; ++i) {
                mean += ds(i, j);
            }
            mean /= static_cast<double>(n);
            double var = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double t = ds(i, j) - mean;
                var += t * t;
            }
            var /= static_cast<double>(n);
            spec.offset[j] = mean;
            spec.scale[j] = std::sqrt(var);
        } else {
            double lo = ds(0, j);
            double hi = ds(0, j);
            for (std::size_t i = 1; i < n; ++i) {
                lo = std::min(lo, ds(i, j));
                hi = std::max(hi, ds(i, j));
            }
            spec.offset[j] = lo;
            spec.scale[j] = hi - lo;
        }
    }

    std::vector<double> out(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double s = spec.scale[j];
            out[i * d + j] = s > 0 ? (ds(i, j) - spec.offset[j]) / s : 0.0;
        }
    }
    return {Dataset(std::move(out), n, d, ds.name(), ds.labels()), std::move(spec)};
}

/// Mean of mixture component `c`: `separation * c` on the first axis, 0 elsewhere.
inline std::vector<double> synth_component_mean(std::size_t c, std::size_t d, double separation) {
    std::vector<double> mean(d, 0.0);
    mean[0] = separation * static_cast<double>(c);
    return mean;
}

/**
 * Draws `per_cluster` points from each of `k` unit-variance spherical
 * Gaussians whose means are pairwise at least `separation` apart. Rows are
 * grouped by component; the second member is the 0-based ground-truth
 * component of every row.
 */
inline std::pair<Dataset, std::vector<std::size_t>> synth_gaussian_mixture(std::size_t k, std::size_t per_cluster,
                                                                            std::size_t d, double separation,
                                                                            std::uint64_t seed) {
    if (k == 0 || per_cluster == 0 || d == 0) {
        throw std::invalid_argument("k, per-cluster count and dimension must be positive");
    }
    if (!(separation > 0)) {
        throw std::invalid_argument("separation must be positive");
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    std::vector<double> values;
    values.reserve(k * per_cluster * d);
    std::vector<std::size_t> truth;
    truth.reserve(k * per_cluster);

    for (std::size_t c = 0; c < k; ++c) {
        const auto mean = synth_component_mean(c, d, separation);
        for (std::size_t p = 0; p < per_cluster; ++p) {
            for (std::size_t j = 0; j < d; ++j) {
                values.push_back(mean[j] + noise(rng));
            }
            truth.push_back(c);
        }
    }
    return {Dataset(std::move(values), k * per_cluster, d, "synthetic"), std::move(truth)};
}

} // namespace tabuclust

#endif
