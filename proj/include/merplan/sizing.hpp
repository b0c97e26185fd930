#pragma once

#include <string>
#include <vector>

#include "merplan/enumeration.hpp"
#include "merplan/errors.hpp"

namespace merplan {

/// First derivative of the minimum-ELC matrix along the count axis and
/// second derivative along the size axis, each with its averaged vector.
/// Derivatives are taken in index space: one count step and one size step
/// both have unit spacing.
struct DerivativeTables {
    std::vector<std::vector<double>> d1_number;   // [size][count]
    std::vector<double> d1_avg_over_sizes;        // length |counts|
    std::vector<std::vector<double>> d2_size;     // [size][count]
    std::vector<double> d2_avg_over_counts;       // length |sizes|
};

struct SizingResult {
    int optimal_count = 0;
    double optimal_total_kw = 0.0;
    std::vector<std::string> flags;
};

/// Finite-difference gradient at unit spacing: central differences in the
/// interior, one-sided at the ends. Exact on affine sequences.
inline std::vector<double> gradient_1d(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) throw VectorTooShort("gradient needs at least 2 values, got " + std::to_string(n));
    std::vector<double> g(n);
    g[0] = values[1] - values[0];
    for (std::size_t i = 1; i + 1 < n; ++i) g[i] = (values[i + 1] - values[i - 1]) / 2.0;
    g[n - 1] = values[n - 1] - values[n - 2];
    return g;
}

/// d(min ELC)/d(count) per row, plus the column-wise mean over total sizes.
inline std::pair<std::vector<std::vector<double>>, std::vector<double>>
first_derivative_wrt_count(const ElcMatrix& matrix) {
    if (matrix.counts.size() < 2) {
        throw VectorTooShort("need at least 2 counts to differentiate");
    }
    std::vector<std::vector<double>> d1;
    d1.reserve(matrix.values.size());
    for (const std::vector<double>& row : matrix.values) d1.push_back(gradient_1d(row));
    std::vector<double> avg(matrix.counts.size(), 0.0);
    for (const std::vector<double>& row : d1) {
        for (std::size_t c = 0; c < avg.size(); ++c) avg[c] += row[c];
    }
    for (double& v : avg) v /= static_cast<double>(d1.size());
    return {std::move(d1), std::move(avg)};
}

/// d²(min ELC)/d(size)² per column, plus the row-wise mean over counts.
inline std::pair<std::vector<std::vector<double>>, std::vector<double>>
second_derivative_wrt_size(const ElcMatrix& matrix) {
    if (matrix.sizes_kw.size() < 3) {
        throw VectorTooShort("need at least 3 sizes to differentiate twice");
    }
    const std::size_t rows = matrix.sizes_kw.size();
    const std::size_t cols = matrix.counts.size();
    std::vector<std::vector<double>> d2(rows, std::vector<double>(cols, 0.0));
    for (std::size_t c = 0; c < cols; ++c) {
        std::vector<double> column(rows);
        for (std::size_t r = 0; r < rows; ++r) column[r] = matrix.values[r][c];
        std::vector<double> dd = gradient_1d(gradient_1d(column));
        for (std::size_t r = 0; r < rows; ++r) d2[r][c] = dd[r];
    }
    std::vector<double> avg(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) avg[r] += d2[r][c];
        avg[r] /= static_cast<double>(cols);
    }
    return {std::move(d2), std::move(avg)};
}

inline DerivativeTables differentiate(const ElcMatrix& matrix) {
    DerivativeTables t;
    auto [d1, d1_avg] = first_derivative_wrt_count(matrix);
    t.d1_number = std::move(d1);
    t.d1_avg_over_sizes = std::move(d1_avg);
    auto [d2, d2_avg] = second_derivative_wrt_size(matrix);
    t.d2_size = std::move(d2);
    t.d2_avg_over_counts = std::move(d2_avg);
    return t;
}

/// Selection rules. The optimal count is the count of the last negative
/// entry before the averaged first derivative turns nonnegative; if it never
/// turns, the largest count is reported with a "no-sign-change" flag, and if
/// it is nonnegative from the start, the smallest count with a
/// "no-negative-prefix" flag. The optimal total size maximizes the averaged
/// second derivative (ties to the smaller size).
inline SizingResult select_optimal(const std::vector<double>& d1_avg,
                                   const std::vector<double>& d2_avg,
                                   const std::vector<int>& counts,
                                   const std::vector<double>& sizes_kw) {
    if (d1_avg.empty() || d2_avg.empty()) throw VectorTooShort("empty derivative vector");
    if (d1_avg.size() != counts.size() || d2_avg.size() != sizes_kw.size()) {
        throw ConfigError("derivative vectors do not match their labels");
    }

    SizingResult result;
    std::size_t first_nonneg = d1_avg.size();
    for (std::size_t i = 0; i < d1_avg.size(); ++i) {
        if (d1_avg[i] >= 0.0) {
            first_nonneg = i;
            break;
        }
    }
    if (first_nonneg == d1_avg.size()) {
        result.optimal_count = counts.back();
        result.flags.push_back("no-sign-change");
    } else if (first_nonneg == 0) {
        result.optimal_count = counts.front();
        result.flags.push_back("no-negative-prefix");
    } else {
        result.optimal_count = counts[first_nonneg - 1];
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < d2_avg.size(); ++i) {
        if (d2_avg[i] > d2_avg[best]) best = i;
    }
    result.optimal_total_kw = sizes_kw[best];
    return result;
}

inline SizingResult select_optimal(const DerivativeTables& tables, const ElcMatrix& matrix) {
    return select_optimal(tables.d1_avg_over_sizes, tables.d2_avg_over_counts, matrix.counts,
                          matrix.sizes_kw);
}

}  // namespace merplan
