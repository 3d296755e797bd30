// Copyright 2026 The tvrag Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Determinantal kernels over segments.
//
//   L_ij = P_i P_j (1 - omega cos(e_i, e_j))
//
// is indefinite in general, so it is repaired by clipping negative
// eigenvalues to zero and adding ridge * I. For K segments with D-dimensional
// embeddings, L = Y J Y^T with Y = diag(P) [1 | unit rows] and
// J = diag(1, -omega I), so its non-zero spectrum comes from a
// (D+1) x (D+1) problem. LowRankKernel uses that; repair_psd is the dense
// reference.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "tvrag/linalg.hpp"

namespace tvrag {

/// Eigenvalue changes above this mark a kernel as repaired.
inline constexpr double kRepairTolerance = 1e-9;

/// Pivots below this fall back to a full factorization.
inline constexpr double kPivotFloor = 1e-12;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Unrepaired kernel.
Matrix raw_dpp_kernel(const Vector& probabilities, const Matrix& embeddings, double omega);

struct RepairedKernel {
    Matrix kernel;
    bool repaired = false;           // some eigenvalue moved by more than kRepairTolerance
    double min_eigenvalue = 0.0;     // of the input, before clipping
};

/// Symmetric eigendecomposition, clip at 0, add ridge * I.
RepairedKernel repair_psd(const Matrix& kernel, double ridge);

/// raw_dpp_kernel followed by repair_psd.
RepairedKernel dpp_kernel(const Vector& probabilities, const Matrix& embeddings, double omega, double ridge);

/// Repaired kernel held as Z Z^T + ridge * I, where the columns of Z are the
/// positive eigenvectors scaled by sqrt(eigenvalue).
class LowRankKernel {
public:
    LowRankKernel() = default;

    /// `unit_rows` must have unit-length or zero rows. A caller building many
    /// kernels over the same rows can pass `workspace` to reuse one K x (D+1)
    /// buffer.
    static LowRankKernel build(const Vector& probabilities, const Matrix& unit_rows, double omega, double ridge,
                               Matrix* workspace = nullptr);

    std::size_t size() const { return static_cast<std::size_t>(factor_.rows()); }
    std::size_t rank() const { return static_cast<std::size_t>(factor_.cols()); }
    double ridge() const { return ridge_; }
    bool repaired() const { return repaired_; }
    double min_eigenvalue() const { return min_eigenvalue_; }
    const Matrix& factor() const { return factor_; }

    double operator()(std::size_t i, std::size_t j) const {
        const double v = factor_.row(static_cast<Eigen::Index>(i)).dot(factor_.row(static_cast<Eigen::Index>(j)));
        return i == j ? v + ridge_ : v;
    }

    Matrix dense() const;

private:
    Matrix factor_;
    double ridge_ = 0.0;
    bool repaired_ = false;
    double min_eigenvalue_ = 0.0;
};

/// Accessor over an explicit matrix, for the generic routines below.
struct DenseKernel {
    const Matrix& m;
    std::size_t size() const { return static_cast<std::size_t>(m.rows()); }
    double operator()(std::size_t i, std::size_t j) const {
        return m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
};

/// log det of a symmetric matrix via LLT; -inf when it is not positive definite.
double logdet_spd(const Matrix& m);

/// Lower Cholesky factor of L_S grown one index at a time.
class IncrementalCholesky {
public:
    std::size_t size() const { return order_.size(); }
    const std::vector<std::size_t>& order() const { return order_; }
    double logdet() const { return logdet_; }

    /// Solves F c = cross in place and returns the squared pivot diag - |c|^2.
    double pivot(Vector& cross, double diag) const;

    /// Appends an index given its solved cross vector and pivot.
    void push(std::size_t index, const Vector& solved, double pivot);

    /// Rebuilds from scratch with a full factorization of `sub`.
    bool reset(const std::vector<std::size_t>& order, const Matrix& sub);

private:
    std::vector<std::size_t> order_;
    Matrix factor_; // lower triangle used
    double logdet_ = 0.0;
};

template <typename Kernel>
Matrix kernel_submatrix(const Kernel& kernel, const std::vector<std::size_t>& idx) {
    const auto n = static_cast<Eigen::Index>(idx.size());
    Matrix sub(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) sub(a, b) = kernel(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    return sub;
}

/// log det(L_{S+k}) - log det(L_S). Uses the incremental factor and falls back
/// to a full factorization when the pivot is below kPivotFloor; -inf when the
/// enlarged submatrix is numerically singular.
template <typename Kernel>
double delta_logdet(const IncrementalCholesky& chol, const Kernel& kernel, std::size_t k, Vector* solved = nullptr,
                    double* pivot_out = nullptr) {
    const auto& order = chol.order();
    if (chol.logdet() == kNegInf) return kNegInf;
    Vector cross(static_cast<Eigen::Index>(order.size()));
    for (std::size_t a = 0; a < order.size(); ++a) cross(static_cast<Eigen::Index>(a)) = kernel(order[a], k);
    const double p = chol.pivot(cross, kernel(k, k));
    if (solved) *solved = cross;
    if (pivot_out) *pivot_out = p;
    if (p >= kPivotFloor) return std::log(p);
    std::vector<std::size_t> grown = order;
    grown.push_back(k);
    const double full = logdet_spd(kernel_submatrix(kernel, grown));
    if (full == kNegInf) return kNegInf;
    const double gain = full - chol.logdet();
    return std::log(kPivotFloor) <= gain ? gain : kNegInf;
}

struct GreedyMapResult {
    std::vector<std::size_t> selected;
    std::vector<double> gains;
    double logdet = 0.0;
};

/// Greedy log-det maximization over a fixed kernel. Candidates with a finite
/// gain beat -inf ones; ties go to the smaller index.
template <typename Kernel>
GreedyMapResult greedy_map(const Kernel& kernel, std::size_t m) {
    const std::size_t n = kernel.size();
    GreedyMapResult out;
    IncrementalCholesky chol;
    std::vector<bool> taken(n, false);
    Vector solved, best_solved;
    for (std::size_t step = 0; step < std::min(m, n); ++step) {
        std::size_t best = n;
        double best_gain = kNegInf, best_pivot = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (taken[k]) continue;
            double p = 0.0;
            const double g = delta_logdet(chol, kernel, k, &solved, &p);
            if (best == n || g > best_gain) {
                best = k;
                best_gain = g;
                best_pivot = p;
                best_solved = solved;
            }
        }
        taken[best] = true;
        out.selected.push_back(best);
        out.gains.push_back(best_gain);
        if (best_gain != kNegInf && best_pivot >= kPivotFloor) {
            chol.push(best, best_solved, best_pivot);
        } else {
            chol.reset(out.selected, kernel_submatrix(kernel, out.selected));
        }
    }
    out.logdet = out.selected.empty() ? 0.0 : chol.logdet();
    return out;
}

} // namespace tvrag
