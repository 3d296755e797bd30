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

#include "tvrag/dpp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tvrag/error.hpp"

namespace tvrag {

namespace {

// Pivots of the Gram below this fraction of the largest are treated as zero
// directions of Y; they carry no kernel mass.
constexpr double kGramRankTolerance = 1e-13;
constexpr double kPositiveTolerance = 1e-12;

void require_distribution_shape(const Vector& p, Eigen::Index rows) {
    if (p.size() != rows)
        throw Error(Errc::dimension_mismatch, "expected " + std::to_string(rows) + " probabilities, got " +
                                                  std::to_string(p.size()));
}

} // namespace

Matrix raw_dpp_kernel(const Vector& probabilities, const Matrix& embeddings, double omega) {
    require_distribution_shape(probabilities, embeddings.rows());
    const Matrix unit = normalized_rows(embeddings);
    const Matrix cos = unit * unit.transpose();
    Matrix l = (1.0 - omega * cos.array()).matrix();
    l = probabilities.asDiagonal() * l * probabilities.asDiagonal();
    return 0.5 * (l + l.transpose());
}

RepairedKernel repair_psd(const Matrix& kernel, double ridge) {
    if (kernel.rows() != kernel.cols()) throw Error(Errc::dimension_mismatch, "kernel must be square");
    RepairedKernel out;
    if (kernel.rows() == 0) return out;
    const Eigen::MatrixXd sym = 0.5 * (kernel + kernel.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success) throw Error(Errc::numerical_failure, "eigendecomposition failed");
    const Eigen::VectorXd lambda = es.eigenvalues();
    out.min_eigenvalue = lambda.minCoeff();
    out.repaired = out.min_eigenvalue < -kRepairTolerance;
    const Eigen::VectorXd clipped = lambda.cwiseMax(0.0);
    Eigen::MatrixXd rebuilt = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
    rebuilt = 0.5 * (rebuilt + rebuilt.transpose());
    rebuilt.diagonal().array() += ridge;
    out.kernel = rebuilt;
    return out;
}

RepairedKernel dpp_kernel(const Vector& probabilities, const Matrix& embeddings, double omega, double ridge) {
    return repair_psd(raw_dpp_kernel(probabilities, embeddings, omega), ridge);
}

LowRankKernel LowRankKernel::build(const Vector& probabilities, const Matrix& unit_rows, double omega, double ridge,
                                   Matrix* workspace) {
    require_distribution_shape(probabilities, unit_rows.rows());
    const Eigen::Index k_count = unit_rows.rows();
    const Eigen::Index r = unit_rows.cols() + 1;

    LowRankKernel out;
    out.ridge_ = ridge;
    out.factor_.resize(k_count, 0);
    if (k_count == 0) return out;

    Matrix local;
    Matrix& y = workspace ? *workspace : local;
    y.resize(k_count, r);
    y.col(0) = probabilities;
    y.rightCols(r - 1) = probabilities.asDiagonal() * unit_rows;

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(r, r);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(y.transpose());
    gram = gram.selfadjointView<Eigen::Lower>();

    // Pivoted LDL^T of the Gram gives Y^T Y = R R^T. The non-zero spectrum of
    // L = Y J Y^T equals that of R^T J R, and an eigenpair (lambda, w) of the
    // latter maps to the unit eigenvector Y J R w / lambda of L.
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    const Eigen::VectorXd d = ldlt.vectorD();
    const double top = d.maxCoeff();
    std::vector<Eigen::Index> pivots;
    for (Eigen::Index i = 0; i < r; ++i)
        if (d(i) > kGramRankTolerance * top) pivots.push_back(i);
    const auto kept = static_cast<Eigen::Index>(pivots.size());
    if (kept == 0) return out;
    // Only the kept pivots, so that T carries no spurious zero eigenvalues.
    const Eigen::MatrixXd lower = ldlt.matrixL();
    Eigen::MatrixXd rf(r, kept);
    for (Eigen::Index c = 0; c < kept; ++c)
        rf.col(c) = lower.col(pivots[static_cast<std::size_t>(c)]) * std::sqrt(d(pivots[static_cast<std::size_t>(c)]));
    rf = ldlt.transpositionsP().transpose() * rf;
    // Eigen flags a rank-deficient Gram (K < r, repeated rows) as a numerical
    // issue even though the factorization is usable; check it directly then.
    if (ldlt.info() != Eigen::Success &&
        !((rf * rf.transpose() - gram).norm() <= 1e-10 * std::max(gram.norm(), 1e-300)))
        throw Error(Errc::numerical_failure, "gram factorization failed");

    Eigen::MatrixXd jr = rf;
    jr.bottomRows(r - 1) *= -omega;
    Eigen::MatrixXd t = rf.transpose() * jr;
    t = 0.5 * (t + t.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> t_es(t);
    if (t_es.info() != Eigen::Success) throw Error(Errc::numerical_failure, "kernel eigendecomposition failed");

    const Eigen::VectorXd& lambda = t_es.eigenvalues();
    out.min_eigenvalue_ = lambda.minCoeff();
    if (k_count > kept) out.min_eigenvalue_ = std::min(out.min_eigenvalue_, 0.0);
    out.repaired_ = out.min_eigenvalue_ < -kRepairTolerance;

    // Rounding leaves eigenvalues of order eps * |lambda|_max on the dropped
    // directions; dividing by them would amplify noise.
    const double scale = lambda.cwiseAbs().maxCoeff();
    std::vector<Eigen::Index> positive;
    for (Eigen::Index i = 0; i < kept; ++i)
        if (lambda(i) > kPositiveTolerance * scale) positive.push_back(i);
    Eigen::MatrixXd g(r, static_cast<Eigen::Index>(positive.size()));
    for (std::size_t c = 0; c < positive.size(); ++c) {
        const Eigen::Index p = positive[c];
        g.col(static_cast<Eigen::Index>(c)) = jr * t_es.eigenvectors().col(p) / std::sqrt(lambda(p));
    }
    out.factor_ = y * g;
    return out;
}

Matrix LowRankKernel::dense() const {
    Matrix m = factor_ * factor_.transpose();
    m.diagonal().array() += ridge_;
    return m;
}

double logdet_spd(const Matrix& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (m + m.transpose()));
    if (llt.info() != Eigen::Success) return kNegInf;
    const auto diag = llt.matrixLLT().diagonal();
    double s = 0.0;
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
        if (!(diag(i) > 0.0)) return kNegInf;
        s += 2.0 * std::log(diag(i));
    }
    return s;
}

double IncrementalCholesky::pivot(Vector& cross, double diag) const {
    const auto n = static_cast<Eigen::Index>(order_.size());
    if (n > 0) factor_.topLeftCorner(n, n).triangularView<Eigen::Lower>().solveInPlace(cross);
    return diag - cross.squaredNorm();
}

void IncrementalCholesky::push(std::size_t index, const Vector& solved, double pivot) {
    const auto n = static_cast<Eigen::Index>(order_.size());
    Matrix grown = Matrix::Zero(n + 1, n + 1);
    grown.topLeftCorner(n, n) = factor_;
    grown.row(n).head(n) = solved.transpose();
    grown(n, n) = std::sqrt(pivot);
    factor_ = std::move(grown);
    order_.push_back(index);
    logdet_ += std::log(pivot);
}

bool IncrementalCholesky::reset(const std::vector<std::size_t>& order, const Matrix& sub) {
    order_ = order;
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (sub + sub.transpose()));
    factor_ = llt.matrixL();
    logdet_ = logdet_spd(sub);
    return logdet_ != kNegInf;
}

} // namespace tvrag
