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

#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>

#include "tvrag/dedup.hpp"
#include "tvrag/error.hpp"
#include "tvrag/text.hpp"

namespace tvrag::oracle {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(Errc::size_exceeded, what);
}

bool is_subsequence(const std::vector<std::string>& needle, std::span<const std::string> hay) {
    std::size_t j = 0;
    for (const auto& t : hay)
        if (j < needle.size() && t == needle[j]) ++j;
    return j == needle.size();
}

// Calls f(subset) for every size-m subset of [0, n) in lexicographic order.
template <typename F>
void for_each_subset(std::size_t n, std::size_t m, F&& f) {
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    if (m > n) return;
    while (true) {
        f(idx);
        std::size_t i = m;
        while (i > 0 && idx[i - 1] == n - m + (i - 1)) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < m; ++j) idx[j] = idx[j - 1] + 1;
    }
}

std::map<std::string, std::size_t> counts(const std::vector<std::string>& tokens) {
    std::map<std::string, std::size_t> c;
    for (const auto& t : tokens) ++c[t];
    return c;
}

std::vector<std::string> content_tokens(const std::string& text) {
    if (text == kSameAsPrevious) return {};
    return tokenize(text);
}

} // namespace

std::size_t lcs_reference(std::span<const std::string> a, std::span<const std::string> b) {
    require(a.size() <= kMaxLcsLength && b.size() <= kMaxLcsLength, "lcs_reference: sequences longer than 12");
    std::size_t best = 0;
    const std::uint32_t subsets = 1u << a.size();
    std::vector<std::string> pick;
    for (std::uint32_t mask = 0; mask < subsets; ++mask) {
        const auto size = static_cast<std::size_t>(std::popcount(mask));
        if (size <= best) continue;
        pick.clear();
        for (std::size_t i = 0; i < a.size(); ++i)
            if (mask & (1u << i)) pick.push_back(a[i]);
        if (is_subsequence(pick, b)) best = size;
    }
    return best;
}

SubsetLogdet brute_force_subset_logdet(const Matrix& kernel, std::size_t m, double ridge) {
    require(kernel.rows() == kernel.cols(), "kernel must be square");
    const auto n = static_cast<std::size_t>(kernel.rows());
    require(n <= kMaxKernelSize && m <= kMaxSubsetSize, "brute_force_subset_logdet: K <= 12 and M <= 4");
    require(m >= 1 && m <= n, "subset size must be in [1, K]");

    Eigen::MatrixXd work = 0.5 * (kernel + kernel.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(work);
    if (es.eigenvalues().minCoeff() < 0.0) {
        const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
        work = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
        work.diagonal().array() += ridge;
    }

    SubsetLogdet best;
    best.logdet = -std::numeric_limits<double>::infinity();
    best.degenerate = true;
    for_each_subset(n, m, [&](const std::vector<std::size_t>& idx) {
        Eigen::MatrixXd sub(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        double diag_product = 1.0;
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = 0; b < m; ++b)
                sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    work(static_cast<Eigen::Index>(idx[a]), static_cast<Eigen::Index>(idx[b]));
            diag_product *= std::abs(work(static_cast<Eigen::Index>(idx[a]), static_cast<Eigen::Index>(idx[a])));
        }
        const double det = Eigen::FullPivLU<Eigen::MatrixXd>(sub).determinant();
        if (!(det > kSingularRelative * diag_product) || !(det > 0.0)) {
            if (best.degenerate && best.subset.empty()) best.subset = idx;
            return;
        }
        const double ld = std::log(det);
        if (best.degenerate || ld > best.logdet) {
            best.subset = idx;
            best.logdet = ld;
            best.degenerate = false;
        }
    });
    return best;
}

double coverage_value(const CoverageInstance& instance, std::span<const std::size_t> chosen) {
    std::vector<bool> covered(instance.universe, false);
    double value = 0.0;
    for (const auto c : chosen)
        for (const auto e : instance.covers[c])
            if (!covered[e]) {
                covered[e] = true;
                value += instance.weights[e];
            }
    return value;
}

CoverageComparison greedy_vs_optimal_coverage(const CoverageInstance& instance) {
    const std::size_t k = instance.covers.size();
    require(instance.universe <= kMaxUniverse && k <= kMaxCandidates, "coverage instance: U <= 20 and K <= 12");
    require(instance.budget <= kMaxSubsetSize, "coverage instance: budget <= 4");
    require(instance.weights.size() == instance.universe, "coverage instance: one weight per element");
    for (const auto& c : instance.covers)
        for (const auto e : c) require(e < instance.universe, "coverage instance: element out of range");

    const std::size_t m = std::min(instance.budget, k);
    CoverageComparison out;

    std::vector<bool> used(k, false);
    for (std::size_t step = 0; step < m; ++step) {
        const double base = coverage_value(instance, out.greedy_choice);
        std::size_t best = k;
        double best_gain = -1.0;
        for (std::size_t c = 0; c < k; ++c) {
            if (used[c]) continue;
            auto trial = out.greedy_choice;
            trial.push_back(c);
            const double gain = coverage_value(instance, trial) - base;
            if (gain > best_gain) {
                best = c;
                best_gain = gain;
            }
        }
        used[best] = true;
        out.greedy_choice.push_back(best);
    }
    out.greedy = coverage_value(instance, out.greedy_choice);

    out.optimum = -1.0;
    for_each_subset(k, m, [&](const std::vector<std::size_t>& idx) {
        const double v = coverage_value(instance, idx);
        if (v > out.optimum) {
            out.optimum = v;
            out.optimal_choice = idx;
        }
    });
    if (m == 0) out.optimum = 0.0;
    out.ratio = out.optimum > 0.0 ? out.greedy / out.optimum : 1.0;
    return out;
}

RetentionAudit retention_audit(std::span<const std::string> original, std::span<const std::string> deduplicated) {
    if (original.size() != deduplicated.size())
        throw Error(Errc::length_mismatch, "retention_audit: streams differ in length");
    RetentionAudit out;
    std::size_t chars_before = 0, chars_after = 0, new_total = 0, new_kept = 0;
    bool any_fraction = false;
    for (std::size_t i = 0; i < original.size(); ++i) {
        chars_before += utf8_length(original[i]);
        chars_after += utf8_length(deduplicated[i]);
        if (i == 0) continue;
        ++out.checked_captions;
        const auto prev = counts(tokenize(original[i - 1]));
        const auto cur = counts(tokenize(original[i]));
        const auto kept = counts(content_tokens(deduplicated[i]));

        double h = 0.0, h_unique = 0.0;
        std::size_t n = 0;
        for (const auto& [tok, c] : cur) n += c;
        for (const auto& [tok, c] : cur) {
            const double p = static_cast<double>(c) / static_cast<double>(n);
            const double term = p > 0.0 && p < 1.0 ? -p * std::log2(p) : 0.0;
            h += term;
            if (prev.count(tok)) continue;
            h_unique += term;
            new_total += c;
            const auto it = kept.find(tok);
            const std::size_t survived = it == kept.end() ? 0 : std::min(it->second, c);
            new_kept += survived;
            if (survived < c) {
                out.invariant_holds = false;
                out.violations += c - survived;
            }
        }
        if (n == 0) continue;
        double fraction;
        if (h > 0.0) {
            fraction = h_unique / h;
        } else {
            fraction = prev.count(cur.begin()->first) ? 0.0 : 1.0;
        }
        out.min_unique_fraction = any_fraction ? std::min(out.min_unique_fraction, fraction) : fraction;
        any_fraction = true;
    }
    out.kappa = chars_before ? static_cast<double>(chars_after) / static_cast<double>(chars_before) : 1.0;
    out.iota_proxy = new_total ? static_cast<double>(new_kept) / static_cast<double>(new_total) : 1.0;
    const double f = out.min_unique_fraction;
    out.bound_rhs = f < 1.0 ? 1.0 + f / (1.0 - f) : std::numeric_limits<double>::infinity();
    out.margin = out.kappa + out.iota_proxy - out.bound_rhs;
    return out;
}

} // namespace tvrag::oracle
