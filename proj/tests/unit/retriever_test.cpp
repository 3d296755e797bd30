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

#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "synthetic.hpp"
#include "tvrag/error.hpp"
#include "tvrag/evaluation.hpp"
#include "tvrag/retriever.hpp"

namespace tvrag {
namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

Vector axis(Eigen::Index dim, Eigen::Index i) {
    Vector v = Vector::Zero(dim);
    v(i) = 1.0;
    return v;
}

// Two identical top segments (0 and 5), a slightly weaker distinct one (2),
// and unrelated filler.
Matrix duplicate_fixture() {
    Matrix e = Matrix::Zero(8, 8);
    for (Eigen::Index i = 0; i < 8; ++i) e.row(i) = axis(8, i).transpose();
    e.row(0) = (axis(8, 0) + 0.1 * axis(8, 1)).transpose();
    e.row(5) = e.row(0);
    e.row(2) = (axis(8, 0) + 0.3 * axis(8, 2)).transpose();
    return e;
}

TEST(Kl, Examples) {
    EXPECT_NEAR(kl_from_uniform(vec({0.9, 0.1})), 0.737, 1e-3);
    EXPECT_DOUBLE_EQ(kl_from_uniform(vec({0.5, 0.5})), 0.0);
    EXPECT_TRUE(std::isinf(kl_from_uniform(vec({1.0, 0.0}))));
}

TEST(Kl, LooseEpsilonLeavesTemperature) {
    const KlGuardResult r = kl_guard_scores(vec({1.0, 0.2, -0.5}), 0.1, 10.0);
    EXPECT_EQ(r.adjustments, 0);
    EXPECT_DOUBLE_EQ(r.temperature, 0.1);
    EXPECT_LT((r.probabilities - softmax_tempered(vec({1.0, 0.2, -0.5}), 0.1)).norm(), 1e-15);
}

TEST(Kl, GuardOnDistribution) {
    RetrievalConfig c;
    c.epsilon_kl = 0.1;
    const KlGuardResult r = kl_guard(vec({0.9, 0.1}), c);
    EXPECT_LE(r.kl, 0.1);
    EXPECT_GT(r.temperature, c.temperature);
}

TEST(Markov, NoStrengthOrNoHistoryIsIdentity) {
    const Vector p = vec({0.1, 0.2, 0.3, 0.4});
    const Vector cos = vec({0.5, 0.5, 0.5, 0.5});
    EXPECT_EQ(markov_adjusted(p, 1, cos, 0.0), p);
    EXPECT_EQ(markov_adjusted(p, std::nullopt, cos, 0.4), p);
}

TEST(Markov, MovesMassToNeighbors) {
    const Vector p = vec({0.25, 0.25, 0.25, 0.25});
    const Vector cos = vec({0.9, 0.8, -0.5, 0.7});
    const Vector out = markov_adjusted(p, 2, cos, 0.4);
    // Neighbors 1 and 3 gain 0.4 * cos; index 2 itself does not.
    const double total = 0.6 + 0.4 * (0.8 + 0.7);
    EXPECT_NEAR(out(0), 0.15 / total, 1e-12);
    EXPECT_NEAR(out(1), (0.15 + 0.32) / total, 1e-12);
    EXPECT_NEAR(out(2), 0.15 / total, 1e-12);
    EXPECT_NEAR(out.sum(), 1.0, 1e-12);
}

TEST(Novelty, Basics) {
    const Matrix u = normalized_rows(duplicate_fixture());
    EXPECT_EQ(novelty(u, {}), Vector::Ones(8));
    const std::vector<std::size_t> s{0};
    const Vector n = novelty(u, s);
    EXPECT_NEAR(n(0), 0.0, 1e-12);
    EXPECT_NEAR(n(5), 0.0, 1e-12);
    EXPECT_NEAR(n(7), 1.0, 1e-12);
}

TEST(Select, OrthogonalFixtureFollowsQuery) {
    const Matrix e = Matrix::Identity(6, 6);
    RetrievalConfig c;
    c.top_m = 1;
    EXPECT_EQ(greedy_select(e, axis(6, 4), c).selected(), (std::vector<std::size_t>{4}));
}

TEST(Select, ExhaustsSmallIndex) {
    Rng rng(5);
    const Matrix e = synth::random_matrix(rng, 5, 4);
    RetrievalConfig c;
    c.top_m = 12;
    const auto sel = greedy_select(e, e.row(0).transpose(), c).selected();
    ASSERT_EQ(sel.size(), 5u);
    EXPECT_EQ(std::set<std::size_t>(sel.begin(), sel.end()).size(), 5u);
}

TEST(Select, EmptyIndexRejected) {
    try {
        greedy_select(Matrix(0, 4), Vector::Ones(4), RetrievalConfig{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::empty_index);
    }
}

TEST(Select, DuplicateSuppressed) {
    const Matrix e = duplicate_fixture();
    RetrievalConfig c;
    c.top_m = 2;
    const auto dpp = select_segments(e, axis(8, 0), c, Selector::dpp, 0);
    const auto greedy = select_segments(e, axis(8, 0), c, Selector::greedy, 0);
    EXPECT_EQ(dpp, (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(greedy, (std::vector<std::size_t>{0, 5}));
}

TEST(Select, TemporalAndRandomSelectors) {
    const Matrix e = duplicate_fixture();
    RetrievalConfig c;
    c.top_m = 3;
    const auto t = select_segments(e, axis(8, 0), c, Selector::temporal, 0);
    EXPECT_TRUE(std::is_sorted(t.begin(), t.end()));
    const auto r1 = select_segments(e, axis(8, 0), c, Selector::random, 9);
    EXPECT_EQ(r1, select_segments(e, axis(8, 0), c, Selector::random, 9));
    EXPECT_EQ(std::set<std::size_t>(r1.begin(), r1.end()).size(), 3u);
}

TEST(RetrieverProperty, GuardHoldsAndDeterministic) {
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 1 + rng.below(40);
        const Matrix e = synth::random_matrix(rng, k, 6);
        const Vector q = synth::random_matrix(rng, 6, 1).col(0);
        RetrievalConfig c;
        c.top_m = 1 + static_cast<int>(rng.below(10));
        c.epsilon_kl = rng.uniform(0.05, 2.0);
        const RetrievalResult a = greedy_select(e, q, c);
        const RetrievalResult b = greedy_select(e, q, c);
        ASSERT_EQ(a.selected(), b.selected());
        EXPECT_EQ(a.selected().size(), std::min<std::size_t>(k, static_cast<std::size_t>(c.top_m)));
        double last_temperature = 0.0;
        for (const auto& s : a.steps) {
            EXPECT_LE(s.kl, c.epsilon_kl + 1e-12);
            EXPECT_NEAR(s.probabilities.sum(), 1.0, 1e-9);
            EXPECT_GE(s.temperature, last_temperature);
            last_temperature = s.temperature;
        }
    }
}

TEST(RetrieverProperty, KlGuardBounded) {
    Rng rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 2 + rng.below(200);
        Vector scores(static_cast<Eigen::Index>(k));
        for (Eigen::Index i = 0; i < scores.size(); ++i) scores(i) = rng.normal() * 5.0;
        const KlGuardResult r = kl_guard_scores(scores, 0.1, 0.1);
        EXPECT_LE(r.kl, 0.1);
        EXPECT_LE(r.adjustments, kMaxTemperatureAdjustments);
        EXPECT_NEAR(r.probabilities.sum(), 1.0, 1e-12);
    }
}

} // namespace
} // namespace tvrag
