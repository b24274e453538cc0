/*
 Copyright 2026 The ts2c Authors.

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "metric_fixtures.hpp"

using namespace ts2c;

namespace {

const fixtures::MetricFixtures& metric_fixtures()
{
    static const fixtures::MetricFixtures f = fixtures::load(TS2C_FIXTURE_DIR "/metrics.json");
    return f;
}

CandidatePool pool_of(std::string img, int c, std::vector<Box> boxes)
{
    CandidatePool p{std::move(img), c, {}};
    for (const auto& b : boxes) {
        p.entries.push_back(ScoredProposal{b, c});
    }
    return p;
}

}  // namespace

TEST(Hits, InclusiveThreshold)
{
    EXPECT_TRUE(hits(Box(0, 0, 10, 5), Box(0, 0, 10, 10)));
    EXPECT_FALSE(hits(Box(0, 0, 7, 7), Box(0, 0, 10, 10)));
}

TEST(Recall, HandTracedFixtures)
{
    for (const auto& c : metric_fixtures().recall) {
        SCOPED_TRACE(c.name);
        const auto got = recall_at_k(c.pools, c.gt, c.ks);
        ASSERT_EQ(got.recall.size(), c.expected.size());
        for (std::size_t i = 0; i < c.expected.size(); ++i) {
            EXPECT_NEAR(got.recall[i], c.expected[i], 1e-9);
        }
        EXPECT_NEAR(got.upper_bound, c.upper_bound, 1e-9);
    }
}

TEST(Recall, PerfectPools)
{
    const std::vector<GroundTruth> gt{{"a", {{0, Box(0, 0, 10, 10)}}}, {"b", {{1, Box(5, 5, 9, 9)}}}};
    const std::vector<CandidatePool> pools{pool_of("a", 0, {Box(0, 0, 10, 10)}), pool_of("b", 1, {Box(5, 5, 9, 9)})};
    const auto ks = default_recall_ks();
    for (const double r : recall_at_k(pools, gt, ks).recall) {
        EXPECT_DOUBLE_EQ(r, 1.0);
    }
}

TEST(CorLoc, HandTracedFixtures)
{
    for (const auto& c : metric_fixtures().corloc) {
        SCOPED_TRACE(c.name);
        const auto got = corloc(c.top, c.gt);
        ASSERT_EQ(got.per_class.size(), c.per_class.size());
        for (const auto& [cls, v] : c.per_class) {
            ASSERT_TRUE(got.per_class.contains(cls));
            EXPECT_NEAR(got.per_class.at(cls), v, 1e-9);
        }
        EXPECT_NEAR(got.mean, c.mean, 1e-9);
    }
}

TEST(VocAp, HandTracedFixtures)
{
    for (const auto& c : metric_fixtures().ap) {
        SCOPED_TRACE(c.name);
        for (const auto mode : {ApMode::eleven_point, ApMode::area}) {
            const auto& want = mode == ApMode::eleven_point ? c.eleven_point : c.area;
            const auto got = voc_ap(c.dets, c.gt, mode);
            ASSERT_EQ(got.per_class.size(), want.per_class.size());
            for (const auto& [cls, v] : want.per_class) {
                EXPECT_NEAR(got.per_class.at(cls), v, 1e-9) << "class " << cls;
            }
            EXPECT_NEAR(got.map, want.map, 1e-9);
            EXPECT_EQ(got.undefined_classes, c.undefined);
        }
    }
}

TEST(VocAp, OrderInvariance)
{
    std::mt19937_64 rng(21);
    std::vector<GroundTruth> gt;
    std::vector<Detection> dets;
    std::uniform_real_distribution<double> score(0.0, 1.0);
    for (int i = 0; i < 12; ++i) {
        const std::string img = "im" + std::to_string(i);
        const Box g = ts2c::testing::random_box(rng, 50, 50);
        gt.push_back({img, {{i % 3, g}}});
        for (int d = 0; d < 4; ++d) {
            const Box b = d == 0 ? g : ts2c::testing::random_box(rng, 50, 50);
            dets.push_back(Detection{img, i % 3, b, score(rng)});
        }
    }
    const auto ref = voc_ap(dets, gt, ApMode::area);
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(dets.begin(), dets.end(), rng);
        EXPECT_EQ(voc_ap(dets, gt, ApMode::area).per_class, ref.per_class);
    }
}

TEST(Top1, FirstEntryPerPool)
{
    std::vector<CandidatePool> pools{pool_of("a", 0, {Box(0, 0, 1, 1), Box(0, 0, 2, 2)}), pool_of("a", 1, {})};
    pools[0].entries[0].objectness = 0.7;
    const auto t = top1(pools);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t[0].box, Box(0, 0, 1, 1));
    EXPECT_DOUBLE_EQ(t[0].score, 0.7);
}

TEST(PoolsForScene, ScoresAnnotatedClassesOnly)
{
    SceneBundle b;
    b.image_id = "s";
    b.width = b.height = 16;
    b.maps = {ConfMap::filled(1, 16, 16, 0.2f), ConfMap::filled(4, 16, 16, 0.2f)};
    b.gt = {"s", {{4, Box(2, 2, 8, 8)}}};
    b.proposals = {Box(2, 2, 8, 8), Box(0, 0, 4, 4)};
    const auto pools = pools_for_scene(b, ScoringConfig{});
    ASSERT_EQ(pools.size(), 1u);
    EXPECT_EQ(pools[0].class_id, 4);
    EXPECT_EQ(pools[0].entries.size(), 2u);
    b.gt.entries.push_back({7, Box(0, 0, 2, 2)});
    EXPECT_THROW(pools_for_scene(b, ScoringConfig{}), std::invalid_argument);
}

namespace {

std::vector<SceneBundle> small_corpus(std::size_t n)
{
    std::vector<SceneBundle> out;
    TrapParams p;
    p.image_w = p.image_h = 64;
    p.noise_sigma = 0.05;
    p.blur_radius = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const auto spec = make_trap_spec(derive_seed(3, i), p);
        const auto fam = gen_proposals(spec, ProposalCounts{3, 3, 2, 3}, JitterParams{}, derive_seed(4, i));
        out.push_back(make_bundle(spec, fam, "s" + std::to_string(i)));
    }
    return out;
}

}  // namespace

TEST(Sweep, IdentityRatioReproducesPurityColumn)
{
    const auto corpus = small_corpus(6);
    const std::vector<double> ratios{1.0};
    const std::vector<double> fracs{0.5};
    const auto t = ablation_sweep(corpus, ratios, fracs);
    ASSERT_EQ(t.cells.size(), 1u);
    EXPECT_DOUBLE_EQ(t.cells[0].recall_at_1, t.purity_baseline.recall_at_1);
    EXPECT_DOUBLE_EQ(t.cells[0].mean_top1_objectness, t.purity_baseline.mean_top1_objectness);
}

TEST(Sweep, GridMarksDefaultAndIsDeterministic)
{
    const auto corpus = small_corpus(4);
    const std::vector<double> ratios{1.1, 1.2, 1.3, 1.4};
    const std::vector<double> fracs{0.3, 0.5, 0.7, 1.0};
    const auto a = ablation_sweep(corpus, ratios, fracs);
    ASSERT_EQ(a.cells.size(), 16u);
    int defaults = 0;
    for (const auto& c : a.cells) {
        if (c.is_default) {
            ++defaults;
            EXPECT_DOUBLE_EQ(c.ratio, 1.2);
            EXPECT_DOUBLE_EQ(c.fraction, 0.5);
        }
    }
    EXPECT_EQ(defaults, 1);
    const auto b = ablation_sweep(corpus, ratios, fracs);
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
    EXPECT_EQ(sweep_report(a), sweep_report(b));
}

TEST(Bootstrap, KnownGap)
{
    const std::vector<std::size_t> a{1, 1, 1, 1}, b{0, 0, 0, 0}, t{1, 1, 1, 1};
    const auto r = paired_bootstrap(a, b, t, 200, 0.99, 1);
    EXPECT_DOUBLE_EQ(r.gap, 1.0);
    EXPECT_DOUBLE_EQ(r.lower, 1.0);
    EXPECT_THROW(paired_bootstrap(a, b, std::vector<std::size_t>{1}, 10, 0.99, 1), std::invalid_argument);
}

TEST(Bootstrap, NoGapStraddlesZero)
{
    const std::vector<std::size_t> a{1, 0, 1, 0, 1, 0}, b{0, 1, 0, 1, 0, 1}, t{1, 1, 1, 1, 1, 1};
    const auto r = paired_bootstrap(a, b, t, 500, 0.99, 2);
    EXPECT_DOUBLE_EQ(r.gap, 0.0);
    EXPECT_LT(r.lower, 0.0);
}
