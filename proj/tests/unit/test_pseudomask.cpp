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

using namespace ts2c;
using ts2c::testing::map_of;

namespace {

std::uint8_t label_one(std::vector<std::pair<int, float>> cams, float saliency, MaskConfig cfg = {})
{
    std::vector<ConfMap> maps;
    for (const auto& [c, v] : cams) {
        maps.push_back(map_of(1, 1, {v}, c));
    }
    return generate_mask(maps, map_of(1, 1, {saliency}), cfg).labels[0];
}

}  // namespace

TEST(Mask, SingleClaimantSalient) { EXPECT_EQ(label_one({{4, 0.80f}}, 0.5f), class_code(4)); }

TEST(Mask, ConflictIsIgnored)
{
    for (const float s : {0.0f, 0.03f, 0.5f, 1.0f}) {
        EXPECT_EQ(label_one({{4, 0.80f}, {7, 0.90f}}, s), kIgnoreCode);
    }
}

TEST(Mask, RuleTableCorners)
{
    EXPECT_EQ(label_one({{4, 0.50f}}, 0.03f), kBackgroundCode);
    EXPECT_EQ(label_one({{4, 0.50f}}, 0.50f), kIgnoreCode);
    EXPECT_EQ(label_one({{4, 0.80f}}, 0.03f), kIgnoreCode);
}

TEST(Mask, ThresholdsAreInclusiveAtStoredPrecision)
{
    EXPECT_EQ(label_one({{2, 0.78f}}, 0.5f), class_code(2));
    EXPECT_EQ(label_one({{2, 0.5f}}, 0.06f), kBackgroundCode);
    EXPECT_EQ(label_one({{2, 0.9f}}, 0.06f), kIgnoreCode);
}

TEST(Mask, NoCamsMeansSaliencyOnly)
{
    const auto m = generate_mask(std::vector<ConfMap>{}, map_of(2, 1, {0.0f, 0.9f}), MaskConfig{});
    EXPECT_EQ(m.labels[0], kBackgroundCode);
    EXPECT_EQ(m.labels[1], kIgnoreCode);
}

TEST(Mask, DimensionMismatchThrows)
{
    const std::vector<ConfMap> cams{ConfMap::filled(0, 3, 3, 0.1f)};
    EXPECT_THROW(generate_mask(cams, ConfMap::filled(0, 3, 4, 0.1f), MaskConfig{}), std::invalid_argument);
}

TEST(Mask, ConfigValidation)
{
    EXPECT_THROW((MaskConfig{1.01, 0.06}.validate()), std::invalid_argument);
    EXPECT_THROW((MaskConfig{0.5, 0.6}.validate()), std::invalid_argument);
    EXPECT_THROW((MaskConfig{0.5, -0.1}.validate()), std::invalid_argument);
    EXPECT_NO_THROW((MaskConfig{}.validate()));
}

TEST(Mask, ClassCodeRange)
{
    EXPECT_EQ(class_code(0), 1);
    EXPECT_EQ(class_code(253), 254);
    EXPECT_THROW(class_code(254), std::invalid_argument);
    EXPECT_THROW(class_code(-1), std::invalid_argument);
}

TEST(NormalizeCam, DividesByPeak)
{
    const ConfMap m = normalize_cam(RawMap{0, 2, 1, {2.0f, 1.56f}});
    EXPECT_FLOAT_EQ(m.at(0, 0), 1.0f);
    EXPECT_NEAR(m.at(1, 0), 0.78, 1e-6);
}

TEST(NormalizeCam, AllZeroAndIdentity)
{
    const ConfMap z = normalize_cam(RawMap{1, 2, 2, {0, 0, 0, 0}});
    for (const float v : z.values()) {
        EXPECT_EQ(v, 0.0f);
    }
    const ConfMap id = map_of(2, 1, {1.0f, 0.25f}, 5);
    EXPECT_EQ(normalize_cam(id), id);
}

TEST(MaskStats, AllBackground)
{
    const PseudoMask m{3, 2, std::vector<std::uint8_t>(6, kBackgroundCode)};
    const auto s = mask_stats(m);
    EXPECT_DOUBLE_EQ(s.fraction(kBackgroundCode), 1.0);
    EXPECT_FALSE(s.all_ignore());
}

TEST(MaskStats, HalfClassHalfIgnore)
{
    const PseudoMask m{2, 2, {class_code(0), kIgnoreCode, class_code(0), kIgnoreCode}};
    const auto s = mask_stats(m);
    EXPECT_DOUBLE_EQ(s.fraction(class_code(0)), 0.5);
    EXPECT_DOUBLE_EQ(s.fraction(kIgnoreCode), 0.5);
    EXPECT_EQ(s.foreground(), 2u);
}

TEST(MaskStats, MatchesHistogram)
{
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> u(0, 255);
    PseudoMask m{37, 23, {}};
    std::array<std::size_t, 256> hist{};
    for (int i = 0; i < 37 * 23; ++i) {
        const auto c = static_cast<std::uint8_t>(u(rng));
        m.labels.push_back(c);
        ++hist[c];
    }
    const auto s = mask_stats(m);
    EXPECT_EQ(s.total, m.labels.size());
    for (int c = 0; c < 256; ++c) {
        ASSERT_EQ(s.counts[c], hist[c]);
    }
    EXPECT_EQ(s.foreground(), m.labels.size() - hist[0] - hist[255]);
}

TEST(MaskStats, AllIgnoreFlag)
{
    const PseudoMask m{1, 2, {kIgnoreCode, kIgnoreCode}};
    EXPECT_TRUE(mask_stats(m).all_ignore());
}
