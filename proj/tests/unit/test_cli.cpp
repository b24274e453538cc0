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
#include <sys/wait.h>

#include "helpers.hpp"

using namespace ts2c;
using ts2c::testing::TempDir;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args)
{
    const std::string cmd = std::string(TS2C_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::string slurp(const fs::path& p) { return detail::read_file(p); }

/// Every regular file under `dir`, keyed by relative path.
std::map<std::string, std::string> tree(const fs::path& dir)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) {
            out[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
        }
    }
    return out;
}

}  // namespace

TEST(Cli, UsageErrorsExitOne)
{
    EXPECT_EQ(run(""), 1);
    EXPECT_EQ(run("bogus"), 1);
    EXPECT_EQ(run("score"), 1);
    EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, SynthIsDeterministic)
{
    TempDir tmp("cli_synth");
    ASSERT_EQ(run("synth --out " + q(tmp / "a") + " --scenes 1 --seed 7"), 0);
    ASSERT_EQ(run("synth --out " + q(tmp / "b") + " --scenes 1 --seed 7"), 0);
    EXPECT_EQ(tree(tmp / "a"), tree(tmp / "b"));
    EXPECT_TRUE(fs::exists(tmp / "a" / "scene_0000" / "spec.json"));
    const auto corpus = read_corpus(tmp / "a");
    EXPECT_EQ(corpus.size(), 1u);
}

TEST(Cli, SynthZeroScenes)
{
    TempDir tmp("cli_zero");
    ASSERT_EQ(run("synth --out " + q(tmp / "c") + " --scenes 0"), 0);
    EXPECT_EQ(tree(tmp / "c").size(), 1u);
    EXPECT_TRUE(fs::exists(tmp / "c" / "manifest.json"));
}

TEST(Cli, SynthLinkedMode)
{
    TempDir tmp("cli_linked");
    ASSERT_EQ(run("synth --out " + q(tmp / "c") + " --scenes 3 --seed 1 --failure-mode linked"), 0);
    for (const auto& b : read_corpus(tmp / "c")) {
        ASSERT_EQ(b.gt.entries.size(), 2u);
        EXPECT_EQ(b.gt.entries[0].class_id, b.gt.entries[1].class_id);
        EXPECT_EQ(b.gt.entries[0].box.x1(), b.gt.entries[1].box.x0());
    }
    EXPECT_EQ(run("synth --out " + q(tmp / "d") + " --failure-mode adjacent"), 1);
}

TEST(Cli, ScoreMatchesLibrary)
{
    TempDir tmp("cli_score");
    ASSERT_EQ(run("synth --out " + q(tmp / "c") + " --scenes 3 --seed 2"), 0);
    ASSERT_EQ(run("score --corpus " + q(tmp / "c") + " --out " + q(tmp / "s.csv")), 0);
    std::vector<CandidatePool> expect;
    for (const auto& b : read_corpus(tmp / "c")) {
        auto p = pools_for_scene(b, ScoringConfig{});
        expect.insert(expect.end(), p.begin(), p.end());
    }
    EXPECT_EQ(slurp(tmp / "s.csv"), encode_scored(expect));
    const auto manifest = nlohmann::json::parse(slurp(tmp / "s.csv.manifest.json"));
    EXPECT_EQ(manifest["command"], "score");
    EXPECT_DOUBLE_EQ(manifest["config"]["enlarge_ratio"].get<double>(), 1.2);
    EXPECT_DOUBLE_EQ(manifest["config"]["top_fraction"].get<double>(), 0.5);
    EXPECT_EQ(manifest["config"]["pool_size"].get<int>(), 200);
    EXPECT_EQ(manifest["outputs"]["s.csv"].get<std::string>().size(), 64u);
}

TEST(Cli, IdentityRatioCollapsesToPurity)
{
    TempDir tmp("cli_ratio1");
    ASSERT_EQ(run("synth --out " + q(tmp / "c") + " --scenes 2 --seed 3"), 0);
    ASSERT_EQ(run("score --corpus " + q(tmp / "c") + " --ratio 1.0 --empty-ring zero --out " + q(tmp / "s.csv")), 0);
    for (const auto& p : read_scored(tmp / "s.csv")) {
        for (const auto& e : p.entries) {
            ASSERT_EQ(e.objectness, e.p_inside);
        }
    }
}

TEST(Cli, FullFractionIsPlainRingMean)
{
    TempDir tmp("cli_frac1");
    ASSERT_EQ(run("synth --out " + q(tmp / "c") + " --scenes 1 --seed 4"), 0);
    ASSERT_EQ(run("score --corpus " + q(tmp / "c") + " --top-frac 1.0 --out " + q(tmp / "s.csv")), 0);
    const auto bundle = read_corpus(tmp / "c").front();
    for (const auto& p : read_scored(tmp / "s.csv")) {
        const ConfMap& m = *bundle.map_for(p.class_id);
        for (const auto& e : p.entries) {
            const auto vals = ring_values(m, ring(e.box, 1.2, m.width(), m.height()));
            const double mean = vals.empty() ? 0.0 : std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
            ASSERT_NEAR(e.p_surround, mean, 1e-8);
        }
    }
}

TEST(Cli, ScoreSingleMapMode)
{
    TempDir tmp("cli_single");
    std::vector<float> v(32 * 32, 0.0f);
    for (int y = 8; y < 24; ++y) {
        for (int x = 8; x < 24; ++x) {
            v[y * 32 + x] = 1.0f;
        }
    }
    write_confmap(ConfMap(5, 32, 32, v), tmp / "m.tscf");
    const std::vector<BoxRecord> boxes{{"img", -1, Box(10, 10, 20, 20), std::nullopt}, {"img", -1, Box(8, 8, 24, 24), std::nullopt}};
    write_boxes(boxes, tmp / "b.csv");
    ASSERT_EQ(run("score --map " + q(tmp / "m.tscf") + " --boxes " + q(tmp / "b.csv") + " --out " + q(tmp / "s.csv")), 0);
    const auto pools = read_scored(tmp / "s.csv");
    ASSERT_EQ(pools.size(), 1u);
    EXPECT_EQ(pools[0].class_id, 5);
    EXPECT_EQ(pools[0].entries.front().box, Box(8, 8, 24, 24));
    EXPECT_EQ(run("score --map " + q(tmp / "m.tscf") + " --out " + q(tmp / "x.csv")), 1);
    EXPECT_EQ(run("score --corpus " + q(tmp / "nope") + " --out " + q(tmp / "x.csv")), 2);
    EXPECT_EQ(run("score --map " + q(tmp / "m.tscf") + " --boxes " + q(tmp / "b.csv") + " --top-frac 0 --out " +
                  q(tmp / "x.csv")),
              1);
}

TEST(Cli, EvalRecallAndCorLoc)
{
    TempDir tmp("cli_eval");
    const std::vector<GroundTruth> gt{{"a", {{0, Box(0, 0, 10, 10)}}}, {"b", {{1, Box(0, 0, 10, 10)}}}};
    write_gt(gt, tmp / "gt.csv");
    const std::vector<CandidatePool> pools{{"a", 0, {ScoredProposal{Box(0, 0, 10, 10), 0}}},
                                           {"b", 1, {ScoredProposal{Box(0, 0, 10, 10), 1}}}};
    write_scored(pools, tmp / "p.csv");
    ASSERT_EQ(run("eval recall --pools " + q(tmp / "p.csv") + " --gt " + q(tmp / "gt.csv") + " --out " +
                  q(tmp / "r.json") + " --report " + q(tmp / "r.tsv")),
              0);
    const auto r = nlohmann::json::parse(slurp(tmp / "r.json"));
    for (const auto& pt : r["points"]) {
        EXPECT_DOUBLE_EQ(pt["recall"].get<double>(), 1.0);
    }
    ASSERT_EQ(run("eval corloc --pools " + q(tmp / "p.csv") + " --gt " + q(tmp / "gt.csv") + " --out " +
                  q(tmp / "c.json")),
              0);
    EXPECT_DOUBLE_EQ(nlohmann::json::parse(slurp(tmp / "c.json"))["mean"].get<double>(), 1.0);
    EXPECT_EQ(run("eval recall --gt " + q(tmp / "gt.csv") + " --out " + q(tmp / "x.json")), 1);
}

TEST(Cli, EvalMapTwoDetectionCase)
{
    TempDir tmp("cli_map");
    write_gt(std::vector<GroundTruth>{{"a", {{0, Box(0, 0, 10, 10)}}}}, tmp / "gt.csv");
    const std::vector<BoxRecord> dets{{"a", 0, Box(20, 20, 30, 30), 0.9}, {"a", 0, Box(0, 0, 10, 10), 0.8}};
    write_boxes(dets, tmp / "d.csv");
    for (const std::string mode : {"11point", "area"}) {
        ASSERT_EQ(run("eval map --detections " + q(tmp / "d.csv") + " --gt " + q(tmp / "gt.csv") + " --mode " + mode +
                      " --out " + q(tmp / "m.json")),
                  0);
        EXPECT_NEAR(nlohmann::json::parse(slurp(tmp / "m.json"))["mAP"].get<double>(), 0.5, 1e-12);
    }
    EXPECT_EQ(run("eval map --detections " + q(tmp / "d.csv") + " --gt " + q(tmp / "gt.csv") + " --mode voc12 --out " +
                  q(tmp / "m.json")),
              1);
}

TEST(Cli, EvalSweepGrid)
{
    TempDir tmp("cli_sweep");
    ASSERT_EQ(run("synth --out " + q(tmp / "c") + " --scenes 3 --seed 5"), 0);
    ASSERT_EQ(run("eval sweep --corpus " + q(tmp / "c") + " --ratios 1.1,1.2,1.3,1.4 --fracs 0.3,0.5,0.7,1.0 --out " +
                  q(tmp / "t.json") + " --report " + q(tmp / "t.tsv")),
              0);
    const auto t = nlohmann::json::parse(slurp(tmp / "t.json"));
    EXPECT_EQ(t["cells"].size(), 16u);
    const std::string tsv = slurp(tmp / "t.tsv");
    EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 18);
}

TEST(Cli, MaskDefaultsAndRangeCheck)
{
    TempDir tmp("cli_mask");
    write_confmap(ConfMap::filled(0, 4, 4, 0.0f), tmp / "cam.tscf");
    write_confmap(ConfMap::filled(0, 4, 4, 0.0f), tmp / "sal.tscf");
    ASSERT_EQ(run("mask --cam " + q(tmp / "cam.tscf") + " --saliency " + q(tmp / "sal.tscf") + " --out " +
                  q(tmp / "m.pgm")),
              0);
    const PseudoMask m = read_mask(tmp / "m.pgm");
    EXPECT_TRUE(std::all_of(m.labels.begin(), m.labels.end(), [](auto c) { return c == kBackgroundCode; }));
    const auto manifest = nlohmann::json::parse(slurp(tmp / "m.pgm.manifest.json"));
    EXPECT_DOUBLE_EQ(manifest["config"]["fg_threshold"].get<double>(), 0.78);
    EXPECT_DOUBLE_EQ(manifest["config"]["bg_threshold"].get<double>(), 0.06);
    EXPECT_TRUE(fs::exists(tmp / "m.pgm.stats.json"));
    EXPECT_EQ(run("mask --cam " + q(tmp / "cam.tscf") + " --saliency " + q(tmp / "sal.tscf") +
                  " --fg-thresh 1.01 --out " + q(tmp / "x.pgm")),
              1);
    EXPECT_EQ(run("mask --cam " + q(tmp / "cam.tscf") + " --saliency " + q(tmp / "sal.tscf") +
                  " --fg-thresh 0.05 --bg-thresh 0.1 --out " + q(tmp / "x.pgm")),
              1);
    write_confmap(ConfMap::filled(0, 5, 4, 0.0f), tmp / "sal5.tscf");
    EXPECT_EQ(run("mask --cam " + q(tmp / "cam.tscf") + " --saliency " + q(tmp / "sal5.tscf") + " --out " +
                  q(tmp / "x.pgm")),
              2);
}

TEST(Cli, OverlayWritesPgm)
{
    TempDir tmp("cli_overlay");
    write_confmap(ConfMap::filled(0, 8, 8, 0.5f), tmp / "m.tscf");
    write_boxes(std::vector<BoxRecord>{{"a", -1, Box(1, 1, 4, 4), std::nullopt}}, tmp / "b.csv");
    ASSERT_EQ(run("overlay --map " + q(tmp / "m.tscf") + " --boxes " + q(tmp / "b.csv") + " --out " + q(tmp / "o.pgm")),
              0);
    const ConfMap o = read_confmap(tmp / "o.pgm");
    EXPECT_FLOAT_EQ(o.at(1, 1), 1.0f);
    EXPECT_FLOAT_EQ(o.at(2, 2), 127.0f / 255.0f);
}
