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

// ts2c command line: synth, score, eval {recall,corloc,map,sweep}, mask,
// overlay. Exit codes: 0 success, 1 usage error, 2 data error.

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ts2c/ts2c.hpp"

#ifndef TS2C_VERSION
#define TS2C_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string sha256_file(const fs::path& path)
{
    const std::string bytes = ts2c::detail::read_file(path);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed for " + path.string());
    }
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

/// Run record: identical manifests imply identical outputs. Output keys are
/// relative to the manifest's directory so two runs in different places
/// produce comparable checksum blocks.
class Manifest {
public:
    Manifest(std::string command, fs::path path) : path_(std::move(path))
    {
        doc_["command"] = std::move(command);
        doc_["tool_version"] = TS2C_VERSION;
        doc_["config"] = json::object();
        doc_["inputs"] = json::array();
        doc_["seed"] = nullptr;
        doc_["outputs"] = json::object();
    }

    json& config() { return doc_["config"]; }
    void input(const std::string& p) { doc_["inputs"].push_back(p); }
    void seed(std::uint64_t s) { doc_["seed"] = s; }
    void output(const fs::path& p) { outputs_.push_back(p); }

    void write()
    {
        const fs::path base = path_.parent_path().empty() ? fs::path(".") : path_.parent_path();
        for (const auto& p : outputs_) {
            doc_["outputs"][fs::relative(p, base).generic_string()] = sha256_file(p);
        }
        ts2c::detail::write_file(path_, doc_.dump(2) + "\n");
    }

private:
    fs::path path_;
    json doc_;
    std::vector<fs::path> outputs_;
};

fs::path manifest_for(const fs::path& out, const std::string& explicit_path)
{
    if (!explicit_path.empty()) {
        return explicit_path;
    }
    return fs::path(out.string() + ".manifest.json");
}

ts2c::EmptyRingPolicy parse_policy(const std::string& s)
{
    return s == "skip" ? ts2c::EmptyRingPolicy::skip : ts2c::EmptyRingPolicy::zero;
}

json config_json(const ts2c::ScoringConfig& cfg)
{
    return {{"enlarge_ratio", cfg.enlarge_ratio},
            {"top_fraction", cfg.top_fraction},
            {"pool_size", cfg.pool_size},
            {"empty_ring", cfg.empty_ring == ts2c::EmptyRingPolicy::zero ? "zero" : "skip"}};
}

void ensure_parent(const fs::path& p)
{
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
    }
}

/// Ground truth from a gt CSV or from every bundle of a corpus directory.
std::vector<ts2c::GroundTruth> load_gt(const fs::path& p)
{
    if (fs::is_directory(p)) {
        std::vector<ts2c::GroundTruth> out;
        for (auto& b : ts2c::read_corpus(p)) {
            b.gt.image_id = b.image_id;
            out.push_back(std::move(b.gt));
        }
        return out;
    }
    return ts2c::read_gt(p);
}

std::string first_line(const fs::path& p)
{
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return line;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    fs::path out;
    std::size_t scenes = 1;
    std::uint64_t seed = 0;
    int width = 128;
    int height = 128;
    int objects = 1;
    int classes = 20;
    double noise = 0.0;
    int blur = 0;
    std::string failure_mode = "none";
    ts2c::ProposalCounts counts{8, 8, 4, 8};
};

int run_synth(const SynthArgs& a)
{
    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec || !fs::is_directory(a.out)) {
        throw ts2c::IoError(ts2c::IoErrc::io_failure, a.out.string(), "cannot create output directory");
    }
    Manifest manifest("synth", a.out / "manifest.json");
    manifest.seed(a.seed);
    manifest.config() = {{"scenes", a.scenes},       {"width", a.width},       {"height", a.height},
                         {"objects", a.objects},     {"classes", a.classes},   {"noise_sigma", a.noise},
                         {"blur_radius", a.blur},    {"failure_mode", a.failure_mode},
                         {"tight", a.counts.tight},  {"partial", a.counts.partial},
                         {"loose", a.counts.loose},  {"background", a.counts.background}};

    ts2c::TrapParams params;
    params.image_w = a.width;
    params.image_h = a.height;
    params.max_objects = a.objects;
    params.num_classes = a.classes;
    params.noise_sigma = a.noise;
    params.blur_radius = a.blur;
    params.linked = a.failure_mode == "linked";

    for (std::size_t i = 0; i < a.scenes; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "scene_%04zu", i);
        const std::uint64_t scene_seed = ts2c::derive_seed(a.seed, i);
        const ts2c::SceneSpec spec = ts2c::make_trap_spec(scene_seed, params);
        const ts2c::ProposalFamily family =
            ts2c::gen_proposals(spec, a.counts, ts2c::JitterParams{}, ts2c::derive_seed(scene_seed, 1));
        for (const auto& w : family.warnings) {
            std::cerr << "warning: " << name << ": " << w << "\n";
        }
        const ts2c::SceneBundle bundle = ts2c::make_bundle(spec, family, name);
        ts2c::write_bundle(a.out / name, bundle, ts2c::to_json(spec));
        for (const auto& f : {std::string("spec.json"), std::string("gt.csv"), std::string("proposals.csv")}) {
            manifest.output(a.out / name / f);
        }
        for (const auto& m : bundle.maps) {
            manifest.output(a.out / name / ts2c::map_file_name(m.class_id()));
        }
    }
    manifest.write();
    return 0;
}

// ---------------------------------------------------------------------------

struct ScoreArgs {
    fs::path corpus;
    fs::path map;
    fs::path boxes;
    int map_class = 0;
    std::string image_id;
    fs::path out;
    std::string manifest;
    ts2c::ScoringConfig cfg;
    std::string empty_ring = "zero";
    std::string baseline;
    unsigned threads = 0;
};

int run_score(ScoreArgs a)
{
    a.cfg.empty_ring = parse_policy(a.empty_ring);
    try {
        a.cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const bool corpus_mode = !a.corpus.empty();
    if (corpus_mode == (!a.map.empty() || !a.boxes.empty())) {
        throw UsageError("give either --corpus or both --map and --boxes");
    }
    if (!corpus_mode && (a.map.empty() || a.boxes.empty())) {
        throw UsageError("--map and --boxes must be given together");
    }
    const ts2c::Ranking ranking = a.baseline == "purity" ? ts2c::Ranking::purity_only : ts2c::Ranking::objectness;

    std::vector<ts2c::CandidatePool> pools;
    Manifest manifest("score", manifest_for(a.out, a.manifest));
    manifest.config() = config_json(a.cfg);
    manifest.config()["ranking"] = ranking == ts2c::Ranking::objectness ? "P_I-P_S" : "P_I";
    if (corpus_mode) {
        manifest.input(a.corpus.string());
        std::vector<std::string> warnings;
        for (const auto& b : ts2c::read_corpus(a.corpus, &warnings)) {
            auto p = ts2c::pools_for_scene(b, a.cfg, ranking, a.threads);
            pools.insert(pools.end(), p.begin(), p.end());
        }
        for (const auto& w : warnings) {
            std::cerr << "warning: " << w << "\n";
        }
    } else {
        manifest.input(a.map.string());
        manifest.input(a.boxes.string());
        const ts2c::ConfMap m = ts2c::read_confmap(a.map, a.map_class);
        const auto records = ts2c::read_boxes(a.boxes);
        std::vector<ts2c::Box> boxes;
        for (const auto& r : records) {
            boxes.push_back(r.box);
        }
        std::string image_id = a.image_id;
        if (image_id.empty()) {
            image_id = records.empty() ? a.map.stem().string() : records.front().image_id;
        }
        ts2c::SceneBundle b;
        b.image_id = image_id;
        b.width = m.width();
        b.height = m.height();
        b.gt.image_id = image_id;
        b.gt.entries.push_back(ts2c::GtEntry{m.class_id(), m.bounds()});
        b.maps.push_back(m);
        b.proposals = std::move(boxes);
        pools = ts2c::pools_for_scene(b, a.cfg, ranking, a.threads);
    }
    ensure_parent(a.out);
    ts2c::write_scored(pools, a.out);
    manifest.output(a.out);
    manifest.write();
    return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    fs::path pools;
    fs::path detections;
    fs::path gt;
    fs::path corpus;
    std::vector<std::size_t> ks = ts2c::default_recall_ks();
    std::string mode = "11point";
    std::vector<double> ratios{1.1, 1.2, 1.3, 1.4};
    std::vector<double> fracs{0.3, 0.5, 0.7, 1.0};
    ts2c::ScoringConfig cfg;
    std::string empty_ring = "zero";
    fs::path out;
    fs::path report;
    std::string manifest;
    unsigned threads = 0;
};

void finish_eval(const std::string& sub, const EvalArgs& a, const json& result, const std::string& report)
{
    Manifest manifest("eval " + sub, manifest_for(a.out, a.manifest));
    for (const auto* p : {&a.pools, &a.detections, &a.gt, &a.corpus}) {
        if (!p->empty()) {
            manifest.input(p->string());
        }
    }
    ensure_parent(a.out);
    ts2c::detail::write_file(a.out, result.dump(2) + "\n");
    manifest.output(a.out);
    if (!a.report.empty()) {
        ensure_parent(a.report);
        ts2c::detail::write_file(a.report, report);
        manifest.output(a.report);
    }
    if (sub == "sweep") {
        manifest.config() = {{"ratios", a.ratios}, {"fractions", a.fracs}, {"base", config_json(a.cfg)}};
    } else if (sub == "recall") {
        manifest.config() = {{"ks", a.ks}, {"iou_threshold", ts2c::kMatchIou}};
    } else if (sub == "map") {
        manifest.config() = {{"mode", a.mode}, {"iou_threshold", ts2c::kMatchIou}};
    } else {
        manifest.config() = {{"iou_threshold", ts2c::kMatchIou}};
    }
    manifest.write();
}

/// Lists (image, class) pairs present on one side only.
std::string id_mismatches(const std::vector<ts2c::CandidatePool>& pools, const std::vector<ts2c::GroundTruth>& gts)
{
    std::set<std::pair<std::string, int>> have;
    for (const auto& p : pools) {
        have.insert({p.image_id, p.class_id});
    }
    std::set<std::pair<std::string, int>> want;
    for (const auto& g : gts) {
        for (const int c : g.classes()) {
            want.insert({g.image_id, c});
        }
    }
    std::string out;
    for (const auto& w : want) {
        if (!have.contains(w)) {
            out += "  no pool for image " + w.first + " class " + std::to_string(w.second) + "\n";
        }
    }
    for (const auto& h : have) {
        if (!want.contains(h)) {
            out += "  pool for image " + h.first + " class " + std::to_string(h.second) + " has no ground truth\n";
        }
    }
    return out;
}

int run_eval(const std::string& sub, EvalArgs a)
{
    if (sub == "recall" || sub == "corloc") {
        if (a.pools.empty() || a.gt.empty()) {
            throw UsageError("eval " + sub + " needs --pools and --gt");
        }
        const auto pools = ts2c::read_scored(a.pools);
        const auto gts = load_gt(a.gt);
        const std::string mismatch = id_mismatches(pools, gts);
        if (!mismatch.empty()) {
            std::cerr << "warning: mismatched ids:\n" << mismatch;
        }
        if (sub == "recall") {
            const auto curve = ts2c::recall_at_k(pools, gts, a.ks);
            std::string tsv = "k\trecall\n";
            for (std::size_t i = 0; i < curve.ks.size(); ++i) {
                tsv += std::to_string(curve.ks[i]) + "\t" + ts2c::detail::fmt9(curve.recall[i]) + "\n";
            }
            finish_eval(sub, a, ts2c::to_json(curve), tsv);
        } else {
            const auto top = ts2c::top1(pools);
            const auto r = ts2c::corloc(top, gts);
            std::string tsv = "class\tcorloc\n";
            for (const auto& [c, v] : r.per_class) {
                tsv += std::to_string(c) + "\t" + ts2c::detail::fmt9(v) + "\n";
            }
            tsv += "mean\t" + ts2c::detail::fmt9(r.mean) + "\n";
            finish_eval(sub, a, ts2c::to_json(r), tsv);
        }
        return 0;
    }
    if (sub == "map") {
        if (a.detections.empty() || a.gt.empty()) {
            throw UsageError("eval map needs --detections and --gt");
        }
        const auto mode = a.mode == "area" ? ts2c::ApMode::area : ts2c::ApMode::eleven_point;
        std::vector<ts2c::Detection> dets;
        if (first_line(a.detections) == ts2c::kScoredHeader) {
            // Every pool entry becomes a detection scored by its objectness.
            for (const auto& p : ts2c::read_scored(a.detections)) {
                for (const auto& e : p.entries) {
                    dets.push_back(ts2c::Detection{p.image_id, p.class_id, e.box, e.objectness});
                }
            }
        } else {
            const auto records = ts2c::read_boxes(a.detections);
            for (const auto& r : records) {
                if (!r.score) {
                    throw ts2c::IoError(ts2c::IoErrc::parse_error, a.detections.string(),
                                        "detections need a score column");
                }
            }
            dets = ts2c::to_detections(records);
        }
        const auto gts = load_gt(a.gt);
        const auto r = ts2c::voc_ap(dets, gts, mode);
        std::string tsv = "class\tap\n";
        for (const auto& [c, v] : r.per_class) {
            tsv += std::to_string(c) + "\t" + ts2c::detail::fmt9(v) + "\n";
        }
        tsv += "mAP\t" + ts2c::detail::fmt9(r.map) + "\n";
        finish_eval(sub, a, ts2c::to_json(r), tsv);
        return 0;
    }
    // sweep
    if (a.corpus.empty()) {
        throw UsageError("eval sweep needs --corpus");
    }
    a.cfg.empty_ring = parse_policy(a.empty_ring);
    for (const double r : a.ratios) {
        if (!(r >= 1.0)) {
            throw UsageError("--ratios entries must be >= 1");
        }
    }
    for (const double f : a.fracs) {
        if (!(f > 0.0 && f <= 1.0)) {
            throw UsageError("--fracs entries must be in (0, 1]");
        }
    }
    const auto corpus = ts2c::read_corpus(a.corpus);
    const auto table = ts2c::ablation_sweep(corpus, a.ratios, a.fracs, a.cfg, a.threads);
    finish_eval(sub, a, ts2c::to_json(table), ts2c::sweep_report(table));
    return 0;
}

// ---------------------------------------------------------------------------

struct MaskArgs {
    std::vector<fs::path> cams;
    std::vector<int> cam_classes;
    fs::path saliency;
    fs::path out;
    fs::path stats;
    std::string manifest;
    ts2c::MaskConfig cfg;
};

int run_mask(const MaskArgs& a)
{
    try {
        a.cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (!a.cam_classes.empty() && a.cam_classes.size() != a.cams.size()) {
        throw UsageError("--cam-classes must list one class per --cam");
    }
    std::vector<ts2c::ConfMap> cams;
    for (std::size_t i = 0; i < a.cams.size(); ++i) {
        const int hint = a.cam_classes.empty() ? static_cast<int>(i) : a.cam_classes[i];
        ts2c::RawMap raw = ts2c::read_raw_map(a.cams[i], hint);
        if (!a.cam_classes.empty()) {
            raw.class_id = hint;
        }
        try {
            cams.push_back(ts2c::normalize_cam(raw));
        } catch (const std::invalid_argument& e) {
            throw ts2c::IoError(ts2c::IoErrc::out_of_range, a.cams[i].string(), e.what());
        }
    }
    const ts2c::ConfMap saliency = ts2c::read_confmap(a.saliency);
    ts2c::PseudoMask mask;
    try {
        mask = ts2c::generate_mask(cams, saliency, a.cfg);
    } catch (const std::invalid_argument& e) {
        throw ts2c::IoError(ts2c::IoErrc::validation, a.saliency.string(), e.what());
    }
    const auto stats = ts2c::mask_stats(mask);

    Manifest manifest("mask", manifest_for(a.out, a.manifest));
    manifest.config() = {{"fg_threshold", a.cfg.fg_threshold},
                         {"bg_threshold", a.cfg.bg_threshold},
                         {"cam_normalization", "per-map max"},
                         {"ignore_code", ts2c::kIgnoreCode}};
    for (const auto& c : a.cams) {
        manifest.input(c.string());
    }
    manifest.input(a.saliency.string());
    ensure_parent(a.out);
    ts2c::write_mask(mask, a.out);
    manifest.output(a.out);
    const fs::path stats_path = a.stats.empty() ? fs::path(a.out.string() + ".stats.json") : a.stats;
    ensure_parent(stats_path);
    ts2c::detail::write_file(stats_path, ts2c::to_json(stats).dump(2) + "\n");
    manifest.output(stats_path);
    if (stats.all_ignore()) {
        std::cerr << "warning: every pixel of the mask is ignored\n";
    }
    manifest.write();
    return 0;
}

// ---------------------------------------------------------------------------

struct OverlayArgs {
    fs::path map;
    fs::path boxes;
    int map_class = 0;
    fs::path out;
    std::size_t top = 0;
};

int run_overlay(const OverlayArgs& a)
{
    const ts2c::ConfMap m = ts2c::read_confmap(a.map, a.map_class);
    std::vector<ts2c::Box> boxes;
    {
        if (first_line(a.boxes) == ts2c::kScoredHeader) {
            for (const auto& p : ts2c::read_scored(a.boxes)) {
                for (const auto& e : p.entries) {
                    boxes.push_back(e.box);
                }
            }
        } else {
            for (const auto& r : ts2c::read_boxes(a.boxes)) {
                boxes.push_back(r.box);
            }
        }
    }
    if (a.top > 0 && boxes.size() > a.top) {
        boxes.erase(boxes.begin() + static_cast<std::ptrdiff_t>(a.top), boxes.end());
    }
    ensure_parent(a.out);
    ts2c::write_overlay(m, boxes, a.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"ts2c: tight-box mining with surrounding segmentation context"};
    app.set_version_flag("--version", TS2C_VERSION);
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a corpus of synthetic part-trap scenes");
    synth_cmd->add_option("--out", synth.out, "output corpus directory")->required();
    synth_cmd->add_option("--scenes", synth.scenes, "number of scenes")->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "corpus seed")->capture_default_str();
    synth_cmd->add_option("--width", synth.width)->check(CLI::Range(32, 4096))->capture_default_str();
    synth_cmd->add_option("--height", synth.height)->check(CLI::Range(32, 4096))->capture_default_str();
    synth_cmd->add_option("--objects", synth.objects, "max objects per scene")->check(CLI::Range(1, 4))->capture_default_str();
    synth_cmd->add_option("--classes", synth.classes)->check(CLI::Range(1, 254))->capture_default_str();
    synth_cmd->add_option("--noise", synth.noise, "Gaussian noise sigma")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    synth_cmd->add_option("--blur", synth.blur, "box blur radius")->check(CLI::Range(0, 64))->capture_default_str();
    synth_cmd->add_option("--failure-mode", synth.failure_mode)
        ->check(CLI::IsMember({"none", "linked"}))
        ->capture_default_str();
    synth_cmd->add_option("--tight", synth.counts.tight)->capture_default_str();
    synth_cmd->add_option("--partial", synth.counts.partial)->capture_default_str();
    synth_cmd->add_option("--loose", synth.counts.loose)->capture_default_str();
    synth_cmd->add_option("--background", synth.counts.background)->capture_default_str();

    ScoreArgs score;
    auto* score_cmd = app.add_subcommand("score", "rank proposals by P_I - P_S and emit candidate pools");
    score_cmd->add_option("--corpus", score.corpus, "scene bundle or directory of bundles");
    score_cmd->add_option("--map", score.map, "single confidence map (TSCF or PGM)");
    score_cmd->add_option("--class", score.map_class, "class id for a PGM --map");
    score_cmd->add_option("--boxes", score.boxes, "proposal box CSV for --map");
    score_cmd->add_option("--image-id", score.image_id);
    score_cmd->add_option("--out", score.out, "scored CSV")->required();
    score_cmd->add_option("--manifest", score.manifest);
    score_cmd->add_option("--ratio", score.cfg.enlarge_ratio, "enlargement ratio")->capture_default_str();
    score_cmd->add_option("--top-frac", score.cfg.top_fraction, "conditional-average fraction")->capture_default_str();
    score_cmd->add_option("--pool", score.cfg.pool_size, "pool size")->capture_default_str();
    score_cmd->add_option("--empty-ring", score.empty_ring)->check(CLI::IsMember({"zero", "skip"}))->capture_default_str();
    score_cmd->add_option("--baseline", score.baseline, "'purity' ranks by P_I only")->check(CLI::IsMember({"purity"}));
    score_cmd->add_option("--threads", score.threads, "0 = all cores")->capture_default_str();

    EvalArgs eval;
    std::string eval_sub;
    auto* eval_cmd = app.add_subcommand("eval", "detection metrics and the ablation sweep");
    eval_cmd->require_subcommand(1);
    const auto common_eval = [&](CLI::App* c) {
        c->add_option("--out", eval.out, "metrics JSON")->required();
        c->add_option("--report", eval.report, "tab-separated report");
        c->add_option("--manifest", eval.manifest);
        c->final_callback([&eval_sub, c] { eval_sub = c->get_name(); });
    };
    auto* recall_cmd = eval_cmd->add_subcommand("recall", "recall@k of candidate pools");
    recall_cmd->add_option("--pools", eval.pools, "scored CSV");
    recall_cmd->add_option("--gt", eval.gt, "gt CSV or corpus directory");
    recall_cmd->add_option("--ks", eval.ks)->delimiter(',');
    common_eval(recall_cmd);
    auto* corloc_cmd = eval_cmd->add_subcommand("corloc", "CorLoc of each pool's top box");
    corloc_cmd->add_option("--pools", eval.pools, "scored CSV");
    corloc_cmd->add_option("--gt", eval.gt, "gt CSV or corpus directory");
    common_eval(corloc_cmd);
    auto* map_cmd = eval_cmd->add_subcommand("map", "VOC average precision");
    map_cmd->add_option("--detections", eval.detections, "box CSV with score column, or scored pools");
    map_cmd->add_option("--gt", eval.gt, "gt CSV or corpus directory");
    map_cmd->add_option("--mode", eval.mode)->check(CLI::IsMember({"11point", "area"}))->capture_default_str();
    common_eval(map_cmd);
    auto* sweep_cmd = eval_cmd->add_subcommand("sweep", "recall@1 over enlargement ratios x fractions");
    sweep_cmd->add_option("--corpus", eval.corpus);
    sweep_cmd->add_option("--ratios", eval.ratios)->delimiter(',')->capture_default_str();
    sweep_cmd->add_option("--fracs", eval.fracs)->delimiter(',')->capture_default_str();
    sweep_cmd->add_option("--pool", eval.cfg.pool_size)->capture_default_str();
    sweep_cmd->add_option("--empty-ring", eval.empty_ring)->check(CLI::IsMember({"zero", "skip"}))->capture_default_str();
    sweep_cmd->add_option("--threads", eval.threads)->capture_default_str();
    common_eval(sweep_cmd);

    MaskArgs mask;
    auto* mask_cmd = app.add_subcommand("mask", "pseudo segmentation mask from CAMs and saliency");
    mask_cmd->add_option("--cam", mask.cams, "class activation map, one per image label")->required();
    mask_cmd->add_option("--cam-classes", mask.cam_classes, "class id per --cam")->delimiter(',');
    mask_cmd->add_option("--saliency", mask.saliency)->required();
    mask_cmd->add_option("--out", mask.out, "mask PGM")->required();
    mask_cmd->add_option("--stats", mask.stats, "stats JSON (default <out>.stats.json)");
    mask_cmd->add_option("--manifest", mask.manifest);
    mask_cmd->add_option("--fg-thresh", mask.cfg.fg_threshold)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    mask_cmd->add_option("--bg-thresh", mask.cfg.bg_threshold)->check(CLI::Range(0.0, 1.0))->capture_default_str();

    OverlayArgs overlay;
    auto* overlay_cmd = app.add_subcommand("overlay", "draw boxes over a map for inspection (PGM)");
    overlay_cmd->add_option("--map", overlay.map)->required();
    overlay_cmd->add_option("--class", overlay.map_class);
    overlay_cmd->add_option("--boxes", overlay.boxes, "box or scored CSV")->required();
    overlay_cmd->add_option("--top", overlay.top, "draw only the first N boxes");
    overlay_cmd->add_option("--out", overlay.out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (synth_cmd->parsed()) {
            return run_synth(synth);
        }
        if (score_cmd->parsed()) {
            return run_score(score);
        }
        if (eval_cmd->parsed()) {
            return run_eval(eval_sub, eval);
        }
        if (mask_cmd->parsed()) {
            return run_mask(mask);
        }
        if (overlay_cmd->parsed()) {
            return run_overlay(overlay);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ts2c::IoError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
