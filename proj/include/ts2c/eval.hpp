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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ts2c/annotations.hpp"
#include "ts2c/geometry.hpp"
#include "ts2c/scoring.hpp"

namespace ts2c {

/// Matching threshold; a proposal hits a gt box when iou >= this value.
inline constexpr double kMatchIou = 0.5;

inline bool hits(const Box& candidate, const Box& gt) { return iou(candidate, gt) >= kMatchIou; }

enum class Ranking {
    objectness,   ///< P_I - P_S
    purity_only,  ///< P_I
};

/// Scores every proposal of the bundle against each annotated class's map
/// and keeps the per-class pools, ascending class id.
inline std::vector<CandidatePool> pools_for_scene(const SceneBundle& bundle, const ScoringConfig& cfg,
                                                  Ranking ranking = Ranking::objectness, unsigned threads = 1)
{
    cfg.validate();
    std::vector<CandidatePool> pools;
    for (const int class_id : bundle.gt.classes()) {
        const ConfMap* m = bundle.map_for(class_id);
        if (m == nullptr) {
            throw std::invalid_argument("pools_for_scene: image " + bundle.image_id + " has no map for class " +
                                        std::to_string(class_id));
        }
        const IntegralImage ii(*m);
        const auto scored = ranking == Ranking::objectness ? score_batch(*m, ii, bundle.proposals, cfg, threads)
                                                           : purity_only_batch(*m, ii, bundle.proposals);
        CandidatePool pool = build_pool(scored, cfg, bundle.image_id);
        pool.class_id = class_id;
        pools.push_back(std::move(pool));
    }
    return pools;
}

/// First entry of every non-empty pool, as detections.
inline std::vector<Detection> top1(std::span<const CandidatePool> pools)
{
    std::vector<Detection> out;
    for (const auto& p : pools) {
        if (!p.entries.empty()) {
            const auto& e = p.entries.front();
            out.push_back(Detection{p.image_id, p.class_id, e.box, e.objectness});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Recall

struct RecallCurve {
    std::vector<std::size_t> ks;
    std::vector<double> recall;
    std::vector<std::size_t> recalled;
    /// Best achievable recall@1 when each (image, class) contributes one box.
    double upper_bound = 0.0;
    std::size_t total_instances = 0;
};

inline std::vector<std::size_t> default_recall_ks() { return {1, 5, 10, 50, 100, 200}; }

inline RecallCurve recall_at_k(std::span<const CandidatePool> pools, std::span<const GroundTruth> gts,
                               std::span<const std::size_t> ks)
{
    std::map<std::pair<std::string, int>, const CandidatePool*> index;
    for (const auto& p : pools) {
        index[{p.image_id, p.class_id}] = &p;
    }

    RecallCurve curve;
    curve.ks.assign(ks.begin(), ks.end());
    curve.recalled.assign(ks.size(), 0);
    std::set<std::pair<std::string, int>> pairs;
    for (const auto& gt : gts) {
        for (const auto& e : gt.entries) {
            ++curve.total_instances;
            pairs.insert({gt.image_id, e.class_id});
            const auto it = index.find({gt.image_id, e.class_id});
            if (it == index.end()) {
                continue;
            }
            const auto& entries = it->second->entries;
            // Rank of the first hitting entry; recalled for every k above it.
            std::optional<std::size_t> first_hit;
            for (std::size_t r = 0; r < entries.size(); ++r) {
                if (hits(entries[r].box, e.box)) {
                    first_hit = r;
                    break;
                }
            }
            for (std::size_t i = 0; i < ks.size(); ++i) {
                if (first_hit && *first_hit < ks[i]) {
                    ++curve.recalled[i];
                }
            }
        }
    }
    curve.recall.resize(ks.size(), 0.0);
    if (curve.total_instances > 0) {
        for (std::size_t i = 0; i < ks.size(); ++i) {
            curve.recall[i] = static_cast<double>(curve.recalled[i]) / static_cast<double>(curve.total_instances);
        }
        curve.upper_bound = static_cast<double>(pairs.size()) / static_cast<double>(curve.total_instances);
    }
    return curve;
}

// ---------------------------------------------------------------------------
// CorLoc

struct CorLocResult {
    std::map<int, double> per_class;
    double mean = 0.0;
};

/// Per class, the fraction of images containing it whose top box hits any
/// instance of the class; mean over classes.
inline CorLocResult corloc(std::span<const Detection> top, std::span<const GroundTruth> gts)
{
    std::map<std::pair<std::string, int>, const Detection*> index;
    for (const auto& d : top) {
        index[{d.image_id, d.class_id}] = &d;
    }
    std::map<int, std::pair<std::size_t, std::size_t>> tally;  // class -> (hits, images)
    for (const auto& gt : gts) {
        for (const int c : gt.classes()) {
            auto& [hit, images] = tally[c];
            ++images;
            const auto it = index.find({gt.image_id, c});
            if (it == index.end()) {
                continue;
            }
            const bool ok = std::any_of(gt.entries.begin(), gt.entries.end(), [&](const GtEntry& e) {
                return e.class_id == c && hits(it->second->box, e.box);
            });
            hit += ok ? 1 : 0;
        }
    }
    CorLocResult out;
    double sum = 0.0;
    for (const auto& [c, t] : tally) {
        const double v = static_cast<double>(t.first) / static_cast<double>(t.second);
        out.per_class[c] = v;
        sum += v;
    }
    if (!tally.empty()) {
        out.mean = sum / static_cast<double>(tally.size());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Average precision

enum class ApMode {
    eleven_point,  ///< VOC 2007: mean of max precision at recall 0, 0.1, ..., 1
    area,          ///< area under the monotone precision envelope
};

struct ApResult {
    std::map<int, double> per_class;
    double map = 0.0;
    double iou_threshold = kMatchIou;
    ApMode mode = ApMode::eleven_point;
    /// Classes that have detections but no gt instances; excluded from map.
    std::vector<int> undefined_classes;
};

/// Precision/recall points of one class after greedy matching.
struct PrCurve {
    std::vector<double> precision;
    std::vector<double> recall;
};

/// Detections of one class, matched greedily by descending score; each gt
/// instance can be claimed once, later hits on it count as false positives.
inline PrCurve match_class(std::span<const Detection> dets, std::span<const GroundTruth> gts, int class_id)
{
    std::map<std::string, std::vector<Box>> gt_boxes;
    std::size_t positives = 0;
    for (const auto& gt : gts) {
        for (const auto& e : gt.entries) {
            if (e.class_id == class_id) {
                gt_boxes[gt.image_id].push_back(e.box);
                ++positives;
            }
        }
    }
    std::vector<const Detection*> order;
    for (const auto& d : dets) {
        if (d.class_id == class_id) {
            order.push_back(&d);
        }
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const Detection* a, const Detection* b) { return a->score > b->score; });

    std::map<std::string, std::vector<bool>> claimed;
    for (const auto& [img, boxes] : gt_boxes) {
        claimed[img].assign(boxes.size(), false);
    }
    PrCurve pr;
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (const Detection* d : order) {
        bool is_tp = false;
        const auto it = gt_boxes.find(d->image_id);
        if (it != gt_boxes.end()) {
            double best = -1.0;
            std::size_t best_j = 0;
            for (std::size_t j = 0; j < it->second.size(); ++j) {
                const double o = iou(d->box, it->second[j]);
                if (o > best) {
                    best = o;
                    best_j = j;
                }
            }
            auto& used = claimed[d->image_id];
            if (best >= kMatchIou && !used[best_j]) {
                used[best_j] = true;
                is_tp = true;
            }
        }
        tp += is_tp ? 1 : 0;
        fp += is_tp ? 0 : 1;
        pr.precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
        pr.recall.push_back(positives == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(positives));
    }
    return pr;
}

inline double average_precision(const PrCurve& pr, ApMode mode)
{
    if (mode == ApMode::eleven_point) {
        double ap = 0.0;
        for (int i = 0; i <= 10; ++i) {
            const double t = i / 10.0;
            double p = 0.0;
            for (std::size_t j = 0; j < pr.recall.size(); ++j) {
                if (pr.recall[j] >= t) {
                    p = std::max(p, pr.precision[j]);
                }
            }
            ap += p / 11.0;
        }
        return ap;
    }
    std::vector<double> mrec{0.0};
    std::vector<double> mpre{0.0};
    mrec.insert(mrec.end(), pr.recall.begin(), pr.recall.end());
    mpre.insert(mpre.end(), pr.precision.begin(), pr.precision.end());
    mrec.push_back(1.0);
    mpre.push_back(0.0);
    for (std::size_t i = mpre.size() - 1; i > 0; --i) {
        mpre[i - 1] = std::max(mpre[i - 1], mpre[i]);
    }
    double ap = 0.0;
    for (std::size_t i = 1; i < mrec.size(); ++i) {
        if (mrec[i] != mrec[i - 1]) {
            ap += (mrec[i] - mrec[i - 1]) * mpre[i];
        }
    }
    return ap;
}

inline ApResult voc_ap(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                       ApMode mode = ApMode::eleven_point)
{
    std::set<int> gt_classes;
    for (const auto& gt : gts) {
        for (const auto& e : gt.entries) {
            gt_classes.insert(e.class_id);
        }
    }
    std::set<int> det_classes;
    for (const auto& d : dets) {
        det_classes.insert(d.class_id);
    }

    ApResult out;
    out.mode = mode;
    for (const int c : det_classes) {
        if (!gt_classes.contains(c)) {
            out.undefined_classes.push_back(c);
        }
    }
    double sum = 0.0;
    for (const int c : gt_classes) {
        const double ap = average_precision(match_class(dets, gts, c), mode);
        out.per_class[c] = ap;
        sum += ap;
    }
    if (!gt_classes.empty()) {
        out.map = sum / static_cast<double>(gt_classes.size());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ablation sweep

struct SweepCell {
    double ratio = 1.2;
    double fraction = 0.5;
    double recall_at_1 = 0.0;
    /// Mean objectness of the top-ranked proposal over all (image, class).
    double mean_top1_objectness = 0.0;
    bool is_default = false;
};

struct SweepTable {
    std::vector<SweepCell> cells;  ///< ratio-major, in the order requested
    SweepCell purity_baseline;     ///< P_I ranking, ratio/fraction unused
    std::size_t images = 0;
    std::size_t instances = 0;
};

namespace detail {

inline SweepCell summarize(std::span<const CandidatePool> pools, std::span<const GroundTruth> gts)
{
    const std::size_t k1[] = {1};
    const RecallCurve rc = recall_at_k(pools, gts, k1);
    SweepCell cell;
    cell.recall_at_1 = rc.recall.front();
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& p : pools) {
        if (!p.entries.empty()) {
            sum += p.entries.front().objectness;
            ++n;
        }
    }
    cell.mean_top1_objectness = n == 0 ? 0.0 : sum / static_cast<double>(n);
    return cell;
}

inline bool near(double a, double b) { return std::abs(a - b) < 1e-12; }

}  // namespace detail

inline SweepTable ablation_sweep(std::span<const SceneBundle> corpus, std::span<const double> ratios,
                                 std::span<const double> fractions, const ScoringConfig& base = {},
                                 unsigned threads = 1)
{
    std::vector<GroundTruth> gts;
    SweepTable table;
    for (const auto& b : corpus) {
        gts.push_back(b.gt);
        gts.back().image_id = b.image_id;
        table.instances += b.gt.entries.size();
    }
    table.images = corpus.size();

    const auto run = [&](const ScoringConfig& cfg, Ranking ranking) {
        std::vector<CandidatePool> pools;
        for (const auto& b : corpus) {
            auto p = pools_for_scene(b, cfg, ranking, threads);
            pools.insert(pools.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
        }
        return detail::summarize(pools, gts);
    };

    for (const double r : ratios) {
        for (const double f : fractions) {
            ScoringConfig cfg = base;
            cfg.enlarge_ratio = r;
            cfg.top_fraction = f;
            SweepCell cell = run(cfg, Ranking::objectness);
            cell.ratio = r;
            cell.fraction = f;
            cell.is_default = detail::near(r, ScoringConfig{}.enlarge_ratio) &&
                              detail::near(f, ScoringConfig{}.top_fraction);
            table.cells.push_back(cell);
        }
    }
    table.purity_baseline = run(base, Ranking::purity_only);
    table.purity_baseline.ratio = 0.0;
    table.purity_baseline.fraction = 0.0;
    return table;
}

// ---------------------------------------------------------------------------
// Paired bootstrap over images

struct BootstrapResult {
    double gap = 0.0;    ///< (sum a - sum b) / sum totals on the full sample
    double lower = 0.0;  ///< one-sided lower bound at the requested confidence
    std::size_t resamples = 0;
};

/// Resamples images with replacement and reports the lower quantile of the
/// pooled recall gap between two rankings.
inline BootstrapResult paired_bootstrap(std::span<const std::size_t> hits_a, std::span<const std::size_t> hits_b,
                                        std::span<const std::size_t> totals, std::size_t resamples,
                                        double confidence, std::uint64_t seed)
{
    if (hits_a.size() != hits_b.size() || hits_a.size() != totals.size() || totals.empty()) {
        throw std::invalid_argument("paired_bootstrap: mismatched or empty samples");
    }
    const auto gap_of = [&](auto&& index_at) {
        double a = 0, b = 0, t = 0;
        for (std::size_t i = 0; i < totals.size(); ++i) {
            const std::size_t j = index_at(i);
            a += static_cast<double>(hits_a[j]);
            b += static_cast<double>(hits_b[j]);
            t += static_cast<double>(totals[j]);
        }
        return t == 0 ? 0.0 : (a - b) / t;
    };
    BootstrapResult out;
    out.resamples = resamples;
    out.gap = gap_of([](std::size_t i) { return i; });

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, totals.size() - 1);
    std::vector<double> gaps;
    gaps.reserve(resamples);
    for (std::size_t r = 0; r < resamples; ++r) {
        gaps.push_back(gap_of([&](std::size_t) { return pick(rng); }));
    }
    std::sort(gaps.begin(), gaps.end());
    if (!gaps.empty()) {
        const auto idx = static_cast<std::size_t>(std::floor((1.0 - confidence) * static_cast<double>(gaps.size())));
        out.lower = gaps[std::min(idx, gaps.size() - 1)];
    }
    return out;
}

}  // namespace ts2c
