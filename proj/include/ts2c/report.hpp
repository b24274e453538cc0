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

// JSON and tab-separated renderings of metric results.

#include <string>

#include "json.hpp"
#include "ts2c/eval.hpp"
#include "ts2c/io.hpp"
#include "ts2c/pseudomask.hpp"
#include "ts2c/synth.hpp"

namespace ts2c {

inline nlohmann::json box_json(const Box& b) { return {b.x0(), b.y0(), b.x1(), b.y1()}; }

inline nlohmann::json to_json(const SceneSpec& s)
{
    nlohmann::json objs = nlohmann::json::array();
    for (const auto& o : s.objects) {
        objs.push_back({{"class_id", o.class_id},
                        {"gt_box", box_json(o.gt_box)},
                        {"part_box", box_json(o.part_box)},
                        {"body_conf", o.body_conf},
                        {"part_conf", o.part_conf},
                        {"bg_conf", o.bg_conf}});
    }
    return {{"image_w", s.image_w},         {"image_h", s.image_h},           {"objects", objs},
            {"noise_sigma", s.noise_sigma}, {"blur_radius", s.blur_radius},   {"seed", s.seed},
            {"linked_instances", s.linked_instances}};
}

inline nlohmann::json to_json(const MaskStats& s)
{
    nlohmann::json counts = nlohmann::json::object();
    nlohmann::json fractions = nlohmann::json::object();
    for (int code = 0; code < 256; ++code) {
        if (s.counts[code] > 0) {
            counts[std::to_string(code)] = s.counts[code];
            fractions[std::to_string(code)] = s.fraction(static_cast<std::uint8_t>(code));
        }
    }
    return {{"total", s.total},
            {"counts", counts},
            {"fractions", fractions},
            {"background_fraction", s.fraction(kBackgroundCode)},
            {"ignore_fraction", s.fraction(kIgnoreCode)},
            {"foreground_pixels", s.foreground()},
            {"all_ignore", s.all_ignore()}};
}

inline nlohmann::json to_json(const RecallCurve& c)
{
    nlohmann::json points = nlohmann::json::array();
    for (std::size_t i = 0; i < c.ks.size(); ++i) {
        points.push_back({{"k", c.ks[i]}, {"recall", c.recall[i]}, {"recalled", c.recalled[i]}});
    }
    return {{"points", points}, {"upper_bound_at_1", c.upper_bound}, {"total_instances", c.total_instances}};
}

inline nlohmann::json to_json(const CorLocResult& r)
{
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [c, v] : r.per_class) {
        per[std::to_string(c)] = v;
    }
    return {{"per_class", per}, {"mean", r.mean}};
}

inline nlohmann::json to_json(const ApResult& r)
{
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [c, v] : r.per_class) {
        per[std::to_string(c)] = v;
    }
    return {{"per_class", per},
            {"mAP", r.map},
            {"iou_threshold", r.iou_threshold},
            {"mode", r.mode == ApMode::eleven_point ? "11point" : "area"},
            {"undefined_classes", r.undefined_classes}};
}

inline nlohmann::json to_json(const SweepCell& c)
{
    return {{"ratio", c.ratio},
            {"fraction", c.fraction},
            {"recall_at_1", c.recall_at_1},
            {"mean_top1_objectness", c.mean_top1_objectness},
            {"default", c.is_default}};
}

inline nlohmann::json to_json(const SweepTable& t)
{
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : t.cells) {
        cells.push_back(to_json(c));
    }
    return {{"cells", cells},
            {"purity_baseline",
             {{"recall_at_1", t.purity_baseline.recall_at_1},
              {"mean_top1_objectness", t.purity_baseline.mean_top1_objectness}}},
            {"images", t.images},
            {"instances", t.instances}};
}

/// Tab-separated report, one row per cell plus the purity-only baseline.
inline std::string sweep_report(const SweepTable& t)
{
    std::string out = "ranking\tratio\tfraction\trecall_at_1\tmean_top1_objectness\tdefault\n";
    for (const auto& c : t.cells) {
        out += "P_I-P_S\t" + detail::fmt9(c.ratio) + "\t" + detail::fmt9(c.fraction) + "\t" +
               detail::fmt9(c.recall_at_1) + "\t" + detail::fmt9(c.mean_top1_objectness) + "\t" +
               (c.is_default ? "*" : "") + "\n";
    }
    out += "P_I\t-\t-\t" + detail::fmt9(t.purity_baseline.recall_at_1) + "\t" +
           detail::fmt9(t.purity_baseline.mean_top1_objectness) + "\t\n";
    return out;
}

}  // namespace ts2c
