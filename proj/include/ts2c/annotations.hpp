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

#include <set>
#include <string>
#include <vector>

#include "ts2c/confmap.hpp"
#include "ts2c/geometry.hpp"

namespace ts2c {

struct GtEntry {
    int class_id = 0;
    Box box;
    /// Carried through from CSV for real data; metrics do not consume it.
    bool ignore = false;

    friend bool operator==(const GtEntry&, const GtEntry&) = default;
};

struct GroundTruth {
    std::string image_id;
    std::vector<GtEntry> entries;

    std::set<int> classes() const
    {
        std::set<int> out;
        for (const auto& e : entries) {
            out.insert(e.class_id);
        }
        return out;
    }

    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

/// A scored box attributed to an image and class.
struct Detection {
    std::string image_id;
    int class_id = 0;
    Box box;
    double score = 0.0;
};

/// One image worth of inputs: per-class confidence maps (ascending class
/// id), its annotations, and the proposals to rank.
struct SceneBundle {
    std::string image_id;
    int width = 0;
    int height = 0;
    std::vector<ConfMap> maps;
    GroundTruth gt;
    std::vector<Box> proposals;

    const ConfMap* map_for(int class_id) const
    {
        for (const auto& m : maps) {
            if (m.class_id() == class_id) {
                return &m;
            }
        }
        return nullptr;
    }
};

}  // namespace ts2c
