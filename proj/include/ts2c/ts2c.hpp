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

#include "ts2c/annotations.hpp"
#include "ts2c/confmap.hpp"
#include "ts2c/eval.hpp"
#include "ts2c/geometry.hpp"
#include "ts2c/io.hpp"
#include "ts2c/pseudomask.hpp"
#include "ts2c/report.hpp"
#include "ts2c/scoring.hpp"
#include "ts2c/synth.hpp"
