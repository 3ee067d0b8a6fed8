/*
 * Copyright 2026 The ipweval Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Umbrella header for the whole library.

#include "ipweval/deployment.hpp"
#include "ipweval/experiments.hpp"
#include "ipweval/metrics.hpp"
#include "ipweval/parallel.hpp"
#include "ipweval/report.hpp"
#include "ipweval/rng.hpp"
#include "ipweval/stats.hpp"
#include "ipweval/svg.hpp"
#include "ipweval/synthetic.hpp"
#include "ipweval/validate.hpp"
