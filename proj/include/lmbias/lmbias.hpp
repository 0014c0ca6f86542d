//
// Copyright 2026 The lmbias Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef LMBIAS_LMBIAS_HPP
#define LMBIAS_LMBIAS_HPP

#include "lmbias/balance.hpp"
#include "lmbias/corpus.hpp"
#include "lmbias/error.hpp"
#include "lmbias/metrics.hpp"
#include "lmbias/presets.hpp"
#include "lmbias/probe.hpp"
#include "lmbias/probe_io.hpp"
#include "lmbias/records_io.hpp"
#include "lmbias/report_io.hpp"
#include "lmbias/scoring.hpp"
#include "lmbias/text.hpp"
#include "lmbias/tfidf.hpp"

#endif  // LMBIAS_LMBIAS_HPP
