// Copyright 2026 The AHPI Ranking Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "ahpi/em.hpp"
#include "ahpi/errors.hpp"
#include "ahpi/eval.hpp"
#include "ahpi/graph_trim.hpp"
#include "ahpi/io.hpp"
#include "ahpi/model.hpp"
#include "ahpi/name_cluster.hpp"
#include "ahpi/rank.hpp"
#include "ahpi/rng.hpp"
#include "ahpi/synth.hpp"
#include "ahpi/version.hpp"
