// Copyright 2026 The privgraph Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef PRIVGRAPH_HPP_
#define PRIVGRAPH_HPP_

#include "privgraph/behavior.hpp"
#include "privgraph/belief_propagation.hpp"
#include "privgraph/classifier.hpp"
#include "privgraph/error.hpp"
#include "privgraph/evasion_noise.hpp"
#include "privgraph/game_lp.hpp"
#include "privgraph/graph.hpp"
#include "privgraph/labels.hpp"
#include "privgraph/linear_propagation.hpp"
#include "privgraph/metrics.hpp"
#include "privgraph/noise_mechanism.hpp"
#include "privgraph/pipeline.hpp"
#include "privgraph/prior.hpp"
#include "privgraph/rng.hpp"
#include "privgraph/simplex.hpp"
#include "privgraph/synthetic.hpp"
#include "privgraph/text_io.hpp"

#endif  // PRIVGRAPH_HPP_
