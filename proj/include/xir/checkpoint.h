// Copyright 2026 The XIR Authors.
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

#ifndef XIR_CHECKPOINT_H_
#define XIR_CHECKPOINT_H_

#include <string>

#include "xir/model.h"

namespace xir {

// Checkpoint layout:
//   TTM v1 <M> <N> <k> <tower_spec>\n
// followed by little-endian float32 blocks in declaration order: user
// embeddings, item embeddings, feature tables, then weight and bias of each
// tower layer. tower_spec is "none" or
//   mlp:<w1,w2,...>:<activation>:id<id_dim>:feat<card>x<dim>,...
// ("feat-" when there are no categorical features).
//
// Parameters are narrowed to float32 on save. A model whose parameters are
// already float-representable round-trips bit-exactly.
void save_checkpoint(const std::string& path, const TwoTowerModel& model);
TwoTowerModel load_checkpoint(const std::string& path);

std::string format_tower_token(const TwoTowerModel& model);

// Rounds every parameter to the nearest float32 value.
void round_parameters_to_float(TwoTowerModel& model);

}  // namespace xir

#endif  // XIR_CHECKPOINT_H_
