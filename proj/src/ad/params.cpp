// src/ad/params.cpp

// Copyright 2026 The consep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "consep/ad/params.hpp"

#include "consep/error.hpp"

namespace consep::ad {

ParamSnapshot snapshot(Parameterized& model) {
  ParamSnapshot snap;
  for (auto& p : model.parameters()) snap.entries.emplace_back(p.name, p.tensor.value());
  for (auto& b : model.buffers()) snap.entries.emplace_back(b.name, *b.array);
  return snap;
}

void restore(Parameterized& model, const ParamSnapshot& snap) {
  auto params = model.parameters();
  auto bufs = model.buffers();
  if (params.size() + bufs.size() != snap.entries.size())
    throw ValidationError("restore: snapshot has " + std::to_string(snap.entries.size()) +
                          " entries, model has " + std::to_string(params.size() + bufs.size()));
  std::vector<Array*> targets;
  std::vector<const std::string*> names;
  for (auto& p : params) {
    targets.push_back(&p.tensor.mutable_value());
    names.push_back(&p.name);
  }
  for (auto& b : bufs) {
    targets.push_back(b.array);
    names.push_back(&b.name);
  }
  // Validate everything before touching the model.
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& [name, value] = snap.entries[i];
    if (name != *names[i] || value.shape() != targets[i]->shape())
      throw ValidationError("restore: entry '" + name + "' " + to_string(value.shape()) +
                            " does not match model entry '" + *names[i] + "' " +
                            to_string(targets[i]->shape()));
  }
  for (std::size_t i = 0; i < targets.size(); ++i) *targets[i] = snap.entries[i].second;
}

}  // namespace consep::ad
