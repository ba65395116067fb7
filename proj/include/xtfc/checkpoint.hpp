// Copyright 2026 The xtfc-hjb Authors.
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

#include <filesystem>
#include <string>

#include "xtfc/network.hpp"
#include "xtfc/policy.hpp"
#include "xtfc/problem.hpp"
#include "xtfc/train.hpp"

namespace xtfc {

/// Trained model plus everything needed to rebuild its problem.
///
/// On disk:
///   8 bytes   magic "XTFCCKPT"
///   u64 LE    header length, then the UTF-8 JSON header
///   u64 LE    payload length, then W (N x n, row-major), b (N), beta (N)
///             as little-endian IEEE-754 doubles
struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  int format_version = kFormatVersion;
  ProblemConfig problem;
  ElmParams elm;
  Vec beta;
  PolicyMode policy_mode = PolicyMode::Unconstrained;
  TrainConfig train;
  double final_loss = 0.0;

  ValueNetwork network() const { return ValueNetwork(elm, beta); }
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
/// Throws InvalidArgument on a malformed or mismatched file.
Checkpoint parse_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace xtfc
