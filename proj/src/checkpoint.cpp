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

#include "xtfc/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "xtfc/io.hpp"

namespace xtfc {
namespace {

constexpr char kMagic[8] = {'X', 'T', 'F', 'C', 'C', 'K', 'P', 'T'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t& pos) {
  require(pos + 8 <= in.size(), "checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  pos += 8;
  return v;
}

void put_f64(std::string& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

double get_f64(const std::string& in, std::size_t& pos) {
  return std::bit_cast<double>(get_u64(in, pos));
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& c) {
  const Eigen::Index N = c.elm.hidden_count();
  const Eigen::Index n = c.elm.state_dim();
  require_dim(c.beta.size(), N, "checkpoint: beta");
  require_dim(c.elm.biases.size(), N, "checkpoint: biases");

  nlohmann::json header = {
      {"format_version", c.format_version},
      {"problem", to_json(c.problem)},
      {"network",
       {{"state_dim", n},
        {"hidden", N},
        {"seed", c.elm.seed},
        {"weight_scale", c.elm.weight_scale},
        {"activation", to_string(c.elm.activation)}}},
      {"policy_mode", to_string(c.policy_mode)},
      {"train", to_json(c.train, /*include_threads=*/false)},
      {"final_loss", c.final_loss},
      {"payload", {"input_weights", "biases", "beta"}},
  };
  const std::string text = header.dump(2);

  std::string out(kMagic, sizeof kMagic);
  put_u64(out, text.size());
  out += text;
  put_u64(out, static_cast<std::uint64_t>(8 * (N * n + 2 * N)));
  for (Eigen::Index j = 0; j < N; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) put_f64(out, c.elm.input_weights(j, k));
  }
  for (Eigen::Index j = 0; j < N; ++j) put_f64(out, c.elm.biases[j]);
  for (Eigen::Index j = 0; j < N; ++j) put_f64(out, c.beta[j]);
  return out;
}

Checkpoint parse_checkpoint(const std::string& bytes) {
  require(bytes.size() >= sizeof kMagic &&
              std::memcmp(bytes.data(), kMagic, sizeof kMagic) == 0,
          "checkpoint: bad magic (not an xtfc checkpoint)");
  std::size_t pos = sizeof kMagic;
  const std::uint64_t header_len = get_u64(bytes, pos);
  require(pos + header_len <= bytes.size(), "checkpoint: truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(pos, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("checkpoint: malformed header: ") + e.what());
  }
  pos += header_len;

  Checkpoint c;
  try {
    c.format_version = header.at("format_version").get<int>();
    require(c.format_version == Checkpoint::kFormatVersion,
            "checkpoint: unsupported format_version " +
                std::to_string(c.format_version));
    c.problem = problem_config_from_json(header.at("problem"));
    c.policy_mode = parse_policy_mode(header.at("policy_mode").get<std::string>());
    c.train = train_config_from_json(header.at("train"));
    c.final_loss = header.at("final_loss").get<double>();
    const auto& net = header.at("network");
    const auto n = net.at("state_dim").get<Eigen::Index>();
    const auto N = net.at("hidden").get<Eigen::Index>();
    require(n >= 1 && N >= 1, "checkpoint: invalid network dimensions");

    const std::uint64_t payload_len = get_u64(bytes, pos);
    require(payload_len == static_cast<std::uint64_t>(8 * (N * n + 2 * N)),
            "checkpoint: payload length does not match N and n");
    require(pos + payload_len == bytes.size(),
            "checkpoint: payload length does not match file size");

    Mat W(N, n);
    for (Eigen::Index j = 0; j < N; ++j) {
      for (Eigen::Index k = 0; k < n; ++k) W(j, k) = get_f64(bytes, pos);
    }
    Vec b(N);
    for (Eigen::Index j = 0; j < N; ++j) b[j] = get_f64(bytes, pos);
    c.beta.resize(N);
    for (Eigen::Index j = 0; j < N; ++j) c.beta[j] = get_f64(bytes, pos);

    c.elm = make_elm(std::move(W), std::move(b), net.at("seed").get<std::uint64_t>(),
                     net.at("weight_scale").get<double>());
    c.elm.activation = parse_activation(net.at("activation").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("checkpoint: ") + e.what());
  }

  const OcpInstance problem = make_problem(c.problem);
  require_dim(c.elm.state_dim(), problem.state_dim(), "checkpoint: network input");
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_text_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

}  // namespace xtfc
