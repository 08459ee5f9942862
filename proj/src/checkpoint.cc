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

#include "xir/checkpoint.h"

#include <bit>
#include <cmath>
#include <optional>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace xir {

namespace {

constexpr const char* kMagic = "TTM";
constexpr const char* kVersion = "v1";

void write_block(std::ofstream& out, const double* data, std::size_t count) {
  std::vector<unsigned char> buf(count * 4);
  for (std::size_t i = 0; i < count; ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(data[i]));
    buf[4 * i + 0] = static_cast<unsigned char>(bits & 0xff);
    buf[4 * i + 1] = static_cast<unsigned char>((bits >> 8) & 0xff);
    buf[4 * i + 2] = static_cast<unsigned char>((bits >> 16) & 0xff);
    buf[4 * i + 3] = static_cast<unsigned char>((bits >> 24) & 0xff);
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

void read_block(std::ifstream& in, double* data, std::size_t count,
                const std::string& name) {
  std::vector<unsigned char> buf(count * 4);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
    throw IoError("checkpoint truncated in block '" + name + "'");
  }
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t bits = std::uint32_t{buf[4 * i]} | (std::uint32_t{buf[4 * i + 1]} << 8) |
                               (std::uint32_t{buf[4 * i + 2]} << 16) |
                               (std::uint32_t{buf[4 * i + 3]} << 24);
    const float f = std::bit_cast<float>(bits);
    if (!std::isfinite(f)) throw IoError("non-finite value in checkpoint block '" + name + "'");
    data[i] = static_cast<double>(f);
  }
}

template <typename Fn>
void for_each_block(TwoTowerModel& model, Fn&& fn) {
  fn(model.user_embeddings().data(), model.user_embeddings().size(), std::string("user_embeddings"));
  fn(model.item_embeddings().data(), model.item_embeddings().size(), std::string("item_embeddings"));
  auto& tables = model.feature_tables();
  for (std::size_t f = 0; f < tables.size(); ++f) {
    fn(tables[f].data(), tables[f].size(), "feature_table_" + std::to_string(f));
  }
  auto& layers = model.tower().layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    fn(layers[l].weight.data(), layers[l].weight.size(), "tower_layer_" + std::to_string(l) + "_weight");
    fn(layers[l].bias.data(), layers[l].bias.size(), "tower_layer_" + std::to_string(l) + "_bias");
  }
}

std::optional<ItemTowerConfig> parse_tower_token(const std::string& token) {
  if (token == "none") return std::nullopt;
  // mlp:<widths>:<act>:id<d>:feat<...>
  std::vector<std::string> parts;
  std::stringstream ss(token);
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.size() != 5 || parts[0] != "mlp" || parts[3].rfind("id", 0) != 0 ||
      parts[4].rfind("feat", 0) != 0) {
    throw IoError("malformed tower spec in checkpoint header: " + token);
  }
  ItemTowerConfig cfg;
  try {
    cfg.mlp = parse_mlp_spec(parts[1] + ":" + parts[2]);
    cfg.id_dim = static_cast<Index>(std::stol(parts[3].substr(2)));
    const std::string feats = parts[4].substr(4);
    if (feats != "-") {
      std::stringstream fs(feats);
      std::string f;
      while (std::getline(fs, f, ',')) {
        const auto x = f.find('x');
        if (x == std::string::npos) throw IoError("bad feature entry");
        cfg.feature_cardinality.push_back(static_cast<Index>(std::stol(f.substr(0, x))));
        cfg.feature_dim = static_cast<Index>(std::stol(f.substr(x + 1)));
      }
    }
  } catch (const std::exception&) {
    throw IoError("malformed tower spec in checkpoint header: " + token);
  }
  return cfg;
}

}  // namespace

std::string format_tower_token(const TwoTowerModel& model) {
  if (!model.has_tower()) return "none";
  const auto& cfg = *model.tower_config();
  std::string token = "mlp:" + format_mlp_spec(cfg.mlp) + ":id" + std::to_string(cfg.id_dim) + ":feat";
  if (cfg.feature_cardinality.empty()) return token + "-";
  for (std::size_t f = 0; f < cfg.feature_cardinality.size(); ++f) {
    if (f) token += ',';
    token += std::to_string(cfg.feature_cardinality[f]) + "x" + std::to_string(cfg.feature_dim);
  }
  return token;
}

void save_checkpoint(const std::string& path, const TwoTowerModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out << kMagic << ' ' << kVersion << ' ' << model.num_users() << ' ' << model.num_items()
      << ' ' << model.dim() << ' ' << format_tower_token(model) << '\n';
  for_each_block(const_cast<TwoTowerModel&>(model),
                 [&](double* data, Eigen::Index n, const std::string&) {
                   write_block(out, data, static_cast<std::size_t>(n));
                 });
  if (!out) throw IoError("write failed: " + path);
}

TwoTowerModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint: " + path);
  std::string header;
  if (!std::getline(in, header)) throw IoError("checkpoint has no header: " + path);
  std::stringstream hs(header);
  std::string magic, version, tower_token;
  long m = 0, n = 0, k = 0;
  if (!(hs >> magic >> version >> m >> n >> k >> tower_token) || magic != kMagic) {
    throw IoError("bad checkpoint header in block 'header': " + header);
  }
  if (version != kVersion) throw IoError("unsupported checkpoint version " + version);
  if (m <= 0 || n <= 0 || k <= 0) throw IoError("bad checkpoint dimensions in block 'header'");

  TwoTowerModel model(static_cast<Index>(m), static_cast<Index>(n), static_cast<Index>(k),
                      parse_tower_token(tower_token), 0);
  for_each_block(model, [&](double* data, Eigen::Index count, const std::string& name) {
    read_block(in, data, static_cast<std::size_t>(count), name);
  });
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IoError("trailing bytes after last checkpoint block");
  }
  return model;
}

void round_parameters_to_float(TwoTowerModel& model) {
  for_each_block(model, [](double* data, Eigen::Index n, const std::string&) {
    for (Eigen::Index i = 0; i < n; ++i) data[i] = static_cast<double>(static_cast<float>(data[i]));
  });
}

}  // namespace xir
