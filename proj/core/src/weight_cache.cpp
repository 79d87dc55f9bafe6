/*
 * Copyright 2026 The gibbs-ibp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "detail.hpp"
#include "gibbs_ibp/error.hpp"
#include "gibbs_ibp/gibbs_weights.hpp"

namespace gibbs_ibp {

namespace {

constexpr int kCacheVersion = 1;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

nlohmann::json provenance_to_json(const WeightProvenance& provenance) {
  return std::visit(Overloaded{
                        [](const ClosedFormProvenance&) { return nlohmann::json{{"kind", "closed-form"}}; },
                        [](const SeriesProvenance&) { return nlohmann::json{{"kind", "small-n-series"}}; },
                        [](const QuadratureProvenance&) { return nlohmann::json{{"kind", "quadrature"}}; },
                        [](const MonteCarloProvenance& mc) {
                          return nlohmann::json{{"kind", "monte-carlo"},
                                                {"samples", mc.samples},
                                                {"seed", mc.seed},
                                                {"raw_log_v11", mc.raw_log_v11},
                                                {"v11_se", mc.v11_se},
                                                {"max_last_row_rel_se", mc.max_last_row_rel_se}};
                        },
                    },
                    provenance);
}

WeightProvenance provenance_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "closed-form") return ClosedFormProvenance{};
  if (kind == "small-n-series") return SeriesProvenance{};
  if (kind == "quadrature") return QuadratureProvenance{};
  if (kind == "monte-carlo") {
    MonteCarloProvenance mc;
    mc.samples = j.at("samples").get<std::uint64_t>();
    mc.seed = j.at("seed").get<std::uint64_t>();
    mc.raw_log_v11 = j.at("raw_log_v11").get<double>();
    mc.v11_se = j.at("v11_se").get<double>();
    mc.max_last_row_rel_se = j.at("max_last_row_rel_se").get<double>();
    return mc;
  }
  throw NumericError("weight cache: unknown provenance '" + kind + "'");
}

}  // namespace

std::string weight_cache_key(const GibbsModel& model, std::size_t n_max) {
  std::string key = model.describe() + "|n_max=" + std::to_string(n_max);
  if (!model.closed_form()) {
    const McConfig& mc = model.mc();
    if (mc.method == NggWeightMethod::kQuadrature) {
      key += "|quadrature";
    } else {
      key += "|mc(samples=" + std::to_string(mc.samples) + ",seed=" + std::to_string(mc.seed) + ")";
    }
  }
  return key;
}

void save_weight_table(const WeightTable& table, const std::string& path) {
  nlohmann::json j;
  j["version"] = kCacheVersion;
  j["alpha"] = table.alpha;
  j["n_max"] = table.n_max();
  j["provenance"] = provenance_to_json(table.provenance);
  j["log_v"] = table.log_v.raw();
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("weight cache: cannot write " + tmp);
    out << j.dump();
  }
  std::filesystem::rename(tmp, path);
}

WeightTable load_weight_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("weight cache: cannot read " + path);
  const nlohmann::json j = nlohmann::json::parse(in);
  if (j.at("version").get<int>() != kCacheVersion) {
    throw NumericError("weight cache: unsupported version in " + path);
  }
  const std::size_t n_max = j.at("n_max").get<std::size_t>();
  WeightTable table{TriangularArray(n_max, kNegInf), j.at("alpha").get<double>(),
                    provenance_from_json(j.at("provenance"))};
  const auto values = j.at("log_v").get<std::vector<double>>();
  if (values.size() != table.log_v.raw().size()) throw NumericError("weight cache: entry count mismatch in " + path);
  std::size_t i = 0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    for (double& v : table.log_v.row(n)) v = values[i++];
  }
  return table;
}

std::shared_ptr<const WeightTable> cached_weight_table(const GibbsModel& model, std::size_t n_max,
                                                       const std::string& directory) {
  if (directory.empty() || model.closed_form()) {
    return std::make_shared<const WeightTable>(build_weight_table(model, n_max));
  }
  const std::string key = weight_cache_key(model, n_max);
  std::filesystem::create_directories(directory);
  const std::filesystem::path path =
      std::filesystem::path(directory) / (detail::git_blob_sha1(key).substr(0, 20) + ".json");
  if (std::filesystem::exists(path)) return std::make_shared<const WeightTable>(load_weight_table(path.string()));
  auto table = std::make_shared<const WeightTable>(build_weight_table(model, n_max));
  save_weight_table(*table, path.string());
  return table;
}

}  // namespace gibbs_ibp
