#include "parcelingam/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "parcelingam/toml_lite.hpp"

namespace parcelingam {

double round_sig(double x, int digits) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
  return std::strtod(buf, nullptr);
}

namespace {

Json json_number(double x) { return Json(round_sig(x)); }

Json json_matrix(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(json_number(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Json to_json(const CausalOrderingMatrix& m) {
  Json out;
  out["variable_ids"] = m.variable_ids();
  Json rows = Json::array();
  for (int i = 0; i < m.d(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.d(); ++j) row.push_back(m.at(i, j));
    rows.push_back(std::move(row));
  }
  out["entries"] = std::move(rows);
  return out;
}

Json to_json(const PlausibilityRecord& record) {
  Json out;
  out["subset"] = record.subset;
  out["p_value"] = json_number(record.p_value);
  out["component_log_p_sum"] = json_number(record.component_log_p_sum);
  out["ordering"] = to_json(record.ordering);
  return out;
}

Json to_json(const Algorithm1Trace& trace) {
  Json out;
  out["k_head"] = trace.lists.k_head;
  out["k_tail"] = trace.lists.k_tail;
  out["stop_reason"] = to_string(trace.stop_reason);
  Json head = Json::object();
  for (const auto& [id, ps] : trace.head_p_values) {
    Json list = Json::array();
    for (double p : ps) list.push_back(json_number(p));
    head[std::to_string(id)] = std::move(list);
  }
  out["head_p_values"] = std::move(head);
  Json tail = Json::object();
  for (const auto& [id, ps] : trace.tail_p_values) {
    Json list = Json::array();
    for (double p : ps) list.push_back(json_number(p));
    tail[std::to_string(id)] = std::move(list);
  }
  out["tail_p_values"] = std::move(tail);
  out["warnings"] = trace.warnings;
  return out;
}

Json to_json(const DiscoveryResult& result) {
  Json out;
  out["ordering"] = to_json(result.ordering);
  out["has_topological_extension"] = has_topological_extension(result.ordering);
  Json strengths = Json::array();
  for (const auto& [pair, value] : result.strengths) {
    Json entry;
    entry["i"] = pair.first;
    entry["j"] = pair.second;
    entry["value"] = json_number(value);
    strengths.push_back(std::move(entry));
  }
  out["strengths"] = std::move(strengths);
  Json records = Json::array();
  for (const auto& record : result.subset_records) records.push_back(to_json(record));
  out["plausibility_records"] = std::move(records);
  out["trace"] = to_json(result.trace);
  return out;
}

Json to_json(const ScoreReport& report) {
  Json out;
  out["precision"] = report.precision ? Json(json_number(*report.precision)) : Json(nullptr);
  out["recall"] = json_number(report.recall);
  out["f_measure"] = json_number(report.f_measure);
  out["decided_pairs"] = report.decided_pairs;
  out["correct_pairs"] = report.correct_pairs;
  out["total_true_pairs"] = report.total_true_pairs;
  out["excluded_pairs"] = report.excluded_pairs;
  out["rmse"] = report.rmse ? Json(json_number(*report.rmse)) : Json(nullptr);
  out["strength_count"] = report.strength_count;
  return out;
}

Json to_json(const SemGroundTruth& truth) {
  Json out;
  out["schema"] = 1;
  out["variable_ids"] = truth.true_ordering.variable_ids();
  out["true_ordering"] = to_json(truth.true_ordering);
  out["true_b"] = json_matrix(truth.true_B);
  out["permutation"] = truth.permutation;
  Json pf = Json::array();
  for (int i = 0; i < truth.path_free.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < truth.path_free.cols(); ++j)
      row.push_back(static_cast<bool>(truth.path_free(i, j)));
    pf.push_back(std::move(row));
  }
  out["path_free"] = std::move(pf);
  return out;
}

std::string sem_spec_to_toml(const SemSpec& spec) {
  toml::Document doc;
  doc[""]["schema"] = toml::Value{std::int64_t{1}};
  doc[""]["name"] = toml::Value{spec.name};
  doc[""]["seed"] = toml::Value{static_cast<std::int64_t>(spec.seed)};

  doc["dims"]["observed"] = toml::Value{static_cast<std::int64_t>(spec.d)};
  doc["dims"]["latent"] = toml::Value{static_cast<std::int64_t>(spec.q)};

  toml::Array edges;
  for (int j = 0; j < spec.d; ++j)
    for (int i = 0; i < spec.d; ++i)
      if (spec.B(i, j) != 0.0)
        edges.push_back(toml::Value{toml::Array{
            toml::Value{static_cast<std::int64_t>(i + 1)},
            toml::Value{static_cast<std::int64_t>(j + 1)},
            toml::Value{spec.B(i, j)}}});
  doc["model"]["edges"] = toml::Value{std::move(edges)};

  toml::Array confounders;
  for (int k = 0; k < spec.q; ++k) {
    toml::Array children;
    toml::Array weights;
    for (int i = 0; i < spec.d; ++i)
      if (spec.Lambda(i, k) != 0.0) {
        children.push_back(toml::Value{static_cast<std::int64_t>(i + 1)});
        weights.push_back(toml::Value{spec.Lambda(i, k)});
      }
    confounders.push_back(toml::Value{toml::Array{
        toml::Value{static_cast<std::int64_t>(k + 1)},
        toml::Value{std::move(children)}, toml::Value{std::move(weights)}}});
  }
  doc["model"]["confounders"] = toml::Value{std::move(confounders)};

  toml::Array e_names;
  for (auto family : spec.e_families)
    e_names.push_back(toml::Value{std::string(to_string(family))});
  doc["noise"]["e"] = toml::Value{std::move(e_names)};
  toml::Array f_names;
  for (auto family : spec.f_families)
    f_names.push_back(toml::Value{std::string(to_string(family))});
  doc["noise"]["f"] = toml::Value{std::move(f_names)};

  return toml::serialize(doc, {"dims", "model", "noise"});
}

SemSpec sem_spec_from_toml(const std::string& text) {
  const toml::Document doc = toml::parse(text);
  auto require = [&](const std::string& section, const std::string& key) -> const toml::Value& {
    auto sit = doc.find(section);
    if (sit == doc.end())
      throw ParseError("missing [" + section + "] section");
    auto kit = sit->second.find(key);
    if (kit == sit->second.end())
      throw ParseError("missing key '" + key + "' in [" + section + "]");
    return kit->second;
  };

  SemSpec spec;
  spec.d = static_cast<int>(require("dims", "observed").as_int());
  spec.q = static_cast<int>(require("dims", "latent").as_int());
  if (spec.d < 2) throw ParseError("dims.observed must be >= 2");
  if (spec.q < 0) throw ParseError("dims.latent must be >= 0");
  spec.seed = static_cast<std::uint64_t>(require("", "seed").as_int());
  if (doc.count("") && doc.at("").count("name")) spec.name = doc.at("").at("name").as_string();

  spec.B = Eigen::MatrixXd::Zero(spec.d, spec.d);
  spec.Lambda = Eigen::MatrixXd::Zero(spec.d, spec.q);

  for (const auto& edge : require("model", "edges").as_array()) {
    const auto& triple = edge.as_array();
    if (triple.size() != 3) throw ParseError("edge entries must be [child, parent, weight]");
    const int child = static_cast<int>(triple[0].as_int());
    const int parent = static_cast<int>(triple[1].as_int());
    if (child < 1 || child > spec.d || parent < 1 || parent > spec.d)
      throw ParseError("edge index out of range");
    spec.B(child - 1, parent - 1) = triple[2].as_float();
  }

  for (const auto& conf : require("model", "confounders").as_array()) {
    const auto& triple = conf.as_array();
    if (triple.size() != 3)
      throw ParseError("confounder entries must be [latent, children, weights]");
    const int latent = static_cast<int>(triple[0].as_int());
    if (latent < 1 || latent > spec.q) throw ParseError("confounder index out of range");
    const auto& children = triple[1].as_array();
    const auto& weights = triple[2].as_array();
    if (children.size() != weights.size())
      throw ParseError("confounder children/weights length mismatch");
    for (size_t i = 0; i < children.size(); ++i) {
      const int child = static_cast<int>(children[i].as_int());
      if (child < 1 || child > spec.d) throw ParseError("confounder child out of range");
      spec.Lambda(child - 1, latent - 1) = weights[i].as_float();
    }
  }

  for (const auto& name : require("noise", "e").as_array())
    spec.e_families.push_back(noise_family_from_string(name.as_string()));
  for (const auto& name : require("noise", "f").as_array())
    spec.f_families.push_back(noise_family_from_string(name.as_string()));

  spec.validate();
  return spec;
}

}  // namespace parcelingam
