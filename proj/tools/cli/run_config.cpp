#include "run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"

namespace bbabc::cli {
namespace {

using Json = nlohmann::json;

void reject_unknown(const Json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!known.contains(key)) throw ConfigError(fmt::format("unknown key \"{}\" in {}", key, where));
  }
}

template <typename T>
T get(const Json& obj, const char* key, const T& fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(fmt::format("{}.{} has the wrong type", where, key));
  }
}

CategoryValues alpha_from(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != kCategoryCount) {
    throw ConfigError(fmt::format("{} must be an array of {} numbers", where, kCategoryCount));
  }
  CategoryValues v{};
  for (std::size_t k = 0; k < kCategoryCount; ++k) {
    if (!j[k].is_number()) throw ConfigError(fmt::format("{}[{}] is not a number", where, k));
    v[k] = j[k].get<double>();
  }
  return v;
}

ColumnMapping columns_from(const Json& j) {
  if (!j.is_object()) throw ConfigError("data.columns must be an object");
  reject_unknown(j,
                 {"delimiter", "examiner", "test_case", "mated", "mated_labels", "nonmated_labels", "category",
                  "value", "decision", "category_labels"},
                 "data.columns");
  ColumnMapping m;
  const std::string where = "data.columns";
  const std::string delim = get<std::string>(j, "delimiter", ",", where);
  if (delim == "\\t" || delim == "tab") {
    m.delimiter = '\t';
  } else if (delim.size() == 1) {
    m.delimiter = delim[0];
  } else {
    throw ConfigError("data.columns.delimiter must be a single character");
  }
  m.examiner_column = get<std::string>(j, "examiner", m.examiner_column, where);
  m.test_case_column = get<std::string>(j, "test_case", m.test_case_column, where);
  m.mated_column = get<std::string>(j, "mated", m.mated_column, where);
  m.mated_labels = get<std::vector<std::string>>(j, "mated_labels", m.mated_labels, where);
  m.nonmated_labels = get<std::vector<std::string>>(j, "nonmated_labels", m.nonmated_labels, where);
  if (j.contains("value") || j.contains("decision")) {
    if (!j.contains("value") || !j.contains("decision")) {
      throw ConfigError("data.columns needs both \"value\" and \"decision\" when either is given");
    }
    m.value_column = get<std::string>(j, "value", "", where);
    m.decision_column = get<std::string>(j, "decision", "", where);
    m.category_column.reset();
  }
  if (j.contains("category")) m.category_column = get<std::string>(j, "category", "", where);
  if (j.contains("category_labels")) {
    for (const auto& [text, cat] : get<std::map<std::string, std::string>>(j, "category_labels", {}, where)) {
      const auto c = parse_category(cat);
      if (!c) throw ConfigError(fmt::format("data.columns.category_labels: unknown category \"{}\"", cat));
      m.category_labels[text] = *c;
    }
  }
  return m;
}

Json columns_to(const ColumnMapping& m) {
  Json j;
  j["delimiter"] = m.delimiter == '\t' ? std::string("\\t") : std::string(1, m.delimiter);
  j["examiner"] = m.examiner_column;
  j["test_case"] = m.test_case_column;
  j["mated"] = m.mated_column;
  j["mated_labels"] = m.mated_labels;
  j["nonmated_labels"] = m.nonmated_labels;
  if (m.category_column) j["category"] = *m.category_column;
  if (m.value_column) j["value"] = *m.value_column;
  if (m.decision_column) j["decision"] = *m.decision_column;
  Json labels = Json::object();
  for (const auto& [text, c] : m.category_labels) labels[text] = std::string(label(c));
  j["category_labels"] = labels;
  return j;
}

std::vector<double> as_vector(const CategoryValues& v) { return {v.begin(), v.end()}; }

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

RunConfig RunConfig::from_json_text(const std::string& text, const std::filesystem::path& base_dir) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc,
                 {"data", "prior", "acceptance", "adjustment", "ranking", "sims", "seed", "workers", "out", "mass",
                  "confidence", "write_draws", "examiners", "spill", "validate", "verify", "partition"},
                 "config");

  RunConfig c;
  c.base_dir = base_dir;
  if (doc.contains("data")) {
    const Json& d = doc["data"];
    if (!d.is_object()) throw ConfigError("data must be an object");
    reject_unknown(d, {"path", "columns"}, "data");
    c.data.path = get<std::string>(d, "path", "", "data");
    if (d.contains("columns")) c.data.columns = columns_from(d["columns"]);
  }
  if (doc.contains("prior")) {
    const Json& p = doc["prior"];
    reject_unknown(p, {"alpha_mated", "alpha_nonmated", "mu", "sigma"}, "prior");
    if (p.contains("alpha_mated")) c.prior.alpha_mated = alpha_from(p["alpha_mated"], "prior.alpha_mated");
    if (p.contains("alpha_nonmated")) c.prior.alpha_nonmated = alpha_from(p["alpha_nonmated"], "prior.alpha_nonmated");
    c.prior.mu = get<double>(p, "mu", c.prior.mu, "prior");
    c.prior.sigma = get<double>(p, "sigma", c.prior.sigma, "prior");
  }
  if (doc.contains("acceptance")) {
    const Json& a = doc["acceptance"];
    reject_unknown(a, {"tolerance", "distance", "kernel"}, "acceptance");
    c.acceptance.tolerance_quantile = get<double>(a, "tolerance", c.acceptance.tolerance_quantile, "acceptance");
    if (get<std::string>(a, "distance", "euclidean", "acceptance") != "euclidean") {
      throw ConfigError("acceptance.distance must be \"euclidean\"");
    }
    if (get<std::string>(a, "kernel", "epanechnikov", "acceptance") != "epanechnikov") {
      throw ConfigError("acceptance.kernel must be \"epanechnikov\"");
    }
  }
  if (doc.contains("adjustment")) {
    const Json& a = doc["adjustment"];
    reject_unknown(a, {"enabled", "backend", "transform", "ratio_min", "ratio_max", "clamp", "min_positive_weights"},
                   "adjustment");
    AdjustmentOptions& o = c.adjustment.options;
    c.adjustment.enabled = get<bool>(a, "enabled", true, "adjustment");
    const std::string backend = get<std::string>(a, "backend", "linear", "adjustment");
    if (backend == "linear") {
      o.backend = RegressionBackend::Linear;
    } else if (backend == "neuralnet") {
      o.backend = RegressionBackend::NeuralNet;
    } else {
      throw ConfigError("adjustment.backend must be \"linear\" or \"neuralnet\"");
    }
    const std::string transform = get<std::string>(a, "transform", "logit", "adjustment");
    if (transform == "logit") {
      o.transform = Transform::Logit;
    } else if (transform == "identity") {
      o.transform = Transform::Identity;
    } else {
      throw ConfigError("adjustment.transform must be \"logit\" or \"identity\"");
    }
    o.ratio_min = get<double>(a, "ratio_min", o.ratio_min, "adjustment");
    o.ratio_max = get<double>(a, "ratio_max", o.ratio_max, "adjustment");
    o.clamp = get<double>(a, "clamp", o.clamp, "adjustment");
    o.min_positive_weights = get<std::size_t>(a, "min_positive_weights", o.min_positive_weights, "adjustment");
  }
  const std::string ranking = get<std::string>(doc, "ranking", "own", "config");
  if (ranking == "own") {
    c.ranking = ExaminerRanking::Own;
  } else if (ranking == "population") {
    c.ranking = ExaminerRanking::Population;
  } else {
    throw ConfigError("ranking must be \"own\" or \"population\"");
  }
  c.sims = get<std::size_t>(doc, "sims", c.sims, "config");
  c.seed = get<std::uint64_t>(doc, "seed", c.seed, "config");
  c.workers = get<unsigned>(doc, "workers", c.workers, "config");
  c.out = get<std::string>(doc, "out", c.out, "config");
  c.mass = get<double>(doc, "mass", c.mass, "config");
  c.confidence = get<double>(doc, "confidence", c.confidence, "config");
  c.write_draws = get<bool>(doc, "write_draws", c.write_draws, "config");
  c.examiners = get<bool>(doc, "examiners", c.examiners, "config");
  c.spill = get<bool>(doc, "spill", c.spill, "config");
  if (doc.contains("validate")) {
    reject_unknown(doc["validate"], {"runs"}, "validate");
    c.datagen_runs = get<std::size_t>(doc["validate"], "runs", c.datagen_runs, "validate");
  }
  if (doc.contains("verify")) {
    const Json& v = doc["verify"];
    reject_unknown(v, {"scenario", "slack", "highlight"}, "verify");
    c.scenario_path = get<std::string>(v, "scenario", "", "verify");
    c.containment_slack = get<double>(v, "slack", c.containment_slack, "verify");
    c.highlighted = get<std::vector<std::string>>(v, "highlight", c.highlighted, "verify");
  }
  if (doc.contains("partition")) {
    const Json& p = doc["partition"];
    reject_unknown(p, {"scenario", "category", "threshold", "medians"}, "partition");
    const auto s = parse_scenario(get<std::string>(p, "scenario", "mated", "partition"));
    const auto cat = parse_category(get<std::string>(p, "category", "Exc.VID", "partition"));
    if (!s) throw ConfigError("partition.scenario must be \"mated\" or \"nonmated\"");
    if (!cat) throw ConfigError("partition.category is not a decision category");
    c.partition_scenario = *s;
    c.partition_category = *cat;
    c.partition_threshold = get<double>(p, "threshold", c.partition_threshold, "partition");
    c.partition_medians = get<std::string>(p, "medians", "", "partition");
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
  std::stringstream text;
  text << in.rdbuf();
  return from_json_text(text.str(), path.parent_path());
}

std::string RunConfig::canonical_json(bool for_hash) const {
  Json j;
  Json data;
  data["path"] = this->data.path;
  if (this->data.columns) data["columns"] = columns_to(*this->data.columns);
  j["data"] = data;
  j["prior"] = {{"alpha_mated", as_vector(prior.alpha_mated)},
                {"alpha_nonmated", as_vector(prior.alpha_nonmated)},
                {"mu", prior.mu},
                {"sigma", prior.sigma}};
  j["acceptance"] = {
      {"tolerance", acceptance.tolerance_quantile}, {"distance", "euclidean"}, {"kernel", "epanechnikov"}};
  const AdjustmentOptions& o = adjustment.options;
  j["adjustment"] = {{"enabled", adjustment.enabled},
                     {"backend", o.backend == RegressionBackend::Linear ? "linear" : "neuralnet"},
                     {"transform", o.transform == Transform::Logit ? "logit" : "identity"},
                     {"ratio_min", o.ratio_min},
                     {"ratio_max", o.ratio_max},
                     {"clamp", o.clamp},
                     {"min_positive_weights", o.min_positive_weights}};
  j["ranking"] = ranking == ExaminerRanking::Own ? "own" : "population";
  j["sims"] = sims;
  j["seed"] = seed;
  j["mass"] = mass;
  j["confidence"] = confidence;
  j["write_draws"] = write_draws;
  j["examiners"] = examiners;
  j["spill"] = spill;
  j["validate"] = {{"runs", datagen_runs}};
  j["verify"] = {{"scenario", scenario_path}, {"slack", containment_slack}, {"highlight", highlighted}};
  j["partition"] = {{"scenario", std::string(label(partition_scenario))},
                    {"category", std::string(label(partition_category))},
                    {"threshold", partition_threshold},
                    {"medians", partition_medians}};
  if (!for_hash) {
    j["workers"] = workers;
    j["out"] = out;
  }
  return j.dump(2) + "\n";
}

std::string RunConfig::hash() const { return fmt::format("{:016x}", fnv1a64(canonical_json(true))); }

std::filesystem::path RunConfig::resolve(const std::string& path) const {
  namespace fs = std::filesystem;
  const fs::path p(path);
  if (p.is_absolute()) return p;
  if (!base_dir.empty() && fs::exists(base_dir / p)) return base_dir / p;
  if (const char* env = std::getenv(kDataDirEnv); env && *env) {
    if (fs::exists(fs::path(env) / p)) return fs::path(env) / p;
  }
  return base_dir.empty() ? p : base_dir / p;
}

StudyOptions RunConfig::study_options() const {
  StudyOptions o;
  o.sims = sims;
  o.seed = seed;
  o.workers = workers;
  o.acceptance = acceptance;
  if (adjustment.enabled) {
    o.adjustment = adjustment.options;
  } else {
    o.adjustment.reset();
  }
  o.ranking = ranking;
  o.examiners = examiners;
  o.config_hash = hash();
  if (spill) o.spill_path = std::filesystem::path(out) / "summaries.bin";
  return o;
}

}  // namespace bbabc::cli
