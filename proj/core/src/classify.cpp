#include "obfbench/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "obfbench/error.hpp"

namespace obfbench {

using nlohmann::json;

std::string_view to_string(Algorithm algorithm) noexcept {
  return algorithm == Algorithm::naive_bayes ? "naive_bayes" : "nearest_centroid";
}

Algorithm parse_algorithm(std::string_view text) {
  if (text == "naive_bayes") return Algorithm::naive_bayes;
  if (text == "nearest_centroid") return Algorithm::nearest_centroid;
  throw ParseError("unknown classifier: " + std::string(text));
}

TrainedModel TrainedModel::train(std::span<const TrainingSample> samples, Algorithm algorithm,
                                 const Catalog& catalog) {
  std::array<std::size_t, 2> class_count{};
  for (const auto& s : samples) ++class_count[slot(s.label)];
  if (class_count[kMalware] == 0 || class_count[kGoodware] == 0) {
    throw DegenerateTrainingError("training requires at least one malware and one goodware sample");
  }

  TrainedModel m;
  m.algorithm_ = algorithm;
  m.config_ = samples.front().features.config;
  m.alphabet_ = catalog.alphabet();
  m.alphabet_digest_ = catalog.alphabet_digest();
  m.config_.validate();
  for (const auto& s : samples) {
    if (s.features.config != m.config_ || s.features.alphabet_digest != m.alphabet_digest_) {
      throw ConfigMismatchError("training samples use differing feature configurations");
    }
  }

  for (const auto& s : samples) {
    for (const auto& [tok, c] : s.features.tokens) {
      if (m.index_.emplace(tok, 0).second) m.vocabulary_.push_back(tok);
    }
  }
  std::sort(m.vocabulary_.begin(), m.vocabulary_.end());
  m.rebuild_index();
  const std::size_t v = m.vocabulary_.size();

  if (algorithm == Algorithm::naive_bayes) {
    std::array<std::vector<double>, 2> counts{std::vector<double>(v, 0.0), std::vector<double>(v, 0.0)};
    std::array<double, 2> totals{};
    for (const auto& s : samples) {
      const auto k = slot(s.label);
      for (const auto& [tok, c] : s.features.tokens) {
        counts[k][m.index_.at(tok)] += c;
        totals[k] += c;
      }
    }
    const double n = static_cast<double>(samples.size());
    for (std::size_t k = 0; k < 2; ++k) {
      m.log_prior_[k] = std::log(static_cast<double>(class_count[k]) / n);
      const double denom = totals[k] + static_cast<double>(v) + 1.0;
      m.log_prob_[k].resize(v + 1);
      for (std::size_t j = 0; j < v; ++j) m.log_prob_[k][j] = std::log((counts[k][j] + 1.0) / denom);
      m.log_prob_[k][v] = std::log(1.0 / denom);
    }
  } else {
    for (std::size_t k = 0; k < 2; ++k) m.centroid_[k].assign(v, 0.0);
    for (const auto& s : samples) {
      const auto k = slot(s.label);
      const double total = static_cast<double>(s.features.total_count());
      if (total == 0.0) continue;
      const double w = 1.0 / (total * static_cast<double>(class_count[k]));
      for (const auto& [tok, c] : s.features.tokens) m.centroid_[k][m.index_.at(tok)] += c * w;
    }
    for (std::size_t k = 0; k < 2; ++k) {
      double sq = 0.0;
      for (double x : m.centroid_[k]) sq += x * x;
      m.centroid_norm_[k] = std::sqrt(sq);
    }
  }
  return m;
}

void TrainedModel::rebuild_index() {
  index_.clear();
  index_.reserve(vocabulary_.size());
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    index_[vocabulary_[i]] = static_cast<std::uint32_t>(i);
  }
}

void TrainedModel::check_compatible(const FeatureVector& feature) const {
  if (feature.config != config_) {
    throw ConfigMismatchError("feature configuration (n=" + std::to_string(feature.config.n) + ", " +
                              std::string(to_string(feature.config.mode)) +
                              ") differs from the model's (n=" + std::to_string(config_.n) + ", " +
                              std::string(to_string(config_.mode)) + ")");
  }
  if (feature.alphabet_digest != alphabet_digest_) {
    throw ConfigMismatchError("feature was encoded against a different catalog alphabet");
  }
}

Prediction TrainedModel::predict(const FeatureVector& feature) const {
  check_compatible(feature);
  return algorithm_ == Algorithm::naive_bayes ? predict_naive_bayes(feature)
                                              : predict_centroid(feature);
}

NaiveBayesScores TrainedModel::naive_bayes_scores(const FeatureVector& feature) const {
  if (algorithm_ != Algorithm::naive_bayes) throw ConfigMismatchError("model is not naive_bayes");
  check_compatible(feature);
  const std::size_t oov = vocabulary_.size();
  double mal = log_prior_[kMalware];
  double good = log_prior_[kGoodware];
  for (const auto& [tok, c] : feature.tokens) {
    auto it = index_.find(tok);
    const std::size_t j = it == index_.end() ? oov : it->second;
    mal += c * log_prob_[kMalware][j];
    good += c * log_prob_[kGoodware][j];
  }
  return {mal, good};
}

Prediction TrainedModel::predict_naive_bayes(const FeatureVector& feature) const {
  const auto s = naive_bayes_scores(feature);
  const double margin = s.malware - s.goodware;
  return {margin > 0.0 ? Label::malware : Label::goodware, margin};
}

Prediction TrainedModel::predict_centroid(const FeatureVector& feature) const {
  const double total = static_cast<double>(feature.total_count());
  std::array<double, 2> dot{};
  double sq = 0.0;
  if (total > 0.0) {
    for (const auto& [tok, c] : feature.tokens) {
      const double x = c / total;
      sq += x * x;
      auto it = index_.find(tok);
      if (it == index_.end()) continue;
      dot[kMalware] += x * centroid_[kMalware][it->second];
      dot[kGoodware] += x * centroid_[kGoodware][it->second];
    }
  }
  const double norm = std::sqrt(sq);
  std::array<double, 2> dist{1.0, 1.0};
  for (std::size_t k = 0; k < 2; ++k) {
    if (norm > 0.0 && centroid_norm_[k] > 0.0) dist[k] = 1.0 - dot[k] / (norm * centroid_norm_[k]);
  }
  const double margin = dist[kGoodware] - dist[kMalware];
  return {margin > 0.0 ? Label::malware : Label::goodware, margin};
}

double TrainedModel::token_probability(Label label, const Token& token) const {
  if (algorithm_ != Algorithm::naive_bayes) throw ConfigMismatchError("model is not naive_bayes");
  auto it = index_.find(token);
  const std::size_t j = it == index_.end() ? vocabulary_.size() : it->second;
  return std::exp(log_prob_[slot(label)][j]);
}

double TrainedModel::oov_probability(Label label) const {
  if (algorithm_ != Algorithm::naive_bayes) throw ConfigMismatchError("model is not naive_bayes");
  return std::exp(log_prob_[slot(label)][vocabulary_.size()]);
}

double TrainedModel::log_prior(Label label) const { return log_prior_[slot(label)]; }

double TrainedModel::centroid_weight(Label label, const Token& token) const {
  if (algorithm_ != Algorithm::nearest_centroid) throw ConfigMismatchError("model is not nearest_centroid");
  auto it = index_.find(token);
  return it == index_.end() ? 0.0 : centroid_[slot(label)][it->second];
}

std::string TrainedModel::to_json() const {
  const Catalog alphabet = Catalog::create(alphabet_, {}, {});
  json vocab = json::array();
  for (const auto& tok : vocabulary_) vocab.push_back(decode_token(tok, alphabet));

  json doc;
  doc["algorithm"] = std::string(to_string(algorithm_));
  doc["config"] = {{"n", config_.n}, {"mode", std::string(to_string(config_.mode))}};
  doc["alphabet"] = alphabet_;
  doc["vocabulary"] = std::move(vocab);
  if (algorithm_ == Algorithm::naive_bayes) {
    doc["log_prior"] = {{"malware", log_prior_[kMalware]}, {"goodware", log_prior_[kGoodware]}};
    doc["log_prob"] = {{"malware", log_prob_[kMalware]}, {"goodware", log_prob_[kGoodware]}};
  } else {
    doc["centroid"] = {{"malware", centroid_[kMalware]}, {"goodware", centroid_[kGoodware]}};
  }
  return doc.dump(1) + "\n";
}

TrainedModel TrainedModel::from_json(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  TrainedModel m;
  try {
    m.algorithm_ = parse_algorithm(doc.at("algorithm").get<std::string>());
    m.config_.n = doc.at("config").at("n").get<std::size_t>();
    m.config_.mode = parse_gram_mode(doc.at("config").at("mode").get<std::string>());
    m.alphabet_ = doc.at("alphabet").get<std::vector<std::string>>();
    const Catalog alphabet = Catalog::create(m.alphabet_, {}, {});
    m.alphabet_digest_ = alphabet.alphabet_digest();
    for (const auto& names : doc.at("vocabulary")) {
      const auto ids = to_name_ids(names.get<std::vector<std::string>>(), alphabet);
      // Vocabulary entries are stored already canonicalized.
      m.vocabulary_.push_back(encode_token(ids, GramMode::ordered, alphabet));
    }
    if (!std::is_sorted(m.vocabulary_.begin(), m.vocabulary_.end())) {
      throw ParseError("model: vocabulary is not in canonical order");
    }
    m.rebuild_index();
    const std::size_t v = m.vocabulary_.size();
    if (m.algorithm_ == Algorithm::naive_bayes) {
      m.log_prior_ = {doc.at("log_prior").at("malware").get<double>(),
                      doc.at("log_prior").at("goodware").get<double>()};
      m.log_prob_ = {doc.at("log_prob").at("malware").get<std::vector<double>>(),
                     doc.at("log_prob").at("goodware").get<std::vector<double>>()};
      for (const auto& lp : m.log_prob_)
        if (lp.size() != v + 1) throw ParseError("model: log_prob length must be |vocabulary| + 1");
    } else {
      m.centroid_ = {doc.at("centroid").at("malware").get<std::vector<double>>(),
                     doc.at("centroid").at("goodware").get<std::vector<double>>()};
      for (std::size_t k = 0; k < 2; ++k) {
        if (m.centroid_[k].size() != v) throw ParseError("model: centroid length must be |vocabulary|");
        double sq = 0.0;
        for (double x : m.centroid_[k]) sq += x * x;
        m.centroid_norm_[k] = std::sqrt(sq);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  } catch (const UnknownNameError& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  return m;
}

double detection_rate(const TrainedModel& model, std::span<const FeatureVector> malware_features) {
  if (malware_features.empty()) throw EmptyInputError("detection rate of an empty sample set");
  std::size_t hits = 0;
  for (const auto& f : malware_features) hits += model.predict(f).label == Label::malware ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(malware_features.size());
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write model: " + path.string());
  out << model.to_json();
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return TrainedModel::from_json(buf.str());
}

}  // namespace obfbench
