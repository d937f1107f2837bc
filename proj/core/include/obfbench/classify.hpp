#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "obfbench/features.hpp"
#include "obfbench/trace.hpp"

namespace obfbench {

enum class Algorithm { naive_bayes, nearest_centroid };

[[nodiscard]] std::string_view to_string(Algorithm algorithm) noexcept;
[[nodiscard]] Algorithm parse_algorithm(std::string_view text);

struct TrainingSample {
  FeatureVector features;
  Label label;
};

struct Prediction {
  Label label;
  /// Positive favours malware: log-posterior margin (naive Bayes) or
  /// cosine-distance margin (nearest centroid). Zero is a tie.
  double score;
};

/// Class scores of a naive Bayes model for one feature vector.
struct NaiveBayesScores {
  double malware;
  double goodware;
};

/**
 * Baseline classifier trained on clean n-gram bags.
 *
 * naive_bayes: multinomial likelihood, add-one smoothing over the training
 * vocabulary plus one out-of-vocabulary bucket, empirical class priors.
 * nearest_centroid: per-class mean of unit-sum count vectors; prediction by
 * cosine distance.
 *
 * Ties go to goodware.
 */
class TrainedModel {
 public:
  /// Throws DegenerateTrainingError when a class has no samples, and
  /// ConfigMismatchError when samples disagree on configuration or were not
  /// encoded against `catalog`. The catalog's alphabet is kept so the model
  /// can be saved self-describing.
  static TrainedModel train(std::span<const TrainingSample> samples, Algorithm algorithm,
                            const Catalog& catalog);

  [[nodiscard]] Algorithm algorithm() const noexcept { return algorithm_; }
  [[nodiscard]] const FeatureConfig& config() const noexcept { return config_; }
  [[nodiscard]] std::size_t vocabulary_size() const noexcept { return vocabulary_.size(); }
  /// Tokens in byte order of their encoding.
  [[nodiscard]] const std::vector<Token>& vocabulary() const noexcept { return vocabulary_; }

  /// Throws ConfigMismatchError when the feature was built with another
  /// configuration or alphabet.
  [[nodiscard]] Prediction predict(const FeatureVector& feature) const;

  /// naive_bayes only: smoothed P(token | class); unseen tokens map to the
  /// out-of-vocabulary bucket.
  [[nodiscard]] double token_probability(Label label, const Token& token) const;
  [[nodiscard]] double oov_probability(Label label) const;
  [[nodiscard]] double log_prior(Label label) const;
  [[nodiscard]] NaiveBayesScores naive_bayes_scores(const FeatureVector& feature) const;

  /// nearest_centroid only: centroid weight of a token (0 when unseen).
  [[nodiscard]] double centroid_weight(Label label, const Token& token) const;

  [[nodiscard]] std::string to_json() const;
  [[nodiscard]] static TrainedModel from_json(std::string_view json_text);

  friend bool operator==(const TrainedModel&, const TrainedModel&) = default;

 private:
  static constexpr std::size_t kMalware = 0;
  static constexpr std::size_t kGoodware = 1;
  static std::size_t slot(Label label) noexcept { return label == Label::malware ? kMalware : kGoodware; }

  void check_compatible(const FeatureVector& feature) const;
  void rebuild_index();
  [[nodiscard]] Prediction predict_naive_bayes(const FeatureVector& feature) const;
  [[nodiscard]] Prediction predict_centroid(const FeatureVector& feature) const;

  Algorithm algorithm_ = Algorithm::naive_bayes;
  FeatureConfig config_;
  std::vector<std::string> alphabet_;
  std::uint64_t alphabet_digest_ = 0;
  std::vector<Token> vocabulary_;
  std::unordered_map<Token, std::uint32_t> index_;

  // naive_bayes: log P(token | class), last entry is the OOV bucket.
  std::array<double, 2> log_prior_{};
  std::array<std::vector<double>, 2> log_prob_;

  // nearest_centroid
  std::array<std::vector<double>, 2> centroid_;
  std::array<double, 2> centroid_norm_{};
};

/// Fraction of the given features the model labels malware.
/// Throws EmptyInputError on an empty list.
[[nodiscard]] double detection_rate(const TrainedModel& model,
                                    std::span<const FeatureVector> malware_features);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
[[nodiscard]] TrainedModel load_model(const std::filesystem::path& path);

}  // namespace obfbench
