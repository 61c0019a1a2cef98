#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pumpwatch/corpus.hpp"

namespace pumpwatch::text {

struct TokenizerConfig {
  bool stem = true;
  // Both placeholders are uppercase, so lowercased text can never produce
  // them.
  std::string coin_placeholder = "OOV";
  std::string number_placeholder = "NUM";
  int ngram_min = 1;
  int ngram_max = 2;

  void validate() const;
};

struct RawToken {
  std::string text;      // lowercased, without the leading '$'
  bool cashtag = false;  // written as $symbol
};

// Lowercased word scan shared by the tokenizer and mention extraction. Word
// characters are ASCII alphanumerics and any non-ASCII byte (so non-Latin
// words survive as opaque tokens); a '.' joins digits ("0.0045").
std::vector<RawToken> split_words(std::string_view text);

// Lowercases, splits on punctuation, maps registry symbols/aliases and every
// $cashtag to the coin placeholder, numeric literals to the number
// placeholder, and Porter-stems the rest.
std::vector<std::string> tokenize(std::string_view text, const CoinRegistry& registry,
                                  const TokenizerConfig& config = {});

// Word n-grams for n in [lo, hi], joined by a single space, unigrams first.
std::vector<std::string> ngrams(std::span<const std::string> tokens, int lo, int hi);

struct SparseEntry {
  std::uint32_t index = 0;
  double value = 0.0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Sparse vector of fixed dimension; entries sorted by index, no duplicates.
struct SparseVector {
  std::size_t dim = 0;
  std::vector<SparseEntry> entries;

  double norm() const;
  std::vector<double> dense() const;
};

struct TfidfParams {
  double max_df = 0.5;
  double min_df = 0.01;
  int ngram_min = 1;
  int ngram_max = 2;
};

// Document-frequency filtered TF-IDF with idf(t) = ln(1 + N / df(t)) and L2
// normalized rows.
class TfidfModel {
 public:
  TfidfModel() = default;

  // corpus: one token list per document (tokens before n-gram expansion).
  // Throws DataError("degenerate corpus") when nothing survives the filter.
  static TfidfModel fit(std::span<const std::vector<std::string>> corpus, const TfidfParams& params = {});

  SparseVector transform(std::span<const std::string> tokens) const;

  std::size_t size() const { return terms_.size(); }
  std::size_t doc_count() const { return doc_count_; }
  const TfidfParams& params() const { return params_; }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<std::size_t>& doc_freq() const { return doc_freq_; }
  const std::vector<double>& idf() const { return idf_; }

  // Column index of a term, or -1.
  std::int64_t index_of(std::string_view term) const;

  static TfidfModel from_parts(TfidfParams params, std::size_t doc_count, std::vector<std::string> terms,
                               std::vector<std::size_t> doc_freq, std::vector<double> idf);

 private:
  TfidfParams params_;
  std::size_t doc_count_ = 0;
  std::vector<std::string> terms_;
  std::vector<std::size_t> doc_freq_;
  std::vector<double> idf_;
  std::map<std::string, std::uint32_t, std::less<>> vocabulary_;
};

struct SvmParams {
  double l2_lambda = 1e-4;
  int epochs = 20;
  std::uint64_t seed = 0;
};

struct Prediction {
  MessageLabel label = MessageLabel::not_pump;
  double margin = 0.0;
};

// Linear SVM trained by Pegasos-style SGD on the hinge loss.
//
// Objective: (1/n) sum_i max(0, 1 - y_i (w.x_i + b)) + (lambda/2)(|w|^2 + b^2).
// Step size eta_t = 1 / (lambda t) with t counting updates across epochs;
// each epoch visits the samples in a freshly shuffled order drawn from
// `seed`, so two runs with the same inputs produce bit-identical weights.
class LinearSvm {
 public:
  LinearSvm() = default;
  LinearSvm(std::vector<double> weights, double bias, SvmParams params)
      : weights_(std::move(weights)), bias_(bias), params_(params) {}

  // labels are +1 (pump) / -1 (not pump). Throws DataError("degenerate
  // labels") when only one class is present.
  static LinearSvm train(std::span<const SparseVector> rows, std::span<const int> labels,
                         const SvmParams& params = {});

  double margin(const SparseVector& x) const;
  double margin(std::span<const double> x) const;
  Prediction predict(const SparseVector& x) const;
  Prediction predict(std::span<const double> x) const;

  double objective(std::span<const SparseVector> rows, std::span<const int> labels) const;

  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }
  const SvmParams& params() const { return params_; }
  // Objective value at the end of every training epoch.
  const std::vector<double>& objective_trace() const { return objective_trace_; }

 private:
  std::vector<double> weights_;
  double bias_ = 0.0;
  SvmParams params_;
  std::vector<double> objective_trace_;
};

struct ClassifierMetrics {
  double base_rate = 0.0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
  std::size_t true_negative = 0;
};

// Pump is the positive class. precision/recall are 0 when their denominator
// is empty.
ClassifierMetrics evaluate(std::span<const MessageLabel> predictions, std::span<const MessageLabel> labels);

// P(w|c) = (messages of class c containing w + 1) / (messages of class c + 2).
double smoothed_word_ratio(std::size_t pump_with, std::size_t pump_total, std::size_t other_with,
                           std::size_t other_total);

struct WordRatio {
  double ratio = 1.0;
  std::size_t frequency = 0;  // messages containing the token, both classes
};

// R_w for every token seen in `docs`. Each document counts a token once.
std::map<std::string, WordRatio> word_ratio(std::span<const std::vector<std::string>> docs,
                                            std::span<const MessageLabel> labels);

struct ClassifierConfig {
  TokenizerConfig tokenizer;
  TfidfParams tfidf;
  SvmParams svm;
};

struct WeightedTerm {
  std::string term;
  double weight = 0.0;
};

// End-to-end pump message classifier: tokenizer + TF-IDF + linear SVM. Keeps
// the coin registry so a saved model can classify without extra inputs.
class PumpClassifier {
 public:
  PumpClassifier() = default;

  // Trains on messages carrying labels; unlabeled ones are skipped.
  static PumpClassifier train(std::span<const SocialMessage> labeled, const CoinRegistry& registry,
                              const ClassifierConfig& config = {});

  Prediction classify(std::string_view text) const;
  std::vector<std::string> tokens(std::string_view text) const;
  SparseVector vectorize(std::string_view text) const;

  // Highest (pump) or lowest (not pump) weighted vocabulary terms.
  std::vector<WeightedTerm> top_terms(std::size_t n, bool pump_side) const;

  const ClassifierConfig& config() const { return config_; }
  const CoinRegistry& registry() const { return registry_; }
  const TfidfModel& tfidf() const { return tfidf_; }
  const LinearSvm& svm() const { return svm_; }

  std::string to_json() const;
  static PumpClassifier from_json(std::string_view json);
  void save(const std::filesystem::path& path) const;
  static PumpClassifier load(const std::filesystem::path& path);

 private:
  ClassifierConfig config_;
  CoinRegistry registry_;
  TfidfModel tfidf_;
  LinearSvm svm_;
};

}  // namespace pumpwatch::text
