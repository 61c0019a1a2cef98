#include "pumpwatch/textclf.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pumpwatch/error.hpp"
#include "pumpwatch/porter.hpp"
#include "pumpwatch/rng.hpp"

namespace pumpwatch::text {

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

bool is_numeric(std::string_view s) {
  bool digit = false;
  for (char c : s) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
    } else if (c != '.') {
      return false;
    }
  }
  return digit;
}

}  // namespace

void TokenizerConfig::validate() const {
  if (ngram_min < 1 || ngram_max < ngram_min) throw ValidationError("invalid ngram range");
  for (const auto* p : {&coin_placeholder, &number_placeholder}) {
    if (p->empty()) throw ValidationError("empty placeholder");
    // Lowercase text never yields an uppercase-only placeholder.
    if (std::none_of(p->begin(), p->end(), [](char c) { return std::isupper(static_cast<unsigned char>(c)); })) {
      throw ValidationError("placeholder '" + *p + "' could be produced by normal tokenization");
    }
  }
}

std::vector<RawToken> split_words(std::string_view text) {
  std::vector<RawToken> out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  auto at = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  while (i < n) {
    bool cashtag = false;
    std::size_t start = i;
    if (text[i] == '$' && i + 1 < n && is_word_byte(at(i + 1))) {
      cashtag = true;
      start = ++i;
    } else if (text[i] == '.' && i + 1 < n && std::isdigit(at(i + 1)) &&
               (i == 0 || !is_word_byte(at(i - 1)))) {
      start = i++;  // leading-dot decimal such as ".5"
    } else if (!is_word_byte(at(i))) {
      ++i;
      continue;
    }
    while (i < n) {
      if (is_word_byte(at(i))) {
        ++i;
      } else if (text[i] == '.' && i > start && std::isdigit(at(i - 1)) && i + 1 < n && std::isdigit(at(i + 1))) {
        ++i;
      } else {
        break;
      }
    }
    RawToken tok;
    tok.cashtag = cashtag;
    tok.text.reserve(i - start);
    for (std::size_t k = start; k < i; ++k) tok.text.push_back(static_cast<char>(std::tolower(at(k))));
    out.push_back(std::move(tok));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text, const CoinRegistry& registry,
                                  const TokenizerConfig& config) {
  std::vector<std::string> out;
  for (auto& raw : split_words(text)) {
    if (is_numeric(raw.text)) {
      out.push_back(config.number_placeholder);
    } else if (raw.cashtag || registry.resolve(raw.text)) {
      out.push_back(config.coin_placeholder);
    } else if (config.stem) {
      out.push_back(porter_stem(raw.text));
    } else {
      out.push_back(std::move(raw.text));
    }
  }
  return out;
}

std::vector<std::string> ngrams(std::span<const std::string> tokens, int lo, int hi) {
  std::vector<std::string> out;
  for (int n = lo; n <= hi; ++n) {
    const auto len = static_cast<std::size_t>(n);
    if (tokens.size() < len) break;
    for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (std::size_t k = 1; k < len; ++k) {
        gram.push_back(' ');
        gram += tokens[i + k];
      }
      out.push_back(std::move(gram));
    }
  }
  return out;
}

double SparseVector::norm() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.value * e.value;
  return std::sqrt(s);
}

std::vector<double> SparseVector::dense() const {
  std::vector<double> out(dim, 0.0);
  for (const auto& e : entries) out[e.index] = e.value;
  return out;
}

// ---------------------------------------------------------------------------
// TF-IDF

TfidfModel TfidfModel::fit(std::span<const std::vector<std::string>> corpus, const TfidfParams& params) {
  if (corpus.empty()) throw DataError("degenerate corpus: no documents");
  if (params.ngram_min < 1 || params.ngram_max < params.ngram_min) throw ValidationError("invalid ngram range");
  if (!(params.min_df >= 0.0 && params.min_df <= params.max_df && params.max_df <= 1.0)) {
    throw ValidationError("document frequency bounds must satisfy 0 <= min_df <= max_df <= 1");
  }

  std::map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    auto grams = ngrams(doc, params.ngram_min, params.ngram_max);
    std::set<std::string> unique(grams.begin(), grams.end());
    for (const auto& g : unique) ++df[g];
  }

  const auto n = static_cast<double>(corpus.size());
  // Bounds are inclusive; the slack absorbs representation error in min_df*N.
  constexpr double kSlack = 1e-9;
  const double lo = params.min_df * n - kSlack;
  const double hi = params.max_df * n + kSlack;

  TfidfModel model;
  model.params_ = params;
  model.doc_count_ = corpus.size();
  for (const auto& [term, count] : df) {
    const auto c = static_cast<double>(count);
    if (c < lo || c > hi) continue;
    model.vocabulary_.emplace(term, static_cast<std::uint32_t>(model.terms_.size()));
    model.terms_.push_back(term);
    model.doc_freq_.push_back(count);
    model.idf_.push_back(std::log(1.0 + n / c));
  }
  if (model.terms_.empty()) throw DataError("degenerate corpus: empty vocabulary after document-frequency filtering");
  return model;
}

TfidfModel TfidfModel::from_parts(TfidfParams params, std::size_t doc_count, std::vector<std::string> terms,
                                  std::vector<std::size_t> doc_freq, std::vector<double> idf) {
  if (terms.size() != doc_freq.size() || terms.size() != idf.size()) {
    throw DataError("tfidf model: inconsistent array lengths");
  }
  TfidfModel model;
  model.params_ = params;
  model.doc_count_ = doc_count;
  model.terms_ = std::move(terms);
  model.doc_freq_ = std::move(doc_freq);
  model.idf_ = std::move(idf);
  for (std::size_t i = 0; i < model.terms_.size(); ++i) {
    if (!model.vocabulary_.emplace(model.terms_[i], static_cast<std::uint32_t>(i)).second) {
      throw DataError("tfidf model: duplicate term '" + model.terms_[i] + "'");
    }
  }
  return model;
}

std::int64_t TfidfModel::index_of(std::string_view term) const {
  auto it = vocabulary_.find(term);
  return it == vocabulary_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

SparseVector TfidfModel::transform(std::span<const std::string> tokens) const {
  std::map<std::uint32_t, double> counts;
  for (const auto& g : ngrams(tokens, params_.ngram_min, params_.ngram_max)) {
    auto it = vocabulary_.find(g);
    if (it != vocabulary_.end()) counts[it->second] += 1.0;
  }
  SparseVector v;
  v.dim = terms_.size();
  v.entries.reserve(counts.size());
  for (const auto& [idx, tf] : counts) v.entries.push_back({idx, tf * idf_[idx]});
  const double norm = v.norm();
  if (norm > 0.0) {
    for (auto& e : v.entries) e.value /= norm;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Linear SVM

namespace {

double sparse_dot(const std::vector<double>& w, const SparseVector& x) {
  double s = 0.0;
  for (const auto& e : x.entries) s += w[e.index] * e.value;
  return s;
}

}  // namespace

LinearSvm LinearSvm::train(std::span<const SparseVector> rows, std::span<const int> labels,
                           const SvmParams& params) {
  if (rows.size() != labels.size()) throw ValidationError("svm: rows and labels differ in length");
  if (rows.empty()) throw DataError("degenerate labels: no samples");
  if (!(params.l2_lambda > 0.0) || params.epochs < 1) throw ValidationError("svm: lambda and epochs must be positive");
  bool pos = false;
  bool neg = false;
  for (int y : labels) {
    if (y == 1) {
      pos = true;
    } else if (y == -1) {
      neg = true;
    } else {
      throw ValidationError("svm: labels must be +1 or -1");
    }
  }
  if (!pos || !neg) throw DataError("degenerate labels: training data has a single class");

  const std::size_t dim = rows.front().dim;
  for (const auto& r : rows) {
    if (r.dim != dim) throw ValidationError("svm: rows differ in dimension");
  }

  // w = scale * v, bias = scale * vb. Scaling the whole iterate makes the
  // shrink step O(1) instead of O(dim).
  std::vector<double> v(dim, 0.0);
  double vb = 0.0;
  double scale = 1.0;
  const double lambda = params.l2_lambda;

  Rng rng(params.seed);
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  LinearSvm svm;
  svm.params_ = params;
  std::uint64_t t = 0;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double y = labels[i];
      const double m = y * scale * (sparse_dot(v, rows[i]) + vb);
      const double shrink = 1.0 - eta * lambda;
      if (shrink <= 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        vb = 0.0;
        scale = 1.0;
      } else {
        scale *= shrink;
      }
      if (scale < 1e-9) {
        for (auto& x : v) x *= scale;
        vb *= scale;
        scale = 1.0;
      }
      if (m < 1.0) {
        const double step = eta * y / scale;
        for (const auto& e : rows[i].entries) v[e.index] += step * e.value;
        vb += step;
      }
    }
    svm.weights_.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) svm.weights_[k] = scale * v[k];
    svm.bias_ = scale * vb;
    svm.objective_trace_.push_back(svm.objective(rows, labels));
  }
  return svm;
}

double LinearSvm::margin(const SparseVector& x) const {
  if (x.dim != weights_.size()) throw ValidationError("dimension mismatch: vector has " + std::to_string(x.dim) +
                                                      " columns, model has " + std::to_string(weights_.size()));
  return sparse_dot(weights_, x) + bias_;
}

double LinearSvm::margin(std::span<const double> x) const {
  if (x.size() != weights_.size()) throw ValidationError("dimension mismatch: vector has " + std::to_string(x.size()) +
                                                         " columns, model has " + std::to_string(weights_.size()));
  double s = bias_;
  for (std::size_t i = 0; i < x.size(); ++i) s += weights_[i] * x[i];
  return s;
}

Prediction LinearSvm::predict(const SparseVector& x) const {
  const double m = margin(x);
  return {m >= 0.0 ? MessageLabel::pump : MessageLabel::not_pump, m};
}

Prediction LinearSvm::predict(std::span<const double> x) const {
  const double m = margin(x);
  return {m >= 0.0 ? MessageLabel::pump : MessageLabel::not_pump, m};
}

double LinearSvm::objective(std::span<const SparseVector> rows, std::span<const int> labels) const {
  double loss = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    loss += std::max(0.0, 1.0 - labels[i] * (sparse_dot(weights_, rows[i]) + bias_));
  }
  double sq = bias_ * bias_;
  for (double w : weights_) sq += w * w;
  return loss / static_cast<double>(rows.size()) + 0.5 * params_.l2_lambda * sq;
}

// ---------------------------------------------------------------------------
// Metrics

ClassifierMetrics evaluate(std::span<const MessageLabel> predictions, std::span<const MessageLabel> labels) {
  if (predictions.size() != labels.size()) throw ValidationError("evaluate: length mismatch");
  if (labels.empty()) throw ValidationError("evaluate: empty input");
  ClassifierMetrics m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predictions[i] == MessageLabel::pump;
    const bool l = labels[i] == MessageLabel::pump;
    if (p && l) ++m.true_positive;
    else if (p) ++m.false_positive;
    else if (l) ++m.false_negative;
    else ++m.true_negative;
  }
  const auto total = static_cast<double>(labels.size());
  const auto tp = static_cast<double>(m.true_positive);
  const auto fp = static_cast<double>(m.false_positive);
  const auto fn = static_cast<double>(m.false_negative);
  const auto tn = static_cast<double>(m.true_negative);
  m.base_rate = (tp + fn) / total;
  m.accuracy = (tp + tn) / total;
  m.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

double smoothed_word_ratio(std::size_t pump_with, std::size_t pump_total, std::size_t other_with,
                           std::size_t other_total) {
  const double p_pump = (static_cast<double>(pump_with) + 1.0) / (static_cast<double>(pump_total) + 2.0);
  const double p_other = (static_cast<double>(other_with) + 1.0) / (static_cast<double>(other_total) + 2.0);
  return p_pump / p_other;
}

std::map<std::string, WordRatio> word_ratio(std::span<const std::vector<std::string>> docs,
                                            std::span<const MessageLabel> labels) {
  if (docs.size() != labels.size()) throw ValidationError("word_ratio: length mismatch");
  std::size_t n_pump = 0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // (pump, not_pump)
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const bool pump = labels[i] == MessageLabel::pump;
    n_pump += pump ? 1 : 0;
    std::set<std::string> unique(docs[i].begin(), docs[i].end());
    for (const auto& w : unique) {
      auto& c = counts[w];
      (pump ? c.first : c.second) += 1;
    }
  }
  const std::size_t n_other = docs.size() - n_pump;
  if (n_pump == 0 || n_other == 0) throw DataError("word_ratio: both classes must be present");
  std::map<std::string, WordRatio> out;
  for (const auto& [w, c] : counts) {
    out[w] = {smoothed_word_ratio(c.first, n_pump, c.second, n_other), c.first + c.second};
  }
  return out;
}

// ---------------------------------------------------------------------------
// PumpClassifier

PumpClassifier PumpClassifier::train(std::span<const SocialMessage> labeled, const CoinRegistry& registry,
                                     const ClassifierConfig& config) {
  config.tokenizer.validate();
  PumpClassifier clf;
  clf.config_ = config;
  clf.config_.tfidf.ngram_min = config.tokenizer.ngram_min;
  clf.config_.tfidf.ngram_max = config.tokenizer.ngram_max;
  clf.registry_ = registry;

  std::vector<std::vector<std::string>> docs;
  std::vector<int> y;
  for (const auto& m : labeled) {
    if (!m.label) continue;
    docs.push_back(tokenize(m.text, registry, clf.config_.tokenizer));
    y.push_back(*m.label == MessageLabel::pump ? 1 : -1);
  }
  if (docs.empty()) throw DataError("no labeled messages to train on");
  clf.tfidf_ = TfidfModel::fit(docs, clf.config_.tfidf);
  std::vector<SparseVector> rows;
  rows.reserve(docs.size());
  for (const auto& d : docs) rows.push_back(clf.tfidf_.transform(d));
  clf.svm_ = LinearSvm::train(rows, y, clf.config_.svm);
  return clf;
}

std::vector<std::string> PumpClassifier::tokens(std::string_view text) const {
  return tokenize(text, registry_, config_.tokenizer);
}

SparseVector PumpClassifier::vectorize(std::string_view text) const { return tfidf_.transform(tokens(text)); }

Prediction PumpClassifier::classify(std::string_view text) const { return svm_.predict(vectorize(text)); }

std::vector<WeightedTerm> PumpClassifier::top_terms(std::size_t n, bool pump_side) const {
  std::vector<WeightedTerm> terms;
  const auto& w = svm_.weights();
  for (std::size_t i = 0; i < w.size(); ++i) terms.push_back({tfidf_.terms()[i], w[i]});
  std::stable_sort(terms.begin(), terms.end(), [pump_side](const WeightedTerm& a, const WeightedTerm& b) {
    return pump_side ? a.weight > b.weight : a.weight < b.weight;
  });
  if (terms.size() > n) terms.resize(n);
  return terms;
}

namespace {
constexpr const char* kModelFormat = "pumpwatch-classifier";
constexpr int kModelVersion = 1;
}  // namespace

std::string PumpClassifier::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["tokenizer"] = {{"stem", config_.tokenizer.stem},
                    {"coin_placeholder", config_.tokenizer.coin_placeholder},
                    {"number_placeholder", config_.tokenizer.number_placeholder},
                    {"ngram_range", {config_.tokenizer.ngram_min, config_.tokenizer.ngram_max}}};
  j["tfidf"] = {{"max_df", tfidf_.params().max_df},
                {"min_df", tfidf_.params().min_df},
                {"doc_count", tfidf_.doc_count()},
                {"vocabulary", tfidf_.terms()},
                {"doc_freq", tfidf_.doc_freq()},
                {"idf", tfidf_.idf()}};
  j["svm"] = {{"l2_lambda", svm_.params().l2_lambda},
              {"epochs", svm_.params().epochs},
              {"seed", svm_.params().seed},
              {"weights", svm_.weights()},
              {"bias", svm_.bias()}};
  j["registry"] = {{"symbols", registry_.symbols()}, {"aliases", registry_.aliases()}};
  return j.dump();
}

PumpClassifier PumpClassifier::from_json(std::string_view text) {
  try {
    auto j = nlohmann::json::parse(text);
    if (j.at("format") != kModelFormat) throw DataError("not a pumpwatch classifier model");
    if (j.at("version").get<int>() != kModelVersion) throw DataError("unsupported classifier model version");
    PumpClassifier clf;
    auto& tok = clf.config_.tokenizer;
    tok.stem = j.at("tokenizer").at("stem").get<bool>();
    tok.coin_placeholder = j.at("tokenizer").at("coin_placeholder").get<std::string>();
    tok.number_placeholder = j.at("tokenizer").at("number_placeholder").get<std::string>();
    tok.ngram_min = j.at("tokenizer").at("ngram_range").at(0).get<int>();
    tok.ngram_max = j.at("tokenizer").at("ngram_range").at(1).get<int>();
    tok.validate();
    auto& tp = clf.config_.tfidf;
    tp.max_df = j.at("tfidf").at("max_df").get<double>();
    tp.min_df = j.at("tfidf").at("min_df").get<double>();
    tp.ngram_min = tok.ngram_min;
    tp.ngram_max = tok.ngram_max;
    clf.tfidf_ = TfidfModel::from_parts(tp, j.at("tfidf").at("doc_count").get<std::size_t>(),
                                        j.at("tfidf").at("vocabulary").get<std::vector<std::string>>(),
                                        j.at("tfidf").at("doc_freq").get<std::vector<std::size_t>>(),
                                        j.at("tfidf").at("idf").get<std::vector<double>>());
    auto& sp = clf.config_.svm;
    sp.l2_lambda = j.at("svm").at("l2_lambda").get<double>();
    sp.epochs = j.at("svm").at("epochs").get<int>();
    sp.seed = j.at("svm").at("seed").get<std::uint64_t>();
    auto weights = j.at("svm").at("weights").get<std::vector<double>>();
    if (weights.size() != clf.tfidf_.size()) throw DataError("classifier model: weight/vocabulary size mismatch");
    clf.svm_ = LinearSvm(std::move(weights), j.at("svm").at("bias").get<double>(), sp);
    clf.registry_ = CoinRegistry(j.at("registry").at("symbols").get<std::set<std::string>>(),
                                 j.at("registry").at("aliases").get<std::map<std::string, std::string>>());
    return clf;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed classifier model: ") + e.what());
  }
}

void PumpClassifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json() << '\n';
}

PumpClassifier PumpClassifier::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace pumpwatch::text
