#include "cli.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "config.hpp"
#include "json.hpp"
#include "pumpwatch/botwatch.hpp"
#include "pumpwatch/corex.hpp"
#include "pumpwatch/corpus.hpp"
#include "pumpwatch/csv.hpp"
#include "pumpwatch/error.hpp"
#include "pumpwatch/features.hpp"
#include "pumpwatch/predict.hpp"
#include "pumpwatch/pump_extract.hpp"
#include "pumpwatch/rng.hpp"
#include "pumpwatch/signature.hpp"
#include "pumpwatch/synth.hpp"
#include "pumpwatch/textclf.hpp"

namespace pumpwatch::cli {

namespace fs = std::filesystem;

namespace {

struct Globals {
  std::uint64_t seed = 7;
  std::string out_dir;
};

// Relative output paths land under --out-dir when it is set.
fs::path output_path(const Globals& g, const std::string& path) {
  fs::path p(path);
  if (!g.out_dir.empty() && p.is_relative()) p = fs::path(g.out_dir) / p;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  return f;
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  auto f = open_output(path);
  writer(f);
  f.flush();
  if (!f) throw DataError("write failed: " + path.string());
}

std::string iso_time(Timestamp t) {
  const std::time_t tt = static_cast<std::time_t>(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<int> parse_int_list(const std::vector<std::string>& items, const char* what) {
  std::vector<int> out;
  for (const auto& s : items) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw ValidationError(std::string("bad ") + what + " '" + s + "'");
    }
  }
  return out;
}

std::vector<features::Variant> parse_variants(const std::vector<std::string>& items) {
  std::vector<features::Variant> out;
  for (const auto& s : items) {
    auto v = features::parse_variant(s);
    if (!v) throw ValidationError("unknown variant '" + s + "' (twitter, economic, both)");
    out.push_back(*v);
  }
  return out;
}

// ---------------------------------------------------------------- classifier

struct ClassifierOptions {
  double lambda = 1e-4;
  int epochs = 20;
  double max_df = 0.5;
  double min_df = 0.01;
  int ngram_max = 2;
  bool no_stem = false;
};

text::ClassifierConfig classifier_config(const ClassifierOptions& o, std::uint64_t seed) {
  text::ClassifierConfig c;
  c.tokenizer.stem = !o.no_stem;
  c.tokenizer.ngram_max = o.ngram_max;
  c.tfidf.max_df = o.max_df;
  c.tfidf.min_df = o.min_df;
  c.tfidf.ngram_max = o.ngram_max;
  c.svm.l2_lambda = o.lambda;
  c.svm.epochs = o.epochs;
  c.svm.seed = derive_seed(seed, "svm");
  return c;
}

std::vector<SocialMessage> classify_all(const text::PumpClassifier& clf, std::vector<SocialMessage> messages) {
  for (auto& m : messages) m.label = clf.classify(m.text).label;
  return messages;
}

std::optional<text::ClassifierMetrics> score_against_truth(std::span<const SocialMessage> predicted,
                                                           std::span<const SocialMessage> truth) {
  std::vector<MessageLabel> p;
  std::vector<MessageLabel> t;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!truth[i].label) continue;
    p.push_back(*predicted[i].label);
    t.push_back(*truth[i].label);
  }
  if (t.empty()) return std::nullopt;
  return text::evaluate(p, t);
}

void write_metrics_csv(std::ostream& out, const text::ClassifierMetrics& m) {
  out << "base_rate,accuracy,precision,recall,f1,tp,fp,fn,tn\n"
      << csv::format_double(m.base_rate) << ',' << csv::format_double(m.accuracy) << ','
      << csv::format_double(m.precision) << ',' << csv::format_double(m.recall) << ',' << csv::format_double(m.f1)
      << ',' << m.true_positive << ',' << m.false_positive << ',' << m.false_negative << ',' << m.true_negative
      << '\n';
}

void print_metrics(std::ostream& out, const text::ClassifierMetrics& m) {
  out << "accuracy " << csv::format_double(m.accuracy) << ", precision " << csv::format_double(m.precision)
      << ", recall " << csv::format_double(m.recall) << ", f1 " << csv::format_double(m.f1) << '\n';
}

// ---------------------------------------------------------------- prediction

struct PredictRun {
  std::vector<predict::EvalReport> reports;
  std::vector<predict::SweepRow> sweep;
};

PredictSettings seeded(PredictSettings s, std::uint64_t seed) {
  s.task.seed = derive_seed(seed, "task");
  s.forest.seed = derive_seed(seed, "forest");
  return s;
}

void attach_components(features::FeatureSources& sources, std::span<const pumps::PumpAttempt> attempts,
                       const graph::ComponentParams& params) {
  std::set<std::string> coins;
  for (const auto& a : attempts) coins.insert(a.coin);
  for (const auto& c : coins) {
    if (!sources.has_coin(c)) continue;
    sources.set_components(c, graph::user_user_components(c, attempts, sources.index(), params));
  }
}

PredictRun run_prediction(int task, std::span<const pumps::PumpAttempt> attempts, features::FeatureSources& sources,
                          const PredictSettings& settings, std::optional<std::pair<int, int>> sweep) {
  PredictRun run;
  attach_components(sources, attempts, settings.components);
  run.reports =
      predict::feature_ablation(task, attempts, sources, settings.task, settings.forest, settings.variants);
  if (sweep) {
    run.sweep = predict::window_sweep(task, attempts, sources, settings.task, settings.forest, settings.variants,
                                      sweep->first, sweep->second);
  }
  return run;
}

std::optional<std::pair<int, int>> parse_sweep(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto dash = text.find('-');
  try {
    if (dash == std::string::npos) {
      const int w = std::stoi(text);
      return std::make_pair(w, w);
    }
    const int lo = std::stoi(text.substr(0, dash));
    const int hi = std::stoi(text.substr(dash + 1));
    if (lo < 1 || hi < lo) throw std::invalid_argument(text);
    return std::make_pair(lo, hi);
  } catch (const std::logic_error&) {
    throw ValidationError("bad sweep range '" + text + "' (expected e.g. 1-24)");
  }
}

void print_reports(std::ostream& out, std::span<const predict::EvalReport> reports) {
  for (const auto& r : reports) {
    out << "task " << r.task << ' ' << features::to_string(r.variant) << ": ";
    if (r.all) {
      out << "macro AUC " << csv::format_double(r.all->mean) << " over " << r.all->coins << " coins";
    } else {
      out << "no evaluable coin";
    }
    if (!r.excluded.empty()) out << ", " << r.excluded.size() << " excluded";
    out << '\n';
  }
}

// ---------------------------------------------------------------- bots

std::vector<double> thresholds_or_default(const std::vector<double>& given) {
  return given.empty() ? bots::kDefaultDegreeThresholds : given;
}

fs::path sibling(const fs::path& path, const std::string& suffix) {
  auto stem = path.stem().string();
  return path.parent_path() / (stem + suffix + path.extension().string());
}

struct BotAnalysis {
  std::vector<bots::DegreeRow> degrees;
  std::vector<bots::ClusterStats> clusters;
};

BotAnalysis analyze_bots(const graph::AffiliationMatrix& matrix, const StatusMap& statuses,
                         const corex::CorexModel& model, std::span<const Tweet> tweets,
                         std::span<const double> thresholds) {
  const auto telegram = bots::label_telegram_active(tweets);
  const auto profiles = bots::build_profiles(matrix, statuses, telegram);
  BotAnalysis a;
  a.degrees = bots::degree_table(profiles, thresholds);
  a.clusters = bots::cluster_report(bots::cluster_users(model), profiles);
  return a;
}

void write_bot_files(const fs::path& degree_path, const fs::path& cluster_path, const BotAnalysis& a) {
  write_file(degree_path, [&](std::ostream& f) { bots::write_degree_csv(f, a.degrees); });
  write_file(cluster_path, [&](std::ostream& f) { bots::write_cluster_csv(f, a.clusters); });
}

corex::CorexParams corex_params(std::size_t k, int max_iter, double tolerance, std::uint64_t seed) {
  corex::CorexParams p;
  p.k = k;
  p.max_iterations = max_iter;
  p.tolerance = tolerance;
  p.seed = derive_seed(seed, "corex");
  return p;
}

// ---------------------------------------------------------------- report

struct ReportOptions {
  std::string data_dir;
  ClassifierOptions classifier;
  std::vector<int> tasks = {1, 2};
  std::size_t n_trees = 200;
  std::size_t corex_k = 24;
  std::vector<double> degree_thresholds = {1, 10, 25, 50, 100};
  std::string sweep;
  std::string features_config;
};

// Published desk-independent reference values, reported next to what this
// run observed.
struct ReferenceRow {
  std::string metric;
  std::string reference;
  std::optional<double> observed;
};

void write_reference_csv(std::ostream& out, std::span<const ReferenceRow> rows) {
  out << "metric,reference,observed\n";
  for (const auto& r : rows) {
    out << r.metric << ',' << r.reference << ',' << (r.observed ? csv::format_double(*r.observed) : "") << '\n';
  }
}

void run_report(const Globals& g, const ReportOptions& o, std::ostream& out) {
  if (g.out_dir.empty()) throw ValidationError("report needs --out-dir");
  const fs::path data(o.data_dir);
  auto in = [&](const char* name) { return data / name; };
  auto dest = [&](const char* name) { return output_path(g, name); };

  const auto registry = load_registry(in("registry.txt"));
  const auto labeled = load_messages(in("labeled.jsonl"));
  const auto messages = load_messages(in("messages.jsonl"));
  const auto market = load_market(in("market.csv"));
  const auto tweets = load_tweets(in("tweets.jsonl"));
  const auto statuses = load_statuses(in("statuses.csv"));

  // Message classification and attempt extraction.
  const auto clf = text::PumpClassifier::train(labeled, registry, classifier_config(o.classifier, g.seed));
  clf.save(dest("classifier.json"));
  const auto classified = classify_all(clf, messages);
  const auto metrics = score_against_truth(classified, messages);
  if (metrics) write_file(dest("classifier_metrics.csv"), [&](std::ostream& f) { write_metrics_csv(f, *metrics); });
  write_file(dest("classifier_terms.csv"), [&](std::ostream& f) {
    f << "side,rank,term,weight\n";
    for (bool pump : {true, false}) {
      const auto terms = clf.top_terms(20, pump);
      for (std::size_t i = 0; i < terms.size(); ++i) {
        f << (pump ? "pump" : "not_pump") << ',' << i + 1 << ',' << csv::escape(terms[i].term) << ','
          << csv::format_double(terms[i].weight) << '\n';
      }
    }
  });
  const auto attempts = pumps::build_attempts(classified, registry);
  write_file(dest("attempts.jsonl"), [&](std::ostream& f) { pumps::write_attempts(f, attempts); });
  out << "classified " << messages.size() << " messages, " << attempts.size() << " attempts\n";

  // Success grid and signatures.
  const std::vector<double> thresholds = {0.7, 0.8, 0.9, 1.0};
  const std::vector<int> windows = {1, 6, 24, 72};
  const auto grid = pumps::success_ratio_grid(attempts, market, thresholds, windows);
  write_file(dest("success_grid.csv"), [&](std::ostream& f) { pumps::write_grid_csv(f, grid); });
  signature::SignatureConfig sig;
  sig.seed = derive_seed(g.seed, "signature");
  const auto curves = signature::aggregate_signatures(attempts, market, tweets, sig);
  write_file(dest("signature.csv"), [&](std::ostream& f) { signature::write_curves_csv(f, curves.curves); });

  // User embedding and bot analysis.
  features::FeatureSources sources(market, tweets);
  const auto matrix = graph::pump_user_matrix(attempts, sources.index());
  write_file(dest("matrix.csv"), [&](std::ostream& f) { graph::write_matrix_csv(f, matrix); });
  std::optional<corex::CorexModel> model;
  if (matrix.row_count() >= 2 && matrix.col_count() >= 1) {
    model = corex::linear_corex(matrix, corex_params(o.corex_k, 300, 1e-8, g.seed));
    corex::save_corex(dest("corex.json"), *model);
    const auto analysis = analyze_bots(matrix, statuses, *model, tweets, o.degree_thresholds);
    write_bot_files(dest("bots_degree.csv"), dest("bots_clusters.csv"), analysis);
  }

  // Prediction tasks.
  PredictSettings settings =
      o.features_config.empty() ? PredictSettings{} : load_predict_settings(o.features_config);
  settings.forest.n_trees = o.n_trees;
  settings = seeded(settings, g.seed);
  if (model) sources.set_corex(&*model);
  std::vector<predict::EvalReport> reports;
  std::vector<predict::SweepRow> sweep;
  for (int task : o.tasks) {
    auto run = run_prediction(task, attempts, sources, settings, parse_sweep(o.sweep));
    print_reports(out, run.reports);
    reports.insert(reports.end(), run.reports.begin(), run.reports.end());
    for (auto& row : run.sweep) sweep.push_back(row);
  }
  write_file(dest("predict_report.csv"), [&](std::ostream& f) { predict::write_report_csv(f, reports); });
  write_file(dest("predict_summary.csv"), [&](std::ostream& f) { predict::write_summary_csv(f, reports); });
  if (!o.sweep.empty()) write_file(dest("sweep.csv"), [&](std::ostream& f) { predict::write_sweep_csv(f, sweep); });

  // Reference values beside the observed ones.
  std::vector<ReferenceRow> ref;
  auto m = [&](double text::ClassifierMetrics::*field) -> std::optional<double> {
    return metrics ? std::optional<double>((*metrics).*field) : std::nullopt;
  };
  ref.push_back({"classifier_base_rate", "0.603", m(&text::ClassifierMetrics::base_rate)});
  ref.push_back({"classifier_accuracy", "0.879", m(&text::ClassifierMetrics::accuracy)});
  ref.push_back({"classifier_precision", "0.895", m(&text::ClassifierMetrics::precision)});
  ref.push_back({"classifier_recall", "0.908", m(&text::ClassifierMetrics::recall)});
  ref.push_back({"classifier_f1", "0.901", m(&text::ClassifierMetrics::f1)});
  for (const auto& c : grid) {
    if (c.threshold == 1.0 && c.window_hours == 1) ref.push_back({"success_ratio_1.0_1h", "<0.05", c.ratio});
  }
  const std::map<std::pair<int, std::string>, std::pair<const char*, const char*>> published = {
      {{1, "twitter"}, {"0.73", "0.75"}}, {{1, "economic"}, {"0.67", "0.68"}}, {{1, "both"}, {"0.74", "0.75"}},
      {{2, "twitter"}, {"0.59", "0.62"}}, {{2, "economic"}, {"0.70", "0.76"}}, {{2, "both"}, {"0.66", "0.71"}},
  };
  for (const auto& r : reports) {
    auto it = published.find({r.task, std::string(features::to_string(r.variant))});
    if (it == published.end()) continue;
    const std::string name = "task" + std::to_string(r.task) + "_" + std::string(features::to_string(r.variant));
    ref.push_back({name + "_macro_auc_all", it->second.first,
                   r.all ? std::optional<double>(r.all->mean) : std::nullopt});
    ref.push_back({name + "_macro_auc_top20", it->second.second,
                   r.top20 ? std::optional<double>(r.top20->mean) : std::nullopt});
  }
  write_file(dest("reference.csv"), [&](std::ostream& f) { write_reference_csv(f, ref); });
}

// ---------------------------------------------------------------- dispatch

struct Options {
  // ingest-check
  std::string market, messages, tweets, statuses, registry, labeled, attempts, model, matrix, corex;
  std::string out;
  // train-classifier / classify
  ClassifierOptions classifier;
  std::string test, metrics_out;
  // extract-pumps
  bool use_labels = false;
  std::size_t max_coins = 3;
  std::string merge_window = "3h";
  // eval-success
  std::vector<double> thresholds = {0.7, 0.8, 0.9, 1.0};
  std::vector<std::string> windows = {"1", "6", "24", "72"};
  std::string target = "first";
  // aggregate-signature
  std::string half_window = "3h";
  std::string step = "5m";
  bool exclude_pump_windows = false;
  // features
  std::string coin;
  std::optional<Timestamp> at;
  std::string attempt_id;
  std::optional<double> target_price;
  std::string unit = "btc";
  int w_econ = 15;
  int w_tw = 15;
  int task = 0;
  // predict
  std::string features_config, summary_out, sweep, sweep_out;
  std::vector<std::string> variants;
  // analyze-bots / fit-corex
  std::vector<double> degree_thresholds;
  std::string clusters_out, matrix_out, window = "6h";
  std::size_t k = 24;
  int max_iter = 300;
  double tolerance = 1e-8;
  // synth
  synth::Scenario scenario;
  bool no_momentum = false;
  // report
  ReportOptions report;
};

std::string required_path(const std::string& value, const char* flag) {
  if (value.empty()) throw ValidationError(std::string("missing ") + flag);
  return value;
}

int dispatch(CLI::App& app, const Globals& g, Options& o, std::ostream& out) {
  auto used = [&](const char* name) { return app.got_subcommand(name); };

  if (used("ingest-check")) {
    if (o.market.empty() && o.messages.empty() && o.tweets.empty() && o.statuses.empty() && o.registry.empty() &&
        o.labeled.empty()) {
      throw ValidationError("ingest-check needs at least one input file");
    }
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    if (!o.market.empty()) {
      const auto market = load_market(o.market);
      std::size_t points = 0;
      std::size_t stale = 0;
      Timestamp lo = 0;
      Timestamp hi = 0;
      bool first = true;
      for (const auto& [coin, s] : market) {
        points += s.points.size();
        stale += stale_hours(s).size();
        if (s.points.empty()) continue;
        lo = first ? s.points.front().timestamp : std::min(lo, s.points.front().timestamp);
        hi = first ? s.points.back().timestamp : std::max(hi, s.points.back().timestamp);
        first = false;
      }
      out << "market: " << market.size() << " coins, " << points << " points";
      if (!first) out << ", " << iso_time(lo) << " .. " << iso_time(hi);
      out << ", " << stale << " stale hours\n";
      summary["market"] = {{"coins", market.size()}, {"points", points}, {"stale_hours", stale}};
    }
    auto message_summary = [&](const std::string& path, const char* name) {
      const auto msgs = load_messages(path);
      const auto pumps =
          std::count_if(msgs.begin(), msgs.end(), [](const auto& m) { return m.label == MessageLabel::pump; });
      const auto labeled =
          std::count_if(msgs.begin(), msgs.end(), [](const auto& m) { return m.label.has_value(); });
      out << name << ": " << msgs.size() << " messages, " << labeled << " labeled, " << pumps << " pump\n";
      summary[name] = {{"messages", msgs.size()}, {"labeled", labeled}, {"pump", pumps}};
    };
    if (!o.messages.empty()) message_summary(o.messages, "messages");
    if (!o.labeled.empty()) message_summary(o.labeled, "labeled");
    if (!o.tweets.empty()) {
      const auto tweets = load_tweets(o.tweets);
      std::set<std::string> users;
      for (const auto& t : tweets) users.insert(t.user_id);
      out << "tweets: " << tweets.size() << " tweets, " << users.size() << " users\n";
      summary["tweets"] = {{"tweets", tweets.size()}, {"users", users.size()}};
    }
    if (!o.statuses.empty()) {
      const auto statuses = load_statuses(o.statuses);
      const auto suspended = std::count_if(statuses.begin(), statuses.end(), [](const auto& kv) {
        return kv.second.status == AccountState::suspended;
      });
      out << "statuses: " << statuses.size() << " accounts, " << suspended << " suspended\n";
      summary["statuses"] = {{"accounts", statuses.size()}, {"suspended", suspended}};
    }
    if (!o.registry.empty()) {
      const auto registry = load_registry(o.registry);
      out << "registry: " << registry.symbols().size() << " symbols, " << registry.aliases().size()
          << " aliases\n";
      summary["registry"] = {{"symbols", registry.symbols().size()}, {"aliases", registry.aliases().size()}};
    }
    if (!o.out.empty()) write_file(output_path(g, o.out), [&](std::ostream& f) { f << summary.dump(1) << '\n'; });
    return 0;
  }

  if (used("train-classifier")) {
    const auto labeled = load_messages(required_path(o.labeled, "--labeled"));
    const auto registry = o.registry.empty() ? CoinRegistry() : load_registry(o.registry);
    const auto clf = text::PumpClassifier::train(labeled, registry, classifier_config(o.classifier, g.seed));
    clf.save(output_path(g, required_path(o.model, "--model")));
    out << "vocabulary " << clf.tfidf().size() << " terms\n";
    if (!o.test.empty()) {
      const auto test = load_messages(o.test);
      const auto metrics = score_against_truth(classify_all(clf, test), test);
      if (!metrics) throw DataError("test set has no labels");
      print_metrics(out, *metrics);
      if (!o.metrics_out.empty()) {
        write_file(output_path(g, o.metrics_out), [&](std::ostream& f) { write_metrics_csv(f, *metrics); });
      }
    }
    return 0;
  }

  if (used("classify")) {
    const auto clf = text::PumpClassifier::load(required_path(o.model, "--model"));
    const auto messages = load_messages(required_path(o.messages, "--messages"));
    const auto classified = classify_all(clf, messages);
    write_file(output_path(g, required_path(o.out, "--out")),
               [&](std::ostream& f) { write_messages(f, classified); });
    const auto pumps = std::count_if(classified.begin(), classified.end(),
                                     [](const auto& m) { return m.label == MessageLabel::pump; });
    out << pumps << " of " << classified.size() << " messages classified as pump\n";
    if (auto metrics = score_against_truth(classified, messages)) {
      print_metrics(out, *metrics);
      if (!o.metrics_out.empty()) {
        write_file(output_path(g, o.metrics_out), [&](std::ostream& f) { write_metrics_csv(f, *metrics); });
      }
    }
    return 0;
  }

  if (used("extract-pumps")) {
    auto messages = load_messages(required_path(o.messages, "--messages"));
    CoinRegistry registry;
    if (o.use_labels) {
      registry = load_registry(required_path(o.registry, "--registry"));
    } else {
      const auto clf = text::PumpClassifier::load(required_path(o.model, "--model"));
      registry = o.registry.empty() ? clf.registry() : load_registry(o.registry);
      messages = classify_all(clf, std::move(messages));
    }
    pumps::AttemptConfig config;
    config.max_coins = o.max_coins;
    config.merge_window = parse_duration(o.merge_window);
    const auto attempts = pumps::build_attempts(messages, registry, config);
    write_file(output_path(g, required_path(o.out, "--out")),
               [&](std::ostream& f) { pumps::write_attempts(f, attempts); });
    out << attempts.size() << " attempts\n";
    return 0;
  }

  if (used("eval-success")) {
    const auto attempts = pumps::load_attempts(required_path(o.attempts, "--attempts"));
    const auto market = load_market(required_path(o.market, "--market"));
    if (o.target != "first" && o.target != "max") throw ValidationError("--target must be first or max");
    const auto windows = parse_int_list(o.windows, "window");
    const auto grid = pumps::success_ratio_grid(attempts, market, o.thresholds, windows,
                                                o.target == "max" ? pumps::TargetChoice::max
                                                                  : pumps::TargetChoice::first);
    write_file(output_path(g, required_path(o.out, "--out")), [&](std::ostream& f) { pumps::write_grid_csv(f, grid); });
    out << grid.size() << " grid cells\n";
    return 0;
  }

  if (used("aggregate-signature")) {
    const auto attempts = pumps::load_attempts(required_path(o.attempts, "--attempts"));
    const auto market = load_market(required_path(o.market, "--market"));
    const auto tweets = load_tweets(required_path(o.tweets, "--tweets"));
    signature::SignatureConfig config;
    config.half_window = parse_duration(o.half_window);
    config.step = parse_duration(o.step);
    config.exclude_pump_windows = o.exclude_pump_windows;
    config.seed = derive_seed(g.seed, "signature");
    const auto report = signature::aggregate_signatures(attempts, market, tweets, config);
    write_file(output_path(g, required_path(o.out, "--out")),
               [&](std::ostream& f) { signature::write_curves_csv(f, report.curves); });
    out << report.curves.size() << " curves, " << report.skipped_segments << " segments skipped\n";
    return 0;
  }

  if (used("features")) {
    const auto market = load_market(required_path(o.market, "--market"));
    const auto tweets = load_tweets(required_path(o.tweets, "--tweets"));
    features::FeatureSources sources(market, tweets);
    std::vector<pumps::PumpAttempt> attempts;
    if (!o.attempts.empty()) attempts = pumps::load_attempts(o.attempts);
    std::optional<corex::CorexModel> model;
    if (!o.corex.empty()) {
      model = corex::load_corex(o.corex);
      sources.set_corex(&*model);
    }
    features::FeatureConfig fc{o.w_econ, o.w_tw};
    fc.validate();
    if (o.task != 0) {
      PredictSettings s = o.features_config.empty() ? PredictSettings{} : load_predict_settings(o.features_config);
      if (o.features_config.empty()) s.task.features = fc;
      s = seeded(s, g.seed);
      attach_components(sources, attempts, s.components);
      const auto data = predict::build_task(o.task, attempts, sources, s.task);
      std::vector<features::FeatureRow> rows;
      for (const auto& [coin, ds] : data.datasets) rows.insert(rows.end(), ds.rows.begin(), ds.rows.end());
      const auto path = output_path(g, required_path(o.out, "--out"));
      write_file(path, [&](std::ostream& f) { features::write_dataset_csv(f, rows); });
      auto schema = path;
      schema.replace_extension(".schema.json");
      write_file(schema, [&](std::ostream& f) { features::write_schema_json(f, rows); });
      out << rows.size() << " rows from " << data.datasets.size() << " coins, " << data.excluded.size()
          << " coins excluded\n";
      return 0;
    }
    if (o.coin.empty() || !o.at) throw ValidationError("features needs --coin and --at (or --task)");
    std::optional<features::TargetSpec> target;
    if (!o.attempt_id.empty()) {
      auto it = std::find_if(attempts.begin(), attempts.end(), [&](const auto& a) { return a.id == o.attempt_id; });
      if (it == attempts.end()) throw ValidationError("unknown attempt " + o.attempt_id);
      if (it->target_prices.empty()) throw pumps::UnpricedAttempt("unpriced attempt " + it->id);
      target = features::TargetSpec{it->target_prices.front(), it->unit};
    } else if (o.target_price) {
      if (o.unit != "btc" && o.unit != "usd") throw ValidationError("--unit must be btc or usd");
      target = features::TargetSpec{*o.target_price, o.unit == "usd" ? pumps::PriceUnit::usd : pumps::PriceUnit::btc};
    }
    if (!attempts.empty()) {
      attach_components(sources, attempts, graph::ComponentParams{});
    }
    const auto row = features::assemble_row(o.coin, *o.at, std::nullopt, sources, fc, target);
    const auto names = features::column_names(row);
    const auto values = row.values();
    nlohmann::ordered_json j;
    j["coin"] = row.coin;
    j["timestamp"] = row.timestamp;
    j["columns"] = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < names.size(); ++i) j["columns"][names[i]] = values[i];
    const std::string text = j.dump(1);
    if (o.out.empty()) {
      out << text << '\n';
    } else {
      write_file(output_path(g, o.out), [&](std::ostream& f) { f << text << '\n'; });
    }
    return 0;
  }

  if (used("predict")) {
    if (o.task != 1 && o.task != 2) throw ValidationError("--task must be 1 or 2");
    const auto attempts = pumps::load_attempts(required_path(o.attempts, "--attempts"));
    const auto market = load_market(required_path(o.market, "--market"));
    const auto tweets = load_tweets(required_path(o.tweets, "--tweets"));
    PredictSettings s = o.features_config.empty() ? PredictSettings{} : load_predict_settings(o.features_config);
    if (!o.variants.empty()) s.variants = parse_variants(o.variants);
    s = seeded(s, g.seed);
    features::FeatureSources sources(market, tweets);
    std::optional<corex::CorexModel> model;
    if (!o.corex.empty()) {
      model = corex::load_corex(o.corex);
      sources.set_corex(&*model);
    }
    const auto sweep = parse_sweep(o.sweep);
    const auto run = run_prediction(o.task, attempts, sources, s, sweep);
    print_reports(out, run.reports);
    write_file(output_path(g, required_path(o.out, "--out")),
               [&](std::ostream& f) { predict::write_report_csv(f, run.reports); });
    if (!o.summary_out.empty()) {
      write_file(output_path(g, o.summary_out), [&](std::ostream& f) { predict::write_summary_csv(f, run.reports); });
    }
    if (sweep) {
      if (o.sweep_out.empty()) throw ValidationError("--sweep needs --sweep-out");
      write_file(output_path(g, o.sweep_out), [&](std::ostream& f) { predict::write_sweep_csv(f, run.sweep); });
      for (auto v : s.variants) {
        if (auto best = predict::best_window(run.sweep, v)) {
          out << "best window for " << features::to_string(v) << ": " << best->w << "h\n";
        }
      }
    }
    return 0;
  }

  if (used("analyze-bots")) {
    std::ifstream mf(required_path(o.matrix, "--matrix"), std::ios::binary);
    if (!mf) throw DataError("cannot open " + o.matrix);
    const auto matrix = graph::read_matrix_csv(mf, o.matrix);
    const auto statuses = load_statuses(required_path(o.statuses, "--statuses"));
    const auto model = corex::load_corex(required_path(o.corex, "--corex"));
    std::vector<Tweet> tweets;
    if (!o.tweets.empty()) tweets = load_tweets(o.tweets);
    const auto analysis = analyze_bots(matrix, statuses, model, tweets, thresholds_or_default(o.degree_thresholds));
    const auto degree_path = output_path(g, required_path(o.out, "--out"));
    const auto cluster_path =
        o.clusters_out.empty() ? sibling(degree_path, "_clusters") : output_path(g, o.clusters_out);
    write_bot_files(degree_path, cluster_path, analysis);
    out << analysis.degrees.size() << " degree rows, " << analysis.clusters.size() << " clusters\n";
    return 0;
  }

  if (used("fit-corex")) {
    graph::AffiliationMatrix matrix;
    if (!o.matrix.empty()) {
      std::ifstream mf(o.matrix, std::ios::binary);
      if (!mf) throw DataError("cannot open " + o.matrix);
      matrix = graph::read_matrix_csv(mf, o.matrix);
    } else {
      const auto attempts = pumps::load_attempts(required_path(o.attempts, "--attempts or --matrix"));
      const auto tweets = load_tweets(required_path(o.tweets, "--tweets"));
      matrix = graph::pump_user_matrix(attempts, TweetIndex(tweets), parse_duration(o.window));
    }
    if (!o.matrix_out.empty()) {
      write_file(output_path(g, o.matrix_out), [&](std::ostream& f) { graph::write_matrix_csv(f, matrix); });
    }
    const auto model = corex::linear_corex(matrix, corex_params(o.k, o.max_iter, o.tolerance, g.seed));
    corex::save_corex(output_path(g, required_path(o.out, "--out")), model);
    for (const auto& w : model.warnings) out << "warning: " << w << '\n';
    out << "k " << model.k << ", " << model.variables.size() << " users, " << model.objective_trace.size()
        << " iterations\n";
    return 0;
  }

  if (used("synth")) {
    if (g.out_dir.empty()) throw ValidationError("synth needs --out-dir");
    auto sc = o.scenario;
    sc.seed = g.seed;
    if (o.no_momentum) sc.momentum = false;
    const auto result = synth::generate(sc);
    synth::write_files(result, g.out_dir);
    out << result.pumps.size() << " pumps, " << result.messages.size() << " messages, " << result.tweets.size()
        << " tweets\n";
    return 0;
  }

  if (used("report")) {
    run_report(g, o.report, out);
    return 0;
  }
  throw ValidationError("no subcommand given");
}

void build_app(CLI::App& app, Globals& g, Options& o) {
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.config_formatter(std::make_shared<JsonOrTomlConfig>());
  app.set_config("--config", "", "TOML or JSON file mirroring the flags")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Master seed; every random stream derives from it");
  app.add_option("--out-dir", g.out_dir, "Directory for outputs; relative output paths land here");

  auto* ingest = app.add_subcommand("ingest-check", "Load input files and print what they hold");
  ingest->add_option("--market", o.market, "Market CSV");
  ingest->add_option("--messages", o.messages, "Channel messages JSONL");
  ingest->add_option("--labeled", o.labeled, "Labeled messages JSONL");
  ingest->add_option("--tweets", o.tweets, "Tweets JSONL");
  ingest->add_option("--statuses", o.statuses, "Account statuses CSV");
  ingest->add_option("--registry", o.registry, "Coin registry");
  ingest->add_option("--out", o.out, "Optional JSON summary");

  auto add_classifier_flags = [&](CLI::App* sub, ClassifierOptions& c) {
    sub->add_option("--lambda", c.lambda, "L2 regularization strength")->check(CLI::PositiveNumber);
    sub->add_option("--epochs", c.epochs, "SGD epochs")->check(CLI::PositiveNumber);
    sub->add_option("--max-df", c.max_df, "Drop terms in more than this share of documents");
    sub->add_option("--min-df", c.min_df, "Drop terms in fewer than this share of documents");
    sub->add_option("--ngram-max", c.ngram_max, "Longest word n-gram")->check(CLI::Range(1, 5));
    sub->add_flag("--no-stem", c.no_stem, "Skip Porter stemming");
  };

  auto* train = app.add_subcommand("train-classifier", "Train the pump message classifier");
  train->add_option("--labeled", o.labeled, "Labeled messages JSONL")->required();
  train->add_option("--model", o.model, "Model JSON to write")->required();
  train->add_option("--registry", o.registry, "Coin registry");
  train->add_option("--test", o.test, "Labeled messages to evaluate on");
  train->add_option("--metrics-out", o.metrics_out, "Metrics CSV for --test");
  add_classifier_flags(train, o.classifier);

  auto* classify = app.add_subcommand("classify", "Label messages with a trained classifier");
  classify->add_option("--model", o.model, "Model JSON")->required();
  classify->add_option("--messages", o.messages, "Messages JSONL")->required();
  classify->add_option("--out", o.out, "Labeled messages JSONL to write")->required();
  classify->add_option("--metrics-out", o.metrics_out, "Metrics CSV against the input labels");

  auto* extract = app.add_subcommand("extract-pumps", "Aggregate pump messages into attempts");
  extract->add_option("--messages", o.messages, "Messages JSONL")->required();
  extract->add_option("--model", o.model, "Classifier model JSON");
  extract->add_option("--registry", o.registry, "Coin registry (defaults to the model's)");
  extract->add_flag("--use-labels", o.use_labels, "Trust the labels in the messages file instead of a model");
  extract->add_option("--max-coins", o.max_coins, "Skip messages mentioning more coins")->check(CLI::PositiveNumber);
  extract->add_option("--merge-window", o.merge_window, "Merge window, e.g. 3h");
  extract->add_option("--out", o.out, "Attempts JSONL to write")->required();

  auto* success = app.add_subcommand("eval-success", "Success ratios over thresholds and windows");
  success->add_option("--attempts", o.attempts, "Attempts JSONL")->required();
  success->add_option("--market", o.market, "Market CSV")->required();
  success->add_option("--thresholds", o.thresholds, "Fractions of the target")->delimiter(',');
  success->add_option("--windows", o.windows, "Windows in hours")->delimiter(',');
  success->add_option("--target", o.target, "Which target decides: first or max");
  success->add_option("--out", o.out, "Grid CSV to write")->required();

  auto* sig = app.add_subcommand("aggregate-signature", "Mean normalized price and tweet curves around pumps");
  sig->add_option("--attempts", o.attempts, "Attempts JSONL")->required();
  sig->add_option("--market", o.market, "Market CSV")->required();
  sig->add_option("--tweets", o.tweets, "Tweets JSONL")->required();
  sig->add_option("--half-window", o.half_window, "Half window, e.g. 3h");
  sig->add_option("--step", o.step, "Sampling step, e.g. 5m");
  sig->add_flag("--exclude-pump-windows", o.exclude_pump_windows, "Keep random centers away from pumps");
  sig->add_option("--out", o.out, "Curves CSV to write")->required();

  auto* feat = app.add_subcommand("features", "Inspect one feature row or emit a task dataset");
  feat->add_option("--market", o.market, "Market CSV")->required();
  feat->add_option("--tweets", o.tweets, "Tweets JSONL")->required();
  feat->add_option("--attempts", o.attempts, "Attempts JSONL");
  feat->add_option("--corex", o.corex, "CorEx model JSON");
  feat->add_option("--coin", o.coin, "Coin symbol");
  feat->add_option("--at", o.at, "UTC seconds");
  feat->add_option("--attempt-id", o.attempt_id, "Take the target family from this attempt");
  feat->add_option("--target-price", o.target_price, "Target price for the target family");
  feat->add_option("--unit", o.unit, "Unit of --target-price: btc or usd");
  feat->add_option("--w-econ", o.w_econ, "Economic window in hours");
  feat->add_option("--w-tw", o.w_tw, "Twitter window in hours");
  feat->add_option("--task", o.task, "Emit the dataset of task 1 or 2 instead of one row");
  feat->add_option("--features-config", o.features_config, "Features config JSON for --task");
  feat->add_option("--out", o.out, "Output file (stdout when omitted for one row)");

  auto* pred = app.add_subcommand("predict", "Walk-forward evaluation of a prediction task");
  pred->add_option("--task", o.task, "1: will a pump happen, 2: will it succeed")->required();
  pred->add_option("--features-config", o.features_config, "Features config JSON");
  pred->add_option("--attempts", o.attempts, "Attempts JSONL")->required();
  pred->add_option("--market", o.market, "Market CSV")->required();
  pred->add_option("--tweets", o.tweets, "Tweets JSONL")->required();
  pred->add_option("--corex", o.corex, "CorEx model JSON for the embedding features");
  pred->add_option("--variants", o.variants, "Feature variants")->delimiter(',');
  pred->add_option("--out", o.out, "Per-coin report CSV")->required();
  pred->add_option("--summary-out", o.summary_out, "Macro summary CSV");
  pred->add_option("--sweep", o.sweep, "Window sweep range, e.g. 1-24");
  pred->add_option("--sweep-out", o.sweep_out, "Sweep CSV");

  auto* bots_cmd = app.add_subcommand("analyze-bots", "Degree table and cluster report");
  bots_cmd->add_option("--matrix", o.matrix, "Pump-user matrix CSV")->required();
  bots_cmd->add_option("--statuses", o.statuses, "Account statuses CSV")->required();
  bots_cmd->add_option("--corex", o.corex, "CorEx model JSON")->required();
  bots_cmd->add_option("--tweets", o.tweets, "Tweets JSONL for Telegram activity");
  bots_cmd->add_option("--degree-thresholds", o.degree_thresholds, "Degree thresholds")->delimiter(',');
  bots_cmd->add_option("--out", o.out, "Degree table CSV")->required();
  bots_cmd->add_option("--clusters-out", o.clusters_out, "Cluster report CSV (default <out>_clusters.csv)");

  auto* fit = app.add_subcommand("fit-corex", "Fit the user embedding on a pump-user matrix");
  fit->add_option("--matrix", o.matrix, "Pump-user matrix CSV");
  fit->add_option("--attempts", o.attempts, "Attempts JSONL (builds the matrix)");
  fit->add_option("--tweets", o.tweets, "Tweets JSONL (builds the matrix)");
  fit->add_option("--window", o.window, "Pre-anchor window for the matrix");
  fit->add_option("--matrix-out", o.matrix_out, "Write the matrix CSV");
  fit->add_option("--k", o.k, "Latent factors")->check(CLI::PositiveNumber);
  fit->add_option("--max-iter", o.max_iter, "Iteration cap")->check(CLI::PositiveNumber);
  fit->add_option("--tolerance", o.tolerance, "Relative objective change that stops the fit");
  fit->add_option("--out", o.out, "Model JSON to write")->required();

  auto* syn = app.add_subcommand("synth", "Generate a synthetic scenario into --out-dir");
  syn->add_option("--coins", o.scenario.coins, "Number of coins")->check(CLI::PositiveNumber);
  syn->add_option("--days", o.scenario.duration_days, "Duration in days");
  syn->add_option("--pumps-per-coin", o.scenario.pumps_per_coin, "Pumps per coin");
  syn->add_option("--success-rate", o.scenario.success_rate, "Share of successful pumps");
  syn->add_flag("--no-momentum", o.no_momentum, "No price ramp before successful pumps");
  syn->add_option("--bots-per-coin", o.scenario.bots_per_coin, "Bot accounts per coin");
  syn->add_option("--humans", o.scenario.humans, "Human accounts");
  syn->add_option("--labeled-count", o.scenario.labeled_messages, "Labeled training messages");

  auto* rep = app.add_subcommand("report", "Run every stage on a data directory and write reports");
  rep->add_option("--data-dir", o.report.data_dir, "Directory written by synth (or the same layout)")->required();
  rep->add_option("--tasks", o.report.tasks, "Prediction tasks")->delimiter(',');
  rep->add_option("--n-trees", o.report.n_trees, "Forest size")->check(CLI::PositiveNumber);
  rep->add_option("--corex-k", o.report.corex_k, "Latent factors")->check(CLI::PositiveNumber);
  rep->add_option("--degree-thresholds", o.report.degree_thresholds, "Degree thresholds")->delimiter(',');
  rep->add_option("--sweep", o.report.sweep, "Window sweep range, e.g. 1-24");
  rep->add_option("--features-config", o.report.features_config, "Features config JSON");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Pump-and-dump detection and prediction pipeline", "pumpwatch");
  Globals g;
  Options o;
  build_app(app, g, o);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }
  try {
    return dispatch(app, g, o, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace pumpwatch::cli
