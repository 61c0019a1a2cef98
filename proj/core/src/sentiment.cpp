#include "pumpwatch/sentiment.hpp"

#include <cctype>
#include <cmath>

#include "pumpwatch/error.hpp"

namespace pumpwatch::sentiment {

void Lexicon::validate() const {
  for (const auto& [word, v] : valence) {
    if (!(v >= -1.0 && v <= 1.0)) throw ValidationError("valence of '" + word + "' outside [-1, 1]");
  }
  for (const auto& [word, m] : boosters) {
    if (!(m > 0.0)) throw ValidationError("booster '" + word + "' must have a positive multiplier");
  }
}

Lexicon Lexicon::negated() const {
  Lexicon out = *this;
  for (auto& [word, v] : out.valence) v = -v;
  return out;
}

namespace {

Lexicon make_builtin() {
  Lexicon lex;
  const std::pair<const char*, double> positive[] = {
      {"good", 0.6},       {"great", 0.8},      {"excellent", 0.9},  {"amazing", 0.9},    {"awesome", 0.8},
      {"best", 0.8},       {"better", 0.5},     {"nice", 0.5},       {"love", 0.7},       {"like", 0.3},
      {"happy", 0.6},      {"glad", 0.5},       {"win", 0.6},        {"winning", 0.6},    {"winner", 0.6},
      {"profit", 0.7},     {"profits", 0.7},    {"profitable", 0.7}, {"gain", 0.6},       {"gains", 0.6},
      {"bull", 0.6},       {"bullish", 0.8},    {"moon", 0.8},       {"mooning", 0.9},    {"rocket", 0.7},
      {"pump", 0.4},       {"pumping", 0.5},    {"rally", 0.6},      {"rallying", 0.6},   {"surge", 0.6},
      {"surging", 0.6},    {"soar", 0.7},       {"soaring", 0.7},    {"breakout", 0.6},   {"boom", 0.6},
      {"rich", 0.6},       {"wealth", 0.5},     {"strong", 0.5},     {"stronger", 0.5},   {"solid", 0.4},
      {"safe", 0.4},       {"secure", 0.4},     {"trust", 0.5},      {"trusted", 0.5},    {"legit", 0.6},
      {"undervalued", 0.5}, {"cheap", 0.3},     {"opportunity", 0.5}, {"potential", 0.4}, {"promising", 0.6},
      {"huge", 0.4},       {"massive", 0.4},    {"explode", 0.5},    {"exploding", 0.5},  {"green", 0.4},
      {"up", 0.2},         {"rise", 0.4},       {"rising", 0.4},     {"high", 0.2},       {"higher", 0.3},
      {"growth", 0.5},     {"growing", 0.4},    {"success", 0.7},    {"successful", 0.7}, {"easy", 0.3},
      {"free", 0.3},       {"bonus", 0.4},      {"reward", 0.5},     {"rewards", 0.5},    {"hodl", 0.3},
      {"accumulate", 0.3}, {"buy", 0.2},        {"long", 0.2},       {"hot", 0.4},        {"gem", 0.6},
      {"gems", 0.6},       {"fantastic", 0.9},  {"wonderful", 0.9},  {"perfect", 0.8},    {"exciting", 0.6},
      {"excited", 0.6},    {"confident", 0.5},  {"optimistic", 0.6}, {"recover", 0.4},    {"recovery", 0.4},
      {"support", 0.3},    {"partnership", 0.4}, {"adoption", 0.4},  {"innovative", 0.5}, {"innovation", 0.5},
      {"lambo", 0.6},      {"ath", 0.5},        {"winners", 0.6},    {"thanks", 0.4},     {"thank", 0.4},
      {"congrats", 0.6},   {"congratulations", 0.6}, {"lucky", 0.5}, {"fun", 0.5},        {"cool", 0.4},
      {"yes", 0.2},        {"wow", 0.5},        {"lol", 0.3},        {"strongbuy", 0.7},  {"fomo", 0.2},
  };
  const std::pair<const char*, double> negative[] = {
      {"bad", -0.6},        {"terrible", -0.9},  {"awful", -0.9},     {"horrible", -0.9},  {"worst", -0.9},
      {"worse", -0.6},      {"poor", -0.5},      {"hate", -0.8},      {"sad", -0.6},       {"angry", -0.7},
      {"lose", -0.6},       {"losing", -0.6},    {"loss", -0.6},      {"losses", -0.6},    {"lost", -0.6},
      {"bear", -0.5},       {"bearish", -0.8},   {"dump", -0.6},      {"dumping", -0.7},   {"dumped", -0.7},
      {"crash", -0.8},      {"crashing", -0.8},  {"crashed", -0.8},   {"collapse", -0.8},  {"plunge", -0.7},
      {"plunging", -0.7},   {"drop", -0.4},      {"dropping", -0.5},  {"fall", -0.4},      {"falling", -0.5},
      {"down", -0.2},       {"low", -0.2},       {"lower", -0.3},     {"red", -0.4},       {"bleeding", -0.7},
      {"rekt", -0.8},       {"scam", -0.9},      {"scammer", -0.9},   {"scammers", -0.9},  {"fraud", -0.9},
      {"fake", -0.7},       {"ponzi", -0.9},     {"rug", -0.8},       {"rugpull", -0.9},   {"hack", -0.7},
      {"hacked", -0.8},     {"stolen", -0.8},    {"theft", -0.8},     {"risk", -0.3},      {"risky", -0.5},
      {"danger", -0.6},     {"dangerous", -0.7}, {"warning", -0.5},   {"beware", -0.6},    {"avoid", -0.5},
      {"fear", -0.6},       {"panic", -0.7},     {"fud", -0.5},       {"worry", -0.5},     {"worried", -0.5},
      {"concern", -0.4},    {"problem", -0.4},   {"problems", -0.4},  {"issue", -0.3},     {"fail", -0.7},
      {"failed", -0.7},     {"failure", -0.7},   {"weak", -0.5},      {"weaker", -0.5},    {"broke", -0.6},
      {"broken", -0.6},     {"bankrupt", -0.9},  {"debt", -0.4},      {"overvalued", -0.5}, {"bubble", -0.5},
      {"manipulation", -0.6}, {"manipulated", -0.6}, {"shady", -0.6}, {"sketchy", -0.6},  {"suspicious", -0.5},
      {"illegal", -0.7},    {"ban", -0.6},       {"banned", -0.6},    {"lawsuit", -0.6},   {"sell", -0.2},
      {"selling", -0.3},    {"selloff", -0.6},   {"short", -0.2},     {"dead", -0.8},      {"death", -0.8},
      {"worthless", -0.9},  {"useless", -0.7},   {"garbage", -0.8},   {"trash", -0.8},     {"shit", -0.7},
      {"shitcoin", -0.6},   {"sucks", -0.7},     {"stupid", -0.7},    {"ugly", -0.6},      {"regret", -0.6},
      {"sorry", -0.3},      {"ugh", -0.5},       {"no", -0.2},        {"delay", -0.4},     {"delayed", -0.4},
      {"bagholder", -0.6},  {"bags", -0.3},      {"liquidated", -0.8}, {"liquidation", -0.7}, {"volatile", -0.3},
  };
  for (const auto& [w, v] : positive) lex.valence.emplace(w, v);
  for (const auto& [w, v] : negative) lex.valence.emplace(w, v);
  for (const char* w : {"not", "no", "never", "none", "nobody", "nothing", "neither", "nor", "without", "dont",
                        "doesnt", "didnt", "isnt", "arent", "wasnt", "werent", "wont", "cant", "cannot", "shouldnt",
                        "wouldnt", "couldnt", "aint", "hardly"}) {
    lex.negations.emplace(w);
  }
  const std::pair<const char*, double> boosters[] = {
      {"very", 1.3},   {"really", 1.3},    {"extremely", 1.5}, {"super", 1.4},   {"so", 1.2},
      {"too", 1.2},    {"totally", 1.3},   {"absolutely", 1.4}, {"incredibly", 1.5}, {"highly", 1.3},
      {"most", 1.2},   {"hugely", 1.4},    {"insanely", 1.5},  {"slightly", 0.6}, {"somewhat", 0.7},
      {"barely", 0.5}, {"kinda", 0.7},     {"little", 0.7},
  };
  for (const auto& [w, m] : boosters) lex.boosters.emplace(w, m);
  lex.validate();
  return lex;
}

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

}  // namespace

const Lexicon& Lexicon::builtin() {
  static const Lexicon lex = make_builtin();
  return lex;
}

std::vector<std::string> sentiment_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_char(c)) {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (ch == '\'' && !cur.empty()) {
      continue;
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double score(std::string_view text, const Lexicon& lexicon, double alpha) {
  if (!(alpha > 0.0)) throw ValidationError("sentiment alpha must be positive");
  const auto words = sentiment_words(text);
  double sum = 0.0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto it = lexicon.valence.find(words[i]);
    if (it == lexicon.valence.end()) continue;
    double v = it->second;
    if (i >= 1) {
      auto b = lexicon.boosters.find(words[i - 1]);
      if (b != lexicon.boosters.end()) v *= b->second;
    }
    for (std::size_t back = 1; back <= 2 && back <= i; ++back) {
      if (lexicon.negations.count(words[i - back])) {
        v = -v;
        break;
      }
    }
    sum += v;
  }
  if (sum == 0.0) return 0.0;
  return sum / std::sqrt(sum * sum + alpha);
}

}  // namespace pumpwatch::sentiment
