#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace pumpwatch::sentiment {

// Word valences in [-1, 1] plus negators and intensity boosters.
struct Lexicon {
  std::map<std::string, double, std::less<>> valence;
  std::set<std::string, std::less<>> negations;
  std::map<std::string, double, std::less<>> boosters;  // multiplier > 0

  // Throws ValidationError on a valence outside [-1, 1] or a nonpositive
  // booster.
  void validate() const;

  // Same lexicon with every valence sign flipped.
  Lexicon negated() const;

  // About 200 finance and crypto-slang terms.
  static const Lexicon& builtin();
};

// Lowercased words; apostrophes are dropped so "don't" reads "dont".
std::vector<std::string> sentiment_words(std::string_view text);

// Sum of word valences; a negator up to two words before a word flips its
// sign, a booster right before it scales it. The sum s is squashed to
// s / sqrt(s^2 + alpha).
double score(std::string_view text, const Lexicon& lexicon = Lexicon::builtin(), double alpha = 15.0);

}  // namespace pumpwatch::sentiment
