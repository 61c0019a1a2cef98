#pragma once

#include <string>
#include <string_view>

namespace pumpwatch::text {

// Porter (1980) suffix-stripping stemmer with the revised step 1c. Expects a lowercase ASCII word;
// words containing anything other than a-z are returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace pumpwatch::text
