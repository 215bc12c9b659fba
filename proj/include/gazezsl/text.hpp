#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gazezsl::text {

// Lowercased maximal runs of ASCII letters.
std::vector<std::string> tokenize(std::string_view raw);

bool is_stop_word(std::string_view word);

// Porter (1980) suffix-stripping stemmer. Input must be lowercase ASCII.
std::string porter_stem(std::string_view word);

}  // namespace gazezsl::text
