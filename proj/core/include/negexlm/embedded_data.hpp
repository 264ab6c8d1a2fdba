#pragma once

#include <string_view>

namespace negexlm::data {

/// Contents of data/lexicon.txt as compiled into the library.
std::string_view builtin_lexicon();
/// Contents of data/verb_table.txt as compiled into the library.
std::string_view builtin_verb_table();

}  // namespace negexlm::data
