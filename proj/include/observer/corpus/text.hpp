#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace observer::corpus {

/// Lowercases ASCII letters, turns every ASCII punctuation character into a
/// token boundary and splits on whitespace. Bytes >= 0x80 are kept verbatim.
std::vector<std::string> normalize_tokens(std::string_view text);

/// normalize_tokens joined by single spaces.
std::string normalize_text(std::string_view text);

std::string join(const std::vector<std::string>& tokens, std::string_view separator = " ");

}  // namespace observer::corpus
