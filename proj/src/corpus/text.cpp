#include "observer/corpus/text.hpp"

#include <cctype>

namespace observer::corpus {

std::vector<std::string> normalize_tokens(std::string_view text)
{
    std::vector<std::string> tokens;
    std::string current;
    for (char raw : text) {
        const auto ch = static_cast<unsigned char>(raw);
        const bool boundary = ch < 0x80 && (std::isspace(ch) || std::ispunct(ch) || ch < 0x20);
        if (boundary) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(ch < 0x80 ? static_cast<char>(std::tolower(ch)) : raw);
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::string normalize_text(std::string_view text)
{
    return join(normalize_tokens(text));
}

std::string join(const std::vector<std::string>& tokens, std::string_view separator)
{
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += separator;
        out += tokens[i];
    }
    return out;
}

}  // namespace observer::corpus
