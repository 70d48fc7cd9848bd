#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace observer::csv {

/// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
/// line breaks. Returns std::nullopt at end of input.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::optional<std::vector<std::string>> next_row();

    /// 1-based physical line on which the last returned row started.
    std::size_t line() const { return row_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 1;
    std::size_t row_line_ = 0;
};

/// Quotes a field when it contains a delimiter, quote or line break, or
/// unconditionally when `force` is set.
std::string quote(const std::string& field, bool force = false);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Like write_row, but columns flagged in `always_quote` are quoted even
/// when they would not need it.
void write_row(std::ostream& out, const std::vector<std::string>& fields,
               const std::vector<bool>& always_quote);

}  // namespace observer::csv
