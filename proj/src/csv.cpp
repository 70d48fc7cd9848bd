#include "observer/csv.hpp"

#include "observer/error.hpp"

namespace observer::csv {

std::optional<std::vector<std::string>> Reader::next_row()
{
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    row_line_ = line_;
    char ch = 0;
    while (in_.get(ch)) {
        any = true;
        if (in_quotes) {
            if (ch == '"') {
                if (in_.peek() == '"') {
                    in_.get(ch);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line_;
                field.push_back(ch);
            }
            continue;
        }
        if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch == '\r') {
            if (in_.peek() == '\n') in_.get(ch);
            ++line_;
            fields.push_back(std::move(field));
            return fields;
        } else if (ch == '\n') {
            ++line_;
            fields.push_back(std::move(field));
            return fields;
        } else {
            field.push_back(ch);
        }
    }
    if (in_quotes) {
        throw FormatError("csv: unterminated quoted field starting on line " +
                          std::to_string(row_line_));
    }
    if (!any) return std::nullopt;
    fields.push_back(std::move(field));
    return fields;
}

std::string quote(const std::string& field, bool force)
{
    if (!force && field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields)
{
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << quote(fields[i]);
    }
    out << "\r\n";
}

void write_row(std::ostream& out, const std::vector<std::string>& fields,
               const std::vector<bool>& always_quote)
{
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << quote(fields[i], i < always_quote.size() && always_quote[i]);
    }
    out << "\r\n";
}

}  // namespace observer::csv
