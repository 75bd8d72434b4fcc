#ifndef FEEDEROPT_TEXT_DATA_HPP
#define FEEDEROPT_TEXT_DATA_HPP

#include <map>
#include <string>
#include <vector>

namespace feederopt {

// Sectioned plain-text tables:
//   [section]
//   key = v1 v2 v3        (keyed array)
//   a b c                 (table row)
// '#' starts a comment, blank lines are skipped. Section and key names are
// case-sensitive. Rows keep their source line number for error messages.
struct TextRow {
    std::vector<std::string> fields;
    int line = 0;
};

struct TextSection {
    std::vector<TextRow> rows;                        // bare rows in order
    std::map<std::string, TextRow> keyed;             // "key = ..." entries
};

struct TextDocument {
    std::string source;                               // path or label for errors
    std::map<std::string, TextSection> sections;

    bool has(const std::string& section) const;
    const TextSection& at(const std::string& section) const;  // InputError if absent
};

TextDocument parse_text_document(const std::string& path);
TextDocument parse_text_string(const std::string& content, const std::string& label);

// Field conversions with location-aware errors.
double to_double(const TextDocument& doc, const TextRow& row, size_t idx,
                 const std::string& what);
int to_int(const TextDocument& doc, const TextRow& row, size_t idx,
           const std::string& what);
std::vector<double> to_double_vector(const TextDocument& doc, const TextRow& row,
                                     const std::string& what);

} // namespace feederopt

#endif
