#include "feederopt/text_data.hpp"

#include "feederopt/common.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace feederopt {

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

bool TextDocument::has(const std::string& section) const {
    return sections.count(section) != 0;
}

const TextSection& TextDocument::at(const std::string& section) const {
    auto it = sections.find(section);
    if (it == sections.end())
        throw InputError(source + ": missing required section [" + section + "]");
    return it->second;
}

static std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok)
        out.push_back(tok);
    return out;
}

static TextDocument parse_lines(std::istream& in, const std::string& label) {
    TextDocument doc;
    doc.source = label;
    std::string cur;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        auto tokens = tokenize(line);
        if (tokens.empty())
            continue;
        const std::string& first = tokens.front();
        if (first.size() >= 2 && first.front() == '[' && first.back() == ']') {
            cur = first.substr(1, first.size() - 2);
            doc.sections[cur];  // sections may legitimately be empty
            continue;
        }
        if (cur.empty())
            throw InputError(label + ":" + std::to_string(lineno) +
                             ": data before any [section] header");
        // keyed form "name = v1 v2 ..."
        if (tokens.size() >= 2 && tokens[1] == "=") {
            TextRow row;
            row.line = lineno;
            row.fields.assign(tokens.begin() + 2, tokens.end());
            doc.sections[cur].keyed[tokens[0]] = std::move(row);
            continue;
        }
        TextRow row;
        row.line = lineno;
        row.fields = std::move(tokens);
        doc.sections[cur].rows.push_back(std::move(row));
    }
    return doc;
}

TextDocument parse_text_document(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open input file: " + path);
    return parse_lines(in, path);
}

TextDocument parse_text_string(const std::string& content, const std::string& label) {
    std::istringstream in(content);
    return parse_lines(in, label);
}

static std::string where(const TextDocument& doc, const TextRow& row) {
    return doc.source + ":" + std::to_string(row.line);
}

double to_double(const TextDocument& doc, const TextRow& row, size_t idx,
                 const std::string& what) {
    if (idx >= row.fields.size())
        throw InputError(where(doc, row) + ": missing field '" + what + "'");
    try {
        size_t pos = 0;
        double v = std::stod(row.fields[idx], &pos);
        if (pos != row.fields[idx].size())
            throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw InputError(where(doc, row) + ": field '" + what + "' is not a number: '" +
                         row.fields[idx] + "'");
    }
}

int to_int(const TextDocument& doc, const TextRow& row, size_t idx,
           const std::string& what) {
    double v = to_double(doc, row, idx, what);
    int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw InputError(where(doc, row) + ": field '" + what + "' must be an integer");
    return i;
}

std::vector<double> to_double_vector(const TextDocument& doc, const TextRow& row,
                                     const std::string& what) {
    std::vector<double> out;
    out.reserve(row.fields.size());
    for (size_t i = 0; i < row.fields.size(); ++i)
        out.push_back(to_double(doc, row, i, what));
    return out;
}

} // namespace feederopt
