#include "seamcam/csv.hpp"

#include <charconv>
#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "seamcam/error.hpp"

namespace seamcam::csv {

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                current.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else if (c != '\r') {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw Error(ErrorCode::ParseError, fmt::format("missing CSV column '{}'", name));
}

Table read(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path.string()));
    }
    Table table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") {
            continue;
        }
        auto fields = split_line(line);
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            table.rows.push_back(std::move(fields));
        }
    }
    if (first) {
        throw Error(ErrorCode::ParseError, fmt::format("'{}' has no header row", path.string()));
    }
    return table;
}

void write_row(std::ostream &out, const std::vector<std::string> &fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) {
            out << ',';
        }
        out << escape(fields[i]);
    }
    out << '\n';
}

std::map<std::string, double> read_image_scores(const std::filesystem::path &path, std::string_view column) {
    const auto table = read(path);
    const auto id_col = table.column("image_id");
    const auto value_col = table.column(column);
    std::map<std::string, double> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto &row = table.rows[r];
        if (row.size() <= std::max(id_col, value_col)) {
            throw Error(ErrorCode::ParseError, fmt::format("{}:{}: too few fields", path.string(), r + 2));
        }
        const auto &text = row[value_col];
        double value = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc() || ptr != text.data() + text.size()) {
            throw Error(ErrorCode::ParseError,
                        fmt::format("{}:{}: '{}' is not a number", path.string(), r + 2, text));
        }
        out[row[id_col]] = value;
    }
    return out;
}

}  // namespace seamcam::csv
