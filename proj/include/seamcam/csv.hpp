#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace seamcam::csv {

/// Quotes a field when it contains a comma, quote or newline.
[[nodiscard]] std::string escape(std::string_view field);
[[nodiscard]] std::vector<std::string> split_line(std::string_view line);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Throws ParseError when the column is absent.
    [[nodiscard]] std::size_t column(std::string_view name) const;
};

[[nodiscard]] Table read(const std::filesystem::path &path);
void write_row(std::ostream &out, const std::vector<std::string> &fields);

/// image_id -> value of `column`, read from a CSV with an `image_id` column.
[[nodiscard]] std::map<std::string, double> read_image_scores(const std::filesystem::path &path,
                                                              std::string_view column = "score");

}  // namespace seamcam::csv
