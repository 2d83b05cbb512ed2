#include "bsimplex/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "bsimplex/errors.hpp"

namespace bsimplex {

namespace {

bool inside_unit(double v) { return std::isfinite(v) && v > 0.0 && v < 1.0; }

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> fields;
    const bool has_hard = line.find_first_of(",;") != std::string_view::npos;
    const std::string_view delims = has_hard ? ",;" : " \t";
    std::size_t pos = 0;
    while (pos <= line.size()) {
        const auto next = line.find_first_of(delims, pos);
        const auto piece = trim(line.substr(pos, next == std::string_view::npos ? line.npos : next - pos));
        if (has_hard || !piece.empty()) fields.push_back(piece);
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return fields;
}

std::string location(std::size_t line, std::size_t column)
{
    return "row " + std::to_string(line) + ", column " + std::to_string(column);
}

void append_double(std::string& out, double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

}  // namespace

Dataset::Dataset(std::vector<Observation> rows) : rows_(std::move(rows))
{
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (!inside_unit(rows_[i].y1) || !inside_unit(rows_[i].y2)) {
            detail::domain_fail("Dataset", "observation " + std::to_string(i + 1) + " is outside (0, 1)");
        }
    }
}

std::vector<double> Dataset::column1() const
{
    std::vector<double> c(rows_.size());
    std::transform(rows_.begin(), rows_.end(), c.begin(), [](const Observation& o) { return o.y1; });
    return c;
}

std::vector<double> Dataset::column2() const
{
    std::vector<double> c(rows_.size());
    std::transform(rows_.begin(), rows_.end(), c.begin(), [](const Observation& o) { return o.y2; });
    return c;
}

Dataset parse_dataset(std::istream& in)
{
    std::vector<Observation> rows;
    std::string raw;
    std::size_t line_no = 0;
    bool seen_content = false;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split_fields(line);
        if (!seen_content) {
            seen_content = true;
            if (fields.size() == 2 && fields[0] == "y1" && fields[1] == "y2") continue;
        }
        if (fields.size() != 2) {
            throw ParseError("row " + std::to_string(line_no) + ": expected 2 columns, found "
                             + std::to_string(fields.size()));
        }
        double values[2];
        for (std::size_t c = 0; c < 2; ++c) {
            const std::string_view f = fields[c];
            const char* first = f.data();
            if (!f.empty() && f.front() == '+') ++first;
            const auto res = std::from_chars(first, f.data() + f.size(), values[c]);
            if (f.empty() || res.ec != std::errc{} || res.ptr != f.data() + f.size()) {
                throw ParseError(location(line_no, c + 1) + ": not a number: '" + std::string(f) + "'");
            }
            if (!inside_unit(values[c])) {
                throw ParseError(location(line_no, c + 1) + ": value " + std::string(f)
                                 + " is outside the open interval (0, 1)");
            }
        }
        rows.push_back({values[0], values[1]});
    }
    if (rows.empty()) throw ParseError("dataset contains no observations");
    return Dataset(std::move(rows));
}

Dataset read_dataset(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file '" + path.string() + "'");
    return parse_dataset(in);
}

void write_dataset(std::ostream& out, const Dataset& data)
{
    std::string buf = "y1,y2\n";
    for (const Observation& o : data) {
        append_double(buf, o.y1);
        buf.push_back(',');
        append_double(buf, o.y2);
        buf.push_back('\n');
    }
    out << buf;
}

void write_dataset(const std::filesystem::path& path, const Dataset& data)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write dataset file '" + path.string() + "'");
    write_dataset(out, data);
    if (!out) throw IoError("error while writing '" + path.string() + "'");
}

}  // namespace bsimplex
