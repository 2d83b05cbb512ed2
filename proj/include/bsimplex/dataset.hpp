#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace bsimplex {

struct Observation {
    double y1;
    double y2;

    friend bool operator==(const Observation&, const Observation&) = default;
};

// Ordered sequence of pairs with both coordinates strictly inside (0, 1).
class Dataset {
public:
    Dataset() = default;
    // Throws DomainError naming the 1-based row of the first invalid value.
    explicit Dataset(std::vector<Observation> rows);

    std::size_t size() const { return rows_.size(); }
    bool empty() const { return rows_.empty(); }
    const Observation& operator[](std::size_t i) const { return rows_[i]; }
    std::span<const Observation> rows() const { return rows_; }

    std::vector<double> column1() const;
    std::vector<double> column2() const;

    auto begin() const { return rows_.begin(); }
    auto end() const { return rows_.end(); }

private:
    std::vector<Observation> rows_;
};

// Delimited text, two numeric columns per row (comma, semicolon, tab or
// spaces), optional header line "y1,y2". Blank lines and lines starting with
// '#' are skipped. ParseError messages name the 1-based line and column.
Dataset parse_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path);

// Header "y1,y2" then one row per observation in shortest round-trip form.
void write_dataset(std::ostream& out, const Dataset& data);
void write_dataset(const std::filesystem::path& path, const Dataset& data);

}  // namespace bsimplex
