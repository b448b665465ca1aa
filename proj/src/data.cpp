#include "ltest/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

namespace ltest
{
namespace
{

std::vector<std::string> default_names(Index p)
{
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j)
        names.push_back("V" + std::to_string(j + 1));
    return names;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return fields;
}

} // namespace

DataMatrix::DataMatrix(Matrix values, std::vector<std::string> names)
    : values_(std::move(values)), names_(std::move(names))
{
    if (values_.rows() < 3)
        throw std::invalid_argument("need at least n = 3 observations, got " + std::to_string(values_.rows()));
    if (values_.cols() < 2)
        throw std::invalid_argument("need at least p = 2 variables, got " + std::to_string(values_.cols()));
    if (names_.empty())
        names_ = default_names(p());
    if (static_cast<Index>(names_.size()) != p())
        throw std::invalid_argument("column name count does not match p");
    if (!values_.allFinite())
        throw std::invalid_argument("data contains NaN or infinite entries");
    for (Index j = 0; j < p(); ++j) {
        const auto col = values_.col(j);
        const double mean = col.mean();
        const double ss = (col.array() - mean).square().sum();
        // Relative test: a column of identical large values has ss at rounding level.
        if (!(ss > 0.0 && ss > 1e-24 * col.squaredNorm()))
            throw DegenerateColumnError(names_[static_cast<std::size_t>(j)], j);
    }
}

DataMatrix::DataMatrix(TrustedTag, Matrix values, std::vector<std::string> names)
    : values_(std::move(values)), names_(std::move(names))
{
}

DataMatrix DataMatrix::trusted(Matrix values, std::vector<std::string> names)
{
    if (names.empty())
        names = default_names(values.cols());
    return DataMatrix(TrustedTag{}, std::move(values), std::move(names));
}

std::size_t flat_index(PairIndex pair, Index p)
{
    if (!(pair.i >= 1 && pair.i < pair.j && pair.j <= p))
        throw std::out_of_range("pair index out of range");
    const auto i = static_cast<std::size_t>(pair.i - 1);
    const auto j = static_cast<std::size_t>(pair.j - 1);
    const auto pp = static_cast<std::size_t>(p);
    // Pairs before row i: sum_{r<i} (p - 1 - r).
    return i * pp - i * (i + 1) / 2 + (j - i - 1);
}

PairIndex pair_at(std::size_t flat, Index p)
{
    if (flat >= pair_count(p))
        throw std::out_of_range("flat pair index out of range");
    Index i = 0;
    std::size_t row_len = static_cast<std::size_t>(p - 1);
    while (flat >= row_len) {
        flat -= row_len;
        --row_len;
        ++i;
    }
    return {i + 1, i + 2 + static_cast<Index>(flat)};
}

DataMatrix parse_csv(const std::string& text, bool has_header)
{
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;
    std::size_t width = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        auto fields = split_fields(line);
        if (has_header && names.empty() && rows.empty()) {
            for (auto f : fields)
                names.emplace_back(f);
            width = names.size();
            continue;
        }
        if (width == 0)
            width = fields.size();
        if (fields.size() != width)
            throw ParseError("expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()),
                             line_no, std::min(fields.size(), width) + 1);
        std::vector<double> row(width);
        for (std::size_t c = 0; c < width; ++c) {
            const auto f = fields[c];
            if (f.empty())
                throw ParseError("missing value", line_no, c + 1);
            const auto* end = f.data() + f.size();
            const auto* begin = (f.size() > 1 && f.front() == '+') ? f.data() + 1 : f.data();
            auto [ptr, ec] = std::from_chars(begin, end, row[c]);
            if (ec != std::errc{} || ptr != end)
                throw ParseError("not a number: '" + std::string(f) + "'", line_no, c + 1);
            if (!std::isfinite(row[c]))
                throw ParseError("non-finite value", line_no, c + 1);
        }
        rows.push_back(std::move(row));
    }

    if (rows.size() < 3)
        throw std::invalid_argument("need at least n = 3 observations, got " + std::to_string(rows.size()));
    Matrix values(static_cast<Index>(rows.size()), static_cast<Index>(width));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < width; ++c)
            values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    return DataMatrix(std::move(values), std::move(names));
}

DataMatrix load_csv(const std::filesystem::path& path, bool has_header)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str(), has_header);
}

} // namespace ltest
