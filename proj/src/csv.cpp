#include "sgcal/csv.hpp"

#include "sgcal/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace sgcal {

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), res.ptr};
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<std::string> input_names(std::size_t p) {
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= p; ++i) names.push_back("x" + std::to_string(i));
    return names;
}

PointMatrix to_points(const NumericTable& t, std::size_t p) {
    PointMatrix x(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            const double v = t.rows[i][j];
            if (!(v >= 0.0 && v <= 1.0)) {
                throw ParseError("row " + std::to_string(i + 1) + ": input x" + std::to_string(j + 1) +
                                     " = " + format_double(v) + " is outside [0, 1]",
                                 i + 1);
            }
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return x;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i];
    out << '\n';
}

}  // namespace

double parse_double(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw ParseError("'" + std::string(text) + "' is not a number", 0);
    }
    return v;
}

NumericTable read_numeric_csv(std::istream& in) {
    NumericTable t;
    std::string line;
    bool have_header = false;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const std::vector<std::string_view> fields = split(line);
        if (!have_header) {
            for (std::string_view f : fields) t.header.emplace_back(f);
            have_header = true;
            continue;
        }
        ++row;
        if (fields.size() != t.header.size()) {
            throw ParseError("row " + std::to_string(row) + ": expected " + std::to_string(t.header.size()) +
                                 " fields, found " + std::to_string(fields.size()),
                             row);
        }
        std::vector<double> values;
        values.reserve(fields.size());
        for (std::size_t j = 0; j < fields.size(); ++j) {
            try {
                values.push_back(parse_double(fields[j]));
            } catch (const ParseError& e) {
                throw ParseError("row " + std::to_string(row) + ", column " + t.header[j] + ": " + e.what(), row);
            }
            if (!std::isfinite(values.back())) {
                throw ParseError("row " + std::to_string(row) + ", column " + t.header[j] + ": value is not finite",
                                 row);
            }
        }
        t.rows.push_back(std::move(values));
    }
    if (!have_header) throw ParseError("empty CSV: missing header", 0);
    return t;
}

Dataset read_dataset(std::istream& in) {
    const NumericTable t = read_numeric_csv(in);
    if (t.header.size() < 2 || t.header.back() != "y") throw ParseError("header must be x1,...,xp,y", 0);
    const std::size_t p = t.header.size() - 1;
    if (std::vector<std::string>(t.header.begin(), t.header.end() - 1) != input_names(p)) {
        throw ParseError("header must be x1,...,xp,y", 0);
    }
    if (t.rows.empty()) throw ParseError("no data rows", 0);
    linalg::Vector y(static_cast<Eigen::Index>(t.rows.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i) y[static_cast<Eigen::Index>(i)] = t.rows[i][p];
    return {DesignSet(to_points(t, p), Provenance::File), std::move(y)};
}

DesignSet read_points(std::istream& in) {
    const NumericTable t = read_numeric_csv(in);
    if (t.header.empty() || t.header != input_names(t.header.size())) throw ParseError("header must be x1,...,xp", 0);
    if (t.rows.empty()) throw ParseError("no data rows", 0);
    return DesignSet(to_points(t, t.header.size()), Provenance::File);
}

void write_points(std::ostream& out, const DesignSet& x) {
    write_row(out, input_names(x.dims()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::vector<std::string> f;
        for (double v : x.point(i)) f.push_back(format_double(v));
        write_row(out, f);
    }
}

void write_dataset(std::ostream& out, const DesignSet& x, const linalg::Vector& y) {
    if (static_cast<std::size_t>(y.size()) != x.size()) throw DomainError("write_dataset: size mismatch");
    std::vector<std::string> header = input_names(x.dims());
    header.emplace_back("y");
    write_row(out, header);
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::vector<std::string> f;
        for (double v : x.point(i)) f.push_back(format_double(v));
        f.push_back(format_double(y[static_cast<Eigen::Index>(i)]));
        write_row(out, f);
    }
}

void write_predictions(std::ostream& out, const DesignSet& x, const PredictiveDistribution& reality,
                       const PredictiveDistribution& field) {
    const auto m = static_cast<Eigen::Index>(x.size());
    if (reality.mean.size() != m || reality.variance.size() != m || field.mean.size() != m ||
        field.variance.size() != m) {
        throw DomainError("write_predictions: size mismatch");
    }
    std::vector<std::string> header = input_names(x.dims());
    for (const char* c : {"mean_reality", "var_reality", "mean_field", "var_field"}) header.emplace_back(c);
    write_row(out, header);
    for (Eigen::Index i = 0; i < m; ++i) {
        std::vector<std::string> f;
        for (double v : x.point(static_cast<std::size_t>(i))) f.push_back(format_double(v));
        f.push_back(format_double(reality.mean[i]));
        f.push_back(format_double(reality.variance[i]));
        f.push_back(format_double(field.mean[i]));
        f.push_back(format_double(field.variance[i]));
        write_row(out, f);
    }
}

}  // namespace sgcal
