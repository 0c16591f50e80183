#include "dml/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dml/errors.hpp"

namespace dml {

Dataset::Dataset(std::vector<double> y, std::vector<double> d, std::vector<double> v,
                 std::vector<double> x_flat, std::size_t x_dim)
    : y_(std::move(y)), d_(std::move(d)), v_(std::move(v)), x_(std::move(x_flat)), p_(x_dim) {
    const std::size_t n = y_.size();
    if (d_.size() != n) throw IngestError("outcome and treatment columns differ in length");
    if (!v_.empty() && v_.size() != n) throw IngestError("localization column differs in length");
    if (x_.size() != n * p_) throw IngestError("covariate block does not match n * x_dim");
    auto check = [](std::span<const double> col, const char* name) {
        for (double value : col) {
            if (!std::isfinite(value)) {
                throw IngestError(std::string("non-finite value in column ") + name);
            }
        }
    };
    check(y_, "y");
    check(d_, "d");
    check(v_, "v");
    check(x_, "x");
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    std::vector<double> y, d, v, x;
    y.reserve(rows.size());
    d.reserve(rows.size());
    if (has_v()) v.reserve(rows.size());
    x.reserve(rows.size() * p_);
    for (std::size_t i : rows) {
        y.push_back(y_[i]);
        d.push_back(d_[i]);
        if (has_v()) v.push_back(v_[i]);
        const auto xi = this->x(i);
        x.insert(x.end(), xi.begin(), xi.end());
    }
    return Dataset(std::move(y), std::move(d), std::move(v), std::move(x), p_);
}

Dataset Dataset::subset_canonical(std::span<const std::size_t> rows) const {
    std::vector<std::size_t> order(rows.begin(), rows.end());
    auto row_less = [this](std::size_t a, std::size_t b) {
        if (d_[a] != d_[b]) return d_[a] < d_[b];
        if (has_v() && v_[a] != v_[b]) return v_[a] < v_[b];
        const auto xa = x(a), xb = x(b);
        for (std::size_t k = 0; k < p_; ++k) {
            if (xa[k] != xb[k]) return xa[k] < xb[k];
        }
        return y_[a] < y_[b];
    };
    std::sort(order.begin(), order.end(), row_less);
    return subset(order);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string trim_ws(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_field(const std::string& raw, std::size_t line_no, const std::string& column) {
    const std::string text = trim_ws(raw);
    if (text.empty()) {
        throw IngestError("line " + std::to_string(line_no) + ", column '" + column +
                          "': missing value");
    }
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw IngestError("line " + std::to_string(line_no) + ", column '" + column +
                          "': cannot parse '" + text + "' as a number");
    }
    return value;
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
    std::size_t found = header.size();
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == name) {
            if (found != header.size()) {
                throw IngestError("duplicate column '" + name + "' in header");
            }
            found = j;
        }
    }
    if (found == header.size()) {
        throw IngestError("declared column '" + name + "' not found in header");
    }
    return found;
}

} // namespace

Dataset read_csv(const std::string& path, const ColumnRoles& roles) {
    std::ifstream file(path);
    if (!file) throw IngestError("cannot open '" + path + "'");
    if (roles.y.empty() || roles.d.empty()) {
        throw ConfigError("column roles must name y and d");
    }

    std::string line;
    if (!std::getline(file, line)) throw IngestError("'" + path + "' is empty");
    std::vector<std::string> header = split_csv_line(line);
    for (auto& name : header) name = trim_ws(name);

    const std::size_t yi = find_column(header, roles.y);
    const std::size_t di = find_column(header, roles.d);
    const std::size_t vi = roles.v.empty() ? header.size() : find_column(header, roles.v);
    std::vector<std::size_t> xi;
    xi.reserve(roles.x.size());
    for (const auto& name : roles.x) xi.push_back(find_column(header, name));

    std::vector<double> y, d, v, x;
    std::size_t line_no = 1;
    while (std::getline(file, line)) {
        ++line_no;
        if (trim_ws(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw IngestError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " fields, found " +
                              std::to_string(fields.size()));
        }
        y.push_back(parse_field(fields[yi], line_no, roles.y));
        d.push_back(parse_field(fields[di], line_no, roles.d));
        if (vi != header.size()) v.push_back(parse_field(fields[vi], line_no, roles.v));
        for (std::size_t k = 0; k < xi.size(); ++k) {
            x.push_back(parse_field(fields[xi[k]], line_no, roles.x[k]));
        }
    }
    if (y.empty()) throw IngestError("'" + path + "' has no data rows");
    return Dataset(std::move(y), std::move(d), std::move(v), std::move(x), roles.x.size());
}

void write_csv(const std::string& path, const Dataset& data) {
    std::ofstream file(path);
    if (!file) throw IngestError("cannot write '" + path + "'");
    file.precision(17);
    file << "y,d";
    if (data.has_v()) file << ",v";
    for (std::size_t k = 1; k <= data.x_dim(); ++k) file << ",x" << k;
    file << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        file << data.y(i) << ',' << data.d(i);
        if (data.has_v()) file << ',' << data.v(i);
        for (double value : data.x(i)) file << ',' << value;
        file << '\n';
    }
    if (!file) throw IngestError("failed writing '" + path + "'");
}

} // namespace dml
