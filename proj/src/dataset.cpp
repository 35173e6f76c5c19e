#include "armada/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace armada {

void ResponseVariable::validate() const {
    if (kind == ResponseKind::Binary) {
        Eigen::Index zeros = 0, ones = 0;
        for (Eigen::Index i = 0; i < values.size(); ++i) {
            if (values[i] == 0.0) {
                ++zeros;
            } else if (values[i] == 1.0) {
                ++ones;
            } else {
                throw data_error("non-binary response value " + std::to_string(values[i]));
            }
        }
        if (zeros < 2 || ones < 2) {
            throw data_error("binary response needs at least 2 samples in each class (got " +
                             std::to_string(zeros) + "/" + std::to_string(ones) + ")");
        }
    } else {
        std::set<double> distinct(values.begin(), values.end());
        if (distinct.size() < 3) {
            throw data_error("continuous response needs at least 3 distinct values");
        }
    }
}

void Dataset::validate() const {
    if (n() < 4) throw data_error("need at least 4 samples, got " + std::to_string(n()));
    if (p() < 2) throw data_error("need at least 2 covariates, got " + std::to_string(p()));
    if (response.n() != n()) throw data_error("response length does not match sample count");
    std::set<std::string> seen;
    for (const auto& name : covariate_names) {
        if (!seen.insert(name).second) throw data_error("duplicate covariate name: " + name);
    }
    if (!matrix.allFinite()) throw data_error("matrix contains non-finite values");
    response.validate();
}

namespace {

std::vector<std::string> split_line(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

char detect_separator(const std::string& header) {
    const auto tabs = std::count(header.begin(), header.end(), '\t');
    const auto commas = std::count(header.begin(), header.end(), ',');
    return tabs > commas ? '\t' : ',';
}

double parse_cell(const std::string& field, std::size_t row, std::size_t col) {
    const char* s = field.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s, &end);
    while (end && *end == ' ') ++end;
    if (field.empty() || end == s || (end && *end != '\0') || errno == ERANGE || !std::isfinite(v)) {
        throw data_error("non-numeric cell at (" + std::to_string(row) + "," + std::to_string(col) + ")");
    }
    return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& response_column,
                 ResponseKind response_kind, const CsvOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw data_error("empty file: " + path);
    const char sep = detect_separator(line);
    std::vector<std::string> header = split_line(line, sep);

    const std::size_t first_data_col = opts.first_column_is_id ? 1 : 0;
    if (header.size() <= first_data_col) throw data_error("header has no data columns");

    std::ptrdiff_t response_idx = -1;
    for (std::size_t j = first_data_col; j < header.size(); ++j) {
        if (header[j] == response_column) {
            response_idx = static_cast<std::ptrdiff_t>(j);
            break;
        }
    }
    if (response_idx < 0) throw data_error("missing response column: " + response_column);

    std::vector<std::vector<double>> rows;
    std::vector<std::string> sample_ids;
    std::size_t row_number = 0;
    while (std::getline(in, line)) {
        ++row_number;
        if (line.empty()) continue;
        std::vector<std::string> fields = split_line(line, sep);
        if (fields.size() != header.size()) {
            throw data_error("row " + std::to_string(row_number) + " has " + std::to_string(fields.size()) +
                             " fields, expected " + std::to_string(header.size()));
        }
        sample_ids.push_back(opts.first_column_is_id ? fields[0] : std::to_string(row_number));
        std::vector<double> row;
        row.reserve(header.size() - first_data_col);
        for (std::size_t j = first_data_col; j < fields.size(); ++j) {
            row.push_back(parse_cell(fields[j], row_number, j + 1));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw data_error("no data rows in " + path);

    const std::size_t n = rows.size();
    const std::size_t total_cols = header.size() - first_data_col;
    const std::size_t resp_off = static_cast<std::size_t>(response_idx) - first_data_col;

    Dataset d;
    d.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(total_cols - 1));
    d.response.kind = response_kind;
    d.response.values.resize(static_cast<Eigen::Index>(n));
    d.sample_ids = std::move(sample_ids);
    for (std::size_t j = 0; j < total_cols; ++j) {
        if (j == resp_off) continue;
        d.covariate_names.push_back(header[j + first_data_col]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t out_j = 0;
        for (std::size_t j = 0; j < total_cols; ++j) {
            if (j == resp_off) {
                d.response.values[static_cast<Eigen::Index>(i)] = rows[i][j];
            } else {
                d.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(out_j++)) = rows[i][j];
            }
        }
    }

    const auto& y = d.response.values;
    if ((y.array() == y[0]).all()) throw data_error("constant response column: " + response_column);
    if (response_kind == ResponseKind::Binary) {
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (y[i] != 0.0 && y[i] != 1.0) {
                throw data_error("non-binary response: value " + std::to_string(y[i]) + " in column " +
                                 response_column);
            }
        }
    }
    return d;
}

void save_csv(const Dataset& d, const std::string& path, const std::string& response_column) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + path);
    out << "id";
    for (const auto& name : d.covariate_names) out << ',' << name;
    out << ',' << response_column << '\n';
    out.precision(17);
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        out << d.sample_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < d.p(); ++j) out << ',' << d.matrix(i, j);
        out << ',' << d.response.values[i] << '\n';
    }
}

double column_mean(const Eigen::VectorXd& x) { return x.mean(); }

double column_sd(const Eigen::VectorXd& x) {
    const double m = x.mean();
    return std::sqrt((x.array() - m).square().sum() / static_cast<double>(x.size() - 1));
}

StandardizedMatrix standardize(const Eigen::MatrixXd& matrix, const std::vector<std::string>* names) {
    StandardizedMatrix s;
    const Eigen::Index n = matrix.rows(), p = matrix.cols();
    s.values.resize(n, p);
    s.column_means.resize(p);
    s.column_sds.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double m = matrix.col(j).mean();
        const double sd = std::sqrt((matrix.col(j).array() - m).square().sum() / static_cast<double>(n - 1));
        if (!(sd > 0.0)) {
            const std::string label = names ? (*names)[static_cast<std::size_t>(j)] : std::to_string(j);
            throw data_error("constant column: " + label);
        }
        s.column_means[j] = m;
        s.column_sds[j] = sd;
        s.values.col(j) = (matrix.col(j).array() - m) / sd;
    }
    return s;
}

StandardizedMatrix standardize(const Dataset& d) { return standardize(d.matrix, &d.covariate_names); }

}  // namespace armada
