#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iosfwd>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace sfs {

using Index = std::size_t;
using IndexList = std::vector<Index>;

/// Raised for malformed delimited input. Rows and columns are 1-based
/// positions in the file as a user would count them.
class CsvError : public std::runtime_error {
public:
    CsvError(const std::string& msg, std::size_t row = 0, std::size_t column = 0)
        : std::runtime_error(format(msg, row, column)), row_(row), column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& msg, std::size_t row, std::size_t column) {
        if (row == 0)
            return msg;
        std::ostringstream os;
        os << msg << " (row " << row;
        if (column != 0)
            os << ", column " << column;
        os << ')';
        return os.str();
    }

    std::size_t row_;
    std::size_t column_;
};

/// Observations X (N x D) with responses Y (N). Every covariate carries the
/// index it had in the dataset it was originally loaded or generated as, so
/// selections made on a restriction map back to the full covariate space.
class Dataset {
public:
    Dataset(Eigen::MatrixXd x, Eigen::VectorXd y, std::vector<std::string> names = {},
            std::string response_name = "y")
        : x_(std::move(x)), y_(std::move(y)), names_(std::move(names)),
          response_name_(std::move(response_name)) {
        if (x_.rows() < 1 || x_.cols() < 1)
            throw std::invalid_argument("dataset needs at least one observation and one covariate");
        if (y_.size() != x_.rows())
            throw std::invalid_argument("response length " + std::to_string(y_.size()) +
                                        " does not match row count " + std::to_string(x_.rows()));
        if (!x_.allFinite() || !y_.allFinite())
            throw std::invalid_argument("dataset contains non-finite values");
        if (names_.empty()) {
            names_.reserve(d());
            for (Index j = 0; j < d(); ++j)
                names_.push_back("x" + std::to_string(j));
        } else if (names_.size() != d()) {
            throw std::invalid_argument("covariate name count does not match column count");
        }
        origin_.resize(d());
        for (Index j = 0; j < d(); ++j)
            origin_[j] = j;
    }

    Index n() const noexcept { return static_cast<Index>(x_.rows()); }
    Index d() const noexcept { return static_cast<Index>(x_.cols()); }

    const Eigen::MatrixXd& x() const noexcept { return x_; }
    const Eigen::VectorXd& y() const noexcept { return y_; }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::string& response_name() const noexcept { return response_name_; }

    /// Original covariate index of local column j.
    Index origin(Index j) const { return origin_.at(j); }
    const IndexList& origins() const noexcept { return origin_; }

    friend bool operator==(const Dataset& a, const Dataset& b) {
        return a.x_ == b.x_ && a.y_ == b.y_ && a.names_ == b.names_ &&
               a.origin_ == b.origin_ && a.response_name_ == b.response_name_;
    }

private:
    friend Dataset restrict_to(const Dataset&, std::span<const Index>, std::span<const Index>);
    Dataset() = default;

    Eigen::MatrixXd x_;
    Eigen::VectorXd y_;
    std::vector<std::string> names_;
    std::string response_name_;
    IndexList origin_;
};

/// Support of the coefficient vector of a synthetic linear model.
struct GroundTruth {
    IndexList informative; // ascending
    Eigen::VectorXd beta;

    static GroundTruth from_beta(Eigen::VectorXd beta) {
        GroundTruth gt;
        for (Eigen::Index j = 0; j < beta.size(); ++j)
            if (beta[j] != 0.0)
                gt.informative.push_back(static_cast<Index>(j));
        gt.beta = std::move(beta);
        return gt;
    }

    bool is_informative(Index d) const {
        return std::binary_search(informative.begin(), informative.end(), d);
    }

    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

namespace detail {

inline void check_indices(std::span<const Index> idx, Index bound, const char* what) {
    std::vector<bool> seen(bound, false);
    for (Index i : idx) {
        if (i >= bound)
            throw std::out_of_range(std::string(what) + " index " + std::to_string(i) +
                                    " out of range [0, " + std::to_string(bound) + ")");
        if (seen[i])
            throw std::invalid_argument(std::string("duplicate ") + what + " index " + std::to_string(i));
        seen[i] = true;
    }
}

} // namespace detail

/// Restriction of `ds` to the listed observations and covariates, in the
/// listed order. Original covariate indices are carried over.
inline Dataset restrict_to(const Dataset& ds, std::span<const Index> rows, std::span<const Index> cols) {
    detail::check_indices(rows, ds.n(), "row");
    detail::check_indices(cols, ds.d(), "column");
    if (rows.empty() || cols.empty())
        throw std::invalid_argument("restriction must keep at least one row and one column");

    Dataset out;
    const auto nr = static_cast<Eigen::Index>(rows.size());
    const auto nc = static_cast<Eigen::Index>(cols.size());
    out.x_.resize(nr, nc);
    out.y_.resize(nr);
    for (Eigen::Index c = 0; c < nc; ++c) {
        const auto src = static_cast<Eigen::Index>(cols[c]);
        for (Eigen::Index r = 0; r < nr; ++r)
            out.x_(r, c) = ds.x()(static_cast<Eigen::Index>(rows[r]), src);
    }
    for (Eigen::Index r = 0; r < nr; ++r)
        out.y_[r] = ds.y()[static_cast<Eigen::Index>(rows[r])];
    out.names_.reserve(cols.size());
    out.origin_.reserve(cols.size());
    for (Index c : cols) {
        out.names_.push_back(ds.names()[c]);
        out.origin_.push_back(ds.origin(c));
    }
    out.response_name_ = ds.response_name();
    return out;
}

inline IndexList iota_indices(Index n) {
    IndexList v(n);
    for (Index i = 0; i < n; ++i)
        v[i] = i;
    return v;
}

// ---------------------------------------------------------------- CSV

/// Response column selector: a header name or a 0-based column position.
using ColumnRef = std::variant<std::string, Index>;

namespace detail {

inline std::vector<std::string_view> split_row(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        cells.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return cells;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    if (s.empty())
        return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace detail

/// Reads a comma-separated numeric table. A first row containing any
/// non-numeric cell is taken as the header.
inline Dataset read_csv(std::istream& in, const ColumnRef& response) {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool first = true;

    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty())
            continue;
        auto cells = detail::split_row(line);
        if (first) {
            first = false;
            width = cells.size();
            bool numeric = true;
            double tmp;
            for (auto c : cells)
                numeric = numeric && detail::parse_double(c, tmp);
            if (!numeric) {
                for (auto c : cells)
                    header.emplace_back(detail::trim(c));
                continue;
            }
        }
        if (cells.size() != width)
            throw CsvError("expected " + std::to_string(width) + " cells, found " + std::to_string(cells.size()),
                           line_no);
        std::vector<double> values(width);
        for (std::size_t c = 0; c < width; ++c) {
            if (!detail::parse_double(cells[c], values[c]))
                throw CsvError("non-numeric cell '" + std::string(detail::trim(cells[c])) + "'", line_no, c + 1);
            if (!std::isfinite(values[c]))
                throw CsvError("non-finite cell", line_no, c + 1);
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty())
        throw CsvError("no data rows");

    Index resp = 0;
    if (const auto* name = std::get_if<std::string>(&response)) {
        auto it = std::find(header.begin(), header.end(), *name);
        if (it == header.end())
            throw CsvError("response column '" + *name + "' not found");
        resp = static_cast<Index>(it - header.begin());
    } else {
        resp = std::get<Index>(response);
        if (resp >= width)
            throw CsvError("response column " + std::to_string(resp) + " not present (" + std::to_string(width) +
                           " columns)");
    }
    if (width < 2)
        throw CsvError("no covariate columns remain after removing the response");

    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto d = static_cast<Eigen::Index>(width - 1);
    Eigen::MatrixXd x(n, d);
    Eigen::VectorXd y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        Eigen::Index c_out = 0;
        for (std::size_t c = 0; c < width; ++c) {
            if (c == resp)
                y[r] = rows[r][c];
            else
                x(r, c_out++) = rows[r][c];
        }
    }
    std::vector<std::string> names;
    std::string response_name = "y";
    if (!header.empty()) {
        for (std::size_t c = 0; c < width; ++c)
            if (c != resp)
                names.push_back(header[c]);
        response_name = header[resp];
    }
    return Dataset(std::move(x), std::move(y), std::move(names), std::move(response_name));
}

inline Dataset load_csv(const std::string& path, const ColumnRef& response) {
    std::ifstream in(path);
    if (!in)
        throw CsvError("cannot open '" + path + "'");
    return read_csv(in, response);
}

/// Writes covariates followed by the response column, with a header row.
/// Values use the shortest representation that reads back bit-exactly.
inline void write_csv(std::ostream& out, const Dataset& ds) {
    for (Index j = 0; j < ds.d(); ++j)
        out << ds.names()[j] << ',';
    out << ds.response_name() << '\n';
    for (Index i = 0; i < ds.n(); ++i) {
        for (Index j = 0; j < ds.d(); ++j)
            out << detail::format_double(ds.x()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << ',';
        out << detail::format_double(ds.y()[static_cast<Eigen::Index>(i)]) << '\n';
    }
}

inline void save_csv(const std::string& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out)
        throw CsvError("cannot write '" + path + "'");
    write_csv(out, ds);
}

inline void write_ground_truth_csv(std::ostream& out, const GroundTruth& gt) {
    out << "index,beta\n";
    for (Eigen::Index j = 0; j < gt.beta.size(); ++j)
        out << j << ',' << detail::format_double(gt.beta[j]) << '\n';
}

inline GroundTruth read_ground_truth_csv(std::istream& in) {
    std::string line;
    std::vector<std::pair<Index, double>> entries;
    std::size_t line_no = 0;
    Index max_index = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty() || (line_no == 1 && line.rfind("index", 0) == 0))
            continue;
        auto cells = detail::split_row(line);
        double idx = 0, beta = 0;
        if (cells.size() != 2 || !detail::parse_double(cells[0], idx) || !detail::parse_double(cells[1], beta) ||
            idx < 0 || idx != std::floor(idx))
            throw CsvError("malformed ground-truth row", line_no);
        entries.emplace_back(static_cast<Index>(idx), beta);
        max_index = std::max(max_index, static_cast<Index>(idx));
    }
    Eigen::VectorXd b = Eigen::VectorXd::Zero(entries.empty() ? 0 : static_cast<Eigen::Index>(max_index + 1));
    for (auto [i, v] : entries)
        b[static_cast<Eigen::Index>(i)] = v;
    return GroundTruth::from_beta(std::move(b));
}

} // namespace sfs
