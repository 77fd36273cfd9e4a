#include "ridgetap/matrix_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ridgetap/error.hpp"
#include "text.hpp"

namespace ridgetap {
namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::size_t parse_count(std::string_view s, std::size_t line, const char* what) {
    const auto v = text::parse_u64(s);
    if (!v) throw ParseError(line, std::string("malformed ") + what + " '" + std::string(s) + "'");
    return static_cast<std::size_t>(*v);
}

double parse_value(std::string_view s, std::size_t line) {
    const auto v = text::parse_double(s);
    if (!v) throw ParseError(line, "malformed value '" + std::string(s) + "'");
    if (!std::isfinite(*v)) throw ParseError(line, "non-finite value");
    return *v;
}

constexpr std::size_t kMaxIndex = 0xffffffffu;

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open " + path.string());
    return is;
}

}  // namespace

ColumnMatrix read_matrix_market(std::istream& is) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(is, line)) throw ParseError(1, "empty input, expected %%MatrixMarket header");
    ++lineno;
    const auto head = text::tokens(line);
    if (head.size() != 5 || head[0] != "%%MatrixMarket" || lower(head[1]) != "matrix" ||
        lower(head[2]) != "coordinate")
        throw ParseError(lineno, "expected '%%MatrixMarket matrix coordinate real general'");
    const std::string field = lower(head[3]);
    if (field != "real" && field != "integer" && field != "double")
        throw ParseError(lineno, "unsupported field '" + std::string(head[3]) + "'");
    if (lower(head[4]) != "general")
        throw ParseError(lineno, "unsupported symmetry '" + std::string(head[4]) + "'");

    std::size_t rows = 0, cols = 0, entries = 0;
    bool have_size = false;
    std::vector<std::vector<std::pair<Index, double>>> by_col;
    std::size_t seen = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto tok = text::tokens(line);
        if (tok.empty() || tok[0].front() == '%') continue;
        if (!have_size) {
            if (tok.size() != 3) throw ParseError(lineno, "expected size line 'rows cols entries'");
            rows = parse_count(tok[0], lineno, "row count");
            cols = parse_count(tok[1], lineno, "column count");
            entries = parse_count(tok[2], lineno, "entry count");
            if (rows > kMaxIndex) throw ParseError(lineno, "row count exceeds 2^32 - 1");
            by_col.resize(cols);
            have_size = true;
            continue;
        }
        if (tok.size() != 3) throw ParseError(lineno, "expected entry 'row col value'");
        const std::size_t i = parse_count(tok[0], lineno, "row index");
        const std::size_t j = parse_count(tok[1], lineno, "column index");
        if (i < 1 || i > rows) throw ParseError(lineno, "row index " + std::to_string(i) + " out of range");
        if (j < 1 || j > cols)
            throw ParseError(lineno, "column index " + std::to_string(j) + " out of range");
        if (++seen > entries) throw ParseError(lineno, "more entries than declared");
        by_col[j - 1].emplace_back(static_cast<Index>(i - 1), parse_value(tok[2], lineno));
    }
    if (!have_size) throw ParseError(lineno, "missing size line");
    if (seen != entries)
        throw ParseError(lineno, "declared " + std::to_string(entries) + " entries, found " +
                                     std::to_string(seen));
    ColumnMatrix a(rows);
    for (auto& c : by_col) a.append(SparseVector::from_pairs(rows, std::move(c)));
    return a;
}

void write_matrix_market(std::ostream& os, const ColumnMatrix& a) {
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
    for (std::size_t j = 0; j < a.cols(); ++j) {
        const auto& c = a.col(j);
        for (std::size_t e = 0; e < c.nnz(); ++e)
            os << c.indices()[e] + 1 << ' ' << j + 1 << ' ' << text::format_double(c.values()[e]) << '\n';
    }
    if (!os) throw Error("write failed");
}

SparseLinesReader::SparseLinesReader(std::istream& is) : is_(is) {
    std::string line;
    while (std::getline(is_, line)) {
        ++line_;
        const auto tok = text::tokens(line);
        if (tok.empty()) continue;
        if (tok.size() != 3 || tok[0] != "%%SparseLines" || tok[1] != "rows")
            throw ParseError(line_, "expected header '%%SparseLines rows N'");
        rows_ = parse_count(tok[2], line_, "row count");
        if (rows_ < 1 || rows_ > kMaxIndex) throw ParseError(line_, "row count out of range");
        return;
    }
    throw ParseError(line_ + 1, "empty input, expected '%%SparseLines rows N'");
}

std::optional<SparseVector> SparseLinesReader::next() {
    std::string line;
    while (std::getline(is_, line)) {
        ++line_;
        const auto tok = text::tokens(line);
        if (tok.empty() || tok[0].front() == '%') continue;
        if (tok.size() < 2) throw ParseError(line_, "expected 'col_id nnz idx:val ...'");
        const std::size_t id = parse_count(tok[0], line_, "column id");
        if (id != next_id_)
            throw ParseError(line_, "column id " + std::to_string(id) + ", expected " +
                                        std::to_string(next_id_));
        const std::size_t nnz = parse_count(tok[1], line_, "entry count");
        if (tok.size() != nnz + 2)
            throw ParseError(line_, "declared " + std::to_string(nnz) + " entries, found " +
                                        std::to_string(tok.size() - 2));
        std::vector<std::pair<Index, double>> pairs;
        pairs.reserve(nnz);
        for (std::size_t e = 0; e < nnz; ++e) {
            const auto tv = tok[e + 2];
            const auto colon = tv.find(':');
            if (colon == std::string_view::npos) throw ParseError(line_, "expected idx:val");
            const std::size_t i = parse_count(tv.substr(0, colon), line_, "row index");
            if (i < 1 || i > rows_)
                throw ParseError(line_, "row index " + std::to_string(i) + " out of range");
            pairs.emplace_back(static_cast<Index>(i - 1), parse_value(tv.substr(colon + 1), line_));
        }
        ++next_id_;
        return SparseVector::from_pairs(rows_, std::move(pairs));
    }
    return std::nullopt;
}

ColumnMatrix read_sparse_lines(std::istream& is) {
    SparseLinesReader r(is);
    ColumnMatrix a(r.rows());
    while (auto c = r.next()) a.append(std::move(*c));
    return a;
}

void write_sparse_lines(std::ostream& os, const ColumnMatrix& a) {
    os << "%%SparseLines rows " << a.rows() << '\n';
    for (std::size_t j = 0; j < a.cols(); ++j) {
        const auto& c = a.col(j);
        os << j + 1 << ' ' << c.nnz();
        for (std::size_t e = 0; e < c.nnz(); ++e)
            os << ' ' << c.indices()[e] + 1 << ':' << text::format_double(c.values()[e]);
        os << '\n';
    }
    if (!os) throw Error("write failed");
}

void write_dense_text(std::ostream& os, const Eigen::MatrixXd& m) {
    os << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            os << (j ? " " : "") << text::format_double(m(i, j));
        os << '\n';
    }
    if (!os) throw Error("write failed");
}

Eigen::MatrixXd read_dense_text(std::istream& is) {
    std::string line;
    std::size_t lineno = 0;
    Eigen::MatrixXd m;
    bool have_shape = false;
    Eigen::Index row = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto tok = text::tokens(line);
        if (tok.empty()) continue;
        if (!have_shape) {
            if (tok.size() != 2) throw ParseError(lineno, "expected 'rows cols'");
            m.resize(static_cast<Eigen::Index>(parse_count(tok[0], lineno, "row count")),
                     static_cast<Eigen::Index>(parse_count(tok[1], lineno, "column count")));
            have_shape = true;
            continue;
        }
        if (row >= m.rows()) throw ParseError(lineno, "more rows than declared");
        if (static_cast<Eigen::Index>(tok.size()) != m.cols())
            throw ParseError(lineno, "expected " + std::to_string(m.cols()) + " values");
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(row, j) = parse_value(tok[static_cast<std::size_t>(j)], lineno);
        ++row;
    }
    if (!have_shape) throw ParseError(lineno, "empty input");
    if (row != m.rows()) throw ParseError(lineno, "fewer rows than declared");
    return m;
}

ColumnMatrix read_matrix(const std::filesystem::path& path, MatrixFormat format) {
    auto is = open_in(path);
    return format == MatrixFormat::matrix_market ? read_matrix_market(is) : read_sparse_lines(is);
}

void write_matrix(const std::filesystem::path& path, const ColumnMatrix& a, MatrixFormat format) {
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path.string());
    if (format == MatrixFormat::matrix_market)
        write_matrix_market(os, a);
    else
        write_sparse_lines(os, a);
}

std::size_t for_each_column(const std::filesystem::path& path, MatrixFormat format,
                            const std::function<void(std::size_t, SparseVector)>& sink) {
    auto is = open_in(path);
    std::size_t count = 0;
    if (format == MatrixFormat::sparse_lines) {
        SparseLinesReader r(is);
        while (auto c = r.next()) {
            sink(r.rows(), std::move(*c));
            ++count;
        }
        return count;
    }
    const ColumnMatrix a = read_matrix_market(is);
    for (const auto& c : a.columns()) {
        sink(a.rows(), c);
        ++count;
    }
    return count;
}

}  // namespace ridgetap
