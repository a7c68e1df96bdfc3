#pragma once

// Text formats for parity-check matrices.
//
// alist: the usual LDPC interchange format.  First line "cols rows", then
// max column/row weights, per-column and per-row weights, then 1-indexed
// index lists padded with zeros to the max weight.  The reader also accepts
// unpadded lists.
//
// coord: "rows cols" header followed by one 0-indexed "r c" pair per line.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qprep/gf2.hpp"

namespace qprep {

inline std::string to_alist(const BinaryMatrix& m) {
    const BinaryMatrix t = transpose(m);
    std::size_t max_col = t.max_row_weight();
    std::size_t max_row = m.max_row_weight();
    std::ostringstream out;
    out << m.cols() << ' ' << m.rows() << '\n';
    out << max_col << ' ' << max_row << '\n';
    for (std::size_t c = 0; c < m.cols(); ++c) out << t.row_weight(c) << (c + 1 < m.cols() ? ' ' : '\n');
    if (m.cols() == 0) out << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) out << m.row_weight(r) << (r + 1 < m.rows() ? ' ' : '\n');
    if (m.rows() == 0) out << '\n';
    for (std::size_t c = 0; c < m.cols(); ++c) {
        std::size_t printed = 0;
        for (std::uint32_t r : t.row(c)) {
            out << (r + 1);
            ++printed;
            out << (printed < max_col ? ' ' : '\n');
        }
        for (; printed < max_col; ++printed) out << 0 << (printed + 1 < max_col ? ' ' : '\n');
        if (max_col == 0) out << '\n';
    }
    for (std::size_t r = 0; r < m.rows(); ++r) {
        std::size_t printed = 0;
        for (std::uint32_t c : m.row(r)) {
            out << (c + 1);
            ++printed;
            out << (printed < max_row ? ' ' : '\n');
        }
        for (; printed < max_row; ++printed) out << 0 << (printed + 1 < max_row ? ' ' : '\n');
        if (max_row == 0) out << '\n';
    }
    return out.str();
}

inline BinaryMatrix from_alist(const std::string& text) {
    std::istringstream in(text);
    std::size_t cols = 0, rows = 0, max_col = 0, max_row = 0;
    if (!(in >> cols >> rows)) throw std::invalid_argument("alist: missing dimension header");
    if (!(in >> max_col >> max_row)) throw std::invalid_argument("alist: missing max-weight line");
    std::vector<std::size_t> col_w(cols), row_w(rows);
    for (auto& w : col_w)
        if (!(in >> w)) throw std::invalid_argument("alist: truncated column weights");
    for (auto& w : row_w)
        if (!(in >> w)) throw std::invalid_argument("alist: truncated row weights");

    BinaryMatrix m(rows, cols);
    auto read_list = [&](std::size_t count, std::size_t limit, std::size_t padded_len, auto&& emit) {
        // Padded files carry exactly padded_len entries per list (zeros after
        // the real ones); unpadded files carry exactly `count`.  Peek at the
        // stream shape by reading count entries, then absorbing zeros.
        for (std::size_t i = 0; i < count; ++i) {
            long long idx = 0;
            if (!(in >> idx)) throw std::invalid_argument("alist: truncated index list");
            if (idx <= 0 || static_cast<std::size_t>(idx) > limit)
                throw std::invalid_argument("alist: index " + std::to_string(idx) + " out of range");
            emit(static_cast<std::size_t>(idx - 1));
        }
        for (std::size_t i = count; i < padded_len; ++i) {
            long long pad = 0;
            std::streampos pos = in.tellg();
            if (!(in >> pad)) {
                in.clear();
                break;
            }
            if (pad != 0) {  // unpadded file; the value belongs to the next list
                in.seekg(pos);
                break;
            }
        }
    };
    for (std::size_t c = 0; c < cols; ++c)
        read_list(col_w[c], rows, max_col, [&](std::size_t r) { m.insert(r, c); });
    // Row lists duplicate the column lists; parse and cross-check.
    BinaryMatrix check(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        read_list(row_w[r], cols, max_row, [&](std::size_t c) { check.insert(r, c); });
    if (check != m) throw std::invalid_argument("alist: row lists disagree with column lists");
    return m;
}

inline std::string to_coord(const BinaryMatrix& m) {
    std::ostringstream out;
    out << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::uint32_t c : m.row(r)) out << r << ' ' << c << '\n';
    return out.str();
}

inline BinaryMatrix from_coord(const std::string& text) {
    std::istringstream in(text);
    std::size_t rows = 0, cols = 0;
    if (!(in >> rows >> cols)) throw std::invalid_argument("coord: missing header");
    BinaryMatrix m(rows, cols);
    std::size_t r = 0, c = 0;
    while (in >> r >> c) m.insert(r, c);
    return m;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace qprep
