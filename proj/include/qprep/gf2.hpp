#pragma once

// Exact linear algebra over GF(2).
//
// Two representations are used throughout: BinaryMatrix stores sorted
// per-row index lists (cheap to build, natural for Tanner-graph work),
// PackedMatrix stores bit-packed rows (word-parallel elimination and
// dot products).  Conversion between the two is explicit.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qprep {

/// Thrown by exhaustive routines when the requested search exceeds the
/// caller's budget.  Carries the budget that would have been required.
class BudgetExceeded : public std::runtime_error {
public:
    BudgetExceeded(const std::string& what, std::uint64_t required)
        : std::runtime_error(what + " (required budget " + std::to_string(required) + ")"),
          required(required) {}
    std::uint64_t required;
};

namespace detail {
inline std::size_t words_for(std::size_t bits) { return (bits + 63) / 64; }
}  // namespace detail

// ---------------------------------------------------------------------------
// BinaryVector: fixed-length bit vector, tail bits always zero.
// ---------------------------------------------------------------------------
class BinaryVector {
public:
    BinaryVector() = default;
    explicit BinaryVector(std::size_t len) : len_(len), words_(detail::words_for(len), 0) {}

    static BinaryVector from_support(std::size_t len, const std::vector<std::size_t>& support) {
        BinaryVector v(len);
        for (std::size_t i : support) v.set(i, true);
        return v;
    }

    /// Parses a "0101..." string.
    static BinaryVector from_string(const std::string& bits) {
        BinaryVector v(bits.size());
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i] == '1')
                v.set(i, true);
            else if (bits[i] != '0')
                throw std::invalid_argument("bit string must contain only 0/1");
        }
        return v;
    }

    std::size_t size() const { return len_; }

    bool get(std::size_t i) const {
        check_index(i);
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }
    void set(std::size_t i, bool value) {
        check_index(i);
        const std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (value)
            words_[i >> 6] |= mask;
        else
            words_[i >> 6] &= ~mask;
    }
    void flip(std::size_t i) {
        check_index(i);
        words_[i >> 6] ^= std::uint64_t{1} << (i & 63);
    }

    std::size_t weight() const {
        std::size_t w = 0;
        for (std::uint64_t word : words_) w += static_cast<std::size_t>(__builtin_popcountll(word));
        return w;
    }
    bool is_zero() const {
        for (std::uint64_t word : words_)
            if (word) return false;
        return true;
    }

    std::vector<std::size_t> support() const {
        std::vector<std::size_t> out;
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t word = words_[w];
            while (word) {
                out.push_back(w * 64 + static_cast<std::size_t>(__builtin_ctzll(word)));
                word &= word - 1;
            }
        }
        return out;
    }

    BinaryVector& operator^=(const BinaryVector& other) {
        if (other.len_ != len_)
            throw std::invalid_argument("xor length mismatch: " + std::to_string(len_) + " vs " +
                                        std::to_string(other.len_));
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
        return *this;
    }
    friend BinaryVector operator^(BinaryVector a, const BinaryVector& b) { return a ^= b; }

    bool operator==(const BinaryVector& other) const {
        return len_ == other.len_ && words_ == other.words_;
    }
    bool operator!=(const BinaryVector& other) const { return !(*this == other); }

    /// Lexicographic order on the sorted support sequence (ties between
    /// equal-weight candidates are broken with this everywhere).
    bool lex_less(const BinaryVector& other) const {
        if (len_ != other.len_) throw std::invalid_argument("lex_less length mismatch");
        for (std::size_t w = 0; w < words_.size(); ++w) {
            const std::uint64_t diff = words_[w] ^ other.words_[w];
            if (!diff) continue;
            const std::size_t bit = w * 64 + static_cast<std::size_t>(__builtin_ctzll(diff));
            const bool mine = get(bit);
            // The side holding the earlier set bit comes first, unless the
            // other side's support is a proper prefix (then the prefix wins).
            const BinaryVector& tail_side = mine ? other : *this;
            for (std::size_t w2 = w; w2 < words_.size(); ++w2) {
                std::uint64_t word = tail_side.words_[w2];
                if (w2 == w) word &= ~((std::uint64_t{1} << (bit & 63)) | ((std::uint64_t{1} << (bit & 63)) - 1));
                if (word) return mine;
            }
            return !mine;
        }
        return false;
    }

    /// Restriction to [begin, begin+count).
    BinaryVector slice(std::size_t begin, std::size_t count) const {
        if (begin + count > len_) throw std::invalid_argument("slice out of range");
        BinaryVector out(count);
        for (std::size_t i = 0; i < count; ++i)
            if (get(begin + i)) out.set(i, true);
        return out;
    }

    std::string to_string() const {
        std::string s(len_, '0');
        for (std::size_t i = 0; i < len_; ++i)
            if (get(i)) s[i] = '1';
        return s;
    }

    const std::vector<std::uint64_t>& words() const { return words_; }
    std::vector<std::uint64_t>& words() { return words_; }

private:
    void check_index(std::size_t i) const {
        if (i >= len_) throw std::out_of_range("bit index " + std::to_string(i) + " >= " + std::to_string(len_));
    }
    std::size_t len_ = 0;
    std::vector<std::uint64_t> words_;
};

inline bool parity_dot(const BinaryVector& a, const BinaryVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("parity_dot length mismatch");
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < a.words().size(); ++w) acc ^= a.words()[w] & b.words()[w];
    return __builtin_popcountll(acc) & 1;
}

// ---------------------------------------------------------------------------
// BinaryMatrix: sparse rows, sorted column indices, no duplicates.
// Logically immutable once built; all algorithms take it by const reference.
// ---------------------------------------------------------------------------
class BinaryMatrix {
public:
    BinaryMatrix() = default;
    BinaryMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), row_support_(rows) {}

    static BinaryMatrix identity(std::size_t n) {
        BinaryMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.insert(i, i);
        return m;
    }
    static BinaryMatrix zero(std::size_t rows, std::size_t cols) { return BinaryMatrix(rows, cols); }

    static BinaryMatrix from_rows(std::size_t cols, const std::vector<std::vector<std::uint32_t>>& rows) {
        BinaryMatrix m(rows.size(), cols);
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::uint32_t c : rows[r]) m.insert(r, c);
        return m;
    }

    static BinaryMatrix from_dense(const std::vector<std::string>& rows01) {
        const std::size_t cols = rows01.empty() ? 0 : rows01.front().size();
        BinaryMatrix m(rows01.size(), cols);
        for (std::size_t r = 0; r < rows01.size(); ++r) {
            if (rows01[r].size() != cols) throw std::invalid_argument("ragged dense rows");
            for (std::size_t c = 0; c < cols; ++c)
                if (rows01[r][c] == '1') m.insert(r, c);
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    void insert(std::size_t r, std::size_t c) {
        if (r >= rows_ || c >= cols_)
            throw std::out_of_range("entry (" + std::to_string(r) + "," + std::to_string(c) + ") out of " +
                                    std::to_string(rows_) + "x" + std::to_string(cols_));
        auto& row = row_support_[r];
        auto it = std::lower_bound(row.begin(), row.end(), static_cast<std::uint32_t>(c));
        if (it != row.end() && *it == c) throw std::invalid_argument("duplicate entry in BinaryMatrix");
        row.insert(it, static_cast<std::uint32_t>(c));
    }

    bool get(std::size_t r, std::size_t c) const {
        const auto& row = row_support_[r];
        return std::binary_search(row.begin(), row.end(), static_cast<std::uint32_t>(c));
    }

    const std::vector<std::uint32_t>& row(std::size_t r) const { return row_support_[r]; }

    std::size_t row_weight(std::size_t r) const { return row_support_[r].size(); }
    std::vector<std::size_t> col_weights() const {
        std::vector<std::size_t> w(cols_, 0);
        for (const auto& row : row_support_)
            for (std::uint32_t c : row) ++w[c];
        return w;
    }
    std::size_t entry_count() const {
        std::size_t n = 0;
        for (const auto& row : row_support_) n += row.size();
        return n;
    }
    std::size_t max_row_weight() const {
        std::size_t w = 0;
        for (const auto& row : row_support_) w = std::max(w, row.size());
        return w;
    }

    BinaryVector row_as_vector(std::size_t r) const {
        BinaryVector v(cols_);
        for (std::uint32_t c : row_support_[r]) v.set(c, true);
        return v;
    }

    bool operator==(const BinaryMatrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && row_support_ == other.row_support_;
    }
    bool operator!=(const BinaryMatrix& other) const { return !(*this == other); }

    bool is_zero() const {
        for (const auto& row : row_support_)
            if (!row.empty()) return false;
        return true;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::vector<std::uint32_t>> row_support_;
};

// ---------------------------------------------------------------------------
// PackedMatrix: bit-packed rows.  Explicit conversion target for elimination.
// ---------------------------------------------------------------------------
class PackedMatrix {
public:
    PackedMatrix() = default;
    PackedMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), wpr_(detail::words_for(cols)), data_(rows * wpr_, 0) {}

    explicit PackedMatrix(const BinaryMatrix& m) : PackedMatrix(m.rows(), m.cols()) {
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::uint32_t c : m.row(r)) set(r, c, true);
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t words_per_row() const { return wpr_; }

    bool get(std::size_t r, std::size_t c) const {
        return (data_[r * wpr_ + (c >> 6)] >> (c & 63)) & 1u;
    }
    void set(std::size_t r, std::size_t c, bool value) {
        const std::uint64_t mask = std::uint64_t{1} << (c & 63);
        if (value)
            data_[r * wpr_ + (c >> 6)] |= mask;
        else
            data_[r * wpr_ + (c >> 6)] &= ~mask;
    }

    const std::uint64_t* row_ptr(std::size_t r) const { return data_.data() + r * wpr_; }
    std::uint64_t* row_ptr(std::size_t r) { return data_.data() + r * wpr_; }

    void xor_rows(std::size_t dst, std::size_t src) {
        std::uint64_t* d = row_ptr(dst);
        const std::uint64_t* s = row_ptr(src);
        for (std::size_t w = 0; w < wpr_; ++w) d[w] ^= s[w];
    }
    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b) return;
        std::uint64_t* pa = row_ptr(a);
        std::uint64_t* pb = row_ptr(b);
        for (std::size_t w = 0; w < wpr_; ++w) std::swap(pa[w], pb[w]);
    }

    std::size_t row_weight(std::size_t r) const {
        std::size_t w = 0;
        const std::uint64_t* p = row_ptr(r);
        for (std::size_t i = 0; i < wpr_; ++i) w += static_cast<std::size_t>(__builtin_popcountll(p[i]));
        return w;
    }

    BinaryVector row_as_vector(std::size_t r) const {
        BinaryVector v(cols_);
        const std::uint64_t* p = row_ptr(r);
        for (std::size_t w = 0; w < wpr_; ++w) v.words()[w] = p[w];
        return v;
    }
    void xor_row_into(std::size_t r, BinaryVector& v) const {
        if (v.size() != cols_) throw std::invalid_argument("xor_row_into length mismatch");
        const std::uint64_t* p = row_ptr(r);
        for (std::size_t w = 0; w < wpr_; ++w) v.words()[w] ^= p[w];
    }

    /// Parity of <row r, v>.
    bool row_dot(std::size_t r, const BinaryVector& v) const {
        const std::uint64_t* p = row_ptr(r);
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < wpr_; ++w) acc ^= p[w] & v.words()[w];
        return __builtin_popcountll(acc) & 1;
    }

    BinaryMatrix to_sparse() const {
        BinaryMatrix m(rows_, cols_);
        for (std::size_t r = 0; r < rows_; ++r) {
            const std::uint64_t* p = row_ptr(r);
            for (std::size_t w = 0; w < wpr_; ++w) {
                std::uint64_t word = p[w];
                while (word) {
                    m.insert(r, w * 64 + static_cast<std::size_t>(__builtin_ctzll(word)));
                    word &= word - 1;
                }
            }
        }
        return m;
    }

private:
    std::size_t rows_ = 0, cols_ = 0, wpr_ = 0;
    std::vector<std::uint64_t> data_;
};

// ---------------------------------------------------------------------------
// Basic operations
// ---------------------------------------------------------------------------

inline BinaryVector matvec(const BinaryMatrix& m, const BinaryVector& v) {
    if (m.cols() != v.size())
        throw std::invalid_argument("matvec dimension mismatch: matrix is " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()) + ", vector has length " + std::to_string(v.size()));
    BinaryVector out(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        bool parity = false;
        for (std::uint32_t c : m.row(r)) parity ^= v.get(c);
        if (parity) out.set(r, true);
    }
    return out;
}

inline BinaryMatrix transpose(const BinaryMatrix& m) {
    std::vector<std::vector<std::uint32_t>> cols(m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::uint32_t c : m.row(r)) cols[c].push_back(static_cast<std::uint32_t>(r));
    return BinaryMatrix::from_rows(m.rows(), cols);
}

/// Sparse-times-packed product; used for orthogonality checks.
inline BinaryMatrix mat_mul(const BinaryMatrix& a, const BinaryMatrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("mat_mul dimension mismatch: " + std::to_string(a.cols()) + " vs " +
                                    std::to_string(b.rows()));
    PackedMatrix pb(b);
    PackedMatrix out(a.rows(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        std::uint64_t* dst = out.row_ptr(r);
        for (std::uint32_t k : a.row(r)) {
            const std::uint64_t* src = pb.row_ptr(k);
            for (std::size_t w = 0; w < out.words_per_row(); ++w) dst[w] ^= src[w];
        }
    }
    return out.to_sparse();
}

inline BinaryMatrix tensor_product(const BinaryMatrix& a, const BinaryMatrix& b) {
    constexpr std::uint64_t kIndexCap = std::uint64_t{1} << 31;
    const std::uint64_t rows = std::uint64_t{a.rows()} * b.rows();
    const std::uint64_t cols = std::uint64_t{a.cols()} * b.cols();
    if (rows >= kIndexCap || cols >= kIndexCap)
        throw std::overflow_error("tensor_product index space overflow: " + std::to_string(rows) + "x" +
                                  std::to_string(cols));
    // Convention: the left factor is the slow index, entry
    // (i*rows(B)+k, j*cols(B)+l) = A[i,j] * B[k,l].
    BinaryMatrix out(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::uint32_t j : a.row(i))
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::uint32_t l : b.row(k)) out.insert(i * b.rows() + k, std::size_t{j} * b.cols() + l);
    return out;
}

inline BinaryMatrix hstack(const BinaryMatrix& a, const BinaryMatrix& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("hstack row mismatch");
    BinaryMatrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::uint32_t c : a.row(r)) out.insert(r, c);
        for (std::uint32_t c : b.row(r)) out.insert(r, a.cols() + c);
    }
    return out;
}

inline BinaryMatrix vstack(const BinaryMatrix& a, const BinaryMatrix& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("vstack col mismatch");
    BinaryMatrix out(a.rows() + b.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::uint32_t c : a.row(r)) out.insert(r, c);
    for (std::size_t r = 0; r < b.rows(); ++r)
        for (std::uint32_t c : b.row(r)) out.insert(a.rows() + r, c);
    return out;
}

/// One cell of a block grid: either a matrix or a zero placeholder whose
/// shape is inferred from its row and column neighbours.
struct Block {
    Block() : zero(true) {}
    Block(BinaryMatrix m) : mat(std::move(m)), zero(false) {}  // NOLINT(google-explicit-constructor)
    BinaryMatrix mat;
    bool zero;
};

inline BinaryMatrix block_compose(const std::vector<std::vector<Block>>& grid) {
    if (grid.empty()) return BinaryMatrix(0, 0);
    const std::size_t grows = grid.size();
    const std::size_t gcols = grid.front().size();
    for (const auto& row : grid)
        if (row.size() != gcols) throw std::invalid_argument("block grid is ragged");

    std::vector<std::optional<std::size_t>> row_h(grows), col_w(gcols);
    for (std::size_t i = 0; i < grows; ++i)
        for (std::size_t j = 0; j < gcols; ++j) {
            if (grid[i][j].zero) continue;
            const auto& m = grid[i][j].mat;
            if (row_h[i] && *row_h[i] != m.rows())
                throw std::invalid_argument("inconsistent block heights in grid row " + std::to_string(i));
            if (col_w[j] && *col_w[j] != m.cols())
                throw std::invalid_argument("inconsistent block widths in grid column " + std::to_string(j));
            row_h[i] = m.rows();
            col_w[j] = m.cols();
        }
    for (std::size_t i = 0; i < grows; ++i)
        if (!row_h[i]) throw std::invalid_argument("block grid row " + std::to_string(i) + " has no sized block");
    for (std::size_t j = 0; j < gcols; ++j)
        if (!col_w[j]) throw std::invalid_argument("block grid column " + std::to_string(j) + " has no sized block");

    std::vector<std::size_t> roff(grows + 1, 0), coff(gcols + 1, 0);
    for (std::size_t i = 0; i < grows; ++i) roff[i + 1] = roff[i] + *row_h[i];
    for (std::size_t j = 0; j < gcols; ++j) coff[j + 1] = coff[j] + *col_w[j];

    BinaryMatrix out(roff[grows], coff[gcols]);
    for (std::size_t i = 0; i < grows; ++i)
        for (std::size_t j = 0; j < gcols; ++j) {
            if (grid[i][j].zero) continue;
            const auto& m = grid[i][j].mat;
            for (std::size_t r = 0; r < m.rows(); ++r)
                for (std::uint32_t c : m.row(r)) out.insert(roff[i] + r, coff[j] + c);
        }
    return out;
}

inline BinaryMatrix extract_block(const BinaryMatrix& m, std::size_t row0, std::size_t col0, std::size_t rows,
                                  std::size_t cols) {
    if (row0 + rows > m.rows() || col0 + cols > m.cols()) throw std::invalid_argument("block extraction out of range");
    BinaryMatrix out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::uint32_t c : m.row(row0 + r))
            if (c >= col0 && c < col0 + cols) out.insert(r, c - col0);
    return out;
}

// ---------------------------------------------------------------------------
// Gaussian elimination
// ---------------------------------------------------------------------------

struct Echelon {
    PackedMatrix mat;                       // echelon (or fully reduced) form
    std::vector<std::uint32_t> pivot_cols;  // in elimination order
    std::optional<PackedMatrix> transform;  // U with mat = U * input
    std::size_t rank() const { return pivot_cols.size(); }
};

/// Row reduction with partial pivoting by first nonzero column.  Columns are
/// visited in `col_order` when given (used by OSD), natural order otherwise.
inline Echelon row_reduce(const PackedMatrix& input, bool full_reduce, bool want_transform,
                          const std::vector<std::uint32_t>* col_order = nullptr) {
    Echelon e;
    e.mat = input;
    const std::size_t m = input.rows();
    if (want_transform) {
        PackedMatrix u(m, m);
        for (std::size_t i = 0; i < m; ++i) u.set(i, i, true);
        e.transform = std::move(u);
    }
    std::size_t r = 0;
    const std::size_t ncols = input.cols();
    for (std::size_t ci = 0; ci < ncols && r < m; ++ci) {
        const std::uint32_t c = col_order ? (*col_order)[ci] : static_cast<std::uint32_t>(ci);
        std::size_t pivot = r;
        while (pivot < m && !e.mat.get(pivot, c)) ++pivot;
        if (pivot == m) continue;
        e.mat.swap_rows(r, pivot);
        if (e.transform) e.transform->swap_rows(r, pivot);
        const std::size_t lo = full_reduce ? 0 : r + 1;
        for (std::size_t i = lo; i < m; ++i) {
            if (i == r || !e.mat.get(i, c)) continue;
            e.mat.xor_rows(i, r);
            if (e.transform) e.transform->xor_rows(i, r);
        }
        e.pivot_cols.push_back(c);
        ++r;
    }
    return e;
}

inline std::size_t rank(const BinaryMatrix& m) { return row_reduce(PackedMatrix(m), false, false).rank(); }

/// Rows form a basis of { v : M v = 0 }; row count = cols - rank.
/// Basis rows are ordered by ascending free column and each has a 1 in
/// exactly one free column, so the result is deterministic.
inline BinaryMatrix kernel_basis(const BinaryMatrix& m) {
    Echelon e = row_reduce(PackedMatrix(m), true, false);
    std::vector<bool> is_pivot(m.cols(), false);
    for (std::uint32_t c : e.pivot_cols) is_pivot[c] = true;
    BinaryMatrix basis(m.cols() - e.rank(), m.cols());
    std::size_t out_row = 0;
    for (std::size_t free_col = 0; free_col < m.cols(); ++free_col) {
        if (is_pivot[free_col]) continue;
        basis.insert(out_row, free_col);
        for (std::size_t i = 0; i < e.rank(); ++i)
            if (e.mat.get(i, free_col)) basis.insert(out_row, e.pivot_cols[i]);
        ++out_row;
    }
    return basis;
}

/// Membership and reduction queries against the row space of a matrix.
class RowSpace {
public:
    RowSpace() = default;
    explicit RowSpace(const BinaryMatrix& m) : ech_(row_reduce(PackedMatrix(m), true, false)), cols_(m.cols()) {}

    std::size_t rank() const { return ech_.rank(); }

    /// Reduces v against the echelon rows; result is the canonical coset
    /// representative of v modulo the row space.
    BinaryVector reduce(const BinaryVector& v) const {
        if (v.size() != cols_) throw std::invalid_argument("RowSpace::reduce length mismatch");
        BinaryVector out = v;
        for (std::size_t i = 0; i < ech_.rank(); ++i)
            if (out.get(ech_.pivot_cols[i])) ech_.mat.xor_row_into(i, out);
        return out;
    }
    bool contains(const BinaryVector& v) const { return reduce(v).is_zero(); }

private:
    Echelon ech_;
    std::size_t cols_ = 0;
};

/// One solution of M x = s, or nullopt when s is outside the column space.
inline std::optional<BinaryVector> solve(const BinaryMatrix& m, const BinaryVector& s) {
    if (m.rows() != s.size())
        throw std::invalid_argument("solve dimension mismatch: " + std::to_string(m.rows()) + " rows vs syndrome " +
                                    std::to_string(s.size()));
    Echelon e = row_reduce(PackedMatrix(m), true, true);
    BinaryVector x(m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const bool bit = e.transform->row_dot(i, s);
        if (i < e.rank()) {
            if (bit) x.set(e.pivot_cols[i], true);
        } else if (bit) {
            return std::nullopt;
        }
    }
    return x;
}

/// Inverse of a square full-rank matrix; throws if singular.
inline BinaryMatrix invert(const BinaryMatrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("invert: matrix not square");
    Echelon e = row_reduce(PackedMatrix(m), true, true);
    if (e.rank() != m.rows()) throw std::invalid_argument("invert: matrix is singular");
    return e.transform->to_sparse();
}

// ---------------------------------------------------------------------------
// Minimum-weight coset representative
// ---------------------------------------------------------------------------

struct CosetRep {
    BinaryVector rep;
    bool exact;  // false when the heuristic mode returned an upper bound only
};

constexpr std::uint64_t kDefaultCosetGuard = std::uint64_t{1} << 24;

/// Minimum-weight vector in v + rowspace(S).  Exhaustive mode sweeps all
/// 2^rank(S) coset members with a Gray code and breaks weight ties by
/// support-lexicographic order; the heuristic mode greedily XORs improving
/// basis rows and flags the result as an upper bound.
inline CosetRep min_weight_coset_rep(const BinaryVector& v, const BinaryMatrix& s,
                                     std::uint64_t guard = kDefaultCosetGuard, bool heuristic = false) {
    if (s.cols() != v.size())
        throw std::invalid_argument("min_weight_coset_rep: vector length " + std::to_string(v.size()) +
                                    " vs matrix cols " + std::to_string(s.cols()));
    Echelon e = row_reduce(PackedMatrix(s), false, false);
    const std::size_t r = e.rank();
    if (heuristic) {
        BinaryVector cur = v;
        bool improved = true;
        while (improved) {
            improved = false;
            for (std::size_t i = 0; i < r; ++i) {
                BinaryVector cand = cur;
                e.mat.xor_row_into(i, cand);
                if (cand.weight() < cur.weight()) {
                    cur = std::move(cand);
                    improved = true;
                }
            }
        }
        return {cur, false};
    }
    if (r >= 63 || (std::uint64_t{1} << r) > guard)
        throw BudgetExceeded("min_weight_coset_rep: coset too large for exhaustive sweep",
                             r >= 63 ? ~std::uint64_t{0} : (std::uint64_t{1} << r));
    BinaryVector cur = v;
    BinaryVector best = v;
    std::size_t best_w = v.weight();
    const std::uint64_t total = std::uint64_t{1} << r;
    for (std::uint64_t g = 1; g < total; ++g) {
        const std::size_t row = static_cast<std::size_t>(__builtin_ctzll(g));
        e.mat.xor_row_into(row, cur);
        const std::size_t w = cur.weight();
        if (w < best_w || (w == best_w && cur.lex_less(best))) {
            best = cur;
            best_w = w;
        }
    }
    return {best, true};
}

}  // namespace qprep
