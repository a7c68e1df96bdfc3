#pragma once

// Exhaustive minimum-weight search over GF(2) solution sets.  Shared by the
// analysis oracles and the exact decoders; never approximates: either the
// answer is certified or BudgetExceeded is thrown.

#include <optional>

#include "qprep/gf2.hpp"

namespace qprep {

constexpr std::uint64_t kDefaultNodeBudget = std::uint64_t{1} << 28;

class ExactSolver {
public:
    explicit ExactSolver(const BinaryMatrix& h)
        : rows_(h.rows()), cols_(h.cols()), columns_(transpose(h)), max_col_weight_(0) {
        for (std::size_t c = 0; c < cols_; ++c) max_col_weight_ = std::max(max_col_weight_, columns_.row_weight(c));
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    /// Lexicographically-first minimum-weight e with H e = s and |e| <=
    /// max_weight; nullopt certifies that no such e exists.  The node budget
    /// bounds the number of partial combinations visited.
    std::optional<BinaryVector> min_weight_solution(const BinaryVector& s, std::size_t max_weight,
                                                    std::uint64_t node_budget = kDefaultNodeBudget) const {
        if (s.size() != rows_)
            throw std::invalid_argument("ExactSolver: syndrome length " + std::to_string(s.size()) + " vs " +
                                        std::to_string(rows_) + " rows");
        std::uint64_t nodes = 0;
        std::vector<std::size_t> support;
        for (std::size_t w = 0; w <= std::min(max_weight, cols_); ++w) {
            if (w == 0) {
                if (s.is_zero()) return BinaryVector(cols_);
                continue;
            }
            support.clear();
            BinaryVector residual = s;
            if (search(residual, 0, w, support, nodes, node_budget))
                return BinaryVector::from_support(cols_, support);
        }
        return std::nullopt;
    }

    /// Minimum weight of a *nonzero* kernel element, up to max_weight.
    std::optional<std::size_t> min_nonzero_kernel_weight(std::size_t max_weight,
                                                         std::uint64_t node_budget = kDefaultNodeBudget) const {
        std::uint64_t nodes = 0;
        std::vector<std::size_t> support;
        for (std::size_t w = 1; w <= std::min(max_weight, cols_); ++w) {
            support.clear();
            BinaryVector residual(rows_);
            if (search(residual, 0, w, support, nodes, node_budget)) return w;
        }
        return std::nullopt;
    }

private:
    bool search(BinaryVector& residual, std::size_t next, std::size_t remaining, std::vector<std::size_t>& support,
                std::uint64_t& nodes, std::uint64_t budget) const {
        if (residual.weight() > remaining * max_col_weight_) return false;
        for (std::size_t c = next; c + remaining <= cols_; ++c) {
            if (++nodes > budget) throw BudgetExceeded("exact minimum-weight search exceeded node budget", budget);
            columns_.xor_row_into(c, residual);
            support.push_back(c);
            if (remaining == 1) {
                if (residual.is_zero()) return true;
            } else if (search(residual, c + 1, remaining - 1, support, nodes, budget)) {
                return true;
            }
            support.pop_back();
            columns_.xor_row_into(c, residual);
        }
        return false;
    }

    std::size_t rows_, cols_;
    PackedMatrix columns_;  // column c of H stored as packed row c
    std::size_t max_col_weight_;
};

}  // namespace qprep
