#pragma once

// Exhaustive property checkers: distances, confinement, soundness, homology
// dimensions, single-shot distance.  These are the oracles the tests and
// acceptance runs lean on; every search is budgeted and certified.

#include <cmath>
#include <limits>
#include <optional>

#include "qprep/codes.hpp"
#include "qprep/exact.hpp"

namespace qprep {

// ---------------------------------------------------------------------------
// Distances
// ---------------------------------------------------------------------------

struct DistanceResult {
    enum class Kind { Exact, Infinite, LowerBound } kind;
    std::size_t value = 0;  // exact distance, or the certified bound

    bool is_exact() const { return kind == Kind::Exact; }
    bool is_infinite() const { return kind == Kind::Infinite; }
};

/// Minimum nonzero kernel weight.  With weight_cap = 0 all 2^k - 1 codewords
/// are enumerated through a Gray sweep of the kernel basis (guarded);
/// otherwise a ball search up to weight_cap either finds the distance or
/// certifies the bound "no codeword of weight <= cap".
inline DistanceResult distance_exhaustive(const BinaryMatrix& h, std::size_t weight_cap = 0,
                                          std::uint64_t guard = kDefaultCosetGuard) {
    BinaryMatrix kb = kernel_basis(h);
    const std::size_t k = kb.rows();
    if (k == 0) return {DistanceResult::Kind::Infinite, 0};
    if (weight_cap == 0) {
        if (k >= 63 || (std::uint64_t{1} << k) > guard)
            throw BudgetExceeded("distance_exhaustive: 2^k codeword enumeration too large",
                                 k >= 63 ? ~std::uint64_t{0} : (std::uint64_t{1} << k));
        PackedMatrix basis(kb);
        BinaryVector cur(h.cols());
        std::size_t best = h.cols() + 1;
        const std::uint64_t total = std::uint64_t{1} << k;
        for (std::uint64_t g = 1; g < total; ++g) {
            basis.xor_row_into(static_cast<std::size_t>(__builtin_ctzll(g)), cur);
            best = std::min(best, cur.weight());
        }
        return {DistanceResult::Kind::Exact, best};
    }
    ExactSolver solver(h);
    auto w = solver.min_nonzero_kernel_weight(weight_cap, guard);
    if (w) return {DistanceResult::Kind::Exact, *w};
    return {DistanceResult::Kind::LowerBound, weight_cap};
}

/// Minimum weight over the nontrivial classes of ker(killer) modulo
/// rowspace(stabilizer), via Gray sweeps over every logical class.
inline DistanceResult coset_class_distance(const BinaryMatrix& logicals, const BinaryMatrix& stabilizer,
                                           std::uint64_t guard = kDefaultCosetGuard) {
    const std::size_t k = logicals.rows();
    if (k == 0) return {DistanceResult::Kind::Infinite, 0};
    const std::size_t r = rank(stabilizer);
    if (k + r >= 63 || (((std::uint64_t{1} << k) - 1) << r) > guard)
        throw BudgetExceeded("coset_class_distance: class enumeration too large",
                             k + r >= 63 ? ~std::uint64_t{0} : (((std::uint64_t{1} << k) - 1) << r));
    PackedMatrix basis(logicals);
    BinaryVector cur(logicals.cols());
    std::size_t best = logicals.cols() + 1;
    const std::uint64_t total = std::uint64_t{1} << k;
    for (std::uint64_t g = 1; g < total; ++g) {
        basis.xor_row_into(static_cast<std::size_t>(__builtin_ctzll(g)), cur);
        best = std::min(best, min_weight_coset_rep(cur, stabilizer, guard).rep.weight());
    }
    return {DistanceResult::Kind::Exact, best};
}

struct CssDistance {
    DistanceResult d_x, d_z;
};

/// d_Z = min weight over nontrivial classes of ker(H_X)/rowspace(H_Z),
/// d_X symmetrically.
inline CssDistance css_distance_exhaustive(const CssCode& code, std::uint64_t guard = kDefaultCosetGuard) {
    if (code.k == 0)
        return {{DistanceResult::Kind::Infinite, 0}, {DistanceResult::Kind::Infinite, 0}};
    auto [lx, lz] = logical_basis(code);
    return {coset_class_distance(lx, code.h_x, guard), coset_class_distance(lz, code.h_z, guard)};
}

// ---------------------------------------------------------------------------
// Monotone bound functions (tabulated)
// ---------------------------------------------------------------------------

/// Increasing function on nonnegative integers given by a table; arguments
/// beyond the table evaluate to +infinity, i.e. the bound stops biting.
struct MonotoneFn {
    std::vector<double> table;

    double operator()(std::size_t x) const {
        return x < table.size() ? table[x] : std::numeric_limits<double>::infinity();
    }

    static MonotoneFn identity(std::size_t upto) { return linear(1.0, upto); }
    static MonotoneFn linear(double alpha, std::size_t upto) {
        MonotoneFn f;
        for (std::size_t x = 0; x <= upto; ++x) f.table.push_back(alpha * static_cast<double>(x));
        return f;
    }
    /// x^3 / 4
    static MonotoneFn cubic_quarter(std::size_t upto) {
        MonotoneFn f;
        for (std::size_t x = 0; x <= upto; ++x) f.table.push_back(std::pow(static_cast<double>(x), 3) / 4.0);
        return f;
    }
    static MonotoneFn from_frontier(const std::vector<std::size_t>& frontier) {
        MonotoneFn f;
        double running = 0;
        for (std::size_t v : frontier) {
            running = std::max(running, static_cast<double>(v));
            f.table.push_back(running);
        }
        return f;
    }
};

// ---------------------------------------------------------------------------
// Confinement (low-error property)
// ---------------------------------------------------------------------------

struct ConfinementReport {
    bool pass = true;
    std::size_t t = 0;
    /// frontier[s] = max reduced weight observed among errors of reduced
    /// weight <= t whose syndrome weight is s.  This is the measured
    /// confinement frontier of the instance.
    std::vector<std::size_t> frontier;
    std::optional<BinaryVector> violator;
    double worst_margin = -std::numeric_limits<double>::infinity();  // max of (||e|| - f(|s|))
    std::uint64_t errors_checked = 0;
};

/// Verifies f(|He|) >= ||e|| for every error of reduced weight <= t, where
/// ||.|| is the minimum weight over e + rowspace(stabilizers).  Errors are
/// enumerated by plain weight (every class is covered by its minimum-weight
/// representative); coset sweeps run only when the plain weight cannot
/// already settle the case.
inline ConfinementReport confinement_check(const BinaryMatrix& h, const BinaryMatrix& stabilizers, std::size_t t,
                                           const MonotoneFn& f, std::uint64_t guard = kDefaultCosetGuard) {
    if (h.cols() != stabilizers.cols()) throw std::invalid_argument("confinement_check: column mismatch");
    ConfinementReport rep;
    rep.t = t;
    rep.frontier.assign(h.rows() + 1, 0);

    PackedMatrix columns(transpose(h));
    std::vector<std::size_t> support;
    BinaryVector syndrome(h.rows());

    std::size_t max_seen_sigma = 0;
    auto visit = [&](const std::vector<std::size_t>& sup) {
        ++rep.errors_checked;
        const std::size_t sigma = syndrome.weight();
        max_seen_sigma = std::max(max_seen_sigma, sigma);
        const std::size_t plain = sup.size();
        const double bound = f(sigma);
        if (static_cast<double>(plain) <= bound && plain <= rep.frontier[sigma]) return;
        BinaryVector e = BinaryVector::from_support(h.cols(), sup);
        const std::size_t reduced = min_weight_coset_rep(e, stabilizers, guard).rep.weight();
        rep.frontier[sigma] = std::max(rep.frontier[sigma], reduced);
        const double margin = static_cast<double>(reduced) - bound;
        rep.worst_margin = std::max(rep.worst_margin, margin);
        if (margin > 0 && !rep.violator) {
            rep.pass = false;
            rep.violator = e;
        }
    };

    // Depth-first enumeration of supports of weight 1..t with an incremental
    // syndrome.
    auto enumerate = [&](auto&& self, std::size_t next, std::size_t remaining) -> void {
        for (std::size_t c = next; c < h.cols(); ++c) {
            columns.xor_row_into(c, syndrome);
            support.push_back(c);
            visit(support);
            if (remaining > 1) self(self, c + 1, remaining - 1);
            support.pop_back();
            columns.xor_row_into(c, syndrome);
        }
    };
    if (t >= 1) enumerate(enumerate, 0, t);
    rep.frontier.resize(max_seen_sigma + 1);
    return rep;
}

// ---------------------------------------------------------------------------
// Soundness (low-syndrome property)
// ---------------------------------------------------------------------------

struct SoundnessReport {
    bool pass = true;
    std::size_t t = 0;
    bool redundancy_absent = false;  // rank(H) == rows(H); every syndrome is valid
    /// frontier[s] = max over valid syndromes of weight s of the minimum
    /// preimage weight.
    std::vector<std::size_t> frontier;
    std::optional<BinaryVector> violating_syndrome;
    std::uint64_t syndromes_checked = 0;
};

/// For every valid syndrome with |s| <= t, finds the minimum-weight error
/// producing it and checks it against f(|s|).  The minimum runs over the
/// full solution coset, which already includes every stabilizer shift.
inline SoundnessReport soundness_check(const BinaryMatrix& h, const BinaryMatrix& stabilizers, std::size_t t,
                                       const MonotoneFn& f, std::uint64_t node_budget = kDefaultNodeBudget) {
    if (h.cols() != stabilizers.cols()) throw std::invalid_argument("soundness_check: column mismatch");
    for (std::size_t r = 0; r < stabilizers.rows(); ++r)
        if (!matvec(h, stabilizers.row_as_vector(r)).is_zero())
            throw std::invalid_argument("soundness_check: stabilizer rows must lie in ker(H)");

    SoundnessReport rep;
    rep.t = t;
    rep.redundancy_absent = (rank(h) == h.rows());
    rep.frontier.assign(t + 1, 0);

    RowSpace image(transpose(h));  // membership in im(H) = rowspace(H^T)
    ExactSolver solver(h);
    BinaryVector s(h.rows());

    auto visit = [&]() {
        if (!image.contains(s)) return;
        ++rep.syndromes_checked;
        auto e = solver.min_weight_solution(s, h.cols(), node_budget);
        if (!e) throw std::logic_error("soundness_check: valid syndrome has no preimage");
        const std::size_t w = e->weight();
        rep.frontier[s.weight()] = std::max(rep.frontier[s.weight()], w);
        if (static_cast<double>(w) > f(s.weight()) && !rep.violating_syndrome) {
            rep.pass = false;
            rep.violating_syndrome = s;
        }
    };

    auto enumerate = [&](auto&& self, std::size_t next, std::size_t remaining) -> void {
        for (std::size_t c = next; c < h.rows(); ++c) {
            s.flip(c);
            visit();
            if (remaining > 1) self(self, c + 1, remaining - 1);
            s.flip(c);
        }
    };
    ++rep.syndromes_checked;  // the zero syndrome, vacuously fine
    if (t >= 1) enumerate(enumerate, 0, t);
    return rep;
}

// ---------------------------------------------------------------------------
// Homology
// ---------------------------------------------------------------------------

/// Dimensions of the homology groups of the chain
///   V_0 --A_1--> V_1 --A_2--> ... --A_L--> V_L
/// at every position.  Consecutive maps must compose to zero.
inline std::vector<std::size_t> homology_dims(const std::vector<BinaryMatrix>& maps) {
    if (maps.empty()) throw std::invalid_argument("homology_dims: empty chain");
    for (std::size_t i = 0; i + 1 < maps.size(); ++i) {
        if (maps[i + 1].cols() != maps[i].rows())
            throw std::invalid_argument("homology_dims: chain spaces disagree at position " + std::to_string(i + 1));
        if (!mat_mul(maps[i + 1], maps[i]).is_zero())
            throw std::invalid_argument("homology_dims: maps " + std::to_string(i) + "," + std::to_string(i + 1) +
                                        " do not compose to zero");
    }
    std::vector<std::size_t> ranks(maps.size());
    for (std::size_t i = 0; i < maps.size(); ++i) ranks[i] = rank(maps[i]);
    std::vector<std::size_t> dims(maps.size() + 1);
    dims[0] = maps[0].cols() - ranks[0];
    for (std::size_t i = 1; i < maps.size(); ++i) dims[i] = maps[i].cols() - ranks[i] - ranks[i - 1];
    dims[maps.size()] = maps.back().rows() - ranks.back();
    return dims;
}

// ---------------------------------------------------------------------------
// Single-shot distance
// ---------------------------------------------------------------------------

/// Minimum weight over nonzero classes of ker(M) / im(H), i.e. the lightest
/// metacheck-satisfying syndrome no physical error can produce; Infinite
/// when the quotient is trivial.  The ball search up to `cap` either finds
/// it or certifies a lower bound.
inline DistanceResult single_shot_distance(const BinaryMatrix& h_z, const BinaryMatrix& m_z, std::size_t cap = 6,
                                           std::uint64_t node_budget = kDefaultNodeBudget) {
    if (m_z.cols() != h_z.rows())
        throw std::invalid_argument("single_shot_distance: M columns " + std::to_string(m_z.cols()) +
                                    " vs H rows " + std::to_string(h_z.rows()));
    const std::size_t dim_ker = m_z.cols() - rank(m_z);
    const std::size_t rank_h = rank(h_z);
    if (dim_ker < rank_h) throw std::logic_error("single_shot_distance: im(H) not contained in ker(M)");
    if (dim_ker == rank_h) return {DistanceResult::Kind::Infinite, 0};

    RowSpace image(transpose(h_z));
    PackedMatrix meta_cols(transpose(m_z));
    const std::size_t bits = m_z.cols();
    std::size_t max_col = 1;
    for (std::size_t c = 0; c < bits; ++c) max_col = std::max(max_col, meta_cols.row_weight(c));

    BinaryVector meta(m_z.rows());
    BinaryVector s(bits);
    std::uint64_t nodes = 0;
    std::optional<std::size_t> found;
    auto enumerate = [&](auto&& self, std::size_t next, std::size_t remaining) -> bool {
        if (meta.weight() > remaining * max_col) return false;
        for (std::size_t c = next; c + remaining <= bits; ++c) {
            if (++nodes > node_budget)
                throw BudgetExceeded("single_shot_distance: ball search exceeded node budget", node_budget);
            meta_cols.xor_row_into(c, meta);
            s.flip(c);
            if (remaining == 1) {
                if (meta.is_zero() && !image.contains(s)) {
                    meta_cols.xor_row_into(c, meta);
                    s.flip(c);
                    return true;
                }
            } else if (self(self, c + 1, remaining - 1)) {
                meta_cols.xor_row_into(c, meta);
                s.flip(c);
                return true;
            }
            meta_cols.xor_row_into(c, meta);
            s.flip(c);
        }
        return false;
    };
    for (std::size_t w = 1; w <= cap && !found; ++w)
        if (enumerate(enumerate, 0, w)) found = w;
    if (found) return {DistanceResult::Kind::Exact, *found};
    return {DistanceResult::Kind::LowerBound, cap};
}

}  // namespace qprep
