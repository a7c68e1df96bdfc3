#pragma once

// The decoder stack: plain min-sum belief propagation with a flooding
// schedule, ordered-statistics postprocessing with a combination sweep,
// two-stage metacheck decoding, augmented single-shot decoding, and the
// exact decoders used as oracles.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <unordered_set>

#include "qprep/exact.hpp"
#include "qprep/gf2.hpp"

namespace qprep {

struct BpConfig {
    int max_iters = 20;          // min-sum iterations, flooding schedule
    double channel_prior = 0.01; // per-bit error probability
    double llr_sat = 30.0;       // symmetric clamp on messages and priors
};

struct OsdConfig {
    // Combination sweep: the candidate set is the base solution, every
    // weight-1 flip over the non-pivot positions, and all weight-2 flips
    // among the first `search_depth` non-pivot positions in reliability
    // order.
    int search_depth = 20;
};

struct DecodeResult {
    BinaryVector correction;
    bool converged = false;  // belief propagation matched the syndrome
    bool used_osd = false;
    int iterations = 0;
    std::vector<double> soft;  // posterior log-likelihood ratios
};

inline double prior_to_llr(double p, double sat) {
    if (p < 0.0 || p >= 0.5)
        throw std::invalid_argument("channel prior must lie in [0, 1/2), got " + std::to_string(p));
    if (p == 0.0) return sat;
    return std::min(std::log((1.0 - p) / p), sat);
}

class BpOsdDecoder {
public:
    BpOsdDecoder(const BinaryMatrix& h, BpConfig bp = {}, OsdConfig osd = {})
        : h_(h), bp_(bp), osd_(osd), packed_(h), n_(h.cols()), m_(h.rows()) {
        if (bp.max_iters < 1) throw std::invalid_argument("BpConfig: max_iters must be >= 1");
        build_graph();
        set_prior(bp.channel_prior);
        tie_rank_.assign(n_, 0);
    }

    void set_prior(double p) { priors_.assign(n_, prior_to_llr(p, bp_.llr_sat)); }
    void set_priors(const std::vector<double>& per_bit_p) {
        if (per_bit_p.size() != n_) throw std::invalid_argument("per-bit prior length mismatch");
        priors_.resize(n_);
        for (std::size_t v = 0; v < n_; ++v) priors_[v] = prior_to_llr(per_bit_p[v], bp_.llr_sat);
    }
    /// Secondary sort key for ordering equally-reliable columns in OSD.
    void set_tie_rank(std::vector<int> rank) {
        if (rank.size() != n_) throw std::invalid_argument("tie rank length mismatch");
        tie_rank_ = std::move(rank);
    }

    const BinaryMatrix& matrix() const { return h_; }

    /// Belief propagation, then OSD when the syndrome was not matched.
    DecodeResult decode(const BinaryVector& syndrome) {
        DecodeResult res = bp_only(syndrome);
        if (res.converged) return res;
        DecodeResult post = osd_only(syndrome, res.soft);
        post.iterations = res.iterations;
        return post;
    }

    DecodeResult bp_only(const BinaryVector& syndrome) {
        if (syndrome.size() != m_)
            throw std::invalid_argument("bp: syndrome length " + std::to_string(syndrome.size()) + " vs " +
                                        std::to_string(m_) + " checks");
        DecodeResult res;
        res.soft = priors_;
        res.correction = BinaryVector(n_);
        if (syndrome.is_zero()) {
            res.converged = true;
            return res;
        }
        for (std::size_t e = 0; e < edge_var_.size(); ++e) to_check_[e] = priors_[edge_var_[e]];
        std::fill(to_var_.begin(), to_var_.end(), 0.0);
        hard_.assign(n_, 0);

        for (int iter = 1; iter <= bp_.max_iters; ++iter) {
            res.iterations = iter;
            check_pass(syndrome);
            var_pass(res.soft);
            if (syndrome_matches(syndrome)) {
                res.converged = true;
                for (std::size_t v = 0; v < n_; ++v)
                    if (hard_[v]) res.correction.set(v, true);
                return res;
            }
        }
        for (std::size_t v = 0; v < n_; ++v)
            if (hard_[v]) res.correction.set(v, true);
        return res;
    }

    /// Ordered-statistics postprocessing.  Sorts columns by reliability
    /// (ascending posterior, ties by tie rank then index), eliminates in that
    /// order, and sweeps the candidate set described in OsdConfig.  Always
    /// returns a syndrome-consistent correction; rejects syndromes outside
    /// the image of H.
    DecodeResult osd_only(const BinaryVector& syndrome, const std::vector<double>& reliabilities) {
        if (reliabilities.size() != n_) throw std::invalid_argument("osd: reliability length mismatch");
        std::vector<std::uint32_t> order(n_);
        for (std::size_t v = 0; v < n_; ++v) order[v] = static_cast<std::uint32_t>(v);
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (reliabilities[a] != reliabilities[b]) return reliabilities[a] < reliabilities[b];
            if (tie_rank_[a] != tie_rank_[b]) return tie_rank_[a] < tie_rank_[b];
            return a < b;
        });
        Echelon ech = row_reduce(packed_, true, true, &order);
        const std::size_t r = ech.rank();
        BinaryVector y(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            const bool bit = ech.transform->row_dot(i, syndrome);
            if (bit) {
                if (i >= r) throw std::invalid_argument("osd: syndrome is not in the image of H");
                y.set(i, true);
            }
        }
        std::vector<bool> is_pivot(n_, false);
        for (std::uint32_t c : ech.pivot_cols) is_pivot[c] = true;
        std::vector<std::uint32_t> free_cols;
        for (std::uint32_t v : order)
            if (!is_pivot[v]) free_cols.push_back(v);
        const std::size_t sweep = std::min<std::size_t>(static_cast<std::size_t>(std::max(osd_.search_depth, 0)),
                                                        free_cols.size());
        std::vector<std::uint32_t> pos_of(n_);
        for (std::size_t i = 0; i < n_; ++i) pos_of[order[i]] = static_cast<std::uint32_t>(i);

        auto assemble = [&](const BinaryVector& yb, const std::vector<std::uint32_t>& flips, bool permuted) {
            BinaryVector e(n_);
            for (std::size_t i = 0; i < r; ++i)
                if (yb.get(i)) e.set(permuted ? pos_of[ech.pivot_cols[i]] : ech.pivot_cols[i], true);
            for (std::uint32_t fcol : flips) e.set(permuted ? pos_of[fcol] : fcol, true);
            return e;
        };
        // Pivot bits occupy rows < r only, so the candidate weight is the
        // word-parallel popcount plus the flip count.
        auto weight_of = [&](const BinaryVector& yb, std::size_t nflips) { return nflips + yb.weight(); };

        // Weight ties break lexicographically in reliability order, so the
        // preference expressed by the tie rank carries through to the output.
        BinaryVector best_y = y;
        std::vector<std::uint32_t> best_flips;
        std::size_t best_w = weight_of(y, 0);
        BinaryVector best_perm = assemble(y, {}, true);
        auto consider = [&](const BinaryVector& yb, const std::vector<std::uint32_t>& flips) {
            const std::size_t w = weight_of(yb, flips.size());
            if (w > best_w) return;
            BinaryVector cand = assemble(yb, flips, true);
            if (w < best_w || cand.lex_less(best_perm)) {
                best_w = w;
                best_perm = std::move(cand);
                best_y = yb;
                best_flips = flips;
            }
        };

        // Column T[a] of the reduced matrix is exactly the solution shift a
        // flip of T[a] induces on the pivot bits.
        std::vector<BinaryVector> shift(free_cols.size(), BinaryVector(m_));
        for (std::size_t a = 0; a < free_cols.size(); ++a)
            for (std::size_t i = 0; i < r; ++i)
                if (ech.mat.get(i, free_cols[a])) shift[a].set(i, true);

        for (std::size_t a = 0; a < free_cols.size(); ++a) consider(y ^ shift[a], {free_cols[a]});
        for (std::size_t a = 0; a < sweep; ++a) {
            const BinaryVector ya = y ^ shift[a];
            for (std::size_t b = a + 1; b < sweep; ++b) consider(ya ^ shift[b], {free_cols[a], free_cols[b]});
        }

        DecodeResult res;
        res.correction = assemble(best_y, best_flips, false);
        res.converged = false;
        res.used_osd = true;
        res.soft = reliabilities;
        if (matvec(h_, res.correction) != syndrome) throw std::logic_error("osd: correction does not match syndrome");
        return res;
    }

private:
    void build_graph() {
        check_off_.assign(m_ + 1, 0);
        for (std::size_t c = 0; c < m_; ++c) check_off_[c + 1] = check_off_[c] + h_.row(c).size();
        edge_var_.resize(check_off_[m_]);
        var_edges_.assign(n_, {});
        std::size_t e = 0;
        for (std::size_t c = 0; c < m_; ++c)
            for (std::uint32_t v : h_.row(c)) {
                edge_var_[e] = v;
                var_edges_[v].push_back(static_cast<std::uint32_t>(e));
                ++e;
            }
        to_check_.resize(edge_var_.size());
        to_var_.resize(edge_var_.size());
    }

    void check_pass(const BinaryVector& syndrome) {
        for (std::size_t c = 0; c < m_; ++c) {
            const std::size_t lo = check_off_[c], hi = check_off_[c + 1];
            int negatives = syndrome.get(c) ? 1 : 0;
            double min1 = std::numeric_limits<double>::infinity(), min2 = min1;
            std::size_t argmin = lo;
            for (std::size_t e = lo; e < hi; ++e) {
                const double mu = to_check_[e];
                negatives += mu < 0.0;
                const double a = std::fabs(mu);
                if (a < min1) {
                    min2 = min1;
                    min1 = a;
                    argmin = e;
                } else if (a < min2) {
                    min2 = a;
                }
            }
            for (std::size_t e = lo; e < hi; ++e) {
                const int excl = negatives - (to_check_[e] < 0.0 ? 1 : 0);
                double mag = (e == argmin) ? min2 : min1;
                if (!std::isfinite(mag)) mag = bp_.llr_sat;  // degree-1 check
                to_var_[e] = (excl & 1) ? -mag : mag;
            }
        }
    }

    void var_pass(std::vector<double>& posterior) {
        for (std::size_t v = 0; v < n_; ++v) {
            double total = priors_[v];
            for (std::uint32_t e : var_edges_[v]) total += to_var_[e];
            posterior[v] = total;
            hard_[v] = total < 0.0 ? 1 : 0;
            for (std::uint32_t e : var_edges_[v]) {
                double mu = total - to_var_[e];
                mu = std::clamp(mu, -bp_.llr_sat, bp_.llr_sat);
                to_check_[e] = mu;
            }
        }
    }

    bool syndrome_matches(const BinaryVector& syndrome) const {
        for (std::size_t c = 0; c < m_; ++c) {
            int parity = 0;
            for (std::size_t e = check_off_[c]; e < check_off_[c + 1]; ++e) parity ^= hard_[edge_var_[e]];
            if (parity != (syndrome.get(c) ? 1 : 0)) return false;
        }
        return true;
    }

    BinaryMatrix h_;
    BpConfig bp_;
    OsdConfig osd_;
    PackedMatrix packed_;
    std::size_t n_, m_;
    std::vector<double> priors_;
    std::vector<int> tie_rank_;
    // Tanner graph, check-major edges
    std::vector<std::size_t> check_off_;
    std::vector<std::uint32_t> edge_var_;
    std::vector<std::vector<std::uint32_t>> var_edges_;
    // scratch
    std::vector<double> to_check_, to_var_;
    std::vector<std::uint8_t> hard_;
};

/// One-off helpers mirroring the decoder surface for tests and the CLI.
inline DecodeResult bp_decode(const BinaryMatrix& h, const BinaryVector& s, const BpConfig& cfg = {}) {
    BpOsdDecoder dec(h, cfg, {});
    return dec.bp_only(s);
}
inline DecodeResult osd_postprocess(const BinaryMatrix& h, const BinaryVector& s,
                                    const std::vector<double>& reliabilities, const OsdConfig& cfg = {}) {
    BpOsdDecoder dec(h, {}, cfg);
    return dec.osd_only(s, reliabilities);
}

// ---------------------------------------------------------------------------
// Augmented single-shot decoding
// ---------------------------------------------------------------------------

struct SingleShotResult {
    BinaryVector data_correction;    // length n
    BinaryVector inferred_syndrome;  // length m; corrections on the
                                     // augmentation columns
    bool converged = false;
    bool used_osd = false;
};

/// Decodes against (H | I) so that any syndrome is explainable; corrections
/// on the identity block are read back as inferred syndrome errors.  Among
/// equally reliable columns the augmentation block is preferred, so a pure
/// check flip is attributed to the measurement rather than to a twin data
/// column.
class SingleShotDecoder {
public:
    SingleShotDecoder(const BinaryMatrix& h, BpConfig bp = {}, OsdConfig osd = {}, double p_data = 0.01,
                      double p_synd = 0.01)
        : n_(h.cols()), m_(h.rows()), dec_(hstack(h, BinaryMatrix::identity(h.rows())), bp, osd) {
        std::vector<double> priors(n_ + m_, p_data);
        for (std::size_t i = 0; i < m_; ++i) priors[n_ + i] = p_synd;
        dec_.set_priors(priors);
        std::vector<int> rank(n_ + m_, 1);
        for (std::size_t i = 0; i < m_; ++i) rank[n_ + i] = 0;
        dec_.set_tie_rank(std::move(rank));
    }

    SingleShotResult decode(const BinaryVector& syndrome) {
        DecodeResult res = dec_.decode(syndrome);
        SingleShotResult out;
        out.converged = res.converged;
        out.used_osd = res.used_osd;
        out.data_correction = res.correction.slice(0, n_);
        out.inferred_syndrome = res.correction.slice(n_, m_);
        return out;
    }

private:
    std::size_t n_, m_;
    BpOsdDecoder dec_;
};

// ---------------------------------------------------------------------------
// Two-stage metacheck decoding
// ---------------------------------------------------------------------------

struct TwoStageResult {
    BinaryVector repair;      // syndrome correction from the metacheck stage
    BinaryVector repaired;    // observed + repair, possibly residue-projected
    BinaryVector correction;  // error correction with H * correction = repaired
    bool meta_converged = false;
    bool main_converged = false;
    bool used_fallback = false;  // repaired syndrome was outside im(H)
};

/// Stage (i): decode the metasyndrome M s against M to repair s.  Stage
/// (ii): decode the repaired syndrome against H.  If the repaired syndrome
/// is still unphysical (nontrivial second homology, or an imperfect meta
/// decoder), its canonical residue modulo im(H) is projected out and the
/// event flagged.
class TwoStageDecoder {
public:
    TwoStageDecoder(const BinaryMatrix& h, const BinaryMatrix& m, BpConfig bp_meta, BpConfig bp_main, OsdConfig osd)
        : meta_(m, bp_meta, osd), main_(h, bp_main, osd), image_(transpose(h)) {
        if (m.cols() != h.rows())
            throw std::invalid_argument("two-stage: M has " + std::to_string(m.cols()) + " columns but H has " +
                                        std::to_string(h.rows()) + " rows");
        if (!mat_mul(m, h).is_zero()) throw std::invalid_argument("two-stage: M * H != 0");
    }

    TwoStageResult decode(const BinaryVector& observed) {
        TwoStageResult out;
        const BinaryVector meta_syndrome = matvec(meta_.matrix(), observed);
        DecodeResult meta = meta_.decode(meta_syndrome);
        out.meta_converged = meta.converged;
        out.repair = std::move(meta.correction);
        out.repaired = observed ^ out.repair;
        BinaryVector residue = image_.reduce(out.repaired);
        if (!residue.is_zero()) {
            out.used_fallback = true;
            out.repaired ^= residue;
        }
        DecodeResult main = main_.decode(out.repaired);
        out.main_converged = main.converged;
        out.correction = std::move(main.correction);
        return out;
    }

private:
    BpOsdDecoder meta_, main_;
    RowSpace image_;
};

// ---------------------------------------------------------------------------
// Exact decoders
// ---------------------------------------------------------------------------

/// True minimum-weight correction, lexicographically first among minima.
inline BinaryVector exact_min_weight_decode(const BinaryMatrix& h, const BinaryVector& s,
                                            std::uint64_t node_budget = kDefaultNodeBudget) {
    auto e = ExactSolver(h).min_weight_solution(s, h.cols(), node_budget);
    if (!e) throw std::invalid_argument("exact_min_weight_decode: syndrome is not in the image of H");
    return *e;
}

struct ShadowResult {
    BinaryVector repair;      // minimum-weight syndrome correction
    BinaryVector correction;  // minimum-weight error for the repaired syndrome
};

/// Two-step exact decoder with radius parameter t: first the lightest
/// syndrome repair making the syndrome producible by some error of weight
/// <= t, then the lightest error producing it.  Exhaustive; instances are
/// limited to 64 checks.
class ShadowDecoder {
public:
    ShadowDecoder(const BinaryMatrix& h, std::size_t t, std::uint64_t enum_budget = kDefaultNodeBudget)
        : h_(h), t_(t), solver_(h) {
        if (h.rows() > 64) throw std::invalid_argument("shadow decoder supports at most 64 checks");
        // Precompute the set of syndromes producible by errors of weight <= t.
        PackedMatrix cols(transpose(h));
        std::uint64_t nodes = 0;
        std::vector<std::size_t> stack;
        producible_.insert(0);
        auto enumerate = [&](auto&& self, std::size_t next, std::size_t remaining, std::uint64_t key) -> void {
            for (std::size_t c = next; c + remaining <= h.cols(); ++c) {
                if (++nodes > enum_budget)
                    throw BudgetExceeded("shadow decoder: producible-set enumeration over budget", enum_budget);
                const std::uint64_t k2 = key ^ col_key(cols, c);
                producible_.insert(k2);
                if (remaining > 1) self(self, c + 1, remaining - 1, k2);
            }
        };
        if (t >= 1) enumerate(enumerate, 0, t, 0);
    }

    ShadowResult decode(const BinaryVector& observed, std::uint64_t node_budget = kDefaultNodeBudget) const {
        if (observed.size() != h_.rows()) throw std::invalid_argument("shadow decoder: syndrome length mismatch");
        const std::uint64_t target = vec_key(observed);
        // Enumerate syndrome repairs by weight, lexicographically within a
        // weight class, and stop at the first producible repaired syndrome.
        const std::size_t m = h_.rows();
        std::vector<std::size_t> support;
        std::uint64_t nodes = 0;
        std::optional<BinaryVector> repair;
        auto enumerate = [&](auto&& self, std::size_t next, std::size_t remaining, std::uint64_t key) -> bool {
            for (std::size_t c = next; c + remaining <= m; ++c) {
                if (++nodes > node_budget)
                    throw BudgetExceeded("shadow decoder: repair search over budget", node_budget);
                const std::uint64_t k2 = key ^ (std::uint64_t{1} << c);
                support.push_back(c);
                if (remaining == 1) {
                    if (producible_.count(target ^ k2)) {
                        repair = BinaryVector::from_support(m, support);
                        return true;
                    }
                } else if (self(self, c + 1, remaining - 1, k2)) {
                    return true;
                }
                support.pop_back();
            }
            return false;
        };
        if (producible_.count(target)) {
            repair = BinaryVector(m);
        } else {
            for (std::size_t w = 1; w <= m && !repair; ++w) {
                support.clear();
                enumerate(enumerate, 0, w, 0);
            }
        }
        if (!repair) throw std::invalid_argument("shadow decoder: no producible repair exists");
        ShadowResult out;
        out.repair = *repair;
        auto e = solver_.min_weight_solution(observed ^ out.repair, t_, node_budget);
        if (!e) throw std::logic_error("shadow decoder: producible syndrome has no small preimage");
        out.correction = *e;
        return out;
    }

private:
    static std::uint64_t col_key(const PackedMatrix& cols, std::size_t c) {
        return cols.words_per_row() ? cols.row_ptr(c)[0] : 0;
    }
    static std::uint64_t vec_key(const BinaryVector& v) { return v.words().empty() ? 0 : v.words()[0]; }

    BinaryMatrix h_;
    std::size_t t_;
    ExactSolver solver_;
    std::unordered_set<std::uint64_t> producible_;
};

}  // namespace qprep
