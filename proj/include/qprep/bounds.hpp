#pragma once

// Exhaustive verification of the protocol's residual-error bounds on small
// instances, with exact (minimum-weight) decoders throughout.  Each suite
// reports the worst observed ratio of achieved residual to allowed bound.

#include <map>
#include <sstream>

#include "qprep/analysis.hpp"
#include "qprep/decoder.hpp"
#include "qprep/protocol.hpp"

namespace qprep {

struct BoundReport {
    std::string name;
    bool pass = true;
    std::uint64_t cases = 0;
    std::uint64_t violations = 0;
    double worst_ratio = 0.0;  // achieved / allowed, over cases with a finite positive bound
    std::string worst_case;

    std::string summary() const {
        std::ostringstream os;
        os << (pass ? "PASS" : "FAIL") << ' ' << name << ": " << cases << " cases, " << violations
           << " violations, worst ratio " << worst_ratio;
        if (!worst_case.empty()) os << " (" << worst_case << ")";
        return os.str();
    }
};

namespace detail {

/// Reduced weight of v modulo the row space of `stabilizers`, computed
/// lazily: the plain weight settles the comparison when it is already within
/// the bound, membership handles the zero class, and only the remaining
/// cases pay for a full coset sweep.
inline bool reduced_weight_at_most(const BinaryVector& v, const BinaryMatrix& stabilizers,
                                   const RowSpace& stab_space, double bound, std::uint64_t guard,
                                   std::size_t* out_weight) {
    const std::size_t plain = v.weight();
    if (static_cast<double>(plain) <= bound) {
        *out_weight = plain;  // upper bound is enough to certify compliance
        return true;
    }
    if (stab_space.contains(v)) {
        *out_weight = 0;
        return true;
    }
    *out_weight = min_weight_coset_rep(v, stabilizers, guard).rep.weight();
    return static_cast<double>(*out_weight) <= bound;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Stage-1 residual bound
// ---------------------------------------------------------------------------

/// For every syndrome error with |s_e| <= exhaustive_weight, and
/// `samples` random patterns of weight sampled_weight, run the exact
/// two-step decode (minimum-weight metacheck repair, then minimum-weight
/// correction) and check that the residual's reduced weight is at most
/// 2|s_e|^3.
inline BoundReport stage1_residual_bound(const ThickenedCode& thick, std::size_t exhaustive_weight,
                                         std::size_t sampled_weight, std::size_t samples, std::uint64_t seed,
                                         std::uint64_t guard = kDefaultCosetGuard,
                                         std::uint64_t node_budget = kDefaultNodeBudget) {
    BoundReport rep;
    rep.name = "stage-1 residual (two-step exact decode, bound 2|s_e|^3)";
    if (!thick.css.m_z || thick.css.m_z->rows() == 0)
        throw std::invalid_argument("stage1_residual_bound: instance has no metachecks");
    const BinaryMatrix& h = thick.css.h_z;
    const BinaryMatrix& m = *thick.css.m_z;
    ExactSolver repairer(m), corrector(h);
    RowSpace stab_space(thick.css.h_x);
    const std::size_t checks = h.rows();

    std::map<std::vector<std::size_t>, std::pair<bool, double>> cache;
    auto run_case = [&](const std::vector<std::size_t>& flips) {
        auto it = cache.find(flips);
        if (it == cache.end()) {
            BinaryVector s_e = BinaryVector::from_support(checks, flips);
            auto repair = repairer.min_weight_solution(matvec(m, s_e), checks, node_budget);
            if (!repair) throw std::logic_error("stage1_residual_bound: metasyndrome has no repair");
            BinaryVector repaired = s_e ^ *repair;
            auto correction = corrector.min_weight_solution(repaired, h.cols(), node_budget);
            if (!correction) throw std::logic_error("stage1_residual_bound: repaired syndrome is unphysical");
            const double w = static_cast<double>(flips.size());
            const double bound = 2.0 * w * w * w;
            std::size_t reduced = 0;
            const bool ok =
                detail::reduced_weight_at_most(*correction, thick.css.h_x, stab_space, bound, guard, &reduced);
            const double ratio = bound > 0 ? static_cast<double>(reduced) / bound : (reduced == 0 ? 0.0 : 1e9);
            it = cache.emplace(flips, std::make_pair(ok, ratio)).first;
        }
        ++rep.cases;
        const auto& [ok, ratio] = it->second;
        if (ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            std::ostringstream os;
            os << "|s_e| = " << flips.size();
            rep.worst_case = os.str();
        }
        if (!ok) {
            ++rep.violations;
            rep.pass = false;
        }
    };

    // exhaustive up to the requested weight
    std::vector<std::size_t> flips;
    auto enumerate = [&](auto&& self, std::size_t next, std::size_t remaining) -> void {
        for (std::size_t c = next; c + remaining <= checks; ++c) {
            flips.push_back(c);
            run_case(flips);
            if (remaining > 1) self(self, c + 1, remaining - 1);
            flips.pop_back();
        }
    };
    run_case({});
    if (exhaustive_weight >= 1) enumerate(enumerate, 0, exhaustive_weight);

    // random patterns of the sampled weight
    Rng rng(derive_seed(seed, 0xb0u));
    for (std::size_t i = 0; i < samples; ++i) {
        std::vector<std::size_t> pattern;
        while (pattern.size() < sampled_weight) {
            std::size_t c = static_cast<std::size_t>(rng.below(checks));
            if (std::find(pattern.begin(), pattern.end(), c) == pattern.end()) pattern.push_back(c);
        }
        std::sort(pattern.begin(), pattern.end());
        run_case(pattern);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Shadow-decoder residual bound
// ---------------------------------------------------------------------------

/// Measures the confinement frontier of H at cutoff t, then checks that for
/// every error of weight <= t/2 and every sampled syndrome error, the shadow
/// decoder with radius t/2 leaves a residual with reduced weight at most
/// f(2|s_e|), f being the measured frontier.
inline BoundReport shadow_residual_bound(const BinaryMatrix& h, const BinaryMatrix& stabilizers, std::size_t t,
                                         std::size_t syndrome_samples, std::uint64_t seed,
                                         std::uint64_t guard = kDefaultCosetGuard) {
    BoundReport rep;
    rep.name = "shadow residual (confined code, bound f(2|s_e|))";
    auto frontier_rep = confinement_check(h, stabilizers, t, MonotoneFn::linear(1e18, 1), guard);
    MonotoneFn f = MonotoneFn::from_frontier(frontier_rep.frontier);
    ShadowDecoder shadow(h, t / 2);
    RowSpace stab_space(stabilizers);
    const std::size_t n = h.cols(), m = h.rows();

    Rng rng(derive_seed(seed, 0xb1u));
    std::vector<std::size_t> support;
    auto run_case = [&](const BinaryVector& e, const BinaryVector& s_e) {
        ++rep.cases;
        auto res = shadow.decode(matvec(h, e) ^ s_e);
        BinaryVector residual = e ^ res.correction;
        const double bound = f(2 * s_e.weight());
        if (!std::isfinite(bound)) return;  // frontier gives no guarantee here
        std::size_t reduced = 0;
        const bool ok = detail::reduced_weight_at_most(residual, stabilizers, stab_space, bound, guard, &reduced);
        const double ratio = bound > 0 ? static_cast<double>(reduced) / bound : (reduced == 0 ? 0.0 : 1e9);
        if (ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            std::ostringstream os;
            os << "|e| = " << e.weight() << ", |s_e| = " << s_e.weight();
            rep.worst_case = os.str();
        }
        if (!ok) {
            ++rep.violations;
            rep.pass = false;
        }
    };

    auto for_each_error = [&](auto&& body) {
        auto enumerate = [&](auto&& self, std::size_t next, std::size_t remaining) -> void {
            for (std::size_t q = next; q + remaining <= n; ++q) {
                support.push_back(q);
                body(BinaryVector::from_support(n, support));
                if (remaining > 1) self(self, q + 1, remaining - 1);
                support.pop_back();
            }
        };
        body(BinaryVector(n));
        if (t / 2 >= 1) enumerate(enumerate, 0, t / 2);
    };
    for_each_error([&](const BinaryVector& e) {
        run_case(e, BinaryVector(m));
        for (std::size_t c = 0; c < m; ++c) {
            BinaryVector s_e(m);
            s_e.set(c, true);
            run_case(e, s_e);
        }
        for (std::size_t i = 0; i < syndrome_samples; ++i) {
            BinaryVector s_e(m);
            s_e.set(rng.below(m), true);
            std::size_t second = rng.below(m);
            s_e.flip(second);
            if (s_e.is_zero()) s_e.set(second, true);
            run_case(e, s_e);
        }
    });
    return rep;
}

// ---------------------------------------------------------------------------
// Collapse residual bound
// ---------------------------------------------------------------------------

/// Enumerates bulk errors within the hypotheses (sheet-qubit weight <= t/4,
/// intermediate-qubit weight with f(2|S_e|) <= t/4) and checks that the
/// collapse driven by the shadow decoder leaves boundary residuals of
/// reduced weight at most t/4.
inline BoundReport collapse_residual_bound(const ThickenedCode& thick, std::size_t t,
                                           std::uint64_t guard = kDefaultCosetGuard) {
    BoundReport rep;
    rep.name = "collapse residual (shadow-decoded bulk, bound t/4)";
    const ThickenedLayout& ly = thick.layout;
    auto frontier_rep = confinement_check(thick.base.h_x, thick.base.h_z, t, MonotoneFn::linear(1e18, 1), guard);
    MonotoneFn f = MonotoneFn::from_frontier(frontier_rep.frontier);
    const double allowance = static_cast<double>(t) / 4.0;

    ShadowDecoder shadow(thick.base.h_x, t / 2);
    SheetDecodeFn decode = [&](const BinaryVector& s) {
        auto res = shadow.decode(s);
        return std::make_pair(res.correction, res.repair);
    };
    RowSpace stab_space(thick.base.h_z);
    ProtocolEngine engine(thick, DecoderSettings{}, NoiseModel{});

    // admissible intermediate-error weights
    std::size_t max_se = 0;
    while (f(2 * (max_se + 1)) <= allowance) ++max_se;
    const std::size_t max_e = static_cast<std::size_t>(allowance);

    std::vector<std::size_t> bulk_sheet_qubits, inter_qubits;
    {
        std::vector<bool> is_boundary(ly.ell, false);
        for (std::uint32_t b : ly.causal.boundary_bits) is_boundary[b] = true;
        for (std::size_t sheet = 0; sheet < ly.ell; ++sheet) {
            if (is_boundary[sheet]) continue;
            for (std::size_t q = 0; q < ly.n_base; ++q) bulk_sheet_qubits.push_back(ly.sheet_qubit(sheet, q));
        }
        for (std::size_t c = 0; c < ly.mc; ++c)
            for (std::size_t i = 0; i < ly.mx_base; ++i) inter_qubits.push_back(ly.inter_qubit(c, i));
    }

    auto run_case = [&](const BinaryVector& zerr) {
        ++rep.cases;
        auto residuals = engine.collapse_residuals(zerr, decode);
        for (const BinaryVector& r : residuals) {
            std::size_t reduced = 0;
            const bool ok = detail::reduced_weight_at_most(r, thick.base.h_z, stab_space, allowance, guard, &reduced);
            const double ratio = allowance > 0 ? static_cast<double>(reduced) / allowance : (reduced ? 1e9 : 0.0);
            if (ratio > rep.worst_ratio) {
                rep.worst_ratio = ratio;
                rep.worst_case = "|E| = " + std::to_string(zerr.weight());
            }
            if (!ok) {
                ++rep.violations;
                rep.pass = false;
            }
        }
    };

    // enumerate supports over bulk sheet qubits and intermediate qubits
    std::vector<std::size_t> chosen;
    auto enum_inter = [&](auto&& self, const BinaryVector& base_err, std::size_t next, std::size_t remaining) -> void {
        if (remaining == 0) return;
        for (std::size_t idx = next; idx < inter_qubits.size(); ++idx) {
            BinaryVector z = base_err;
            z.set(inter_qubits[idx], true);
            run_case(z);
            self(self, z, idx + 1, remaining - 1);
        }
    };
    auto enum_sheet = [&](auto&& self, const BinaryVector& base_err, std::size_t next, std::size_t remaining) -> void {
        run_case(base_err);
        enum_inter(enum_inter, base_err, 0, max_se);
        if (remaining == 0) return;
        for (std::size_t idx = next; idx < bulk_sheet_qubits.size(); ++idx) {
            BinaryVector z = base_err;
            z.set(bulk_sheet_qubits[idx], true);
            self(self, z, idx + 1, remaining - 1);
        }
    };
    enum_sheet(enum_sheet, BinaryVector(ly.n_thick()), 0, max_e);
    return rep;
}

// ---------------------------------------------------------------------------
// Composed full-protocol bound
// ---------------------------------------------------------------------------

/// Exercises both stages with exact decoders on one instance: syndrome
/// errors with |s_e| <= s_max through the exact stage-1 pipeline (X residual
/// bound 2|s_e|^3 on every boundary restriction), then intrinsic samples
/// through the shadow-decoded collapse (Z residual trivial on the boundary).
inline BoundReport composed_protocol_bound(const ThickenedCode& thick, std::size_t s_max, std::size_t t,
                                           std::size_t intrinsic_samples, std::uint64_t seed,
                                           std::uint64_t guard = kDefaultCosetGuard,
                                           std::uint64_t node_budget = kDefaultNodeBudget) {
    BoundReport rep;
    rep.name = "composed protocol (X bound 2|s_e|^3, Z bound t/4)";
    const BinaryMatrix& h = thick.css.h_z;
    const BinaryMatrix& m = *thick.css.m_z;
    ExactSolver repairer(m), corrector(h);
    RowSpace base_x_stabs(thick.base.h_x);
    RowSpace base_z_stabs(thick.base.h_z);

    // X sector: exhaustive syndrome errors, boundary restriction of the
    // exact stage-1 residual
    std::vector<std::size_t> flips;
    auto x_case = [&](const std::vector<std::size_t>& pattern) {
        ++rep.cases;
        BinaryVector s_e = BinaryVector::from_support(h.rows(), pattern);
        auto repair = repairer.min_weight_solution(matvec(m, s_e), h.rows(), node_budget);
        auto correction = corrector.min_weight_solution(s_e ^ *repair, h.cols(), node_budget);
        const double w = static_cast<double>(pattern.size());
        const double bound = 2.0 * w * w * w;
        for (std::uint32_t b : thick.layout.causal.boundary_bits) {
            BinaryVector e_x = thick.layout.restrict_to_sheet(*correction, b);
            std::size_t reduced = 0;
            const bool ok =
                detail::reduced_weight_at_most(e_x, thick.base.h_x, base_x_stabs, bound, guard, &reduced);
            const double ratio = bound > 0 ? static_cast<double>(reduced) / bound : (reduced ? 1e9 : 0.0);
            if (ratio > rep.worst_ratio) {
                rep.worst_ratio = ratio;
                rep.worst_case = "X sector, |s_e| = " + std::to_string(pattern.size());
            }
            if (!ok) {
                ++rep.violations;
                rep.pass = false;
            }
        }
    };
    auto enumerate = [&](auto&& self, std::size_t next, std::size_t remaining) -> void {
        for (std::size_t c = next; c + remaining <= h.rows(); ++c) {
            flips.push_back(c);
            x_case(flips);
            if (remaining > 1) self(self, c + 1, remaining - 1);
            flips.pop_back();
        }
    };
    x_case({});
    if (s_max >= 1) enumerate(enumerate, 0, s_max);

    // Z sector: intrinsic randomness through the shadow-decoded collapse
    ShadowDecoder shadow(thick.base.h_x, t / 2);
    SheetDecodeFn decode = [&](const BinaryVector& s) {
        auto res = shadow.decode(s);
        return std::make_pair(res.correction, res.repair);
    };
    ProtocolEngine engine(thick, DecoderSettings{}, NoiseModel{});
    IntrinsicSampler sampler(thick.css.h_z);
    Rng rng(derive_seed(seed, 0xb2u));
    const double allowance = static_cast<double>(t) / 4.0;
    for (std::size_t i = 0; i < intrinsic_samples; ++i) {
        ++rep.cases;
        auto residuals = engine.collapse_residuals(sampler.sample(rng), decode);
        for (const BinaryVector& r : residuals) {
            std::size_t reduced = 0;
            const bool ok = detail::reduced_weight_at_most(r, thick.base.h_z, base_z_stabs, allowance, guard, &reduced);
            if (!ok) {
                ++rep.violations;
                rep.pass = false;
                rep.worst_case = "Z sector intrinsic sample";
            }
        }
    }
    return rep;
}

}  // namespace qprep
