#pragma once

// Code constructions: classical LDPC ensembles, repetition and star codes,
// hypergraph products, and homological thickening with metachecks.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qprep/gf2.hpp"
#include "qprep/rng.hpp"

namespace qprep {

// ---------------------------------------------------------------------------
// Classical codes
// ---------------------------------------------------------------------------

struct ClassicalCode {
    BinaryMatrix h;  // m x n parity checks
    std::size_t n = 0;
    std::size_t k = 0;       // n - rank(h)
    std::size_t rank_h = 0;  // cached
    std::optional<std::size_t> d;
    bool d_is_lower_bound = false;
    std::uint64_t seed = 0;  // ensemble seed when sampled, 0 otherwise
};

inline ClassicalCode make_classical(BinaryMatrix h) {
    ClassicalCode c;
    c.n = h.cols();
    c.rank_h = rank(h);
    c.k = c.n - c.rank_h;
    c.h = std::move(h);
    return c;
}

/// 1D repetition code of length ell: adjacent-pair checks, parameters
/// [ell, 1, ell].  ell = 1 degenerates to a checkless single bit.
inline ClassicalCode repetition_code(std::size_t ell) {
    if (ell < 1) throw std::invalid_argument("repetition_code: ell must be >= 1");
    BinaryMatrix h(ell - 1, ell);
    for (std::size_t r = 0; r + 1 < ell; ++r) {
        h.insert(r, r);
        h.insert(r, r + 1);
    }
    ClassicalCode c = make_classical(std::move(h));
    c.d = ell;
    return c;
}

/// Single-parity code concatenated with repetition: z chains of branch_len
/// bits meeting at one central check of weight z.  Parameters
/// [z*branch_len, z-1, 2*branch_len].
///
/// Bit (branch j, position r) has index j*branch_len + r with r = 0 the
/// outer endpoint; chain check (j, r) joins positions r and r+1 and has
/// index j*(branch_len-1) + r; the central check comes last.
inline ClassicalCode star_code(std::size_t z, std::size_t branch_len) {
    if (z < 2) throw std::invalid_argument("star_code: z must be >= 2");
    if (branch_len < 1) throw std::invalid_argument("star_code: branch_len must be >= 1");
    const std::size_t n = z * branch_len;
    const std::size_t m = z * (branch_len - 1) + 1;
    BinaryMatrix h(m, n);
    for (std::size_t j = 0; j < z; ++j)
        for (std::size_t r = 0; r + 1 < branch_len; ++r) {
            h.insert(j * (branch_len - 1) + r, j * branch_len + r);
            h.insert(j * (branch_len - 1) + r, j * branch_len + r + 1);
        }
    for (std::size_t j = 0; j < z; ++j) h.insert(m - 1, j * branch_len + branch_len - 1);
    ClassicalCode c = make_classical(std::move(h));
    c.d = 2 * branch_len;
    return c;
}

/// (col_deg, row_deg)-regular parity-check matrix sampled with the bipartite
/// configuration model.  Matchings producing repeated edges are rejected and
/// the full stub matching is resampled, up to retry_budget attempts.
/// Deterministic for a fixed (n, degrees, seed).
///
/// At (5,6) a uniform matching is simple with probability ~e^-10, so the
/// default budget leaves generous headroom over the ~2.4e4 expected retries.
inline ClassicalCode sample_regular_ldpc(std::size_t n, std::size_t col_deg, std::size_t row_deg, std::uint64_t seed,
                                         std::size_t retry_budget = 1000000) {
    if (col_deg < 1 || row_deg < 1) throw std::invalid_argument("sample_regular_ldpc: degrees must be positive");
    if ((n * col_deg) % row_deg != 0)
        throw std::invalid_argument("sample_regular_ldpc: n*col_deg = " + std::to_string(n * col_deg) +
                                    " not divisible by row_deg = " + std::to_string(row_deg));
    const std::size_t m = n * col_deg / row_deg;
    const std::size_t stubs = n * col_deg;
    Rng rng(derive_seed(seed, /*stream=*/0x51u));
    std::vector<std::uint32_t> bit_of_stub(stubs);
    for (std::size_t t = 0; t < stubs; ++t) bit_of_stub[t] = static_cast<std::uint32_t>(t / col_deg);

    for (std::size_t attempt = 0; attempt < retry_budget; ++attempt) {
        std::vector<std::uint32_t> perm = bit_of_stub;
        rng.shuffle(perm);
        // stub t on the check side belongs to check t / row_deg
        std::vector<std::vector<std::uint32_t>> rows(m);
        bool simple = true;
        for (std::size_t t = 0; t < stubs && simple; ++t) {
            auto& row = rows[t / row_deg];
            for (std::uint32_t existing : row)
                if (existing == perm[t]) {
                    simple = false;
                    break;
                }
            row.push_back(perm[t]);
        }
        if (!simple) continue;
        BinaryMatrix h(m, n);
        for (std::size_t r = 0; r < m; ++r)
            for (std::uint32_t c : rows[r]) h.insert(r, c);
        ClassicalCode code = make_classical(std::move(h));
        code.seed = seed;
        return code;
    }
    throw BudgetExceeded("sample_regular_ldpc: retry budget exhausted for seed " + std::to_string(seed), retry_budget);
}

// ---------------------------------------------------------------------------
// Causal orientation of chain-compatible Tanner graphs
// ---------------------------------------------------------------------------

/// Orientation data for a repetition- or star-shaped Tanner graph: a single
/// measured starting endpoint, a processing order over the measured bits,
/// and the unmeasured endpoints that host the surviving sheets.
///
/// The smallest-index degree-1 bit is the start; every other bit acquires
/// exactly one incoming arrow.
struct CausalStructure {
    std::size_t n_bits = 0, n_checks = 0;
    std::vector<std::vector<std::uint32_t>> bit_checks;
    std::vector<std::vector<std::uint32_t>> check_bits;
    std::uint32_t start_bit = 0;
    std::vector<std::uint32_t> boundary_bits;  // unmeasured endpoints, ascending
    struct Step {
        std::uint32_t bit;
        std::int32_t in_check;  // -1 for the start bit
    };
    std::vector<Step> order;                 // measured bits, causal order
    std::vector<std::int32_t> in_check_of;   // per bit, -1 for start
    std::vector<std::int32_t> in_bit_of_check;  // predecessor bit per check
};

inline CausalStructure build_causal_structure(const BinaryMatrix& h) {
    CausalStructure cs;
    cs.n_bits = h.cols();
    cs.n_checks = h.rows();
    cs.check_bits.resize(cs.n_checks);
    cs.bit_checks.resize(cs.n_bits);
    for (std::size_t r = 0; r < cs.n_checks; ++r)
        for (std::uint32_t c : h.row(r)) {
            cs.check_bits[r].push_back(static_cast<std::uint32_t>(c));
            cs.bit_checks[c].push_back(static_cast<std::uint32_t>(r));
        }
    for (std::size_t b = 0; b < cs.n_bits; ++b)
        if (cs.bit_checks[b].size() > 2)
            throw std::invalid_argument("causal structure requires bit degree <= 2 (bit " + std::to_string(b) + ")");
    std::size_t wide_checks = 0;
    for (std::size_t r = 0; r < cs.n_checks; ++r) {
        if (cs.check_bits[r].size() < 2) throw std::invalid_argument("causal structure: check of weight < 2");
        if (cs.check_bits[r].size() > 2) ++wide_checks;
    }
    if (wide_checks > 1) throw std::invalid_argument("causal structure: more than one star center");

    cs.in_check_of.assign(cs.n_bits, -1);
    cs.in_bit_of_check.assign(cs.n_checks, -1);
    if (cs.n_bits == 1 && cs.n_checks == 0) {
        // Degenerate single-sheet case: the lone bit is the boundary.
        cs.start_bit = 0;
        cs.boundary_bits = {0};
        return cs;
    }

    std::optional<std::uint32_t> start;
    for (std::size_t b = 0; b < cs.n_bits; ++b)
        if (cs.bit_checks[b].size() == 1) {
            start = static_cast<std::uint32_t>(b);
            break;
        }
    if (!start) throw std::invalid_argument("causal structure: no endpoint bit (graph has a cycle)");
    cs.start_bit = *start;

    std::vector<bool> bit_seen(cs.n_bits, false), check_seen(cs.n_checks, false);
    std::vector<std::uint32_t> frontier = {cs.start_bit};
    bit_seen[cs.start_bit] = true;
    while (!frontier.empty()) {
        std::vector<std::uint32_t> next;
        for (std::uint32_t u : frontier) {
            if (cs.bit_checks[u].size() == 1 && u != cs.start_bit) {
                cs.boundary_bits.push_back(u);
                continue;
            }
            cs.order.push_back({u, cs.in_check_of[u]});
            for (std::uint32_t c : cs.bit_checks[u]) {
                if (check_seen[c]) continue;
                check_seen[c] = true;
                cs.in_bit_of_check[c] = static_cast<std::int32_t>(u);
                for (std::uint32_t v : cs.check_bits[c]) {
                    if (bit_seen[v]) continue;
                    bit_seen[v] = true;
                    cs.in_check_of[v] = static_cast<std::int32_t>(c);
                    next.push_back(v);
                }
            }
        }
        std::sort(next.begin(), next.end());
        frontier = std::move(next);
    }
    for (std::size_t b = 0; b < cs.n_bits; ++b)
        if (!bit_seen[b]) throw std::invalid_argument("causal structure: Tanner graph is disconnected");
    std::sort(cs.boundary_bits.begin(), cs.boundary_bits.end());
    if (cs.boundary_bits.empty()) throw std::invalid_argument("causal structure: no unmeasured endpoint");
    return cs;
}

// ---------------------------------------------------------------------------
// CSS codes
// ---------------------------------------------------------------------------

struct CssCode {
    BinaryMatrix h_x, h_z;
    std::optional<BinaryMatrix> m_z, m_x;  // metacheck matrices
    std::optional<BinaryMatrix> l_x, l_z;  // logical operator bases
    std::size_t n = 0, k = 0;
};

inline CssCode make_css(BinaryMatrix h_x, BinaryMatrix h_z) {
    if (h_x.cols() != h_z.cols())
        throw std::invalid_argument("make_css: qubit counts disagree (" + std::to_string(h_x.cols()) + " vs " +
                                    std::to_string(h_z.cols()) + ")");
    if (!mat_mul(h_x, transpose(h_z)).is_zero()) throw std::logic_error("make_css: H_X * H_Z^T != 0");
    CssCode c;
    c.n = h_x.cols();
    c.k = c.n - rank(h_x) - rank(h_z);
    c.h_x = std::move(h_x);
    c.h_z = std::move(h_z);
    return c;
}

// ---------------------------------------------------------------------------
// Hypergraph product
// ---------------------------------------------------------------------------

/// CSS code built from two classical codes:
///   H_X = (H1 (x) I_n2 | I_m1 (x) H2^T)
///   H_Z = (I_n1 (x) H2  | H1^T (x) I_m2)
/// Qubit columns are the n1*n2 primal block followed by the m1*m2 dual
/// block, with the left tensor factor as the slow index throughout.
struct HgpCode {
    CssCode css;
    ClassicalCode c1, c2;
    std::size_t n1 = 0, m1 = 0, n2 = 0, m2 = 0;

    std::size_t primal_qubit(std::size_t i, std::size_t j) const { return i * n2 + j; }
    std::size_t dual_qubit(std::size_t a, std::size_t b) const { return n1 * n2 + a * m2 + b; }
    std::size_t x_check(std::size_t a, std::size_t j) const { return a * n2 + j; }
    std::size_t z_check(std::size_t i, std::size_t b) const { return i * m2 + b; }
};

inline HgpCode hypergraph_product(const ClassicalCode& c1, const ClassicalCode& c2) {
    const std::size_t n1 = c1.n, m1 = c1.h.rows();
    const std::size_t n2 = c2.n, m2 = c2.h.rows();
    BinaryMatrix h_x = hstack(tensor_product(c1.h, BinaryMatrix::identity(n2)),
                              tensor_product(BinaryMatrix::identity(m1), transpose(c2.h)));
    BinaryMatrix h_z = hstack(tensor_product(BinaryMatrix::identity(n1), c2.h),
                              tensor_product(transpose(c1.h), BinaryMatrix::identity(m2)));
    HgpCode hgp;
    hgp.css = make_css(std::move(h_x), std::move(h_z));
    // Cross-check against k1*k2 + k1T*k2T.
    const std::size_t k1t = m1 - c1.rank_h, k2t = m2 - c2.rank_h;
    const std::size_t expected_k = c1.k * c2.k + k1t * k2t;
    if (hgp.css.k != expected_k)
        throw std::logic_error("hypergraph_product: rank-based k = " + std::to_string(hgp.css.k) +
                               " disagrees with product formula " + std::to_string(expected_k));
    hgp.c1 = c1;
    hgp.c2 = c2;
    hgp.n1 = n1;
    hgp.m1 = m1;
    hgp.n2 = n2;
    hgp.m2 = m2;
    return hgp;
}

// ---------------------------------------------------------------------------
// Thickening
// ---------------------------------------------------------------------------

/// Index bookkeeping for a thickened code.  Sheets are labelled by the bits
/// of the thickening code, intermediate layers by its checks.  All maps are
/// bijections induced by the Kronecker convention (left factor slow):
struct ThickenedLayout {
    std::size_t ell = 0;      // sheet count = classical n
    std::size_t mc = 0;       // intermediate layer count = classical m
    std::size_t n_base = 0;   // base qubits per sheet
    std::size_t mx_base = 0;  // base X-checks
    std::size_t mz_base = 0;  // base Z-checks
    bool fault_tolerant = false;  // false when ell == 1 (no metachecks)
    CausalStructure causal;

    std::size_t n_thick() const { return n_base * ell + mx_base * mc; }
    std::size_t mz_thick() const { return mz_base * ell + n_base * mc; }
    std::size_t mx_thick() const { return mx_base * ell; }
    std::size_t meta_rows() const { return mz_base * mc; }

    std::size_t sheet_qubit(std::size_t sheet, std::size_t q) const { return q * ell + sheet; }
    std::size_t inter_qubit(std::size_t layer, std::size_t i) const { return n_base * ell + i * mc + layer; }
    std::size_t sheet_zcheck(std::size_t sheet, std::size_t r) const { return r * ell + sheet; }
    std::size_t inter_zcheck(std::size_t layer, std::size_t q) const { return mz_base * ell + q * mc + layer; }
    std::size_t x_check(std::size_t sheet, std::size_t i) const { return i * ell + sheet; }
    std::size_t metacheck(std::size_t layer, std::size_t r) const { return r * mc + layer; }

    std::size_t boundary_sheet() const { return causal.boundary_bits.front(); }

    /// Restriction of an n_thick-length support vector to one sheet.
    BinaryVector restrict_to_sheet(const BinaryVector& v, std::size_t sheet) const {
        if (v.size() != n_thick()) throw std::invalid_argument("restrict_to_sheet: length mismatch");
        BinaryVector out(n_base);
        for (std::size_t q = 0; q < n_base; ++q)
            if (v.get(sheet_qubit(sheet, q))) out.set(q, true);
        return out;
    }
    /// Restriction to one intermediate layer (indexed by base X-check).
    BinaryVector restrict_to_layer(const BinaryVector& v, std::size_t layer) const {
        if (v.size() != n_thick()) throw std::invalid_argument("restrict_to_layer: length mismatch");
        BinaryVector out(mx_base);
        for (std::size_t i = 0; i < mx_base; ++i)
            if (v.get(inter_qubit(layer, i))) out.set(i, true);
        return out;
    }
    BinaryVector embed_on_sheet(const BinaryVector& base_v, std::size_t sheet) const {
        if (base_v.size() != n_base) throw std::invalid_argument("embed_on_sheet: length mismatch");
        BinaryVector out(n_thick());
        for (std::size_t q : base_v.support()) out.set(sheet_qubit(sheet, q), true);
        return out;
    }
};

struct ThickenedCode {
    CssCode css;   // thickened code, m_z populated for ell >= 2
    CssCode base;  // the code that was thickened
    ClassicalCode classical;
    ThickenedLayout layout;
};

/// Homological product of a CSS code with a chain-compatible classical code:
///   H~_X = (H_X (x) I | I (x) h^T)
///   H~_Z = ((H_Z (x) I | 0), (I (x) h | H_X^T (x) I))
///   M~_Z = (I (x) h | H_Z (x) I)
/// Composition identities are rechecked on every construction.
inline ThickenedCode thicken(const CssCode& base, const ClassicalCode& classical) {
    CausalStructure causal = build_causal_structure(classical.h);
    const std::size_t ell = classical.n;
    const std::size_t mc = classical.h.rows();
    const std::size_t n = base.n, mx = base.h_x.rows(), mz = base.h_z.rows();
    if (classical.rank_h != mc)
        throw std::invalid_argument("thicken: thickening code must have full-row-rank checks");

    const BinaryMatrix i_ell = BinaryMatrix::identity(ell);
    const BinaryMatrix i_mc = BinaryMatrix::identity(mc);
    BinaryMatrix h_x =
        hstack(tensor_product(base.h_x, i_ell), tensor_product(BinaryMatrix::identity(mx), transpose(classical.h)));
    BinaryMatrix h_z = block_compose({
        {Block(tensor_product(base.h_z, i_ell)), Block()},
        {Block(tensor_product(BinaryMatrix::identity(n), classical.h)),
         Block(tensor_product(transpose(base.h_x), i_mc))},
    });
    BinaryMatrix m_z =
        hstack(tensor_product(BinaryMatrix::identity(mz), classical.h), tensor_product(base.h_z, i_mc));
    if (!mat_mul(m_z, h_z).is_zero()) throw std::logic_error("thicken: M~_Z * H~_Z != 0");

    ThickenedCode out;
    out.css = make_css(std::move(h_x), std::move(h_z));  // rechecks orthogonality, computes k
    const std::size_t expected_k = base.k * classical.k;
    if (out.css.k != expected_k)
        throw std::logic_error("thicken: rank-based k = " + std::to_string(out.css.k) +
                               " disagrees with base.k * classical.k = " + std::to_string(expected_k));
    out.css.m_z = std::move(m_z);
    out.base = base;
    out.classical = classical;
    out.layout.ell = ell;
    out.layout.mc = mc;
    out.layout.n_base = n;
    out.layout.mx_base = mx;
    out.layout.mz_base = mz;
    out.layout.fault_tolerant = (ell >= 2);
    out.layout.causal = std::move(causal);
    return out;
}

// ---------------------------------------------------------------------------
// Logical operator bases
// ---------------------------------------------------------------------------

/// L_X spans ker(H_Z) modulo the row space of H_X; L_Z symmetrically.  The
/// returned bases are adjusted so that L_Z * L_X^T is the k x k identity.
inline std::pair<BinaryMatrix, BinaryMatrix> logical_basis(const CssCode& code) {
    auto pick = [](const BinaryMatrix& kernel_of, const BinaryMatrix& stabilizers, std::size_t k) {
        BinaryMatrix kb = kernel_basis(kernel_of);
        Echelon ech = row_reduce(PackedMatrix(stabilizers), false, false);
        // Grow an echelon of stabilizer rows; kernel rows that still reduce to
        // something nonzero are independent logicals.
        std::vector<std::uint32_t> pivots = ech.pivot_cols;
        std::vector<BinaryVector> rows_storage;
        std::size_t used = ech.rank();
        BinaryMatrix out(k, kernel_of.cols());
        std::size_t found = 0;
        for (std::size_t r = 0; r < kb.rows() && found < k; ++r) {
            BinaryVector v = kb.row_as_vector(r);
            for (std::size_t i = 0; i < used; ++i)
                if (v.get(pivots[i])) {
                    if (i < ech.rank())
                        ech.mat.xor_row_into(i, v);
                    else
                        v ^= rows_storage[i - ech.rank()];
                }
            if (v.is_zero()) continue;
            const std::size_t pivot = v.support().front();
            pivots.push_back(static_cast<std::uint32_t>(pivot));
            rows_storage.push_back(v);
            ++used;
            for (std::uint32_t c : kb.row(r)) out.insert(found, c);
            ++found;
        }
        if (found != k) throw std::logic_error("logical_basis: found " + std::to_string(found) + " of " +
                                               std::to_string(k) + " logicals");
        return out;
    };
    BinaryMatrix l_x = pick(code.h_z, code.h_x, code.k);
    BinaryMatrix l_z = pick(code.h_x, code.h_z, code.k);
    if (code.k > 0) {
        BinaryMatrix pairing = mat_mul(l_z, transpose(l_x));
        l_z = mat_mul(invert(pairing), l_z);
    }
    return {std::move(l_x), std::move(l_z)};
}

inline void attach_logicals(CssCode& code) {
    auto [l_x, l_z] = logical_basis(code);
    code.l_x = std::move(l_x);
    code.l_z = std::move(l_z);
}

/// Product-structure logical bases of a thickened code.  Z-logicals are the
/// base Z-logicals placed on each unmeasured boundary sheet; X-logicals are
/// base X-logicals tensored with the thickening code's codewords.
inline std::pair<BinaryMatrix, BinaryMatrix> kunneth_logicals(const ThickenedCode& thick, const BinaryMatrix& base_lx,
                                                              const BinaryMatrix& base_lz) {
    const ThickenedLayout& ly = thick.layout;
    const BinaryMatrix g = kernel_basis(thick.classical.h);  // classical codewords
    if (g.rows() != ly.causal.boundary_bits.size())
        throw std::logic_error("kunneth_logicals: classical k != boundary endpoint count");

    BinaryMatrix lx(base_lx.rows() * g.rows(), ly.n_thick());
    for (std::size_t i = 0; i < base_lx.rows(); ++i)
        for (std::size_t j = 0; j < g.rows(); ++j)
            for (std::uint32_t q : base_lx.row(i))
                for (std::uint32_t sheet : g.row(j)) lx.insert(i * g.rows() + j, ly.sheet_qubit(sheet, q));

    BinaryMatrix lz(base_lz.rows() * ly.causal.boundary_bits.size(), ly.n_thick());
    for (std::size_t i = 0; i < base_lz.rows(); ++i)
        for (std::size_t j = 0; j < ly.causal.boundary_bits.size(); ++j)
            for (std::uint32_t q : base_lz.row(i))
                lz.insert(i * ly.causal.boundary_bits.size() + j, ly.sheet_qubit(ly.causal.boundary_bits[j], q));

    if (!mat_mul(thick.css.h_x, transpose(lz)).is_zero())
        throw std::logic_error("kunneth_logicals: H~_X * L~_Z^T != 0");
    if (!mat_mul(thick.css.h_z, transpose(lx)).is_zero())
        throw std::logic_error("kunneth_logicals: H~_Z * L~_X^T != 0");
    return {std::move(lx), std::move(lz)};
}

}  // namespace qprep
