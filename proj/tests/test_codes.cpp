#include <catch2/catch_amalgamated.hpp>

#include "qprep/codes.hpp"

using namespace qprep;

TEST_CASE("repetition code") {
    SECTION("ell = 3 is the standard chain") {
        auto c = repetition_code(3);
        CHECK(c.h == BinaryMatrix::from_dense({"110", "011"}));
        CHECK(c.n == 3);
        CHECK(c.k == 1);
    }
    SECTION("ell = 1 degenerates to a checkless bit") {
        auto c = repetition_code(1);
        CHECK(c.h.rows() == 0);
        CHECK(c.h.cols() == 1);
        CHECK(c.k == 1);
    }
    SECTION("kernel is the all-ones word") {
        auto c = repetition_code(9);
        auto kb = kernel_basis(c.h);
        REQUIRE(kb.rows() == 1);
        CHECK(kb.row_as_vector(0).weight() == 9);
    }
}

TEST_CASE("star code") {
    SECTION("z=3, branch_len=2 has [6,2,4] shape") {
        auto c = star_code(3, 2);
        CHECK(c.n == 6);
        CHECK(c.k == 2);
        CHECK(c.h.rows() == 4);
        CHECK(c.h.row_weight(3) == 3);  // central check
        for (std::size_t b = 0; b < 6; ++b) CHECK(transpose(c.h).row_weight(b) <= 2);
        // enumerate the four codewords: nonzero ones have weight exactly 4
        auto kb = kernel_basis(c.h);
        REQUIRE(kb.rows() == 2);
        auto w0 = kb.row_as_vector(0), w1 = kb.row_as_vector(1);
        CHECK(w0.weight() == 4);
        CHECK(w1.weight() == 4);
        CHECK((w0 ^ w1).weight() == 4);
    }
    SECTION("table shape: n = z*d/2, k = z-1") {
        for (std::size_t z = 2; z <= 5; ++z)
            for (std::size_t b = 1; b <= 3; ++b) {
                auto c = star_code(z, b);
                CHECK(c.n == z * b);
                CHECK(c.k == z - 1);
                CHECK(*c.d == 2 * b);
            }
    }
    SECTION("two-branch star is a chain") {
        auto s = star_code(2, 3);
        auto r = repetition_code(6);
        CHECK(s.n == r.n);
        CHECK(s.k == r.k);
        CHECK(*s.d == *r.d);
        CHECK(rank(s.h) == rank(r.h));
        auto cs = build_causal_structure(s.h);
        CHECK(cs.boundary_bits.size() == 1);
        CHECK(cs.order.size() == 5);
    }
}

TEST_CASE("regular LDPC sampling") {
    SECTION("(5,6) at n = 18") {
        auto c = sample_regular_ldpc(18, 5, 6, 42);
        CHECK(c.h.rows() == 15);
        CHECK(c.h.cols() == 18);
        for (std::size_t r = 0; r < 15; ++r) CHECK(c.h.row_weight(r) == 6);
        for (std::size_t w : c.h.col_weights()) CHECK(w == 5);
    }
    SECTION("determinism") {
        CHECK(sample_regular_ldpc(18, 5, 6, 7).h == sample_regular_ldpc(18, 5, 6, 7).h);
        CHECK(sample_regular_ldpc(18, 5, 6, 7).h != sample_regular_ldpc(18, 5, 6, 8).h);
    }
    SECTION("(1,3) at n = 6 gives disjoint checks") {
        auto c = sample_regular_ldpc(6, 1, 3, 3);
        for (std::size_t w : c.h.col_weights()) CHECK(w == 1);
        CHECK(c.rank_h <= 2);
    }
    SECTION("indivisible degree product is rejected") {
        CHECK_THROWS_AS(sample_regular_ldpc(10, 5, 6, 0), std::invalid_argument);
    }
}

TEST_CASE("causal structure") {
    SECTION("chain orientation") {
        auto cs = build_causal_structure(repetition_code(5).h);
        CHECK(cs.start_bit == 0);
        REQUIRE(cs.boundary_bits.size() == 1);
        CHECK(cs.boundary_bits[0] == 4);
        REQUIRE(cs.order.size() == 4);
        CHECK(cs.order[0].bit == 0);
        CHECK(cs.order[0].in_check == -1);
        for (std::size_t i = 1; i < 4; ++i) {
            CHECK(cs.order[i].bit == i);
            CHECK(cs.order[i].in_check == static_cast<std::int32_t>(i - 1));
        }
    }
    SECTION("every non-start bit has exactly one incoming arrow") {
        for (const auto& h : {repetition_code(7).h, star_code(3, 2).h, star_code(4, 3).h}) {
            auto cs = build_causal_structure(h);
            for (std::size_t b = 0; b < cs.n_bits; ++b) {
                if (b == cs.start_bit)
                    CHECK(cs.in_check_of[b] == -1);
                else
                    CHECK(cs.in_check_of[b] >= 0);
            }
        }
    }
    SECTION("star boundaries are the outgoing endpoints") {
        auto cs = build_causal_structure(star_code(3, 2).h);
        CHECK(cs.start_bit == 0);
        CHECK(cs.boundary_bits == std::vector<std::uint32_t>{2, 4});
    }
    SECTION("cycles are rejected") {
        BinaryMatrix ring(3, 3);
        ring.insert(0, 0);
        ring.insert(0, 1);
        ring.insert(1, 1);
        ring.insert(1, 2);
        ring.insert(2, 2);
        ring.insert(2, 0);
        CHECK_THROWS_AS(build_causal_structure(ring), std::invalid_argument);
    }
}

TEST_CASE("hypergraph product") {
    SECTION("rep(3) x rep(3) is the 13-qubit code") {
        auto hgp = hypergraph_product(repetition_code(3), repetition_code(3));
        CHECK(hgp.css.n == 13);
        CHECK(hgp.css.k == 1);
        CHECK(hgp.css.h_x.rows() == 6);
        CHECK(hgp.css.h_z.rows() == 6);
        CHECK(mat_mul(hgp.css.h_x, transpose(hgp.css.h_z)).is_zero());
    }
    SECTION("self-product shape and LDPC inheritance") {
        auto c = sample_regular_ldpc(12, 5, 6, 5);
        auto hgp = hypergraph_product(c, c);
        CHECK(hgp.css.n == 12 * 12 + 10 * 10);
        for (std::size_t w : hgp.css.h_x.col_weights()) CHECK(w <= 5 + 6);
        for (std::size_t w : hgp.css.h_z.col_weights()) CHECK(w <= 5 + 6);
    }
    SECTION("rank k matches the product formula over ensemble seeds") {
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            auto a = sample_regular_ldpc(12, 5, 6, seed);
            auto b = sample_regular_ldpc(6, 2, 4, seed + 100);
            auto hgp = hypergraph_product(a, b);  // throws if the formula disagrees
            CHECK(mat_mul(hgp.css.h_x, transpose(hgp.css.h_z)).is_zero());
        }
    }
}

TEST_CASE("thickening") {
    auto hgp = hypergraph_product(repetition_code(3), repetition_code(3));

    SECTION("13-qubit code by rep(3)") {
        auto t = thicken(hgp.css, repetition_code(3));
        CHECK(t.css.n == 13 * 3 + 6 * 2);  // sheets + intermediate qubits
        CHECK(t.css.k == 1);
        REQUIRE(t.css.m_z.has_value());
        CHECK(t.css.m_z->rows() == 6 * 2);
        CHECK(mat_mul(*t.css.m_z, t.css.h_z).is_zero());
        CHECK(mat_mul(t.css.h_x, transpose(t.css.h_z)).is_zero());
        CHECK(t.layout.fault_tolerant);
        CHECK(t.layout.boundary_sheet() == 2);
    }
    SECTION("ell = 1 leaves the code unchanged and is flagged") {
        auto t = thicken(hgp.css, repetition_code(1));
        CHECK(t.css.h_x == hgp.css.h_x);
        CHECK(t.css.h_z == hgp.css.h_z);
        CHECK(t.css.m_z->rows() == 0);
        CHECK_FALSE(t.layout.fault_tolerant);
    }
    SECTION("k is preserved over ensemble instances") {
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
            auto c = sample_regular_ldpc(12, 5, 6, seed);
            auto h = hypergraph_product(c, c);
            auto t = thicken(h.css, repetition_code(2));
            CHECK(t.css.k == h.css.k);
        }
    }
    SECTION("star thickening multiplies k by z-1") {
        auto t = thicken(hgp.css, star_code(3, 2));
        CHECK(t.css.k == hgp.css.k * 2);
        CHECK(t.layout.causal.boundary_bits.size() == 2);
    }
    SECTION("LDPC bound on thickened weights") {
        auto c = sample_regular_ldpc(12, 5, 6, 1);
        auto h = hypergraph_product(c, c);
        auto t = thicken(h.css, repetition_code(3));
        const std::size_t in_deg = 5 + 6 + 2;
        for (std::size_t w : t.css.h_x.col_weights()) CHECK(w <= in_deg);
        for (std::size_t w : t.css.h_z.col_weights()) CHECK(w <= in_deg);
        for (std::size_t r = 0; r < t.css.h_z.rows(); ++r) CHECK(t.css.h_z.row_weight(r) <= in_deg);
    }
}

TEST_CASE("logical basis") {
    SECTION("13-qubit code has weight-3 logicals after coset reduction") {
        auto hgp = hypergraph_product(repetition_code(3), repetition_code(3));
        auto [lx, lz] = logical_basis(hgp.css);
        REQUIRE(lx.rows() == 1);
        REQUIRE(lz.rows() == 1);
        CHECK(matvec(hgp.css.h_z, lx.row_as_vector(0)).is_zero());
        CHECK(matvec(hgp.css.h_x, lz.row_as_vector(0)).is_zero());
        CHECK(min_weight_coset_rep(lx.row_as_vector(0), hgp.css.h_x).rep.weight() == 3);
        CHECK(min_weight_coset_rep(lz.row_as_vector(0), hgp.css.h_z).rep.weight() == 3);
        CHECK(mat_mul(lz, transpose(lx)) == BinaryMatrix::identity(1));
    }
    SECTION("k = 0 code has empty bases") {
        auto hgp = hypergraph_product(repetition_code(2), repetition_code(2));
        REQUIRE(hgp.css.k == 1);
        // freeze the logical qubit by promoting its X-logical to a check
        auto [lx, lz] = logical_basis(hgp.css);
        auto frozen = make_css(vstack(hgp.css.h_x, lx), hgp.css.h_z);
        REQUIRE(frozen.k == 0);
        auto [fx, fz] = logical_basis(frozen);
        CHECK(fx.rows() == 0);
        CHECK(fz.rows() == 0);
    }
    SECTION("pairing is the identity for k > 1") {
        auto c = sample_regular_ldpc(12, 5, 6, 3);
        auto hgp = hypergraph_product(c, c);
        auto [lx, lz] = logical_basis(hgp.css);
        CHECK(mat_mul(lz, transpose(lx)) == BinaryMatrix::identity(hgp.css.k));
    }
}

TEST_CASE("kunneth logicals") {
    auto hgp = hypergraph_product(repetition_code(3), repetition_code(3));
    auto [base_lx, base_lz] = logical_basis(hgp.css);

    SECTION("boundary restrictions reproduce the base logicals") {
        auto t = thicken(hgp.css, repetition_code(3));
        auto [lx, lz] = kunneth_logicals(t, base_lx, base_lz);
        REQUIRE(lx.rows() == 1);
        REQUIRE(lz.rows() == 1);
        const std::size_t b = t.layout.boundary_sheet();
        CHECK(t.layout.restrict_to_sheet(lz.row_as_vector(0), b) == base_lz.row_as_vector(0));
        CHECK(t.layout.restrict_to_sheet(lx.row_as_vector(0), b) == base_lx.row_as_vector(0));
    }
    SECTION("spans the same space as the rank-based basis") {
        auto t = thicken(hgp.css, repetition_code(2));
        auto [lx, lz] = kunneth_logicals(t, base_lx, base_lz);
        auto [rx, rz] = logical_basis(t.css);
        auto span_x = rank(vstack(vstack(lx, t.css.h_x), rx));
        CHECK(span_x == rank(vstack(lx, t.css.h_x)));
        CHECK(span_x == rank(vstack(rx, t.css.h_x)));
        auto span_z = rank(vstack(vstack(lz, t.css.h_z), rz));
        CHECK(span_z == rank(vstack(lz, t.css.h_z)));
        CHECK(span_z == rank(vstack(rz, t.css.h_z)));
    }
    SECTION("each outgoing star endpoint carries a distinct copy of each logical") {
        auto t = thicken(hgp.css, star_code(3, 2));
        auto [lx, lz] = kunneth_logicals(t, base_lx, base_lz);
        REQUIRE(lx.rows() == 2);  // k * (z-1)
        REQUIRE(lz.rows() == 2);
        const auto& ends = t.layout.causal.boundary_bits;
        std::size_t covered = 0;
        for (std::size_t r = 0; r < 2; ++r)
            for (std::uint32_t e : ends) {
                auto restr = t.layout.restrict_to_sheet(lx.row_as_vector(r), e);
                if (!restr.is_zero()) {
                    CHECK(restr == base_lx.row_as_vector(0));
                    ++covered;
                }
            }
        CHECK(covered == 2);
    }
}
