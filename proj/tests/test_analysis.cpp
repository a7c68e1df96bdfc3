#include <catch2/catch_amalgamated.hpp>

#include "qprep/analysis.hpp"

using namespace qprep;

TEST_CASE("distance_exhaustive") {
    SECTION("repetition code") {
        auto d = distance_exhaustive(repetition_code(5).h);
        CHECK(d.is_exact());
        CHECK(d.value == 5);
    }
    SECTION("full-rank square matrix has no codewords") {
        CHECK(distance_exhaustive(BinaryMatrix::identity(4)).is_infinite());
    }
    SECTION("ball search certifies lower bounds") {
        auto c = repetition_code(7);
        auto bound = distance_exhaustive(c.h, 3);
        CHECK(bound.kind == DistanceResult::Kind::LowerBound);
        CHECK(bound.value == 3);
        auto exact = distance_exhaustive(c.h, 7);
        CHECK(exact.is_exact());
        CHECK(exact.value == 7);
    }
    SECTION("star code distance") {
        auto d = distance_exhaustive(star_code(3, 2).h);
        CHECK(d.is_exact());
        CHECK(d.value == 4);
    }
    SECTION("guard rejects oversized kernel enumeration") {
        CHECK_THROWS_AS(distance_exhaustive(BinaryMatrix::zero(1, 40)), BudgetExceeded);
    }
}

TEST_CASE("css_distance_exhaustive") {
    SECTION("13-qubit code") {
        auto hgp = hypergraph_product(repetition_code(3), repetition_code(3));
        auto d = css_distance_exhaustive(hgp.css);
        CHECK(d.d_x.value == 3);
        CHECK(d.d_z.value == 3);
    }
    SECTION("k = 0 gives infinite distances") {
        auto hgp = hypergraph_product(repetition_code(2), repetition_code(2));
        auto [lx, lz] = logical_basis(hgp.css);
        auto frozen = make_css(vstack(hgp.css.h_x, lx), hgp.css.h_z);
        auto d = css_distance_exhaustive(frozen);
        CHECK(d.d_x.is_infinite());
        CHECK(d.d_z.is_infinite());
    }
    SECTION("product distance law on small hypergraph products") {
        // d = min(d1, d2, d1T, d2T); with full-rank inputs the transpose
        // distances are infinite.
        auto a = repetition_code(3);
        auto b = repetition_code(4);
        auto hgp = hypergraph_product(a, b);
        auto d = css_distance_exhaustive(hgp.css);
        CHECK(std::min(d.d_x.value, d.d_z.value) == std::min(*a.d, *b.d));
    }
    SECTION("thickening by rep(2) doubles the X distance and keeps the Z distance") {
        auto hgp = hypergraph_product(repetition_code(3), repetition_code(3));
        auto t = thicken(hgp.css, repetition_code(2));
        auto d = css_distance_exhaustive(t.css, std::uint64_t{1} << 26);
        CHECK(d.d_x.value == 6);
        CHECK(d.d_z.value == 3);
    }
}

TEST_CASE("confinement_check") {
    auto hgp = hypergraph_product(repetition_code(3), repetition_code(3));

    SECTION("weight-1 errors always pass the identity bound when no column is empty") {
        auto rep = confinement_check(hgp.css.h_x, hgp.css.h_z, 1, MonotoneFn::identity(16));
        CHECK(rep.pass);
        CHECK(rep.errors_checked == 13);
        CHECK(rep.frontier[0] == 0);
    }
    SECTION("zero matrix fails immediately") {
        auto rep = confinement_check(BinaryMatrix::zero(2, 4), BinaryMatrix::zero(0, 4), 1, MonotoneFn::identity(8));
        CHECK_FALSE(rep.pass);
        REQUIRE(rep.violator.has_value());
        CHECK(rep.violator->weight() == 1);
    }
    SECTION("t = 2 identity-bound report on the 13-qubit code") {
        auto rep = confinement_check(hgp.css.h_x, hgp.css.h_z, 2, MonotoneFn::identity(16));
        // Two overlapping columns of weights 1 and 2 can collapse to a single
        // flipped check, so the identity bound fails at t = 2 here.
        CHECK_FALSE(rep.pass);
        CHECK(rep.frontier[1] == 2);
        // The measured frontier itself is always a passing bound.
        auto again = confinement_check(hgp.css.h_x, hgp.css.h_z, 2, MonotoneFn::from_frontier(rep.frontier));
        CHECK(again.pass);
    }
}

TEST_CASE("soundness_check") {
    auto hgp = hypergraph_product(repetition_code(3), repetition_code(3));

    SECTION("t = 0 is vacuous") {
        auto rep = soundness_check(hgp.css.h_z, hgp.css.h_x, 0, MonotoneFn::identity(4));
        CHECK(rep.pass);
        CHECK(rep.syndromes_checked == 1);
    }
    SECTION("thickened code is cubically sound at t = 3") {
        auto t = thicken(hgp.css, repetition_code(3));
        auto rep = soundness_check(t.css.h_z, t.css.h_x, 3, MonotoneFn::cubic_quarter(8));
        CHECK(rep.pass);
        CHECK_FALSE(rep.redundancy_absent);
        CHECK(rep.syndromes_checked > 1);
    }
    SECTION("full-row-rank matrix is flagged as redundancy-free") {
        auto rep = soundness_check(hgp.css.h_z, hgp.css.h_x, 1, MonotoneFn::linear(12.0, 8));
        CHECK(rep.redundancy_absent);
    }
}

TEST_CASE("homology_dims") {
    auto hgp = hypergraph_product(repetition_code(3), repetition_code(3));

    SECTION("CSS chain of the 13-qubit code") {
        auto dims = homology_dims({transpose(hgp.css.h_x), hgp.css.h_z});
        REQUIRE(dims.size() == 3);
        CHECK(dims[1] == hgp.css.k);
    }
    SECTION("thickened 4-term chain has trivial homology at the syndrome space") {
        auto t = thicken(hgp.css, repetition_code(3));
        auto dims = homology_dims({transpose(t.css.h_x), t.css.h_z, *t.css.m_z});
        REQUIRE(dims.size() == 4);
        CHECK(dims[1] == t.css.k);
        CHECK(dims[2] == 0);  // every metacheck-satisfying syndrome is physical
    }
    SECTION("zero maps give the full space dimensions") {
        auto dims = homology_dims({BinaryMatrix::zero(3, 4), BinaryMatrix::zero(2, 3)});
        CHECK(dims == std::vector<std::size_t>{4, 3, 2});
    }
    SECTION("non-composing maps are rejected") {
        CHECK_THROWS_AS(homology_dims({BinaryMatrix::identity(3), BinaryMatrix::identity(3)}),
                        std::invalid_argument);
    }
}

TEST_CASE("single_shot_distance") {
    auto hgp = hypergraph_product(repetition_code(3), repetition_code(3));

    SECTION("repetition-thickened codes have infinite single-shot distance") {
        auto t = thicken(hgp.css, repetition_code(3));
        CHECK(single_shot_distance(t.css.h_z, *t.css.m_z).is_infinite());
        auto star = thicken(hgp.css, star_code(3, 2));
        CHECK(single_shot_distance(star.css.h_z, *star.css.m_z).is_infinite());
    }
    SECTION("empty metachecks with full-rank checks stay infinite") {
        auto t = thicken(hgp.css, repetition_code(1));
        CHECK(single_shot_distance(t.css.h_z, *t.css.m_z).is_infinite());
    }
    SECTION("dropping a metacheck row exposes a finite distance") {
        auto t = thicken(hgp.css, repetition_code(3));
        const auto& mz = *t.css.m_z;
        BinaryMatrix truncated(mz.rows() - 1, mz.cols());
        for (std::size_t r = 0; r + 1 < mz.rows(); ++r)
            for (std::uint32_t c : mz.row(r)) truncated.insert(r, c);
        auto d = single_shot_distance(t.css.h_z, truncated, 8);
        CHECK(d.is_exact());
        CHECK(d.value >= 1);
    }
}
