#include <doctest.h>

#include <cmath>
#include <vector>

#include "pmivec/pmi.hpp"

using namespace pmivec;

namespace {

std::uint64_t key(WordId w, CtxId c) { return (static_cast<std::uint64_t>(w) << 32) | c; }

CoocMatrix from_dense(const std::vector<std::vector<double>>& counts) {
    std::vector<std::pair<std::uint64_t, double>> cells;
    for (WordId w = 0; w < counts.size(); ++w)
        for (CtxId c = 0; c < counts[w].size(); ++c)
            if (counts[w][c] > 0.0) cells.emplace_back(key(w, c), counts[w][c]);
    // non-positional layout needs a square id space; pad with empty rows
    auto size = static_cast<std::uint32_t>(std::max(counts.size(), counts[0].size()));
    return CoocMatrix::from_records(size, 1, false, cells);
}

// Dense brute-force oracle: materializes the full grid and computes every
// variant from probability ratios, independent of the lazy cached-log path.
struct DenseOracle {
    std::vector<std::vector<double>> m;
    double alpha;
    std::vector<double> row, col, ctx_prob;
    double total = 0.0;

    DenseOracle(std::vector<std::vector<double>> counts, double a) : m(std::move(counts)), alpha(a) {
        row.assign(m.size(), 0.0);
        col.assign(m[0].size(), 0.0);
        for (std::size_t w = 0; w < m.size(); ++w)
            for (std::size_t c = 0; c < m[w].size(); ++c) {
                row[w] += m[w][c];
                col[c] += m[w][c];
                total += m[w][c];
            }
        double norm = 0.0;
        ctx_prob.assign(col.size(), 0.0);
        for (std::size_t c = 0; c < col.size(); ++c) {
            ctx_prob[c] = col[c] > 0.0 ? std::pow(col[c], alpha) : 0.0;
            norm += ctx_prob[c];
        }
        for (double& p : ctx_prob) p /= norm;
    }

    double pmi(std::size_t w, std::size_t c) const {
        if (m[w][c] == 0.0) return kNegInfinity;
        double p_joint = m[w][c] / total;
        double p_w = row[w] / total;
        return std::log(p_joint / (p_w * ctx_prob[c]));
    }
    double ppmi(std::size_t w, std::size_t c) const {
        double v = pmi(w, c);
        return v > 0.0 ? v : 0.0;
    }
    double cpmi(double z, std::size_t w, std::size_t c) const {
        double v = pmi(w, c);
        return v > z ? v : z;
    }
    double npmi(std::size_t w, std::size_t c) const {
        if (m[w][c] == 0.0) return -1.0;
        double denom = -std::log(m[w][c] / total);
        if (denom == 0.0) return 1.0;
        return pmi(w, c) / denom;
    }
    double nnegpmi(std::size_t w, std::size_t c) const {
        double v = pmi(w, c);
        return v < 0.0 ? npmi(w, c) : v;
    }
    double lpmi(double beta, std::size_t w, std::size_t c) const {
        std::vector<std::vector<double>> adjusted = m;
        for (auto& r : adjusted)
            for (double& x : r) x += beta;
        DenseOracle lap(adjusted, alpha);
        return lap.pmi(w, c);
    }
};

std::vector<std::vector<double>> random_grid(std::size_t words, std::size_t ctxs,
                                             std::uint64_t seed, double zero_rate = 0.3) {
    Rng rng(seed);
    std::vector<std::vector<double>> g(words, std::vector<double>(ctxs, 0.0));
    for (auto& r : g)
        for (double& x : r)
            x = rng.next01() < zero_rate ? 0.0 : static_cast<double>(1 + rng.next_below(20));
    // ensure positive marginals everywhere
    for (std::size_t w = 0; w < words; ++w) g[w][w % ctxs] += 1.0;
    return g;
}

}  // namespace

TEST_SUITE_BEGIN("pmi");

TEST_CASE("variant grammar parses and round-trips") {
    PmiVariantSpec p = PmiVariantSpec::parse("ppmi");
    CHECK(p.kind == PmiKind::Ppmi);
    CHECK(p.filter == CellFilter::All);

    PmiVariantSpec c = PmiVariantSpec::parse("cpmi:-2");
    CHECK(c.kind == PmiKind::Cpmi);
    CHECK(c.z == -2.0);

    PmiVariantSpec pp = PmiVariantSpec::parse("ppmi+pos");
    CHECK(pp.filter == CellFilter::PositiveOnly);
    CHECK(pp.to_string() == "ppmi+pos");

    PmiVariantSpec cn = PmiVariantSpec::parse("cpmi:-2+neg");
    CHECK(cn.filter == CellFilter::NonpositiveOnly);
    CHECK(cn.z == -2.0);
    CHECK(cn.to_string() == "cpmi:-2+neg");

    CHECK(PmiVariantSpec::parse("npmi").kind == PmiKind::Npmi);
    CHECK(PmiVariantSpec::parse("nnegpmi").kind == PmiKind::Nnegpmi);
    CHECK(PmiVariantSpec::parse("lpmi:0.5").beta == 0.5);

    CHECK_THROWS_AS(PmiVariantSpec::parse("cpmi:+3"), Error);  // violates z <= 0
    CHECK_THROWS_AS(PmiVariantSpec::parse("cpmi"), Error);
    CHECK_THROWS_AS(PmiVariantSpec::parse("lpmi:0"), Error);
    CHECK_THROWS_AS(PmiVariantSpec::parse("lpmi:-1"), Error);
    CHECK_THROWS_AS(PmiVariantSpec::parse("pmi"), Error);
    CHECK_THROWS_AS(PmiVariantSpec::parse("ppmi:1"), Error);
    CHECK_THROWS_AS(PmiVariantSpec::parse("ppmi+foo"), Error);
}

TEST_CASE("pmi example values") {
    PmiVariantSpec spec = PmiVariantSpec::parse("ppmi", 1.0);

    // exact independence: M_wc=4, M_w*=8, M_*c=8, M_**=16 -> 0
    CoocMatrix ind = from_dense({{4, 4}, {4, 4}});
    PmiTransformer t_ind(ind, smoothed_context_distribution(ind, 1.0), spec);
    CHECK(t_ind.pmi(0, 0) == doctest::Approx(0.0).epsilon(1e-12));

    // M_wc=2, M_w*=4, M_*c=2, M_**=32 -> log 8 (natural log)
    CoocMatrix m = from_dense({{2, 2}, {0, 28}});
    PmiTransformer t(m, smoothed_context_distribution(m, 1.0), spec);
    CHECK(t.pmi(0, 0) == doctest::Approx(std::log(8.0)).epsilon(1e-12));
    CHECK(t.pmi(0, 0) == doctest::Approx(2.0794).epsilon(1e-4));
    CHECK(DenseOracle({{2, 2}, {0, 28}}, 1.0).pmi(0, 0) ==
          doctest::Approx(std::log(8.0)).epsilon(1e-12));

    // unobserved cell -> negative-infinity sentinel
    CHECK(t.pmi(1, 0) == kNegInfinity);
}

TEST_CASE("pmi requires both entities to occur") {
    std::vector<std::pair<std::uint64_t, double>> cells{{key(0, 0), 3.0}};
    CoocMatrix m = CoocMatrix::from_records(2, 1, false, cells);  // word 1, ctx 1 never occur
    PmiTransformer t(m, smoothed_context_distribution(m, 1.0), PmiVariantSpec::parse("ppmi", 1.0));
    CHECK_THROWS_AS(t.pmi(1, 0), Error);
    CHECK_THROWS_AS(t.transform(0, 1), Error);
    try {
        t.pmi(1, 0);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Domain);
    }
}

TEST_CASE("transform_cell edge semantics") {
    auto grid = random_grid(5, 7, 3);
    grid[2][3] = 0.0;  // a guaranteed never-cooccurring pair
    grid[2][2] += 1.0;
    CoocMatrix m = from_dense(grid);
    auto dist = smoothed_context_distribution(m, 0.75);

    PmiTransformer npmi(m, dist, PmiVariantSpec::parse("npmi", 0.75));
    CHECK(npmi.transform(2, 3) == -1.0);

    PmiTransformer nneg(m, dist, PmiVariantSpec::parse("nnegpmi", 0.75));
    CHECK(nneg.transform(2, 3) == -1.0);

    PmiTransformer cpmi(m, dist, PmiVariantSpec::parse("cpmi:-2", 0.75));
    CHECK(cpmi.transform(2, 3) == -2.0);

    PmiTransformer ppmi(m, dist, PmiVariantSpec::parse("ppmi", 0.75));
    CHECK(ppmi.transform(2, 3) == 0.0);

    // clamp semantics against the raw pmi value
    for (WordId w = 0; w < 5; ++w) {
        for (CtxId c = 0; c < 7; ++c) {
            double v = ppmi.pmi(w, c);
            if (v == kNegInfinity) continue;
            CHECK(cpmi.transform(w, c) == (v < -2.0 ? -2.0 : v));
            if (v >= 0.0) CHECK(nneg.transform(w, c) == v);  // positive part is exactly PMI
        }
    }
}

TEST_CASE("NPMI is +1 for an always-cooccurring pair") {
    std::vector<std::pair<std::uint64_t, double>> cells{{key(0, 0), 5.0}};
    CoocMatrix m = CoocMatrix::from_records(1, 1, false, cells);
    PmiTransformer t(m, smoothed_context_distribution(m, 1.0), PmiVariantSpec::parse("npmi", 1.0));
    CHECK(t.transform(0, 0) == 1.0);
}

TEST_CASE("every variant matches the dense oracle on random grids") {
    for (double alpha : {1.0, 0.75}) {
        for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
            auto grid = random_grid(6, 6, seed);
            CoocMatrix m = from_dense(grid);
            auto dist = smoothed_context_distribution(m, alpha);
            DenseOracle oracle(grid, alpha);

            PmiTransformer ppmi(m, dist, PmiVariantSpec::parse("ppmi", alpha));
            PmiTransformer cpmi(m, dist, PmiVariantSpec::parse("cpmi:-2", alpha));
            PmiTransformer cpmi0(m, dist, PmiVariantSpec::parse("cpmi:0", alpha));
            PmiTransformer npmi(m, dist, PmiVariantSpec::parse("npmi", alpha));
            PmiTransformer nneg(m, dist, PmiVariantSpec::parse("nnegpmi", alpha));
            PmiTransformer lpmi(m, dist, PmiVariantSpec::parse("lpmi:0.5", alpha));

            for (WordId w = 0; w < 6; ++w) {
                for (CtxId c = 0; c < 6; ++c) {
                    CHECK(ppmi.transform(w, c) == doctest::Approx(oracle.ppmi(w, c)).epsilon(1e-10));
                    CHECK(cpmi.transform(w, c) ==
                          doctest::Approx(oracle.cpmi(-2.0, w, c)).epsilon(1e-10));
                    CHECK(npmi.transform(w, c) == doctest::Approx(oracle.npmi(w, c)).epsilon(1e-10));
                    CHECK(nneg.transform(w, c) ==
                          doctest::Approx(oracle.nnegpmi(w, c)).epsilon(1e-10));
                    CHECK(lpmi.transform(w, c) ==
                          doctest::Approx(oracle.lpmi(0.5, w, c)).epsilon(1e-10));
                    // CPMI(0) is PPMI, cell-exact
                    CHECK(cpmi0.transform(w, c) == ppmi.transform(w, c));
                }
            }
        }
    }
}

TEST_CASE("range invariants on exhaustive grids") {
    // section-3 definitions: alpha = 1
    for (std::uint64_t seed : {10ull, 11ull, 12ull, 13ull}) {
        auto grid = random_grid(10, 10, seed);
        CoocMatrix m = from_dense(grid);
        auto dist = smoothed_context_distribution(m, 1.0);
        PmiTransformer ppmi(m, dist, PmiVariantSpec::parse("ppmi", 1.0));
        PmiTransformer npmi(m, dist, PmiVariantSpec::parse("npmi", 1.0));
        PmiTransformer nneg(m, dist, PmiVariantSpec::parse("nnegpmi", 1.0));
        PmiTransformer cm2(m, dist, PmiVariantSpec::parse("cpmi:-2", 1.0));
        PmiTransformer cm5(m, dist, PmiVariantSpec::parse("cpmi:-5", 1.0));
        PmiTransformer chuge(m, dist, PmiVariantSpec::parse("cpmi:-1e9", 1.0));

        for (WordId w = 0; w < 10; ++w) {
            for (CtxId c = 0; c < 10; ++c) {
                double raw = ppmi.pmi(w, c);
                CHECK(ppmi.transform(w, c) >= 0.0);
                CHECK(cm2.transform(w, c) >= -2.0);
                CHECK(cm5.transform(w, c) >= -5.0);
                double nv = npmi.transform(w, c);
                CHECK(nv >= -1.0);
                CHECK(nv <= 1.0);
                double nn = nneg.transform(w, c);
                if (raw != kNegInfinity && raw >= 0.0) {
                    CHECK(nn == raw);  // non-negative part is exactly PMI
                } else {
                    CHECK(nn == nv);  // negative part is exactly NPMI
                    CHECK(nn >= -1.0);
                    CHECK(nn < 0.0);
                }
                // z = -1e9 approximates -inf: observed cells are plain PMI
                if (raw != kNegInfinity) CHECK(chuge.transform(w, c) == raw);
            }
        }
    }
}

TEST_CASE("NPMI stays >= -1 under smoothing") {
    auto grid = random_grid(8, 8, 77);
    CoocMatrix m = from_dense(grid);
    auto dist = smoothed_context_distribution(m, 0.75);
    PmiTransformer npmi(m, dist, PmiVariantSpec::parse("npmi", 0.75));
    for (WordId w = 0; w < 8; ++w)
        for (CtxId c = 0; c < 8; ++c) CHECK(npmi.transform(w, c) >= -1.0);
}

TEST_CASE("LPMI converges to PMI pointwise as beta -> 0") {
    auto grid = random_grid(6, 6, 21, 0.0);  // fully observed grid
    CoocMatrix m = from_dense(grid);
    auto dist = smoothed_context_distribution(m, 0.75);
    PmiTransformer plain(m, dist, PmiVariantSpec::parse("ppmi", 0.75));
    PmiTransformer lap(m, dist, PmiVariantSpec::parse("lpmi:1e-8", 0.75));
    for (WordId w = 0; w < 6; ++w)
        for (CtxId c = 0; c < 6; ++c)
            CHECK(lap.transform(w, c) == doctest::Approx(plain.pmi(w, c)).epsilon(1e-5));
}

TEST_CASE("LPMI is always finite, even on unobserved cells") {
    auto grid = random_grid(6, 6, 5);
    CoocMatrix m = from_dense(grid);
    auto dist = smoothed_context_distribution(m, 0.75);
    PmiTransformer lap(m, dist, PmiVariantSpec::parse("lpmi:0.5", 0.75));
    for (WordId w = 0; w < 6; ++w)
        for (CtxId c = 0; c < 6; ++c) CHECK(std::isfinite(lap.transform(w, c)));
}

TEST_CASE("transforms are non-decreasing in M_wc with marginals held fixed") {
    // 2x2 rearrangement: +d at (0,0) and (1,1), -d at (0,1) and (1,0)
    // preserves every row and column marginal.
    for (std::uint64_t seed : {31ull, 32ull, 33ull}) {
        auto lo = random_grid(5, 5, seed, 0.0);
        lo[0][1] += 2.0;
        lo[1][0] += 2.0;
        auto hi = lo;
        double d = 2.0;
        hi[0][0] += d;
        hi[1][1] += d;
        hi[0][1] -= d;
        hi[1][0] -= d;

        CoocMatrix mlo = from_dense(lo);
        CoocMatrix mhi = from_dense(hi);
        REQUIRE(mlo.row_marginals == mhi.row_marginals);
        REQUIRE(mlo.col_marginals == mhi.col_marginals);

        for (const char* variant : {"ppmi", "cpmi:-2", "npmi", "nnegpmi", "lpmi:0.5"}) {
            PmiVariantSpec spec = PmiVariantSpec::parse(variant, 0.75);
            PmiTransformer tlo(mlo, smoothed_context_distribution(mlo, 0.75), spec);
            PmiTransformer thi(mhi, smoothed_context_distribution(mhi, 0.75), spec);
            CAPTURE(variant);
            CHECK(thi.transform(0, 0) >= tlo.transform(0, 0));
        }
    }
}

TEST_CASE("should_train_cell implements the skip rules") {
    PmiVariantSpec all = PmiVariantSpec::parse("ppmi");
    PmiVariantSpec pos = PmiVariantSpec::parse("ppmi+pos");
    PmiVariantSpec neg = PmiVariantSpec::parse("cpmi:-2+neg");

    CHECK(should_train_cell(pos, 0.0) == false);
    CHECK(should_train_cell(pos, 0.5) == true);
    CHECK(should_train_cell(pos, -0.5) == false);
    CHECK(should_train_cell(neg, 0.3) == false);
    CHECK(should_train_cell(neg, 0.0) == true);
    CHECK(should_train_cell(neg, -2.0) == true);
    for (double t : {-5.0, -1e-9, 0.0, 1e-9, 7.0}) CHECK(should_train_cell(all, t));
}

TEST_SUITE_END();
