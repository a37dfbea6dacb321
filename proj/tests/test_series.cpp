#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fglab/json_io.hpp"
#include "fglab/series.hpp"
#include "util.hpp"

using namespace fglab;
using testutil::Rng;

static CtxPtr F3() { return make_finite_field(3, 1); }

static TruncatedSeries from_ints(CtxPtr const &ctx, std::vector<int64_t> const &cs, int bound)
{
    TruncatedSeries f(ctx, bound);
    for (size_t d = 0; d < cs.size(); ++d)
        f.set((int)d, ring_int(ctx, cs[d]));
    return f;
}

TEST_CASE("composition oracle: direct polynomial expansion")
{
    CtxPtr ctx = F3();
    // f = X + X^2, g = X + X^2 over F_3: X + 2X^2 + 2X^3 + X^4 mod X^5
    TruncatedSeries f = from_ints(ctx, {0, 1, 1}, 4);
    TruncatedSeries g = from_ints(ctx, {0, 1, 1}, 4);
    TruncatedSeries fg = compose(f, g);
    TruncatedSeries want = from_ints(ctx, {0, 1, 2, 2, 1}, 4);
    CHECK(series_sub(fg, want).zero_mod_prec());
    // identity outer series
    TruncatedSeries x = series_x(ctx, 4);
    CHECK(series_sub(compose(x, g), g).zero_mod_prec());
    // precision contract: min of bounds
    TruncatedSeries f27 = from_ints(ctx, {0, 1, 1}, 27);
    TruncatedSeries g9 = from_ints(ctx, {0, 1, 1}, 9);
    CHECK(compose(f27, g9).bound == 9);
    // nonzero constant term rejected
    TruncatedSeries bad = from_ints(ctx, {1, 1}, 4);
    CHECK_THROWS(compose(f, bad));
}

TEST_CASE("reversion oracle: undetermined coefficients")
{
    CtxPtr ctx = F3();
    CHECK(series_sub(revert(series_x(ctx, 5)), series_x(ctx, 5)).zero_mod_prec());
    // f = X + X^2 over F_3 bound 3: inverse X + 2X^2 + 2X^3
    TruncatedSeries f = from_ints(ctx, {0, 1, 1}, 3);
    TruncatedSeries g = revert(f);
    CHECK(series_sub(g, from_ints(ctx, {0, 1, 2, 2}, 3)).zero_mod_prec());
    // linear case over F_9: (2X)^{-1} = 2X
    CtxPtr F9 = make_finite_field(3, 2);
    TruncatedSeries lin(F9, 4);
    lin.set(1, ring_int(F9, 2));
    CHECK(series_sub(revert(lin), lin).zero_mod_prec());
    // non-unit linear coefficient rejected
    CtxPtr W = make_witt(3, 1, 2);
    TruncatedSeries bad(W, 4);
    bad.set(1, ring_int(W, 3));
    CHECK_THROWS(revert(bad));
}

TEST_CASE("substitution oracle: direct expansion")
{
    CtxPtr ctx = F3();
    // F = X + Y + 2X^2 Y + 2X Y^2, f = g = X: 2X + X^3 mod X^4
    BivariateSeries F(ctx, 3);
    F.add_to(1, 0, ring_one(ctx));
    F.add_to(0, 1, ring_one(ctx));
    F.add_to(2, 1, ring_int(ctx, 2));
    F.add_to(1, 2, ring_int(ctx, 2));
    TruncatedSeries x = series_x(ctx, 3);
    TruncatedSeries r = substitute2(F, x, x);
    CHECK(series_sub(r, from_ints(ctx, {0, 2, 0, 1}, 3)).zero_mod_prec());
    // additive law adds
    BivariateSeries A(ctx, 5);
    A.add_to(1, 0, ring_one(ctx));
    A.add_to(0, 1, ring_one(ctx));
    Rng rng(3);
    TruncatedSeries f = testutil::random_series(rng, ctx, 5, false);
    TruncatedSeries g = testutil::random_series(rng, ctx, 5, false);
    CHECK(series_sub(substitute2(A, f, g), series_add(f, g)).zero_mod_prec());
    // X-section: F(f, 0)
    TruncatedSeries zero(ctx, 3);
    TruncatedSeries sec = substitute2(F, x, zero);
    CHECK(series_sub(sec, x).zero_mod_prec());
}

TEST_CASE("composition is associative on seeded triples")
{
    CtxPtr F9 = make_finite_field(3, 2);
    CtxPtr E = with_series_vars(F9, {{"u", 6}});
    for (uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        TruncatedSeries f = testutil::random_series(rng, E, 9, false);
        TruncatedSeries g = testutil::random_series(rng, E, 9, false);
        TruncatedSeries h = testutil::random_series(rng, E, 9, false);
        g.set(0, ring_zero(E));
        h.set(0, ring_zero(E));
        TruncatedSeries lhs = compose(compose(f, g), h);
        TruncatedSeries rhs = compose(f, compose(g, h));
        CHECK(series_sub(lhs, rhs).zero_mod_prec());
    }
}

TEST_CASE("reversion round trips")
{
    CtxPtr W = make_witt(3, 2, 3);
    for (uint64_t seed = 1; seed < 20; ++seed) {
        Rng rng(seed);
        TruncatedSeries f = testutil::random_series(rng, W, 9, true);
        f.set(0, ring_zero(W));
        TruncatedSeries g = revert(f);
        TruncatedSeries fg = compose(f, g);
        CHECK(series_sub(fg, series_x(W, 9)).zero_mod_prec());
        CHECK(series_sub(compose(g, f), series_x(W, 9)).zero_mod_prec());
        TruncatedSeries back = revert(g);
        CHECK(series_sub(back, f).zero_mod_prec());
    }
}

TEST_CASE("substitution commutes with reduction of coefficients")
{
    CtxPtr W = make_witt(3, 2, 3);
    CtxPtr Wu = with_series_vars(W, {{"u", 5}});
    CtxPtr F9 = make_finite_field(3, 2);
    CtxPtr E = with_series_vars(F9, {{"u", 5}});
    Rng rng(17);
    BivariateSeries F(Wu, 6);
    for (int i = 0; i <= 6; ++i)
        for (int j = 0; i + j <= 6; ++j)
            if (rng.below(2))
                F.add_to(i, j, testutil::random_element(rng, Wu, 2, 2));
    TruncatedSeries f = testutil::random_series(rng, Wu, 6, false);
    TruncatedSeries g = testutil::random_series(rng, Wu, 6, false);
    f.set(0, ring_zero(Wu));
    g.set(0, ring_zero(Wu));
    TruncatedSeries big = substitute2(F, f, g);
    TruncatedSeries red = series_reduce(big, E);
    TruncatedSeries small = substitute2(biv_reduce(F, E), series_reduce(f, E), series_reduce(g, E));
    CHECK(series_sub(red, small).zero_mod_prec());
}

TEST_CASE("series serialization round trip")
{
    CtxPtr E = with_series_vars(make_finite_field(3, 2), {{"u", 5}});
    Rng rng(23);
    TruncatedSeries f = testutil::random_series(rng, E, 7, true);
    auto j = series_to_json(f);
    TruncatedSeries back = series_from_json(j, E);
    CHECK(series_sub(f, back).zero_mod_prec());
    CHECK(series_to_json(back) == j);
}
