#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fglab/json_io.hpp"
#include "fglab/ring.hpp"
#include "util.hpp"

using namespace fglab;
using testutil::Rng;

TEST_CASE("finite field construction uses the published polynomial")
{
    CtxPtr F9 = make_finite_field(3, 2);
    CHECK(F9->scalar.h == std::vector<int64_t>{2, 2});
    CHECK(F9->scalar.pk == 3);
    CHECK_THROWS(make_finite_field(4, 1));
    CHECK_THROWS(make_witt(3, 2, 0));
}

TEST_CASE("stored polynomials are primitive and norm-compatible")
{
    // generator order p^m - 1, and the norm to each stored subfield is a root
    // of that subfield's polynomial
    for (auto [p, m] : {std::pair<int64_t, int>{3, 2}, {3, 3}, {3, 6}, {2, 2}, {2, 3}}) {
        ScalarRing sr(p, 1, m);
        int64_t q = pow_int(p, m) - 1;
        Scalar g = sr.gen();
        CHECK(sr.pow(g, q) == sr.one());
        for (int64_t f = 2; f <= q; ++f)
            if (q % f == 0 && is_prime_int(f))
                CHECK(sr.pow(g, q / f) != sr.one());
        for (int d = 1; d < m; ++d) {
            if (m % d)
                continue;
            Scalar nrm = sr.pow(g, q / (pow_int(p, d) - 1));
            auto hd = conway_polynomial(p, d);
            Scalar acc = sr.one();
            for (int i = d - 1; i >= 0; --i)
                acc = sr.add(sr.mul(acc, nrm), sr.from_int(hd[i]));
            CHECK(sr.is_zero(acc));
        }
    }
}

TEST_CASE("frobenius on the finite field and its Witt lift")
{
    CtxPtr F9 = make_finite_field(3, 2);
    auto const &sr = F9->scalar;
    Scalar g = sr.gen();
    CHECK(sr.frobenius(g) == sr.pow(g, 3));
    CHECK(sr.frobenius(sr.from_int(2)) == sr.from_int(2)); // prime field fixed
    CHECK(sr.frobenius(sr.frobenius(g)) == g);             // order 2

    CtxPtr W = make_witt(3, 2, 3);
    auto const &wr = W->scalar;
    // Frobenius is a ring homomorphism of order m
    Rng rng(7);
    for (int t = 0; t < 50; ++t) {
        Scalar a = testutil::random_scalar(rng, wr), b = testutil::random_scalar(rng, wr);
        CHECK(wr.frobenius(wr.mul(a, b)) == wr.mul(wr.frobenius(a), wr.frobenius(b)));
        CHECK(wr.frobenius(wr.add(a, b)) == wr.add(wr.frobenius(a), wr.frobenius(b)));
        CHECK(wr.frobenius(a, 2) == a);
    }
}

TEST_CASE("teichmuller lift is the Frobenius-power fixed point")
{
    CtxPtr F9 = make_finite_field(3, 2);
    CtxPtr W = make_witt(3, 2, 3);
    auto const &wr = W->scalar;
    CHECK(wr.teichmuller(F9->scalar.one()) == wr.one());
    CHECK(wr.teichmuller(F9->scalar.zero()) == wr.zero());
    Scalar tg = wr.teichmuller(F9->scalar.gen());
    // oracle: iterate y -> y^9 mod 27 from the naive lift until stable
    Scalar y = F9->scalar.gen();
    for (int i = 0; i < 6; ++i)
        y = wr.pow(y, 9);
    CHECK(tg == y);
    CHECK(wr.pow(tg, 9) == tg);
    CHECK(wr.digits(tg, 0, 1) == F9->scalar.gen());
    // multiplicative within precision, and fixed by frobenius^2
    Rng rng(9);
    for (int t = 0; t < 20; ++t) {
        Scalar a = F9->scalar.from_coeffs({rng.below(3), rng.below(3)});
        Scalar b = F9->scalar.from_coeffs({rng.below(3), rng.below(3)});
        CHECK(wr.mul(wr.teichmuller(a), wr.teichmuller(b)) ==
              wr.teichmuller(F9->scalar.mul(a, b)));
    }
    CHECK(wr.frobenius(tg, 2) == tg);
}

TEST_CASE("ring axioms hold coefficientwise on seeded triples")
{
    std::vector<CtxPtr> ctxs;
    ctxs.push_back(make_finite_field(3, 2));
    ctxs.push_back(make_witt(3, 2, 3));
    ctxs.push_back(with_series_vars(make_finite_field(3, 2), {{"u1", 20}}));
    ctxs.push_back(with_laurent_var(make_finite_field(3, 2), "u1", 24));
    ctxs.push_back(with_series_vars(make_witt(3, 2, 4), {{"u1", 12}}));
    for (auto const &ctx : ctxs) {
        Rng rng(42);
        for (int t = 0; t < 200; ++t) {
            RingElement a = testutil::random_element(rng, ctx);
            RingElement b = testutil::random_element(rng, ctx);
            RingElement c = testutil::random_element(rng, ctx);
            CHECK(ring_equal(ring_add(ring_add(a, b), c), ring_add(a, ring_add(b, c))));
            CHECK(ring_equal(ring_mul(a, ring_add(b, c)),
                             ring_add(ring_mul(a, b), ring_mul(a, c))));
            CHECK(ring_equal(ring_mul(a, b), ring_mul(b, a)));
        }
    }
}

TEST_CASE("laurent window arithmetic and inversion")
{
    CtxPtr M = with_laurent_var(make_finite_field(3, 2), "u", 24);
    RingElement u = ring_var(M, "u");
    RingElement uinv = ring_inverse(u);
    CHECK(ring_equal(ring_mul(u, uinv), ring_one(M)));
    // a unit with a genuine tail
    RingElement z = ring_add(u, ring_mul(u, ring_mul(u, u)));
    RingElement zi = ring_inverse(z);
    CHECK(ring_equal(ring_mul(z, zi), ring_one(M)));
    // precision tags shrink under division by u
    RingElement x = ring_add(ring_one(M), u);
    RingElement y = ring_mul(x, uinv);
    CHECK(y.prec.u_abs < x.prec.u_abs);
    // window underflow is loud
    RingElement deep = ring_monomial(M, ExpVec{(int16_t)-24}, M->scalar.one());
    CHECK_THROWS(ring_mul(deep, uinv));
}

TEST_CASE("reduction along declared quotients")
{
    CtxPtr W = make_witt(3, 2, 3);
    CtxPtr Wu = with_series_vars(W, {{"u1", 10}});
    CtxPtr F9 = make_finite_field(3, 2);
    CtxPtr E = with_series_vars(F9, {{"u1", 10}});
    // 3 + u1 reduces to u1
    RingElement x = ring_add(ring_int(Wu, 3), ring_var(Wu, "u1"));
    CHECK(ring_equal(reduce_mod_ideal(x, E), ring_var(E, "u1")));
    // teichmuller reduces to the residue
    RingElement tg = teichmuller_lift(ring_const(F9, F9->scalar.gen()), W);
    CHECK(ring_equal(reduce_mod_ideal(tg, F9), ring_const(F9, F9->scalar.gen())));
    // generators not in the ideal survive
    CtxPtr Wuu = with_series_vars(W, {{"u1", 6}, {"u2", 6}});
    CtxPtr E2 = with_series_vars(F9, {{"u2", 6}});
    CHECK(ring_equal(reduce_mod_ideal(ring_var(Wuu, "u2"), E2), ring_var(E2, "u2")));
    CHECK(is_zero_mod_prec(reduce_mod_ideal(ring_var(Wuu, "u1"), E2)));
    // composition of reductions equals reduction along the composite
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
        RingElement a = testutil::random_element(rng, Wuu);
        CHECK(ring_equal(reduce_mod_ideal(reduce_mod_ideal(a, with_series_vars(F9, {{"u1", 6}, {"u2", 6}})), E2),
                         reduce_mod_ideal(a, E2)));
    }
    // reduction is a ring homomorphism and commutes with frobenius
    for (int t = 0; t < 50; ++t) {
        RingElement a = testutil::random_element(rng, W), b = testutil::random_element(rng, W);
        CHECK(ring_equal(reduce_mod_ideal(ring_mul(a, b), F9),
                         ring_mul(reduce_mod_ideal(a, F9), reduce_mod_ideal(b, F9))));
        CHECK(ring_equal(reduce_mod_ideal(ring_frobenius(a), F9),
                         ring_frobenius(reduce_mod_ideal(a, F9))));
    }
    // errors
    CHECK_THROWS(reduce_mod_ideal(ring_one(E), W)); // not a quotient (k grows)
}

TEST_CASE("quotient extension arithmetic")
{
    CtxPtr M = with_laurent_var(make_finite_field(3, 2), "u", 24);
    // adjoin y with y^2 = u
    std::vector<RingElement> def{ring_neg(ring_var(M, "u")), ring_zero(M)};
    CtxPtr L0 = extend_algebraic(M, "y", def, 2, 1);
    RingElement y = ring_var(L0, "y");
    CHECK(ring_equal(ring_mul(y, y), ring_var(L0, "u")));
    RingElement yi = ring_inverse(y);
    CHECK(ring_equal(ring_mul(y, yi), ring_one(L0)));
    // evaluate the defining polynomial at the generator: zero
    RingElement q = ring_sub(ring_mul(y, y), ring_var(L0, "u"));
    CHECK(is_zero_mod_prec(q));
    // random unit inversion
    Rng rng(11);
    for (int t = 0; t < 10; ++t) {
        RingElement z = testutil::random_element(rng, L0, 5, 2);
        if (z.stored_zero())
            continue;
        RingElement zi = ring_inverse(z);
        CHECK(ring_equal(ring_mul(z, zi), ring_one(L0)));
    }
}

TEST_CASE("ring maps given on generators")
{
    CtxPtr E = with_series_vars(make_finite_field(3, 2), {{"u", 12}});
    RingHom h = RingHom::identity(E);
    h.images["u"] = ring_add(ring_var(E, "u"), ring_mul(ring_var(E, "u"), ring_var(E, "u")));
    RingElement x = ring_add(ring_one(E), ring_var(E, "u"));
    RingElement hx = h.apply(x);
    RingElement want = ring_add(ring_add(ring_one(E), ring_var(E, "u")),
                                ring_mul(ring_var(E, "u"), ring_var(E, "u")));
    CHECK(ring_equal(hx, want));
    // frobenius part twists scalars
    RingHom fr = RingHom::identity(E);
    fr.frob_power = 1;
    RingElement g = ring_const(E, E->scalar.gen());
    CHECK(ring_equal(fr.apply(g), ring_const(E, E->scalar.pow(E->scalar.gen(), 3))));
    // inversion round trip
    RingHom hinv = invert_ring_map(h);
    RingHom both = h.compose_after(hinv);
    CHECK(hom_equal_on_generators(both, RingHom::identity(E)));
}

TEST_CASE("context and element serialization round trip")
{
    CtxPtr Wu = with_series_vars(make_witt(3, 2, 3), {{"u1", 8}});
    Rng rng(3);
    for (int t = 0; t < 10; ++t) {
        RingElement a = testutil::random_element(rng, Wu);
        auto j = element_to_json(a);
        RingElement back = element_from_json(j, Wu);
        CHECK(ring_equal(a, back));
        CHECK(element_to_json(back) == j);
    }
    auto cj = context_to_json(*Wu);
    CHECK(cj["p"] == 3);
    CHECK(cj["vars"][0]["name"] == "u1");
}
