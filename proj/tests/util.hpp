#pragma once

// shared helpers for the test suites: deterministic rng and random elements

#include "fglab/ring.hpp"
#include "fglab/series.hpp"

#include <cstdint>

namespace testutil {

using namespace fglab;

struct Rng {
    uint64_t state;
    explicit Rng(uint64_t seed) : state(seed + 0x9e3779b97f4a7c15ULL) {}

    uint64_t next()
    {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    int64_t below(int64_t n) { return (int64_t)(next() % (uint64_t)n); }
};

inline Scalar random_scalar(Rng &rng, ScalarRing const &sr)
{
    Scalar s{};
    for (int i = 0; i < sr.m; ++i)
        s.c[i] = rng.below(sr.pk);
    return s;
}

inline RingElement random_element(Rng &rng, CtxPtr const &ctx, int terms = 4, int maxexp = 3)
{
    RingElement r = ring_zero(ctx);
    for (int t = 0; t < terms; ++t) {
        ExpVec e{};
        for (int i = 0; i < ctx->nvars(); ++i) {
            auto const &v = ctx->vars[i];
            int lo = v.kind == VarKind::Laurent ? -1 : 0;
            int hi = v.kind == VarKind::Algebraic ? v.bound - 1 : maxexp;
            e[i] = (int16_t)(lo + rng.below(hi - lo + 1));
        }
        r = ring_add(r, ring_monomial(ctx, e, random_scalar(rng, ctx->scalar)));
    }
    return r;
}

inline TruncatedSeries random_series(Rng &rng, CtxPtr const &ctx, int bound, bool unit_linear,
                                     int coeff_terms = 2)
{
    TruncatedSeries f(ctx, bound);
    for (int d = 1; d <= bound; ++d)
        if (rng.below(2) == 0)
            f.set(d, random_element(rng, ctx, coeff_terms, 2));
    if (unit_linear) {
        RingElement lin = ring_one(ctx);
        f.set(1, lin);
    }
    return f;
}

} // namespace testutil
