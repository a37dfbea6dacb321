#pragma once

// Formal group laws: axioms, formal sums, p-series, p-typical construction
// from a prescribed p-series, and the homomorphism calculus of pairs (f, a)
// with a ring map a from the target coefficient ring to the source one.

#include "report.hpp"
#include "series.hpp"

#include <memory>

namespace fglab {

struct FormalGroupLaw;
using FglPtr = std::shared_ptr<const FormalGroupLaw>;

struct FormalGroupLaw {
    BivariateSeries F;
    TruncatedSeries pseries;             // cached p-fold formal sum of X
    TruncatedSeries minus_series;        // cached [-1](X)
    std::vector<RingElement> ptyp_spec;  // a_1, a_2, ... when built from a p-series spec
    int residue_height = -1;             // height of the reduction mod the maximal ideal

    CtxPtr ctx() const { return F.ctx; }
    int bound() const { return F.bound; }
};

// F(a, b) for univariate arguments
inline TruncatedSeries fgl_add(FormalGroupLaw const &G, TruncatedSeries const &a,
                               TruncatedSeries const &b)
{
    return substitute2(G.F, a, b);
}

// left-associated formal sum over F; empty list gives 0
inline TruncatedSeries formal_sum(FormalGroupLaw const &G, std::vector<TruncatedSeries> const &terms)
{
    if (terms.empty())
        return TruncatedSeries(G.ctx(), G.bound());
    TruncatedSeries acc = terms[0];
    for (size_t i = 1; i < terms.size(); ++i)
        acc = substitute2(G.F, acc, terms[i]);
    return acc;
}

namespace detail {

inline TruncatedSeries compute_minus(BivariateSeries const &F, int D)
{
    // solve F(X, i(X)) = 0 degree by degree; the Y-partial at the origin is 1
    TruncatedSeries x = series_x(F.ctx, D);
    TruncatedSeries inv(F.ctx, D);
    inv.set(1, ring_int(F.ctx, -1));
    for (int d = 2; d <= D; ++d) {
        TruncatedSeries err = substitute2(F, x, inv);
        inv.set(d, ring_sub(inv.coeff(d), err.coeff(d)));
    }
    return inv;
}

inline TruncatedSeries compute_pseries(BivariateSeries const &F, int64_t p, int D)
{
    TruncatedSeries x = series_x(F.ctx, D);
    TruncatedSeries acc(F.ctx, D);
    for (int64_t i = 0; i < p; ++i)
        acc = i == 0 ? x : substitute2(F, acc, x);
    return acc;
}

inline int residue_height_of(TruncatedSeries const &pseries, int64_t p)
{
    // lowest p-power degree whose coefficient is a unit modulo the maximal
    // ideal (p, all variables)
    auto const &ctx = *pseries.ctx;
    for (int i = 0, d = 1; d <= pseries.bound; ++i, d *= (int)p) {
        RingElement const &c = pseries.coeff(d);
        auto it = c.coeffs.find(ExpVec{});
        if (it != c.coeffs.end() && c.pden == 0 && ctx.scalar.is_unit(it->second))
            return i;
    }
    return -1;
}

} // namespace detail

inline FglPtr make_fgl(BivariateSeries F, std::vector<RingElement> spec = {})
{
    auto law = std::make_shared<FormalGroupLaw>();
    int64_t p = F.ctx->scalar.p;
    law->F = std::move(F);
    law->pseries = detail::compute_pseries(law->F, p, law->F.bound);
    law->minus_series = detail::compute_minus(law->F, law->F.bound);
    law->ptyp_spec = std::move(spec);
    law->residue_height = detail::residue_height_of(law->pseries, p);
    return law;
}

inline TruncatedSeries p_series(FormalGroupLaw const &G) { return G.pseries; }

// ---------------------------------------------------------------------------
// axiom checks

inline std::string monomial_name(int i, int j)
{
    return "X^" + std::to_string(i) + " Y^" + std::to_string(j);
}

inline VerifyReport check_fgl_axioms(FormalGroupLaw const &G)
{
    VerifyReport rep;
    auto const &F = G.F;
    int D = F.bound;
    // unit: F(X, 0) = X and F(0, Y) = Y
    {
        TruncatedSeries xsec(F.ctx, D), ysec(F.ctx, D);
        for (auto const &[ij, v] : F.t) {
            if (ij.second == 0)
                xsec.set(ij.first, v);
            if (ij.first == 0)
                ysec.set(ij.second, v);
        }
        TruncatedSeries dx = series_sub(xsec, series_x(F.ctx, D));
        TruncatedSeries dy = series_sub(ysec, series_x(F.ctx, D));
        bool ok = dx.zero_mod_prec() && dy.zero_mod_prec();
        std::string where;
        if (!ok) {
            int d = dx.lowest_degree() >= 0 ? dx.lowest_degree() : dy.lowest_degree();
            where = dx.lowest_degree() >= 0 ? monomial_name(d, 0) : monomial_name(0, d);
        }
        rep.add("unit", ok, where);
    }
    // commutativity
    {
        BivariateSeries d = biv_sub(F, biv_swap(F));
        auto bad = d.first_nonzero();
        rep.add("commutativity", !bad, bad ? monomial_name(bad->first, bad->second) : "");
    }
    // associativity
    {
        TriSeries X = tri_var(F.ctx, D, 0), Y = tri_var(F.ctx, D, 1), Z = tri_var(F.ctx, D, 2);
        TriSeries XY = substitute2_tri(F, X, Y);
        TriSeries YZ = substitute2_tri(F, Y, Z);
        TriSeries lhs = substitute2_tri(F, XY, Z);
        TriSeries rhs = substitute2_tri(F, X, YZ);
        TriSeries d = tri_sub(lhs, rhs);
        bool ok = true;
        std::string where;
        for (auto const &[e, v] : d.t)
            if (!is_zero_mod_prec(v)) {
                ok = false;
                where = "X^" + std::to_string(e[0]) + " Y^" + std::to_string(e[1]) + " Z^" +
                        std::to_string(e[2]);
                break;
            }
        rep.add("associativity", ok, where);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// p-typical construction through the logarithm in a torsion-free cover

// log coefficients l_0..l_K from p-series coefficients a_1, a_2, ... over a
// torsion-free (high p-adic precision) context:
//   (p - p^(p^k)) l_k = sum_{i=1..k} l_{k-i} a_i^(p^(k-i))
inline std::vector<RingElement> araki_log(std::vector<RingElement> const &a, CtxPtr const &cover,
                                          int depth)
{
    auto const &sr = cover->scalar;
    int64_t p = sr.p;
    std::vector<RingElement> l;
    l.push_back(ring_one(cover));
    for (int k = 1; k <= depth; ++k) {
        RingElement num = ring_zero(cover);
        for (int i = 1; i <= k; ++i) {
            if (i > (int)a.size() || a[i - 1].stored_zero())
                continue;
            int64_t e = 1;
            for (int t = 0; t < k - i; ++t)
                e *= p;
            num = ring_add(num, ring_mul(l[k - i], ring_pow(a[i - 1], e)));
        }
        // p - p^(p^k) = p (1 - p^(p^k - 1)); the second factor is a unit
        int64_t pk = 1;
        for (int t = 0; t < k; ++t)
            pk *= p;
        Scalar unit = sr.one();
        if (pk - 1 < sr.k) {
            Scalar tail = sr.shift_up(sr.one(), (int)(pk - 1));
            unit = sr.sub(unit, tail);
        }
        RingElement lk = ring_scale(num, sr.inverse(unit));
        lk = ring_div_p(lk, 1);
        l.push_back(lk);
    }
    return l;
}

inline int log_depth_for(int64_t p, int D)
{
    int k = 0;
    int64_t q = p;
    while (q <= D) {
        ++k;
        q *= p;
    }
    return k;
}

inline int cover_headroom(int64_t p, int D)
{
    // p-adic valuation of D! plus slack; certified precision is tracked per
    // element, this only sizes the working modulus
    int v = 0;
    for (int64_t q = p; q <= D; q *= p)
        v += D / (int)q;
    return v + 6;
}

inline CtxPtr torsion_free_cover(CtxPtr const &target, int D)
{
    int N = target->scalar.k + cover_headroom(target->scalar.p, D);
    // largest N with p^N inside the 62-bit scalar representation
    int maxN = 0;
    for (int64_t q = 1; q <= ((int64_t)1 << 61) / target->scalar.p; ++maxN)
        q *= target->scalar.p;
    if (N > maxN)
        throw std::domain_error("torsion-free cover exceeds the scalar word size");
    auto ctx = std::make_shared<RingContext>(*target);
    ctx->scalar = ScalarRing(target->scalar.p, N, target->scalar.m);
    ctx->label = target->label + " cover";
    ctx->residue = nullptr;
    return ctx;
}

// a law together with its representative over the torsion-free cover
struct CoveredLaw {
    FglPtr law;
    FglPtr cover;
};

// the law over `target` whose p-series is the formal sum
//   pX +_F a_1 X^p +_F a_2 X^(p^2) +_F ...
// built through the logarithm in the torsion-free cover and verified in the
// target before returning
inline CoveredLaw fgl_from_p_typical_spec_covered(std::vector<RingElement> const &a,
                                                  CtxPtr const &target, int D)
{
    int64_t p = target->scalar.p;
    CtxPtr cover = torsion_free_cover(target, D);
    int K = log_depth_for(p, D);
    std::vector<RingElement> alift;
    for (auto const &ai : a)
        alift.push_back(lift_naive(ai, cover));
    std::vector<RingElement> l = araki_log(alift, cover, K);
    TruncatedSeries log(cover, D);
    for (int k = 0, d = 1; k <= K && d <= D; ++k, d *= (int)p)
        log.set(d, l[k]);
    TruncatedSeries exp = revert(log);
    BivariateSeries S(cover, D);
    for (int k = 0, d = 1; k <= K && d <= D; ++k, d *= (int)p) {
        S.add_to(d, 0, l[k]);
        S.add_to(0, d, l[k]);
    }
    BivariateSeries Fc0 = compose_uni_biv(exp, S);
    BivariateSeries Ft(target, D);
    BivariateSeries Fc(cover, D);
    for (auto const &[ij, v] : Fc0.t) {
        RingElement vv = v;
        detail::normalize_pden(vv);
        if (vv.pden != 0)
            throw std::domain_error("p-typical construction: non-integral coefficient");
        if (vv.prec.p_abs < target->scalar.k)
            throw std::domain_error("p-typical construction: precision exhausted");
        Ft.add_to(ij.first, ij.second, reduce_mod_ideal(vv, target));
        Fc.add_to(ij.first, ij.second, vv);
    }
    std::vector<RingElement> spec;
    for (auto const &ai : a)
        spec.push_back(ai);
    FglPtr law = make_fgl(std::move(Ft), std::move(spec));
    // executable identity: the cached p-series equals the prescribed formal sum
    std::vector<TruncatedSeries> terms;
    terms.push_back(series_scale(series_x(target, D), ring_int(target, p)));
    for (size_t i = 0; i < a.size(); ++i) {
        int64_t d = 1;
        for (size_t t = 0; t <= i; ++t)
            d *= p;
        if (d > D)
            break;
        terms.push_back(series_monomial(target, D, (int)d, a[i]));
    }
    TruncatedSeries want = formal_sum(*law, terms);
    TruncatedSeries diff = series_sub(law->pseries, want);
    if (!diff.zero_mod_prec())
        throw std::logic_error("p-typical construction: p-series does not match the spec");
    return {law, make_fgl(std::move(Fc))};
}

inline FglPtr fgl_from_p_typical_spec(std::vector<RingElement> const &a, CtxPtr const &target,
                                      int D)
{
    return fgl_from_p_typical_spec_covered(a, target, D).law;
}

// the p-typical law over a characteristic-p field with p-series X^(p^n)
inline FglPtr honda_fgl(int64_t p, int n, CtxPtr const &field, int D)
{
    if (field->scalar.p != p || field->scalar.k != 1)
        throw std::invalid_argument("honda_fgl: field characteristic mismatch");
    std::vector<RingElement> a;
    for (int i = 1; i < n; ++i)
        a.push_back(ring_zero(field));
    a.push_back(ring_one(field));
    FglPtr law = fgl_from_p_typical_spec(a, field, D);
    int64_t q = 1;
    for (int i = 0; i < n; ++i)
        q *= p;
    if (q <= D) {
        TruncatedSeries want = series_monomial(field, D, (int)q, ring_one(field));
        if (!series_sub(law->pseries, want).zero_mod_prec())
            throw std::logic_error("honda_fgl: p-series is not X^(p^n)");
    }
    return law;
}

// ---------------------------------------------------------------------------
// characteristic-p Frobenius twists of series

// f^(p^j) for a series over a characteristic-p context: coefficients are
// raised to the p^j-th power and degrees multiplied by p^j
inline TruncatedSeries series_frobenius_power(TruncatedSeries const &f, int j)
{
    if (f.ctx->scalar.k != 1)
        throw std::invalid_argument("series_frobenius_power: needs characteristic p");
    int64_t q = 1;
    for (int t = 0; t < j; ++t)
        q *= f.ctx->scalar.p;
    TruncatedSeries r(f.ctx, f.bound);
    for (int d = 0; d <= f.bound; ++d) {
        if (f.c[d].stored_zero() || (int64_t)d * q > f.bound)
            continue;
        r.set((int)(d * q), ring_pow(f.c[d], q));
    }
    return r;
}

// ---------------------------------------------------------------------------
// homomorphism pairs

struct FglHom {
    TruncatedSeries f; // series over the source coefficient ring, f(0) = 0
    RingHom alpha;     // target coefficient ring -> source coefficient ring
    FglPtr src;
    FglPtr dst;
};

// the base change a^*F applied coefficientwise
inline BivariateSeries pullback_law(RingHom const &alpha, BivariateSeries const &F)
{
    return biv_map(
        F, [&](RingElement const &v) { return alpha.apply(v); }, alpha.dst);
}

// F(f(X), g(Y)) as a bivariate series
inline BivariateSeries substitute2_biv(BivariateSeries const &F, TruncatedSeries const &fx,
                                       TruncatedSeries const &fy)
{
    CtxPtr big = fx.ctx;
    int D = std::min({F.bound, fx.bound, fy.bound});
    int imax = 0, jmax = 0;
    for (auto const &[ij, v] : F.t) {
        imax = std::max(imax, ij.first);
        jmax = std::max(jmax, ij.second);
    }
    std::vector<TruncatedSeries> xp{series_monomial(big, D, 0, ring_one(big))};
    for (int i = 1; i <= std::min(imax, D); ++i)
        xp.push_back(series_mul(xp.back(), series_truncate(fx, D)));
    std::vector<TruncatedSeries> yp{series_monomial(big, D, 0, ring_one(big))};
    for (int j = 1; j <= std::min(jmax, D); ++j)
        yp.push_back(series_mul(yp.back(), series_truncate(fy, D)));
    BivariateSeries r(big, D);
    for (auto const &[ij, v] : F.t) {
        if (v.stored_zero() || ij.first > D || ij.second > D)
            continue;
        RingElement cv = same_ctx(F.ctx, big) ? v : embed(v, big);
        // outer product of the two univariate powers
        for (int dx = ij.first; dx <= D; ++dx) {
            if (xp[ij.first].c[dx].stored_zero())
                continue;
            for (int dy = ij.second; dx + dy <= D; ++dy) {
                if (yp[ij.second].c[dy].stored_zero())
                    continue;
                r.add_to(dx, dy, ring_mul(cv, ring_mul(xp[ij.first].c[dx], yp[ij.second].c[dy])));
            }
        }
    }
    return r;
}

// the defect f(F1(X,Y)) - (a^*F2)(f(X), f(Y)); zero mod precision iff (f, a)
// is a homomorphism within bound
inline BivariateSeries hom_defect(FglHom const &h)
{
    BivariateSeries lhs = compose_uni_biv(h.f, h.src->F);
    BivariateSeries F2a = pullback_law(h.alpha, h.dst->F);
    BivariateSeries rhs = substitute2_biv(F2a, h.f, h.f);
    return biv_sub(lhs, biv_embed(rhs, lhs.ctx));
}

inline VerifyReport verify_hom(FglHom const &h)
{
    VerifyReport rep;
    BivariateSeries d = hom_defect(h);
    auto bad = d.first_nonzero();
    rep.add("hom condition", !bad, bad ? monomial_name(bad->first, bad->second) : "");
    return rep;
}

inline FglHom identity_hom(FglPtr const &G)
{
    FglHom h;
    h.f = series_x(G->ctx(), G->bound());
    h.alpha = RingHom::identity(G->ctx());
    h.src = G;
    h.dst = G;
    return h;
}

// (f1, a1): (F1,R1) -> (F2,R2) followed by (f2, a2): (F2,R2) -> (F3,R3)
// gives (a1^* f2 o f1, a1 o a2)
inline FglHom compose_hom(FglHom const &h1, FglHom const &h2)
{
    if (h1.dst.get() != h2.src.get() && !same_ctx(h1.dst->ctx(), h2.src->ctx()))
        throw std::invalid_argument("compose_hom: chain mismatch");
    FglHom r;
    TruncatedSeries f2a = series_map(h2.f, [&](RingElement const &v) { return h1.alpha.apply(v); });
    f2a.ctx = h1.alpha.dst;
    r.f = compose(f2a, h1.f);
    r.alpha = h1.alpha.compose_after(h2.alpha);
    r.src = h1.src;
    r.dst = h2.dst;
    return r;
}

// inverse of a ring map given on generators; handles the Frobenius part and
// variable images with invertible linear behaviour
inline RingHom invert_ring_map(RingHom const &h)
{
    RingHom inv(h.dst, h.src);
    inv.frob_power = -h.frob_power;
    bool trivial = true;
    for (auto const &v : h.src->vars) {
        RingElement img = h.image(v.name);
        RingElement want = ring_var(h.src, v.name);
        if (!ring_equal(img, want))
            trivial = false;
    }
    if (trivial) {
        for (auto const &v : h.src->vars)
            inv.images.emplace(v.name, ring_var(h.src, v.name));
        return inv;
    }
    if (!same_ctx(h.src, h.dst))
        throw std::domain_error("invert_ring_map: only automorphisms can be inverted");
    // Newton on the hom level: B <- B - B(defect)
    for (auto const &v : h.src->vars)
        inv.images.emplace(v.name, ring_var(h.src, v.name));
    // seed the single-variable case through series reversion
    if (h.src->nvars() == 1) {
        auto const &v = h.src->vars[0];
        RingElement img = h.image(v.name);
        int D = v.bound;
        TruncatedSeries g(h.src, D, v.name);
        bool seriesLike = true;
        for (auto const &[e, s] : img.coeffs) {
            if (e[0] < 1 || e[0] > D) {
                seriesLike = false;
                break;
            }
            Scalar sv = img.pden ? s : s;
            g.set(e[0], ring_monomial(h.src, ExpVec{}, sv));
        }
        if (seriesLike && !g.coeff(1).stored_zero() && img.pden == 0) {
            TruncatedSeries ginv = revert(g);
            RingElement w = ring_zero(h.src);
            for (int d = 1; d <= D; ++d) {
                if (ginv.c[d].stored_zero())
                    continue;
                auto it = ginv.c[d].coeffs.find(ExpVec{});
                if (it == ginv.c[d].coeffs.end())
                    continue;
                Scalar tw = h.src->scalar.frobenius(it->second, -h.frob_power);
                ExpVec e{};
                e[0] = (int16_t)d;
                w = ring_add(w, ring_monomial(h.src, e, tw));
            }
            inv.images[v.name] = w;
        }
    }
    for (int it = 0; it < 40; ++it) {
        bool done = true;
        RingHom comp = h.compose_after(inv); // should be identity on dst ... careful below
        // we want h(inv(x)) = x, i.e. compose inv then h
        for (auto const &v : h.dst->vars) {
            RingElement defect = ring_sub(comp.image(v.name), ring_var(h.dst, v.name));
            if (!is_zero_mod_prec(defect)) {
                done = false;
                inv.images[v.name] = ring_sub(inv.image(v.name), inv.apply(defect));
            }
        }
        if (done)
            return inv;
    }
    throw std::domain_error("invert_ring_map: iteration did not converge");
}

inline FglHom invert_hom(FglHom const &h)
{
    FglHom r;
    r.src = h.dst;
    r.dst = h.src;
    RingHom ainv = invert_ring_map(h.alpha);
    // f: F1 -> a^*F2 over R1; the inverse series lives over R2 and is
    // obtained by reverting f and moving coefficients through a^{-1}
    TruncatedSeries finv = revert(h.f);
    r.f = series_map(finv, [&](RingElement const &v) { return ainv.apply(v); });
    r.f.ctx = ainv.dst;
    r.alpha = ainv;
    return r;
}

// ---------------------------------------------------------------------------
// p-typical coordinates: the unique c_i with f = sum^G c_i X^(p^i)

inline std::vector<RingElement> p_typical_coordinates(TruncatedSeries const &f,
                                                      FormalGroupLaw const &G,
                                                      int kbase = INT_MAX)
{
    // residual checks ignore digits beyond p^kbase; covers carry certified
    // digits that are invisible at the base precision
    auto visible = [&](RingElement const &x) {
        if (kbase == INT_MAX)
            return !is_zero_mod_prec(x);
        auto const &sr = x.ctx->scalar;
        int li = x.ctx->laurent_index;
        for (auto const &[e, s] : x.coeffs) {
            if (li >= 0 && e[li] >= x.prec.u_abs)
                continue;
            int need = std::min(x.prec.p_abs, kbase) + x.pden;
            if (sr.valuation(s) < std::min(need, sr.k))
                return true;
        }
        return false;
    };
    if (visible(f.coeff(0)))
        throw std::invalid_argument("p_typical_coordinates: nonzero constant term");
    int64_t p = f.ctx->scalar.p;
    int D = f.bound;
    CtxPtr big = f.ctx;
    TruncatedSeries minus = series_embed(series_truncate(G.minus_series, D), big);
    std::vector<RingElement> coords;
    TruncatedSeries r = f;
    int64_t next = 1;
    while (next <= D) {
        // all degrees strictly below the next p-power must have been consumed
        for (int d = 1; d < next; ++d)
            if (visible(r.coeff(d)))
                throw std::domain_error(
                    "p_typical_coordinates: residual term at non-p-power degree " +
                    std::to_string(d));
        RingElement ci = r.coeff((int)next);
        coords.push_back(ci);
        if (!is_zero_mod_prec(ci)) {
            TruncatedSeries term = series_monomial(big, D, (int)next, ci);
            TruncatedSeries mterm = compose(minus, term);
            r = substitute2(G.F, r, mterm);
        }
        next *= p;
    }
    for (int d = 1; d <= D; ++d)
        if (visible(r.coeff(d)))
            throw std::domain_error("p_typical_coordinates: residual term at degree " +
                                    std::to_string(d));
    while (!coords.empty() && is_zero_mod_prec(coords.back()))
        coords.pop_back();
    return coords;
}

// reassemble a series from p-typical coordinates over G
inline TruncatedSeries from_p_typical_coordinates(std::vector<RingElement> const &coords,
                                                  FormalGroupLaw const &G, CtxPtr const &big,
                                                  int D)
{
    int64_t p = big->scalar.p;
    std::vector<TruncatedSeries> terms;
    int64_t d = 1;
    for (auto const &c : coords) {
        if (d <= D)
            terms.push_back(series_monomial(big, D, (int)d, c));
        d *= p;
    }
    if (terms.empty())
        return TruncatedSeries(big, D);
    TruncatedSeries acc = terms[0];
    for (size_t i = 1; i < terms.size(); ++i)
        acc = substitute2(G.F, acc, terms[i]);
    return acc;
}

} // namespace fglab
