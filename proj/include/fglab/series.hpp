#pragma once

// Truncated univariate and bivariate power series over a RingContext.
// A bound of D means the series is known modulo degree D+1 (total degree for
// the bivariate case); arithmetic never claims degrees beyond the minimum of
// the operand bounds.

#include "ring.hpp"

#include <functional>

namespace fglab {

struct TruncatedSeries {
    CtxPtr ctx;
    std::string var = "X";
    int bound = 0;
    std::vector<RingElement> c; // c[d] = coefficient of X^d, d = 0..bound

    TruncatedSeries() = default;
    TruncatedSeries(CtxPtr ctx_, int bound_, std::string var_ = "X")
        : ctx(std::move(ctx_)), var(std::move(var_)), bound(bound_)
    {
        c.assign(bound + 1, ring_zero(ctx));
    }

    RingElement coeff(int d) const { return d >= 0 && d <= bound ? c[d] : ring_zero(ctx); }

    void set(int d, RingElement v)
    {
        if (d < 0 || d > bound)
            return;
        c[d] = std::move(v);
    }

    bool zero_mod_prec() const
    {
        for (auto const &x : c)
            if (!is_zero_mod_prec(x))
                return false;
        return true;
    }

    int lowest_degree() const
    {
        for (int d = 0; d <= bound; ++d)
            if (!is_zero_mod_prec(c[d]))
                return d;
        return -1;
    }
};

inline TruncatedSeries series_x(CtxPtr const &ctx, int bound)
{
    TruncatedSeries f(ctx, bound);
    f.set(1, ring_one(ctx));
    return f;
}

inline TruncatedSeries series_monomial(CtxPtr const &ctx, int bound, int d, RingElement v)
{
    TruncatedSeries f(ctx, bound);
    f.set(d, std::move(v));
    return f;
}

inline TruncatedSeries series_truncate(TruncatedSeries const &f, int bound)
{
    TruncatedSeries r(f.ctx, std::min(bound, f.bound));
    for (int d = 0; d <= r.bound; ++d)
        r.c[d] = f.c[d];
    return r;
}

inline TruncatedSeries series_add(TruncatedSeries const &a, TruncatedSeries const &b)
{
    TruncatedSeries r(a.ctx, std::min(a.bound, b.bound));
    for (int d = 0; d <= r.bound; ++d)
        r.c[d] = ring_add(a.c[d], b.c[d]);
    return r;
}

inline TruncatedSeries series_sub(TruncatedSeries const &a, TruncatedSeries const &b)
{
    TruncatedSeries r(a.ctx, std::min(a.bound, b.bound));
    for (int d = 0; d <= r.bound; ++d)
        r.c[d] = ring_sub(a.c[d], b.c[d]);
    return r;
}

inline TruncatedSeries series_neg(TruncatedSeries const &a)
{
    TruncatedSeries r = a;
    for (auto &x : r.c)
        x = ring_neg(x);
    return r;
}

inline TruncatedSeries series_scale(TruncatedSeries const &a, RingElement const &s)
{
    TruncatedSeries r = a;
    for (auto &x : r.c)
        x = ring_mul(x, s);
    return r;
}

inline TruncatedSeries series_mul(TruncatedSeries const &a, TruncatedSeries const &b)
{
    TruncatedSeries r(a.ctx, std::min(a.bound, b.bound));
    for (int i = 0; i <= a.bound; ++i) {
        if (a.c[i].stored_zero())
            continue;
        for (int j = 0; j <= r.bound - i && j <= b.bound; ++j) {
            if (b.c[j].stored_zero())
                continue;
            r.c[i + j] = ring_add(r.c[i + j], ring_mul(a.c[i], b.c[j]));
        }
    }
    return r;
}

inline TruncatedSeries series_pow(TruncatedSeries a, int e)
{
    TruncatedSeries r(a.ctx, a.bound);
    r.set(0, ring_one(a.ctx));
    while (e) {
        if (e & 1)
            r = series_mul(r, a);
        a = series_mul(a, a);
        e >>= 1;
    }
    return r;
}

inline TruncatedSeries series_derivative(TruncatedSeries const &a)
{
    TruncatedSeries r(a.ctx, a.bound);
    for (int d = 1; d <= a.bound; ++d)
        r.c[d - 1] = ring_scale_int(a.c[d], d);
    return r;
}

// multiplicative inverse of a series with unit constant term
inline TruncatedSeries series_inv(TruncatedSeries const &a)
{
    TruncatedSeries w(a.ctx, a.bound);
    w.set(0, ring_inverse(a.c[0]));
    for (int prec = 1; prec <= a.bound; prec *= 2) {
        // w <- w(2 - a w)
        TruncatedSeries t = series_mul(a, w);
        t.c[0] = ring_sub(ring_int(a.ctx, 2), t.c[0]);
        for (int d = 1; d <= t.bound; ++d)
            t.c[d] = ring_neg(t.c[d]);
        w = series_mul(w, t);
    }
    return w;
}

// f(g(X)); requires g(0) = 0
inline TruncatedSeries compose(TruncatedSeries const &f, TruncatedSeries const &g)
{
    check_same_ctx(f.coeff(0), g.coeff(0), "compose");
    if (!is_zero_mod_prec(g.coeff(0)))
        throw std::invalid_argument("compose: inner series has nonzero constant term");
    int D = std::min(f.bound, g.bound);
    TruncatedSeries gt = series_truncate(g, D);
    // Horner: acc = f_D; acc <- acc*g + f_d
    TruncatedSeries acc(f.ctx, D);
    acc.c[0] = f.c[f.bound];
    for (int d = f.bound - 1; d >= 0; --d) {
        acc = series_mul(acc, gt);
        acc.c[0] = ring_add(acc.c[0], f.c[d]);
    }
    return acc;
}

// compositional inverse: f(0)=0, f'(0) a unit
inline TruncatedSeries revert(TruncatedSeries const &f)
{
    if (!is_zero_mod_prec(f.coeff(0)))
        throw std::invalid_argument("revert: nonzero constant term");
    if (!ring_is_unit(f.coeff(1)))
        throw std::invalid_argument("revert: linear coefficient is not a unit");
    int D = f.bound;
    TruncatedSeries g(f.ctx, D);
    g.set(1, ring_inverse(f.c[1]));
    TruncatedSeries fd = series_derivative(f);
    int correct = 1;
    while (correct < D) {
        // Newton: g <- g - (f(g) - X) / f'(g)
        TruncatedSeries err = compose(f, g);
        err.c[1] = ring_sub(err.c[1], ring_one(f.ctx));
        if (err.zero_mod_prec())
            break;
        TruncatedSeries slope = compose(fd, g);
        g = series_sub(g, series_mul(err, series_inv(slope)));
        correct *= 2;
    }
    return g;
}

// ---------------------------------------------------------------------------
// bivariate series, total-degree truncated

struct BivariateSeries {
    CtxPtr ctx;
    int bound = 0;
    std::map<std::pair<int, int>, RingElement> t; // (i, j) -> coefficient of X^i Y^j

    BivariateSeries() = default;
    BivariateSeries(CtxPtr ctx_, int bound_) : ctx(std::move(ctx_)), bound(bound_) {}

    RingElement coeff(int i, int j) const
    {
        auto it = t.find({i, j});
        return it == t.end() ? ring_zero(ctx) : it->second;
    }

    void add_to(int i, int j, RingElement const &v)
    {
        if (i + j > bound || v.stored_zero())
            return;
        auto it = t.find({i, j});
        if (it == t.end())
            t.emplace(std::pair{i, j}, v);
        else {
            it->second = ring_add(it->second, v);
            if (it->second.stored_zero())
                t.erase(it);
        }
    }

    bool zero_mod_prec() const
    {
        for (auto const &[ij, v] : t)
            if (!is_zero_mod_prec(v))
                return false;
        return true;
    }

    // first monomial (graded lex) that is nonzero within precision
    std::optional<std::pair<int, int>> first_nonzero() const
    {
        std::optional<std::pair<int, int>> best;
        for (auto const &[ij, v] : t) {
            if (is_zero_mod_prec(v))
                continue;
            auto key = ij;
            if (!best || key.first + key.second < best->first + best->second ||
                (key.first + key.second == best->first + best->second && key < *best))
                best = key;
        }
        return best;
    }
};

inline BivariateSeries biv_add(BivariateSeries const &a, BivariateSeries const &b)
{
    BivariateSeries r = a;
    r.bound = std::min(a.bound, b.bound);
    for (auto it = r.t.begin(); it != r.t.end();)
        it = it->first.first + it->first.second > r.bound ? r.t.erase(it) : std::next(it);
    for (auto const &[ij, v] : b.t)
        r.add_to(ij.first, ij.second, v);
    return r;
}

inline BivariateSeries biv_sub(BivariateSeries const &a, BivariateSeries const &b)
{
    BivariateSeries nb = b;
    for (auto &[ij, v] : nb.t)
        v = ring_neg(v);
    return biv_add(a, nb);
}

inline BivariateSeries biv_mul(BivariateSeries const &a, BivariateSeries const &b)
{
    BivariateSeries r(a.ctx, std::min(a.bound, b.bound));
    for (auto const &[ea, va] : a.t) {
        if (va.stored_zero())
            continue;
        for (auto const &[eb, vb] : b.t) {
            if (ea.first + ea.second + eb.first + eb.second > r.bound)
                continue;
            r.add_to(ea.first + eb.first, ea.second + eb.second, ring_mul(va, vb));
        }
    }
    return r;
}

inline BivariateSeries biv_scale(BivariateSeries const &a, RingElement const &s)
{
    BivariateSeries r(a.ctx, a.bound);
    for (auto const &[ij, v] : a.t)
        r.add_to(ij.first, ij.second, ring_mul(v, s));
    return r;
}

inline BivariateSeries biv_swap(BivariateSeries const &a)
{
    BivariateSeries r(a.ctx, a.bound);
    for (auto const &[ij, v] : a.t)
        r.add_to(ij.second, ij.first, v);
    return r;
}

// embed all coefficients into a larger context
inline BivariateSeries biv_embed(BivariateSeries const &a, CtxPtr const &target)
{
    if (same_ctx(a.ctx, target))
        return a;
    BivariateSeries r(target, a.bound);
    for (auto const &[ij, v] : a.t)
        r.t.emplace(ij, embed(v, target));
    return r;
}

inline TruncatedSeries series_embed(TruncatedSeries const &a, CtxPtr const &target)
{
    if (same_ctx(a.ctx, target))
        return a;
    TruncatedSeries r(target, a.bound);
    r.var = a.var;
    for (int d = 0; d <= a.bound; ++d)
        r.c[d] = embed(a.c[d], target);
    return r;
}

inline TruncatedSeries series_reduce(TruncatedSeries const &a, CtxPtr const &target)
{
    TruncatedSeries r(target, a.bound);
    r.var = a.var;
    for (int d = 0; d <= a.bound; ++d)
        r.c[d] = reduce_mod_ideal(a.c[d], target);
    return r;
}

inline BivariateSeries biv_reduce(BivariateSeries const &a, CtxPtr const &target)
{
    BivariateSeries r(target, a.bound);
    for (auto const &[ij, v] : a.t)
        r.add_to(ij.first, ij.second, reduce_mod_ideal(v, target));
    return r;
}

// apply a coefficient map
inline TruncatedSeries series_map(TruncatedSeries const &a,
                                  std::function<RingElement(RingElement const &)> const &f)
{
    TruncatedSeries r = a;
    for (auto &x : r.c)
        x = f(x);
    if (!r.c.empty())
        r.ctx = r.c[0].ctx;
    return r;
}

inline BivariateSeries biv_map(BivariateSeries const &a,
                               std::function<RingElement(RingElement const &)> const &f,
                               CtxPtr const &target)
{
    BivariateSeries r(target, a.bound);
    for (auto const &[ij, v] : a.t)
        r.add_to(ij.first, ij.second, f(v));
    return r;
}

// F(f(X), g(X)) for univariate f, g; F may live over a subring of f's context
inline TruncatedSeries substitute2(BivariateSeries const &F, TruncatedSeries const &f,
                                   TruncatedSeries const &g)
{
    check_same_ctx(f.coeff(0), g.coeff(0), "substitute2");
    if (!is_zero_mod_prec(f.coeff(0)) || !is_zero_mod_prec(g.coeff(0)))
        throw std::invalid_argument("substitute2: arguments need zero constant term");
    CtxPtr big = f.ctx;
    int D = std::min({F.bound, f.bound, g.bound});
    // group by i: evaluate sum_j F_ij g^j by Horner, then multiply with f^i
    int imax = 0, jmax = 0;
    for (auto const &[ij, v] : F.t) {
        imax = std::max(imax, ij.first);
        jmax = std::max(jmax, ij.second);
    }
    std::vector<TruncatedSeries> gp;
    gp.push_back(series_monomial(big, D, 0, ring_one(big)));
    for (int j = 1; j <= std::min(jmax, D); ++j)
        gp.push_back(series_mul(gp.back(), series_truncate(g, D)));
    TruncatedSeries r(big, D);
    TruncatedSeries fi = series_monomial(big, D, 0, ring_one(big));
    for (int i = 0; i <= std::min(imax, D); ++i) {
        if (i > 0)
            fi = series_mul(fi, series_truncate(f, D));
        TruncatedSeries row(big, D);
        bool any = false;
        for (int j = 0; j <= std::min(jmax, D - i); ++j) {
            auto it = F.t.find({i, j});
            if (it == F.t.end() || it->second.stored_zero())
                continue;
            RingElement cv = same_ctx(F.ctx, big) ? it->second : embed(it->second, big);
            row = series_add(row, series_scale(gp[j], cv));
            any = true;
        }
        if (any)
            r = series_add(r, series_mul(row, fi));
    }
    return r;
}

// f(G(X,Y)) for univariate f and bivariate G with zero constant term
inline BivariateSeries compose_uni_biv(TruncatedSeries const &f, BivariateSeries const &G)
{
    if (!is_zero_mod_prec(G.coeff(0, 0)))
        throw std::invalid_argument("compose_uni_biv: inner series has constant term");
    CtxPtr big = f.ctx;
    int D = std::min(f.bound, G.bound);
    // powers of G over its own (possibly smaller) context
    BivariateSeries Gt = G;
    Gt.bound = D;
    for (auto it = Gt.t.begin(); it != Gt.t.end();)
        it = it->first.first + it->first.second > D ? Gt.t.erase(it) : std::next(it);
    BivariateSeries r(big, D);
    BivariateSeries Gk(G.ctx, D);
    Gk.add_to(0, 0, ring_one(G.ctx));
    for (int k = 0; k <= D; ++k) {
        if (k > 0)
            Gk = biv_mul(Gk, Gt);
        if (f.c[k].stored_zero())
            continue;
        for (auto const &[ij, v] : Gk.t) {
            RingElement vv = same_ctx(G.ctx, big) ? v : embed(v, big);
            r.add_to(ij.first, ij.second, ring_mul(vv, f.c[k]));
        }
        if (Gk.t.empty())
            break;
    }
    return r;
}

// ---------------------------------------------------------------------------
// trivariate scratch series for the associativity identity

struct TriSeries {
    CtxPtr ctx;
    int bound = 0;
    std::map<std::array<int, 3>, RingElement> t;

    TriSeries(CtxPtr ctx_, int bound_) : ctx(std::move(ctx_)), bound(bound_) {}

    void add_to(std::array<int, 3> e, RingElement const &v)
    {
        if (e[0] + e[1] + e[2] > bound || v.stored_zero())
            return;
        auto it = t.find(e);
        if (it == t.end())
            t.emplace(e, v);
        else {
            it->second = ring_add(it->second, v);
            if (it->second.stored_zero())
                t.erase(it);
        }
    }
};

inline TriSeries tri_var(CtxPtr const &ctx, int bound, int which)
{
    TriSeries r(ctx, bound);
    std::array<int, 3> e{};
    e[which] = 1;
    r.add_to(e, ring_one(ctx));
    return r;
}

inline TriSeries tri_mul(TriSeries const &a, TriSeries const &b)
{
    TriSeries r(a.ctx, std::min(a.bound, b.bound));
    for (auto const &[ea, va] : a.t)
        for (auto const &[eb, vb] : b.t) {
            std::array<int, 3> e{ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]};
            if (e[0] + e[1] + e[2] > r.bound)
                continue;
            r.add_to(e, ring_mul(va, vb));
        }
    return r;
}

inline TriSeries tri_sub(TriSeries const &a, TriSeries const &b)
{
    TriSeries r = a;
    r.bound = std::min(a.bound, b.bound);
    for (auto const &[e, v] : b.t)
        r.add_to(e, ring_neg(v));
    return r;
}

// F(A, B) for trivariate arguments with zero constant term
inline TriSeries substitute2_tri(BivariateSeries const &F, TriSeries const &A, TriSeries const &B)
{
    CtxPtr big = A.ctx;
    int D = std::min({F.bound, A.bound, B.bound});
    int imax = 0, jmax = 0;
    for (auto const &[ij, v] : F.t) {
        imax = std::max(imax, ij.first);
        jmax = std::max(jmax, ij.second);
    }
    std::vector<TriSeries> bp;
    {
        TriSeries one(big, D);
        one.add_to({0, 0, 0}, ring_one(big));
        bp.push_back(one);
    }
    for (int j = 1; j <= std::min(jmax, D); ++j)
        bp.push_back(tri_mul(bp.back(), B));
    TriSeries r(big, D);
    TriSeries ai(big, D);
    ai.add_to({0, 0, 0}, ring_one(big));
    for (int i = 0; i <= std::min(imax, D); ++i) {
        if (i > 0)
            ai = tri_mul(ai, A);
        for (int j = 0; j <= std::min(jmax, D - i); ++j) {
            auto it = F.t.find({i, j});
            if (it == F.t.end() || it->second.stored_zero())
                continue;
            RingElement cv = same_ctx(F.ctx, big) ? it->second : embed(it->second, big);
            TriSeries term = tri_mul(ai, bp[j]);
            for (auto const &[e, v] : term.t)
                r.add_to(e, ring_mul(v, cv));
        }
    }
    return r;
}

} // namespace fglab
