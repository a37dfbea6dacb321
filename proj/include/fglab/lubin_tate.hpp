#pragma once

// Deformations of formal group laws over complete local rings.
//
// Classification runs through p-typical coordinates: a deformation carried
// with a torsion-free cover is typified via its logarithm (computed from the
// invariant differential over the cover), giving a p-series coefficient list;
// conjugations assembled from p-typical coordinates then normalize that list
// slot by slot.  Parameters are literally the normalized p-series slots, so
// classifying is coordinate reading; a slot mismatch that no conjugation can
// repair is the absence certificate for star-isomorphisms.

#include "fgl.hpp"
#include "report.hpp"

#include <set>

namespace fglab {

// ---------------------------------------------------------------------------
// maximal-ideal bookkeeping: the ideal is (p, series variables); laurent and
// algebraic variables are units here

inline int mideal_grade(RingElement const &x)
{
    if (x.pden != 0)
        throw std::domain_error("mideal_grade: non-integral element");
    return local_grade(x);
}

// residue field/ring of a complete local context: digits truncated to length
// one and series variables sent to zero
inline CtxPtr residue_context(CtxPtr const &A)
{
    if (A->residue)
        return A->residue;
    auto ctx = std::make_shared<RingContext>();
    ctx->scalar = ScalarRing(A->scalar.p, 1, A->scalar.m);
    ctx->label = A->label + " residue";
    for (auto const &v : A->vars) {
        if (v.kind == VarKind::Series)
            continue;
        if (v.kind == VarKind::Algebraic)
            throw std::invalid_argument("residue_context: lifted towers must carry their residue");
        Variable nv = v;
        if (nv.kind == VarKind::Laurent)
            ctx->laurent_index = ctx->nvars();
        ctx->vars.push_back(nv);
    }
    return ctx;
}

// exact division a / c where c = p^v * unit; empty when the quotient is not
// representable (the divisibility obstruction)
inline std::optional<RingElement> try_divide(RingElement const &a, RingElement const &c)
{
    if (c.stored_zero())
        return std::nullopt;
    int v;
    {
        int pv = INT_MAX;
        for (auto const &[e, s] : c.coeffs)
            pv = std::min(pv, c.ctx->scalar.valuation(s));
        v = pv - c.pden;
    }
    if (v < 0)
        return std::nullopt;
    RingElement cunit = c;
    if (v > 0) {
        for (auto &[e, s] : cunit.coeffs)
            s = c.ctx->scalar.shift_down(s, v);
        cunit.prec.p_abs -= v;
    }
    if (!ring_is_unit(cunit))
        return std::nullopt;
    RingElement q = ring_mul(a, ring_inverse(cunit));
    if (v > 0) {
        if (q.prec.p_abs <= v)
            return std::nullopt;
        q = ring_div_p(q, v);
        detail::normalize_pden(q);
        if (q.pden != 0)
            return std::nullopt; // a was not divisible by p^v
    }
    return q;
}

// principal e-th root: y with y^e = x and y = 1 mod m; e prime to p
inline RingElement principal_unit_root(RingElement const &x, int64_t e)
{
    CtxPtr A = x.ctx;
    if (x.stored_zero() || local_grade(ring_sub(x, ring_one(A))) < 1)
        throw std::domain_error("principal_unit_root: argument is not a principal unit");
    RingElement y = ring_one(A);
    RingElement einv = ring_inverse(ring_int(A, e));
    for (int it = 0; it < 64; ++it) {
        RingElement err = ring_sub(x, ring_pow(y, e));
        if (is_zero_mod_prec(err))
            return y;
        RingElement slope = ring_mul(ring_int(A, e), ring_pow(y, e - 1));
        y = ring_add(y, ring_mul(err, ring_inverse(slope)));
        (void)einv;
    }
    throw std::domain_error("principal_unit_root: no convergence");
}

// ---------------------------------------------------------------------------
// logarithms over the torsion-free cover

// log from the invariant differential: log'(X) = (dF/dY (X, 0))^{-1}
inline TruncatedSeries invariant_log(FglPtr const &Fcov)
{
    CtxPtr C = Fcov->ctx();
    int D = Fcov->bound();
    TruncatedSeries dy(C, D);
    for (auto const &[ij, v] : Fcov->F.t)
        if (ij.second == 1)
            dy.set(ij.first, v);
    TruncatedSeries omega = series_inv(dy);
    TruncatedSeries log(C, D);
    auto const &sr = C->scalar;
    for (int d = 1; d <= D; ++d) {
        RingElement c = omega.coeff(d - 1);
        if (c.stored_zero()) {
            continue;
        }
        // divide by d = p^v * m
        int64_t m = d;
        int v = 0;
        while (m % sr.p == 0) {
            m /= sr.p;
            ++v;
        }
        if (m != 1)
            c = ring_mul(c, ring_inverse(ring_int(C, m)));
        if (v)
            c = ring_div_p(c, v);
        log.set(d, c);
    }
    return log;
}

// p-series coefficient list read back from the p-power log coefficients:
//   (p - p^(p^k)) l_k = sum_{i=1..k} l_{k-i} a_i^(p^(k-i))
inline std::vector<RingElement> araki_spec_from_log(TruncatedSeries const &log, CtxPtr const &A)
{
    CtxPtr C = log.ctx;
    auto const &sr = C->scalar;
    int64_t p = sr.p;
    int K = log_depth_for(p, log.bound);
    std::vector<RingElement> l;
    for (int k = 0, d = 1; k <= K; ++k, d *= (int)p)
        l.push_back(log.coeff(d));
    std::vector<RingElement> b;
    for (int k = 1; k <= K; ++k) {
        // b_k = (p - p^(p^k)) l_k - sum_{i<k} l_{k-i} b_i^(p^(k-i))
        int64_t pk = 1;
        for (int t = 0; t < k; ++t)
            pk *= p;
        Scalar fac = sr.shift_up(sr.one(), 1);
        if (pk < sr.k)
            fac = sr.sub(fac, sr.shift_up(sr.one(), (int)pk));
        RingElement acc = ring_scale(l[k], fac);
        for (int i = 1; i < k; ++i) {
            int64_t e = 1;
            for (int t = 0; t < k - i; ++t)
                e *= p;
            acc = ring_sub(acc, ring_mul(l[k - i], ring_pow(b[i - 1], e)));
        }
        detail::normalize_pden(acc);
        if (acc.pden != 0)
            throw std::domain_error("spec extraction: non-integral coefficient");
        if (acc.prec.p_abs < A->scalar.k)
            throw std::domain_error("spec extraction: precision exhausted");
        b.push_back(acc);
    }
    std::vector<RingElement> out;
    for (auto const &bk : b)
        out.push_back(reduce_mod_ideal(bk, A));
    return out;
}

// ---------------------------------------------------------------------------
// deformations

struct Deformation {
    FglPtr law;         // over the base A
    FglPtr cover;       // representative over the torsion-free cover of A
    FglPtr residue_law; // over the residue of A
    CtxPtr base;
};

inline bool is_deformation_of(FglPtr const &law, FglPtr const &G)
{
    CtxPtr kbar = residue_context(law->ctx());
    if (!same_ctx(kbar, G->ctx()))
        return false;
    BivariateSeries red = biv_reduce(law->F, kbar);
    return biv_sub(red, G->F).zero_mod_prec();
}

// the deformation over R[[t_1..t_{n-1}]] with p-series
//   pX +_F t_1 X^p +_F ... +_F t_{n-1} X^(p^{n-1}) +_F X^(p^n)
inline Deformation universal_deformation(FglPtr const &G, CtxPtr const &R, int n, int D,
                                         std::vector<std::string> const &param_names,
                                         int param_bound)
{
    if ((int)param_names.size() != n - 1)
        throw std::invalid_argument("universal_deformation: expected n-1 parameter names");
    // coefficients of the law reach parameter degree (D-1)/(p-1), and lifts
    // deepen the window to the rigidity degree p^(n+1); size the parameter
    // window so generator substitution stays exact throughout
    int64_t drig = 1;
    for (int i = 0; i <= n; ++i)
        drig *= R->scalar.p;
    int min_bound = (std::max<int>(D, (int)drig) - 1) / ((int)R->scalar.p - 1) + 1;
    param_bound = std::max(param_bound, min_bound);
    std::vector<std::pair<std::string, int>> vars;
    for (auto const &nm : param_names)
        vars.emplace_back(nm, param_bound);
    CtxPtr A = vars.empty() ? R : with_series_vars(R, vars);
    std::vector<RingElement> a;
    for (auto const &nm : param_names)
        a.push_back(ring_var(A, nm));
    a.push_back(ring_one(A));
    CoveredLaw cl = fgl_from_p_typical_spec_covered(a, A, D);
    Deformation d;
    d.base = A;
    d.law = cl.law;
    d.cover = cl.cover;
    d.residue_law = G;
    if (!is_deformation_of(d.law, G))
        throw std::logic_error("universal_deformation: reduction is not the residue law");
    return d;
}

// conjugate both levels of a covered law by v (over the base) and its
// coefficientwise lift
inline CoveredLaw conjugate_covered(CoveredLaw const &L, TruncatedSeries const &v)
{
    TruncatedSeries vinv = revert(v);
    CoveredLaw out;
    out.law = make_fgl(compose_uni_biv(v, substitute2_biv(L.law->F, vinv, vinv)));
    CtxPtr C = L.cover->ctx();
    TruncatedSeries vc = series_map(v, [&](RingElement const &x) { return lift_naive(x, C); });
    vc.ctx = C;
    TruncatedSeries vcinv = revert(vc);
    out.cover = make_fgl(compose_uni_biv(vc, substitute2_biv(L.cover->F, vcinv, vcinv)));
    return out;
}

// pull back a covered law along a ring map given on generators.  The law
// must carry a p-series spec: substituting generator images into truncated
// series coefficients would smear the truncation tail into visible digits,
// so the cover is rebuilt from the pulled spec instead.
inline CoveredLaw pullback_covered(CoveredLaw const &L, RingHom const &alpha)
{
    if (L.law->ptyp_spec.empty() && L.law->residue_height < 0)
        throw std::invalid_argument("pullback_covered: law carries no p-series spec");
    std::vector<RingElement> spec;
    for (auto const &a : L.law->ptyp_spec)
        spec.push_back(alpha.apply(a));
    CoveredLaw out = fgl_from_p_typical_spec_covered(spec, alpha.dst, L.law->bound());
    // consistency: the base-level pullback agrees with the rebuilt law
    BivariateSeries direct = pullback_law(alpha, L.law->F);
    if (auto bad = biv_sub(direct, out.law->F).first_nonzero())
        throw std::logic_error("pullback_covered: rebuilt law disagrees at " +
                               monomial_name(bad->first, bad->second));
    return out;
}

// ---------------------------------------------------------------------------
// typification: the canonical star-isomorphism onto a p-typical law

// visible-zero test at the base precision: monomials certified zero modulo
// p^kbase (or beyond the element's own certified precision) are ignored
inline bool zero_at_base(RingElement const &x, int kbase)
{
    auto const &sr = x.ctx->scalar;
    int li = x.ctx->laurent_index;
    for (auto const &[e, s] : x.coeffs) {
        if (li >= 0 && e[li] >= x.prec.u_abs)
            continue;
        int need = std::min(x.prec.p_abs, kbase) + x.pden;
        if (sr.valuation(s) < std::min(need, sr.k))
            return false;
    }
    return true;
}

// certified maximal-ideal grade: uncertified digits are ignored
inline int certified_grade(RingElement const &x, int kbase)
{
    auto const &ctx = *x.ctx;
    int g = INT_MAX;
    for (auto const &[e, s] : x.coeffs) {
        int v = ctx.scalar.valuation(s);
        if (v - x.pden >= std::min(x.prec.p_abs, kbase))
            continue;
        int m = v;
        for (int i = 0; i < ctx.nvars(); ++i)
            if (ctx.vars[i].kind == VarKind::Series)
                m += e[i];
        g = std::min(g, m);
    }
    return g == INT_MAX ? kPrecLarge : g - x.pden;
}

// reduce a series from the cover to the base, requiring certified precision
inline TruncatedSeries series_to_base(TruncatedSeries const &f, CtxPtr const &A)
{
    TruncatedSeries r(A, f.bound);
    for (int d = 0; d <= f.bound; ++d) {
        RingElement c = f.coeff(d);
        detail::normalize_pden(c);
        if (c.pden != 0)
            throw std::domain_error("series_to_base: non-integral coefficient");
        if (!c.stored_zero() && c.prec.p_abs < A->scalar.k)
            throw std::domain_error("series_to_base: precision exhausted");
        r.set(d, reduce_mod_ideal(c, A));
    }
    return r;
}

struct TypifyResult {
    CoveredLaw typ;                // p-typical law with its cover
    std::vector<RingElement> spec; // its p-series coefficients a_1, ... over the base
    TruncatedSeries w;             // star-isomorphism  law -> typ  over the base
    TruncatedSeries w_cover;       // the same over the cover
};

inline TypifyResult typify(CoveredLaw const &G, CtxPtr const &A)
{
    int D = G.law->bound();
    TruncatedSeries logG = invariant_log(G.cover);
    {
        // the defining property of the logarithm, checked over the cover
        BivariateSeries lhs = compose_uni_biv(logG, G.cover->F);
        BivariateSeries rhs(logG.ctx, D);
        for (int d = 1; d <= D; ++d) {
            rhs.add_to(d, 0, logG.coeff(d));
            rhs.add_to(0, d, logG.coeff(d));
        }
        if (auto bad = biv_sub(lhs, rhs).first_nonzero())
            throw std::domain_error("typify: cover logarithm fails at " +
                                    monomial_name(bad->first, bad->second));
    }
    std::vector<RingElement> spec = araki_spec_from_log(logG, A);
    while (!spec.empty() && is_zero_mod_prec(spec.back()))
        spec.pop_back();
    CoveredLaw T = fgl_from_p_typical_spec_covered(spec, A, D);
    // w = exp_T(log_G): log_T(w) = log_G, so w is the canonical isomorphism
    TruncatedSeries expT = revert(invariant_log(T.cover));
    TruncatedSeries wc = compose(expT, logG);
    TruncatedSeries w = series_to_base(wc, A);
    // verification over the base
    BivariateSeries lhs = compose_uni_biv(w, G.law->F);
    BivariateSeries rhs = substitute2_biv(T.law->F, w, w);
    if (auto bad = biv_sub(lhs, rhs).first_nonzero())
        throw std::logic_error("typify: isomorphism check failed at " +
                               monomial_name(bad->first, bad->second));
    TypifyResult out;
    out.typ = T;
    out.spec = std::move(spec);
    out.w = std::move(w);
    out.w_cover = std::move(wc);
    return out;
}

// ---------------------------------------------------------------------------
// slot normalization of p-typical laws by conjugation

namespace detail {

inline BivariateSeries biv_derivative(BivariateSeries const &F, bool wrt_x)
{
    BivariateSeries r(F.ctx, F.bound);
    for (auto const &[ij, v] : F.t) {
        int e = wrt_x ? ij.first : ij.second;
        if (e == 0)
            continue;
        r.add_to(wrt_x ? ij.first - 1 : ij.first, wrt_x ? ij.second : ij.second - 1,
                 ring_scale_int(v, e));
    }
    return r;
}

inline FglPtr conjugate_plain(FglPtr const &L, TruncatedSeries const &v)
{
    TruncatedSeries vinv = revert(v);
    return make_fgl(compose_uni_biv(v, substitute2_biv(L->F, vinv, vinv)));
}

// transport along the linear series w = cX: L' = w^{-1} o L o w, which
// rescales the coefficient of X^i Y^j by c^(i+j-1)
inline FglPtr conjugate_linear(FglPtr const &L, RingElement const &c)
{
    BivariateSeries F(L->ctx(), L->bound());
    for (auto const &[ij, v] : L->F.t) {
        int e = ij.first + ij.second - 1;
        RingElement scale = ring_pow(c, e);
        F.add_to(ij.first, ij.second, ring_mul(v, scale));
    }
    return make_fgl(std::move(F));
}

inline std::vector<RingElement> pseries_slots(FglPtr const &L, int count, int kbase)
{
    auto coords = p_typical_coordinates(L->pseries, *L, kbase);
    coords.resize(std::max<size_t>(count + 1, coords.size()), ring_zero(L->ctx()));
    return coords;
}

} // namespace detail

struct NormalizeResult {
    bool ok = false;
    FglPtr law_cover;              // the normalized law over the cover
    std::vector<RingElement> spec; // its slots over the base
    TruncatedSeries w_cover;       // composite conjugation over the cover
    std::string obstruction;
};

// bring a p-typical law (given over the cover) to the canonical form where
// slot n is 1 and the visible slots beyond n vanish.  Slot n is handled by a
// linear rescaling, slot n+j by a conjugation assembled from the coordinate
// q at p^j; slots below n are untouched and carry the classifying data.
// alternate_order reverses the sweep, exercising uniqueness of the result.
inline NormalizeResult normalize_spec(FglPtr const &L0cov, int n, int D, int kbase,
                                      bool alternate_order = false)
{
    CtxPtr C = L0cov->ctx();
    int64_t p = C->scalar.p;
    int slots = log_depth_for(p, D);
    NormalizeResult out;
    out.law_cover = L0cov;
    out.w_cover = series_x(C, D);

    for (int pass = 0; pass < 64; ++pass) {
        auto coords = detail::pseries_slots(out.law_cover, slots, kbase);
        bool clean = true;
        std::vector<int> order;
        for (int k = n; k <= slots; ++k)
            order.push_back(k);
        if (alternate_order)
            std::reverse(order.begin(), order.end());
        for (int k : order) {
            RingElement cur = coords[k];
            RingElement want = k == n ? ring_one(C) : ring_zero(C);
            RingElement diff = ring_sub(cur, want);
            if (zero_at_base(diff, kbase))
                continue;
            clean = false;
            // transport is L' = w^{-1} o L o w, which keeps the law p-typical
            if (k == n) {
                // w = cX rescales slot k by c^(p^k - 1)
                int64_t pn = 1;
                for (int t = 0; t < n; ++t)
                    pn *= p;
                RingElement c;
                try {
                    c = principal_unit_root(ring_inverse(cur), pn - 1);
                } catch (std::domain_error const &e) {
                    out.obstruction = "slot " + std::to_string(k) + ": " + e.what();
                    return out;
                }
                out.law_cover = detail::conjugate_linear(out.law_cover, c);
                TruncatedSeries winv(C, D);
                winv.set(1, ring_inverse(c));
                out.w_cover = compose(winv, out.w_cover);
            } else {
                // w = X +_L q X^(p^(k-n)) moves slot k by -q
                RingElement q = diff;
                if (certified_grade(q, kbase) < 1) {
                    out.obstruction = "slot " + std::to_string(k) + ": unit-level correction";
                    return out;
                }
                std::vector<RingElement> cs(k - n + 1, ring_zero(C));
                cs[0] = ring_one(C);
                cs[k - n] = q;
                TruncatedSeries step = from_p_typical_coordinates(cs, *out.law_cover, C, D);
                TruncatedSeries stepinv = revert(step);
                out.law_cover = detail::conjugate_plain(out.law_cover, stepinv);
                out.w_cover = compose(stepinv, out.w_cover);
            }
            coords = detail::pseries_slots(out.law_cover, slots, kbase);
        }
        if (clean) {
            out.ok = true;
            out.spec = coords;
            return out;
        }
    }
    out.obstruction = "no convergence in the slot sweep";
    return out;
}

// ---------------------------------------------------------------------------
// canonical representatives: at truncated precision a star-isomorphism is
// determined only modulo directions whose effect on the functional equation
// falls outside the precision window; dropping those parts by ideal grade
// gives a canonical representative, unique for star-isomorphic pairs

inline TruncatedSeries star_canonical(TruncatedSeries const &u, FglPtr const &F1,
                                      BivariateSeries const &F2)
{
    CtxPtr A = u.ctx;
    int D = u.bound;
    int k = A->scalar.k;
    // derivative columns: d/du_t = F1^t - dF2x(u,u) X^t - dF2y(u,u) Y^t
    BivariateSeries gx = substitute2_biv(detail::biv_derivative(F2, true), u, u);
    BivariateSeries gy = substitute2_biv(detail::biv_derivative(F2, false), u, u);
    std::vector<BivariateSeries> F1pow;
    {
        BivariateSeries acc(A, D);
        acc.add_to(0, 0, ring_one(A));
        F1pow.push_back(acc);
        for (int t = 1; t <= D; ++t)
            F1pow.push_back(biv_mul(F1pow.back(), F1->F));
    }
    TruncatedSeries r = u;
    for (int t = 1; t <= D; ++t) {
        // assembled derivative column, so cancellations between the pieces
        // are taken into account
        BivariateSeries col = F1pow[t];
        for (auto const &[ij, v] : gx.t)
            col.add_to(ij.first + t, ij.second, ring_neg(v));
        for (auto const &[ij, v] : gy.t)
            col.add_to(ij.first, ij.second + t, ring_neg(v));
        int g = INT_MAX;
        for (auto const &[ij, v] : col.t)
            if (!v.stored_zero() && !is_zero_mod_prec(v))
                g = std::min(g, local_grade(v));
        if (g == INT_MAX)
            g = 0;
        int threshold = k - g;
        RingElement c = t == 1 ? ring_sub(u.coeff(1), ring_one(A)) : u.coeff(t);
        RingElement kept(A);
        for (auto const &[e, s] : c.coeffs) {
            int mg = local_grade_monomial(*A, e, s);
            if (mg < threshold)
                kept.coeffs.emplace(e, s);
        }
        kept.prec = c.prec;
        r.set(t, t == 1 ? ring_add(kept, ring_one(A)) : kept);
    }
    return r;
}

// ---------------------------------------------------------------------------
// uniqueness comparisons at truncated precision.  Multiplications by
// principal units of the endomorphism ring act as star-automorphisms inside
// any finite degree window, and the logarithm denominators pull their
// footprint down one p-digit per p-power level: the coefficient at degree d
// of a canonical isomorphism is determined modulo p^(k - floor(log_p d)).

inline int degree_determinacy(int64_t p, int k, int d)
{
    int j = 0;
    for (int64_t q = p; q <= d; q *= p)
        ++j;
    return std::max(0, k - 1 - j);
}

inline bool series_equal_profile(TruncatedSeries const &a, TruncatedSeries const &b)
{
    TruncatedSeries diff = series_sub(a, b);
    auto const &sr = diff.ctx->scalar;
    for (int d = 0; d <= diff.bound; ++d) {
        int thr = degree_determinacy(sr.p, sr.k, std::max(d, 1));
        RingElement const &x = diff.c[d];
        if (zero_at_base(x, thr))
            continue;
        // over parameter-carrying bases the fuzz is graded by the whole
        // maximal ideal, not only by p
        if (certified_grade(x, sr.k) < thr)
            return false;
    }
    return true;
}

// equality of classifying images modulo the same truncation fuzz, measured
// in the maximal-ideal filtration
inline bool ring_equal_mod_grade(RingElement const &a, RingElement const &b, int grade)
{
    RingElement d = ring_sub(a, b);
    if (is_zero_mod_prec(d))
        return true;
    return local_grade(d) >= grade;
}

// ---------------------------------------------------------------------------
// named operations

struct StarIsoResult {
    bool exists = false;
    TruncatedSeries u;
    std::string obstruction;
};

// the unique u with u = X mod m and u(F1(X,Y)) = F2(u(X), u(Y)), or an
// absence certificate naming the obstructed slot
inline StarIsoResult star_isomorphism(CoveredLaw const &F1, CoveredLaw const &F2,
                                      bool alternate_order = false)
{
    CtxPtr A = F1.law->ctx();
    if (!same_ctx(A, F2.law->ctx()))
        throw std::invalid_argument("star_isomorphism: laws live over different bases");
    CtxPtr kbar = residue_context(A);
    if (!biv_sub(biv_reduce(F1.law->F, kbar), biv_reduce(F2.law->F, kbar)).zero_mod_prec())
        throw std::invalid_argument("star_isomorphism: laws have different residue reductions");
    int n = make_fgl(biv_reduce(F1.law->F, kbar))->residue_height;
    if (n < 0)
        throw std::invalid_argument("star_isomorphism: residue law has no finite height");
    int D = F1.law->bound();
    int kb = A->scalar.k;
    StarIsoResult r;
    TypifyResult t1 = typify(F1, A);
    TypifyResult t2 = typify(F2, A);
    auto n1 = normalize_spec(t1.typ.cover, n, D, kb, alternate_order);
    auto n2 = normalize_spec(t2.typ.cover, n, D, kb, alternate_order);
    if (!n1.ok || !n2.ok) {
        r.obstruction = n1.ok ? n2.obstruction : n1.obstruction;
        return r;
    }
    // both sides now carry canonical forms; the classifying slots must agree
    // modulo the truncation fuzz of the window
    for (size_t k = 1; k < std::max(n1.spec.size(), n2.spec.size()); ++k) {
        RingElement a = k < n1.spec.size() ? n1.spec[k] : ring_zero(n2.spec[0].ctx);
        RingElement b = k < n2.spec.size() ? n2.spec[k] : ring_zero(n1.spec[0].ctx);
        RingElement diff = ring_sub(a, b);
        if (!zero_at_base(diff, kb) && certified_grade(diff, kb) < kb) {
            r.obstruction = "slot " + std::to_string(k) + " differs: not star-isomorphic";
            return r;
        }
    }
    TruncatedSeries to1 = compose(n1.w_cover, t1.w_cover);
    TruncatedSeries to2 = compose(n2.w_cover, t2.w_cover);
    TruncatedSeries uc = compose(revert(to2), to1);
    TruncatedSeries u;
    try {
        u = series_to_base(uc, A);
    } catch (std::domain_error const &e) {
        r.obstruction = e.what();
        return r;
    }
    BivariateSeries lhs = compose_uni_biv(u, F1.law->F);
    BivariateSeries rhs = substitute2_biv(F2.law->F, u, u);
    for (auto const &[ij, vv] : biv_sub(lhs, rhs).t) {
        // fuzz-graded defects are not decidable inside the window
        if (is_zero_mod_prec(vv) || certified_grade(vv, kb) >= kb)
            continue;
        r.obstruction = "verification failed at " + monomial_name(ij.first, ij.second);
        return r;
    }
    // the star shape: identity on the residue
    for (int d = 1; d <= D; ++d) {
        RingElement c = d == 1 ? ring_sub(u.coeff(1), ring_one(A)) : u.coeff(d);
        if (!c.stored_zero() && !is_zero_mod_prec(c) && local_grade(c) < 1) {
            r.obstruction = "not a star isomorphism at degree " + std::to_string(d);
            return r;
        }
    }
    r.exists = true;
    r.u = star_canonical(u, F1.law, F2.law->F);
    return r;
}

struct ClassifyResult {
    bool ok = false;
    std::map<std::string, RingElement> alpha_images;
    TruncatedSeries u;
    std::string obstruction;
};

// unique parameter images in the maximal ideal and the star-isomorphism
// G -> alpha^*U; alpha0 carries the base-ring part of alpha (frobenius power
// and images of non-parameter generators of U's base)
inline ClassifyResult classify(CoveredLaw const &G, Deformation const &U, RingHom const &alpha0,
                               std::vector<std::string> const &params,
                               bool alternate_order = false)
{
    CtxPtr A = G.law->ctx();
    int n = U.residue_law->residue_height;
    int D = G.law->bound();
    ClassifyResult r;
    TypifyResult ty = typify(G, A);
    auto nr = normalize_spec(ty.typ.cover, n, D, A->scalar.k, alternate_order);
    if (!nr.ok) {
        r.obstruction = nr.obstruction;
        return r;
    }
    if ((int)params.size() != n - 1) {
        r.obstruction = "expected n-1 parameters";
        return r;
    }
    RingHom alpha = alpha0;
    alpha.src = U.base;
    alpha.dst = A;
    for (int i = 1; i < n; ++i) {
        RingElement img = nr.spec[i];
        detail::normalize_pden(img);
        if (img.pden != 0 || (!img.stored_zero() && img.prec.p_abs < A->scalar.k)) {
            r.obstruction = "parameter image lost precision";
            return r;
        }
        alpha.images[params[i - 1]] = reduce_mod_ideal(img, A);
    }
    // tail slots and the leading slot must have normalized exactly
    for (int k = n; k < (int)nr.spec.size(); ++k) {
        RingElement want = k == n ? ring_one(nr.spec[k].ctx) : ring_zero(nr.spec[k].ctx);
        if (!zero_at_base(ring_sub(nr.spec[k], want), A->scalar.k)) {
            r.obstruction = "slot " + std::to_string(k) + " failed to normalize";
            return r;
        }
    }
    TruncatedSeries u;
    try {
        u = series_to_base(compose(nr.w_cover, ty.w_cover), A);
    } catch (std::domain_error const &e) {
        r.obstruction = e.what();
        return r;
    }
    BivariateSeries Ua = pullback_law(alpha, U.law->F);
    BivariateSeries lhs = compose_uni_biv(u, G.law->F);
    BivariateSeries rhs = substitute2_biv(Ua, u, u);
    if (auto bad = biv_sub(lhs, rhs).first_nonzero()) {
        r.obstruction = "verification failed at " + monomial_name(bad->first, bad->second);
        return r;
    }
    r.ok = true;
    r.u = star_canonical(u, G.law, Ua);
    for (auto const &[nm, img] : alpha.images)
        if (std::find(params.begin(), params.end(), nm) != params.end())
            r.alpha_images.emplace(nm, img);
    return r;
}

// unique lift of an isomorphism of residue laws to the universal deformations:
// conjugate a coefficientwise lift f of fbar, classify the conjugate against
// the target universal deformation, compose.
inline FglHom lift_isomorphism(FglHom const &fbar_alpha, Deformation const &UF,
                               Deformation const &UG, RingHom const &alpha_R,
                               std::vector<std::string> const &params,
                               TruncatedSeries const *flift_override = nullptr)
{
    CtxPtr A = UF.base;
    int D = UF.law->bound();
    // rigidity window: uniqueness of the lift modulo p^k needs the degree
    // range to reach the first slot beyond the residue height
    int64_t p = A->scalar.p;
    int h = UF.residue_law->residue_height;
    int64_t need = 1;
    for (int i = 0; i <= h; ++i)
        need *= p;
    int Dsolve = std::max<int>(D, (int)need);
    Deformation UFs = UF, UGs = UG;
    if (Dsolve > D) {
        CoveredLaw cf = fgl_from_p_typical_spec_covered(UF.law->ptyp_spec, UF.base, Dsolve);
        CoveredLaw cg = fgl_from_p_typical_spec_covered(UG.law->ptyp_spec, UG.base, Dsolve);
        UFs.law = cf.law;
        UFs.cover = cf.cover;
        UGs.law = cg.law;
        UGs.cover = cg.cover;
    }
    RingHom alpha0(UGs.base, A);
    alpha0.frob_power = alpha_R.frob_power;
    for (auto const &v : UGs.base->vars) {
        bool is_param = false;
        for (auto const &pq : params)
            if (pq == v.name)
                is_param = true;
        if (is_param)
            continue;
        auto it = alpha_R.images.find(v.name);
        if (it == alpha_R.images.end())
            throw std::invalid_argument("lift_isomorphism: no base image for " + v.name);
        alpha0.images.emplace(v.name, embed(it->second, A));
    }
    TruncatedSeries f(A, Dsolve);
    if (flift_override) {
        for (int d = 0; d <= flift_override->bound; ++d)
            f.set(d, flift_override->coeff(d));
    } else {
        for (int d = 0; d <= fbar_alpha.f.bound; ++d)
            f.set(d, lift_naive(fbar_alpha.f.coeff(d), A));
    }
    if (!ring_is_unit(f.coeff(1)))
        throw std::invalid_argument("lift_isomorphism: residue series is not an isomorphism");
    CoveredLaw UFc{UFs.law, UFs.cover};
    CoveredLaw Fp = conjugate_covered(UFc, f);
    auto cls = classify(Fp, UGs, alpha0, params);
    if (!cls.ok)
        throw std::domain_error("lift_isomorphism: classification obstructed: " +
                                cls.obstruction);
    FglHom out;
    out.f = series_truncate(compose(cls.u, f), D);
    out.alpha = alpha0;
    for (auto const &[nm, img] : cls.alpha_images)
        out.alpha.images[nm] = img;
    out.src = UF.law;
    out.dst = UG.law;
    out.f = star_canonical(out.f, UF.law, pullback_law(out.alpha, UG.law->F));
    return out;
}

} // namespace fglab
