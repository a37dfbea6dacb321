#pragma once

// Coefficient rings with uniform precision bookkeeping.  A RingContext is a
// scalar ring (Z/p^k)[x]/(h) together with an ordered list of variables:
//   series    u with exponents in [0, bound]          (truncated power series)
//   laurent   u with exponents in [vmin, bound)       (Laurent window)
//   algebraic y with a monic defining polynomial      (quotient extension)
// Elements are sparse coefficient tables.  Every element carries the ideal
// power modulo which its value is certified; arithmetic propagates the tags.

#include "scalar.hpp"

#include <algorithm>
#include <climits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fglab {

inline constexpr int kMaxVars = 8;
inline constexpr int kPrecLarge = INT_MAX / 4;

using ExpVec = std::array<int16_t, kMaxVars>;

enum class VarKind { Series, Laurent, Algebraic };

class RingContext;
using CtxPtr = std::shared_ptr<const RingContext>;

struct Prec {
    int p_abs = 0;          // value certified modulo p^p_abs
    int u_abs = kPrecLarge; // value certified modulo u^u_abs (laurent variable)

    static Prec join(Prec const &a, Prec const &b)
    {
        return {std::min(a.p_abs, b.p_abs), std::min(a.u_abs, b.u_abs)};
    }
};

struct RingElement;

struct Variable {
    std::string name;
    VarKind kind = VarKind::Series;
    int bound = 0; // series: max exponent; laurent: window top (exclusive);
                   // algebraic: degree of the defining polynomial
    int vmin = 0;  // laurent window bottom
    // algebraic: rewrite x^deg = sum of these monomials (full-context layout)
    std::vector<std::pair<ExpVec, Scalar>> rewrite;
    // algebraic: lower coefficients c_0..c_{deg-1} of the monic defining
    // polynomial, kept for reports and lifting
    std::vector<std::shared_ptr<RingElement>> defining;
    long long fine_val = 0; // valuation of the generator in context fine units
};

class RingContext : public std::enable_shared_from_this<RingContext> {
  public:
    ScalarRing scalar;
    std::vector<Variable> vars;
    int laurent_index = -1;
    long long fine_scale = 1; // fine units per unit valuation of the laurent var
    std::string label;
    CtxPtr residue; // set on characteristic-zero lifts of a known residue ring

    int nvars() const { return (int)vars.size(); }

    int var_index(std::string const &name) const
    {
        for (int i = 0; i < nvars(); ++i)
            if (vars[i].name == name)
                return i;
        return -1;
    }

    bool same_structure(RingContext const &o) const
    {
        if (!scalar.same_as(o.scalar) || vars.size() != o.vars.size())
            return false;
        for (size_t i = 0; i < vars.size(); ++i) {
            auto const &a = vars[i];
            auto const &b = o.vars[i];
            if (a.name != b.name || a.kind != b.kind || a.bound != b.bound || a.vmin != b.vmin)
                return false;
        }
        return true;
    }

    Prec default_prec() const
    {
        Prec pr;
        pr.p_abs = scalar.k;
        pr.u_abs = laurent_index >= 0 ? vars[laurent_index].bound : kPrecLarge;
        return pr;
    }
};

inline bool same_ctx(CtxPtr const &a, CtxPtr const &b)
{
    if (a.get() == b.get())
        return true;
    return a && b && a->same_structure(*b);
}

struct RingElement {
    CtxPtr ctx;
    std::map<ExpVec, Scalar> coeffs;
    int pden = 0; // value = p^(-pden) * table
    Prec prec;

    RingElement() = default;
    explicit RingElement(CtxPtr c) : ctx(std::move(c)) { prec = ctx->default_prec(); }

    bool stored_zero() const { return coeffs.empty(); }
};

// ---------------------------------------------------------------------------
// construction helpers

inline RingElement ring_zero(CtxPtr const &ctx) { return RingElement(ctx); }

inline RingElement ring_monomial(CtxPtr const &ctx, ExpVec const &e, Scalar const &s)
{
    RingElement r(ctx);
    if (!ctx->scalar.is_zero(s))
        r.coeffs[e] = s;
    return r;
}

inline RingElement ring_const(CtxPtr const &ctx, Scalar const &s)
{
    return ring_monomial(ctx, ExpVec{}, s);
}

inline RingElement ring_int(CtxPtr const &ctx, int64_t v)
{
    return ring_const(ctx, ctx->scalar.from_int(v));
}

inline RingElement ring_one(CtxPtr const &ctx) { return ring_int(ctx, 1); }

inline RingElement ring_var(CtxPtr const &ctx, std::string const &name, int exp = 1)
{
    int i = ctx->var_index(name);
    if (i < 0)
        throw std::invalid_argument("ring_var: unknown variable " + name);
    ExpVec e{};
    e[i] = (int16_t)exp;
    return ring_monomial(ctx, e, ctx->scalar.one());
}

// ---------------------------------------------------------------------------
// valuations

inline long long fine_val_of_monomial(RingContext const &ctx, ExpVec const &e, Scalar const &s)
{
    long long v = 0;
    for (int i = 0; i < ctx.nvars(); ++i)
        v += (long long)e[i] * ctx.vars[i].fine_val;
    if (ctx.scalar.k > 1)
        v += (long long)ctx.scalar.valuation(s) * ctx.fine_scale; // not used for towers
    return v;
}

// valuation of the laurent variable part, min over monomials
inline int u_valuation(RingElement const &x)
{
    int li = x.ctx->laurent_index;
    if (li < 0)
        return 0;
    int v = kPrecLarge;
    for (auto const &[e, s] : x.coeffs)
        v = std::min(v, (int)e[li]);
    return v;
}

// p-adic valuation of the value (may be negative when pden > 0)
inline int p_valuation(RingElement const &x)
{
    if (x.coeffs.empty())
        return kPrecLarge;
    int v = INT_MAX;
    for (auto const &[e, s] : x.coeffs)
        v = std::min(v, x.ctx->scalar.valuation(s));
    return v - x.pden;
}

// ---------------------------------------------------------------------------
// normalization and zero tests

namespace detail {

inline void strip_zeros(RingElement &x)
{
    for (auto it = x.coeffs.begin(); it != x.coeffs.end();) {
        if (x.ctx->scalar.is_zero(it->second))
            it = x.coeffs.erase(it);
        else
            ++it;
    }
}

// drop the shared power of p between pden and the table
inline void normalize_pden(RingElement &x)
{
    if (x.pden == 0)
        return;
    if (x.coeffs.empty()) {
        x.pden = 0;
        return;
    }
    int v = INT_MAX;
    for (auto const &[e, s] : x.coeffs)
        v = std::min(v, x.ctx->scalar.valuation(s));
    int drop = std::min(v, x.pden);
    if (drop == 0)
        return;
    for (auto &[e, s] : x.coeffs)
        s = x.ctx->scalar.shift_down(s, drop);
    x.pden -= drop;
}

} // namespace detail

// true when the element is zero modulo its own certified precision
inline bool is_zero_mod_prec(RingElement const &x)
{
    auto const &sr = x.ctx->scalar;
    int li = x.ctx->laurent_index;
    for (auto const &[e, s] : x.coeffs) {
        if (li >= 0 && e[li] >= x.prec.u_abs)
            continue;
        int need = x.prec.p_abs + x.pden;
        if (sr.valuation(s) < std::min(need, sr.k))
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// arithmetic

inline void check_same_ctx(RingElement const &a, RingElement const &b, char const *op)
{
    if (!same_ctx(a.ctx, b.ctx))
        throw std::invalid_argument(std::string("cross-context arithmetic rejected in ") + op);
}

inline RingElement ring_add(RingElement const &a, RingElement const &b)
{
    check_same_ctx(a, b, "add");
    auto const &sr = a.ctx->scalar;
    RingElement r(a.ctx);
    r.pden = std::max(a.pden, b.pden);
    r.prec = Prec::join(a.prec, b.prec);
    r.prec.p_abs = std::min(r.prec.p_abs, sr.k - r.pden);
    r.coeffs = a.coeffs;
    if (r.pden > a.pden)
        for (auto &[e, s] : r.coeffs)
            s = sr.shift_up(s, r.pden - a.pden);
    for (auto const &[e, s] : b.coeffs) {
        Scalar v = r.pden > b.pden ? sr.shift_up(s, r.pden - b.pden) : s;
        auto it = r.coeffs.find(e);
        if (it == r.coeffs.end())
            r.coeffs.emplace(e, v);
        else {
            it->second = sr.add(it->second, v);
            if (sr.is_zero(it->second))
                r.coeffs.erase(it);
        }
    }
    detail::strip_zeros(r);
    return r;
}

inline RingElement ring_neg(RingElement const &a)
{
    RingElement r = a;
    for (auto &[e, s] : r.coeffs)
        s = a.ctx->scalar.neg(s);
    return r;
}

inline RingElement ring_sub(RingElement const &a, RingElement const &b)
{
    return ring_add(a, ring_neg(b));
}

namespace detail {

// reduce a raw monomial into the context window, rewriting algebraic powers;
// accumulates into `out`, dropping series/laurent overflow beyond `u_cap`
inline void accumulate_monomial(RingContext const &ctx, ExpVec e, Scalar s, int u_cap,
                                std::map<ExpVec, Scalar> &out)
{
    auto const &sr = ctx.scalar;
    std::vector<std::pair<ExpVec, Scalar>> work;
    work.emplace_back(e, s);
    while (!work.empty()) {
        auto [we, ws] = work.back();
        work.pop_back();
        if (sr.is_zero(ws))
            continue;
        bool rewritten = false;
        for (int i = 0; i < ctx.nvars(); ++i) {
            auto const &v = ctx.vars[i];
            if (v.kind == VarKind::Series) {
                if (we[i] > v.bound) {
                    rewritten = true; // beyond the declared truncation
                    break;
                }
            } else if (v.kind == VarKind::Laurent) {
                if (we[i] >= std::min(u_cap, v.bound)) {
                    rewritten = true;
                    break;
                }
                if (we[i] < v.vmin)
                    throw std::domain_error("laurent window underflow at variable " + v.name);
            } else if (we[i] >= v.bound) {
                // x^e = x^(e-deg) * rewrite
                for (auto const &[re, rs] : v.rewrite) {
                    ExpVec ne = we;
                    ne[i] = (int16_t)(ne[i] - v.bound);
                    for (int j = 0; j < ctx.nvars(); ++j)
                        ne[j] = (int16_t)(ne[j] + re[j]);
                    work.emplace_back(ne, sr.mul(ws, rs));
                }
                rewritten = true;
                break;
            }
        }
        if (rewritten)
            continue;
        auto it = out.find(we);
        if (it == out.end())
            out.emplace(we, ws);
        else {
            it->second = sr.add(it->second, ws);
            if (sr.is_zero(it->second))
                out.erase(it);
        }
    }
}

} // namespace detail

inline RingElement ring_mul(RingElement const &a, RingElement const &b)
{
    check_same_ctx(a, b, "mul");
    auto const &sr = a.ctx->scalar;
    RingElement r(a.ctx);
    r.pden = a.pden + b.pden;
    if (r.pden >= sr.k)
        throw std::domain_error("p-adic precision exhausted by denominators");
    int pa = p_valuation(a), pb = p_valuation(b);
    r.prec.p_abs = std::min({a.prec.p_abs + pb, b.prec.p_abs + pa, sr.k - r.pden});
    if (a.ctx->laurent_index >= 0) {
        int ua = u_valuation(a), ub = u_valuation(b);
        int top = a.ctx->vars[a.ctx->laurent_index].bound;
        r.prec.u_abs =
            std::min({a.prec.u_abs == kPrecLarge ? kPrecLarge : a.prec.u_abs + ub,
                      b.prec.u_abs == kPrecLarge ? kPrecLarge : b.prec.u_abs + ua, top});
    }
    for (auto const &[ea, sa] : a.coeffs)
        for (auto const &[eb, sb] : b.coeffs) {
            ExpVec e{};
            for (int i = 0; i < a.ctx->nvars(); ++i)
                e[i] = (int16_t)(ea[i] + eb[i]);
            detail::accumulate_monomial(*a.ctx, e, sr.mul(sa, sb), r.prec.u_abs, r.coeffs);
        }
    detail::normalize_pden(r);
    return r;
}

inline RingElement ring_scale(RingElement const &a, Scalar const &s)
{
    RingElement r = a;
    auto const &sr = a.ctx->scalar;
    for (auto &[e, v] : r.coeffs)
        v = sr.mul(v, s);
    detail::strip_zeros(r);
    int vs = sr.valuation(s);
    r.prec.p_abs = std::min(r.prec.p_abs + vs, sr.k - r.pden);
    return r;
}

inline RingElement ring_scale_int(RingElement const &a, int64_t v)
{
    return ring_scale(a, a.ctx->scalar.from_int(v));
}

inline RingElement ring_pow(RingElement a, int64_t e)
{
    if (e < 0)
        throw std::invalid_argument("ring_pow: negative exponent");
    RingElement r = ring_one(a.ctx);
    while (e) {
        if (e & 1)
            r = ring_mul(r, a);
        a = ring_mul(a, a);
        e >>= 1;
    }
    return r;
}

// divide the value by p^j (certified precision drops by j)
inline RingElement ring_div_p(RingElement const &a, int j = 1)
{
    RingElement r = a;
    r.pden += j;
    r.prec.p_abs -= j;
    if (r.pden >= a.ctx->scalar.k)
        throw std::domain_error("p-adic precision exhausted by division");
    detail::normalize_pden(r);
    return r;
}

inline bool ring_equal(RingElement const &a, RingElement const &b)
{
    RingElement d = ring_sub(a, b);
    return is_zero_mod_prec(d);
}

// first monomial (in canonical order) where a and b differ within precision
inline std::optional<ExpVec> first_difference(RingElement const &a, RingElement const &b)
{
    RingElement d = ring_sub(a, b);
    auto const &sr = d.ctx->scalar;
    int li = d.ctx->laurent_index;
    for (auto const &[e, s] : d.coeffs) {
        if (li >= 0 && e[li] >= d.prec.u_abs)
            continue;
        if (sr.valuation(s) < std::min(d.prec.p_abs + d.pden, sr.k))
            return e;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// context builders

inline CtxPtr make_finite_field(int64_t p, int m)
{
    auto ctx = std::make_shared<RingContext>();
    ctx->scalar = ScalarRing(p, 1, m);
    ctx->label = "F_" + std::to_string(pow_int(p, m));
    return ctx;
}

inline CtxPtr make_witt(int64_t p, int m, int k)
{
    auto ctx = std::make_shared<RingContext>();
    ctx->scalar = ScalarRing(p, k, m);
    ctx->label = "W(F_" + std::to_string(pow_int(p, m)) + ")/p^" + std::to_string(k);
    return ctx;
}

// append truncated power series variables
inline CtxPtr with_series_vars(CtxPtr const &base,
                               std::vector<std::pair<std::string, int>> const &vars)
{
    auto ctx = std::make_shared<RingContext>(*base);
    for (auto const &[name, bound] : vars) {
        if (bound < 1)
            throw std::invalid_argument("series variable needs positive bound");
        if (ctx->nvars() >= kMaxVars)
            throw std::invalid_argument("too many variables");
        Variable v;
        v.name = name;
        v.kind = VarKind::Series;
        v.bound = bound;
        ctx->vars.push_back(std::move(v));
        ctx->label += "[[" + name + "]]";
    }
    return ctx;
}

// append the (single) Laurent-window variable
inline CtxPtr with_laurent_var(CtxPtr const &base, std::string const &name, int window,
                               int vmin = INT_MIN)
{
    if (base->laurent_index >= 0)
        throw std::invalid_argument("context already has a laurent variable");
    if (window < 1)
        throw std::invalid_argument("laurent window must be positive");
    auto ctx = std::make_shared<RingContext>(*base);
    Variable v;
    v.name = name;
    v.kind = VarKind::Laurent;
    v.bound = window;
    v.vmin = vmin == INT_MIN ? -window : vmin;
    v.fine_val = 1;
    ctx->laurent_index = ctx->nvars();
    ctx->fine_scale = 1;
    ctx->vars.push_back(std::move(v));
    ctx->label += "((" + name + "))";
    return ctx;
}

// quotient extension by a monic polynomial; `defining` lists the lower
// coefficients c_0..c_{deg-1} as elements of `base`; ram is the factor by
// which the value group index grows and gen_val the generator's valuation in
// the rescaled fine units
inline CtxPtr extend_algebraic(CtxPtr const &base, std::string const &name,
                               std::vector<RingElement> const &defining, long long ram,
                               long long gen_val)
{
    int deg = (int)defining.size();
    if (deg < 1)
        throw std::invalid_argument("monic defining polynomial needs degree >= 1");
    if (base->nvars() >= kMaxVars)
        throw std::invalid_argument("too many variables");
    auto ctx = std::make_shared<RingContext>(*base);
    for (auto &v : ctx->vars)
        v.fine_val *= ram;
    ctx->fine_scale *= ram;
    Variable v;
    v.name = name;
    v.kind = VarKind::Algebraic;
    v.bound = deg;
    v.fine_val = gen_val;
    for (int j = 0; j < deg; ++j) {
        if (!same_ctx(defining[j].ctx, base))
            throw std::invalid_argument("defining coefficients must live in the base level");
        RingElement cj = defining[j];
        detail::normalize_pden(cj);
        if (cj.pden != 0)
            throw std::invalid_argument("defining coefficients must be integral");
        v.defining.push_back(std::make_shared<RingElement>(cj));
        // rewrite: x^deg = -c_{deg-1} x^{deg-1} - ... - c_0
        for (auto const &[e, s] : cj.coeffs) {
            ExpVec ne = e;
            ne[base->nvars()] = (int16_t)j;
            v.rewrite.emplace_back(ne, base->scalar.neg(s));
        }
    }
    ctx->vars.push_back(std::move(v));
    ctx->label += "[" + name + "]";
    return ctx;
}

// descriptor-driven construction covering the declared context kinds
struct RingDesc {
    std::string kind; // finite-field | witt | series-local | laurent-window
    int64_t p = 0;
    int m = 1;
    int k = 1;
    std::vector<std::pair<std::string, int>> series_vars;
    std::string laurent_var;
    int laurent_window = 0;
};

inline CtxPtr make_ring(RingDesc const &d)
{
    if (!is_prime_int(d.p))
        throw std::invalid_argument("make_ring: p must be prime");
    if (d.k < 1)
        throw std::invalid_argument("make_ring: zero precision");
    CtxPtr base = d.kind == "finite-field" || d.k == 1 ? make_finite_field(d.p, d.m)
                                                       : make_witt(d.p, d.m, d.k);
    if (d.kind == "finite-field" || d.kind == "witt")
        return base;
    if (d.kind == "series-local")
        return with_series_vars(base, d.series_vars);
    if (d.kind == "laurent-window") {
        CtxPtr c = with_series_vars(base, d.series_vars);
        return with_laurent_var(c, d.laurent_var, d.laurent_window);
    }
    throw std::invalid_argument("make_ring: unknown kind " + d.kind);
}

// ---------------------------------------------------------------------------
// embeddings and reductions

// embed along a declared inclusion: same scalars, source variables form a
// subsequence of target variables (matched by name); series may widen into a
// laurent window of the same name
inline RingElement embed(RingElement const &x, CtxPtr const &target)
{
    if (same_ctx(x.ctx, target))
        return x;
    if (!x.ctx->scalar.same_as(target->scalar))
        throw std::invalid_argument("embed: scalar rings differ");
    std::array<int, kMaxVars> pos{};
    int ti = 0;
    for (int si = 0; si < x.ctx->nvars(); ++si) {
        auto const &sv = x.ctx->vars[si];
        while (ti < target->nvars() && target->vars[ti].name != sv.name)
            ++ti;
        if (ti == target->nvars())
            throw std::invalid_argument("embed: variable " + sv.name + " missing in target");
        pos[si] = ti++;
    }
    RingElement r(target);
    r.pden = x.pden;
    r.prec.p_abs = std::min(x.prec.p_abs, r.prec.p_abs);
    if (target->laurent_index >= 0 && x.prec.u_abs != kPrecLarge)
        r.prec.u_abs = std::min(x.prec.u_abs, r.prec.u_abs);
    for (auto const &[e, s] : x.coeffs) {
        ExpVec ne{};
        for (int si = 0; si < x.ctx->nvars(); ++si)
            ne[pos[si]] = e[si];
        r.coeffs.emplace(ne, s);
    }
    return r;
}

// reduction along a declared quotient: digits truncated to the target length,
// variables missing from the target are sent to zero
inline RingElement reduce_mod_ideal(RingElement const &x, CtxPtr const &target)
{
    if (x.ctx->scalar.p != target->scalar.p || x.ctx->scalar.m != target->scalar.m ||
        target->scalar.k > x.ctx->scalar.k)
        throw std::invalid_argument("reduce: target is not a declared quotient");
    RingElement xx = x;
    detail::normalize_pden(xx);
    if (xx.pden != 0)
        throw std::domain_error("reduce: value is not integral");
    if (xx.prec.p_abs < target->scalar.k)
        throw std::domain_error("reduce: insufficient certified p-adic precision");
    std::array<int, kMaxVars> pos{};
    for (int si = 0; si < x.ctx->nvars(); ++si)
        pos[si] = target->var_index(x.ctx->vars[si].name);
    RingElement r(target);
    if (target->laurent_index >= 0 && xx.prec.u_abs != kPrecLarge)
        r.prec.u_abs = std::min(xx.prec.u_abs, r.prec.u_abs);
    for (auto const &[e, s] : xx.coeffs) {
        ExpVec ne{};
        bool killed = false;
        for (int si = 0; si < x.ctx->nvars(); ++si) {
            if (pos[si] < 0) {
                if (e[si] != 0) {
                    killed = true;
                    break;
                }
            } else
                ne[pos[si]] = e[si];
        }
        if (killed)
            continue;
        Scalar v = x.ctx->scalar.reduce_to(s, target->scalar);
        detail::accumulate_monomial(*target, ne, v, r.prec.u_abs, r.coeffs);
    }
    return r;
}

// coefficientwise lift along reduce_mod_ideal (digit lift, variables by name);
// sections the reduction but is not a ring homomorphism
inline RingElement lift_naive(RingElement const &x, CtxPtr const &target)
{
    if (x.ctx->scalar.p != target->scalar.p || x.ctx->scalar.m != target->scalar.m ||
        target->scalar.k < x.ctx->scalar.k)
        throw std::invalid_argument("lift: target does not refine the source");
    std::array<int, kMaxVars> pos{};
    for (int si = 0; si < x.ctx->nvars(); ++si) {
        pos[si] = target->var_index(x.ctx->vars[si].name);
        if (pos[si] < 0)
            throw std::invalid_argument("lift: variable missing in target");
    }
    RingElement r(target);
    for (auto const &[e, s] : x.coeffs) {
        ExpVec ne{};
        for (int si = 0; si < x.ctx->nvars(); ++si)
            ne[pos[si]] = e[si];
        Scalar v{};
        for (int i = 0; i < target->scalar.m; ++i)
            v.c[i] = s.c[i];
        r.coeffs.emplace(ne, v);
    }
    return r;
}

// ---------------------------------------------------------------------------
// units and inversion

namespace detail {

// leading (minimal fine valuation) monomial; unique in the towers this
// library builds because reduced monomials have pairwise distinct valuations
inline std::pair<ExpVec, Scalar> leading_monomial(RingElement const &x)
{
    if (x.coeffs.empty())
        throw std::domain_error("leading monomial of zero");
    long long best = LLONG_MAX;
    ExpVec be{};
    Scalar bs{};
    int hits = 0;
    for (auto const &[e, s] : x.coeffs) {
        long long v = 0;
        for (int i = 0; i < x.ctx->nvars(); ++i)
            v += (long long)e[i] * x.ctx->vars[i].fine_val;
        if (v < best) {
            best = v;
            be = e;
            bs = s;
            hits = 1;
        } else if (v == best)
            ++hits;
    }
    if (hits != 1)
        throw std::domain_error("ambiguous leading monomial (non totally ramified data)");
    return {be, bs};
}

RingElement invert_monomial(CtxPtr const &ctx, ExpVec const &e, Scalar const &s);

} // namespace detail

inline bool ring_is_unit(RingElement const &x);
inline RingElement ring_inverse(RingElement const &x);

namespace detail {

// inverse of the generator of algebraic variable i:
// y * (y^{d-1} + c_{d-1} y^{d-2} + ... + c_1) = -c_0
inline RingElement invert_algebraic_gen(CtxPtr const &ctx, int i)
{
    auto const &v = ctx->vars[i];
    int d = v.bound;
    RingElement acc = ring_zero(ctx);
    for (int j = 1; j <= d; ++j) {
        // coefficient of y^{j-1}: c_j (c_d = 1)
        RingElement cj = j == d ? ring_one(ctx) : embed(*v.defining[j], ctx);
        acc = ring_add(acc, ring_mul(cj, ring_var(ctx, v.name, j - 1)));
    }
    RingElement c0 = embed(*v.defining[0], ctx);
    return ring_mul(acc, ring_neg(ring_inverse(c0)));
}

inline RingElement invert_monomial(CtxPtr const &ctx, ExpVec const &e, Scalar const &s)
{
    RingElement r = ring_const(ctx, ctx->scalar.inverse(s));
    for (int i = 0; i < ctx->nvars(); ++i) {
        if (e[i] == 0)
            continue;
        auto const &v = ctx->vars[i];
        if (v.kind == VarKind::Laurent) {
            ExpVec ne{};
            ne[i] = (int16_t)-e[i];
            r = ring_mul(r, ring_monomial(ctx, ne, ctx->scalar.one()));
        } else if (v.kind == VarKind::Algebraic) {
            RingElement gi = invert_algebraic_gen(ctx, i);
            r = ring_mul(r, ring_pow(gi, e[i]));
        } else
            throw std::domain_error("not a unit: positive series valuation");
    }
    return r;
}

} // namespace detail

// grade with respect to the maximal ideal (p, series variables); laurent and
// algebraic generators are units of the local ring
inline int local_grade_monomial(RingContext const &ctx, ExpVec const &e, Scalar const &s)
{
    int m = ctx.scalar.valuation(s);
    for (int i = 0; i < ctx.nvars(); ++i)
        if (ctx.vars[i].kind == VarKind::Series)
            m += e[i];
    return m;
}

inline int local_grade(RingElement const &x)
{
    int g = INT_MAX;
    for (auto const &[e, s] : x.coeffs)
        g = std::min(g, local_grade_monomial(*x.ctx, e, s));
    return g - x.pden;
}

inline bool ring_is_unit(RingElement const &x)
{
    return !x.coeffs.empty() && local_grade(x) == 0;
}

inline RingElement ring_inverse(RingElement const &x)
{
    auto const &sr = x.ctx->scalar;
    if (x.coeffs.empty())
        throw std::domain_error("inverse of zero");
    RingElement w(x.ctx);
    if (sr.k == 1) {
        auto [e, s] = detail::leading_monomial(x);
        w = detail::invert_monomial(x.ctx, e, s);
    } else if (x.ctx->residue) {
        RingElement res = reduce_mod_ideal(x, x.ctx->residue);
        w = lift_naive(ring_inverse(res), x.ctx);
    } else {
        // complete local ring with maximal ideal (p, vars): constant term must
        // be a p-unit
        auto it = x.coeffs.find(ExpVec{});
        if (it == x.coeffs.end() || !sr.is_unit(it->second) || x.pden != 0)
            throw std::domain_error("inverse: not a unit");
        w = ring_const(x.ctx, sr.inverse(it->second));
    }
    // Newton: w <- w(2 - x w), doubling the correct part each round
    int guard = 64;
    while (guard-- > 0) {
        RingElement err = ring_sub(ring_mul(x, w), ring_one(x.ctx));
        if (is_zero_mod_prec(err))
            return w;
        w = ring_mul(w, ring_sub(ring_int(x.ctx, 2), ring_mul(x, w)));
    }
    throw std::domain_error("inverse: Newton iteration failed to converge");
}

// ---------------------------------------------------------------------------
// scalar-level operations lifted to elements

inline RingElement ring_frobenius(RingElement const &x, int power = 1)
{
    if (x.ctx->nvars() != 0)
        throw std::invalid_argument("frobenius: context has no Frobenius (not a scalar ring)");
    RingElement r = x;
    for (auto &[e, s] : r.coeffs)
        s = x.ctx->scalar.frobenius(s, power);
    detail::strip_zeros(r);
    return r;
}

inline RingElement teichmuller_lift(RingElement const &x, CtxPtr const &witt)
{
    if (x.ctx->scalar.k != 1 || x.ctx->nvars() != 0 || witt->nvars() != 0)
        throw std::invalid_argument("teichmuller: expects scalar contexts");
    if (x.ctx->scalar.p != witt->scalar.p || x.ctx->scalar.m > witt->scalar.m)
        throw std::invalid_argument("teichmuller: residue field not contained");
    RingElement r(witt);
    for (auto const &[e, s] : x.coeffs)
        r.coeffs.emplace(e, witt->scalar.teichmuller(s));
    return r;
}

// ---------------------------------------------------------------------------
// ring homomorphisms given on generators

struct RingHom {
    CtxPtr src;
    CtxPtr dst;
    int frob_power = 0; // applied to scalars via the Witt-functorial lift
    std::map<std::string, RingElement> images;

    RingHom() = default;
    RingHom(CtxPtr s, CtxPtr d) : src(std::move(s)), dst(std::move(d)) {}

    static RingHom identity(CtxPtr const &ctx)
    {
        RingHom h(ctx, ctx);
        for (auto const &v : ctx->vars)
            h.images.emplace(v.name, ring_var(ctx, v.name));
        return h;
    }

    static RingHom inclusion(CtxPtr const &src, CtxPtr const &dst)
    {
        RingHom h(src, dst);
        for (auto const &v : src->vars)
            h.images.emplace(v.name, embed(ring_var(src, v.name), dst));
        return h;
    }

    RingElement image(std::string const &name) const
    {
        auto it = images.find(name);
        if (it == images.end())
            throw std::invalid_argument("ring hom: no image for generator " + name);
        return it->second;
    }

    RingElement apply(RingElement const &x) const
    {
        if (!same_ctx(x.ctx, src))
            throw std::invalid_argument("ring hom: element not in source context");
        RingElement r = ring_zero(dst);
        // cache inverse images for negative laurent exponents
        std::map<int, RingElement> inv;
        for (auto const &[e, s] : x.coeffs) {
            Scalar sv = frob_power ? src->scalar.frobenius(s, frob_power) : s;
            RingElement term = ring_const(dst, sv);
            for (int i = 0; i < src->nvars(); ++i) {
                if (e[i] == 0)
                    continue;
                RingElement const &img = image(src->vars[i].name);
                if (e[i] > 0)
                    term = ring_mul(term, ring_pow(img, e[i]));
                else {
                    auto it = inv.find(i);
                    if (it == inv.end())
                        it = inv.emplace(i, ring_inverse(img)).first;
                    term = ring_mul(term, ring_pow(it->second, -e[i]));
                }
            }
            if (x.pden)
                term = ring_div_p(term, x.pden);
            r = ring_add(r, term);
        }
        r.prec = Prec::join(r.prec, {x.prec.p_abs, x.prec.u_abs});
        return r;
    }

    // this after first: x -> apply(first.apply(x))
    RingHom compose_after(RingHom const &first) const
    {
        if (!same_ctx(first.dst, src))
            throw std::invalid_argument("ring hom composition: chain mismatch");
        RingHom r(first.src, dst);
        r.frob_power = frob_power + first.frob_power;
        for (auto const &[name, img] : first.images)
            r.images.emplace(name, apply(img));
        return r;
    }
};

inline bool hom_equal_on_generators(RingHom const &a, RingHom const &b)
{
    if (!same_ctx(a.src, b.src) || !same_ctx(a.dst, b.dst))
        return false;
    int m = a.src->scalar.m;
    if (((a.frob_power - b.frob_power) % m + m) % m != 0)
        return false;
    for (auto const &v : a.src->vars)
        if (!ring_equal(a.image(v.name), b.image(v.name)))
            return false;
    return true;
}

// ---------------------------------------------------------------------------
// graded units: exponent bookkeeping for the degree -2 periodicity units

struct GradedElement {
    RingElement coeff;
    int unit_exp = 0; // exponent of the degree -2 unit

    GradedElement() = default;
    GradedElement(RingElement c, int e) : coeff(std::move(c)), unit_exp(e) {}
};

inline GradedElement graded_mul(GradedElement const &a, GradedElement const &b)
{
    return {ring_mul(a.coeff, b.coeff), a.unit_exp + b.unit_exp};
}

inline bool graded_equal(GradedElement const &a, GradedElement const &b)
{
    return a.unit_exp == b.unit_exp && ring_equal(a.coeff, b.coeff);
}

} // namespace fglab
