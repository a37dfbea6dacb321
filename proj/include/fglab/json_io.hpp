#pragma once

// JSON encodings. Scalars serialize as decimal strings; coefficient tables as
// sorted [exponent-vector, scalar-string] pairs, so identical data always
// produces identical bytes.

#include "fgl.hpp"
#include "ring.hpp"
#include "series.hpp"

#include "json.hpp"

namespace fglab {

using json = nlohmann::json;

inline json context_to_json(RingContext const &ctx)
{
    json j;
    j["p"] = ctx.scalar.p;
    j["k"] = ctx.scalar.k;
    j["m"] = ctx.scalar.m;
    j["poly"] = ctx.scalar.h;
    j["label"] = ctx.label;
    json vars = json::array();
    for (auto const &v : ctx.vars) {
        json jv;
        jv["name"] = v.name;
        jv["kind"] = v.kind == VarKind::Series    ? "series"
                     : v.kind == VarKind::Laurent ? "laurent"
                                                  : "algebraic";
        jv["bound"] = v.bound;
        if (v.kind == VarKind::Laurent)
            jv["vmin"] = v.vmin;
        jv["val"] = v.fine_val;
        vars.push_back(jv);
    }
    j["vars"] = vars;
    return j;
}

inline json element_to_json(RingElement const &x)
{
    RingElement xx = x;
    detail::normalize_pden(xx);
    json coeffs = json::array();
    for (auto const &[e, s] : xx.coeffs) {
        json exps = json::array();
        for (int i = 0; i < xx.ctx->nvars(); ++i)
            exps.push_back((int)e[i]);
        coeffs.push_back(json::array({exps, xx.ctx->scalar.to_string(s)}));
    }
    json j;
    j["coeffs"] = coeffs;
    if (xx.pden)
        j["pden"] = xx.pden;
    return j;
}

inline RingElement element_from_json(json const &j, CtxPtr const &ctx)
{
    RingElement r(ctx);
    for (auto const &pair : j.at("coeffs")) {
        ExpVec e{};
        auto const &exps = pair.at(0);
        for (size_t i = 0; i < exps.size(); ++i)
            e[i] = (int16_t)exps[i].get<int>();
        r.coeffs[e] = ctx->scalar.from_string(pair.at(1).get<std::string>());
    }
    r.pden = j.value("pden", 0);
    detail::strip_zeros(r);
    return r;
}

inline json series_to_json(TruncatedSeries const &f)
{
    json j;
    j["var"] = f.var;
    j["bound"] = f.bound;
    json coeffs = json::array();
    for (int d = 0; d <= f.bound; ++d)
        if (!f.c[d].stored_zero())
            coeffs.push_back(json::array({d, element_to_json(f.c[d])}));
    j["coeffs"] = coeffs;
    return j;
}

inline TruncatedSeries series_from_json(json const &j, CtxPtr const &ctx)
{
    TruncatedSeries f(ctx, j.at("bound").get<int>(), j.value("var", "X"));
    for (auto const &pair : j.at("coeffs"))
        f.set(pair.at(0).get<int>(), element_from_json(pair.at(1), ctx));
    return f;
}

inline json biv_to_json(BivariateSeries const &F)
{
    json j;
    j["bound"] = F.bound;
    json coeffs = json::array();
    for (auto const &[ij, v] : F.t)
        if (!v.stored_zero())
            coeffs.push_back(json::array({ij.first, ij.second, element_to_json(v)}));
    j["coeffs"] = coeffs;
    return j;
}

inline BivariateSeries biv_from_json(json const &j, CtxPtr const &ctx)
{
    BivariateSeries F(ctx, j.at("bound").get<int>());
    for (auto const &trip : j.at("coeffs"))
        F.add_to(trip.at(0).get<int>(), trip.at(1).get<int>(),
                 element_from_json(trip.at(2), ctx));
    return F;
}

inline json hom_to_json(RingHom const &h)
{
    json j;
    j["frobenius_power"] = h.frob_power;
    json imgs;
    for (auto const &[name, img] : h.images)
        imgs[name] = element_to_json(img);
    j["images"] = imgs;
    return j;
}

inline json fglhom_to_json(FglHom const &h)
{
    json j;
    j["f"] = series_to_json(h.f);
    j["alpha"] = hom_to_json(h.alpha);
    j["source"] = h.src ? h.src->ctx()->label : "";
    j["target"] = h.dst ? h.dst->ctx()->label : "";
    return j;
}

inline json report_to_json(VerifyReport const &rep)
{
    json j = json::array();
    for (auto const &l : rep.lines) {
        json e;
        e["name"] = l.name;
        e["pass"] = l.pass;
        if (!l.detail.empty())
            e["detail"] = l.detail;
        j.push_back(e);
    }
    return j;
}

// stable content hash (FNV-1a over the canonical dump)
inline uint64_t content_hash(json const &j)
{
    std::string s = j.dump();
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hash_hex(uint64_t h)
{
    char buf[17];
    snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

} // namespace fglab
