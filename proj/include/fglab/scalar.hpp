#pragma once

// Base scalar arithmetic: the ring (Z/p^k)[x]/(h) with h monic of degree m.
// k = 1 gives the finite field F_{p^m} (h = Conway polynomial), k > 1 gives
// the length-k truncation of the Witt ring W(F_{p^m}), with h the coefficient
// -wise lift of the Conway polynomial.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fglab {

inline constexpr int kMaxExtDeg = 8;

// coefficients of x^0..x^(m-1); value semantics, context-free POD
struct Scalar {
    std::array<int64_t, kMaxExtDeg> c{};

    bool operator==(Scalar const &o) const = default;
    auto operator<=>(Scalar const &o) const = default;
};

inline bool is_prime_int(int64_t n)
{
    if (n < 2)
        return false;
    for (int64_t d = 2; d * d <= n; ++d)
        if (n % d == 0)
            return false;
    return true;
}

inline int64_t pow_int(int64_t b, int e)
{
    int64_t r = 1;
    while (e-- > 0) {
        if (b != 0 && r > INT64_MAX / b)
            throw std::overflow_error("pow_int overflow");
        r *= b;
    }
    return r;
}

// Conway polynomials from the published tables, lower coefficients ascending
// (leading coefficient 1 omitted).  Verified irreducible, primitive and
// norm-compatible along subfields.
inline std::vector<int64_t> conway_polynomial(int64_t p, int m)
{
    struct Entry {
        int64_t p;
        int m;
        std::vector<int64_t> low;
    };
    static const std::vector<Entry> table = {
        {2, 1, {1}},
        {2, 2, {1, 1}},
        {2, 3, {1, 1, 0}},
        {2, 4, {1, 1, 0, 0}},
        {2, 6, {1, 1, 0, 1, 1, 0}},
        {3, 1, {1}},
        {3, 2, {2, 2}},
        {3, 3, {1, 2, 0}},
        {3, 4, {2, 0, 0, 2}},
        {3, 6, {2, 2, 1, 0, 2, 0}},
        {5, 1, {3}},
        {5, 2, {2, 4}},
        {7, 1, {4}},
        {7, 2, {3, 6}},
    };
    for (auto const &e : table)
        if (e.p == p && e.m == m)
            return e.low;
    throw std::invalid_argument("no Conway polynomial stored for p=" + std::to_string(p) +
                                ", m=" + std::to_string(m));
}

// Arithmetic of (Z/p^k)[x]/(h).  Immutable after construction.
class ScalarRing {
  public:
    int64_t p = 0;
    int k = 1;      // p-adic length: modulus p^k
    int m = 1;      // extension degree
    int64_t pk = 0; // p^k
    std::vector<int64_t> h; // lower coefficients of the monic modulus, length m

    ScalarRing() = default;

    ScalarRing(int64_t p_, int k_, int m_) : p(p_), k(k_), m(m_)
    {
        if (!is_prime_int(p))
            throw std::invalid_argument("scalar ring: p must be prime");
        if (k < 1)
            throw std::invalid_argument("scalar ring: precision must be >= 1");
        if (m < 1 || m > kMaxExtDeg)
            throw std::invalid_argument("scalar ring: extension degree out of range");
        pk = pow_int(p, k);
        h = conway_polynomial(p, m);
        frob_image_ = compute_frobenius_image();
    }

    bool same_as(ScalarRing const &o) const { return p == o.p && k == o.k && m == o.m; }

    Scalar zero() const { return Scalar{}; }

    Scalar one() const
    {
        Scalar s{};
        s.c[0] = 1;
        return s;
    }

    Scalar from_int(int64_t v) const
    {
        Scalar s{};
        s.c[0] = mod(v);
        return s;
    }

    // canonical generator x of the extension (zero for m = 1)
    Scalar gen() const
    {
        Scalar s{};
        if (m > 1)
            s.c[1] = 1;
        return s;
    }

    Scalar from_coeffs(std::vector<int64_t> const &v) const
    {
        if ((int)v.size() > m)
            throw std::invalid_argument("scalar: too many coefficients");
        Scalar s{};
        for (size_t i = 0; i < v.size(); ++i)
            s.c[i] = mod(v[i]);
        return s;
    }

    bool is_zero(Scalar const &a) const
    {
        for (int i = 0; i < m; ++i)
            if (a.c[i] != 0)
                return false;
        return true;
    }

    Scalar add(Scalar const &a, Scalar const &b) const
    {
        Scalar r{};
        for (int i = 0; i < m; ++i) {
            int64_t v = a.c[i] + b.c[i];
            r.c[i] = v >= pk ? v - pk : v;
        }
        return r;
    }

    Scalar sub(Scalar const &a, Scalar const &b) const
    {
        Scalar r{};
        for (int i = 0; i < m; ++i) {
            int64_t v = a.c[i] - b.c[i];
            r.c[i] = v < 0 ? v + pk : v;
        }
        return r;
    }

    Scalar neg(Scalar const &a) const { return sub(zero(), a); }

    Scalar mul(Scalar const &a, Scalar const &b) const
    {
        // schoolbook product then reduction by the monic modulus
        std::array<__int128, 2 * kMaxExtDeg> t{};
        for (int i = 0; i < m; ++i) {
            if (a.c[i] == 0)
                continue;
            for (int j = 0; j < m; ++j)
                t[i + j] += (__int128)a.c[i] * b.c[j];
        }
        for (int d = 2 * m - 2; d >= m; --d) {
            int64_t c = (int64_t)(t[d] % pk);
            if (c == 0)
                continue;
            t[d] = 0;
            for (int i = 0; i < m; ++i)
                t[d - m + i] -= (__int128)c * h[i];
        }
        Scalar r{};
        for (int i = 0; i < m; ++i) {
            int64_t v = (int64_t)(t[i] % pk);
            r.c[i] = v < 0 ? v + pk : v;
        }
        return r;
    }

    Scalar scale(Scalar const &a, int64_t v) const
    {
        int64_t vv = mod(v);
        Scalar r{};
        for (int i = 0; i < m; ++i)
            r.c[i] = (int64_t)((__int128)a.c[i] * vv % pk);
        return r;
    }

    Scalar pow(Scalar a, int64_t e) const
    {
        if (e < 0)
            throw std::invalid_argument("scalar pow: negative exponent");
        Scalar r = one();
        while (e) {
            if (e & 1)
                r = mul(r, a);
            a = mul(a, a);
            e >>= 1;
        }
        return r;
    }

    // p-adic valuation: min over coefficients, k when zero
    int valuation(Scalar const &a) const
    {
        int v = k;
        for (int i = 0; i < m; ++i)
            if (a.c[i] != 0)
                v = std::min(v, val_int(a.c[i]));
        return v;
    }

    bool is_unit(Scalar const &a) const { return valuation(a) == 0; }

    Scalar inverse(Scalar const &a) const
    {
        if (!is_unit(a))
            throw std::domain_error("scalar inverse: not a unit");
        // residue inverse by Fermat, then Newton lifting to length k
        Scalar y = residue_inverse(a);
        int prec = 1;
        while (prec < k) {
            // y <- y(2 - a y)
            Scalar t = sub(from_int(2), mul(a, y));
            y = mul(y, t);
            prec *= 2;
        }
        return y;
    }

    // exact division by p^j; the top j digits of the result are unspecified,
    // caller must track the precision drop
    Scalar shift_down(Scalar const &a, int j) const
    {
        if (j == 0)
            return a;
        int64_t pj = pow_int(p, j);
        Scalar r{};
        for (int i = 0; i < m; ++i) {
            if (a.c[i] % pj != 0)
                throw std::domain_error("scalar shift_down: not divisible");
            r.c[i] = a.c[i] / pj;
        }
        return r;
    }

    Scalar shift_up(Scalar const &a, int j) const
    {
        int64_t pj = pow_int(p, j);
        Scalar r{};
        for (int i = 0; i < m; ++i)
            r.c[i] = (int64_t)((__int128)a.c[i] * pj % pk);
        return r;
    }

    // digit in [0, p^span) at level j: (a div p^j) mod p^span, coefficientwise
    Scalar digits(Scalar const &a, int j, int span = 1) const
    {
        int64_t pj = pow_int(p, j), ps = pow_int(p, span);
        Scalar r{};
        for (int i = 0; i < m; ++i)
            r.c[i] = (a.c[i] / pj) % ps;
        return r;
    }

    // image under the lift of x -> x^p, applied `power` times; a ring
    // automorphism of order m
    Scalar frobenius(Scalar const &a, int power = 1) const
    {
        int e = ((power % m) + m) % m;
        Scalar r = a;
        for (int i = 0; i < e; ++i)
            r = apply_gen_image(r, frob_image_);
        return r;
    }

    // unique multiplicative lift of a residue scalar (fixed point of y -> y^(p^m))
    Scalar teichmuller(Scalar const &residue) const
    {
        Scalar y{};
        for (int i = 0; i < m; ++i)
            y.c[i] = residue.c[i] % pk;
        if (k == 1)
            return y;
        int64_t q = pow_int(p, m);
        for (int it = 0; it <= k; ++it)
            y = pow(y, q);
        return y;
    }

    // reduce to a shorter ring (same p, m)
    Scalar reduce_to(Scalar const &a, ScalarRing const &target) const
    {
        if (target.p != p || target.m != m || target.k > k)
            throw std::invalid_argument("scalar reduce: incompatible target");
        Scalar r{};
        for (int i = 0; i < m; ++i)
            r.c[i] = a.c[i] % target.pk;
        return r;
    }

    // decimal encoding: sum c_i * (p^k)^i as one integer
    std::string to_string(Scalar const &a) const
    {
        unsigned __int128 acc = 0;
        for (int i = m - 1; i >= 0; --i)
            acc = acc * (unsigned __int128)pk + (unsigned __int128)a.c[i];
        if (acc == 0)
            return "0";
        std::string s;
        while (acc > 0) {
            s.insert(s.begin(), char('0' + (int)(acc % 10)));
            acc /= 10;
        }
        return s;
    }

    Scalar from_string(std::string const &s) const
    {
        unsigned __int128 acc = 0;
        for (char ch : s) {
            if (ch < '0' || ch > '9')
                throw std::invalid_argument("scalar parse: bad digit");
            acc = acc * 10 + (unsigned)(ch - '0');
        }
        Scalar r{};
        for (int i = 0; i < m; ++i) {
            r.c[i] = (int64_t)(acc % (unsigned __int128)pk);
            acc /= (unsigned __int128)pk;
        }
        if (acc != 0)
            throw std::invalid_argument("scalar parse: value out of range");
        return r;
    }

  private:
    Scalar frob_image_; // image of the generator x under Frobenius

    int64_t mod(int64_t v) const
    {
        int64_t r = v % pk;
        return r < 0 ? r + pk : r;
    }

    int val_int(int64_t v) const
    {
        int n = 0;
        while (v % p == 0) {
            v /= p;
            ++n;
        }
        return n;
    }

    Scalar residue_inverse(Scalar const &a) const
    {
        // Fermat in the residue field: a^(p^m - 2), computed on the digit-0 part
        Scalar a0 = digits(a, 0, 1);
        int64_t q = pow_int(p, m);
        Scalar y = one();
        Scalar b = a0;
        int64_t e = q - 2;
        while (e) {
            if (e & 1)
                y = mul_res(y, b);
            b = mul_res(b, b);
            e >>= 1;
        }
        return y;
    }

    // multiplication with digit-0 semantics (used only for residue inverse)
    Scalar mul_res(Scalar const &a, Scalar const &b) const
    {
        Scalar r = mul(a, b);
        return digits(r, 0, 1);
    }

    Scalar apply_gen_image(Scalar const &a, Scalar const &img) const
    {
        // evaluate the coefficient polynomial at img
        Scalar acc{};
        for (int i = m - 1; i >= 0; --i) {
            acc = mul(acc, img);
            acc.c[0] = (acc.c[0] + a.c[i]) % pk;
        }
        return acc;
    }

    Scalar compute_frobenius_image()
    {
        Scalar x = gen();
        if (m == 1)
            return x;
        Scalar r = pow(x, p);
        if (k == 1)
            return r;
        // Newton step towards the root of h near x^p: r <- r - h(r)/h'(r)
        for (int it = 0, prec = 1; prec < k; ++it, prec *= 2) {
            Scalar hv = eval_h(r);
            Scalar hd = eval_h_deriv(r);
            r = sub(r, mul(hv, inverse_len(hd)));
        }
        if (!is_zero(eval_h(r)))
            throw std::logic_error("frobenius image: Newton failed");
        return r;
    }

    Scalar eval_h(Scalar const &r) const
    {
        Scalar acc = one(); // leading coefficient
        for (int i = m - 1; i >= 0; --i) {
            acc = mul(acc, r);
            acc.c[0] = (acc.c[0] + h[i]) % pk;
        }
        return acc;
    }

    Scalar eval_h_deriv(Scalar const &r) const
    {
        Scalar acc = from_int(m);
        for (int i = m - 1; i >= 1; --i) {
            acc = mul(acc, r);
            acc = add(acc, scale(one(), (int64_t)i * h[i]));
        }
        return acc;
    }

    // full-length inverse bootstrapped from the residue (used before
    // frob_image_ is available, so no recursion through inverse())
    Scalar inverse_len(Scalar const &a) const
    {
        Scalar y = residue_inverse(a);
        for (int prec = 1; prec < k; prec *= 2)
            y = mul(y, sub(from_int(2), mul(a, y)));
        return y;
    }
};

} // namespace fglab
