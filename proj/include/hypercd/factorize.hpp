#pragma once

// Factorization of second-order operators
//     A f = sum_j c_j B_j f + sum_l alpha_l df/dx_l + beta f,
//     B_j f = sum_{k in block j} b_k(x) d^2 f/dx_k^2,  |c_j| = 1,
// into a pair of first-order operators with hypercomplex coefficients,
//     A f = Upsilon(Upsilon_1 f) + Q f,
// hosted on quotient-generator slots i_{2^r k} of a large enough algebra.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cd.hpp"
#include "expr.hpp"

namespace hypercd {

class SpecificationError : public Error {
public:
    explicit SpecificationError(const std::string& what) : Error(what) {}
};

struct Block {
    CDNumber c;       // |c| = 1
    int lo = 0;       // variable range, 0-based inclusive
    int hi = -1;
};

struct OperatorSpec {
    int n = 0;
    std::vector<std::vector<Expr>> second_order;  // symmetric matrix of Expr
    std::vector<Expr> first_order;                // alpha_l
    Expr zero_order;                              // beta
    std::vector<Block> blocks;

    void validate() const {
        if (n <= 0) throw SpecificationError("dimension must be positive");
        if (second_order.size() != static_cast<size_t>(n))
            throw SpecificationError("second_order must be n x n");
        for (const auto& row : second_order)
            if (row.size() != static_cast<size_t>(n))
                throw SpecificationError("second_order must be n x n");
        if (!first_order.empty() && first_order.size() != static_cast<size_t>(n))
            throw SpecificationError("first_order must have n entries");
        if (!blocks.empty()) {
            std::vector<bool> seen(static_cast<size_t>(n), false);
            for (const auto& b : blocks) {
                if (std::abs(b.c.norm() - 1.0) > 1e-12)
                    throw SpecificationError("block constant must have |c| = 1");
                if (b.lo < 0 || b.hi >= n || b.lo > b.hi)
                    throw SpecificationError("block variable range out of bounds");
                for (int k = b.lo; k <= b.hi; ++k) {
                    if (seen[static_cast<size_t>(k)])
                        throw SpecificationError("block ranges overlap");
                    seen[static_cast<size_t>(k)] = true;
                }
            }
            for (bool s : seen)
                if (!s) throw SpecificationError("block ranges must partition the variables");
            for (int l = 0; l < n; ++l)
                for (int m = 0; m < n; ++m)
                    if (l != m && !second_order[size_t(l)][size_t(m)].is_zero())
                        throw SpecificationError(
                            "blocked operators require a diagonal principal part "
                            "(reduce with quadform first)");
        }
    }

    Expr diag(int k) const { return second_order[size_t(k)][size_t(k)]; }

    // Symbolic application to a test function.
    Expr apply(const Expr& f) const {
        Expr s = Expr::number(0.0);
        if (!blocks.empty()) {
            for (const auto& b : blocks) {
                Expr bf = Expr::number(0.0);
                for (int k = b.lo; k <= b.hi; ++k)
                    bf = bf + diag(k) * f.differentiate(k).differentiate(k);
                s = s + Expr::cd_constant(b.c) * bf;
            }
        } else {
            for (int l = 0; l < n; ++l)
                for (int m = 0; m < n; ++m)
                    s = s + second_order[size_t(l)][size_t(m)] *
                                f.differentiate(l).differentiate(m);
        }
        for (size_t l = 0; l < first_order.size(); ++l)
            s = s + first_order[l] * f.differentiate(static_cast<int>(l));
        s = s + zero_order * f;
        return s.folded();
    }
};

struct FirstOrderOp {
    int n = 0;
    // Per-variable factor sequences.  Application multiplies them one at a
    // time from the left, ((df/dx_k · f_1) · f_2) · ... ; the bracketing
    // matters once the operand is hypercomplex-valued, because the algebra is
    // not associative.  The collapsed products (see coeff()) agree with the
    // sequential form only on real operands.
    std::vector<std::vector<Expr>> factors;
    Expr zero_order;  // CDNumber-valued Expr

    Expr apply(const Expr& f) const {
        Expr s = Expr::number(0.0);
        for (int k = 0; k < n; ++k) {
            if (factors[size_t(k)].empty()) continue;
            Expr g = f.differentiate(k);
            if (g.is_zero()) continue;
            for (const Expr& fac : factors[size_t(k)]) g = g * fac;
            s = s + g;
        }
        s = s + f * zero_order;
        return s.folded();
    }

    // Collapsed coefficient expression for variable k (serialization view).
    Expr coeff(int k) const {
        Expr g = Expr::number(1.0);
        bool first = true;
        for (const Expr& fac : factors[size_t(k)]) {
            g = first ? fac : g * fac;
            first = false;
        }
        return first ? Expr::number(0.0) : g;
    }

    FirstOrderOp negated() const {
        FirstOrderOp r = *this;
        for (auto& seq : r.factors)
            if (!seq.empty()) seq.front() = -seq.front();
        r.zero_order = -r.zero_order;
        return r;
    }
};

// Remainder of order <= 1.
struct RemainderOp {
    int n = 0;
    std::vector<Expr> first_order;  // CDNumber-valued Expr
    Expr zero_order;

    Expr apply(const Expr& f) const {
        Expr s = Expr::number(0.0);
        for (int k = 0; k < n; ++k)
            s = s + f.differentiate(k) * first_order[size_t(k)];
        s = s + f * zero_order;
        return s.folded();
    }
};

struct Factorization {
    FirstOrderOp upsilon;
    FirstOrderOp upsilon1;
    RemainderOp remainder;
    int base_level = 0;    // r
    int lifted_level = 0;  // v
};

// Minimal v >= r with 2^{v-1} < 2^p (m+1) <= 2^v (second-order path).
inline int choose_level(int r, int p, int m) {
    if (r < 1) throw DomainError("choose_level requires r >= 1");
    if (p < 0 || m < 1) throw DomainError("choose_level requires p >= 0, m >= 1");
    const long target = (1L << p) * (m + 1);
    int v = 0;
    while ((1L << v) < target) ++v;
    return std::max(v, r);
}

// General (Theorem-10) path: minimal v >= r with 2^{v-r} - 1 >= slot_count.
inline int choose_level_general(int r, long slot_count) {
    if (r < 1) throw DomainError("choose_level_general requires r >= 1");
    int v = r;
    while ((1L << (v - r)) - 1 < slot_count) ++v;
    return v;
}

// Square root of a unit constant in polar form c = exp(u gamma), u = Im c/|Im c|.
inline CDNumber polar_sqrt(const CDNumber& c) {
    if (std::abs(c.norm() - 1.0) > 1e-12) throw DomainError("polar_sqrt requires |c| = 1");
    CDNumber im = c;
    im.at(0) = 0.0;
    const double s = im.norm();
    const double gamma = std::atan2(s, c.re());
    CDNumber u;
    if (s < 1e-14) {
        if (c.re() > 0) return CDNumber::real(1.0, c.level());
        u = CDNumber::basis(1, std::max(c.level(), 1));  // convention for c = -1
    } else {
        u = (1.0 / s) * im;
    }
    return CDNumber::real(std::cos(gamma / 2.0), u.level()) + std::sin(gamma / 2.0) * u;
}

namespace detail {

// Direction data used for the p-count of §-level selection: returns the
// normalized imaginary direction of c, or i_1 for c = -1, or nothing for
// real positive c (gamma = 0).
inline std::optional<CDNumber> exponent_direction(const CDNumber& c) {
    CDNumber im = c;
    im.at(0) = 0.0;
    const double s = im.norm();
    if (s < 1e-14) {
        if (c.re() > 0) return std::nullopt;
        return CDNumber::basis(1);
    }
    return (1.0 / s) * im;
}

}  // namespace detail

inline int direction_count(const OperatorSpec& spec) {
    int p = 0;
    std::optional<CDNumber> prev;
    for (const auto& b : spec.blocks) {
        auto dir = detail::exponent_direction(b.c);
        if (!dir) {
            prev = dir ? std::optional<CDNumber>(*dir) : std::nullopt;
            continue;  // gamma_j = 0 contributes nothing
        }
        if (!prev || (dir->compact() - prev->compact()).norm() > 1e-12) ++p;
        prev = dir;
    }
    return p;
}

// Level of the smallest algebra containing all factor constants w_j.
inline int base_level(const OperatorSpec& spec) {
    int r = 0;
    for (const auto& b : spec.blocks) {
        CDNumber w = polar_sqrt(b.c).compact();
        r = std::max(r, w.level());
    }
    return r;
}

inline int slot_index(int r, int k /*1-based variable*/) { return (1 << r) * k; }

namespace detail {

// Reject block coefficients whose sign is not constant on [-1,1]^n.
inline Expr coefficient_root(const Expr& b, int n, const std::string& name) {
    if (b.is_constant()) {
        const double v = b.eval_real({});
        if (v <= 0) throw SpecificationError("coefficient " + name + " must be positive "
                                             "(absorb signs into the block constant)");
        return Expr::number(std::sqrt(v));
    }
    // sample on a coarse lattice of the default verification box
    const int per_axis = 5;
    std::vector<double> z(static_cast<size_t>(n), 0.0);
    long total = 1;
    for (int k = 0; k < n; ++k) total *= per_axis;
    for (long idx = 0; idx < total; ++idx) {
        long t = idx;
        for (int k = 0; k < n; ++k) {
            z[static_cast<size_t>(k)] = -1.0 + 2.0 * double(t % per_axis) / (per_axis - 1);
            t /= per_axis;
        }
        if (b.eval_real(z) <= 0)
            throw SpecificationError("coefficient " + name +
                                     " changes sign or vanishes on the domain; "
                                     "piecewise factorization is not supported");
    }
    return Expr::sqrt(b);
}

}  // namespace detail

inline std::pair<FirstOrderOp, FirstOrderOp> build_sigma_pair(const OperatorSpec& spec, int v) {
    spec.validate();
    if (spec.blocks.empty())
        throw SpecificationError("factorization requires an explicit block structure");
    const int r = base_level(spec);
    if (slot_index(r, spec.n) >= (1 << v))
        throw CapacityError("level v too small for the quotient-generator slots");
    FirstOrderOp sigma, sigma1;
    sigma.n = sigma1.n = spec.n;
    sigma.factors.assign(static_cast<size_t>(spec.n), {});
    sigma1.factors.assign(static_cast<size_t>(spec.n), {});
    sigma.zero_order = sigma1.zero_order = Expr::number(0.0);
    for (const auto& b : spec.blocks) {
        const CDNumber w = polar_sqrt(b.c);
        for (int k = b.lo; k <= b.hi; ++k) {
            Expr a = detail::coefficient_root(spec.diag(k), spec.n,
                                              "b_" + std::to_string(k + 1));
            const CDNumber slot = CDNumber::basis(slot_index(r, k + 1), v);
            sigma.factors[size_t(k)] = {a, Expr::cd_constant(w.conj()),
                                        Expr::cd_constant(slot.conj())};
            sigma1.factors[size_t(k)] = {a, Expr::cd_constant(w),
                                         Expr::cd_constant(slot.conj())};
        }
    }
    return {sigma, sigma1};
}

inline RemainderOp build_remainder(const OperatorSpec& spec, const FirstOrderOp& sigma,
                                   const FirstOrderOp& sigma1) {
    // With Upsilon = sigma (coefficients a_k A_k) and Upsilon_1 = -sigma_1
    // (coefficients a_k B_k),
    //   Upsilon(Upsilon_1 f) = - sum a_{k1} a_{k2} (d^2 f) (B_{k2} A_{k1})
    //                          - sum a_{k1} (d a_{k2}/dx_{k1}) (d f/dx_{k2}) (B_{k2} A_{k1}),
    // the first sum reproducing the principal part.  The remainder therefore
    // carries + a_{k1} (d a_{k2}/dx_{k1}) (B_{k2} A_{k1}) on d f/dx_{k2},
    // plus the unfactored alpha/beta terms of the input operator.
    (void)sigma;
    (void)sigma1;
    RemainderOp q;
    q.n = spec.n;
    q.first_order.assign(static_cast<size_t>(spec.n), Expr::number(0.0));
    q.zero_order = spec.zero_order;
    // Rebuild the scalar roots and CD factors from the spec (same construction
    // as build_sigma_pair; the slot level only affects embedding, not values).
    const int r = base_level(spec);
    int v = std::max(choose_level(std::max(r, 1), direction_count(spec),
                                  static_cast<int>(spec.blocks.size())),
                     1);
    while (slot_index(r, spec.n) >= (1 << v)) ++v;
    std::vector<Expr> a(static_cast<size_t>(spec.n), Expr::number(0.0));
    std::vector<CDNumber> w_of(static_cast<size_t>(spec.n));
    std::vector<CDNumber> slot_of(static_cast<size_t>(spec.n));
    for (const auto& b : spec.blocks) {
        const CDNumber w = polar_sqrt(b.c);
        for (int k = b.lo; k <= b.hi; ++k) {
            a[size_t(k)] = detail::coefficient_root(spec.diag(k), spec.n,
                                                    "b_" + std::to_string(k + 1));
            w_of[size_t(k)] = w;
            slot_of[size_t(k)] = CDNumber::basis(slot_index(r, k + 1), v);
        }
    }
    for (int k2 = 0; k2 < spec.n; ++k2) {
        Expr acc = Expr::number(0.0);
        for (int k1 = 0; k1 < spec.n; ++k1) {
            Expr da = a[size_t(k2)].differentiate(k1);
            if (da.is_zero()) continue;
            // 2(10)-type factor, bracketed exactly as in the composition:
            //   (((w_{j2} l_{k2}^*) w_{j1}^*) l_{k1}^*)
            CDNumber K = ((w_of[size_t(k2)] * slot_of[size_t(k2)].conj()) *
                          w_of[size_t(k1)].conj()) *
                         slot_of[size_t(k1)].conj();
            acc = acc + (a[size_t(k1)] * da) * Expr::cd_constant(K);
        }
        if (spec.first_order.size() == static_cast<size_t>(spec.n))
            acc = acc + spec.first_order[size_t(k2)];
        q.first_order[size_t(k2)] = acc.folded();
    }
    return q;
}

inline Factorization factorize(const OperatorSpec& spec) {
    spec.validate();
    if (spec.blocks.empty())
        throw SpecificationError("factorization requires an explicit block structure");
    const int r = base_level(spec);
    const int p = direction_count(spec);
    int v = choose_level(std::max(r, 1), p, static_cast<int>(spec.blocks.size()));
    while (slot_index(r, spec.n) >= (1 << v)) ++v;
    auto [sigma, sigma1] = build_sigma_pair(spec, v);
    Factorization f;
    f.upsilon = sigma;
    f.upsilon1 = sigma1.negated();
    f.remainder = build_remainder(spec, sigma, sigma1);
    f.base_level = r;
    f.lifted_level = v;
    return f;
}

struct ResidualReport {
    double max_residual = 0.0;
    int tests = 0;
    long nodes = 0;
};

// Max over grid nodes and test functions of |A f - (Upsilon(Upsilon_1 f) + Q f)|,
// all derivatives taken symbolically.
inline ResidualReport verify_factorization(const OperatorSpec& spec, const Factorization& fact,
                                           const std::vector<Expr>& tests, int nodes_per_axis = 17,
                                           double lo = -1.0, double hi = 1.0) {
    ResidualReport rep;
    rep.tests = static_cast<int>(tests.size());
    for (const Expr& f : tests) {
        Expr lhs = spec.apply(f);
        Expr rhs = (fact.upsilon.apply(fact.upsilon1.apply(f)) + fact.remainder.apply(f)).folded();
        std::vector<double> z(static_cast<size_t>(spec.n), 0.0);
        long total = 1;
        for (int k = 0; k < spec.n; ++k) total *= nodes_per_axis;
        for (long idx = 0; idx < total; ++idx) {
            long t = idx;
            for (int k = 0; k < spec.n; ++k) {
                z[static_cast<size_t>(k)] =
                    lo + (hi - lo) * double(t % nodes_per_axis) / (nodes_per_axis - 1);
                t /= nodes_per_axis;
            }
            rep.max_residual = std::max(rep.max_residual, (lhs.eval(z) - rhs.eval(z)).norm());
            ++rep.nodes;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Odd-order lift E g(t,x) = d(t A g(t,x))/dt.

struct GeneralTerm {
    std::vector<int> deriv;  // multi-index over variables
    Expr coeff;              // possibly CD-valued
};

struct GeneralOperator {
    int n = 0;
    std::vector<GeneralTerm> terms;

    int order() const {
        int o = 0;
        for (const auto& t : terms) {
            if (t.coeff.is_zero()) continue;
            int s = 0;
            for (int d : t.deriv) s += d;
            o = std::max(o, s);
        }
        return o;
    }

    Expr apply(const Expr& f) const {
        Expr s = Expr::number(0.0);
        for (const auto& t : terms) {
            Expr g = f;
            for (int k = 0; k < n; ++k)
                for (int rep = 0; rep < t.deriv[size_t(k)]; ++rep) g = g.differentiate(k);
            s = s + g * t.coeff;
        }
        return s.folded();
    }
};

// Lift to (t, x) with t as coordinate 0: E = A + t d/dt A  (coefficients of A
// are t-independent, so d(t A g)/dt = A g + t A(dg/dt)).
inline GeneralOperator lift_odd_order(const GeneralOperator& a) {
    GeneralOperator e;
    e.n = a.n + 1;
    for (const auto& t : a.terms) {
        GeneralTerm plain;
        plain.deriv.assign(static_cast<size_t>(e.n), 0);
        for (int k = 0; k < a.n; ++k) plain.deriv[size_t(k + 1)] = t.deriv[size_t(k)];
        plain.coeff = t.coeff.shift_coords(1);
        GeneralTerm lifted = plain;
        lifted.deriv[0] += 1;
        lifted.coeff = Expr::var(0) * plain.coeff;
        e.terms.push_back(plain);
        e.terms.push_back(lifted);
    }
    return e;
}

// Factor the lift of a first-order operator A = sum alpha_l d/dx_l + beta:
//   E f = Upsilon(Upsilon_1 f) + Q f  with
//   Upsilon   = sum alpha_l d/dx_l [i_2^*],
//   Upsilon_1 = (1 + t d/dt) [i_2],   Q = beta (1 + t d/dt).
// The residual at t = 0 has order 2s-2 = 0.
inline Factorization factor_lifted_first_order(const std::vector<Expr>& alpha, const Expr& beta) {
    const int n = static_cast<int>(alpha.size()) + 1;
    Factorization f;
    f.base_level = 1;
    f.lifted_level = 2;
    const CDNumber i2 = CDNumber::basis(2);
    f.upsilon.n = n;
    f.upsilon.factors.assign(static_cast<size_t>(n), {});
    f.upsilon.zero_order = Expr::number(0.0);
    for (size_t l = 0; l < alpha.size(); ++l)
        f.upsilon.factors[l + 1] = {alpha[l].shift_coords(1), Expr::cd_constant(i2.conj())};
    f.upsilon1.n = n;
    f.upsilon1.factors.assign(static_cast<size_t>(n), {});
    f.upsilon1.factors[0] = {Expr::var(0), Expr::cd_constant(i2)};
    f.upsilon1.zero_order = Expr::cd_constant(i2);
    f.remainder.n = n;
    f.remainder.first_order.assign(static_cast<size_t>(n), Expr::number(0.0));
    f.remainder.first_order[0] = Expr::var(0) * beta.shift_coords(1);
    f.remainder.zero_order = beta.shift_coords(1);
    return f;
}

// ---------------------------------------------------------------------------
// (Upsilon + beta)(Upsilon + beta)^* for constant coefficients t_j, beta.

inline OperatorSpec compose_elliptic(const FirstOrderOp& upsilon, const Expr& beta) {
    const int n = upsilon.n;
    std::vector<CDNumber> t(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        Expr c = upsilon.coeff(j);
        if (!c.is_constant())
            throw SpecificationError("compose_elliptic requires constant coefficients");
        t[size_t(j)] = c.eval({});
    }
    if (!beta.is_constant())
        throw SpecificationError("compose_elliptic requires a constant zero-order part");
    CDNumber b = beta.eval({});
    OperatorSpec spec;
    spec.n = n;
    spec.second_order.assign(static_cast<size_t>(n),
                             std::vector<Expr>(static_cast<size_t>(n), Expr::number(0.0)));
    spec.first_order.assign(static_cast<size_t>(n), Expr::number(0.0));
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k)
            spec.second_order[size_t(j)][size_t(k)] =
                Expr::number(real_scalar_product(t[size_t(j)], t[size_t(k)]));
        spec.first_order[size_t(j)] =
            Expr::number(2.0 * real_scalar_product(t[size_t(j)], b));
    }
    spec.zero_order = Expr::number(b.norm2());
    return spec;
}

}  // namespace hypercd
