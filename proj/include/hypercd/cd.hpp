#pragma once

// Cayley-Dickson arithmetic at arbitrary level v (dimension 2^v).
// Basis products are exact integer data obtained from the doubling
// recursion (M1,M2); floating point enters only through coefficients.

#include <array>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace hypercd {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class CapacityError : public Error {
public:
    explicit CapacityError(const std::string& what) : Error(what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

// Division failed because the operand is (numerically) a zero divisor.
class ZeroDivisorError : public Error {
public:
    ZeroDivisorError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

namespace detail {
inline int& max_table_level() {
    static int lvl = 8;  // dimension 256; tables above this are not memoized
    return lvl;
}
}  // namespace detail

inline void set_max_table_level(int v) {
    if (v < 0 || v > 16) throw CapacityError("max table level out of range");
    detail::max_table_level() = v;
}
inline int max_table_level() { return detail::max_table_level(); }

// A signed basis generator: sign * i_index.
struct SignedBasis {
    int sign;    // +1 or -1
    int index;   // in [0, 2^v)
};

namespace detail {

// Doubling recursion for i_a * i_b inside A_v.  Writing z = xi + eta*l with
// l = i_{2^{v-1}}, (M2) gives the four quadrant rules used below.
inline SignedBasis basis_product_rec(int a, int b, int v) {
    if (v == 0) return {+1, 0};
    const int h = 1 << (v - 1);
    if (a < h && b < h) return basis_product_rec(a, b, v - 1);
    if (a < h && b >= h) {
        // xi * (delta l) = (delta xi) l
        SignedBasis r = basis_product_rec(b - h, a, v - 1);
        return {r.sign, r.index + h};
    }
    if (a >= h && b < h) {
        // (eta l) * gamma = (eta gamma~) l
        SignedBasis r = basis_product_rec(a - h, b, v - 1);
        int cs = (b == 0) ? +1 : -1;
        return {r.sign * cs, r.index + h};
    }
    // (eta l)(delta l) = -(delta~ eta)
    SignedBasis r = basis_product_rec(b - h, a - h, v - 1);
    int cs = (b - h == 0) ? +1 : -1;
    return {-r.sign * cs, r.index};
}

struct BasisTable {
    int v = -1;
    std::vector<int8_t> sign;    // 2^v * 2^v
    std::vector<int32_t> index;  // 2^v * 2^v
};

inline const BasisTable& basis_table(int v) {
    static std::array<BasisTable, 17> tables;
    static std::array<std::once_flag, 17> flags;
    std::call_once(flags[static_cast<size_t>(v)], [v] {
        BasisTable& t = tables[static_cast<size_t>(v)];
        const int n = 1 << v;
        t.v = v;
        t.sign.resize(static_cast<size_t>(n) * n);
        t.index.resize(static_cast<size_t>(n) * n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                SignedBasis r = basis_product_rec(a, b, v);
                t.sign[static_cast<size_t>(a) * n + b] = static_cast<int8_t>(r.sign);
                t.index[static_cast<size_t>(a) * n + b] = r.index;
            }
    });
    return tables[static_cast<size_t>(v)];
}

}  // namespace detail

inline SignedBasis basis_product(SignedBasis a, SignedBasis b, int v) {
    if (v < 0) throw DomainError("negative level");
    const int n = 1 << v;
    if (a.index >= n || b.index >= n || a.index < 0 || b.index < 0)
        throw DomainError("basis index out of range for level");
    SignedBasis r;
    if (v <= detail::max_table_level()) {
        const detail::BasisTable& t = detail::basis_table(v);
        r.sign = t.sign[static_cast<size_t>(a.index) * n + b.index];
        r.index = t.index[static_cast<size_t>(a.index) * n + b.index];
    } else {
        if (v > 24) throw CapacityError("level beyond configured maximum");
        r = detail::basis_product_rec(a.index, b.index, v);
    }
    r.sign *= a.sign * b.sign;
    return r;
}

class CDNumber {
public:
    CDNumber() : level_(0), c_(1, 0.0) {}
    explicit CDNumber(int level) : level_(check_level(level)), c_(size_t(1) << level, 0.0) {}
    CDNumber(int level, std::vector<double> coeffs) : level_(check_level(level)), c_(std::move(coeffs)) {
        if (c_.size() != (size_t(1) << level_)) throw DomainError("coefficient count != 2^level");
    }

    static CDNumber real(double x, int level = 0) {
        CDNumber z(level);
        z.c_[0] = x;
        return z;
    }
    // sign * i_k at the smallest level containing k (or the given level).
    static CDNumber basis(int k, int level = -1, double weight = 1.0) {
        int lv = 0;
        while ((1 << lv) <= k) ++lv;
        if (level >= 0) {
            if ((1 << level) <= k) throw DomainError("basis index out of range for level");
            lv = level;
        }
        CDNumber z(lv);
        z.c_[static_cast<size_t>(k)] = weight;
        return z;
    }

    int level() const { return level_; }
    size_t dim() const { return c_.size(); }
    const std::vector<double>& coeffs() const { return c_; }
    double operator[](size_t j) const { return j < c_.size() ? c_[j] : 0.0; }
    double& at(size_t j) { return c_[j]; }

    CDNumber embedded(int level) const {
        if (level < level_) throw DomainError("cannot embed into lower level");
        CDNumber z(level);
        for (size_t j = 0; j < c_.size(); ++j) z.c_[j] = c_[j];
        return z;
    }

    // Drops trailing zero half-blocks; useful for canonical comparisons.
    CDNumber compact() const {
        int lv = level_;
        size_t n = c_.size();
        while (lv > 0) {
            bool upper_zero = true;
            for (size_t j = n / 2; j < n; ++j)
                if (c_[j] != 0.0) { upper_zero = false; break; }
            if (!upper_zero) break;
            --lv;
            n /= 2;
        }
        CDNumber z(lv);
        for (size_t j = 0; j < z.c_.size(); ++j) z.c_[j] = c_[j];
        return z;
    }

    double re() const { return c_[0]; }
    double norm2() const {
        double s = 0;
        for (double x : c_) s += x * x;
        return s;
    }
    double norm() const { return std::sqrt(norm2()); }

    CDNumber conj() const {
        CDNumber z = *this;
        for (size_t j = 1; j < z.c_.size(); ++j) z.c_[j] = -z.c_[j];
        return z;
    }

    CDNumber operator-() const {
        CDNumber z = *this;
        for (double& x : z.c_) x = -x;
        return z;
    }

    friend CDNumber operator+(const CDNumber& a, const CDNumber& b) {
        int lv = std::max(a.level_, b.level_);
        CDNumber x = a.level_ == lv ? a : a.embedded(lv);
        const CDNumber y = b.level_ == lv ? b : b.embedded(lv);
        for (size_t j = 0; j < y.c_.size(); ++j) x.c_[j] += y.c_[j];
        return x;
    }
    friend CDNumber operator-(const CDNumber& a, const CDNumber& b) {
        int lv = std::max(a.level_, b.level_);
        CDNumber x = a.level_ == lv ? a : a.embedded(lv);
        const CDNumber y = b.level_ == lv ? b : b.embedded(lv);
        for (size_t j = 0; j < y.c_.size(); ++j) x.c_[j] -= y.c_[j];
        return x;
    }
    friend CDNumber operator*(double s, const CDNumber& a) {
        CDNumber z = a;
        for (double& x : z.c_) x *= s;
        return z;
    }
    friend CDNumber operator*(const CDNumber& a, double s) { return s * a; }

    friend CDNumber operator*(const CDNumber& a, const CDNumber& b) {
        const int lv = std::max(a.level_, b.level_);
        const CDNumber& x = a.level_ == lv ? a : a.embedded(lv);
        const CDNumber& y = b.level_ == lv ? b : b.embedded(lv);
        return multiply_same_level(x, y, lv);
    }

    CDNumber& operator+=(const CDNumber& b) { return *this = *this + b; }
    CDNumber& operator-=(const CDNumber& b) { return *this = *this - b; }
    CDNumber& operator*=(const CDNumber& b) { return *this = *this * b; }

    bool near(const CDNumber& b, double tol) const { return (*this - b).norm() <= tol; }

private:
    static int check_level(int level) {
        if (level < 0 || level > 24) throw CapacityError("level out of supported range");
        return level;
    }

    static CDNumber multiply_same_level(const CDNumber& x, const CDNumber& y, int lv) {
        CDNumber z(lv);
        const size_t n = x.c_.size();
        for (size_t a = 0; a < n; ++a) {
            const double xa = x.c_[a];
            if (xa == 0.0) continue;
            for (size_t b = 0; b < n; ++b) {
                const double yb = y.c_[b];
                if (yb == 0.0) continue;
                SignedBasis r = basis_product({+1, static_cast<int>(a)}, {+1, static_cast<int>(b)}, lv);
                z.c_[static_cast<size_t>(r.index)] += r.sign * xa * yb;
            }
        }
        return z;
    }

    int level_;
    std::vector<double> c_;
};

inline double real_scalar_product(const CDNumber& x, const CDNumber& y) {
    // (x,y)_r = Re(x y~) which collapses to the coefficient dot product.
    const size_t n = std::max(x.dim(), y.dim());
    double s = 0;
    for (size_t j = 0; j < n; ++j) s += x[j] * y[j];
    return s;
}

inline double project_coordinate(const CDNumber& z, int j) {
    if (j < 0 || static_cast<size_t>(j) >= z.dim()) return 0.0;
    return z[static_cast<size_t>(j)];
}

// Cross-check path: formulas 1(1,2)/(P1,P2).  Requires level >= 2 so the
// (2^r - 2) divisor is nonzero; level 1 falls back to the direct read.
inline double project_coordinate_formula(const CDNumber& z, int j) {
    const int r = z.level();
    if (r < 2) return project_coordinate(z, j);
    const size_t n = z.dim();
    // S = sum_{k>=1} i_k (z i_k^*);  {-z + S}/(2^r - 2) = z^*.
    CDNumber s(r);
    for (size_t k = 1; k < n; ++k) {
        CDNumber ik = CDNumber::basis(static_cast<int>(k), r);
        s += ik * (z * ik.conj());
    }
    CDNumber inner = (1.0 / (double(n) - 2.0)) * (s - z);
    CDNumber pj(r);
    if (j == 0) {
        pj = 0.5 * (z + inner);
    } else {
        CDNumber ij = CDNumber::basis(j, r);
        pj = 0.5 * (-(ij * (z * ij)) - inner);
    }
    return pj[static_cast<size_t>(j)];
}

inline CDNumber inverse(const CDNumber& x, double tol = 1e-12) {
    const double n2 = x.norm2();
    if (n2 == 0.0) throw DomainError("inverse of zero");
    CDNumber inv = (1.0 / n2) * x.conj();
    if (x.level() >= 4) {
        // Zero divisors exist from the sedenions up; report a failed check.
        CDNumber prod = x * inv;
        CDNumber one = CDNumber::real(1.0, x.level());
        const double resid = (prod - one).norm();
        if (resid > tol)
            throw ZeroDivisorError("inverse check failed (zero divisor?)", resid);
    }
    return inv;
}

// Left-nested power z^k = (...((z z) z)...) z, with z^0 = 1.
inline CDNumber power(const CDNumber& x, int k) {
    if (k < 0) throw DomainError("negative power");
    if (k == 0) return CDNumber::real(1.0, x.level());
    CDNumber acc = x;
    for (int i = 1; i < k; ++i) acc = acc * x;
    return acc;
}

// The complexified algebra (A_v)_C = A_v + A_v i with a commuting generator i.
struct ComplexifiedCD {
    CDNumber re;
    CDNumber im;

    ComplexifiedCD() = default;
    ComplexifiedCD(CDNumber r, CDNumber i) : re(std::move(r)), im(std::move(i)) {}
    static ComplexifiedCD real(double x) { return {CDNumber::real(x), CDNumber()}; }
    static ComplexifiedCD complex(double x, double y) {
        return {CDNumber::real(x), CDNumber::real(y)};
    }

    double norm() const { return std::sqrt(re.norm2() + im.norm2()); }
    ComplexifiedCD conj_i() const { return {re, -im}; }

    friend ComplexifiedCD operator+(const ComplexifiedCD& a, const ComplexifiedCD& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend ComplexifiedCD operator-(const ComplexifiedCD& a, const ComplexifiedCD& b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend ComplexifiedCD operator*(double s, const ComplexifiedCD& a) {
        return {s * a.re, s * a.im};
    }
    friend ComplexifiedCD operator*(const ComplexifiedCD& a, const ComplexifiedCD& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
};

inline ComplexifiedCD cplx_multiply(const ComplexifiedCD& a, const ComplexifiedCD& b) {
    return a * b;
}

}  // namespace hypercd
