#pragma once

// Closed-form fundamental solutions of the model second-order operators
// (Laplace, hyperbolic, heat, wave, Helmholtz, Klein-Gordon), special
// functions they need, mollified delta tests, and grid convolution solving.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "cd.hpp"
#include "grid.hpp"

namespace hypercd {

class SingularPointError : public DomainError {
public:
    explicit SingularPointError(const std::string& what) : DomainError(what) {}
};
class AlignmentError : public Error {
public:
    explicit AlignmentError(const std::string& what) : Error(what) {}
};
class StencilError : public Error {
public:
    explicit StencilError(const std::string& what) : Error(what) {}
};

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Mollifier  eta_eps(z) = (2 pi)^{-n/2} eps^{-n} exp(-|z|^2 / (2 eps^2))
// ---------------------------------------------------------------------------

inline double mollifier_value(double eps, int n, const std::vector<double>& z) {
    if (eps <= 0.0) throw DomainError("mollifier width must be positive");
    double r2 = 0.0;
    for (double x : z) r2 += x * x;
    return std::pow(2.0 * kPi, -0.5 * n) * std::pow(eps, -n) * std::exp(-r2 / (2.0 * eps * eps));
}

// Midpoint quadrature of integrand . mollifier over the box [-6 eps, 6 eps]^n.
inline double mollifier_apply(double eps, int n,
                              const std::function<double(const std::vector<double>&)>& phi,
                              int nodes_per_axis = 48) {
    if (eps <= 0.0) throw DomainError("mollifier width must be positive");
    const double half = 6.0 * eps;
    const double h = 2.0 * half / nodes_per_axis;
    std::vector<int> idx(static_cast<size_t>(n), 0);
    std::vector<double> x(static_cast<size_t>(n));
    double acc = 0.0;
    for (;;) {
        for (int d = 0; d < n; ++d) x[size_t(d)] = -half + (idx[size_t(d)] + 0.5) * h;
        acc += mollifier_value(eps, n, x) * phi(x);
        int d = 0;
        while (d < n && ++idx[size_t(d)] == nodes_per_axis) idx[size_t(d)] = 0, ++d;
        if (d == n) break;
    }
    return acc * std::pow(h, n);
}

inline double mollifier_mass(double eps, int n, int nodes_per_axis = 48) {
    return mollifier_apply(eps, n, [](const std::vector<double>&) { return 1.0; },
                           nodes_per_axis);
}

inline GridField mollified_delta(double eps, int n, int nodes_per_axis = 33,
                                 double half_width = -1.0) {
    if (half_width <= 0.0) half_width = 6.0 * eps;
    std::vector<int> shape(static_cast<size_t>(n), nodes_per_axis);
    std::vector<double> origin(static_cast<size_t>(n), -half_width);
    const double h = 2.0 * half_width / (nodes_per_axis - 1);
    std::vector<double> spacing(static_cast<size_t>(n), h);
    GridField g = GridField::make(shape, origin, spacing, 0);
    for (long f = 0; f < g.node_count(); ++f)
        g.values[size_t(f)] = CDNumber::real(mollifier_value(eps, n, g.point(g.unflat(f))));
    return g;
}

// ---------------------------------------------------------------------------
// Laplace operator
// ---------------------------------------------------------------------------

// Standard unit-sphere area in R^n.
inline double sphere_area(int n) {
    return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
}
// The source text's surface constant; it agrees with sphere_area at n = 3 and
// diverges from it for n >= 4, which the calibration test below resolves.
inline double sigma_candidate_alt(int n) {
    return 4.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n - 1.0);
}

inline double laplace_constant(int n) {
    if (n < 2) throw DomainError("Laplace solution needs n >= 2");
    if (n == 2) return 1.0 / (4.0 * kPi);  // coefficient of ln|z|^2
    // n >= 3: -1/[(n-2) s_n] with the delta-test calibrated sphere area.
    return -1.0 / ((n - 2) * sphere_area(n));
}

inline double laplace_psi(int n, const std::vector<double>& z) {
    if (static_cast<int>(z.size()) != n) throw DomainError("point dimension mismatch");
    double r2 = 0.0;
    for (double x : z) r2 += x * x;
    if (r2 == 0.0) throw SingularPointError("Laplace solution is singular at the origin");
    if (n == 2) return laplace_constant(2) * std::log(r2);
    return laplace_constant(n) * std::pow(r2, 0.5 * (2 - n));
}

// Numerical calibration of the n >= 3 constant: measures k with
// integral(|z|^{2-n} laplacian(phi)) = k phi(0) for a Gaussian phi and returns
// -1/k, the constant that makes the delta test exact.
inline double calibrate_laplace_constant(int n, int nodes_per_axis = 24, double half_width = 6.0,
                                         double s = 1.0) {
    const double h = 2.0 * half_width / nodes_per_axis;
    std::vector<int> idx(static_cast<size_t>(n), 0);
    double acc = 0.0;
    for (;;) {
        double r2 = 0.0;
        for (int d = 0; d < n; ++d) {
            const double x = -half_width + (idx[size_t(d)] + 0.5) * h;
            r2 += x * x;
        }
        // laplacian of exp(-r^2/(2 s^2)) = (r^2/s^4 - n/s^2) exp(-r^2/(2 s^2))
        const double lap = (r2 / (s * s * s * s) - n / (s * s)) * std::exp(-r2 / (2.0 * s * s));
        acc += std::pow(r2, 0.5 * (2 - n)) * lap;
        int d = 0;
        while (d < n && ++idx[size_t(d)] == nodes_per_axis) idx[size_t(d)] = 0, ++d;
        if (d == n) break;
    }
    // With Psi = C |z|^{2-n} and  integral(Psi * lap(phi)) = phi(0) = 1,
    // the measured k = integral(|z|^{2-n} lap(phi)) gives C = 1/k.
    const double k = acc * std::pow(h, n);
    return 1.0 / k;
}

// ---------------------------------------------------------------------------
// Hyperbolic operators, signature (p, q)
// ---------------------------------------------------------------------------

inline double signature_form(int p, int q, const std::vector<double>& z) {
    if (static_cast<int>(z.size()) != p + q) throw DomainError("point dimension mismatch");
    double P = 0.0;
    for (int j = 0; j < p; ++j) P += z[size_t(j)] * z[size_t(j)];
    for (int j = p; j < p + q; ++j) P -= z[size_t(j)] * z[size_t(j)];
    return P;
}

namespace detail {

inline const std::array<double, 4>& epsilon_schedule() {
    static const std::array<double, 4> s = {1e-1, 3e-2, 1e-2, 3e-3};
    return s;
}

// Neville polynomial extrapolation of f(eps) to eps = 0.
inline std::complex<double> extrapolate_to_zero(const std::array<double, 4>& eps,
                                                std::array<std::complex<double>, 4> f) {
    for (size_t m = 1; m < eps.size(); ++m)
        for (size_t j = eps.size() - 1; j >= m; --j)
            f[j] = f[j] + (f[j] - f[j - 1]) * (0.0 - eps[j]) / (eps[j] - eps[j - m]);
    return f[eps.size() - 1];
}

}  // namespace detail

// Two conjugate fundamental solutions of L_{p,q}, selected by branch b = +-1,
// evaluated through the regularized limit (P + b i eps)^lambda extrapolated
// over the fixed epsilon schedule.  Points on the cone P = 0 are refused.
inline ComplexifiedCD hyperbolic_psi(int p, int q, int b, const std::vector<double>& z) {
    if (p < 1 || q < 1) throw DomainError("signature needs p >= 1 and q >= 1");
    if (b != 1 && b != -1) throw DomainError("branch must be +1 or -1");
    const int n = p + q;
    const double P = signature_form(p, q, z);
    double r2 = 0.0;
    for (double x : z) r2 += x * x;
    if (std::fabs(P) <= 1e-12 * std::max(1.0, r2))
        throw SingularPointError("hyperbolic solution is singular on the cone P = 0");

    const auto& eps = detail::epsilon_schedule();
    std::array<std::complex<double>, 4> vals;
    if (n >= 3) {
        // - exp(pi b q i / 2) Gamma(n/2 - 1) (P + b i 0)^{1 - n/2} / (4 pi^{n/2})
        const std::complex<double> phase =
            std::exp(std::complex<double>(0.0, 0.5 * kPi * b * q));
        const double cnst = std::tgamma(0.5 * n - 1.0) / (4.0 * std::pow(kPi, 0.5 * n));
        const double lambda = 1.0 - 0.5 * n;
        for (size_t k = 0; k < eps.size(); ++k)
            vals[k] = -phase * cnst *
                      std::pow(std::complex<double>(P, b * eps[k]), lambda);
    } else {
        // n = 2: (b i / 4) ln|P| - (1/4) theta(-P), regularized; the jump
        // carries coefficient 1/4, which is what the delta test requires.
        for (size_t k = 0; k < eps.size(); ++k) {
            const double lnabs = 0.5 * std::log(P * P + eps[k] * eps[k]);
            const double theta = std::arg(std::complex<double>(P, b * eps[k])) / (b * kPi);
            vals[k] = std::complex<double>(-0.25 * theta, 0.25 * b * lnabs);
        }
    }
    const std::complex<double> v = detail::extrapolate_to_zero(eps, vals);
    return ComplexifiedCD::complex(v.real(), v.imag());
}

// ---------------------------------------------------------------------------
// Heat kernel  theta(z0) [2 a (pi z0)^{1/2}]^{-m} exp(-|x|^2 / (4 a^2 z0))
// ---------------------------------------------------------------------------

inline double heat_kernel(int m, double a, double z0, const std::vector<double>& x) {
    if (a <= 0.0) throw DomainError("diffusion coefficient must be positive");
    if (static_cast<int>(x.size()) != m) throw DomainError("point dimension mismatch");
    if (z0 <= 0.0) return 0.0;
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    return std::pow(2.0 * a * std::sqrt(kPi * z0), -m) * std::exp(-r2 / (4.0 * a * a * z0));
}

// ---------------------------------------------------------------------------
// Wave kernel in 3+1 dimensions:  (1/4pi) int_0^inf t int_{S^2} phi(t, t w) dw dt
// ---------------------------------------------------------------------------

namespace detail {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(static_cast<size_t>(n), 0.0);
    w.assign(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / dp;
            t -= dt;
            if (std::fabs(dt) < 1e-15) {
                x[size_t(i)] = t;
                w[size_t(i)] = 2.0 / ((1.0 - t * t) * dp * dp);
                break;
            }
        }
    }
}

}  // namespace detail

using WaveTestFunction = std::function<double(double, const std::array<double, 3>&)>;

// Fixed-order product quadrature over the sphere (Gauss-Legendre in cos(theta)
// crossed with a uniform azimuthal grid), surface measure included.
inline double sphere_average_times_area(const std::function<double(const std::array<double, 3>&)>& f,
                                        int n_mu = 24, int n_phi = 48) {
    static thread_local std::vector<double> mu, wmu;
    static thread_local int cached = -1;
    if (cached != n_mu) {
        detail::gauss_legendre(n_mu, mu, wmu);
        cached = n_mu;
    }
    double acc = 0.0;
    for (int i = 0; i < n_mu; ++i) {
        const double c = mu[size_t(i)], s = std::sqrt(std::max(0.0, 1.0 - c * c));
        double ring = 0.0;
        for (int j = 0; j < n_phi; ++j) {
            const double ph = 2.0 * kPi * j / n_phi;
            ring += f({s * std::cos(ph), s * std::sin(ph), c});
        }
        acc += wmu[size_t(i)] * ring * (2.0 * kPi / n_phi);
    }
    return acc;
}

inline double wave3d_apply(const WaveTestFunction& phi, double support_radius,
                           double rtol = 1e-7, int max_refinements = 14) {
    if (support_radius <= 0.0) throw DomainError("support radius must be positive");
    auto shell = [&phi](double t) {
        return t * sphere_average_times_area([&phi, t](const std::array<double, 3>& w) {
            return phi(t, {t * w[0], t * w[1], t * w[2]});
        });
    };
    // composite midpoint in t with dyadic refinement
    double prev = 0.0;
    bool have_prev = false;
    for (int r = 4; r <= max_refinements; ++r) {
        const long m = 1L << r;
        const double h = support_radius / m;
        double acc = 0.0;
        for (long i = 0; i < m; ++i) acc += shell((i + 0.5) * h);
        acc *= h / (4.0 * kPi);
        if (have_prev && std::fabs(acc - prev) <= rtol * (1.0 + std::fabs(acc)))
            return acc + (acc - prev) / 3.0;
        prev = acc;
        have_prev = true;
    }
    return prev;
}

// ---------------------------------------------------------------------------
// Bessel functions, orders 0 and 1
// ---------------------------------------------------------------------------

enum class BesselKind { J, Y, I, K, H1, H2 };

namespace detail {

constexpr double kEulerGamma = 0.57721566490153286061;
constexpr double kBesselSwitch = 15.0;  // series below, asymptotics above

inline double bessel_j_series(int nu, double z) {
    const long double half = 0.5L * static_cast<long double>(z);
    long double term = 1.0L;
    for (int k = 1; k <= nu; ++k) term *= half / k;  // (z/2)^nu / nu!
    long double sum = term;
    for (int m = 1; m < 200; ++m) {
        term *= -half * half / (static_cast<long double>(m) * (m + nu));
        sum += term;
        if (std::fabs(static_cast<double>(term)) <
                1e-22 * (1.0 + std::fabs(static_cast<double>(sum))) &&
            m > z)
            break;
    }
    return static_cast<double>(sum);
}

inline double bessel_i_series(int nu, double z) {
    const long double half = 0.5L * static_cast<long double>(z);
    long double term = 1.0L;
    for (int k = 1; k <= nu; ++k) term *= half / k;
    long double sum = term;
    for (int m = 1; m < 400; ++m) {
        term *= half * half / (static_cast<long double>(m) * (m + nu));
        sum += term;
        if (term < 1e-22L * sum && m > z) break;
    }
    return static_cast<double>(sum);
}

inline double bessel_y_series(int nu, double z) {
    const long double half = 0.5L * static_cast<long double>(z);
    const double lnhalf = std::log(0.5 * z);
    if (nu == 0) {
        // (2/pi)(ln(z/2) + gamma) J0 + (2/pi) sum (-1)^{k+1} H_k (z/2)^{2k}/(k!)^2
        long double term = 1.0L, sum = 0.0L, hk = 0.0L;
        for (int k = 1; k < 200; ++k) {
            term *= half * half / (static_cast<long double>(k) * k);
            hk += 1.0L / k;
            const long double add = (k % 2 ? 1.0L : -1.0L) * hk * term;
            sum += add;
            if (std::fabs(static_cast<double>(add)) < 1e-22 && k > z) break;
        }
        return (2.0 / kPi) * ((lnhalf + kEulerGamma) * bessel_j_series(0, z) +
                              static_cast<double>(sum));
    }
    // nu = 1:  (2/pi) ln(z/2) J1 - 2/(pi z)
    //          - (1/pi) sum (-1)^k [psi(k+1) + psi(k+2)] (z/2)^{2k+1}/(k!(k+1)!)
    long double term = half;  // k = 0 term magnitude (z/2)^{1}/(0! 1!)
    long double sum = 0.0L;
    long double psi_a = -kEulerGamma;          // psi(1)
    long double psi_b = -kEulerGamma + 1.0L;   // psi(2)
    for (int k = 0; k < 200; ++k) {
        if (k > 0) {
            term *= half * half / (static_cast<long double>(k) * (k + 1));
            psi_a += 1.0L / k;
            psi_b += 1.0L / (k + 1);
        }
        const long double add = (k % 2 ? -1.0L : 1.0L) * (psi_a + psi_b) * term;
        sum += add;
        if (std::fabs(static_cast<double>(add)) < 1e-22 && k > z) break;
    }
    return (2.0 / kPi) * lnhalf * bessel_j_series(1, z) - 2.0 / (kPi * z) -
           static_cast<double>(sum) / kPi;
}

// Large-argument Hankel asymptotics: J, Y from the P, Q modulus/phase series.
inline void bessel_pq(int nu, double z, double& P, double& Q) {
    const double mu = 4.0 * nu * nu;
    double a = 1.0;  // a_0
    P = 1.0;
    Q = 0.0;
    double last = 1.0;
    for (int k = 1; k <= 40; ++k) {
        a *= (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k * z);
        if (std::fabs(a) > last) break;  // past optimal truncation
        last = std::fabs(a);
        const int kk = k % 4;
        if (kk == 1)
            Q += a;
        else if (kk == 2)
            P -= a;
        else if (kk == 3)
            Q -= a;
        else
            P += a;
    }
}

inline double bessel_j_asym(int nu, double z) {
    double P, Q;
    bessel_pq(nu, z, P, Q);
    const double chi = z - (0.5 * nu + 0.25) * kPi;
    return std::sqrt(2.0 / (kPi * z)) * (P * std::cos(chi) - Q * std::sin(chi));
}
inline double bessel_y_asym(int nu, double z) {
    double P, Q;
    bessel_pq(nu, z, P, Q);
    const double chi = z - (0.5 * nu + 0.25) * kPi;
    return std::sqrt(2.0 / (kPi * z)) * (P * std::sin(chi) + Q * std::cos(chi));
}

// K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt; the even analytic
// integrand makes plain trapezoid sums geometrically convergent.
inline double bessel_k_integral(int nu, double z) {
    const double h = 0.1;
    const double T = std::acosh(1.0 + 50.0 / z);
    long double acc = 0.5L;  // t = 0 term of exp(-z cosh t) cosh(nu t) / exp(-z)
    // accumulate exp(z - z cosh t) cosh(nu t) to avoid underflow, rescale after
    for (int k = 1; k * h <= T + h; ++k) {
        const double t = k * h;
        acc += std::exp(static_cast<long double>(z - z * std::cosh(t))) *
               std::cosh(static_cast<long double>(nu) * t);
    }
    return static_cast<double>(acc * h * std::exp(static_cast<long double>(-z)));
}

}  // namespace detail

inline double bessel_j(int order, double z) {
    if (z <= 0.0) throw DomainError("Bessel argument must be positive");
    if (order != 0 && order != 1) throw DomainError("only orders 0 and 1 are supported");
    return z < detail::kBesselSwitch ? detail::bessel_j_series(order, z)
                                     : detail::bessel_j_asym(order, z);
}
inline double bessel_y(int order, double z) {
    if (z <= 0.0) throw DomainError("Bessel argument must be positive");
    if (order != 0 && order != 1) throw DomainError("only orders 0 and 1 are supported");
    return z < detail::kBesselSwitch ? detail::bessel_y_series(order, z)
                                     : detail::bessel_y_asym(order, z);
}
inline double bessel_i(int order, double z) {
    if (z <= 0.0) throw DomainError("Bessel argument must be positive");
    if (order != 0 && order != 1) throw DomainError("only orders 0 and 1 are supported");
    return detail::bessel_i_series(order, z);
}
inline double bessel_k(int order, double z) {
    if (z <= 0.0) throw DomainError("Bessel argument must be positive");
    if (order != 0 && order != 1) throw DomainError("only orders 0 and 1 are supported");
    return detail::bessel_k_integral(order, z);
}

inline ComplexifiedCD bessel(BesselKind kind, int order, double z) {
    switch (kind) {
        case BesselKind::J: return ComplexifiedCD::real(bessel_j(order, z));
        case BesselKind::Y: return ComplexifiedCD::real(bessel_y(order, z));
        case BesselKind::I: return ComplexifiedCD::real(bessel_i(order, z));
        case BesselKind::K: return ComplexifiedCD::real(bessel_k(order, z));
        case BesselKind::H1:
            return ComplexifiedCD::complex(bessel_j(order, z), bessel_y(order, z));
        case BesselKind::H2:
            return ComplexifiedCD::complex(bessel_j(order, z), -bessel_y(order, z));
    }
    throw DomainError("unknown Bessel kind");
}

// ---------------------------------------------------------------------------
// Helmholtz operator  Delta + c^2
// ---------------------------------------------------------------------------

inline ComplexifiedCD helmholtz_psi(int n, double c, int b, const std::vector<double>& x) {
    if (c <= 0.0) throw DomainError("wave number must be positive");
    if (b != 1 && b != -1) throw DomainError("branch must be +1 or -1");
    if (static_cast<int>(x.size()) != n) throw DomainError("point dimension mismatch");
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    if (r2 == 0.0) throw SingularPointError("Helmholtz solution is singular at the origin");
    const double r = std::sqrt(r2);
    if (n == 3) {
        // - exp(b c i r) / (4 pi r)
        const double s = -1.0 / (4.0 * kPi * r);
        return ComplexifiedCD::complex(s * std::cos(c * r), s * b * std::sin(c * r));
    }
    if (n == 2) {
        // - b i H_0^{(1 or 2)}(c r) / 4; the two branches are conjugates.
        const double J = bessel_j(0, c * r), Y = bessel_y(0, c * r);
        return ComplexifiedCD::complex(0.25 * Y, -0.25 * b * J);
    }
    throw DomainError("Helmholtz solution implemented for n in {2, 3}");
}

// ---------------------------------------------------------------------------
// Klein-Gordon symbol and spectral solve
// ---------------------------------------------------------------------------

inline constexpr double kSymbolEpsilon = 3e-3;  // final entry of the schedule

inline ComplexifiedCD klein_gordon_fourier(int p, int q, double c, int b,
                                           const std::vector<double>& xi) {
    if (b != 1 && b != -1) throw DomainError("branch must be +1 or -1");
    const double P = signature_form(p, q, xi);
    const std::complex<double> v = 1.0 / std::complex<double>(c * c - P, b * kSymbolEpsilon);
    return ComplexifiedCD::complex(v.real(), v.imag());
}

namespace detail {

// In-place radix-2 complex FFT; sign = -1 forward, +1 inverse (unscaled).
inline void fft(std::vector<std::complex<double>>& a, int sign) {
    const size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw DomainError("FFT length must be a power of two");
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * kPi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

inline int freq_index(int k, int n) { return k <= n / 2 ? k : k - n; }

}  // namespace detail

// Solve (L_{p,q} + c^2) u = g on a periodic rectangle via the Fourier symbol
// 1/(c^2 - P(xi) + b i eps); g is a real (level 0) field whose axes span the
// full periods, first p axes timelike.  Returns the real part of u.
inline GridField klein_gordon_solve(int p, int q, double c, int b, const GridField& g) {
    const int n = g.ndim;
    if (n != p + q) throw DomainError("grid dimension must equal p + q");
    if (g.level != 0) throw DomainError("spectral solve expects a real field");
    const long total = g.node_count();
    std::vector<std::complex<double>> data(static_cast<size_t>(total));
    for (long f = 0; f < total; ++f) data[size_t(f)] = g.values[size_t(f)][0];

    auto transform_axis = [&](int axis, int sign) {
        const int len = g.shape[size_t(axis)];
        long stride = 1;
        for (int d = axis + 1; d < n; ++d) stride *= g.shape[size_t(d)];
        const long outer = total / len;
        std::vector<std::complex<double>> line(static_cast<size_t>(len));
        for (long o = 0; o < outer; ++o) {
            const long block = o / stride, pos = o % stride;
            const long base = block * stride * len + pos;
            for (int k = 0; k < len; ++k) line[size_t(k)] = data[size_t(base + k * stride)];
            detail::fft(line, sign);
            for (int k = 0; k < len; ++k) data[size_t(base + k * stride)] = line[size_t(k)];
        }
    };
    for (int d = 0; d < n; ++d) transform_axis(d, -1);

    std::vector<double> xi(static_cast<size_t>(n));
    for (long f = 0; f < total; ++f) {
        const std::vector<int> idx = g.unflat(f);
        for (int d = 0; d < n; ++d) {
            const int len = g.shape[size_t(d)];
            const double period = len * g.spacing[size_t(d)];
            xi[size_t(d)] = 2.0 * kPi * detail::freq_index(idx[size_t(d)], len) / period;
        }
        const double P = signature_form(p, q, xi);
        data[size_t(f)] /= std::complex<double>(c * c - P, b * kSymbolEpsilon);
    }
    for (int d = 0; d < n; ++d) transform_axis(d, +1);

    GridField u = GridField::make(g.shape, g.origin, g.spacing, 0);
    for (long f = 0; f < total; ++f)
        u.values[size_t(f)] = CDNumber::real(data[size_t(f)].real() / total);
    return u;
}

// ---------------------------------------------------------------------------
// Grid calculus: derivatives, convolution, first-order kernels
// ---------------------------------------------------------------------------

// Central differences along one axis, second-order one-sided at the edges.
inline GridField grid_partial(const GridField& g, int axis) {
    if (axis < 0 || axis >= g.ndim) throw DomainError("axis out of range");
    if (g.shape[size_t(axis)] < 3)
        throw StencilError("need at least three nodes along the axis");
    GridField out = GridField::make(g.shape, g.origin, g.spacing, g.level);
    const double h = g.spacing[size_t(axis)];
    for (long f = 0; f < g.node_count(); ++f) {
        std::vector<int> idx = g.unflat(f);
        const int i = idx[size_t(axis)], last = g.shape[size_t(axis)] - 1;
        std::vector<int> a = idx, b = idx, c = idx;
        if (i == 0) {
            a[size_t(axis)] = 0;
            b[size_t(axis)] = 1;
            c[size_t(axis)] = 2;
            out.values[size_t(f)] =
                (1.0 / (2.0 * h)) * (-3.0 * g.at(a) + 4.0 * g.at(b) - g.at(c));
        } else if (i == last) {
            a[size_t(axis)] = last;
            b[size_t(axis)] = last - 1;
            c[size_t(axis)] = last - 2;
            out.values[size_t(f)] =
                (1.0 / (2.0 * h)) * (3.0 * g.at(a) - 4.0 * g.at(b) + g.at(c));
        } else {
            a[size_t(axis)] = i + 1;
            b[size_t(axis)] = i - 1;
            out.values[size_t(f)] = (1.0 / (2.0 * h)) * (g.at(a) - g.at(b));
        }
    }
    return out;
}

// Discrete convolution  out(x) = sum_z E(x - z) g(z) vol(z)  with trapezoid
// weights on g; kernel nodes are looked up on the kernel's own grid and
// differences outside it contribute zero (compact numerical support).
inline GridField convolve_solve(const GridField& kernel, const GridField& g) {
    if (kernel.ndim != g.ndim) throw AlignmentError("kernel and source dimensions differ");
    const int n = g.ndim;
    for (int d = 0; d < n; ++d)
        if (std::fabs(kernel.spacing[size_t(d)] - g.spacing[size_t(d)]) >
            1e-12 * g.spacing[size_t(d)])
            throw AlignmentError("kernel and source grid spacings differ");
    const int level = std::max(kernel.level, g.level);
    GridField out = GridField::make(g.shape, g.origin, g.spacing, level);
    const double vol = g.cell_volume();
    const long ng = g.node_count();

    // integer offset of the kernel origin relative to the source origin
    std::vector<double> shift(static_cast<size_t>(n));
    for (int d = 0; d < n; ++d) {
        // x_i - z_j = (i - j) h, so the kernel row is (i - j) - origin_K / h
        const double s = -kernel.origin[size_t(d)] / g.spacing[size_t(d)];
        shift[size_t(d)] = s;
        if (std::fabs(s - std::round(s)) > 1e-6)
            throw AlignmentError("kernel grid is not node-aligned with the source grid");
    }

    std::vector<double> trap(static_cast<size_t>(ng));
    for (long j = 0; j < ng; ++j) {
        const std::vector<int> idx = g.unflat(j);
        double w = 1.0;
        for (int d = 0; d < n; ++d)
            if (idx[size_t(d)] == 0 || idx[size_t(d)] == g.shape[size_t(d)] - 1) w *= 0.5;
        trap[size_t(j)] = w;
    }

    // Precompute multi-indices and kernel strides so the pair loop is flat.
    std::vector<int> node_idx(static_cast<size_t>(ng) * size_t(n));
    for (long j = 0; j < ng; ++j) {
        const std::vector<int> idx = g.unflat(j);
        for (int d = 0; d < n; ++d) node_idx[size_t(j) * size_t(n) + size_t(d)] = idx[size_t(d)];
    }
    std::vector<long> kstride(static_cast<size_t>(n), 1);
    for (int d = n - 2; d >= 0; --d)
        kstride[size_t(d)] = kstride[size_t(d) + 1] * kernel.shape[size_t(d) + 1];
    std::vector<int> ishift(static_cast<size_t>(n));
    for (int d = 0; d < n; ++d) ishift[size_t(d)] = static_cast<int>(std::llround(shift[size_t(d)]));

    const bool scalar = kernel.level == 0 && g.level == 0;
    const int dim = 1 << level;
    const detail::BasisTable& tbl = detail::basis_table(level);
    std::vector<double> acc(static_cast<size_t>(dim));
    for (long i = 0; i < ng; ++i) {
        const int* xi = &node_idx[size_t(i) * size_t(n)];
        std::fill(acc.begin(), acc.end(), 0.0);
        double sacc = 0.0;
        for (long j = 0; j < ng; ++j) {
            const int* zj = &node_idx[size_t(j) * size_t(n)];
            long koff = 0;
            bool inside = true;
            for (int d = 0; d < n; ++d) {
                const int k = xi[d] - zj[d] + ishift[size_t(d)];
                if (k < 0 || k >= kernel.shape[size_t(d)]) {
                    inside = false;
                    break;
                }
                koff += k * kstride[size_t(d)];
            }
            if (!inside) continue;
            const std::vector<double>& K = kernel.values[size_t(koff)].coeffs();
            const std::vector<double>& G = g.values[size_t(j)].coeffs();
            const double w = trap[size_t(j)];
            if (scalar) {
                sacc += K[0] * G[0] * w;
                continue;
            }
            for (size_t a = 0; a < K.size(); ++a) {
                const double ka = K[a] * w;
                if (ka == 0.0) continue;
                const size_t row = a * size_t(dim);
                for (size_t b = 0; b < G.size(); ++b) {
                    if (G[b] == 0.0) continue;
                    acc[size_t(tbl.index[row + b])] += tbl.sign[row + b] * ka * G[b];
                }
            }
        }
        if (scalar) {
            out.values[size_t(i)] = CDNumber::real(sacc * vol);
        } else {
            std::vector<double> c(acc);
            for (double& x : c) x *= vol;
            out.values[size_t(i)] = CDNumber(level, std::move(c));
        }
    }
    return out;
}

// Left-nested fold of convolve_solve, preserving the listed order.
inline GridField iterated_convolution(const std::vector<GridField>& kernels) {
    if (kernels.size() < 2) throw DomainError("need at least two kernels");
    GridField acc = convolve_solve(kernels[0], kernels[1]);
    for (size_t k = 2; k < kernels.size(); ++k) acc = convolve_solve(acc, kernels[k]);
    return acc;
}

// A first-order operator with constant hypercomplex right factors,
// f -> sum_k (df/dx_{coord_k}) . factor_k + beta f.
struct ConstFirstOrderOp {
    struct Term {
        int axis = 0;  // grid axis carrying the derivative
        CDNumber factor;
    };
    std::vector<Term> terms;
    CDNumber beta;
};

// Kernel of the first-order operator: the adjoint (conjugated constants)
// applied to the second-order fundamental solution by grid differences.
inline GridField first_order_fundamental(const GridField& psi, const ConstFirstOrderOp& op) {
    int level = psi.level;
    for (const auto& t : op.terms) level = std::max(level, t.factor.level());
    level = std::max(level, op.beta.level());
    GridField out = GridField::make(psi.shape, psi.origin, psi.spacing, level);
    const CDNumber beta_c = op.beta.conj();
    for (long f = 0; f < psi.node_count(); ++f)
        out.values[size_t(f)] = beta_c * psi.values[size_t(f)];
    for (const auto& t : op.terms) {
        const GridField d = grid_partial(psi, t.axis);
        const CDNumber fc = t.factor.conj();
        for (long f = 0; f < psi.node_count(); ++f)
            out.values[size_t(f)] = out.values[size_t(f)] + d.values[size_t(f)] * fc;
    }
    return out;
}

// Sample a pointwise function into a grid; nodes inside the singular set (the
// sampler throws SingularPointError there) are replaced by the given value.
inline GridField grid_from_function(const std::function<CDNumber(const std::vector<double>&)>& f,
                                    std::vector<int> shape, std::vector<double> origin,
                                    std::vector<double> spacing, int level,
                                    const CDNumber& singular_value = CDNumber()) {
    GridField g = GridField::make(std::move(shape), std::move(origin), std::move(spacing), level);
    for (long k = 0; k < g.node_count(); ++k) {
        try {
            g.values[size_t(k)] = f(g.point(g.unflat(k)));
        } catch (const SingularPointError&) {
            g.values[size_t(k)] = singular_value;
        }
    }
    return g;
}

}  // namespace hypercd
