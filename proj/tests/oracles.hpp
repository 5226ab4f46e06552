#pragma once

// Independent reference implementations used to cross-check the library.
// These deliberately avoid the library's code paths: multiplication is done
// directly on coefficient vectors by the doubling formula, with no basis
// tables and no CDNumber machinery.

#include <random>
#include <vector>

namespace oracle {

inline std::vector<double> conj(std::vector<double> v) {
    for (size_t j = 1; j < v.size(); ++j) v[j] = -v[j];
    return v;
}

// (xi + eta l)(gamma + delta l) = (xi gamma - delta~ eta) + (delta xi + eta gamma~) l
inline std::vector<double> mul(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    if (n == 1) return {x[0] * y[0]};
    const size_t h = n / 2;
    std::vector<double> xi(x.begin(), x.begin() + h), eta(x.begin() + h, x.end());
    std::vector<double> ga(y.begin(), y.begin() + h), de(y.begin() + h, y.end());
    std::vector<double> re_a = mul(xi, ga);
    std::vector<double> re_b = mul(conj(de), eta);
    std::vector<double> im_a = mul(de, xi);
    std::vector<double> im_b = mul(eta, conj(ga));
    std::vector<double> z(n, 0.0);
    for (size_t j = 0; j < h; ++j) {
        z[j] = re_a[j] - re_b[j];
        z[h + j] = im_a[j] + im_b[j];
    }
    return z;
}

inline std::vector<double> random_vec(std::mt19937_64& rng, size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

}  // namespace oracle
