// Command-line front end: multiplication tables, operator factorization,
// line integrals, anti-derivatives, fundamental solutions, convolution
// solves, and the invariant check suites.
//
// Exit codes: 0 success, 1 numerical-tolerance failure, 2 usage/parse error,
// 3 capacity/domain error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hypercd/cd.hpp"
#include "hypercd/expr.hpp"
#include "hypercd/factorize.hpp"
#include "hypercd/fundamental.hpp"
#include "hypercd/grid.hpp"
#include "hypercd/phrase.hpp"
#include "hypercd/quadform.hpp"

using json = nlohmann::json;
using hypercd::CDNumber;
using hypercd::Expr;
using hypercd::GridField;

namespace {

constexpr int kMaxTableLevel = 8;

struct Options {
    unsigned seed = 42;
    double tol = -1.0;  // negative: per-command default
    std::string out;    // empty: stdout
};

void write_output(const Options& opt, const std::string& text) {
    if (opt.out.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream os(opt.out);
    if (!os) throw hypercd::DomainError("cannot open output file '" + opt.out + "'");
    os << text;
    if (!text.empty() && text.back() != '\n') os << '\n';
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t used = 0;
        out.push_back(std::stod(item, &used));
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
        if (used != item.size())
            throw hypercd::ParseError("trailing characters in number list", used);
    }
    if (out.empty()) throw hypercd::ParseError("empty number list", 0);
    return out;
}

// A CD constant written in the expression grammar, e.g. "1", "-i1", "(i1+i2)/sqrt(2)".
CDNumber parse_cd(const std::string& text) { return Expr::parse(text).eval({}); }

json cd_to_json(const CDNumber& c) {
    json a = json::array();
    for (size_t k = 0; k < c.coeffs().size(); ++k) a.push_back(c[k]);
    return a;
}

// ---------------------------------------------------------------------------
// table

int run_table(const Options& opt, int level) {
    if (level < 0 || level > kMaxTableLevel)
        throw hypercd::DomainError("table level must be in [0, " +
                                   std::to_string(kMaxTableLevel) + "]");
    const int dim = 1 << level;
    std::string out;
    out.reserve(static_cast<size_t>(dim) * dim * 6);
    for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) {
            const hypercd::SignedBasis r = hypercd::basis_product({+1, a}, {+1, b}, level);
            if (b) out += ',';
            out += (r.sign > 0 ? '+' : '-');
            out += std::to_string(r.index);
        }
        out += '\n';
    }
    write_output(opt, out);
    return 0;
}

// ---------------------------------------------------------------------------
// factor

hypercd::OperatorSpec spec_from_json(const json& j) {
    hypercd::OperatorSpec spec;
    spec.n = j.at("dimension").get<int>();
    if (spec.n <= 0) throw hypercd::SpecificationError("dimension must be positive");
    const size_t n = static_cast<size_t>(spec.n);
    spec.second_order.assign(n, std::vector<Expr>(n, Expr::number(0.0)));
    const json& so = j.at("second_order");
    if (so.size() != n) throw hypercd::SpecificationError("second_order must be n x n");
    for (size_t r = 0; r < n; ++r) {
        if (so[r].size() != n) throw hypercd::SpecificationError("second_order must be n x n");
        for (size_t c = 0; c < n; ++c)
            spec.second_order[r][c] = Expr::parse(so[r][c].get<std::string>());
    }
    spec.first_order.assign(n, Expr::number(0.0));
    if (j.contains("first_order")) {
        const json& fo = j.at("first_order");
        if (fo.size() != n) throw hypercd::SpecificationError("first_order must have n entries");
        for (size_t k = 0; k < n; ++k) spec.first_order[k] = Expr::parse(fo[k].get<std::string>());
    }
    spec.zero_order =
        j.contains("zero_order") ? Expr::parse(j.at("zero_order").get<std::string>())
                                 : Expr::number(0.0);
    if (j.contains("blocks")) {
        for (const json& bj : j.at("blocks")) {
            hypercd::Block b;
            b.c = parse_cd(bj.at("c").get<std::string>());
            std::vector<int> vars = bj.at("vars").get<std::vector<int>>();
            if (vars.empty()) throw hypercd::SpecificationError("block has no variables");
            for (size_t k = 1; k < vars.size(); ++k)
                if (vars[k] != vars[k - 1] + 1)
                    throw hypercd::SpecificationError("block variables must be contiguous");
            b.lo = vars.front();
            b.hi = vars.back();
            spec.blocks.push_back(b);
        }
    }
    spec.validate();
    return spec;
}

// Seeded random cubic polynomials in n variables (degree <= 3 monomials).
std::vector<Expr> seeded_cubics(int n, int count, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_int_distribution<int> var(0, n - 1);
    std::vector<Expr> out;
    for (int t = 0; t < count; ++t) {
        Expr e = Expr::number(coef(rng));
        for (int m = 0; m < 5; ++m) {  // five random monomials of degree 1..3
            Expr mono = Expr::number(coef(rng));
            const int deg = 1 + (var(rng) % 3);
            for (int d = 0; d < deg; ++d) mono = mono * Expr::var(var(rng));
            e = e + mono;
        }
        out.push_back(e.folded());
    }
    return out;
}

int run_factor(const Options& opt, const std::string& spec_path, int nodes_per_axis,
               int test_count) {
    std::ifstream is(spec_path);
    if (!is) throw hypercd::DomainError("cannot open spec file '" + spec_path + "'");
    json j = json::parse(is);  // throws json::parse_error -> exit 2
    hypercd::OperatorSpec spec = spec_from_json(j);
    hypercd::Factorization fact = hypercd::factorize(spec);
    std::vector<Expr> tests = seeded_cubics(spec.n, test_count, opt.seed);
    hypercd::ResidualReport rep = hypercd::verify_factorization(spec, fact, tests, nodes_per_axis);

    const double tol = opt.tol > 0 ? opt.tol : 1e-8;
    json out;
    out["base_level"] = fact.base_level;
    out["lifted_level"] = fact.lifted_level;
    json ups = json::array(), ups1 = json::array();
    for (int k = 0; k < spec.n; ++k) {
        ups.push_back(fact.upsilon.coeff(k).str());
        ups1.push_back(fact.upsilon1.coeff(k).str());
    }
    out["upsilon"] = ups;
    out["upsilon1"] = ups1;
    json q = json::array();
    bool q_zero = fact.remainder.zero_order.is_zero();
    for (const Expr& e : fact.remainder.first_order) {
        q.push_back(e.str());
        if (!e.is_zero()) q_zero = false;
    }
    out["remainder_first_order"] = q;
    out["remainder_zero_order"] = fact.remainder.zero_order.str();
    out["remainder_is_zero"] = q_zero;
    out["residual"] = {{"max_residual", rep.max_residual},
                       {"tests", rep.tests},
                       {"nodes", rep.nodes},
                       {"seed", opt.seed},
                       {"tolerance", tol}};
    out["pass"] = rep.max_residual < tol;
    write_output(opt, out.dump(2));
    return rep.max_residual < tol ? 0 : 1;
}

// ---------------------------------------------------------------------------
// integrate

int run_integrate(const Options& opt, const std::string& coeffs, const std::string& path_file) {
    hypercd::Phrase mu;
    std::stringstream ss(coeffs);
    std::string item;
    int degree = 0;
    while (std::getline(ss, item, ';')) {
        mu.words.push_back(hypercd::Word::monomial(parse_cd(item), degree));
        ++degree;
    }
    if (mu.words.empty()) throw hypercd::ParseError("empty coefficient list", 0);
    const hypercd::Path gamma = hypercd::Path::load_csv_file(path_file);
    const double rtol = opt.tol > 0 ? opt.tol : hypercd::kIntegralRtol;
    json out;
    try {
        const CDNumber value = hypercd::line_integrate(mu, gamma, {}, rtol);
        out["value"] = cd_to_json(value);
        out["level"] = value.level();
        out["rtol"] = rtol;
        write_output(opt, out.dump(2));
        return 0;
    } catch (const hypercd::ConvergenceError& e) {
        out["error"] = "no convergence";
        out["last_estimates"] = {cd_to_json(e.previous), cd_to_json(e.last)};
        write_output(opt, out.dump(2));
        return 1;
    }
}

// ---------------------------------------------------------------------------
// antiderive

int run_antiderive(const Options& opt, const std::string& f_text, const std::string& slots_text,
                   const std::string& from_text, const std::string& point_text) {
    const Expr f_expr = Expr::parse(f_text);
    std::vector<int> slots;
    for (double v : parse_number_list(slots_text)) slots.push_back(static_cast<int>(v));
    const CDNumber z0 = parse_cd(from_text);
    const CDNumber z = parse_cd(point_text);
    int level = std::max(z0.level(), z.level());
    for (int s : slots)
        while (s >= (1 << level)) ++level;
    const CDNumber z0l = z0 + CDNumber(level);
    const CDNumber zl = z + CDNumber(level);

    auto f = [&](const CDNumber& w) {
        std::vector<double> coords(w.coeffs().begin(), w.coeffs().end());
        return f_expr.eval(coords);
    };
    const hypercd::NuSystem nus = hypercd::NuSystem::identity(slots);
    const CDNumber F = hypercd::antiderivative(f, nus, z0l, zl);
    const double residual = hypercd::verify_left_inverse(f, nus, z0l, 0.4, 3);
    const double tol = opt.tol > 0 ? opt.tol : 1e-6;

    json out;
    out["value"] = cd_to_json(F);
    out["level"] = F.level();
    out["left_inverse_residual"] = residual;
    out["tolerance"] = tol;
    out["pass"] = residual < tol;
    write_output(opt, out.dump(2));
    return residual < tol ? 0 : 1;
}

// ---------------------------------------------------------------------------
// fundamental

int run_fundamental(const Options& opt, const std::string& name, const std::string& point_text,
                    int n, int p, int q, int b, double c, int m, double a, double t) {
    const std::vector<double> x = parse_number_list(point_text);
    json out;
    out["operator"] = name;
    out["point"] = x;
    if (name == "laplace") {
        out["value"] = hypercd::laplace_psi(n, x);
    } else if (name == "heat") {
        out["value"] = hypercd::heat_kernel(m, a, t, x);
    } else if (name == "helmholtz") {
        const hypercd::ComplexifiedCD v = hypercd::helmholtz_psi(n, c, b, x);
        out["re"] = cd_to_json(v.re);
        out["im"] = cd_to_json(v.im);
    } else if (name == "hyperbolic") {
        const hypercd::ComplexifiedCD v = hypercd::hyperbolic_psi(p, q, b, x);
        out["re"] = cd_to_json(v.re);
        out["im"] = cd_to_json(v.im);
    } else {
        throw hypercd::DomainError("unknown operator '" + name + "'");
    }
    write_output(opt, out.dump(2));
    return 0;
}

// ---------------------------------------------------------------------------
// solve

int run_solve(const Options& opt, const std::string& source_text, double extent, int nodes,
              const std::string& grid_out) {
    if (nodes < 3 || nodes > 41)
        throw hypercd::DomainError("nodes must be in [3, 41] for the direct convolution solve");
    const Expr src = Expr::parse(source_text);
    const double h = 2.0 * extent / (nodes - 1);
    const std::vector<double> spacing = {h, h, h};
    GridField g = GridField::make({nodes, nodes, nodes}, {-extent, -extent, -extent}, spacing, 0);
    for (long f = 0; f < g.node_count(); ++f) {
        const std::vector<double> z = g.point(g.unflat(f));
        g.values[static_cast<size_t>(f)] = CDNumber::real(src.eval(z)[0]);
    }
    const int kn = 2 * nodes - 1;
    GridField kernel = hypercd::grid_from_function(
        [&](const std::vector<double>& z) { return CDNumber::real(hypercd::laplace_psi(3, z)); },
        {kn, kn, kn}, {-2 * extent, -2 * extent, -2 * extent}, spacing, 0,
        CDNumber::real(-2.3800774322212659 / (4.0 * hypercd::kPi * h)));
    const GridField u = hypercd::convolve_solve(kernel, g);
    if (!grid_out.empty()) u.save_file(grid_out);

    double umin = u.values[0][0], umax = umin;
    for (const CDNumber& v : u.values) {
        umin = std::min(umin, v[0]);
        umax = std::max(umax, v[0]);
    }
    json out;
    out["equation"] = "laplace3";
    out["nodes"] = nodes;
    out["extent"] = extent;
    out["min"] = umin;
    out["max"] = umax;
    if (!grid_out.empty()) out["grid"] = grid_out;
    write_output(opt, out.dump(2));
    return 0;
}

// ---------------------------------------------------------------------------
// check

struct SuiteResult {
    std::string suite;
    int cases = 0;
    double max_residual = 0.0;
    bool pass = true;

    void record(double residual, double tol) {
        ++cases;
        max_residual = std::max(max_residual, residual);
        if (!(residual < tol)) pass = false;
    }
};

SuiteResult check_algebra(unsigned seed) {
    SuiteResult r{"algebra"};
    for (int v = 1; v <= 4; ++v) {
        const int dim = 1 << v;
        for (int k = 1; k < dim; ++k) {
            const CDNumber ik = CDNumber::basis(k, v);
            r.record((ik * ik + CDNumber::real(1.0, v)).norm(), 1e-15);
            for (int l = 1; l < dim; ++l) {
                if (l == k) continue;
                const CDNumber il = CDNumber::basis(l, v);
                r.record((ik * il + il * ik).norm(), 1e-15);              // anticommute
                r.record((ik * (ik * il) + il).norm(), 1e-15);            // alternativity
            }
        }
    }
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int v = 1; v <= 3; ++v) {
        const int dim = 1 << v;
        for (int t = 0; t < 300; ++t) {
            std::vector<double> xa(static_cast<size_t>(dim)), xb(static_cast<size_t>(dim));
            for (double& c : xa) c = u(rng);
            for (double& c : xb) c = u(rng);
            const CDNumber a(v, xa), b(v, xb);
            r.record(std::fabs((a * b).norm() - a.norm() * b.norm()), 1e-12);
        }
    }
    return r;
}

SuiteResult check_factorize(unsigned seed) {
    SuiteResult r{"factorize"};
    hypercd::OperatorSpec spec;
    spec.n = 4;
    spec.second_order.assign(4, std::vector<Expr>(4, Expr::number(0.0)));
    for (int k = 0; k < 4; ++k) spec.second_order[size_t(k)][size_t(k)] = Expr::number(1.0);
    spec.first_order.assign(4, Expr::number(0.0));
    spec.zero_order = Expr::number(0.0);
    spec.blocks = {hypercd::Block{CDNumber::real(1.0), 0, 0},
                   hypercd::Block{CDNumber::real(-1.0), 1, 3}};
    const hypercd::Factorization fact = hypercd::factorize(spec);
    const hypercd::ResidualReport rep =
        hypercd::verify_factorization(spec, fact, seeded_cubics(4, 5, seed), 5);
    r.record(rep.max_residual, 1e-12);
    for (const Expr& e : fact.remainder.first_order) r.record(e.is_zero() ? 0.0 : 1.0, 0.5);
    r.record(fact.remainder.zero_order.is_zero() ? 0.0 : 1.0, 0.5);
    return r;
}

SuiteResult check_integral() {
    SuiteResult r{"integral"};
    // integral of z dz from 0 to i1 equals -1/2
    hypercd::Phrase mu = hypercd::Phrase::single(hypercd::Word::monomial(CDNumber::real(1.0), 1));
    const hypercd::Path seg =
        hypercd::Path::straight(CDNumber::real(0.0, 1), CDNumber::basis(1));
    const CDNumber val = hypercd::line_integrate(mu, seg);
    r.record((val + CDNumber::real(0.5, 1)).norm(), 1e-9);
    // reversal antisymmetry
    const hypercd::Path rev = seg.reversed();
    r.record((hypercd::line_integrate(mu, rev) + val).norm(), 1e-9);
    return r;
}

SuiteResult check_laplace() {
    SuiteResult r{"fundamental.laplace"};
    r.record(std::fabs(hypercd::laplace_psi(3, {1.0, 0.0, 0.0}) +
                       1.0 / (4.0 * hypercd::kPi)),
             1e-12);
    const double h = 1e-3;
    for (int n = 2; n <= 4; ++n) {
        std::vector<double> z(static_cast<size_t>(n), 0.0);
        for (double radius : {0.8, 1.3, 2.1}) {
            z[0] = radius * 0.6;
            z[1] = radius * 0.8;
            double lap = 0.0;
            for (int d = 0; d < n; ++d) {
                std::vector<double> zp = z, zm = z;
                zp[size_t(d)] += h;
                zm[size_t(d)] -= h;
                lap += (hypercd::laplace_psi(n, zp) - 2.0 * hypercd::laplace_psi(n, z) +
                        hypercd::laplace_psi(n, zm)) /
                       (h * h);
            }
            r.record(std::fabs(lap), 1e-6);
        }
    }
    return r;
}

SuiteResult check_heat() {
    SuiteResult r{"fundamental.heat"};
    const double a = 0.8, t = 1.3;
    // unit mass in one space dimension (Gauss-Legendre would also do; the
    // integrand decays fast enough for a wide trapezoid)
    double mass = 0.0;
    const int N = 4001;
    const double W = 40.0, hh = 2.0 * W / (N - 1);
    for (int i = 0; i < N; ++i) {
        const double x = -W + i * hh;
        mass += hypercd::heat_kernel(1, a, t, {x}) * ((i == 0 || i == N - 1) ? 0.5 : 1.0);
    }
    r.record(std::fabs(mass * hh - 1.0), 1e-8);
    // PDE residual d_t u = a^2 d_xx u at a few points
    const double h = 1e-3;
    for (double x : {0.3, -0.9, 1.7}) {
        const double ut =
            (hypercd::heat_kernel(1, a, t + h, {x}) - hypercd::heat_kernel(1, a, t - h, {x})) /
            (2 * h);
        const double uxx = (hypercd::heat_kernel(1, a, t, {x + h}) -
                            2 * hypercd::heat_kernel(1, a, t, {x}) +
                            hypercd::heat_kernel(1, a, t, {x - h})) /
                           (h * h);
        r.record(std::fabs(ut - a * a * uxx), 1e-6);
    }
    return r;
}

SuiteResult check_helmholtz() {
    SuiteResult r{"fundamental.helmholtz"};
    const double c = 1.7;
    const double h = 1e-3;
    for (double radius : {0.9, 1.4}) {
        const std::vector<double> x = {radius * 0.48, radius * 0.60, radius * 0.64};
        auto comp = [&](const std::vector<double>& z, int part) {
            const hypercd::ComplexifiedCD v = hypercd::helmholtz_psi(3, c, 1, z);
            return part == 0 ? v.re[0] : v.im[0];
        };
        for (int part : {0, 1}) {
            double lap = 0.0;
            for (int d = 0; d < 3; ++d) {
                std::vector<double> zp = x, zm = x;
                zp[size_t(d)] += h;
                zm[size_t(d)] -= h;
                lap += (comp(zp, part) - 2 * comp(x, part) + comp(zm, part)) / (h * h);
            }
            r.record(std::fabs(lap + c * c * comp(x, part)), 1e-5);
        }
    }
    // Wronskian J0' Y0 - J0 Y0' = -2/(pi z), i.e. J1 Y0 - J0 Y1 = 2/(pi z)
    for (double z : {0.7, 3.3, 11.0}) {
        const double j0 = hypercd::bessel_j(0, z), j1 = hypercd::bessel_j(1, z);
        const double y0 = hypercd::bessel_y(0, z), y1 = hypercd::bessel_y(1, z);
        r.record(std::fabs(j1 * y0 - j0 * y1 - 2.0 / (hypercd::kPi * z)), 1e-9);
    }
    return r;
}

int run_check(const Options& opt, const std::string& which) {
    std::vector<SuiteResult> results;
    const bool all = which == "all";
    bool known = all;
    if (all || which == "algebra") results.push_back(check_algebra(opt.seed)), known = true;
    if (all || which == "factorize") results.push_back(check_factorize(opt.seed)), known = true;
    if (all || which == "integral") results.push_back(check_integral()), known = true;
    if (all || which == "fundamental.laplace") results.push_back(check_laplace()), known = true;
    if (all || which == "fundamental.heat") results.push_back(check_heat()), known = true;
    if (all || which == "fundamental.helmholtz") results.push_back(check_helmholtz()), known = true;
    if (!known) {
        std::cerr << "unknown suite '" << which << "'\n";
        return 2;
    }
    json out;
    out["seed"] = opt.seed;
    bool pass = true;
    json suites = json::array();
    for (const SuiteResult& r : results) {
        suites.push_back({{"suite", r.suite},
                          {"cases", r.cases},
                          {"max_residual", r.max_residual},
                          {"pass", r.pass}});
        pass = pass && r.pass;
    }
    out["suites"] = suites;
    out["pass"] = pass;
    write_output(opt, out.dump(2));
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cayley-Dickson hypercomplex PDE toolkit"};
    app.require_subcommand(1);
    Options opt;
    app.add_option("--seed", opt.seed, "seed for randomized checks")->capture_default_str();
    app.add_option("--tol", opt.tol, "tolerance override");
    app.add_option("--out", opt.out, "output file (default: stdout)");

    int table_level = 2;
    CLI::App* table = app.add_subcommand("table", "emit a multiplication table as CSV");
    table->add_option("--level", table_level, "doubling level v")->required();

    std::string factor_spec;
    int factor_nodes = 7, factor_tests = 5;
    CLI::App* factor = app.add_subcommand("factor", "factor a second-order operator spec");
    factor->add_option("--spec", factor_spec, "operator spec JSON file")->required();
    factor->add_option("--nodes", factor_nodes, "verification nodes per axis")
        ->capture_default_str();
    factor->add_option("--tests", factor_tests, "number of seeded cubic test functions")
        ->capture_default_str();

    std::string int_coeffs, int_path;
    CLI::App* integ = app.add_subcommand("integrate",
                                         "line-integrate a polynomial phrase along a path");
    integ->add_option("--coeffs", int_coeffs,
                      "';'-separated CD constants c0;c1;...  (phrase sum c_k z^k)")
        ->required();
    integ->add_option("--path", int_path, "path vertices CSV file")->required();

    std::string ad_f, ad_slots = "1", ad_from = "0", ad_point;
    CLI::App* antider = app.add_subcommand("antiderive",
                                           "anti-derivative with left-inverse verification");
    antider->add_option("--f", ad_f, "integrand expression in z0..z_k (CD coordinates)")
        ->required();
    antider->add_option("--slots", ad_slots, "comma-separated slot coordinates")
        ->capture_default_str();
    antider->add_option("--from", ad_from, "base point z0 (CD constant)")->capture_default_str();
    antider->add_option("--point", ad_point, "evaluation point z (CD constant)")->required();

    std::string fun_name, fun_point;
    int fun_n = 3, fun_p = 1, fun_q = 1, fun_b = 1, fun_m = 3;
    double fun_c = 1.0, fun_a = 1.0, fun_t = 1.0;
    CLI::App* fund = app.add_subcommand("fundamental", "evaluate a fundamental solution");
    fund->add_option("--operator", fun_name, "laplace | heat | helmholtz | hyperbolic")
        ->required();
    fund->add_option("--point", fun_point, "comma-separated coordinates")->required();
    fund->add_option("-n", fun_n, "space dimension (laplace, helmholtz)")->capture_default_str();
    fund->add_option("-p", fun_p, "timelike count (hyperbolic)")->capture_default_str();
    fund->add_option("-q", fun_q, "spacelike count (hyperbolic)")->capture_default_str();
    fund->add_option("-b", fun_b, "branch sign +1/-1")->capture_default_str();
    fund->add_option("-c", fun_c, "Helmholtz constant")->capture_default_str();
    fund->add_option("-m", fun_m, "space dimension (heat)")->capture_default_str();
    fund->add_option("-a", fun_a, "diffusivity (heat)")->capture_default_str();
    fund->add_option("-t", fun_t, "time (heat)")->capture_default_str();

    std::string solve_source = "exp(-(z0^2+z1^2+z2^2))", solve_grid;
    double solve_extent = 6.0;
    int solve_nodes = 25;
    CLI::App* solve = app.add_subcommand("solve", "convolution solve of the 3-D Poisson problem");
    solve->add_option("--source", solve_source, "source expression g(z0,z1,z2)")
        ->capture_default_str();
    solve->add_option("--extent", solve_extent, "half-width of the box")->capture_default_str();
    solve->add_option("--nodes", solve_nodes, "nodes per axis (odd)")->capture_default_str();
    solve->add_option("--grid-out", solve_grid, "write the solution grid to this file");

    std::string check_suite = "all";
    CLI::App* check = app.add_subcommand("check", "run invariant suites");
    check->add_option("suite", check_suite, "suite name or 'all'")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (table->parsed()) return run_table(opt, table_level);
        if (factor->parsed()) return run_factor(opt, factor_spec, factor_nodes, factor_tests);
        if (integ->parsed()) return run_integrate(opt, int_coeffs, int_path);
        if (antider->parsed()) return run_antiderive(opt, ad_f, ad_slots, ad_from, ad_point);
        if (fund->parsed())
            return run_fundamental(opt, fun_name, fun_point, fun_n, fun_p, fun_q, fun_b, fun_c,
                                   fun_m, fun_a, fun_t);
        if (solve->parsed())
            return run_solve(opt, solve_source, solve_extent, solve_nodes, solve_grid);
        if (check->parsed()) return run_check(opt, check_suite);
    } catch (const hypercd::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const hypercd::ConvergenceError& e) {
        std::cerr << "convergence failure: " << e.what() << '\n';
        return 1;
    } catch (const hypercd::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
