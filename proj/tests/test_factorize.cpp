#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hypercd/factorize.hpp>

#include <random>

#include "oracles.hpp"

using hypercd::Block;
using hypercd::CDNumber;
using hypercd::Expr;
using hypercd::FirstOrderOp;
using hypercd::OperatorSpec;

namespace {

OperatorSpec diag_spec(int n, const std::vector<const char*>& diag,
                       const std::vector<Block>& blocks) {
    OperatorSpec s;
    s.n = n;
    s.second_order.assign(static_cast<size_t>(n),
                          std::vector<Expr>(static_cast<size_t>(n), Expr::number(0.0)));
    for (int k = 0; k < n; ++k)
        s.second_order[size_t(k)][size_t(k)] = Expr::parse(diag[size_t(k)]);
    s.first_order.assign(static_cast<size_t>(n), Expr::number(0.0));
    s.zero_order = Expr::number(0.0);
    s.blocks = blocks;
    return s;
}

OperatorSpec dalembert() {
    return diag_spec(4, {"1", "1", "1", "1"},
                     {Block{CDNumber::real(1.0), 0, 0}, Block{CDNumber::real(-1.0), 1, 3}});
}

}  // namespace

TEST_CASE("choose_level") {
    CHECK(hypercd::choose_level(1, 1, 1) == 2);
    CHECK(hypercd::choose_level(1, 0, 1) == 1);
    CHECK(hypercd::choose_level(3, 0, 1) == 3);  // max(v, r)
    // m=3, p=2: re-verify by the direct inequality
    int v = hypercd::choose_level(1, 2, 3);
    CHECK((1L << (v - 1)) < (1L << 2) * 4);
    CHECK((1L << 2) * 4 <= (1L << v));
    CHECK(v >= 1);
    CHECK((1L << (v - 1)) < (1L << 2) * 4);  // minimality: v-1 fails
    CHECK_THROWS_AS((void)hypercd::choose_level(0, 0, 1), hypercd::DomainError);
    // general path
    CHECK(hypercd::choose_level_general(1, 3) == 3);
    CHECK(hypercd::choose_level_general(2, 1) == 3);
}

TEST_CASE("polar_sqrt") {
    CHECK((hypercd::polar_sqrt(CDNumber::real(1.0)) - CDNumber::real(1.0)).norm() < 1e-15);
    CDNumber wm1 = hypercd::polar_sqrt(CDNumber::real(-1.0));
    CHECK((wm1 - CDNumber::basis(1)).norm() < 1e-15);
    CHECK((wm1 * wm1 + CDNumber::real(1.0, 1)).norm() < 1e-15);
    // c = exp(i_2 pi/3)
    CDNumber c = CDNumber::real(std::cos(M_PI / 3), 2) + std::sin(M_PI / 3) * CDNumber::basis(2);
    CDNumber w = hypercd::polar_sqrt(c);
    CHECK((w * w - c).norm() < 1e-13);
    // mixed imaginary direction
    CDNumber u = (1.0 / std::sqrt(2.0)) * (CDNumber::basis(1) + CDNumber::basis(3));
    CDNumber c2 = CDNumber::real(std::cos(0.8), 2) + std::sin(0.8) * u;
    CDNumber w2 = hypercd::polar_sqrt(c2);
    CHECK((w2 * w2 - c2).norm() < 1e-13);
    CHECK_THROWS_AS((void)hypercd::polar_sqrt(CDNumber::real(2.0)), hypercd::DomainError);
}

TEST_CASE("slot identity: (b(wl))(w*l) = -w^2 b on random real b") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<CDNumber> ws = {
        CDNumber::real(1.0),
        CDNumber::basis(1),
        hypercd::polar_sqrt(CDNumber::real(std::cos(1.1), 1) +
                            std::sin(1.1) * CDNumber::basis(1)),
    };
    for (const CDNumber& w : ws) {
        for (int k = 1; k <= 4; ++k) {
            CDNumber l = CDNumber::basis(hypercd::slot_index(1, k), 4);
            double b = u(rng);
            CDNumber lhs = (b * (w * l)) * (w.conj() * l);
            CDNumber rhs = (-b) * (w * w);
            CHECK((lhs - rhs.embedded(4)).norm() < 1e-13);
        }
    }
}

TEST_CASE("d'Alembert factorization is exact on polynomials") {
    OperatorSpec spec = dalembert();
    auto fact = hypercd::factorize(spec);
    CHECK(fact.base_level == 1);
    CHECK(fact.lifted_level == 4);  // slots i_2,i_4,i_6,i_8 need dimension 16
    // worked value: f = z0^2 - z1^2, box operator gives 2 - (-2) = 4
    Expr f0 = Expr::parse("z0^2 - z1^2");
    CHECK((spec.apply(f0).eval({0.3, -0.2, 0.5, 0.1}) - CDNumber::real(4.0)).norm() < 1e-13);
    std::vector<Expr> tests = {
        Expr::parse("z0^3 - 3*z0*z1^2 + z2*z3"),
        Expr::parse("z0^2*z1 + z1*z2*z3 - 2*z3^3"),
        Expr::parse("1 + z0 + z1^2 + z2^3"),
    };
    auto rep = hypercd::verify_factorization(spec, fact, tests, 7);
    CHECK(rep.max_residual < 1e-12);
    // remainder vanishes for constant coefficients
    for (const auto& e : fact.remainder.first_order) CHECK(e.is_zero());
    CHECK(fact.remainder.zero_order.is_zero());
}

TEST_CASE("Laplace factorization: sigma uses i_k^* and composes to Delta") {
    OperatorSpec spec = diag_spec(3, {"1", "1", "1"}, {Block{CDNumber::real(1.0), 0, 2}});
    auto fact = hypercd::factorize(spec);
    CHECK(fact.base_level == 0);
    // sigma coefficients are -i_k
    for (int k = 0; k < 3; ++k) {
        CDNumber c = fact.upsilon.coeff(k).eval({});
        CHECK((c + CDNumber::basis(k + 1)).norm() < 1e-15);
    }
    std::vector<Expr> tests = {Expr::parse("z0^2 + z1^2 + z2^2"),
                               Expr::parse("z0*z1*z2 + z0^3")};
    auto rep = hypercd::verify_factorization(spec, fact, tests, 9);
    CHECK(rep.max_residual < 1e-12);

    // Gaussian test function via symbolic calculus as well
    Expr g = Expr::parse("exp(-(z0^2+z1^2+z2^2)/2)");
    Expr lhs = spec.apply(g);
    Expr rhs = fact.upsilon.apply(fact.upsilon1.apply(g)) + fact.remainder.apply(g);
    double worst = 0;
    for (double x : {-0.7, 0.0, 0.9})
        for (double y : {-0.3, 0.8})
            for (double z : {0.1, -0.9})
                worst = std::max(worst, (lhs.eval({x, y, z}) - rhs.eval({x, y, z})).norm());
    CHECK(worst < 1e-8);
}

TEST_CASE("variable-coefficient block produces the 2(10)-type remainder") {
    // one variable, b(x) = 1 + x^2, c = 1
    OperatorSpec spec = diag_spec(1, {"1 + z0^2"}, {Block{CDNumber::real(1.0), 0, 0}});
    auto fact = hypercd::factorize(spec);
    // Q's first-order coefficient must be a a' (B A) = -a a' with a = sqrt(1+x^2)
    Expr qc = fact.remainder.first_order[0];
    for (double x : {-0.8, -0.1, 0.4, 1.0}) {
        double a = std::sqrt(1 + x * x);
        double ap = x / std::sqrt(1 + x * x);
        CDNumber v = qc.eval({x});
        CHECK((v - CDNumber::real(-a * ap)).compact().norm() < 1e-13);
    }
    std::vector<Expr> tests = {Expr::parse("z0^3 + 2*z0"), Expr::parse("sin(z0)")};
    auto rep = hypercd::verify_factorization(spec, fact, tests, 33);
    CHECK(rep.max_residual < 1e-8);
}

TEST_CASE("variable-coefficient elliptic block in two variables") {
    OperatorSpec spec =
        diag_spec(2, {"1 + z0^2", "2 + cos(z1)"}, {Block{CDNumber::real(1.0), 0, 1}});
    auto fact = hypercd::factorize(spec);
    std::vector<Expr> tests = {Expr::parse("z0^2*z1 + z1^3"), Expr::parse("exp(z0)*sin(z1)")};
    auto rep = hypercd::verify_factorization(spec, fact, tests, 17);
    CHECK(rep.max_residual < 1e-8);
}

TEST_CASE("mixed-direction blocks factor with a complex unit constant") {
    CDNumber c = CDNumber::real(std::cos(0.6), 1) + std::sin(0.6) * CDNumber::basis(1);
    OperatorSpec spec = diag_spec(2, {"1", "1"},
                                  {Block{c, 0, 0}, Block{CDNumber::real(-1.0), 1, 1}});
    auto fact = hypercd::factorize(spec);
    std::vector<Expr> tests = {Expr::parse("z0^3 + z0*z1^2"), Expr::parse("z0^2 - z1^2")};
    auto rep = hypercd::verify_factorization(spec, fact, tests, 9);
    CHECK(rep.max_residual < 1e-12);
}

TEST_CASE("sign-changing coefficients are rejected with a diagnostic") {
    OperatorSpec spec = diag_spec(1, {"z0"}, {Block{CDNumber::real(1.0), 0, 0}});
    CHECK_THROWS_AS((void)hypercd::factorize(spec), hypercd::SpecificationError);
    OperatorSpec neg = diag_spec(1, {"-1"}, {Block{CDNumber::real(1.0), 0, 0}});
    CHECK_THROWS_AS((void)hypercd::factorize(neg), hypercd::SpecificationError);
}

TEST_CASE("first-order operators applied to constants yield zero_order scaling") {
    OperatorSpec spec = dalembert();
    auto fact = hypercd::factorize(spec);
    Expr one = Expr::number(1.0);
    CHECK(fact.upsilon.apply(one).eval({0.0, 0.0, 0.0, 0.0}).norm() < 1e-15);
    FirstOrderOp with_zero = fact.upsilon;
    with_zero.zero_order = Expr::cd_constant(CDNumber::basis(3));
    CHECK((with_zero.apply(Expr::number(2.0)).eval({0, 0, 0, 0}) -
           2.0 * CDNumber::basis(3)).norm() < 1e-15);
}

TEST_CASE("odd-order lift") {
    using hypercd::GeneralOperator;
    using hypercd::GeneralTerm;
    // A = d/dx_1 (one variable)
    GeneralOperator a;
    a.n = 1;
    a.terms.push_back(GeneralTerm{{1}, Expr::number(1.0)});
    GeneralOperator e = hypercd::lift_odd_order(a);
    CHECK(e.order() == 2);
    // at t = 0 on t-independent g: E g = A g
    Expr g = Expr::parse("z1^3 + 2*z1");  // lifted coordinate 0 is t
    Expr eg = e.apply(g);
    for (double x : {-1.0, 0.3, 2.0}) {
        double expect = 3 * x * x + 2;
        CHECK((eg.eval({0.0, x}) - CDNumber::real(expect)).norm() < 1e-13);
    }
    // order-3 operator lifts to order 4
    GeneralOperator a3;
    a3.n = 2;
    a3.terms.push_back(GeneralTerm{{3, 0}, Expr::number(1.0)});
    a3.terms.push_back(GeneralTerm{{1, 2}, Expr::parse("z1")});
    CHECK(hypercd::lift_odd_order(a3).order() == 4);
}

TEST_CASE("lifted first-order factorization: residual order at t=0 is 2s-2") {
    // A = (1 + x^2) d/dx + beta, beta = x
    std::vector<Expr> alpha = {Expr::parse("1 + z0^2")};
    Expr beta = Expr::parse("z0");
    auto fact = hypercd::factor_lifted_first_order(alpha, beta);

    hypercd::GeneralOperator a;
    a.n = 1;
    a.terms.push_back(hypercd::GeneralTerm{{1}, alpha[0]});
    a.terms.push_back(hypercd::GeneralTerm{{0}, beta});
    hypercd::GeneralOperator e = hypercd::lift_odd_order(a);

    std::vector<Expr> tests = {Expr::parse("z0^2*z1 + z1^3"), Expr::parse("z0 + z1 + z0*z1")};
    for (const Expr& f : tests) {
        Expr lhs = e.apply(f);
        Expr rhs = fact.upsilon.apply(fact.upsilon1.apply(f)) + fact.remainder.apply(f);
        for (double t : {-0.5, 0.0, 1.0})
            for (double x : {-1.0, 0.2, 0.9})
                CHECK((lhs.eval({t, x}) - rhs.eval({t, x})).norm() < 1e-12);
        // at t=0 the unfactored part E - Upsilon Upsilon_1 is beta f (order 0)
        Expr diff = lhs - fact.upsilon.apply(fact.upsilon1.apply(f));
        for (double x : {-0.7, 0.1, 0.8}) {
            double expect = x * f.eval_real({0.0, x});
            CHECK((diff.eval({0.0, x}) - CDNumber::real(expect)).compact().norm() < 1e-12);
        }
    }
}

TEST_CASE("compose_elliptic") {
    // t_j = i_j^* gives the Laplacian
    FirstOrderOp ups;
    ups.n = 3;
    ups.zero_order = Expr::number(0.0);
    for (int j = 0; j < 3; ++j)
        ups.factors.push_back({Expr::cd_constant(CDNumber::basis(j + 1).conj())});
    OperatorSpec lap = hypercd::compose_elliptic(ups, Expr::number(0.0));
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
            CHECK(lap.second_order[size_t(j)][size_t(k)].eval_real({}) ==
                  doctest::Approx(j == k ? 1.0 : 0.0));

    // Helmholtz: beta = c real, Re(t_j^* beta) = 0 -> first order vanishes
    OperatorSpec helm = hypercd::compose_elliptic(ups, Expr::number(2.5));
    for (int j = 0; j < 3; ++j) CHECK(helm.first_order[size_t(j)].is_zero());
    CHECK(helm.zero_order.eval_real({}) == doctest::Approx(6.25));

    // random constant coefficients: Gram-matrix oracle + direct composition
    std::mt19937_64 rng(7);
    FirstOrderOp r;
    r.n = 2;
    r.zero_order = Expr::number(0.0);
    std::vector<CDNumber> t;
    for (int j = 0; j < 2; ++j) {
        CDNumber c(3, oracle::random_vec(rng, 8));
        t.push_back(c);
        r.factors.push_back({Expr::cd_constant(c)});
    }
    CDNumber b(3, oracle::random_vec(rng, 8));
    OperatorSpec comp = hypercd::compose_elliptic(r, Expr::cd_constant(b));
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
            CHECK(comp.second_order[size_t(j)][size_t(k)].eval_real({}) ==
                  doctest::Approx(hypercd::real_scalar_product(t[size_t(j)], t[size_t(k)]))
                      .epsilon(1e-12));
    // direct composition oracle: (Upsilon + beta)((Upsilon + beta)^* f)
    FirstOrderOp adj;
    adj.n = 2;
    adj.zero_order = Expr::cd_constant(b.conj());
    for (int j = 0; j < 2; ++j) adj.factors.push_back({Expr::cd_constant(t[size_t(j)].conj())});
    FirstOrderOp fwd = r;
    fwd.zero_order = Expr::cd_constant(b);
    for (const char* s : {"z0^2 + z0*z1", "z1^3 - 2*z0"}) {
        Expr f = Expr::parse(s);
        Expr direct = fwd.apply(adj.apply(f));
        Expr closed = comp.apply(f);
        for (double x : {-0.5, 0.4})
            for (double y : {0.2, -0.9})
                CHECK((direct.eval({x, y}) - closed.eval({x, y})).norm() < 1e-12);
    }
}

TEST_CASE("specification validation") {
    OperatorSpec s = dalembert();
    s.blocks[1].hi = 2;  // leaves variable 3 unassigned
    CHECK_THROWS_AS(s.validate(), hypercd::SpecificationError);
    OperatorSpec t = dalembert();
    t.blocks[0].c = CDNumber::real(2.0);
    CHECK_THROWS_AS(t.validate(), hypercd::SpecificationError);
    OperatorSpec u = dalembert();
    u.second_order[0][1] = Expr::number(1.0);
    CHECK_THROWS_AS(u.validate(), hypercd::SpecificationError);
}
