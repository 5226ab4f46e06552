#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hypercd/expr.hpp>

#include <random>

using hypercd::CDNumber;
using hypercd::Expr;

namespace {

// Central-difference oracle for the symbolic derivative.
double fd_partial(const Expr& e, std::vector<double> z, int var, double h = 1e-6) {
    z[static_cast<size_t>(var)] += h;
    double up = e.eval_real(z);
    z[static_cast<size_t>(var)] -= 2 * h;
    double dn = e.eval_real(z);
    return (up - dn) / (2 * h);
}

}  // namespace

TEST_CASE("parse/eval round trip on real expressions") {
    auto e = Expr::parse("z0^2 + 3.5*z1 - sin(z0*z1) / (2 + cos(z1))");
    std::vector<double> z{0.7, -1.3};
    double expect = 0.49 + 3.5 * (-1.3) - std::sin(0.7 * -1.3) / (2 + std::cos(-1.3));
    CHECK(e.eval_real(z) == doctest::Approx(expect).epsilon(1e-14));

    auto g = Expr::parse("exp(-(z0^2+z1^2)/2)");
    CHECK(g.eval_real({0.0, 0.0}) == doctest::Approx(1.0));
    CHECK(g.eval_real({1.0, 1.0}) == doctest::Approx(std::exp(-1.0)));

    CHECK(Expr::parse("sqrt(z0)").eval_real({4.0}) == doctest::Approx(2.0));
    CHECK(Expr::parse("ln(z0)").eval_real({std::exp(2.0)}) == doctest::Approx(2.0));
}

TEST_CASE("basis literals participate in arithmetic") {
    auto e = Expr::parse("i1*i2");
    CDNumber v = e.eval({});
    CHECK((v - CDNumber::basis(3)).norm() < 1e-15);

    auto f = Expr::parse("(2 + 3*i1)*(2 - 3*i1)");
    CHECK((f.eval({}) - CDNumber::real(13.0, 1)).norm() < 1e-13);

    auto mixed = Expr::parse("z0*i4 + z1*i2");
    CDNumber m = mixed.eval({2.0, 5.0});
    CHECK(m[4] == doctest::Approx(2.0));
    CHECK(m[2] == doctest::Approx(5.0));
    CHECK_THROWS_AS((void)mixed.eval_real({1.0, 1.0}), hypercd::DomainError);
}

TEST_CASE("symbolic derivatives match the finite-difference oracle") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.2, 1.5);
    const char* exprs[] = {
        "z0^3*z1 - 2*z0*z1^2",
        "exp(z0*z1)",
        "sin(z0)*cos(z1) + z0/z1",
        "sqrt(z0^2 + z1^2 + 1)",
        "ln(1 + z0^2) * z1",
        "(z0+z1)^4 / (1 + z0^2)",
    };
    for (const char* s : exprs) {
        Expr e = Expr::parse(s);
        for (int var = 0; var < 2; ++var) {
            Expr d = e.differentiate(var);
            for (int rep = 0; rep < 5; ++rep) {
                std::vector<double> z{u(rng), u(rng)};
                double sym = d.eval_real(z);
                double fd = fd_partial(e, z, var);
                CHECK(std::abs(sym - fd) < 1e-7 * (1.0 + std::abs(sym)));
            }
        }
    }
}

TEST_CASE("derivatives of basis-valued expressions preserve factor order") {
    // d/dz0 (z0 * i1) = i1;  d/dz0 (i1 * z0) = i1 as well, but products of two
    // distinct literals must not commute: d/dz0 (z0*i1*i2) = i1*i2 = i3.
    Expr e = Expr::parse("z0*i1*i2");
    CDNumber d = e.differentiate(0).eval({1.0});
    CHECK((d - CDNumber::basis(3)).norm() < 1e-15);
    Expr f = Expr::parse("z0*i2*i1");
    CDNumber df = f.differentiate(0).eval({1.0});
    CHECK((df + CDNumber::basis(3)).norm() < 1e-15);
}

TEST_CASE("constant folding") {
    CHECK(Expr::parse("0*z0 + 0").is_zero());
    CHECK(Expr::parse("z0 - z0 + 0*z1").folded().str() != "");
    CHECK(Expr::parse("2^3 + 1").eval_real({}) == doctest::Approx(9.0));
    CHECK(Expr::number(5.0).differentiate(0).is_zero());
    CHECK(Expr::parse("3*4").is_constant());
    CHECK(!Expr::parse("z2+1").is_constant());
    CHECK(Expr::parse("z2+z5").max_variable() == 5);
}

TEST_CASE("coordinate shifting") {
    Expr e = Expr::parse("z0^2 + z1");
    Expr s = e.shift_coords(1);
    CHECK(s.eval_real({99.0, 3.0, 4.0}) == doctest::Approx(13.0));
}

TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_AS((void)Expr::parse("z0 + "), hypercd::ParseError);
    CHECK_THROWS_AS((void)Expr::parse("foo(z0)"), hypercd::ParseError);
    CHECK_THROWS_AS((void)Expr::parse("z0 ++ z1"), hypercd::ParseError);
    CHECK_THROWS_AS((void)Expr::parse("(z0"), hypercd::ParseError);
    CHECK_THROWS_AS((void)Expr::parse("z99"), hypercd::Error);
    try {
        (void)Expr::parse("z0 + @");
    } catch (const hypercd::ParseError& pe) {
        CHECK(pe.position() >= 5);
    }
}

TEST_CASE("domain errors in evaluation") {
    CHECK_THROWS_AS((void)Expr::parse("sqrt(z0)").eval_real({-1.0}), hypercd::DomainError);
    CHECK_THROWS_AS((void)Expr::parse("ln(z0)").eval_real({0.0}), hypercd::DomainError);
    CHECK_THROWS_AS((void)Expr::parse("exp(i1)").eval({}), hypercd::DomainError);
    CHECK_THROWS_AS((void)Expr::parse("z3").eval_real({1.0}), hypercd::DomainError);
}
