#pragma once

// Phrases (sums of bracketed words in one hypercomplex variable), polyline
// paths, Stieltjes line integration with dyadic refinement, and the
// anti-derivative that inverts a first-order operator from the left.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cd.hpp"

namespace hypercd {

class ConvergenceError : public Error {
public:
    CDNumber previous;
    CDNumber last;
    ConvergenceError(CDNumber prev, CDNumber last_)
        : Error("line integral did not converge; last two estimates " +
                std::to_string(prev.norm()) + " and " + std::to_string(last_.norm()) +
                " in norm"),
          previous(std::move(prev)),
          last(std::move(last_)) {}
};

// ---------------------------------------------------------------------------
// Words and phrases
// ---------------------------------------------------------------------------

struct Atom {
    bool is_z = false;
    CDNumber value{0};  // used only when !is_z

    static Atom z() {
        Atom a;
        a.is_z = true;
        return a;
    }
    static Atom constant(CDNumber c) {
        Atom a;
        a.value = std::move(c);
        return a;
    }
};

// A word is a sequence of atoms together with an explicit binary bracketing.
// Multiplication of hypercomplex numbers is not associative, so the tree is
// part of the data; left_nested() gives the default (((a b) c) d) shape.
class Word {
public:
    struct Node {
        int left = -1;
        int right = -1;
        int atom = -1;  // leaf when >= 0
    };

    std::vector<Atom> atoms;
    std::vector<Node> nodes;
    int root = -1;

    static Word left_nested(std::vector<Atom> as) {
        if (as.empty()) throw DomainError("word needs at least one atom");
        Word w;
        w.atoms = std::move(as);
        int prev = w.leaf(0);
        for (size_t k = 1; k < w.atoms.size(); ++k) {
            int r = w.leaf(static_cast<int>(k));
            w.nodes.push_back({prev, r, -1});
            prev = static_cast<int>(w.nodes.size()) - 1;
        }
        w.root = prev;
        return w;
    }

    // c * z^m with left nesting; m = 0 gives the constant word.
    static Word monomial(CDNumber c, int m) {
        std::vector<Atom> as;
        as.push_back(Atom::constant(std::move(c)));
        for (int k = 0; k < m; ++k) as.push_back(Atom::z());
        return left_nested(std::move(as));
    }

    int z_count() const {
        int n = 0;
        for (const Atom& a : atoms)
            if (a.is_z) ++n;
        return n;
    }

    CDNumber eval(const CDNumber& z) const { return eval_node(root, z, -1, z); }

    // Evaluate with the z at atom index `pos` replaced by h.
    CDNumber eval_subst(const CDNumber& z, int pos, const CDNumber& h) const {
        return eval_node(root, z, pos, h);
    }

    // Directional derivative of the word at z applied to h: the sum over
    // z-positions of the word with that one occurrence replaced by h.
    CDNumber derivative_apply(const CDNumber& z, const CDNumber& h) const {
        CDNumber out(z.level());
        for (size_t k = 0; k < atoms.size(); ++k)
            if (atoms[k].is_z) out = out + eval_subst(z, static_cast<int>(k), h);
        return out;
    }

    bool is_left_comb() const {
        int n = root;
        while (n >= 0 && nodes[size_t(n)].atom < 0) {
            const Node& nd = nodes[size_t(n)];
            if (nodes[size_t(nd.right)].atom < 0) return false;
            n = nd.left;
        }
        return true;
    }

private:
    int leaf(int atom_index) {
        nodes.push_back({-1, -1, atom_index});
        return static_cast<int>(nodes.size()) - 1;
    }
    CDNumber eval_node(int n, const CDNumber& z, int subst, const CDNumber& h) const {
        const Node& nd = nodes[size_t(n)];
        if (nd.atom >= 0) {
            const Atom& a = atoms[size_t(nd.atom)];
            if (!a.is_z) return a.value;
            return nd.atom == subst ? h : z;
        }
        return eval_node(nd.left, z, subst, h) * eval_node(nd.right, z, subst, h);
    }
};

struct Phrase {
    std::vector<Word> words;

    static Phrase single(Word w) {
        Phrase p;
        p.words.push_back(std::move(w));
        return p;
    }

    CDNumber eval(const CDNumber& z) const {
        CDNumber out(z.level());
        for (const Word& w : words) out = out + w.eval(z);
        return out;
    }
    CDNumber derivative_apply(const CDNumber& z, const CDNumber& h) const {
        CDNumber out(z.level());
        for (const Word& w : words) out = out + w.derivative_apply(z, h);
        return out;
    }

    friend Phrase operator+(const Phrase& a, const Phrase& b) {
        Phrase p = a;
        p.words.insert(p.words.end(), b.words.begin(), b.words.end());
        return p;
    }
    Phrase scaled(double s) const {
        Phrase p = *this;
        for (Word& w : p.words) {
            bool done = false;
            for (Atom& a : w.atoms)
                if (!a.is_z) {
                    a.value = s * a.value;
                    done = true;
                    break;
                }
            if (!done) {
                std::vector<Atom> as;
                as.push_back(Atom::constant(CDNumber::real(s)));
                as.insert(as.end(), w.atoms.begin(), w.atoms.end());
                w = Word::left_nested(std::move(as));
            }
        }
        return p;
    }
};

// Raise a left-nested word: one more z appended to its (single, contiguous)
// run of z atoms, with the whole word scaled by 1/(m+1).  Substituting any
// one z of the raised word by the real unit reproduces the original word,
// which is what makes the construction an anti-derivative.
inline Word raise_word(const Word& w) {
    if (!w.is_left_comb())
        throw DomainError("anti-derivative requires a left-nested word");
    int first = -1, last = -1;
    for (size_t k = 0; k < w.atoms.size(); ++k)
        if (w.atoms[k].is_z) {
            if (first < 0) first = static_cast<int>(k);
            last = static_cast<int>(k);
        }
    if (first >= 0)
        for (int k = first; k <= last; ++k)
            if (!w.atoms[size_t(k)].is_z)
                throw DomainError("anti-derivative requires one contiguous run of z atoms");
    const int m = w.z_count();
    std::vector<Atom> as = w.atoms;
    as.insert(as.begin() + (last < 0 ? static_cast<long>(as.size()) : last + 1), Atom::z());
    const double scale = 1.0 / (m + 1);
    bool scaled = false;
    for (Atom& a : as)
        if (!a.is_z) {
            a.value = scale * a.value;
            scaled = true;
            break;
        }
    if (!scaled) as.insert(as.begin(), Atom::constant(CDNumber::real(scale)));
    return Word::left_nested(std::move(as));
}

inline Phrase antiderivative_phrase(const Phrase& mu) {
    Phrase kappa;
    for (const Word& w : mu.words) kappa.words.push_back(raise_word(w));
    return kappa;
}

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

struct Path {
    std::vector<CDNumber> vertices;  // at least two; straight segments between

    static Path straight(CDNumber a, CDNumber b) {
        Path p;
        p.vertices = {std::move(a), std::move(b)};
        return p;
    }

    void validate() const {
        if (vertices.size() < 2) throw DomainError("path needs at least two vertices");
    }

    int segments() const { return static_cast<int>(vertices.size()) - 1; }

    double variation() const {
        validate();
        double v = 0.0;
        for (size_t k = 0; k + 1 < vertices.size(); ++k)
            v += (vertices[k + 1] - vertices[k]).norm();
        return v;
    }

    // Affine parametrisation over [0,1], equal parameter share per segment.
    CDNumber point(double t) const {
        validate();
        const int s = segments();
        double u = t * s;
        int k = static_cast<int>(std::floor(u));
        if (k < 0) k = 0;
        if (k >= s) k = s - 1;
        const double frac = u - k;
        return vertices[size_t(k)] + frac * (vertices[size_t(k) + 1] - vertices[size_t(k)]);
    }

    Path reversed() const {
        Path p = *this;
        std::reverse(p.vertices.begin(), p.vertices.end());
        return p;
    }

    static Path concat(const Path& a, const Path& b) {
        a.validate();
        b.validate();
        if ((a.vertices.back() - b.vertices.front()).norm() >= 1e-12)
            throw DomainError("paths do not share an endpoint");
        Path p = a;
        p.vertices.insert(p.vertices.end(), b.vertices.begin() + 1, b.vertices.end());
        return p;
    }

    // One vertex per row, 2^v comma-separated coordinates.
    static Path load_csv(std::istream& is) {
        Path p;
        std::string line;
        int level = -1;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            std::vector<double> row;
            std::istringstream ss(line);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                try {
                    row.push_back(std::stod(tok));
                } catch (const std::exception&) {
                    throw DomainError("malformed coordinate in path file");
                }
            }
            if (level < 0) {
                level = 0;
                while ((size_t(1) << level) < row.size()) ++level;
                if ((size_t(1) << level) != row.size())
                    throw DomainError("path rows must have a power-of-two column count");
            }
            if (row.size() != (size_t(1) << level))
                throw DomainError("inconsistent column count in path file");
            p.vertices.emplace_back(level, std::move(row));
        }
        p.validate();
        return p;
    }
    static Path load_csv_file(const std::string& file) {
        std::ifstream is(file);
        if (!is) throw DomainError("cannot open path file '" + file + "'");
        return load_csv(is);
    }
};

// ---------------------------------------------------------------------------
// Stieltjes integration with dyadic refinement
// ---------------------------------------------------------------------------

namespace detail {

// Midpoint Stieltjes sums of term(z_mid, dnu) over the path, doubling the
// number of sample points per segment until two successive estimates agree.
template <class Term, class Nu>
CDNumber refine_integral(const Path& path, const Term& term, const Nu& nu, double rtol,
                         int max_refinements) {
    path.validate();
    CDNumber prev(0), prev2(0);
    bool have_prev = false;
    for (int r = 0; r <= max_refinements; ++r) {
        const long m = static_cast<long>(path.segments()) << r;
        CDNumber sum(0);
        auto nu_right = nu(path.point(0.0));
        for (long i = 0; i < m; ++i) {
            const double t0 = double(i) / m;
            const double t1 = double(i + 1) / m;
            auto nu_left = std::move(nu_right);
            nu_right = nu(path.point(t1));
            sum = sum + term(path.point(0.5 * (t0 + t1)), nu_right - nu_left);
        }
        // Midpoint sums have an h^2 error expansion for smooth data, so one
        // Richardson step sharpens the converged value essentially for free.
        if (have_prev && (sum - prev).norm() <= rtol * (1.0 + sum.norm()))
            return sum + (1.0 / 3.0) * (sum - prev);
        prev2 = prev;
        prev = sum;
        have_prev = true;
    }
    throw ConvergenceError(prev2, prev);
}

}  // namespace detail

constexpr double kIntegralRtol = 1e-9;
constexpr int kMaxRefinements = 22;

// Integral of the phrase mu along the path against the (possibly
// hypercomplex-valued) measure nu(z); nu defaults to the identity.
inline CDNumber line_integrate(const Phrase& mu, const Path& path,
                               const std::function<CDNumber(const CDNumber&)>& nu = {},
                               double rtol = kIntegralRtol, int max_refinements = kMaxRefinements) {
    const Phrase kappa = antiderivative_phrase(mu);
    auto term = [&kappa](const CDNumber& z, const CDNumber& dnu) {
        return kappa.derivative_apply(z, dnu);
    };
    if (nu)
        return detail::refine_integral(path, term, nu, rtol, max_refinements);
    return detail::refine_integral(
        path, term, [](const CDNumber& z) { return z; }, rtol, max_refinements);
}

// Integral of a pointwise function f against a real measure nu along a path.
inline CDNumber stieltjes_integrate(const std::function<CDNumber(const CDNumber&)>& f,
                                    const Path& path, const std::function<double(const CDNumber&)>& nu,
                                    double rtol = kIntegralRtol,
                                    int max_refinements = kMaxRefinements) {
    auto term = [&f](const CDNumber& z, double dnu) { return f(z) * dnu; };
    return detail::refine_integral(path, term, nu, rtol, max_refinements);
}

// ---------------------------------------------------------------------------
// Anti-derivatives of first-order operators (separable coordinate weights)
// ---------------------------------------------------------------------------

// The operator is Upsilon g = sum_j psi_j(x_j) (dg/dx_j) i_j^*, one summand
// per slot.  Its right inverse integrates against the real measures nu_j with
// d nu_j / d x_j = 1 / psi_j.
struct NuSlot {
    int coord = 1;                        // coordinate index j, slot i_j
    std::function<double(double)> psi;    // weight, must not vanish
    std::function<double(double)> nu;     // primitive of 1/psi, nu(0) = 0
};

struct NuSystem {
    std::vector<NuSlot> slots;

    static NuSystem identity(const std::vector<int>& coords) {
        NuSystem s;
        for (int c : coords)
            s.slots.push_back({c, [](double) { return 1.0; }, [](double x) { return x; }});
        return s;
    }
    static NuSystem constant(const std::vector<int>& coords, double psi) {
        if (psi == 0.0) throw DomainError("coordinate weight must be nonzero");
        NuSystem s;
        for (int c : coords)
            s.slots.push_back(
                {c, [psi](double) { return psi; }, [psi](double x) { return x / psi; }});
        return s;
    }
    // Separable weight psi(x_j); nu is built by adaptive Simpson quadrature of
    // 1/psi from 0, rejecting weights that vanish or change sign on the way.
    static NuSlot separable(int coord, std::function<double(double)> psi) {
        auto nu = [psi](double x) {
            const double s0 = psi(0.0);
            if (s0 == 0.0) throw DomainError("coordinate weight vanishes at 0");
            const int n = 64;  // panels for composite Simpson with refinement
            double coarse = 0.0, fine = 0.0;
            for (int pass = 0; pass < 2; ++pass) {
                const int m = pass ? 2 * n : n;
                double acc = 0.0;
                const double h = x / m;
                for (int k = 0; k < m; ++k) {
                    const double a = k * h, b = a + h, c = 0.5 * (a + b);
                    const double pa = psi(a), pb = psi(b), pc = psi(c);
                    if (pa * s0 <= 0.0 || pb * s0 <= 0.0 || pc * s0 <= 0.0)
                        throw DomainError("coordinate weight vanishes or changes sign");
                    acc += h / 6.0 * (1.0 / pa + 4.0 / pc + 1.0 / pb);
                }
                (pass ? fine : coarse) = acc;
            }
            return fine + (fine - coarse) / 15.0;
        };
        NuSlot slot;
        slot.coord = coord;
        slot.psi = std::move(psi);
        slot.nu = nu;
        return slot;
    }
};

// F(z) = n^{-1} sum_j (integral of f d nu_j along a straight path z0 -> z) i_j.
// F(z0) = 0 by construction.
inline CDNumber antiderivative(const std::function<CDNumber(const CDNumber&)>& f,
                               const NuSystem& nus, const CDNumber& z0, const CDNumber& z,
                               double rtol = kIntegralRtol) {
    if (nus.slots.empty()) throw DomainError("empty coordinate system");
    const int level = z.level();
    const Path path = Path::straight(z0, z);
    CDNumber F(level);
    for (const NuSlot& s : nus.slots) {
        auto nu_of = [&s](const CDNumber& w) { return s.nu(w[size_t(s.coord)]); };
        const CDNumber part = stieltjes_integrate(f, path, nu_of, rtol);
        F = F + part * CDNumber::basis(s.coord, level);
    }
    return (1.0 / static_cast<double>(nus.slots.size())) * F;
}

// Max-norm residual of Upsilon(F) - f over an axis-aligned sample box around
// z0, with dF/dx_j taken by central differences of the anti-derivative.
inline double verify_left_inverse(const std::function<CDNumber(const CDNumber&)>& f,
                                  const NuSystem& nus, const CDNumber& z0, double half_width,
                                  int samples_per_axis, double fd_step = 1e-3,
                                  double rtol = 1e-11) {
    if (samples_per_axis < 1) throw DomainError("need at least one sample per axis");
    const int level = z0.level();
    const size_t naxes = nus.slots.size();
    std::vector<int> idx(naxes, 0);
    double worst = 0.0;
    for (;;) {
        CDNumber z = z0;
        for (size_t d = 0; d < naxes; ++d) {
            const double off = samples_per_axis == 1
                                   ? 0.0
                                   : -half_width + 2.0 * half_width * idx[d] / (samples_per_axis - 1);
            z.at(size_t(nus.slots[d].coord)) += off;
        }
        CDNumber upsilon_F(level);
        for (const NuSlot& s : nus.slots) {
            CDNumber zp = z, zm = z;
            zp.at(size_t(s.coord)) += fd_step;
            zm.at(size_t(s.coord)) -= fd_step;
            const CDNumber dF =
                (1.0 / (2.0 * fd_step)) *
                (antiderivative(f, nus, z0, zp, rtol) - antiderivative(f, nus, z0, zm, rtol));
            upsilon_F = upsilon_F + s.psi(z[size_t(s.coord)]) *
                                        (dF * CDNumber::basis(s.coord, level).conj());
        }
        worst = std::max(worst, (upsilon_F - f(z)).norm());
        size_t d = 0;
        while (d < naxes && ++idx[d] == samples_per_axis) idx[d++] = 0;
        if (d == naxes) break;
    }
    return worst;
}

}  // namespace hypercd
