#pragma once

// Regular-grid fields of hypercomplex values with a small text format:
// a header line "n shape origin spacing" (lists comma-separated), followed by
// one CSV row of 2^v coefficients per node, last axis fastest.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cd.hpp"

namespace hypercd {

class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error(what) {}
};

struct GridField {
    int ndim = 0;
    std::vector<int> shape;
    std::vector<double> origin;
    std::vector<double> spacing;
    int level = 0;
    std::vector<CDNumber> values;  // row-major, last axis fastest

    long node_count() const {
        long n = 1;
        for (int s : shape) n *= s;
        return n;
    }

    static GridField make(std::vector<int> shape_, std::vector<double> origin_,
                          std::vector<double> spacing_, int level_) {
        GridField g;
        g.ndim = static_cast<int>(shape_.size());
        g.shape = std::move(shape_);
        g.origin = std::move(origin_);
        g.spacing = std::move(spacing_);
        g.level = level_;
        if (g.origin.size() != g.shape.size() || g.spacing.size() != g.shape.size())
            throw DomainError("grid header lists must have equal lengths");
        g.values.assign(static_cast<size_t>(g.node_count()), CDNumber(level_));
        return g;
    }

    long flat(const std::vector<int>& idx) const {
        long f = 0;
        for (int d = 0; d < ndim; ++d) f = f * shape[size_t(d)] + idx[size_t(d)];
        return f;
    }
    std::vector<int> unflat(long f) const {
        std::vector<int> idx(static_cast<size_t>(ndim));
        for (int d = ndim - 1; d >= 0; --d) {
            idx[size_t(d)] = static_cast<int>(f % shape[size_t(d)]);
            f /= shape[size_t(d)];
        }
        return idx;
    }
    std::vector<double> point(const std::vector<int>& idx) const {
        std::vector<double> p(static_cast<size_t>(ndim));
        for (int d = 0; d < ndim; ++d)
            p[size_t(d)] = origin[size_t(d)] + spacing[size_t(d)] * idx[size_t(d)];
        return p;
    }
    CDNumber& at(const std::vector<int>& idx) { return values[static_cast<size_t>(flat(idx))]; }
    const CDNumber& at(const std::vector<int>& idx) const {
        return values[static_cast<size_t>(flat(idx))];
    }

    double cell_volume() const {
        double v = 1.0;
        for (double s : spacing) v *= s;
        return v;
    }

    void save(std::ostream& os) const {
        auto list = [&os](const auto& v) {
            for (size_t i = 0; i < v.size(); ++i) {
                if (i) os << ',';
                char buf[40];
                if constexpr (std::is_same_v<std::decay_t<decltype(v[0])>, int>)
                    std::snprintf(buf, sizeof buf, "%d", v[i]);
                else
                    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
                os << buf;
            }
        };
        os << ndim << ' ';
        list(shape);
        os << ' ';
        list(origin);
        os << ' ';
        list(spacing);
        os << '\n';
        const size_t dim = size_t(1) << level;
        for (const CDNumber& z : values) {
            for (size_t j = 0; j < dim; ++j) {
                if (j) os << ',';
                char buf[40];
                std::snprintf(buf, sizeof buf, "%.17g", z[j]);
                os << buf;
            }
            os << '\n';
        }
    }
    void save_file(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw FormatError("cannot open '" + path + "' for writing");
        save(os);
    }

    static GridField load(std::istream& is) {
        std::string header;
        if (!std::getline(is, header)) throw FormatError("empty grid file");
        std::istringstream hs(header);
        int n = 0;
        std::string shape_s, origin_s, spacing_s;
        if (!(hs >> n >> shape_s >> origin_s >> spacing_s))
            throw FormatError("malformed grid header (want: n shape origin spacing)");
        auto split = [](const std::string& s) {
            std::vector<std::string> out;
            std::istringstream ss(s);
            std::string tok;
            while (std::getline(ss, tok, ',')) out.push_back(tok);
            return out;
        };
        GridField g;
        g.ndim = n;
        try {
            for (const auto& t : split(shape_s)) g.shape.push_back(std::stoi(t));
            for (const auto& t : split(origin_s)) g.origin.push_back(std::stod(t));
            for (const auto& t : split(spacing_s)) g.spacing.push_back(std::stod(t));
        } catch (const std::exception&) {
            throw FormatError("malformed numeric list in grid header");
        }
        if (static_cast<int>(g.shape.size()) != n || static_cast<int>(g.origin.size()) != n ||
            static_cast<int>(g.spacing.size()) != n)
            throw FormatError("grid header list lengths disagree with n");
        const long nodes = g.node_count();
        std::string line;
        long row = 0;
        int level = -1;
        while (row < nodes && std::getline(is, line)) {
            if (line.empty()) continue;
            auto toks = split(line);
            if (level < 0) {
                size_t d = toks.size();
                level = 0;
                while ((size_t(1) << level) < d) ++level;
                if ((size_t(1) << level) != d)
                    throw FormatError("coefficient count per row must be a power of two");
                g.level = level;
                g.values.assign(static_cast<size_t>(nodes), CDNumber(level));
            }
            if (toks.size() != (size_t(1) << level))
                throw FormatError("inconsistent coefficient count at row " + std::to_string(row));
            CDNumber z(level);
            try {
                for (size_t j = 0; j < toks.size(); ++j) z.at(j) = std::stod(toks[j]);
            } catch (const std::exception&) {
                throw FormatError("malformed coefficient at row " + std::to_string(row));
            }
            g.values[static_cast<size_t>(row)] = z;
            ++row;
        }
        if (row != nodes)
            throw FormatError("grid file has " + std::to_string(row) + " rows, expected " +
                              std::to_string(nodes));
        return g;
    }
    static GridField load_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw FormatError("cannot open '" + path + "'");
        return load(is);
    }
};

}  // namespace hypercd
