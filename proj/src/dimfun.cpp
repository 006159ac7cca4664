#include "diolab/dimfun.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace diolab {

namespace {

constexpr double kInvE = 0.36787944117144233;

double log_inv(double r) { return -std::log(r); }

}  // namespace

std::string fmt_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

DimensionFunction DimensionFunction::power(double s) {
    if (!(s > 0.0) || !std::isfinite(s))
        throw NotADimensionFunction("power law needs s > 0, got " + fmt_double(s));
    DimensionFunction f;
    f.kind_ = Kind::PowerLaw;
    f.s_ = s;
    return f;
}

DimensionFunction DimensionFunction::power_log(double s, double k) {
    if (!std::isfinite(s) || !std::isfinite(k) || s < 0.0 || (s == 0.0 && k >= 0.0))
        throw NotADimensionFunction("r^" + fmt_double(s) + "*log^" + fmt_double(k) +
                                    " does not vanish at 0");
    if (k == 0.0) return power(s);
    DimensionFunction f;
    f.kind_ = Kind::PowerLogLaw;
    f.s_ = s;
    f.k_ = k;
    return f;
}

DimensionFunction DimensionFunction::tabulated(std::vector<std::pair<double, double>> samples,
                                               double decay_threshold) {
    if (samples.size() < 2) throw NotADimensionFunction("table needs at least 2 samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        auto [r, v] = samples[i];
        if (!(r > 0.0) || !(v >= 0.0) || !std::isfinite(r) || !std::isfinite(v))
            throw NotADimensionFunction("table sample out of range at row " + std::to_string(i));
        if (i > 0) {
            if (!(r > samples[i - 1].first))
                throw NotADimensionFunction("table r column not strictly increasing");
            if (v < samples[i - 1].second)
                throw NotADimensionFunction("table f column decreases at row " + std::to_string(i));
        }
    }
    if (!(samples.front().second <= decay_threshold * samples.back().second))
        throw NotADimensionFunction("table does not decay: first value exceeds threshold");
    DimensionFunction f;
    f.kind_ = Kind::Tabulated;
    f.s_ = 0.0;
    f.decay_threshold_ = decay_threshold;
    f.samples_ = std::move(samples);
    return f;
}

double DimensionFunction::domain_max() const {
    switch (kind_) {
        case Kind::PowerLaw:
            return 1.0;
        case Kind::PowerLogLaw:
            // beyond exp(-k/s) the log factor would make f decrease
            if (k_ > 0.0 && s_ > 0.0) return std::min(kInvE, std::exp(-k_ / s_));
            return kInvE;
        case Kind::Tabulated:
            return samples_.back().first;
    }
    return 1.0;
}

double DimensionFunction::operator()(double r) const {
    if (!(r > 0.0) || r > domain_max())
        throw DomainError("r = " + fmt_double(r) + " outside (0, " + fmt_double(domain_max()) + "]");
    switch (kind_) {
        case Kind::PowerLaw:
            if (s_ == 1.0) return r;
            if (s_ == 2.0) return r * r;
            return std::pow(r, s_);
        case Kind::PowerLogLaw:
            return std::pow(r, s_) * std::pow(log_inv(r), k_);
        case Kind::Tabulated: {
            double base;
            auto it = std::lower_bound(samples_.begin(), samples_.end(), r,
                                       [](const auto& p, double x) { return p.first < x; });
            if (it == samples_.begin()) {
                // linear from the origin below the first sample
                base = samples_.front().second * (r / samples_.front().first);
            } else if (it != samples_.end() && it->first == r) {
                base = it->second;
            } else {
                auto lo = *(it - 1), hi = *it;
                double t = (r - lo.first) / (hi.first - lo.first);
                base = lo.second + t * (hi.second - lo.second);
            }
            return shift_ == 0.0 ? base : std::pow(r, shift_) * base;
        }
    }
    return 0.0;
}

double eval(const DimensionFunction& f, double r) { return f(r); }

DimensionFunction derive_quotient(const DimensionFunction& f, int l) {
    if (l < 0) throw std::invalid_argument("quotient order must be non-negative");
    if (l == 0) return f;
    switch (f.kind()) {
        case DimensionFunction::Kind::PowerLaw:
            if (f.s() <= l)
                throw NotADimensionFunction("r^" + fmt_double(f.s() - l) + " does not vanish at 0");
            return DimensionFunction::power(f.s() - l);
        case DimensionFunction::Kind::PowerLogLaw: {
            double s = f.s() - l;
            if (s < 0.0 || (s == 0.0 && f.k() >= 0.0))
                throw NotADimensionFunction("quotient r^" + fmt_double(s) + "*log^" +
                                            fmt_double(f.k()) + " does not vanish at 0");
            return DimensionFunction::power_log(s, f.k());
        }
        case DimensionFunction::Kind::Tabulated: {
            DimensionFunction g = f;
            g.shift_ = f.shift_ - l;
            // the quotient must still be a table-shaped dimension function
            std::vector<std::pair<double, double>> vals;
            for (auto [r, v] : f.samples()) vals.emplace_back(r, g(r));
            for (std::size_t i = 1; i < vals.size(); ++i)
                if (vals[i].second < vals[i - 1].second)
                    throw NotADimensionFunction("tabulated quotient is not monotone");
            if (!(vals.front().second <= f.decay_threshold_ * vals.back().second))
                throw NotADimensionFunction("tabulated quotient does not decay");
            return g;
        }
    }
    return f;
}

Monotonicity check_monotone_ratio(const DimensionFunction& f, int k, int grid) {
    if (grid < 2) throw std::invalid_argument("grid must be >= 2");
    using K = DimensionFunction::Kind;
    if (f.kind() == K::PowerLaw) {
        return f.s() >= k ? Monotonicity::NonDecreasing : Monotonicity::NonIncreasing;
    }
    if (f.kind() == K::PowerLogLaw) {
        // d/dr [r^e L^q] has the sign of e*L - q, L = log(1/r) in [Lmin, inf)
        double e = f.s() - k, q = f.k();
        double lmin = log_inv(f.domain_max());
        if (e == 0.0) return q > 0.0 ? Monotonicity::NonIncreasing : Monotonicity::NonDecreasing;
        if (e > 0.0) return e * lmin - q >= 0.0 ? Monotonicity::NonDecreasing : Monotonicity::NotMonotone;
        return e * lmin - q <= 0.0 ? Monotonicity::NonIncreasing : Monotonicity::NotMonotone;
    }
    double lo = f.samples().front().first, hi = f.samples().back().first;
    bool up = true, down = true;
    double prev = 0.0;
    for (int i = 0; i < grid; ++i) {
        double r = lo * std::pow(hi / lo, double(i) / (grid - 1));
        if (i == grid - 1) r = hi;
        double v = f(r) * std::pow(r, -double(k));
        if (i > 0) {
            double tol = 1e-12 * std::max(std::abs(v), std::abs(prev));
            if (v > prev + tol) down = false;
            if (v < prev - tol) up = false;
        }
        prev = v;
    }
    if (up) return Monotonicity::NonDecreasing;
    if (down) return Monotonicity::NonIncreasing;
    return Monotonicity::NotMonotone;
}

Ball ball_transform(const Ball& b, const DimensionFunction& f, int m) {
    if (m < 1) throw std::invalid_argument("m must be positive");
    Ball out = b;
    if (f.is_power(double(m))) {
        // B^m = B, kept bitwise
        if (!(b.radius > 0.0) || b.radius > f.domain_max())
            throw DomainError("radius outside domain");
        return out;
    }
    double v = f(b.radius);
    out.radius = m == 1 ? v : std::pow(v, 1.0 / m);
    return out;
}

double invert(const DimensionFunction& f, double v) {
    if (!(v > 0.0)) throw DomainError("cannot invert at non-positive value");
    using K = DimensionFunction::Kind;
    if (f.kind() == K::PowerLaw) {
        double r = f.s() == 1.0 ? v : std::pow(v, 1.0 / f.s());
        if (r > 1.0) throw DomainError("inverse outside domain");
        return r;
    }
    double hi = f.domain_max();
    if (v > f(hi)) throw DomainError("value beyond range of f");
    if (f.kind() == K::Tabulated) {
        // strictness is required for a well-defined inverse
        for (std::size_t i = 1; i < f.samples().size(); ++i)
            if (!(f(f.samples()[i].first) > f(f.samples()[i - 1].first)))
                throw std::invalid_argument("table is not strictly increasing, no inverse");
    }
    // bisection in log r
    double a = std::log(hi) - 700.0, b = std::log(hi);
    if (f(std::exp(a)) > v) throw DomainError("value below representable range of f");
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (a + b);
        if (mid == a || mid == b) break;
        if (f(std::exp(mid)) < v) a = mid; else b = mid;
    }
    double ra = std::exp(a), rb = std::exp(b);
    return std::abs(f(ra) - v) < std::abs(f(rb) - v) ? ra : rb;
}

RatioLimit ratio_limit(const DimensionFunction& f, const DimensionFunction& g) {
    using K = DimensionFunction::Kind;
    if (f.kind() == K::Tabulated || g.kind() == K::Tabulated)
        throw std::invalid_argument("ratio limit only defined for law kinds");
    // f/g = r^{sf-sg} L^{kf-kg}
    if (f.s() > g.s()) return RatioLimit::Zero;
    if (f.s() < g.s()) return RatioLimit::Infinite;
    if (f.k() < g.k()) return RatioLimit::Zero;
    if (f.k() > g.k()) return RatioLimit::Infinite;
    return RatioLimit::Finite;
}

namespace {

double parse_number(const std::string& t, const std::string& whole) {
    double x = 0.0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), x);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw std::invalid_argument("bad number '" + t + "' in dimension function '" + whole + "'");
    return x;
}

std::string trim(std::string s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

DimensionFunction load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open table " + path);
    std::vector<std::pair<double, double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected r,f");
        std::string a = trim(line.substr(0, comma)), b = trim(line.substr(comma + 1));
        if (lineno == 1 && a == "r") continue;
        rows.emplace_back(parse_number(a, path), parse_number(b, path));
    }
    return DimensionFunction::tabulated(std::move(rows));
}

}  // namespace

DimensionFunction parse_dimfun(const std::string& text_in) {
    std::string text = trim(text_in);
    if (text.rfind("table:", 0) == 0) {
        auto f = load_table(text.substr(6));
        f.set_source(text);
        return f;
    }
    if (text.rfind("r^", 0) != 0)
        throw std::invalid_argument("dimension function must start with r^ or table: ('" + text + "')");
    auto star = text.find('*');
    double s = parse_number(trim(text.substr(2, star == std::string::npos ? std::string::npos : star - 2)), text);
    if (star == std::string::npos) return DimensionFunction::power(s);
    std::string rest = trim(text.substr(star + 1));
    if (rest.rfind("log^", 0) != 0)
        throw std::invalid_argument("expected log^k after '*' in '" + text + "'");
    double k = parse_number(trim(rest.substr(4)), text);
    return DimensionFunction::power_log(s, k);
}

std::string to_string(const DimensionFunction& f) {
    switch (f.kind()) {
        case DimensionFunction::Kind::PowerLaw:
            return "r^" + fmt_double(f.s());
        case DimensionFunction::Kind::PowerLogLaw:
            return "r^" + fmt_double(f.s()) + "*log^" + fmt_double(f.k());
        case DimensionFunction::Kind::Tabulated:
            if (f.shift() == 0.0 && !f.source().empty()) return f.source();
            return "table(" + std::to_string(f.samples().size()) + " rows, r^" + fmt_double(f.shift()) + ")";
    }
    return "?";
}

std::string to_string(Monotonicity m) {
    switch (m) {
        case Monotonicity::NonIncreasing: return "NonIncreasing";
        case Monotonicity::NonDecreasing: return "NonDecreasing";
        case Monotonicity::NotMonotone: return "NotMonotone";
    }
    return "?";
}

}  // namespace diolab
