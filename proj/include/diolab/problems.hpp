#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace diolab {

using IVec = std::vector<std::int64_t>;

std::int64_t sup_norm(const IVec& a);

// number of integer n-vectors with |a| = h
std::int64_t shell_size(int n, std::int64_t h);

// Visits every a in Z^n with |a| = h in lexicographic order.
template <class Fn>
void for_each_in_shell(int n, std::int64_t h, Fn&& fn) {
    IVec a(n, 0);
    if (h == 0) {
        fn(static_cast<const IVec&>(a));
        return;
    }
    auto rec = [&](auto&& self, int i, bool hit) -> void {
        if (i == n - 1) {
            if (hit) {
                for (std::int64_t v = -h; v <= h; ++v) {
                    a[i] = v;
                    fn(static_cast<const IVec&>(a));
                }
            } else {
                a[i] = -h;
                fn(static_cast<const IVec&>(a));
                a[i] = h;
                fn(static_cast<const IVec&>(a));
            }
            return;
        }
        for (std::int64_t v = -h; v <= h; ++v) {
            a[i] = v;
            self(self, i + 1, hit || v == -h || v == h);
        }
    };
    rec(rec, 0, false);
}

struct Support {
    std::set<int> zi;           // 1-based indices; empty means no Z_i restriction
    std::optional<std::string> custom;

    bool contains(const IVec& a) const;
    bool is_all() const { return zi.empty() && !custom; }
    bool operator==(const Support&) const = default;
};

// fixed registry of named support predicates
bool custom_support(const std::string& id, const IVec& a);
std::vector<std::string> custom_support_ids();

struct PsiSpec {
    enum class Law { Power, Table };
    Law law = Law::Power;
    double tau = 1.0;
    std::map<IVec, double> table;
    std::string table_path;
    Support support;

    // value before applying the support predicate
    double raw(const IVec& a) const;
    // depends on a only through |a| on its support
    bool radial() const { return law == Law::Power; }
    bool identically_zero() const;
};

struct LinearFormsProblem {
    int n = 1;
    int m = 1;
    std::vector<double> b;  // size m
    PsiSpec psi;

    bool in_theorem() const { return n + m > 2; }
    void validate() const;
};

struct SquaresProblem {
    PsiSpec::Law law = PsiSpec::Law::Power;
    double tau = 1.0;
    std::map<std::int64_t, double> table;

    double psi(std::int64_t h) const;
    bool identically_zero() const;
    void validate() const;  // monotonicity of the table
};

double psi_value(const LinearFormsProblem& p, const IVec& a);

// (i, sum over Z_i with |a| <= H of Psi(a)^m), i = 1..n
std::vector<std::pair<int, double>> zi_decompose(const LinearFormsProblem& p, std::int64_t H);

LinearFormsProblem restrict_to_zi(const LinearFormsProblem& p, int i);

// integer power x^m by repeated multiplication, shared by every criterion sum
inline double ipow(double x, int m) {
    double r = 1.0;
    for (int k = 0; k < m; ++k) r *= x;
    return r;
}

std::string to_string(const IVec& a);

}  // namespace diolab
