#pragma once

#include "diolab/estimators.hpp"
#include "diolab/problems.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace diolab {

// Parse and validation failures; the message names the line or field.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Problem spec schema (TOML or JSON):
//   kind  = "linear_forms" (default) | "squares"
//   n, m  = integers (linear forms)
//   b     = [b_1, ..., b_m], zero vector when omitted
//   psi   = { law = "power", tau = 3.0 } | { law = "table", table_path = "psi.csv" }
//   psi.support = "all" | "Z1" | [1, 2] | { zi = [1], custom = "primitive" }
// Relative table paths resolve against base_dir.
AnyProblem problem_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
AnyProblem parse_problem_toml(const std::string& text, const std::string& base_dir = ".");
AnyProblem parse_problem_json(const std::string& text, const std::string& base_dir = ".");
// by extension: .toml or .json
AnyProblem load_problem(const std::string& path);

// TOML document as JSON (integers stay integers)
nlohmann::json toml_to_json(const std::string& text);

// CSV: n integer columns then the value; '#' lines and a non-numeric header are skipped
std::map<IVec, double> load_psi_table(const std::string& path, int n);
std::map<std::int64_t, double> load_squares_table(const std::string& path);

// resolved problem, table entries inlined, so the hash sees the data rather than the path
nlohmann::json problem_to_json(const AnyProblem& p);

// FNV-1a 64 of the compact dump, as 16 hex digits
std::string config_hash(const nlohmann::json& resolved);

// "dyadic:a..b" or "cumulative:a..b"
std::vector<Window> parse_windows(const std::string& text);
// "a..b" -> {a, ..., b}
std::vector<int> parse_int_range(const std::string& text);

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version;
};

// "# diolab <version> config=<hash> seed=<seed>" lines for CSV outputs
std::string csv_header(const Provenance& p);

// write to a sibling temp file, then rename over path
void write_atomic(const std::string& path, const std::string& content);

}  // namespace diolab
