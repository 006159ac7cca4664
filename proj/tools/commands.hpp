#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace diolab::cli {

enum ExitCode { kOk = 0, kError = 1, kInconclusive = 2 };

struct Common {
    std::string problem;
    std::string out;      // empty: stdout
    std::string format;   // csv | json, empty: from the --out extension
    std::string manifest; // RunManifest path, empty: stderr
    int threads = 0;
    std::uint64_t seed = 0;
};

struct SumOptions {
    std::string criterion = "schmidt";  // schmidt | hausdorff | squares | cor1
    std::string f = "r^1";
    double s = 1.0;
    std::int64_t H = 4096;
};

struct ExponentOptions {
    std::string mode = "analytic";  // analytic | numeric
    double tol = 0.02;
    std::int64_t H = 16384;
    double s_lo = 0.0, s_hi = 0.0;  // 0: default bracket
};

struct MeasureOptions {
    std::string windows = "dyadic:1..10";
    std::int64_t samples = 100000;
};

struct BoxdimOptions {
    int generations = 3;
    std::string scales = "6..12";
    std::string windows;  // default schedule by problem kind
    int base_level = 13;
};

struct SliceOptions {
    std::string f = "r^1.75";
    int slices = 8;
    std::string windows = "dyadic:1..10";
    std::int64_t samples = 20000;
    int tail = 4;
};

struct EnumerateOptions {
    std::string x;
    std::int64_t H1 = 1, H2 = 100;
};

struct CheckOptions {
    std::string preset;
    int points = 1000;
    std::int64_t H = 50;
};

// `given` lists option names set on the command line; the rest may come
// from a [run] table in the problem file.
int run_sum(const Common& c, SumOptions o, const std::vector<std::string>& given);
int run_exponent(const Common& c, ExponentOptions o, const std::vector<std::string>& given);
int run_measure(const Common& c, MeasureOptions o, const std::vector<std::string>& given);
int run_boxdim(const Common& c, BoxdimOptions o, const std::vector<std::string>& given);
int run_slice(const Common& c, SliceOptions o, const std::vector<std::string>& given);
int run_enumerate(const Common& c, EnumerateOptions o, const std::vector<std::string>& given);
int run_check(const Common& c, const CheckOptions& o);

std::vector<std::string> check_presets();

}  // namespace diolab::cli
