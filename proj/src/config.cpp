#include "diolab/config.hpp"

#define TOML_HEADER_ONLY 1
#include "toml.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace diolab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json node_to_json(const toml::node& n) {
    if (auto t = n.as_table()) {
        json o = json::object();
        for (auto&& [k, v] : *t) o[std::string(k.str())] = node_to_json(v);
        return o;
    }
    if (auto a = n.as_array()) {
        json arr = json::array();
        for (auto&& v : *a) arr.push_back(node_to_json(v));
        return arr;
    }
    if (auto v = n.as_integer()) return json(std::int64_t(v->get()));
    if (auto v = n.as_floating_point()) return json(v->get());
    if (auto v = n.as_boolean()) return json(v->get());
    if (auto v = n.as_string()) return json(v->get());
    throw ConfigError("unsupported TOML value type (dates are not allowed)");
}

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
    throw ConfigError("field '" + field + "': " + what);
}

std::int64_t get_int(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) field_error(path + key, "missing");
    const json& v = j.at(key);
    if (!v.is_number_integer()) field_error(path + key, "expected an integer");
    return v.get<std::int64_t>();
}

double get_number(const json& v, const std::string& field) {
    if (!v.is_number()) field_error(field, "expected a number");
    return v.get<double>();
}

std::string resolve(const std::string& path, const std::string& base_dir) {
    fs::path p(path);
    if (p.is_relative()) p = fs::path(base_dir) / p;
    return p.lexically_normal().string();
}

Support parse_support(const json& s, int n) {
    Support sup;
    auto add_zi = [&](const json& arr) {
        if (!arr.is_array()) field_error("psi.support.zi", "expected an array of indices");
        for (const auto& v : arr) {
            if (!v.is_number_integer()) field_error("psi.support.zi", "expected integers");
            int i = v.get<int>();
            if (i < 1 || i > n) field_error("psi.support.zi", "index " + std::to_string(i) + " outside 1.." + std::to_string(n));
            sup.zi.insert(i);
        }
    };
    if (s.is_string()) {
        std::string t = s.get<std::string>();
        if (t == "all" || t.empty()) return sup;
        if ((t[0] == 'Z' || t[0] == 'z') && t.size() > 1) {
            std::string d = t.substr(t[1] == '_' ? 2 : 1);
            try {
                std::size_t used = 0;
                int i = std::stoi(d, &used);
                if (used == d.size()) {
                    add_zi(json::array({i}));
                    return sup;
                }
            } catch (const std::exception&) {
            }
        }
        sup.custom = t;
    } else if (s.is_array()) {
        add_zi(s);
    } else if (s.is_object()) {
        if (s.contains("zi")) add_zi(s.at("zi"));
        if (s.contains("custom")) {
            if (!s.at("custom").is_string()) field_error("psi.support.custom", "expected a string");
            sup.custom = s.at("custom").get<std::string>();
        }
    } else {
        field_error("psi.support", "expected a string, an index array or a table");
    }
    if (sup.custom) {
        try {
            custom_support(*sup.custom, IVec(n, 1));
        } catch (const std::invalid_argument& e) {
            field_error("psi.support", e.what());
        }
    }
    return sup;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        auto a = cell.find_first_not_of(" \t\r");
        auto b = cell.find_last_not_of(" \t\r");
        out.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
    }
    return out;
}

// rows of numeric cells; a first row that fails to parse is taken as a header
template <class RowFn>
void read_numeric_csv(const std::string& path, std::size_t columns, RowFn&& fn) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open table '" + path + "'");
    std::string line;
    int lineno = 0;
    bool seen_data = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
        auto cells = split_csv_line(line);
        auto where = [&] { return path + ":" + std::to_string(lineno); };
        if (cells.size() != columns) {
            if (!seen_data) {
                seen_data = true;
                try {
                    (void)std::stod(cells.at(0));
                } catch (const std::exception&) {
                    continue;
                }
            }
            throw ConfigError(where() + ": expected " + std::to_string(columns) + " columns, got " +
                              std::to_string(cells.size()));
        }
        std::vector<double> vals;
        std::vector<std::int64_t> ints;
        try {
            for (std::size_t c = 0; c + 1 < columns; ++c) {
                std::size_t used = 0;
                ints.push_back(std::stoll(cells[c], &used));
                if (used != cells[c].size()) throw std::invalid_argument("not an integer");
            }
            std::size_t used = 0;
            double v = std::stod(cells.back(), &used);
            if (used != cells.back().size()) throw std::invalid_argument("not a number");
            vals.push_back(v);
        } catch (const std::exception&) {
            if (!seen_data) {
                seen_data = true;
                continue;
            }
            throw ConfigError(where() + ": malformed row '" + line + "'");
        }
        seen_data = true;
        fn(ints, vals[0], where());
    }
}

}  // namespace

json toml_to_json(const std::string& text) {
    try {
        toml::table t = toml::parse(text);
        return node_to_json(t);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "TOML parse error at line " << e.source().begin.line << ", column " << e.source().begin.column << ": "
           << e.description();
        throw ConfigError(os.str());
    }
}

std::map<IVec, double> load_psi_table(const std::string& path, int n) {
    std::map<IVec, double> table;
    read_numeric_csv(path, std::size_t(n) + 1, [&](const std::vector<std::int64_t>& a, double v, const std::string& where) {
        if (!table.emplace(a, v).second) throw ConfigError(where + ": duplicate vector " + to_string(a));
    });
    return table;
}

std::map<std::int64_t, double> load_squares_table(const std::string& path) {
    std::map<std::int64_t, double> table;
    read_numeric_csv(path, 2, [&](const std::vector<std::int64_t>& h, double v, const std::string& where) {
        if (h[0] < 1) throw ConfigError(where + ": heights start at 1");
        if (!table.emplace(h[0], v).second) throw ConfigError(where + ": duplicate height");
    });
    return table;
}

AnyProblem problem_from_json(const json& j, const std::string& base_dir) {
    if (!j.is_object()) throw ConfigError("problem spec must be a table/object");
    const json& root = j.contains("problem") && j.at("problem").is_object() ? j.at("problem") : j;
    std::string kind = "linear_forms";
    if (root.contains("kind")) {
        if (!root.at("kind").is_string()) field_error("kind", "expected a string");
        kind = root.at("kind").get<std::string>();
    }
    if (!root.contains("psi") || !root.at("psi").is_object()) field_error("psi", "missing table");
    const json& psi = root.at("psi");
    std::string law = "power";
    if (psi.contains("law")) {
        if (!psi.at("law").is_string()) field_error("psi.law", "expected a string");
        law = psi.at("law").get<std::string>();
    }
    if (law != "power" && law != "table") field_error("psi.law", "expected \"power\" or \"table\", got \"" + law + "\"");
    auto table_path = [&]() {
        if (!psi.contains("table_path") || !psi.at("table_path").is_string())
            field_error("psi.table_path", "required for law = \"table\"");
        return resolve(psi.at("table_path").get<std::string>(), base_dir);
    };
    auto tau = [&]() {
        if (!psi.contains("tau")) field_error("psi.tau", "required for law = \"power\"");
        double t = get_number(psi.at("tau"), "psi.tau");
        if (!(t > 0.0)) field_error("psi.tau", "must be positive");
        return t;
    };

    if (kind == "squares") {
        SquaresProblem sp;
        if (law == "power") {
            sp.law = PsiSpec::Law::Power;
            sp.tau = tau();
        } else {
            sp.law = PsiSpec::Law::Table;
            sp.table = load_squares_table(table_path());
        }
        try {
            sp.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("invalid squares problem: ") + e.what());
        }
        return sp;
    }
    if (kind != "linear_forms") field_error("kind", "expected \"linear_forms\" or \"squares\", got \"" + kind + "\"");

    LinearFormsProblem p;
    std::int64_t n = get_int(root, "n", ""), m = get_int(root, "m", "");
    if (n < 1 || n > 16) field_error("n", "must lie in 1..16");
    if (m < 1 || m > 16) field_error("m", "must lie in 1..16");
    p.n = int(n);
    p.m = int(m);
    p.b.assign(p.m, 0.0);
    if (root.contains("b")) {
        const json& b = root.at("b");
        if (!b.is_array() || b.size() != std::size_t(p.m))
            field_error("b", "expected an array of " + std::to_string(p.m) + " numbers");
        for (int j2 = 0; j2 < p.m; ++j2) p.b[j2] = get_number(b.at(j2), "b[" + std::to_string(j2) + "]");
    }
    if (law == "power") {
        p.psi.law = PsiSpec::Law::Power;
        p.psi.tau = tau();
    } else {
        p.psi.law = PsiSpec::Law::Table;
        p.psi.table_path = table_path();
        p.psi.table = load_psi_table(p.psi.table_path, p.n);
    }
    if (psi.contains("support")) p.psi.support = parse_support(psi.at("support"), p.n);
    try {
        p.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid problem: ") + e.what());
    }
    return p;
}

AnyProblem parse_problem_toml(const std::string& text, const std::string& base_dir) {
    return problem_from_json(toml_to_json(text), base_dir);
}

AnyProblem parse_problem_json(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("JSON parse error: ") + e.what());
    }
    return problem_from_json(j, base_dir);
}

AnyProblem load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open problem file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string base = fs::path(path).parent_path().string();
    const std::string ext = fs::path(path).extension().string();
    try {
        if (ext == ".json") return parse_problem_json(ss.str(), base.empty() ? "." : base);
        return parse_problem_toml(ss.str(), base.empty() ? "." : base);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

json problem_to_json(const AnyProblem& any) {
    json j;
    if (const auto* sp = std::get_if<SquaresProblem>(&any)) {
        j["kind"] = "squares";
        if (sp->law == PsiSpec::Law::Power) {
            j["psi"] = {{"law", "power"}, {"tau", sp->tau}};
        } else {
            json rows = json::array();
            for (auto& [h, v] : sp->table) rows.push_back({h, v});
            j["psi"] = {{"law", "table"}, {"table", rows}};
        }
        return j;
    }
    const auto& p = std::get<LinearFormsProblem>(any);
    j["kind"] = "linear_forms";
    j["n"] = p.n;
    j["m"] = p.m;
    j["b"] = p.b;
    json psi;
    if (p.psi.law == PsiSpec::Law::Power) {
        psi["law"] = "power";
        psi["tau"] = p.psi.tau;
    } else {
        psi["law"] = "table";
        json rows = json::array();
        for (auto& [a, v] : p.psi.table) {
            json row = a;
            row.push_back(v);
            rows.push_back(row);
        }
        psi["table"] = rows;
    }
    json sup = json::object();
    sup["zi"] = std::vector<int>(p.psi.support.zi.begin(), p.psi.support.zi.end());
    if (p.psi.support.custom) sup["custom"] = *p.psi.support.custom;
    psi["support"] = sup;
    j["psi"] = psi;
    return j;
}

std::string config_hash(const json& resolved) {
    const std::string s = resolved.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<int> parse_int_range(const std::string& text) {
    auto dots = text.find("..");
    if (dots == std::string::npos) throw ConfigError("expected a range a..b, got '" + text + "'");
    int a = 0, b = 0;
    try {
        std::size_t u1 = 0, u2 = 0;
        std::string sa = text.substr(0, dots), sb = text.substr(dots + 2);
        a = std::stoi(sa, &u1);
        b = std::stoi(sb, &u2);
        if (u1 != sa.size() || u2 != sb.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw ConfigError("expected a range a..b, got '" + text + "'");
    }
    if (a > b) throw ConfigError("empty range '" + text + "'");
    std::vector<int> out;
    for (int k = a; k <= b; ++k) out.push_back(k);
    return out;
}

std::vector<Window> parse_windows(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("expected dyadic:a..b or cumulative:a..b, got '" + text + "'");
    const std::string kind = text.substr(0, colon);
    auto r = parse_int_range(text.substr(colon + 1));
    if (r.front() < 0 || r.back() > 40) throw ConfigError("window exponents must lie in 0..40");
    if (kind == "dyadic") return dyadic_windows(r.front(), r.back());
    if (kind == "cumulative") return cumulative_windows(r.front(), r.back());
    throw ConfigError("unknown window schedule '" + kind + "'");
}

std::string csv_header(const Provenance& p) {
    return "# diolab " + p.version + " config=" + p.config_hash + " seed=" + std::to_string(p.seed) + "\n";
}

void write_atomic(const std::string& path, const std::string& content) {
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw ConfigError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw ConfigError("cannot rename onto '" + path + "': " + ec.message());
    }
}

}  // namespace diolab
