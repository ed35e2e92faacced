#include "bkdv/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace bkdv {

namespace {

struct Entry {
    std::string value;
    int line = 0;
};

std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::map<std::string, Entry> read_entries(std::istream& in) {
    std::map<std::string, Entry> out;
    std::string text;
    int line = 0;
    while (std::getline(in, text)) {
        ++line;
        std::string s = trim(text);
        if (s.empty() || s[0] == '#') continue;
        auto colon = s.find(':');
        if (colon == std::string::npos) throw ParseError("expected 'key: value'", line, 1);
        std::string key = trim(std::string_view(s).substr(0, colon));
        std::string value = trim(std::string_view(s).substr(colon + 1));
        if (key.empty()) throw ParseError("empty key", line, 1);
        if (out.count(key)) throw ParseError("repeated key '" + key + "'", line, 1);
        out[key] = {value, line};
    }
    return out;
}

double parse_real(const Entry& e, const std::string& key) {
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    double v = 0;
    auto [p, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || p != end) throw ParseError("'" + key + "' expects a real number", e.line, 1);
    return v;
}

int parse_int(const Entry& e, const std::string& key) {
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    if (b != end && *b == '+') ++b;
    int v = 0;
    auto [p, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || p != end) throw ParseError("'" + key + "' expects an integer", e.line, 1);
    return v;
}

Expr parse_expr(const Entry& e) { return parse_expression(e.value, e.line); }

// "A[k]" -> k
std::optional<int> coefficient_index(const std::string& key) {
    if (key.size() < 4 || key.compare(0, 2, "A[") != 0 || key.back() != ']') return std::nullopt;
    int k = 0;
    auto [p, ec] = std::from_chars(key.data() + 2, key.data() + key.size() - 1, k);
    if (ec != std::errc() || p != key.data() + key.size() - 1) return std::nullopt;
    return k;
}

[[noreturn]] void unknown(const std::string& key, const Entry& e) {
    throw ParseError("unknown key '" + key + "'", e.line, 1);
}

bool is_one_everywhere(const Expr& e, const Box& box) {
    if (e.is_one()) return true;
    return sample_equiv(e, num(1), box, 64, 1e-12).equal;
}

bool is_zero_everywhere(const Expr& e, const Box& box) {
    if (e.is_zero()) return true;
    return sample_equiv(e, num(0), box, 64, 1e-12).equal;
}

void write_domain(std::ostream& out, const Box& box) {
    out << "domain:";
    for (const auto& iv : box.x) out << ' ' << format_real(iv.lo) << ' ' << format_real(iv.hi);
    out << '\n';
}

}  // namespace

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

EquationDoc read_equation(std::istream& in) {
    auto entries = read_entries(in);
    EquationDoc doc;
    auto ord = entries.find("order");
    if (ord == entries.end()) throw ParseError("missing 'order'", 1, 1);
    doc.order = parse_int(ord->second, "order");
    if (doc.order < 2) throw ParseError("order must be at least 2", ord->second.line, 1);
    doc.A.assign(doc.order + 1, num(0));
    bool has_b = false, has_ar = false;
    for (const auto& [key, e] : entries) {
        if (key == "order") continue;
        if (key == "A0") {
            doc.A[0] = parse_expr(e);
        } else if (key == "B") {
            doc.B = parse_expr(e);
            has_b = true;
        } else if (key == "C") {
            doc.C = parse_expr(e);
        } else if (key == "time_map") {
            doc.time_map = parse_expr(e);
        } else if (key == "domain") {
            std::istringstream ss(e.value);
            std::vector<double> v;
            std::string tok;
            while (ss >> tok) v.push_back(parse_real({tok, e.line}, key));
            if (v.empty() || v.size() % 2) throw ParseError("'domain' expects pairs 'lo hi'", e.line, 1);
            doc.domain.x.clear();
            for (std::size_t i = 0; i < v.size(); i += 2) {
                if (!(v[i] < v[i + 1])) throw ParseError("empty domain interval", e.line, 1);
                doc.domain.x.push_back({v[i], v[i + 1]});
            }
            doc.has_domain = true;
        } else if (auto k = coefficient_index(key)) {
            if (*k < 0 || *k > doc.order) throw ParseError("coefficient index out of range for the order", e.line, 1);
            if (*k == 1) {
                doc.A1 = parse_expr(e);
            } else {
                if (entries.count("A0") && *k == 0) throw ParseError("both 'A0' and 'A[0]' given", e.line, 1);
                doc.A[*k] = parse_expr(e);
                if (*k == doc.order) has_ar = true;
            }
        } else {
            unknown(key, e);
        }
    }
    if (!has_b) throw ParseError("missing 'B'", 1, 1);
    if (!has_ar || doc.A[doc.order].is_zero())
        throw ParseError("missing or zero leading coefficient A[" + std::to_string(doc.order) + "]", 1, 1);
    return doc;
}

EquationDoc read_equation_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open " + path, 0, 0);
    return read_equation(f);
}

ReducedEquation to_reduced(const EquationDoc& doc) {
    if (doc.time_map) throw DomainError("equation carries a time map; it is not time independent");
    if (doc.C && !is_one_everywhere(*doc.C, doc.domain))
        throw DomainError("C is not 1; gauge the equation first");
    if (doc.A1 && !is_zero_everywhere(*doc.A1, doc.domain))
        throw DomainError("A[1] is not 0; gauge the equation first");
    for (const auto& a : doc.A)
        if (a.depends_on(Var::t)) throw DomainError("coefficients depend on t");
    if (doc.B.depends_on(Var::t)) throw DomainError("coefficients depend on t");
    return ReducedEquation(doc.order, doc.A, doc.B, doc.domain);
}

TimeDependentReducedEquation to_time_dependent(const EquationDoc& doc) {
    if (doc.C && !is_one_everywhere(*doc.C, doc.domain)) throw DomainError("C is not 1");
    if (doc.A1 && !is_zero_everywhere(*doc.A1, doc.domain)) throw DomainError("A[1] is not 0");
    TimeDependentReducedEquation eq;
    eq.order = doc.order;
    eq.A = doc.A;
    eq.B = doc.B;
    eq.domain = doc.domain;
    eq.time_map = doc.time_map;
    return eq;
}

StationaryGeneralEquation to_stationary(const EquationDoc& doc) {
    if (doc.time_map) throw DomainError("stationary input cannot carry a time map");
    StationaryGeneralEquation eq;
    eq.order = doc.order;
    eq.A = doc.A;
    eq.A[1] = doc.A1 ? *doc.A1 : num(0);
    eq.B = doc.B;
    eq.C = doc.C ? *doc.C : num(1);
    eq.domain = doc.domain;
    for (const auto& a : eq.A)
        if (a.depends_on(Var::t)) throw DomainError("stationary coefficients depend on t");
    if (eq.B.depends_on(Var::t) || eq.C.depends_on(Var::t)) throw DomainError("stationary coefficients depend on t");
    return eq;
}

void write_equation(std::ostream& out, const ReducedEquation& eq) {
    out << "order: " << eq.order << '\n';
    for (int k = eq.order; k >= 2; --k) out << "A[" << k << "]: " << print(eq.A[k]) << '\n';
    out << "A0: " << print(eq.A[0]) << '\n';
    out << "B: " << print(eq.B) << '\n';
    write_domain(out, eq.domain);
}

void write_equation(std::ostream& out, const TimeDependentReducedEquation& eq) {
    out << "order: " << eq.order << '\n';
    for (int k = eq.order; k >= 2; --k) out << "A[" << k << "]: " << print(eq.A[k]) << '\n';
    out << "A0: " << print(eq.A[0]) << '\n';
    out << "B: " << print(eq.B) << '\n';
    if (eq.time_map) out << "time_map: " << print(*eq.time_map) << '\n';
    write_domain(out, eq.domain);
}

void write_equation(std::ostream& out, const StationaryGeneralEquation& eq) {
    out << "order: " << eq.order << '\n';
    out << "C: " << print(eq.C) << '\n';
    for (int k = eq.order; k >= 2; --k) out << "A[" << k << "]: " << print(eq.A[k]) << '\n';
    out << "A[1]: " << print(eq.A[1]) << '\n';
    out << "A0: " << print(eq.A[0]) << '\n';
    out << "B: " << print(eq.B) << '\n';
    write_domain(out, eq.domain);
}

FiberTransformation read_transform(std::istream& in) {
    FiberTransformation tr;
    for (const auto& [key, e] : read_entries(in)) {
        Expr v = parse_expr(e);
        if (v.depends_on(Var::x)) throw ParseError("'" + key + "' must depend on t only", e.line, 1);
        if (key == "T") tr.T = v;
        else if (key == "X1") tr.X1 = v;
        else if (key == "X0") tr.X0 = v;
        else unknown(key, e);
    }
    return tr;
}

void write_transform(std::ostream& out, const FiberTransformation& tr) {
    out << "T: " << print(tr.T) << '\n';
    out << "X1: " << print(tr.X1) << '\n';
    out << "X0: " << print(tr.X0) << '\n';
}

void write_gauge(std::ostream& out, const GaugeTransformation& g) {
    out << "c1: " << format_real(g.c1) << '\n';
    out << "c3: " << format_real(g.c3) << '\n';
    out << "X: " << print(g.X) << '\n';
    out << "U0: " << print(g.U0) << '\n';
    out << "Xinv: " << print(g.Xinv) << '\n';
}

bool looks_like_group_element(std::istream& in) {
    std::string text;
    bool found = false;
    while (std::getline(in, text)) {
        std::string s = trim(text);
        if (s.rfind("tag", 0) == 0 && trim(std::string_view(s).substr(3)).rfind(':', 0) == 0) {
            found = true;
            break;
        }
    }
    in.clear();
    in.seekg(0);
    return found;
}

GroupElement read_group_element(std::istream& in) {
    auto entries = read_entries(in);
    auto tag = entries.find("tag");
    if (tag == entries.end()) throw ParseError("missing 'tag'", 1, 1);
    GroupElement g;
    if (tag->second.value == "usual") {
        g.tag = Tag::F0;
    } else if (auto t = parse_tag(tag->second.value)) {
        g.tag = *t;
    } else {
        throw ParseError("unknown tag '" + tag->second.value + "'", tag->second.line, 1);
    }
    for (const auto& [key, e] : entries) {
        if (key == "tag") continue;
        if (key == "branch") {
            if (e.value != "effective" && e.value != "generalized")
                throw ParseError("branch must be 'effective' or 'generalized'", e.line, 1);
            g.branch = e.value;
        } else if (key.size() == 2 && key[0] == 'c' && key[1] >= '0' && key[1] <= '9') {
            g[key[1] - '0'] = parse_real(e, key);
        } else if (key == "epsilon") {
            int v = parse_int(e, key);
            if (v != 1 && v != -1) throw ParseError("epsilon must be 1 or -1", e.line, 1);
            g.epsilon = v;
        } else if (key == "P1") {
            auto s = parse_stage1(e.value);
            if (!s) throw ParseError("P1 must be auto, t, tan or exp", e.line, 1);
            g.p1 = *s;
        } else if (key == "P2") {
            auto s = parse_stage2(e.value);
            if (!s) throw ParseError("P2 must be id, log or atan", e.line, 1);
            g.p2 = *s;
        } else if (key == "s") {
            g.s = parse_real(e, key);
        } else {
            unknown(key, e);
        }
    }
    return g;
}

void write_group_element(std::ostream& out, const GroupElement& g) {
    out << "tag: " << (g.tag == Tag::F0 ? "usual" : tag_name(g.tag)) << '\n';
    out << "branch: " << g.branch << '\n';
    for (int i = 0; i < 10; ++i) out << 'c' << i << ": " << format_real(g[i]) << '\n';
    out << "epsilon: " << g.epsilon << '\n';
    out << "P1: " << stage1_name(g.p1) << '\n';
    out << "P2: " << stage2_name(g.p2) << '\n';
    out << "s: " << format_real(g.s) << '\n';
}

SubclassParams read_params(std::istream& in, Tag tag, int order) {
    SubclassParams p;
    p.tag = tag;
    p.order = order;
    p.a.assign(order + 1, 0.0);
    for (const auto& [key, e] : read_entries(in)) {
        if (key == "tag") {
            auto t = parse_tag(e.value);
            if (!t || *t != tag) throw ParseError("params file tag disagrees with --tag", e.line, 1);
            continue;
        }
        if (key == "order") {
            if (parse_int(e, key) != order) throw ParseError("params file order disagrees with --order", e.line, 1);
            continue;
        }
        double v = parse_real(e, key);
        if (key == "beta") p.beta = v;
        else if (key == "alpha") p.alpha = v;
        else if (key == "a01") p.a01 = v;
        else if (key == "a00") p.a00 = v;
        else if (key == "b0") p.b0 = v;
        else if (key == "b1") p.b1 = v;
        else if (key == "b2") p.b2 = v;
        else if (auto k = key.size() > 3 && key.compare(0, 2, "a[") == 0 ? coefficient_index("A" + key.substr(1))
                                                                         : std::nullopt) {
            if (*k < 2 || *k > order) throw ParseError("'" + key + "' out of range for the order", e.line, 1);
            p.a[*k] = v;
        } else {
            unknown(key, e);
        }
    }
    return p;
}

void write_params(std::ostream& out, const SubclassParams& p) {
    out << "tag: " << tag_name(p.tag) << '\n';
    out << "order: " << p.order << '\n';
    out << "beta: " << format_real(p.beta) << '\n';
    out << "alpha: " << format_real(p.alpha) << '\n';
    for (int j = p.order; j >= 2; --j) out << "a[" << j << "]: " << format_real(p.aj(j)) << '\n';
    out << "a01: " << format_real(p.a01) << '\n';
    out << "a00: " << format_real(p.a00) << '\n';
    out << "b0: " << format_real(p.b0) << '\n';
    out << "b1: " << format_real(p.b1) << '\n';
    out << "b2: " << format_real(p.b2) << '\n';
}

}  // namespace bkdv
