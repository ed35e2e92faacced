// bkdv: command-line front end for the reduced Burgers-KdV equivalence toolkit.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bkdv/classify.hpp"
#include "bkdv/io.hpp"
#include "bkdv/verify.hpp"

using namespace bkdv;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kFailed = 1, kParse = 2, kDomain = 3 };

// ParseError raised while reading a named file; rethrown with the file name for the diagnostic.
struct FileError : std::runtime_error {
    std::string file;
    FileError(std::string f, const std::string& what) : std::runtime_error(what), file(std::move(f)) {}
};

template <class F>
auto with_file(const std::string& path, F&& read) {
    std::ifstream in(path);
    if (!in) throw FileError(path, "cannot open file");
    try {
        return read(in);
    } catch (const ParseError& e) {
        throw FileError(path, e.what());
    }
}

struct Globals {
    std::uint64_t seed = 0;
    std::vector<double> domain;
    int max_order = 8;
};

EquationDoc load_equation(const std::string& path, const Globals& g) {
    EquationDoc doc = with_file(path, [](std::istream& in) { return read_equation(in); });
    if (!g.domain.empty()) {
        doc.domain.x = {{g.domain[0], g.domain[1]}};
        doc.has_domain = true;
    }
    return doc;
}

// Output goes to the named file, or stdout for "-" / empty.
template <class F>
void emit(const std::string& path, F&& write) {
    if (path.empty() || path == "-") {
        write(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write " + path);
    write(out);
}

struct MapInput {
    FiberTransformation tr;
    std::optional<GroupElement> element;
    std::optional<SubclassParams> theta;
};

// A --map file is a transform (T, X1, X0) or a group element realized against the classified source.
MapInput load_map(const std::string& path, const ReducedEquation& src) {
    MapInput m;
    bool element = with_file(path, [](std::istream& in) { return looks_like_group_element(in); });
    if (!element) {
        m.tr = with_file(path, [](std::istream& in) { return read_transform(in); });
        return m;
    }
    GroupElement g = with_file(path, [](std::istream& in) { return read_group_element(in); });
    SubclassParams theta;
    if (g.tag != Tag::F0) {
        Classification c = detect_subclass(src);
        if (c.tag != g.tag || !c.params)
            throw DomainError(std::string("group element of ") + tag_name(g.tag) + " applied to an equation classified as " +
                              tag_name(c.tag));
        theta = *c.params;
    }
    m.tr = realize(g, theta);
    m.element = g;
    m.theta = theta;
    return m;
}

json params_json(const SubclassParams& p) {
    std::vector<double> a;
    for (int j = 2; j <= p.order; ++j) a.push_back(p.aj(j));
    return {{"beta", p.beta}, {"alpha", p.alpha}, {"a", a},   {"a01", p.a01}, {"a00", p.a00},
            {"b0", p.b0},     {"b1", p.b1},       {"b2", p.b2}};
}

void print_params(std::ostream& os, const SubclassParams& p) {
    os << "beta: " << format_real(p.beta) << '\n' << "alpha: " << format_real(p.alpha) << '\n';
    for (int j = p.order; j >= 2; --j) os << "a[" << j << "]: " << format_real(p.aj(j)) << '\n';
    os << "a01: " << format_real(p.a01) << '\n'
       << "a00: " << format_real(p.a00) << '\n'
       << "b0: " << format_real(p.b0) << '\n'
       << "b1: " << format_real(p.b1) << '\n'
       << "b2: " << format_real(p.b2) << '\n';
}

int run_classify(const std::string& input, double tol, bool as_json, const Globals& g) {
    ReducedEquation eq = to_reduced(load_equation(input, g));
    Classification c = detect_subclass(eq, tol);
    std::vector<std::string> attempts;
    for (const auto& a : c.attempts) {
        std::string s = std::string(tag_name(a.tag)) + (a.accepted ? " accepted" : " rejected");
        if (!a.reason.empty()) s += " (" + a.reason + ")";
        attempts.push_back(s);
    }
    if (as_json) {
        json j;
        j["tag"] = tag_name(c.tag);
        j["order"] = eq.order;
        if (c.params) j["params"] = params_json(*c.params);
        j["overlap"] = c.overlap;
        j["attempts"] = attempts;
        std::cout << j.dump(2) << '\n';
        return kOk;
    }
    std::cout << "tag: " << tag_name(c.tag) << '\n' << "order: " << eq.order << '\n';
    if (c.params) print_params(std::cout, *c.params);
    if (!c.overlap.empty()) std::cout << "overlap: " << c.overlap << '\n';
    for (const auto& s : attempts) std::cout << "attempt: " << s << '\n';
    return kOk;
}

int run_gauge(const std::string& input, const std::string& out, const std::string& map, const Globals& g) {
    StationaryGeneralEquation eq = to_stationary(load_equation(input, g));
    auto [reduced, gauge] = gauge_stationary(eq, g.max_order);
    emit(out, [&](std::ostream& os) { write_equation(os, reduced); });
    if (!map.empty()) emit(map, [&](std::ostream& os) { write_gauge(os, gauge); });
    CheckReport rep = gauge_covariance_check(eq, gauge, default_manufactured(), 200, 1e-8, g.seed);
    std::cerr << "gauge covariance: " << (rep.pass ? "pass" : "FAIL") << " max deviation "
              << format_real(rep.value) << '\n';
    return rep.pass ? kOk : kFailed;
}

void write_target(std::ostream& os, const ReducedEquation& src, const FiberTransformation& tr) {
    TimeDependentReducedEquation tgt = apply_reduced(src, tr);
    tgt.domain = image_box(src.domain, tr);
    if (auto frozen = as_time_independent(tgt)) {
        write_equation(os, *frozen);
        return;
    }
    if (auto target_time = to_target_time(tgt)) {
        write_equation(os, *target_time);
        return;
    }
    write_equation(os, tgt);
}

int run_transform(const std::string& input, const std::string& map, const std::string& out, const Globals& g) {
    ReducedEquation src = to_reduced(load_equation(input, g));
    MapInput m = load_map(map, src);
    emit(out, [&](std::ostream& os) { write_target(os, src, m.tr); });
    return kOk;
}

int run_verify(const std::string& src_path, const std::string& map, const std::string& tgt_path, std::size_t samples,
               double tol, const std::string& manufactured, const Globals& g) {
    ReducedEquation src = to_reduced(load_equation(src_path, g));
    MapInput m = load_map(map, src);
    Expr u = manufactured.empty() ? default_manufactured() : parse_expression(manufactured);

    std::cout << "T: " << print(m.tr.T) << '\n' << "X1: " << print(m.tr.X1) << '\n' << "X0: " << print(m.tr.X0) << '\n';
    std::cout << "factor: " << print(m.tr.X1 / pow(differentiate(m.tr.T, Var::t), num(2))) << '\n';

    bool ok = true;
    CheckReport cov = residual_covariance_check(src, m.tr, u, samples, tol, g.seed);
    std::cout << "covariance: " << (cov.pass ? "pass" : "fail") << " max_deviation " << format_real(cov.value) << '\n';
    ok = ok && cov.pass;
    if (!tgt_path.empty()) {
        ReducedEquation tgt = to_reduced(load_equation(tgt_path, g));
        TimeDependentReducedEquation got = apply_reduced(src, m.tr);
        CheckReport cmp = compare_equations(got, tgt, samples, tol, g.seed);
        std::cout << "target: " << (cmp.pass ? "pass" : "fail") << " max_deviation " << format_real(cmp.value);
        if (!cmp.detail.empty()) std::cout << " (" << cmp.detail << ')';
        std::cout << '\n';
        ok = ok && cmp.pass;
    }
    if (m.element && m.element->tag != Tag::F0) {
        CheckReport cls = classifying_check(*m.element, *m.theta, samples, std::max(tol, 1e-9));
        std::cout << "classifying: " << (cls.pass ? "pass" : "fail") << " max_deviation " << format_real(cls.value)
                  << '\n';
        ok = ok && cls.pass;
    }
    std::cout << "verified: " << (ok ? "yes" : "no") << '\n';
    return ok ? kOk : kFailed;
}

int run_normal_form(const std::string& tag_text, const std::string& params, int order, const std::string& out) {
    auto tag = parse_tag(tag_text);
    if (!tag || *tag == Tag::F0) throw ParseError("unknown subclass tag '" + tag_text + "'", 0, 0);
    SubclassParams p = with_file(params, [&](std::istream& in) { return read_params(in, *tag, order); });
    p = complete(p);
    GateReport gates = gate_check(p);
    if (!gates.ok) throw GateError(gates);
    ReducedEquation eq = instantiate_normal_form(p, order);
    emit(out, [&](std::ostream& os) { write_equation(os, eq); });
    return kOk;
}

int run_audit(const std::string& tag_text, int trials, const Globals& g) {
    std::optional<Tag> only;
    if (!tag_text.empty()) {
        only = parse_tag(tag_text);
        if (!only) throw ParseError("unknown tag '" + tag_text + "'", 0, 0);
    }
    AuditDocument doc = audit_paper(g.seed, trials, only);
    std::cout << doc.summary_table();
    for (const auto& r : doc.records) {
        bool report = r.check.rfind("discrepancy", 0) == 0 || r.check.rfind("note", 0) == 0;
        if (!report && r.pass) continue;
        std::cout << (r.pass ? "" : "FAIL ") << r.tag << ' ' << r.check;
        if (!r.branch.empty()) std::cout << " [" << r.branch << ']';
        std::cout << " value " << format_real(r.value);
        if (!r.detail.empty()) std::cout << ": " << r.detail;
        std::cout << '\n';
    }
    std::cout << "audit: " << (doc.all_passed() ? "pass" : "fail") << '\n';
    return doc.all_passed() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equivalence toolkit for reduced Burgers-KdV equations with space-dependent coefficients"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "seed of the quasi-random samplers")->capture_default_str();
    app.add_option("--domain", g.domain, "x-domain override: lo hi")->expected(2);
    app.add_option("--max-order", g.max_order, "order cap for gauging")->capture_default_str();

    std::string input, out, map, tgt, manufactured, tag, params, emit_map;
    double tol = 1e-8;
    bool as_json = false;
    std::size_t samples = 200;
    int order = 2, trials = 10;

    auto* classify = app.add_subcommand("classify", "detect the normalized subclass of an equation");
    classify->add_option("--input", input)->required();
    classify->add_option("--tol", tol)->capture_default_str();
    classify->add_flag("--json", as_json);

    auto* gauge = app.add_subcommand("gauge", "gauge a stationary equation to C = 1, A[1] = 0");
    gauge->add_option("--input", input)->required();
    gauge->add_option("--out", out);
    gauge->add_option("--emit-map", emit_map);

    auto* transform = app.add_subcommand("transform", "apply a transformation or group element");
    transform->add_option("--input", input)->required();
    transform->add_option("--map", map)->required();
    transform->add_option("--out", out);

    auto* verify = app.add_subcommand("verify", "check residual covariance of a map");
    verify->add_option("--src", input)->required();
    verify->add_option("--map", map)->required();
    verify->add_option("--tgt", tgt);
    verify->add_option("--samples", samples)->capture_default_str();
    verify->add_option("--tol", tol)->capture_default_str();
    verify->add_option("--manufactured", manufactured);

    auto* normal = app.add_subcommand("normal-form", "instantiate a subclass normal form");
    normal->add_option("--tag", tag)->required();
    normal->add_option("--params", params)->required();
    normal->add_option("--order", order)->capture_default_str();
    normal->add_option("--out", out);

    auto* audit = app.add_subcommand("audit", "run the consistency audit");
    audit->add_option("--tag", tag);
    audit->add_option("--trials", trials)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kParse;
    }
    set_default_seed(g.seed);

    try {
        if (*classify) return run_classify(input, tol, as_json, g);
        if (*gauge) return run_gauge(input, out, emit_map, g);
        if (*transform) return run_transform(input, map, out, g);
        if (*verify) return run_verify(input, map, tgt, samples, tol, manufactured, g);
        if (*normal) return run_normal_form(tag, params, order, out);
        if (*audit) return run_audit(tag, trials, g);
    } catch (const FileError& e) {
        std::cerr << e.file << ": error: " << e.what() << '\n';
        return kParse;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kParse;
    } catch (const GateError& e) {
        std::cerr << "error: gate violated:";
        for (const auto& v : e.report.violated) std::cerr << ' ' << v;
        std::cerr << '\n';
        return kDomain;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDomain;
    }
    return kParse;
}
