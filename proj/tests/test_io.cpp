#include <doctest.h>

#include <random>
#include <sstream>

#include "bkdv/io.hpp"
#include "bkdv/verify.hpp"

using namespace bkdv;

namespace {

EquationDoc doc(const std::string& text) {
    std::istringstream in(text);
    return read_equation(in);
}

int error_line(const std::string& text) {
    try {
        doc(text);
    } catch (const ParseError& e) {
        return e.line;
    }
    return -1;
}

}  // namespace

TEST_CASE("equation files") {
    EquationDoc d = doc("# Burgers with a source\norder: 3\nA[3]: x^2\nA[2]: 1\nA0: sin(x)\nB: x\ndomain: 0.5 1.5\n");
    CHECK(d.order == 3);
    CHECK(d.has_domain);
    CHECK(d.domain.x.size() == 1);
    CHECK(d.domain.x[0].lo == 0.5);
    ReducedEquation eq = to_reduced(d);
    CHECK(sample_equiv(eq.A[3], pow(x_(), num(2)), eq.domain, 20, 0).equal);
    CHECK(eq.A[1].is_zero());
}

TEST_CASE("equation file errors carry line numbers") {
    CHECK(error_line("order: 2\nA[2]: 1\nFOO: 1\nB: 0\n") == 3);
    CHECK(error_line("order: 2\nA[2]: 1\nB: 0\nB: 1\n") == 4);
    CHECK(error_line("order: 2\nA[2]: 1 +\nB: 0\n") == 2);
    CHECK(error_line("order: 2\nA[5]: 1\nB: 0\n") == 2);
    CHECK(error_line("order: two\nA[2]: 1\nB: 0\n") == 1);
    CHECK(error_line("order: 2\nA[2]: 1\nB 0\n") == 3);
    CHECK(error_line("order: 2\nA[2]: 1\nB: 0\ndomain: 2 1\n") == 4);
    CHECK_THROWS_AS(doc("order: 2\nB: 0\n"), ParseError);  // no leading coefficient
    CHECK_THROWS_AS(doc("order: 2\nA[2]: 1\n"), ParseError);  // no B
}

TEST_CASE("stationary-general input") {
    EquationDoc d = doc("order: 2\nC: 2\nA[2]: 1\nA[1]: 1\nA0: 0\nB: 0\n");
    CHECK_THROWS_AS(to_reduced(d), DomainError);
    StationaryGeneralEquation s = to_stationary(d);
    CHECK(s.C.constant()->value() == 2);
    CHECK(s.A[1].is_one());

    // C = 1 and A[1] = 0 written out explicitly is still reduced
    CHECK_NOTHROW(to_reduced(doc("order: 2\nC: 1\nA[2]: 1\nA[1]: 0\nB: x\n")));
    CHECK_THROWS_AS(to_reduced(doc("order: 2\nA[2]: t\nB: x\n")), DomainError);
}

TEST_CASE("written equations re-parse to sample-equivalent equations") {
    std::mt19937_64 rng(4);
    for (Tag tag : subclass_tags()) {
        ReducedEquation eq = instantiate_normal_form(random_params(tag, rng));
        std::stringstream ss;
        write_equation(ss, eq);
        ReducedEquation back = to_reduced(read_equation(ss));
        CHECK(back.order == eq.order);
        REQUIRE(back.domain.x.size() == eq.domain.x.size());
        for (std::size_t i = 0; i < eq.domain.x.size(); ++i) {
            CHECK(back.domain.x[i].lo == eq.domain.x[i].lo);
            CHECK(back.domain.x[i].hi == eq.domain.x[i].hi);
        }
        for (int k = 0; k <= eq.order; ++k) CHECK(sample_equiv(back.A[k], eq.A[k], eq.domain, 50, 0).equal);
        CHECK(sample_equiv(back.B, eq.B, eq.domain, 50, 0).equal);
    }
}

TEST_CASE("time-dependent equations keep their time map") {
    ReducedEquation eq(2, {num(0), num(0), num(1)}, x_());
    FiberTransformation tr{exp(t_()), num(1) + t_(), num(0)};
    TimeDependentReducedEquation out = apply_reduced(eq, tr);
    std::stringstream ss;
    write_equation(ss, out);
    EquationDoc d = read_equation(ss);
    REQUIRE(d.time_map);
    CHECK_THROWS_AS(to_reduced(d), DomainError);
    TimeDependentReducedEquation back = to_time_dependent(d);
    CHECK(sample_equiv(*back.time_map, exp(t_()), back.domain, 20, 0).equal);
    CHECK(sample_equiv(back.B, out.B, out.domain, 50, 1e-15).equal);
}

TEST_CASE("transform files") {
    std::istringstream in("T: 2*t\nX1: 3\nX0: sin(t)\n");
    FiberTransformation tr = read_transform(in);
    CHECK(evaluate(tr.T, 0.5, 0) == 1.0);
    std::stringstream ss;
    write_transform(ss, tr);
    FiberTransformation back = read_transform(ss);
    CHECK(transformation_distance(tr, back, kTimeBox) == 0);

    std::istringstream bad("T: t\nX1: x\n");
    CHECK_THROWS_AS(read_transform(bad), ParseError);
    std::istringstream unknown("T: t\nU: 1\n");
    CHECK_THROWS_AS(read_transform(unknown), ParseError);
}

TEST_CASE("group element files") {
    GroupElement g;
    g.tag = Tag::I00;
    g[0] = 0.5;
    g[1] = -1.25;
    g[4] = 1.0 / 3.0;
    g.epsilon = -1;
    g.p1 = Stage1::tan;
    g.p2 = Stage2::atan;
    g.s = 0.1;
    std::stringstream ss;
    write_group_element(ss, g);
    CHECK(looks_like_group_element(ss));
    GroupElement back = read_group_element(ss);
    CHECK(back.tag == g.tag);
    CHECK(back.c == g.c);  // 17 digits round-trip exactly
    CHECK(back.epsilon == -1);
    CHECK(back.p1 == Stage1::tan);
    CHECK(back.p2 == Stage2::atan);
    CHECK(back.s == g.s);

    std::istringstream eps("tag: II0\nepsilon: 2\n");
    CHECK_THROWS_AS(read_group_element(eps), ParseError);
    std::istringstream tr("T: t\n");
    CHECK_FALSE(looks_like_group_element(tr));
}

TEST_CASE("params files") {
    std::istringstream in("alpha: -2\na[2]: 1\na01: 0.5\n");
    SubclassParams p = read_params(in, Tag::I01, 2);
    CHECK(p.alpha == -2);
    CHECK(p.a[2] == 1);
    CHECK(p.a01 == 0.5);
    std::stringstream ss;
    write_params(ss, p);
    SubclassParams back = read_params(ss, Tag::I01, 2);
    CHECK(params_distance(back, p) == 0);

    std::istringstream wrong("a[3]: 1\n");
    CHECK_THROWS_AS(read_params(wrong, Tag::II0, 2), ParseError);
    std::istringstream other("tag: III\n");
    CHECK_THROWS_AS(read_params(other, Tag::II0, 2), ParseError);
}

TEST_CASE("reals print with 17 significant digits") {
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
}
