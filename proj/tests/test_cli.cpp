#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bkdv/classify.hpp"
#include "bkdv/io.hpp"

using namespace bkdv;
namespace fs = std::filesystem;

namespace {

const fs::path dir = fs::temp_directory_path() / "bkdv_cli_test";

struct Run {
    int code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void put(const std::string& name, const std::string& text) {
    fs::create_directories(dir);
    std::ofstream(dir / name) << text;
}

fs::path at(const std::string& name) { return dir / name; }

Run run(const std::string& args) {
    fs::create_directories(dir);
    std::string cmd = std::string(BKDV_CLI) + " " + args + " >" + (dir / "stdout").string() + " 2>" +
                      (dir / "stderr").string();
    int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(dir / "stdout");
    r.err = slurp(dir / "stderr");
    return r;
}

std::string p(const std::string& name) { return at(name).string(); }

}  // namespace

TEST_CASE("classify Burgers with a linear source") {
    put("burgers_x.eq", "order: 2\nA[2]: 1\nA0: 0\nB: x\n");
    Run r = run("classify --input " + p("burgers_x.eq"));
    CHECK(r.code == 0);
    CHECK(r.out.find("tag: IV0_2") != std::string::npos);

    Run j = run("classify --json --input " + p("burgers_x.eq"));
    CHECK(j.code == 0);
    CHECK(j.out.find("\"tag\": \"IV0_2\"") != std::string::npos);
}

TEST_CASE("verify the identity map") {
    put("a.eq", "order: 2\nA[2]: x^2\nA0: 1\nB: x\n");
    put("id.tr", "T: t\nX1: 1\nX0: 0\n");
    Run r = run("verify --src " + p("a.eq") + " --map " + p("id.tr") + " --tgt " + p("a.eq"));
    CHECK(r.code == 0);
    CHECK(r.out.find("factor: 1\n") != std::string::npos);
    CHECK(r.out.find("verified: yes") != std::string::npos);
}

TEST_CASE("verify fails on a wrong target") {
    put("a.eq", "order: 2\nA[2]: x^2\nA0: 1\nB: x\n");
    put("b.eq", "order: 2\nA[2]: x^2\nA0: 1\nB: x + 1\n");
    put("id.tr", "T: t\nX1: 1\nX0: 0\n");
    Run r = run("verify --src " + p("a.eq") + " --map " + p("id.tr") + " --tgt " + p("b.eq"));
    CHECK(r.code == 1);
    CHECK(r.out.find("verified: no") != std::string::npos);
}

TEST_CASE("normal form gate violation exits 3") {
    put("p.txt", "alpha: -2\na[2]: 1\n");
    Run r = run("normal-form --tag I01 --params " + p("p.txt") + " --order 2");
    CHECK(r.code == 3);
    CHECK(r.err.find("(α+2)") != std::string::npos);
}

TEST_CASE("parse errors exit 2 with file and line") {
    put("bad.eq", "order: 2\nA[2]: 1\nFOO: 3\nB: x\n");
    Run r = run("classify --input " + p("bad.eq"));
    CHECK(r.code == 2);
    CHECK(r.err.find("bad.eq") != std::string::npos);
    CHECK(r.err.find("line 3") != std::string::npos);

    CHECK(run("classify --input " + p("missing.eq")).code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("classify").code == 2);
}

TEST_CASE("domain errors exit 3") {
    put("td.eq", "order: 2\nA[2]: 1 + t\nB: x\n");
    CHECK(run("classify --input " + p("td.eq")).code == 3);
    put("ge.ge", "tag: II0\nc1: 1\nc4: 1\n");
    put("burgers_x.eq", "order: 2\nA[2]: 1\nA0: 0\nB: x\n");
    Run r = run("transform --input " + p("burgers_x.eq") + " --map " + p("ge.ge"));
    CHECK(r.code == 3);
    CHECK(r.err.find("classified as IV0_2") != std::string::npos);
}

TEST_CASE("normal-form output re-parses and classifies back") {
    put("ii0.txt", "beta: 0.5\na[2]: 1.5\na00: -0.25\nb0: 2\n");
    Run r = run("normal-form --tag II0 --params " + p("ii0.txt") + " --order 2 --out " + p("ii0.eq"));
    REQUIRE(r.code == 0);
    ReducedEquation eq = to_reduced(read_equation_file(p("ii0.eq")));
    Classification c = detect_subclass(eq);
    CHECK(c.tag == Tag::II0);
    REQUIRE(c.params);
    CHECK(c.params->beta == doctest::Approx(0.5));
    CHECK(c.params->b0 == doctest::Approx(2));
}

TEST_CASE("transform by a group element and by a usual map") {
    put("burgers_x.eq", "order: 2\nA[2]: 1\nA0: 0\nB: x\n");
    put("iv.ge", "tag: IV0_2\nc0: 1\nc1: 1\nc4: 1\nc5: 0.3\n");
    Run r = run("transform --input " + p("burgers_x.eq") + " --map " + p("iv.ge") + " --out " + p("moved.eq"));
    REQUIRE(r.code == 0);
    ReducedEquation moved = to_reduced(read_equation_file(p("moved.eq")));
    CHECK(detect_subclass(moved).tag == Tag::IV0_2);
    Run v = run("verify --src " + p("burgers_x.eq") + " --map " + p("iv.ge"));
    CHECK(v.code == 0);
    CHECK(v.out.find("classifying: pass") != std::string::npos);

    put("u.tr", "T: 2*t\nX1: 3\nX0: 0\n");
    Run u = run("verify --src " + p("burgers_x.eq") + " --map " + p("u.tr"));
    CHECK(u.code == 0);
    CHECK(u.out.find("factor: (3/4)") != std::string::npos);
}

TEST_CASE("gauge writes a reduced equation and its map") {
    put("st.eq", "order: 2\nC: 2\nA[2]: 1\nA[1]: 1\nA0: 0\nB: 0\n");
    Run r = run("gauge --input " + p("st.eq") + " --out " + p("g.eq") + " --emit-map " + p("g.map"));
    CHECK(r.code == 0);
    ReducedEquation eq = to_reduced(read_equation_file(p("g.eq")));
    CHECK(sample_equiv(eq.A[2], rat(1, 4), eq.domain, 20, 1e-14).equal);
    CHECK(slurp(at("g.map")).find("U0: (-1/2)") != std::string::npos);
}

TEST_CASE("identical inputs and seed give byte-identical reports") {
    put("burgers_x.eq", "order: 2\nA[2]: 1\nA0: 0\nB: x\n");
    Run a = run("--seed 5 classify --json --input " + p("burgers_x.eq"));
    Run b = run("--seed 5 classify --json --input " + p("burgers_x.eq"));
    CHECK(a.out == b.out);
    Run c = run("--seed 5 audit --tag III --trials 2");
    Run d = run("--seed 5 audit --tag III --trials 2");
    CHECK(c.code == 0);
    CHECK(c.out == d.out);
    CHECK(c.out.find("discrepancy_III_b0") != std::string::npos);
}

TEST_CASE("domain override") {
    put("burgers_x.eq", "order: 2\nA[2]: 1\nA0: 0\nB: x\n");
    Run r = run("--domain 3 4 classify --input " + p("burgers_x.eq"));
    CHECK(r.code == 0);
    CHECK(r.out.find("tag: IV0_2") != std::string::npos);
}

TEST_CASE("empty audit succeeds") {
    Run r = run("audit --trials 0");
    CHECK(r.code == 0);
    CHECK(r.out.find("audit: pass") != std::string::npos);
}
