#include <doctest.h>

#include <sstream>

#include "gvacl/csv.hpp"
#include "gvacl/simulator.hpp"

using namespace gvacl;

namespace {

Dataset sample_data(FamilyTag tag, int p, std::uint64_t seed) {
    SimSpec spec;
    spec.family = tag == FamilyTag::Gamma ? Family::gamma(0.8)
                                          : Family::poisson();
    spec.m = 4;
    spec.n = 3;
    spec.beta.assign(p + 1, -0.5);
    spec.sigma_u = spec.sigma_v = 0.5;
    spec.covariate_law = CovariateLaw::normal(1.0, 1.0);
    spec.seed = seed;
    return simulate(spec).data;
}

Dataset parse(const std::string& text, const Family& family) {
    std::istringstream in(text);
    return read_csv(in, family);
}

}  // namespace

TEST_CASE("round trip is bit-exact") {
    for (FamilyTag tag : {FamilyTag::Poisson, FamilyTag::Gamma}) {
        for (int p : {1, 2}) {
            const Dataset d = sample_data(tag, p, 7 + p);
            std::ostringstream out;
            write_csv(out, d);
            const Dataset back = parse(out.str(), d.family);
            CHECK(back.m == d.m);
            CHECK(back.n == d.n);
            CHECK(back.p == d.p);
            CHECK(back.y == d.y);
            CHECK(back.x == d.x);

            // serialization itself is stable too
            std::ostringstream again;
            write_csv(again, back);
            CHECK(again.str() == out.str());
        }
    }
}

TEST_CASE("header layout") {
    const Dataset d = sample_data(FamilyTag::Poisson, 2, 3);
    std::ostringstream out;
    write_csv(out, d);
    const std::string text = out.str();
    CHECK(text.substr(0, text.find('\n')) == "row,col,y,x1,x2");
}

TEST_CASE("duplicate cell names the offender") {
    const std::string text =
        "row,col,y,x1\n"
        "1,1,2,0.5\n"
        "1,2,1,0.25\n"
        "2,1,0,0.1\n"
        "1,2,3,0.0\n"
        "2,2,1,0.2\n";
    try {
        parse(text, Family::poisson());
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 1") != std::string::npos);
        CHECK(msg.find("col 2") != std::string::npos);
        CHECK(msg.find("line 5") != std::string::npos);
    }
}

TEST_CASE("missing cell is rejected") {
    const std::string text =
        "row,col,y,x1\n"
        "1,1,2,0.5\n"
        "1,2,1,0.25\n"
        "2,2,1,0.2\n";
    CHECK_THROWS_AS(parse(text, Family::poisson()), DataError);
}

TEST_CASE("malformed input diagnostics carry line numbers") {
    CHECK_THROWS_AS(parse("col,row,y,x1\n1,1,2,0.5\n", Family::poisson()),
                    DataError);
    CHECK_THROWS_AS(parse("", Family::poisson()), DataError);
    try {
        parse("row,col,y,x1\n1,1,2,0.5\n1,2,abc,0.5\n2,1,1,0\n2,2,1,0\n",
              Family::poisson());
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    // wrong field count
    CHECK_THROWS_AS(
        parse("row,col,y,x1\n1,1,2\n1,2,1,0.1\n2,1,1,0.1\n2,2,1,0.1\n",
              Family::poisson()),
        DataError);
}

TEST_CASE("family domain enforced at parse time") {
    const std::string text =
        "row,col,y,x1\n"
        "1,1,2.5,0.5\n"
        "1,2,1,0.25\n"
        "2,1,0,0.1\n"
        "2,2,1,0.2\n";
    CHECK_THROWS_AS(parse(text, Family::poisson()), DataError);
    const std::string neg =
        "row,col,y,x1\n"
        "1,1,-1,0.5\n"
        "1,2,1,0.25\n"
        "2,1,2,0.1\n"
        "2,2,1,0.2\n";
    CHECK_THROWS_AS(parse(neg, Family::gamma(1.0)), DataError);
}

TEST_CASE("file round trip") {
    const Dataset d = sample_data(FamilyTag::Gamma, 1, 11);
    const std::string path = "csv_roundtrip_test.csv";
    write_csv_file(path, d);
    const Dataset back = read_csv_file(path, d.family);
    CHECK(back.y == d.y);
    CHECK(back.x == d.x);
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_csv_file("does_not_exist_0421.csv", d.family),
                    DataError);
}
