#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "superapprox/io.hpp"

using namespace superapprox;

TEST_CASE("generator JSON roundtrip") {
    std::string doc = R"({
      "q0": 1,
      "dimension": 2,
      "denominator_exponents": [0, 0],
      "matrices": [[[1, 1], [0, 1]], [[1, 0], [1, 1]]]
    })";
    std::stringstream in(doc);
    GeneratorSet gens = read_generators(in);
    CHECK(gens.dim() == 2);
    CHECK(gens.size() == 4);  // inverses adjoined

    std::stringstream out;
    write_generators(out, gens);
    GeneratorSet back = read_generators(out);
    CHECK(back.size() == 4);  // already symmetric, nothing more to adjoin
    for (size_t i = 0; i < 4; ++i) CHECK(back[i] == gens[i]);
}

TEST_CASE("analytic map JSON") {
    std::string doc = R"({
      "p": 3, "n0": 1, "d0": 2,
      "terms": [{"exps": [1], "coeffs": [1, 0]}, {"exps": [2], "coeffs": [0, 1]}]
    })";
    std::stringstream in(doc);
    AnalyticMap f = read_analytic_map(in);
    CHECK(f.p() == 3);
    CHECK(f.output_dim() == 2);
    auto v = f.evaluate_exact({2});
    CHECK(v[0] == 2);
    CHECK(v[1] == 4);
}

TEST_CASE("subset files resolve positions and matrices") {
    Quotient g = enumerate_quotient(sl2_elementary_generators(), Modulus::parse("3"));

    std::stringstream pos_doc(R"({"positions": [0, 3, 1]})");
    auto by_pos = read_subset(pos_doc, g);
    CHECK(by_pos == std::vector<std::uint32_t>{0, 3, 1});

    std::stringstream mat_doc(R"({"matrices": [[[1, 0], [0, 1]], [[1, 1], [0, 1]]]})");
    auto by_mat = read_subset(mat_doc, g);
    REQUIRE(by_mat.size() == 2);
    CHECK(by_mat[0] == 0);
    CHECK(g.element(by_mat[1]).at(0, 1) == 1);

    std::stringstream bad(R"({"matrices": [[[2, 0], [0, 1]]]})");  // det 2: not in SL2
    CHECK_THROWS(read_subset(bad, g));
}

TEST_CASE("survey CSV and JSON formats") {
    GeneratorSet gens = sl2_elementary_generators();
    SurveyOptions opts;
    opts.record_seconds = false;
    auto rows = expander_survey(gens, parse_moduli_list("3,5"), opts);

    std::stringstream csv;
    write_survey_csv(csv, rows);
    std::string line;
    std::getline(csv, line);
    CHECK(line == "q,order,lambda,method,iterations,seconds");
    std::getline(csv, line);
    CHECK(line.substr(0, 5) == "3,24,");

    std::stringstream js;
    write_survey_json(js, rows);
    CHECK(js.str().find("\"order\": 24") != std::string::npos);
    CHECK(js.str().find("\"method\": \"dense\"") != std::string::npos);
}

TEST_CASE("edge list export") {
    Quotient c5 = enumerate_quotient(GeneratorSet({RationalMatrix(2, {1, 1, 0, 1}, 1, 0)}), Modulus::parse("5"));
    std::stringstream out;
    write_edge_list(out, cayley_graph(c5));
    int lines = 0;
    std::string line;
    while (std::getline(out, line)) {
        ++lines;
        unsigned u, v, s;
        CHECK(std::sscanf(line.c_str(), "%u %u %u", &u, &v, &s) == 3);
    }
    CHECK(lines == 5);
}

TEST_CASE("moduli list parsing") {
    auto moduli = parse_moduli_list("3,5,7,9,25");
    REQUIRE(moduli.size() == 5);
    CHECK(moduli[3].value() == 9);
    CHECK(moduli[3].factors()[0].exponent == 2);
    CHECK(moduli[4].value() == 25);
}
