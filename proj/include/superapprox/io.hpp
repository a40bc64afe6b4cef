#pragma once

// File formats: generator sets and analytic maps as JSON, subsets as position
// or matrix lists, surveys as CSV with a JSON mirror, quotients as edge lists.

#include <iosfwd>
#include <string>
#include <vector>

#include "superapprox/approxsub.hpp"
#include "superapprox/groupgen.hpp"
#include "superapprox/padic.hpp"
#include "superapprox/spectral.hpp"

namespace superapprox {

// {"q0": int, "dimension": n0, "denominator_exponents": [e_i],
//  "matrices": [[[int]]]}
GeneratorSet read_generators(std::istream& in);
GeneratorSet read_generators_file(const std::string& path);
void write_generators(std::ostream& out, const GeneratorSet& gens);

// {"p": int, "n0": int, "d0": int, "terms": [{"exps": [int], "coeffs": [int]}]}
AnalyticMap read_analytic_map(std::istream& in);
AnalyticMap read_analytic_map_file(const std::string& path);

// {"positions": [int]} or {"matrices": [[[int]]]} resolved via the quotient
std::vector<std::uint32_t> read_subset(std::istream& in, const Quotient& g);
std::vector<std::uint32_t> read_subset_file(const std::string& path, const Quotient& g);

// CSV header "q,order,lambda,method,iterations,seconds"
void write_survey_csv(std::ostream& out, const std::vector<SurveyRow>& rows);
void write_survey_json(std::ostream& out, const std::vector<SurveyRow>& rows);

// one "u v gen_index" line per edge
void write_edge_list(std::ostream& out, const CayleyGraph& graph);

std::vector<Modulus> parse_moduli_list(const std::string& comma_separated);

}  // namespace superapprox
