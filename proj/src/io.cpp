#include "superapprox/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace superapprox {

using nlohmann::json;

namespace {

json parse_stream(std::istream& in) {
    json j;
    in >> j;
    return j;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return in;
}

}  // namespace

GeneratorSet read_generators(std::istream& in) {
    json j = parse_stream(in);
    Int q0 = Int(j.value("q0", 1));
    int dim = j.at("dimension").get<int>();
    std::vector<unsigned> exps;
    if (j.contains("denominator_exponents")) exps = j["denominator_exponents"].get<std::vector<unsigned>>();
    const auto& mats = j.at("matrices");
    std::vector<RationalMatrix> gens;
    size_t idx = 0;
    for (const auto& mat : mats) {
        std::vector<Int> entries;
        entries.reserve(static_cast<size_t>(dim) * dim);
        for (const auto& row : mat)
            for (const auto& v : row) entries.push_back(Int(v.get<long>()));
        unsigned e = idx < exps.size() ? exps[idx] : 0;
        gens.emplace_back(dim, std::move(entries), q0, e);
        ++idx;
    }
    return GeneratorSet(std::move(gens));
}

GeneratorSet read_generators_file(const std::string& path) {
    auto in = open_or_throw(path);
    return read_generators(in);
}

void write_generators(std::ostream& out, const GeneratorSet& gens) {
    json j;
    j["q0"] = gens.q0().get_si();
    j["dimension"] = gens.dim();
    json exps = json::array();
    json mats = json::array();
    for (const auto& g : gens.generators()) {
        exps.push_back(g.den_exponent());
        json mat = json::array();
        for (int i = 0; i < g.dim(); ++i) {
            json row = json::array();
            for (int k = 0; k < g.dim(); ++k) row.push_back(g.num(i, k).get_si());
            mat.push_back(row);
        }
        mats.push_back(mat);
    }
    j["denominator_exponents"] = exps;
    j["matrices"] = mats;
    out << j.dump(2) << "\n";
}

AnalyticMap read_analytic_map(std::istream& in) {
    json j = parse_stream(in);
    AnalyticMap f(Int(j.at("p").get<long>()), j.at("n0").get<int>(), j.at("d0").get<int>());
    for (const auto& term : j.at("terms")) {
        AnalyticMap::MultiIndex exps = term.at("exps").get<std::vector<unsigned>>();
        std::vector<Int> coeffs;
        for (const auto& c : term.at("coeffs")) coeffs.push_back(Int(c.get<long>()));
        f.add_term(exps, std::move(coeffs));
    }
    return f;
}

AnalyticMap read_analytic_map_file(const std::string& path) {
    auto in = open_or_throw(path);
    return read_analytic_map(in);
}

std::vector<std::uint32_t> read_subset(std::istream& in, const Quotient& g) {
    json j = parse_stream(in);
    std::vector<std::uint32_t> positions;
    if (j.contains("positions")) {
        positions = j["positions"].get<std::vector<std::uint32_t>>();
    } else if (j.contains("matrices")) {
        for (const auto& mat : j["matrices"]) {
            std::vector<Int> entries;
            for (const auto& row : mat)
                for (const auto& v : row) entries.push_back(Int(v.get<long>()));
            ResidueMatrix m(g.dim(), std::move(entries), g.modulus());
            auto pos = g.find(m);
            if (!pos) throw std::runtime_error("subset matrix is not an element of the quotient");
            positions.push_back(*pos);
        }
    } else {
        throw std::runtime_error("subset file needs \"positions\" or \"matrices\"");
    }
    return positions;
}

std::vector<std::uint32_t> read_subset_file(const std::string& path, const Quotient& g) {
    auto in = open_or_throw(path);
    return read_subset(in, g);
}

namespace {

void format_row_fields(std::ostream& out, const SurveyRow& row) {
    out << row.modulus << ',' << row.order << ',';
    if (row.error.empty())
        out << std::setprecision(12) << row.gap.lambda;
    out << ',' << (row.error.empty() ? method_name(row.gap.method) : row.error) << ',' << row.gap.iterations << ','
        << std::setprecision(6) << row.seconds;
}

}  // namespace

void write_survey_csv(std::ostream& out, const std::vector<SurveyRow>& rows) {
    out << "q,order,lambda,method,iterations,seconds\n";
    for (const auto& row : rows) {
        format_row_fields(out, row);
        out << "\n";
    }
}

void write_survey_json(std::ostream& out, const std::vector<SurveyRow>& rows) {
    json arr = json::array();
    for (const auto& row : rows) {
        json r;
        r["q"] = row.modulus;
        r["order"] = row.order;
        if (row.error.empty()) {
            r["lambda"] = row.gap.lambda;
            r["method"] = method_name(row.gap.method);
        } else {
            r["error"] = row.error;
        }
        r["iterations"] = row.gap.iterations;
        r["seconds"] = row.seconds;
        arr.push_back(r);
    }
    json j;
    j["rows"] = arr;
    out << j.dump(2) << "\n";
}

void write_edge_list(std::ostream& out, const CayleyGraph& graph) {
    for (const auto& e : graph.edges) out << e[0] << ' ' << e[1] << ' ' << e[2] << "\n";
}

std::vector<Modulus> parse_moduli_list(const std::string& comma_separated) {
    std::vector<Modulus> moduli;
    std::stringstream ss(comma_separated);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (!part.empty()) moduli.push_back(Modulus::parse(part));
    }
    return moduli;
}

}  // namespace superapprox
