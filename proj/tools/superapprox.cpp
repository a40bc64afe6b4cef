// Experiment runner: reproducible surveys and single-shot computations over
// congruence quotients, tree regularization, and p-adic open-image checks.
// Exit codes: 0 success, 1 soft per-row failures, 2 invalid configuration.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "superapprox/approxsub.hpp"
#include "superapprox/io.hpp"
#include "superapprox/padic.hpp"
#include "superapprox/spectral.hpp"
#include "superapprox/treereg.hpp"

using namespace superapprox;
using nlohmann::json;

namespace {

std::uint64_t max_order_from_env() {
    if (const char* env = std::getenv("SUPERAPPROX_MAX_ORDER")) return std::strtoull(env, nullptr, 10);
    return kDefaultMaxOrder;
}

struct Output {
    std::string path;
    std::ofstream file;
    std::ostream& stream() {
        if (path.empty()) return std::cout;
        if (!file.is_open()) {
            file.open(path);
            if (!file) throw std::runtime_error("cannot write " + path);
        }
        return file;
    }
};

std::vector<Int> parse_int_list(const std::string& text) {
    std::vector<Int> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) out.emplace_back(part);
    return out;
}

json leaf_to_json(const Leaf& leaf) {
    json arr = json::array();
    for (auto d : leaf) arr.push_back(d);
    return arr;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"super-approximation laboratory"};
    app.require_subcommand(1);

    std::string gens_path, map_path, subset_path, leaves_path, out_path;
    std::string moduli_text, modulus_text, epsilon_text = "1/2", delta_text = "1/10";
    std::string format = "csv", timings = "measured", x0_text, y_text;
    unsigned walk_length = 1, c_count = 1, level = 1;
    int ell = 1, precision = 6, k0 = -1;
    unsigned trials = 1;
    std::uint64_t seed = kDefaultSeed;
    int jobs = 1;
    bool block_mode = false, check_mode = false, minimal = false;

    auto* survey = app.add_subcommand("survey", "spectral-gap survey over a modulus family");
    survey->add_option("--gens", gens_path)->required();
    survey->add_option("--moduli", moduli_text)->required();
    survey->add_option("--seed", seed);
    survey->add_option("--jobs", jobs);
    survey->add_option("--out", out_path);
    survey->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
    survey->add_option("--timings", timings)->check(CLI::IsMember({"measured", "zero"}));

    auto* gap = app.add_subcommand("gap", "spectral gap of one quotient");
    gap->add_option("--gens", gens_path)->required();
    gap->add_option("--modulus", modulus_text)->required();
    gap->add_option("--seed", seed);
    gap->add_option("--out", out_path);
    gap->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
    gap->add_option("--timings", timings)->check(CLI::IsMember({"measured", "zero"}));

    auto* quotient = app.add_subcommand("quotient", "enumerate a quotient and export its Cayley edge list");
    quotient->add_option("--gens", gens_path)->required();
    quotient->add_option("--modulus", modulus_text)->required();
    quotient->add_option("--out", out_path);

    auto* regularize_cmd = app.add_subcommand("regularize", "rooted-tree regularization of a leaf set");
    regularize_cmd->add_option("--leaves", leaves_path)->required();
    regularize_cmd->add_option("--epsilon", epsilon_text);
    regularize_cmd->add_flag("--block", block_mode);
    regularize_cmd->add_option("--out", out_path);

    auto* tripling = app.add_subcommand("tripling", "level-Q approximate-subgroup predicate");
    tripling->add_option("--gens", gens_path)->required();
    tripling->add_option("--modulus", modulus_text)->required();
    tripling->add_option("--subset", subset_path)->required();
    tripling->add_option("--delta", delta_text);
    tripling->add_option("--walk-length", walk_length);
    tripling->add_option("--out", out_path);

    auto* boundedgen = app.add_subcommand("boundedgen", "bounded generation of a congruence kernel");
    boundedgen->add_option("--gens", gens_path)->required();
    boundedgen->add_option("--modulus", modulus_text)->required();
    boundedgen->add_option("--subset", subset_path)->required();
    boundedgen->add_option("--C", c_count);
    boundedgen->add_option("--level", level);
    boundedgen->add_flag("--minimal", minimal);
    boundedgen->add_option("--out", out_path);

    auto* commfill = app.add_subcommand("commfill", "commutator width of a quotient");
    commfill->add_option("--gens", gens_path)->required();
    commfill->add_option("--modulus", modulus_text)->required();
    commfill->add_option("--out", out_path);

    auto* hensel = app.add_subcommand("hensel", "quantitative Hensel lift");
    hensel->add_option("--map", map_path)->required();
    hensel->add_option("--x0", x0_text)->required();
    hensel->add_option("--y", y_text)->required();
    hensel->add_option("--l", ell);
    hensel->add_option("--k0", k0);
    hensel->add_option("--precision", precision);
    hensel->add_option("--out", out_path);

    auto* sumset = app.add_subcommand("sumset", "open-image sumset coverage");
    sumset->add_option("--map", map_path)->required();
    sumset->add_option("--l", ell);
    sumset->add_option("--C", c_count);
    sumset->add_option("--precision", precision);
    sumset->add_flag("--check", check_mode);
    sumset->add_option("--out", out_path);

    auto* equidist = app.add_subcommand("equidist", "weighted equidistribution inequality check");
    equidist->add_option("--gens", gens_path)->required();
    equidist->add_option("--modulus", modulus_text)->required();
    equidist->add_option("--walk-length", walk_length);
    equidist->add_option("--trials", trials);
    equidist->add_option("--seed", seed);
    equidist->add_option("--out", out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    Output out;
    out.path = out_path;
    const std::uint64_t max_order = max_order_from_env();

    try {
        if (survey->parsed() || gap->parsed()) {
            GeneratorSet gens = read_generators_file(gens_path);
            std::vector<Modulus> moduli =
                survey->parsed() ? parse_moduli_list(moduli_text) : std::vector<Modulus>{Modulus::parse(modulus_text)};
            SurveyOptions opts;
            opts.seed = seed;
            opts.jobs = jobs;
            opts.max_order = max_order;
            opts.record_seconds = (timings == "measured");
            auto rows = expander_survey(gens, moduli, opts);
            if (format == "json")
                write_survey_json(out.stream(), rows);
            else
                write_survey_csv(out.stream(), rows);
            for (const auto& r : rows)
                if (!r.error.empty()) return 1;
            return 0;
        }

        if (quotient->parsed()) {
            GeneratorSet gens = read_generators_file(gens_path);
            Quotient g = enumerate_quotient(gens, Modulus::parse(modulus_text), max_order);
            CayleyGraph graph = cayley_graph(g);
            write_edge_list(out.stream(), graph);
            std::cerr << "q=" << modulus_text << " order=" << g.order() << " edges=" << graph.edges.size() << "\n";
            return 0;
        }

        if (regularize_cmd->parsed()) {
            std::ifstream in(leaves_path);
            if (!in) throw std::runtime_error("cannot read " + leaves_path);
            LeafSet a = read_leafset(in);
            Rational eps = Rational::parse(epsilon_text);
            RegularizationResult r = block_mode ? block_regularize(a, eps) : regularize(a, eps);
            json j;
            j["k"] = a.shape().k;
            j["n"] = a.shape().n;
            j["input_size"] = a.size();
            j["m"] = r.m;
            j["v"] = leaf_to_json(r.v);
            j["degrees"] = r.degrees;
            j["level_stride"] = r.level_stride;
            j["b_size"] = r.b.size();
            j["chain_sizes"] = r.chain_sizes;
            j["hypotheses_hold"] = r.hypotheses_hold;
            if (block_mode) j["block_size"] = r.block_size;
            out.stream() << j.dump(2) << "\n";
            return 0;
        }

        if (tripling->parsed()) {
            GeneratorSet gens = read_generators_file(gens_path);
            Quotient g = enumerate_quotient(gens, Modulus::parse(modulus_text), max_order);
            SubsetView a(g, read_subset_file(subset_path, g));
            PredicateReport r = pq_predicate(a, Rational::parse(delta_text), walk_length);
            json j;
            j["mass_ok"] = r.mass_ok;
            j["length_ok"] = r.length_ok;
            j["tripling_ok"] = r.tripling_ok;
            j["overall"] = r.overall;
            j["walk_mass"] = r.walk_mass;
            j["mass_threshold"] = r.mass_threshold;
            j["walk_length"] = r.walk_length;
            j["length_threshold"] = r.length_threshold;
            j["size_a"] = r.size_a;
            j["size_aaa"] = r.size_aaa;
            j["tripling_exponent"] = r.tripling_exponent;
            j["quotient_order"] = g.order();
            out.stream() << j.dump(2) << "\n";
            return 0;
        }

        if (boundedgen->parsed()) {
            GeneratorSet gens = read_generators_file(gens_path);
            Quotient g = enumerate_quotient(gens, Modulus::parse(modulus_text), max_order);
            SubsetView a(g, read_subset_file(subset_path, g));
            json j;
            if (minimal) {
                unsigned c = bounded_gen_min_c(a, level, c_count);
                j["minimal_C"] = c;
                j["contained"] = (c != 0);
            } else {
                j["contained"] = bounded_gen_check(a, c_count, level);
                j["C"] = c_count;
            }
            j["level"] = level;
            out.stream() << j.dump(2) << "\n";
            return 0;
        }

        if (commfill->parsed()) {
            GeneratorSet gens = read_generators_file(gens_path);
            Quotient g = enumerate_quotient(gens, Modulus::parse(modulus_text), max_order);
            CommutatorFill r = commutator_fill(g);
            json j;
            j["t_min"] = r.t_min;
            j["is_p_group"] = r.is_p_group;
            j["bound_ok"] = r.bound_ok;
            j["derived_order"] = r.derived_order;
            j["abelianization_order"] = r.abelian_order;
            j["commutator_count"] = r.commutator_count;
            out.stream() << j.dump(2) << "\n";
            return 0;
        }

        if (hensel->parsed()) {
            AnalyticMap f = read_analytic_map_file(map_path);
            TruncatedPoint x0{f.p(), precision, parse_int_list(x0_text)};
            std::vector<Int> y = parse_int_list(y_text);
            int k0_used = k0;
            if (k0_used < 0) {
                MinorNorm n = max_minor_norm(f.jacobian(x0.coordinates, precision), f.output_dim(), f.input_dim(),
                                             f.p(), precision);
                if (n.kind != MinorNorm::Kind::exact) throw std::runtime_error("Jacobian is degenerate at x0");
                k0_used = n.valuation;
            }
            HenselResult r = hensel_solve(f, x0, y, ell, k0_used);
            json j;
            json coords = json::array();
            for (const auto& c : r.x.coordinates) coords.push_back(c.get_str());
            j["x"] = coords;
            j["residual_valuations"] = r.residual_valuations;
            j["achieved_precision"] = r.achieved_precision;
            j["k0"] = k0_used;
            j["l"] = ell;
            out.stream() << j.dump(2) << "\n";
            return 0;
        }

        if (sumset->parsed()) {
            AnalyticMap f = read_analytic_map_file(map_path);
            SumsetCoverage r = sumset_coverage(f, ell, static_cast<int>(c_count), precision);
            json j;
            j["covered"] = r.covered;
            j["e"] = r.e;
            j["d_size"] = r.d_size;
            j["lattice_points_checked"] = r.lattice_points_checked;
            if (check_mode) {
                SumsetCoverage s = sumset_coverage_sorted(f, ell, static_cast<int>(c_count), precision);
                bool same = s.covered == r.covered && s.e == r.e && s.d_size == r.d_size &&
                            s.lattice_points_checked == r.lattice_points_checked;
                j["sorted_path_agrees"] = same;
                if (!same) {
                    out.stream() << j.dump(2) << "\n";
                    return 1;
                }
            }
            out.stream() << j.dump(2) << "\n";
            return r.covered ? 0 : 1;
        }

        if (equidist->parsed()) {
            GeneratorSet gens = read_generators_file(gens_path);
            Quotient g = enumerate_quotient(gens, Modulus::parse(modulus_text), max_order);
            double lambda = spectral_gap(g, kDefaultTol, kDefaultMaxIter, seed).lambda;
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> unif(-1.0, 1.0);
            json rows = json::array();
            bool all_pass = true;
            for (unsigned t = 0; t < trials; ++t) {
                std::vector<double> f(g.order());
                for (double& x : f) x = unif(rng);
                EquidistributionCheck ec = equidistribution_check(g, f, walk_length, lambda);
                json row;
                row["lhs"] = ec.lhs;
                row["rhs"] = ec.rhs;
                row["pass"] = ec.pass;
                row["orbit_size"] = ec.orbit_size;
                rows.push_back(row);
                all_pass = all_pass && ec.pass;
            }
            json j;
            j["lambda"] = lambda;
            j["walk_length"] = walk_length;
            j["rows"] = rows;
            out.stream() << j.dump(2) << "\n";
            return all_pass ? 0 : 1;
        }
    } catch (const QuotientTooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
