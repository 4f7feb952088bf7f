// Command-line front end. Every run writes a manifest holding the fully
// resolved argument list, so `airy replay <manifest>` reproduces the output.
// Exit codes: 0 success, 1 invalid input, 2 resource cap, 3 failed self-test.

#include "airy/acceptance.hpp"
#include "airy/blocks.hpp"
#include "airy/bridges.hpp"
#include "airy/dunkl.hpp"
#include "airy/ensembles.hpp"
#include "airy/errors.hpp"
#include "airy/paths.hpp"
#include "airy/walks.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#ifndef AIRY_VERSION
#define AIRY_VERSION "unknown"
#endif

namespace {

using json = nlohmann::ordered_json;
using namespace airy;

json rational_json(const Rational& q) { return {{"exact", to_fraction_string(q)}, {"float", to_double(q)}}; }

json estimate_json(const FunctionalEstimate& e) {
    json j{{"mean", e.mean}, {"stderr", e.stderr_}, {"n", e.n_samples}, {"mesh", e.mesh}};
    if (e.refined) j["refined"] = {{"mean", e.refined_mean}, {"stderr", e.refined_stderr}};
    return j;
}

std::vector<Rational> parse_rationals(const std::vector<std::string>& v) {
    std::vector<Rational> out;
    for (const auto& s : v) out.push_back(parse_rational(s));
    return out;
}

std::string csv_cell(const json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        return s.find_first_of(",\"\n") == std::string::npos ? s : "\"" + s + "\"";
    }
    if (v.is_array()) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + csv_cell(v[i]);
        return s;
    }
    return v.dump();
}

// Nested objects become dotted column names.
void flatten(const json& j, const std::string& prefix, json& out) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it->is_object())
            flatten(*it, key, out);
        else
            out[key] = *it;
    }
}

class Sink {
public:
    Sink(const std::string& path, const std::string& format) : csv_(format == "csv") {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw ArgumentError("cannot open output file " + path);
        }
    }
    void write(const json& record) {
        auto& os = file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout;
        if (!csv_) {
            os << record.dump() << '\n';
            return;
        }
        json flat = json::object();
        flatten(record, "", flat);
        if (header_.empty()) {
            for (auto it = flat.begin(); it != flat.end(); ++it) header_.push_back(it.key());
            for (std::size_t i = 0; i < header_.size(); ++i) os << (i ? "," : "") << header_[i];
            os << '\n';
        }
        for (std::size_t i = 0; i < header_.size(); ++i)
            os << (i ? "," : "") << (flat.contains(header_[i]) ? csv_cell(flat[header_[i]]) : "");
        os << '\n';
    }

private:
    bool csv_;
    std::ofstream file_;
    std::vector<std::string> header_;
};

struct Globals {
    std::uint64_t seed = 1;
    std::string output;
    std::string format = "json";
    std::string manifest;
};

// Resolved "--name value" list for the active subcommand and the global options.
std::vector<std::string> resolved_argv(const CLI::App& app, const CLI::App& sub) {
    std::vector<std::string> argv{sub.get_name()};
    auto add = [&](const CLI::App& a) {
        for (const CLI::Option* o : a.get_options()) {
            const std::string name = o->get_single_name();
            if (name == "help" || name == "config" || name == "manifest" || name == "output") continue;
            if (o->get_expected_min() == 0) {
                if (o->count() > 0) argv.push_back("--" + name);
                continue;
            }
            std::vector<std::string> vals = o->results();
            const std::string def = o->get_default_str();
            if (vals.empty() && !def.empty() && def != "{}" && def != "[]") vals = {def};
            if (vals.empty()) continue;
            std::string joined;
            for (std::size_t i = 0; i < vals.size(); ++i) joined += (i ? "," : "") + vals[i];
            if (!joined.empty() && joined.front() == '[' && joined.back() == ']')
                joined = joined.substr(1, joined.size() - 2);
            argv.push_back("--" + name);
            argv.push_back(joined);
        }
    };
    add(sub);
    add(app);
    return argv;
}

void write_manifest(const Globals& g, const std::vector<std::string>& argv) {
    const json m{{"tool", "airy"}, {"version", AIRY_VERSION}, {"subcommand", argv.front()},
                 {"seed", g.seed}, {"format", g.format}, {"argv", argv}};
    std::string path = g.manifest;
    if (path.empty() && !g.output.empty()) path = g.output + ".manifest.json";
    if (path.empty()) {
        std::cerr << m.dump() << '\n';
        return;
    }
    std::ofstream f(path);
    if (!f) throw ArgumentError("cannot open manifest file " + path);
    f << m.dump(2) << '\n';
}

int run(int argc, const char* const* argv);

int run_checked(int argc, const char* const* argv) {
    CLI::App app{"Exact moments, lattice paths, Brownian functionals and samplers for beta ensembles"};
    app.set_help_flag("--help", "print help");  // -h would clash with --h below
    app.option_defaults()->always_capture_default();
    app.set_config("--config", "", "TOML/INI file mirroring the flags");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "64-bit seed")->envname("AIRY_SEED");
    app.add_option("--output", g.output, "output file (default stdout)");
    app.add_option("--format", g.format, "json (newline-delimited) or csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--manifest", g.manifest, "manifest path (default <output>.manifest.json, or stderr)");

    // moments
    auto* mom = app.add_subcommand("moments", "exact corners or DBM joint moment");
    std::string mode = "corners", beta_s = "2", tau_s = "1";
    int N = 1;
    std::vector<int> rows, ks;
    std::vector<std::string> times_s;
    mom->add_option("--mode", mode)->check(CLI::IsMember({"corners", "dbm"}));
    mom->add_option("--N", N)->required();
    mom->add_option("--rows", rows, "row sizes N_1 >= ... >= N_m (corners)")->delimiter(',');
    mom->add_option("--times", times_s, "times tau_1 <= ... <= tau_m (dbm)")->delimiter(',');
    mom->add_option("--k", ks, "powers k_1..k_m")->required()->delimiter(',');
    mom->add_option("--beta", beta_s, "rational beta");
    mom->add_option("--tau", tau_s, "rational variance (corners)");
    EngineLimits lim;
    mom->add_option("--max-degree", lim.max_degree, "engine degree cap");
    mom->add_option("--max-terms", lim.max_terms, "engine state-size cap");

    // walks
    auto* wk = app.add_subcommand("walks", "walk expansion against the operator product");
    std::vector<int> marked;
    wk->add_option("--marked", marked)->required()->delimiter(',');
    wk->add_option("--k", ks)->required()->delimiter(',');
    wk->add_option("--rows", rows)->required()->delimiter(',');
    wk->add_option("--N", N)->required();
    wk->add_option("--beta", beta_s);
    wk->add_option("--tau", tau_s);

    // paths
    auto* pa = app.add_subcommand("paths", "lattice path counts and weighted sums");
    long X = 0, H = 0, G = 0, scale = 0;
    std::string floor = "nonnegative", pbeta;
    pa->add_option("--X", X)->required();
    pa->add_option("--H", H)->required();
    pa->add_option("--G", G)->required();
    pa->add_option("--floor", floor)->check(CLI::IsMember({"nonnegative", "above-start"}));
    pa->add_option("--beta", pbeta, "rational beta for the weighted sum I (omit for counts only)");
    pa->add_option("--scale", scale, "N in the down-step weight 1 + 2F/(beta N)");

    // bridges
    auto* br = app.add_subcommand("bridges", "Monte Carlo Brownian functionals I, I0, I00");
    std::string kind = "I00";
    double x = 1, h = 0, gg = 0, bbeta = 2;
    long budget = 100000;
    int mesh = 256;
    bool refine = false;
    br->add_option("--kind", kind)->check(CLI::IsMember({"I", "I0", "I00"}));
    br->add_option("--x", x);
    br->add_option("--h", h);
    br->add_option("--g", gg);
    br->add_option("--beta", bbeta, "beta (inf for the kernel alone)");
    br->add_option("--budget", budget);
    br->add_option("--mesh", mesh);
    br->add_flag("--refine", refine, "repeat at twice the mesh");

    // lbeta
    auto* lb = app.add_subcommand("lbeta", "stratified truncated L_beta with epsilon extrapolation");
    std::vector<double> kappa{1}, taus{0}, eps{0.4, 0.2, 0.1};
    int delta_max = 2;
    long lbudget = 100000;
    int lmesh = 128;
    lb->add_option("--kappa", kappa)->delimiter(',');
    lb->add_option("--taus", taus)->delimiter(',');
    lb->add_option("--beta", bbeta);
    lb->add_option("--epsilon", eps, "one or more cutoffs")->delimiter(',');
    lb->add_option("--delta-max", delta_max);
    lb->add_option("--budget", lbudget, "samples per stratum");
    lb->add_option("--mesh", lmesh);

    // sample
    auto* sa = app.add_subcommand("sample", "raw samples of GbE, GbE corners or DBM");
    std::string model = "gbe";
    double stau = 1, T = 1, dt = 1e-3;
    long count = 1;
    std::vector<double> out_times;
    sa->add_option("--model", model)->check(CLI::IsMember({"gbe", "corners", "dbm"}));
    sa->add_option("--N", N)->required();
    sa->add_option("--beta", bbeta);
    sa->add_option("--tau", stau, "variance (gbe, corners)");
    sa->add_option("--T", T, "horizon (dbm)");
    sa->add_option("--dt", dt, "time step (dbm)");
    sa->add_option("--times", out_times, "output times (dbm, default T)")->delimiter(',');
    sa->add_option("--count", count);

    // convergence
    auto* cv = app.add_subcommand("convergence", "exact edge-scaled moments across N");
    std::vector<int> Ns{16, 32, 64};
    cv->add_option("--Ns", Ns)->delimiter(',');
    cv->add_option("--kappa", kappa)->delimiter(',');
    cv->add_option("--taus", taus)->delimiter(',');
    cv->add_option("--beta", beta_s);

    // selftest
    auto* st = app.add_subcommand("selftest", "acceptance criteria A1..A11");
    std::string tier = "fast";
    std::vector<std::string> only;
    st->add_option("--tier", tier)->check(CLI::IsMember({"fast", "full"}));
    st->add_option("--only", only, "criterion ids")->delimiter(',');

    // replay
    auto* rp = app.add_subcommand("replay", "re-run the command recorded in a manifest");
    std::string manifest_in;
    rp->add_option("file", manifest_in)->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (rp->parsed()) {
        std::ifstream f(manifest_in);
        const json m = json::parse(f);
        if (m.value("version", "") != AIRY_VERSION)
            std::cerr << "warning: manifest version " << m.value("version", "") << " differs from " << AIRY_VERSION
                      << '\n';
        std::vector<std::string> args{"airy"};
        for (const auto& a : m.at("argv")) args.push_back(a.get<std::string>());
        if (!g.output.empty()) args.insert(args.end(), {"--output", g.output});
        if (!g.manifest.empty()) args.insert(args.end(), {"--manifest", g.manifest});
        std::vector<const char*> ptrs;
        for (const auto& a : args) ptrs.push_back(a.c_str());
        return run(static_cast<int>(ptrs.size()), ptrs.data());
    }

    CLI::App* active = app.get_subcommands().front();
    write_manifest(g, resolved_argv(app, *active));
    Sink sink(g.output, g.format);

    if (mom->parsed()) {
        const Rational beta = parse_rational(beta_s);
        json rec{{"mode", mode}, {"N", N}, {"k", ks}, {"beta", to_fraction_string(beta)}};
        Rational v;
        if (mode == "corners") {
            require(times_s.empty(), "corners mode takes --rows, not --times");
            if (rows.empty()) rows.assign(ks.size(), N);
            const Rational tau = parse_rational(tau_s);
            v = corners_moment(ks, rows, N, beta, tau, lim);
            rec["rows"] = rows;
            rec["tau"] = to_fraction_string(tau);
        } else {
            require(rows.empty(), "dbm mode takes --times, not --rows");
            const auto times = parse_rationals(times_s);
            v = dbm_moment(ks, times, N, beta, lim);
            std::vector<std::string> ts;
            for (const auto& t : times) ts.push_back(to_fraction_string(t));
            rec["times"] = ts;
        }
        rec["value"] = rational_json(v);
        sink.write(rec);
    } else if (wk->parsed()) {
        const auto c = expansion_check(marked, ks, rows, N, parse_rational(beta_s), parse_rational(tau_s));
        sink.write({{"marked", marked}, {"k", ks}, {"rows", rows}, {"N", N}, {"formula", c.formula},
                    {"walks", c.walks}, {"walk_sum", rational_json(c.walk_sum)},
                    {"operator_value", rational_json(c.operator_value)}, {"equal", c.equal}});
    } else if (pa->parsed()) {
        const PathCountQuery q{X, H, G, floor == "nonnegative" ? FloorMode::Nonnegative : FloorMode::StayAboveStart};
        const BigInt c = count_paths(q);
        json rec{{"X", X}, {"H", H}, {"G", G}, {"floor", floor}};
        if (c.fits_slong_p())
            rec["count"] = c.get_si();
        else
            rec["count"] = c.get_str();
        if (!pbeta.empty()) {
            require(scale >= 1, "--scale N is required with --beta");
            const std::optional<Rational> b =
                pbeta == "inf" ? std::nullopt : std::optional<Rational>(parse_rational(pbeta));
            rec["I"] = rational_json(weighted_sum_I_exact(q, b, scale));
        }
        sink.write(rec);
    } else if (br->parsed()) {
        FunctionalEstimate e;
        if (kind == "I")
            e = I_mc(x, h, gg, bbeta, budget, g.seed, mesh, refine);
        else if (kind == "I0")
            e = I0_mc(x, h, bbeta, budget, g.seed, mesh, refine);
        else
            e = I00_mc(x, bbeta, budget, g.seed, mesh, refine);
        sink.write({{"kind", kind}, {"x", x}, {"h", h}, {"g", gg}, {"beta", bbeta}, {"estimate", estimate_json(e)}});
    } else if (lb->parsed()) {
        std::vector<double> vals, errs;
        json per_eps = json::array();
        for (double e : eps) {
            LQuery q;
            q.m = static_cast<int>(kappa.size());
            q.kappa = kappa;
            q.taus = taus;
            q.beta = bbeta;
            q.epsilon = e;
            q.delta_max = delta_max;
            q.mc_budget = lbudget;
            q.seed = g.seed;
            q.mesh = lmesh;
            const auto r = L_beta_truncated(q);
            json strata = json::array();
            for (const auto& s : r.strata)
                strata.push_back({{"u", s.stratum.u}, {"delta_pattern", s.stratum.describe()},
                                  {"estimate", s.estimate.mean}, {"stderr", s.estimate.stderr_},
                                  {"n", s.estimate.n_samples}, {"n_nonzero", s.n_nonzero}, {"flagged", s.flagged}});
            per_eps.push_back({{"epsilon", e}, {"strata", strata},
                               {"total", {{"mean", r.total.mean}, {"stderr", r.total.stderr_}}}});
            vals.push_back(r.total.mean);
            errs.push_back(r.total.stderr_);
        }
        json rec{{"query",
                  {{"kappa", kappa}, {"taus", taus}, {"beta", bbeta}, {"delta_max", delta_max},
                   {"budget", lbudget}, {"mesh", lmesh}}},
                 {"runs", per_eps}};
        if (eps.size() >= 3) {
            const auto xr = epsilon_extrapolate(eps, vals, errs);
            rec["extrapolated"] = {{"value", xr.value}, {"uncertainty", xr.uncertainty}, {"slope", xr.slope},
                                   {"monotone", xr.monotone}};
        }
        sink.write(rec);
    } else if (sa->parsed()) {
        require(count >= 1, "--count must be positive");
        Rng rng(g.seed);
        for (long s = 0; s < count; ++s) {
            if (model == "gbe") {
                const auto sp = sample_gbe(N, bbeta, stau, rng);
                for (int i = 0; i < N; ++i)
                    sink.write({{"sample", s}, {"level", N}, {"index", i + 1}, {"value", sp.values[i]}});
            } else if (model == "corners") {
                const auto c = sample_gbe_corners(N, bbeta, stau, rng);
                for (int n = N; n >= 1; --n)
                    for (int i = 0; i < n; ++i)
                        sink.write({{"sample", s}, {"level", n}, {"index", i + 1}, {"value", c.rows[n - 1][i]}});
            } else {
                const auto p = simulate_dbm(N, bbeta, T, dt, rng, out_times);
                for (std::size_t j = 0; j < p.times.size(); ++j)
                    for (int i = 0; i < N; ++i)
                        sink.write({{"sample", s}, {"level", p.times[j]}, {"index", i + 1}, {"value", p.states[j][i]}});
            }
        }
    } else if (cv->parsed()) {
        const Rational beta = parse_rational(beta_s);
        double prev = NAN;
        for (int n : Ns) {
            const auto e = scaled_edge_moment(n, kappa, taus, beta);
            json rec{{"N", n}, {"powers", e.powers}, {"rows", e.rows}, {"value", e.value},
                     {"diff", std::isnan(prev) ? json(nullptr) : json(e.value - prev)}};
            prev = e.value;
            sink.write(rec);
        }
    } else if (st->parsed()) {
        bool all = true;
        run_acceptance(tier == "full" ? Tier::Full : Tier::Fast, only, g.seed, [&](const CriterionResult& r) {
            all = all && r.pass;
            sink.write({{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail}});
            std::cerr << r.id << (r.pass ? " PASS " : " FAIL ") << r.seconds << " s\n";
        });
        return all ? 0 : 3;
    }
    return 0;
}

int run(int argc, const char* const* argv) {
    try {
        return run_checked(argc, argv);
    } catch (const ResourceError& e) {
        std::cerr << "resource limit: " << e.what() << '\n';
        return 2;
    } catch (const ArgumentError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "invalid manifest: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
