// Command-line front end: simulate, params, spectrum, synth, analyze,
// construct-point, verify.  One config file drives every subcommand; every
// artifact embeds the config fingerprint and seed.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "rws/analysis.hpp"
#include "rws/config.hpp"
#include "rws/errors.hpp"
#include "rws/io.hpp"
#include "rws/mc.hpp"
#include "rws/params.hpp"
#include "rws/spectrum.hpp"
#include "rws/synth.hpp"
#include "rws/tree.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;
using namespace rws;

namespace {

json real_json(double v) {
    if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
    return json(v);
}

json scalar_json(const params::ScalarEstimate& s) {
    return json{{"value", real_json(s.value)}, {"exact", s.exact}};
}

json tail_json(const params::TailSum& t) {
    return json{{"value", real_json(t.value)},
                {"tail_bound", t.tail_bound},
                {"exact", t.exact},
                {"divergent", t.divergent}};
}

const char* series_name(params::SeriesClass c) {
    switch (c) {
        case params::SeriesClass::Convergent: return "convergent";
        case params::SeriesClass::Divergent: return "divergent";
        default: return "indeterminate";
    }
}

const char* regime_name(params::Regime r) {
    switch (r) {
        case params::Regime::SparseAppearance: return "sparse-appearance";
        case params::Regime::DenseAppearance: return "dense-appearance";
        case params::Regime::OutOfScope: return "out-of-scope";
        default: return "indeterminate";
    }
}

json params_json(const RunConfig& cfg, const params::DerivedParams& d) {
    json out;
    out["config_fingerprint"] = cfg.fingerprint_hex();
    out["seed"] = cfg.seed;
    out["J"] = d.J;
    out["h_low"] = d.h_low;
    out["h_high"] = real_json(d.h_high);
    out["gamma"] = d.gamma_seq;
    out["eta"] = d.eta_seq;
    out["phi0"] = d.phi0_seq;
    out["j_under"] =
        json{{"value", d.j_under.infinite ? json("inf") : json(d.j_under.value)},
             {"exact", d.j_under.exact}};
    out["theta"] = scalar_json(d.theta);
    out["varsigma_at_j_under"] = tail_json(d.varsigma_at_junder);
    const char* kind = d.h_tilde.kind == params::HTilde::Kind::Exact ? "exact"
                       : d.h_tilde.kind == params::HTilde::Kind::LowerBoundOnly
                           ? "lower-bound-only"
                           : "bracket";
    out["h_tilde"] = json{{"lo", real_json(d.h_tilde.lo)},
                          {"hi", real_json(d.h_tilde.hi)},
                          {"kind", kind}};
    out["eta_series"] = series_name(d.eta_class);
    out["regime"] = regime_name(d.regime.regime);
    out["regime_note"] = d.regime.note;
    return out;
}

json probability_json(const spectrum::ProbabilityReport& r) {
    const char* kind = nullptr;
    switch (r.kind) {
        case spectrum::ProbabilityReport::Kind::Exact: kind = "exact"; break;
        case spectrum::ProbabilityReport::Kind::One: kind = "one"; break;
        case spectrum::ProbabilityReport::Kind::Zero: kind = "zero"; break;
        case spectrum::ProbabilityReport::Kind::Interior: kind = "interior"; break;
        case spectrum::ProbabilityReport::Kind::Positive: kind = "positive"; break;
        case spectrum::ProbabilityReport::Kind::LessThanOne: kind = "less-than-one"; break;
        default: kind = "indeterminate";
    }
    json out{{"kind", kind}, {"certificate", r.certificate}};
    if (r.kind == spectrum::ProbabilityReport::Kind::Exact ||
        r.kind == spectrum::ProbabilityReport::Kind::One ||
        r.kind == spectrum::ProbabilityReport::Kind::Zero) {
        out["value"] = r.value;
        out["tail_bound"] = r.tail_bound;
    }
    return out;
}

json spectrum_json(const RunConfig& cfg, const spectrum::SpectrumPrediction& pred) {
    json out;
    out["config_fingerprint"] = cfg.fingerprint_hex();
    out["seed"] = cfg.seed;
    out["regime"] = regime_name(pred.regime);
    out["branch"] = pred.branch_note;
    json pieces = json::array();
    for (const auto& pt : pred.d.points)
        pieces.push_back(json{{"type", "point"}, {"h", real_json(pt.h)}, {"d", pt.d}});
    if (pred.d.linear) {
        pieces.push_back(json{{"type", "linear"},
                              {"h_from_open", pred.d.linear->h_from},
                              {"h_to", real_json(pred.d.linear->h_to)},
                              {"h_to_closed", pred.d.linear->to_closed},
                              {"h_tilde", real_json(pred.d.linear->h_tilde)}});
    }
    out["d"] = pieces;
    json cands = json::array();
    for (double c : pred.d_at_h_low) cands.push_back(real_json(c));
    out["d_at_h_low"] = cands;
    out["p_dim_neg_inf"] = probability_json(pred.p_dim_neg_inf);
    if (pred.p_theta_attained)
        out["p_theta_attained"] = probability_json(*pred.p_theta_attained);
    out["random_spectrum"] = pred.random_spectrum == spectrum::TriState::Yes   ? "yes"
                             : pred.random_spectrum == spectrum::TriState::No ? "no"
                                                                              : "indeterminate";
    return out;
}

tree::TreeSample obtain_tree(const RunConfig& cfg, const std::string& tree_path) {
    if (!tree_path.empty()) return io::read_tree(tree_path);
    return tree::sample_tree(*cfg.schedule, cfg.J, cfg.seed, cfg.depth_cap);
}

synth::Wavelet wavelet_by_name(const std::string& name) {
    if (name == "smooth" || name.empty()) return synth::Wavelet::meyer_smooth();
    if (name.rfind("poly", 0) == 0)
        return synth::Wavelet::meyer_polynomial(std::stoi(name.substr(4)));
    throw ConfigError("unknown wavelet '" + name + "' (smooth, poly1..poly4)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and verification laboratory for tree-driven random wavelet "
                 "series"};
    app.require_subcommand(1);

    std::string config_path, tree_path, out_path, wavelet_name = "smooth", format = "csv";
    std::string event_name = "s-empty";
    double target_h = 0.0, iso_h = 0.0, iso_eps = 0.0;
    bool with_beta = false;
    long long trials = 10000;
    int event_level = -1, event_level2 = -1, run_length = 0;

    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration file")->required();
    };

    auto* sim = app.add_subcommand("simulate", "sample a tree realization to disk");
    add_config(sim);
    sim->add_option("--out", out_path, "tree file (default <output_dir>/tree.hmtt)");

    auto* par = app.add_subcommand("params", "derived parameters as JSON");
    add_config(par);

    auto* spec = app.add_subcommand("spectrum", "theoretical spectrum prediction as JSON");
    add_config(spec);

    auto* syn = app.add_subcommand("synth", "synthesize a sample path");
    add_config(syn);
    syn->add_option("--tree", tree_path, "existing tree file (default: sample fresh)");
    syn->add_option("--out", out_path, "output path (default <output_dir>/path.<fmt>)");
    syn->add_option("--wavelet", wavelet_name, "smooth (default) or poly1..poly4");
    syn->add_option("--format", format, "csv or f64 (f64 adds a JSON sidecar)");

    auto* ana = app.add_subcommand("analyze", "pointwise exponent estimates");
    add_config(ana);
    ana->add_option("--tree", tree_path, "existing tree file (default: sample fresh)");
    ana->add_option("--out", out_path, "CSV path (default <output_dir>/holder.csv)");
    ana->add_option("--iso-h", iso_h, "iso-level target for cover counts");
    ana->add_option("--iso-eps", iso_eps, "iso-level tolerance (default 0.1 h_low)");
    ana->add_flag("--beta", with_beta, "add the oscillation-exponent column");

    auto* cp = app.add_subcommand("construct-point", "nested-interval point construction");
    add_config(cp);
    cp->add_option("--target", target_h, "target exponent")->required();
    cp->add_option("--tree", tree_path, "existing tree file (default: sample fresh)");
    cp->add_option("--out", out_path, "trace JSON path (default: stdout only)");

    auto* ver = app.add_subcommand("verify", "Monte Carlo event check against exact oracles");
    add_config(ver);
    ver->add_option("--event", event_name,
                    "s-empty | fresh-nonempty | subtree-survival | theta-cover-nonempty");
    ver->add_option("--trials", trials, "replicates (default 10000)");
    ver->add_option("--j", event_level, "event level (default J)");
    ver->add_option("--j2", event_level2, "upper level for fresh-nonempty (default J)");
    ver->add_option("--run-length", run_length,
                    "required terminal run for theta-cover-nonempty (default J+1)");

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig cfg = load_config(config_path);
        const KernelSchedule& schedule = *cfg.schedule;
        fs::create_directories(cfg.output_dir);

        if (sim->parsed()) {
            const auto t = tree::sample_tree(schedule, cfg.J, cfg.seed, cfg.depth_cap);
            const std::string path =
                out_path.empty() ? cfg.output_dir + "/tree.hmtt" : out_path;
            io::write_tree(path, t);
            json out{{"file", path},
                     {"J", cfg.J},
                     {"seed", cfg.seed},
                     {"config_fingerprint", cfg.fingerprint_hex()},
                     {"ones_at_max_level", t.count_ones(cfg.J)}};
            std::cout << out.dump(2) << '\n';
            return 0;
        }

        if (par->parsed()) {
            const auto d = params::derive(schedule, cfg.J, cfg.h_low, cfg.h_high);
            std::cout << params_json(cfg, d).dump(2) << '\n';
            return 0;
        }

        if (spec->parsed()) {
            const auto d = params::derive(schedule, cfg.J, cfg.h_low, cfg.h_high);
            const auto pred = spectrum::predict(schedule, d);
            std::cout << spectrum_json(cfg, pred).dump(2) << '\n';
            return 0;
        }

        if (syn->parsed()) {
            const auto t = obtain_tree(cfg, tree_path);
            const auto field = synth::coefficients(t, cfg.h_low, cfg.h_high);
            const auto w = wavelet_by_name(wavelet_name);
            synth::SynthOptions opts;
            opts.regularity_probe = cfg.probe_ceiling;
            const auto path = synth::synthesize(field, w, cfg.grid_log2, opts);
            std::string file = out_path;
            if (format == "csv") {
                if (file.empty()) file = cfg.output_dir + "/path.csv";
                io::write_path_csv(file, path);
            } else if (format == "f64") {
                if (file.empty()) file = cfg.output_dir + "/path.f64";
                io::write_path_f64(file, path);
                io::write_path_sidecar(file + ".json", path, cfg, cfg.h_low, cfg.h_high);
            } else {
                throw ConfigError("unknown format '" + format + "'");
            }
            json out{{"file", file},
                     {"n", path.values.size()},
                     {"tail_bound", path.tail_bound},
                     {"wavelet", path.wavelet},
                     {"config_fingerprint", cfg.fingerprint_hex()},
                     {"seed", cfg.seed}};
            std::cout << out.dump(2) << '\n';
            return 0;
        }

        if (ana->parsed()) {
            const auto t = obtain_tree(cfg, tree_path);
            const auto field = synth::coefficients(t, cfg.h_low, cfg.h_high);
            analysis::HolderOptions hopts{cfg.j_min, cfg.probe_ceiling};
            const auto hf = analysis::estimate_holder_field(field, cfg.grid_log2, hopts);
            Eigen::ArrayXd beta;
            std::vector<std::uint8_t> beta_defined;
            if (with_beta) {
                const std::vector<double> ts{0.0, 0.05 * cfg.h_low, 0.1 * cfg.h_low};
                beta = analysis::estimate_beta_field(field, cfg.grid_log2, ts, hopts,
                                                     &beta_defined);
            }
            const std::string file =
                out_path.empty() ? cfg.output_dir + "/holder.csv" : out_path;
            {
                std::ofstream os(file);
                if (!os) throw ConfigError("cannot open for writing: " + file);
                os << "# config_fingerprint=" << cfg.fingerprint_hex()
                   << " seed=" << cfg.seed << '\n';
                os << (with_beta ? "x,h_hat,beta_hat\n" : "x,h_hat\n");
                const auto N = hf.h.size();
                for (Eigen::Index i = 0; i < N; ++i) {
                    os << io::format_double(static_cast<double>(i) / static_cast<double>(N))
                       << ',' << io::format_double(hf.h[i]);
                    if (with_beta) {
                        os << ',';
                        if (beta_defined[static_cast<std::size_t>(i)])
                            os << io::format_double(beta[i]);
                    }
                    os << '\n';
                }
            }
            json out{{"file", file},
                     {"config_fingerprint", cfg.fingerprint_hex()},
                     {"seed", cfg.seed},
                     {"j_min", hf.j_min},
                     {"h_high_eff", hf.h_high_eff}};
            {
                std::vector<double> v(hf.h.data(), hf.h.data() + hf.h.size());
                std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
                out["median_h"] = v[v.size() / 2];
            }
            if (iso_h > 0.0) {
                const double eps = iso_eps > 0.0 ? iso_eps : 0.1 * cfg.h_low;
                const auto iso = analysis::iso_holder_sets(hf, iso_h, eps);
                json counts_e, counts_et;
                for (const auto& [lvl, c] : iso.counts_E) counts_e[std::to_string(lvl)] = c;
                for (const auto& [lvl, c] : iso.counts_Etilde)
                    counts_et[std::to_string(lvl)] = c;
                json iso_out{{"h", iso_h},
                             {"eps", eps},
                             {"counts_E", counts_e},
                             {"counts_Etilde", counts_et},
                             {"config_fingerprint", cfg.fingerprint_hex()},
                             {"seed", cfg.seed}};
                const std::string iso_file = cfg.output_dir + "/cover_counts.json";
                std::ofstream os(iso_file);
                os << iso_out.dump(2) << '\n';
                out["cover_counts"] = iso_file;
            }
            std::cout << out.dump(2) << '\n';
            return 0;
        }

        if (cp->parsed()) {
            const auto t = obtain_tree(cfg, tree_path);
            const auto d = params::derive(schedule, cfg.J, cfg.h_low, cfg.h_high);
            analysis::ConstructOptions copts;
            copts.j0_floor = cfg.j_min > 0 ? cfg.j_min : (cfg.J + 1) / 2;
            const auto pc = analysis::construct_point(t, schedule, cfg.h_low, target_h,
                                                      d.theta.value, copts);
            json steps = json::array();
            for (const auto& st : pc.steps)
                steps.push_back(json{{"level", st.level},
                                     {"rho", st.rho},
                                     {"lo", st.lo},
                                     {"length", st.length},
                                     {"anchor_level", st.anchor_level},
                                     {"anchor_offset", st.anchor_offset}});
            const char* status =
                pc.status == analysis::PointConstruction::Status::Success ? "success"
                : pc.status == analysis::PointConstruction::Status::FreshExhaustion
                    ? "fresh-vertex exhaustion"
                : pc.status == analysis::PointConstruction::Status::WidthExhaustion
                    ? "width exhaustion"
                    : "under-resolved";
            json out{{"status", status},
                     {"reason", pc.reason},
                     {"target_h", target_h},
                     {"j0", pc.j0},
                     {"levels_processed", pc.levels_processed},
                     {"steps", steps},
                     {"config_fingerprint", cfg.fingerprint_hex()},
                     {"seed", cfg.seed}};
            if (pc.status == analysis::PointConstruction::Status::Success) {
                out["y"] = pc.y;
                out["final_length"] = pc.final_length;
                const auto field = synth::coefficients(t, cfg.h_low, cfg.h_high);
                analysis::HolderOptions hopts{copts.j0_floor, cfg.probe_ceiling};
                out["estimate_at_y"] = analysis::estimate_holder(field, pc.y, hopts);
            }
            if (!out_path.empty()) {
                std::ofstream os(out_path);
                os << out.dump(2) << '\n';
            }
            std::cout << out.dump(2) << '\n';
            return pc.status == analysis::PointConstruction::Status::Success ? 0 : 1;
        }

        if (ver->parsed()) {
            const auto ev = mc::event_from_name(event_name);
            mc::EventParams ep;
            ep.level = event_level >= 0 ? event_level : cfg.J;
            ep.level2 = event_level2 >= 0 ? event_level2 : cfg.J;
            ep.run_length = run_length;
            if (ev == mc::Event::FreshRangeNonempty && event_level < 0) ep.level = 1;
            const auto r = mc::probability(schedule, cfg.J, ev, ep, trials, cfg.seed);
            json out{{"event", r.event},
                     {"trials", r.trials},
                     {"successes", r.successes},
                     {"p_hat", r.p_hat},
                     {"wilson99", json{{"lo", r.interval.lo}, {"hi", r.interval.hi}}},
                     {"config_fingerprint", cfg.fingerprint_hex()},
                     {"seed", cfg.seed}};
            bool has_oracle = false;
            double oracle = 0.0;
            if (ev == mc::Event::SLevelEmpty) {
                oracle = params::phi0(schedule, ep.level);
                has_oracle = true;
            } else if (ev == mc::Event::FreshRangeNonempty) {
                oracle =
                    1.0 - mc::fresh_absent_probability(schedule, cfg.J, ep.level, ep.level2);
                has_oracle = true;
            } else if (ev == mc::Event::ThetaCoverNonempty &&
                       (ep.run_length == 0 || ep.run_length == cfg.J + 1)) {
                oracle = mc::all_one_chain_probability(schedule, cfg.J);
                has_oracle = true;
            } else if (ev == mc::Event::SubtreeSurvival && ep.level == 0) {
                oracle = mc::all_one_chain_probability(schedule, cfg.J);
                has_oracle = true;
            }
            bool pass = true;
            if (has_oracle) {
                pass = r.interval.lo <= oracle && oracle <= r.interval.hi;
                out["oracle"] = oracle;
                out["oracle_in_interval"] = pass;
            }
            std::cout << out.dump(2) << '\n';
            return pass ? 0 : 1;
        }
    } catch (const AmbiguityError& e) {
        std::cerr << "[spectrum] ambiguity at boundary '" << e.boundary() << "': " << e.what()
                  << '\n';
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "[config] " << e.what() << '\n';
        return 1;
    } catch (const RangeError& e) {
        std::cerr << "[range] " << e.what() << '\n';
        return 1;
    } catch (const DomainError& e) {
        std::cerr << "[domain] " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "[error] " << e.what() << '\n';
        return 1;
    }
    return 0;
}
