#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mixchan/errors.hpp"
#include "mixchan/estimation.hpp"
#include "mixchan/gof.hpp"
#include "mixchan/ingest.hpp"
#include "mixchan/report.hpp"

namespace fs = std::filesystem;
using namespace mixchan;

namespace {

struct CommonOpts {
    std::string input;
    std::string family = "gamma";
    std::size_t components = 1;
    FitConfig config;
    std::string bins = "fd";
    std::string out_dir = ".";
    unsigned threads = 1;
    std::vector<double> band;  // [f_lo, f_hi] when given
    std::string init = "quantile";
};

Binning binning_from_flag(const std::string& flag) {
    if (flag == "fd" || flag == "freedman-diaconis") {
        return Binning::freedman_diaconis();
    }
    std::size_t b = 0;
    try {
        std::size_t pos = 0;
        b = std::stoul(flag, &pos);
        if (pos != flag.size()) {
            throw std::invalid_argument(flag);
        }
    } catch (const std::exception&) {
        throw DomainError("--bins must be 'fd' or a bin count, got '" + flag + "'");
    }
    if (b < 2 || b > 65536) {
        throw DomainError("--bins must lie in [2, 65536], got '" + flag + "'");
    }
    return Binning::fixed(b);
}

std::vector<double> load_samples(const std::string& input, const std::vector<double>& band) {
    std::vector<double> samples;
    if (detect_input_kind(input) == InputKind::sweep) {
        Dataset ds = parse_sweep(fs::path(input));
        if (band.size() == 2) {
            ds = filter_band(ds, band[0], band[1]);
        }
        samples = to_power_samples(ds).values;
    } else {
        samples = read_sample_file(input);
        for (double v : samples) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw DomainError("input samples must be positive and finite");
            }
        }
    }
    return samples;
}

RunManifest make_manifest(const std::string& command, const CommonOpts& opts,
                          std::map<std::string, std::string> args,
                          std::vector<std::string> emitted) {
    RunManifest manifest;
    manifest.command = command;
    manifest.inputs = {opts.input};
    manifest.config = opts.config;
    if (opts.band.size() == 2) {
        args["band"] = std::to_string(opts.band[0]) + "," + std::to_string(opts.band[1]);
    }
    manifest.args = std::move(args);
    manifest.binning = binning_from_flag(opts.bins).describe();
    manifest.output_dir = opts.out_dir;
    manifest.emitted_files = std::move(emitted);
    return manifest;
}

std::optional<GammaMleBaseline> gamma_baseline(Family family,
                                               std::span<const double> samples,
                                               const Binning& binning) {
    if (family != Family::gamma) {
        return std::nullopt;
    }
    MixtureModel model({Component{1.0, gamma_mle(samples)}});
    const double loglik = log_likelihood(model, samples);
    MetricReport metrics = evaluate_fit(model, samples, binning);
    return GammaMleBaseline{std::move(model), loglik, std::move(metrics)};
}

int cmd_fit(const CommonOpts& opts) {
    const Family family = family_from_name(opts.family);
    const Binning binning = binning_from_flag(opts.bins);
    const std::vector<double> samples = load_samples(opts.input, opts.band);

    FitReport fit = em_fit(samples, family, opts.components, opts.config, opts.threads);
    fit.metrics = evaluate_fit(fit.model, samples, binning);
    const std::optional<GammaMleBaseline> baseline = gamma_baseline(family, samples, binning);

    const RunManifest manifest = make_manifest(
        "fit", opts,
        {{"family", opts.family}, {"components", std::to_string(opts.components)}},
        {"fit_report.json", "fit_model.json", "fit_plot.txt"});

    fs::create_directories(opts.out_dir);
    const fs::path out(opts.out_dir);
    write_json_file(out / "fit_report.json", fit_report_json(manifest, fit, baseline));
    write_model(fit.model, out / "fit_model.json");
    write_text_file(out / "fit_plot.txt",
                    render_plot_data(build_histogram(samples, binning), fit.model));

    std::cout << "fit: " << opts.family << " m=" << opts.components
              << " loglik=" << fit.final_loglik() << " kl=" << fit.metrics->kl_divergence
              << " -> " << (out / "fit_report.json").string() << "\n";
    return 0;
}

int cmd_compare(const CommonOpts& opts, const std::string& families_csv) {
    const Binning binning = binning_from_flag(opts.bins);
    const std::vector<double> samples = load_samples(opts.input, opts.band);

    std::vector<std::string> family_names;
    std::size_t pos = 0;
    while (pos <= families_csv.size()) {
        const std::size_t comma = families_csv.find(',', pos);
        const std::string name = families_csv.substr(
            pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!name.empty()) {
            family_names.push_back(name);
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (family_names.empty()) {
        throw DomainError("--families must name at least one family");
    }

    struct Entry {
        std::string family;
        FitReport report;
    };
    std::vector<Entry> entries;
    std::vector<std::pair<std::string, std::string>> failures;
    for (const std::string& name : family_names) {
        try {
            const Family family = family_from_name(name);
            FitReport report = em_fit(samples, family, opts.components, opts.config,
                                      opts.threads);
            report.metrics = evaluate_fit(report.model, samples, binning);
            entries.push_back(Entry{name, std::move(report)});
        } catch (const Error& e) {
            failures.emplace_back(name, e.what());
            std::cerr << "mixchan compare: " << name << " failed: " << e.what() << "\n";
        }
    }

    if (entries.empty()) {
        throw Error("every family failed; no report written");
    }

    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.report.metrics->kl_divergence < b.report.metrics->kl_divergence;
    });

    const RunManifest manifest = make_manifest(
        "compare", opts,
        {{"families", families_csv}, {"components", std::to_string(opts.components)}},
        {"compare_report.json"});

    ojson doc;
    doc["schema_version"] = kReportSchemaVersion;
    doc["manifest"] = manifest_to_json(manifest);
    doc["ranking"] = ojson::array();
    for (const Entry& e : entries) {
        ojson je;
        je["family"] = e.family;
        je["model"] = report_model_json(e.report.model);
        je["loglik"] = e.report.final_loglik();
        je["converged"] = e.report.converged;
        je["metrics"] = metrics_to_json(*e.report.metrics);
        doc["ranking"].push_back(std::move(je));
    }
    doc["failures"] = ojson::array();
    for (const auto& [name, what] : failures) {
        doc["failures"].push_back(ojson{{"family", name}, {"error", what}});
    }

    fs::create_directories(opts.out_dir);
    write_json_file(fs::path(opts.out_dir) / "compare_report.json", doc);

    for (const Entry& e : entries) {
        std::cout << "compare: " << e.family << " kl=" << e.report.metrics->kl_divergence
                  << " wmrd=" << e.report.metrics->wmrd
                  << (e.report.metrics->ks_passed ? " ks=passed" : " ks=failed") << "\n";
    }
    return 0;
}

int cmd_select(const CommonOpts& opts, std::size_t max_components) {
    const Family family = family_from_name(opts.family);
    const Binning binning = binning_from_flag(opts.bins);
    const std::vector<double> samples = load_samples(opts.input, opts.band);

    SelectionResult sel =
        select_components(samples, family, 1, max_components, opts.config, opts.threads);

    std::vector<std::string> emitted = {"select_report.json"};
    for (const SelectionEntry& entry : sel.entries) {
        emitted.push_back("select_fit_m" + std::to_string(entry.m) + ".json");
    }
    const RunManifest manifest = make_manifest(
        "select", opts,
        {{"family", opts.family}, {"max_components", std::to_string(max_components)}},
        std::move(emitted));

    fs::create_directories(opts.out_dir);
    const fs::path out(opts.out_dir);

    ojson doc;
    doc["schema_version"] = kReportSchemaVersion;
    doc["manifest"] = manifest_to_json(manifest);
    doc["best_m"] = sel.best_m;
    doc["entries"] = ojson::array();
    for (SelectionEntry& entry : sel.entries) {
        entry.report.metrics = evaluate_fit(entry.report.model, samples, binning);
        const std::string file = "select_fit_m" + std::to_string(entry.m) + ".json";
        write_json_file(out / file, fit_report_json(manifest, entry.report, std::nullopt));
        ojson je;
        je["m"] = entry.m;
        je["bic"] = entry.bic;
        je["loglik"] = entry.report.final_loglik();
        je["converged"] = entry.report.converged;
        je["report_file"] = file;
        doc["entries"].push_back(std::move(je));
    }
    doc["failures"] = sel.failures;
    write_json_file(out / "select_report.json", doc);

    std::cout << "select: best_m=" << sel.best_m << " of 1.." << max_components << " -> "
              << (out / "select_report.json").string() << "\n";
    return 0;
}

int cmd_synth(const std::string& model_path, std::size_t n, std::uint64_t seed,
              const std::string& out_path) {
    const MixtureModel model = read_model(model_path);
    const std::vector<double> samples = mixture_sample(model, n, seed);
    std::string content;
    content.reserve(samples.size() * 24);
    char buf[48];
    for (double v : samples) {
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        content += buf;
    }
    write_text_file(out_path, content);
    std::cout << "synth: wrote " << n << " samples -> " << out_path << "\n";
    return 0;
}

void add_common_fit_flags(CLI::App* cmd, CommonOpts& opts, bool with_family) {
    cmd->add_option("input", opts.input, "sweep file or raw power-sample file")
        ->required();
    if (with_family) {
        cmd->add_option("--family", opts.family, "distribution family")
            ->check(CLI::IsMember({"gamma", "gaussian", "weibull"}));
    }
    cmd->add_option("--restarts", opts.config.restarts, "independent EM restarts");
    cmd->add_option("--seed", opts.config.seed, "base RNG seed")->envname("MIXCHAN_SEED");
    cmd->add_option("--bins", opts.bins, "'fd' or a fixed bin count");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--threads", opts.threads, "parallel restarts (does not change results)");
    cmd->add_option("--band", opts.band, "keep sweep records in [LO, HI] Hz")
        ->expected(2);
    cmd->add_option("--max-iterations", opts.config.max_iterations, "EM iteration cap");
    cmd->add_option("--tol", opts.config.rel_loglik_tol, "relative log-likelihood tolerance");
    cmd->add_option("--init", opts.init, "initialization strategy")
        ->check(CLI::IsMember({"quantile", "random-responsibility"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-mixture modeling of wideband received-power measurements"};
    app.require_subcommand(1);

    CommonOpts fit_opts;
    CLI::App* fit = app.add_subcommand("fit", "fit one mixture model and report metrics");
    add_common_fit_flags(fit, fit_opts, true);
    fit->add_option("--components", fit_opts.components, "number of mixture components")
        ->check(CLI::Range(std::size_t{1}, std::size_t{16}));

    CommonOpts cmp_opts;
    std::string families_csv = "gamma,gaussian,weibull";
    CLI::App* compare =
        app.add_subcommand("compare", "fit several families and rank them by KL");
    add_common_fit_flags(compare, cmp_opts, false);
    compare->add_option("--families", families_csv, "comma-separated family list");
    compare->add_option("--components", cmp_opts.components,
                        "number of mixture components")
        ->check(CLI::Range(std::size_t{1}, std::size_t{16}));

    CommonOpts sel_opts;
    std::size_t max_components = 4;
    CLI::App* select =
        app.add_subcommand("select", "pick the component count by BIC");
    add_common_fit_flags(select, sel_opts, true);
    select->add_option("--max-components", max_components, "largest component count")
        ->check(CLI::Range(std::size_t{1}, std::size_t{8}));

    std::string synth_model;
    std::size_t synth_n = 0;
    std::uint64_t synth_seed = 1;
    std::string synth_out = "samples.txt";
    CLI::App* synth = app.add_subcommand("synth", "draw samples from a model file");
    synth->add_option("--model", synth_model, "model JSON file")->required();
    synth->add_option("--n", synth_n, "number of samples")
        ->required()
        ->check(CLI::PositiveNumber);
    synth->add_option("--seed", synth_seed, "RNG seed")->envname("MIXCHAN_SEED");
    synth->add_option("--out", synth_out, "output sample file");

    CLI11_PARSE(app, argc, argv);

    const std::string cmd_name = app.get_subcommands().front()->get_name();
    try {
        if (fit->parsed()) {
            fit_opts.config.init_strategy = init_strategy_from_name(fit_opts.init);
            return cmd_fit(fit_opts);
        }
        if (compare->parsed()) {
            cmp_opts.config.init_strategy = init_strategy_from_name(cmp_opts.init);
            return cmd_compare(cmp_opts, families_csv);
        }
        if (select->parsed()) {
            sel_opts.config.init_strategy = init_strategy_from_name(sel_opts.init);
            return cmd_select(sel_opts, max_components);
        }
        if (synth->parsed()) {
            return cmd_synth(synth_model, synth_n, synth_seed, synth_out);
        }
    } catch (const Error& e) {
        std::cerr << "mixchan " << cmd_name << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "mixchan " << cmd_name << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}
