#include "mixchan/report.hpp"

#include <cstdio>
#include <fstream>

#include "mixchan/errors.hpp"

namespace mixchan {

ojson manifest_to_json(const RunManifest& manifest) {
    ojson doc;
    doc["command"] = manifest.command;
    doc["inputs"] = manifest.inputs;
    ojson cfg;
    cfg["max_iterations"] = manifest.config.max_iterations;
    cfg["rel_loglik_tol"] = manifest.config.rel_loglik_tol;
    cfg["restarts"] = manifest.config.restarts;
    cfg["seed"] = manifest.config.seed;
    cfg["init_strategy"] = init_strategy_name(manifest.config.init_strategy);
    cfg["weight_floor"] = manifest.config.weight_floor;
    cfg["variance_floor"] = manifest.config.variance_floor;
    doc["config"] = std::move(cfg);
    doc["args"] = manifest.args;
    doc["binning"] = manifest.binning;
    doc["output_dir"] = manifest.output_dir;
    doc["emitted_files"] = manifest.emitted_files;
    return doc;
}

FitConfig fit_config_from_json(const ojson& doc) {
    FitConfig config;
    config.max_iterations = doc.at("max_iterations").get<std::size_t>();
    config.rel_loglik_tol = doc.at("rel_loglik_tol").get<double>();
    config.restarts = doc.at("restarts").get<std::size_t>();
    config.seed = doc.at("seed").get<std::uint64_t>();
    config.init_strategy =
        init_strategy_from_name(doc.at("init_strategy").get<std::string>());
    config.weight_floor = doc.at("weight_floor").get<double>();
    config.variance_floor = doc.at("variance_floor").get<double>();
    config.validate();
    return config;
}

ojson metrics_to_json(const MetricReport& metrics) {
    ojson doc;
    doc["wmrd"] = metrics.wmrd;
    doc["kl_nats"] = metrics.kl_divergence;
    doc["ks_stat"] = metrics.ks_statistic;
    doc["ks_critical"] = metrics.ks_critical;
    doc["ks_passed"] = metrics.ks_passed;
    doc["bin_count"] = metrics.bin_count;
    return doc;
}

ojson report_model_json(const MixtureModel& model) {
    ojson doc;
    doc["family"] = family_name(model.family());
    doc["components"] = ojson::array();
    for (const Component& c : model.components()) {
        ojson jc;
        jc["weight"] = c.weight;
        jc["p1"] = param1(c.params);
        jc["p2"] = param2(c.params);
        doc["components"].push_back(std::move(jc));
    }
    return doc;
}

ojson fit_report_json(const RunManifest& manifest, const FitReport& fit,
                      const std::optional<GammaMleBaseline>& baseline) {
    ojson doc;
    doc["schema_version"] = kReportSchemaVersion;
    doc["manifest"] = manifest_to_json(manifest);
    doc["model"] = report_model_json(fit.model);
    doc["loglik_trace"] = fit.loglik_trace;
    doc["converged"] = fit.converged;
    doc["iterations"] = fit.iterations;
    doc["restart_index"] = fit.restart_index;
    if (fit.metrics.has_value()) {
        doc["metrics"] = metrics_to_json(*fit.metrics);
    }
    if (baseline.has_value()) {
        ojson jb;
        jb["model"] = report_model_json(baseline->model);
        jb["loglik"] = baseline->loglik;
        jb["metrics"] = metrics_to_json(baseline->metrics);
        doc["mle_baseline"] = std::move(jb);
    }
    return doc;
}

std::string render_plot_data(const Histogram& hist, const MixtureModel& model,
                             std::size_t grid_points) {
    std::string out;
    out.reserve(64 * (hist.bin_count() + grid_points));
    char buf[80];

    const double total = static_cast<double>(hist.total_count());
    out += "# histogram: bin_center density\n";
    for (std::size_t b = 0; b < hist.bin_count(); ++b) {
        const double width = hist.edges[b + 1] - hist.edges[b];
        const double center = 0.5 * (hist.edges[b] + hist.edges[b + 1]);
        const double density =
            total > 0.0 ? static_cast<double>(hist.counts[b]) / (total * width) : 0.0;
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", center, density);
        out += buf;
    }

    out += "\n# fitted pdf: x pdf\n";
    const double lo = hist.edges.front();
    const double hi = hist.edges.back();
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double x =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", x, mixture_pdf(model, x));
        out += buf;
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DomainError("cannot write file: " + path.string());
    }
    out << content;
}

void write_json_file(const std::filesystem::path& path, const ojson& doc) {
    write_text_file(path, doc.dump(2) + "\n");
}

}  // namespace mixchan
