#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mixchan/estimation.hpp"
#include "mixchan/ingest.hpp"

namespace mixchan {

inline constexpr int kReportSchemaVersion = 1;

/// Everything needed to reproduce a CLI run. Recorded verbatim in every
/// report; deliberately excludes execution details (thread counts) that must
/// not change the output.
struct RunManifest {
    std::string command;
    std::vector<std::string> inputs;
    FitConfig config;
    std::map<std::string, std::string> args;  // command-specific flags, e.g. family
    std::string binning;
    std::string output_dir;
    std::vector<std::string> emitted_files;
};

/// Single-Gamma Newton MLE computed alongside a gamma-family mixture fit.
struct GammaMleBaseline {
    MixtureModel model;
    double loglik;
    MetricReport metrics;
};

ojson manifest_to_json(const RunManifest& manifest);
FitConfig fit_config_from_json(const ojson& doc);

ojson metrics_to_json(const MetricReport& metrics);

/// Model block of a report: components as {weight, p1, p2}.
ojson report_model_json(const MixtureModel& model);

/// Full document for `fit`: schema_version, manifest, model, loglik_trace,
/// convergence fields, metrics, and the MLE baseline when one applies.
ojson fit_report_json(const RunManifest& manifest, const FitReport& fit,
                      const std::optional<GammaMleBaseline>& baseline);

/// Two-block plot data: histogram bin centers with densities, then the
/// fitted pdf on an evenly spaced grid across the histogram range.
std::string render_plot_data(const Histogram& hist, const MixtureModel& model,
                             std::size_t grid_points = 512);

void write_text_file(const std::filesystem::path& path, const std::string& content);
void write_json_file(const std::filesystem::path& path, const ojson& doc);

}  // namespace mixchan
