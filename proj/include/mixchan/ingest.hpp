#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "mixchan/mixture.hpp"

namespace mixchan {

using ojson = nlohmann::ordered_json;

/// One sweep point: frequency plus the complex forward transmission S21.
struct SweepRecord {
    double freq_hz;
    double s21_re;
    double s21_im;
};

/// A parsed sweep file. Frequencies are strictly increasing.
struct Dataset {
    std::vector<SweepRecord> records;
    double distance_m = 1.0;
    double p_tx_linear = 1.0;
    std::string label;
};

/// Linear received-power samples derived from a sweep.
struct PowerSamples {
    std::vector<double> values;  // all positive and finite
    std::string source_label;
    std::size_t dropped_zero_records = 0;
};

// TODO: touchstone (.s2p) adapter as a second format tag
enum class SweepFormat { native };

/// Native sweep format: optional `# key=value` header lines (distance_m,
/// p_tx_linear, label), then one `freq_hz,s21_re,s21_im` row per point
/// (comma or whitespace separated, scientific notation accepted).
Dataset parse_sweep(std::istream& in, SweepFormat format = SweepFormat::native);
Dataset parse_sweep(const std::filesystem::path& path,
                    SweepFormat format = SweepFormat::native);

void write_sweep(const Dataset& ds, std::ostream& out);
void write_sweep(const Dataset& ds, const std::filesystem::path& path);

/// Keeps records with f_lo <= freq <= f_hi, preserving order.
Dataset filter_band(const Dataset& ds, double f_lo, double f_hi);

/// |S21|^2 * P_tx per record. Zero-magnitude records are dropped and counted
/// (the fitting pipeline needs strictly positive powers).
PowerSamples to_power_samples(const Dataset& ds);

/// Model file schema: {"family": ..., "components": [{"weight", "shape",
/// "scale"}]} with "mean"/"std" for the gaussian family. Doubles are written
/// with enough digits to round-trip bit-exactly.
ojson model_to_json(const MixtureModel& model);
MixtureModel model_from_json(const ojson& doc);  // throws LoadError
void write_model(const MixtureModel& model, const std::filesystem::path& path);
MixtureModel read_model(const std::filesystem::path& path);

/// Raw power-sample file: one value per line, `#` comments allowed.
std::vector<double> read_sample_file(const std::filesystem::path& path);

enum class InputKind { sweep, samples };

/// A file whose first data row has 3 numeric columns is a sweep; 1 column
/// means raw power samples.
InputKind detect_input_kind(const std::filesystem::path& path);

}  // namespace mixchan
