#include "mixchan/ingest.hpp"

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mixchan/channel.hpp"
#include "mixchan/errors.hpp"

namespace mixchan {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() &&
               (line[pos] == ',' || line[pos] == ' ' || line[pos] == '\t' ||
                line[pos] == '\r')) {
            ++pos;
        }
        if (pos >= line.size()) break;
        std::size_t end = pos;
        while (end < line.size() && line[end] != ',' && line[end] != ' ' &&
               line[end] != '\t' && line[end] != '\r') {
            ++end;
        }
        fields.push_back(line.substr(pos, end - pos));
        pos = end;
    }
    return fields;
}

bool parse_double(std::string_view field, double& out) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

double parse_double_or_throw(std::string_view field, std::size_t line_no,
                             const char* what) {
    double v = 0.0;
    if (!parse_double(field, v)) {
        throw ParseError("line " + std::to_string(line_no) + ": malformed " + what +
                         " '" + std::string(field) + "'", line_no);
    }
    return v;
}

// "key=value" header payload after the leading '#'.
bool header_kv(std::string_view line, std::string_view& key, std::string_view& value) {
    std::size_t pos = line.find_first_not_of(" \t", 1);
    if (pos == std::string_view::npos) return false;
    const std::size_t eq = line.find('=', pos);
    if (eq == std::string_view::npos) return false;
    key = line.substr(pos, eq - pos);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) {
        key.remove_suffix(1);
    }
    value = line.substr(eq + 1);
    while (!value.empty() && (value.front() == ' ' || value.front() == '\t')) {
        value.remove_prefix(1);
    }
    while (!value.empty() &&
           (value.back() == ' ' || value.back() == '\t' || value.back() == '\r')) {
        value.remove_suffix(1);
    }
    return true;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DomainError("cannot open file: " + path.string());
    }
    return in;
}

}  // namespace

Dataset parse_sweep(std::istream& in, SweepFormat format) {
    if (format != SweepFormat::native) {
        throw DomainError("parse_sweep: unsupported format tag");
    }
    Dataset ds;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (view.find_first_not_of(" \t\r") == std::string_view::npos) {
            continue;
        }
        if (view.front() == '#') {
            std::string_view key;
            std::string_view value;
            if (header_kv(view, key, value)) {
                if (key == "distance_m") {
                    ds.distance_m = parse_double_or_throw(value, line_no, "distance_m");
                } else if (key == "p_tx_linear") {
                    ds.p_tx_linear = parse_double_or_throw(value, line_no, "p_tx_linear");
                } else if (key == "label") {
                    ds.label = std::string(value);
                }
            }
            continue;
        }
        const auto fields = split_fields(view);
        if (fields.size() != 3) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 3 fields, got " +
                             std::to_string(fields.size()), line_no);
        }
        SweepRecord rec;
        rec.freq_hz = parse_double_or_throw(fields[0], line_no, "frequency");
        rec.s21_re = parse_double_or_throw(fields[1], line_no, "s21_re");
        rec.s21_im = parse_double_or_throw(fields[2], line_no, "s21_im");
        if (!(rec.freq_hz > 0.0)) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": frequency must be positive", line_no);
        }
        if (!ds.records.empty() && !(rec.freq_hz > ds.records.back().freq_hz)) {
            throw FormatError("line " + std::to_string(line_no) +
                              ": frequencies must be strictly increasing");
        }
        ds.records.push_back(rec);
    }
    if (ds.records.empty()) {
        throw DomainError("parse_sweep: no data rows");
    }
    if (!(ds.distance_m > 0.0)) {
        throw FormatError("parse_sweep: distance_m must be positive");
    }
    if (!(ds.p_tx_linear > 0.0)) {
        throw FormatError("parse_sweep: p_tx_linear must be positive");
    }
    return ds;
}

Dataset parse_sweep(const std::filesystem::path& path, SweepFormat format) {
    std::ifstream in = open_or_throw(path);
    return parse_sweep(in, format);
}

void write_sweep(const Dataset& ds, std::ostream& out) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.17g", ds.distance_m);
    out << "# distance_m=" << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", ds.p_tx_linear);
    out << "# p_tx_linear=" << buf << "\n";
    if (!ds.label.empty()) {
        out << "# label=" << ds.label << "\n";
    }
    for (const SweepRecord& rec : ds.records) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", rec.freq_hz, rec.s21_re,
                      rec.s21_im);
        out << buf << "\n";
    }
}

void write_sweep(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw DomainError("cannot write file: " + path.string());
    }
    write_sweep(ds, out);
}

Dataset filter_band(const Dataset& ds, double f_lo, double f_hi) {
    if (!(f_lo > 0.0) || !(f_lo < f_hi)) {
        throw DomainError("filter_band: need 0 < f_lo < f_hi");
    }
    Dataset out;
    out.distance_m = ds.distance_m;
    out.p_tx_linear = ds.p_tx_linear;
    out.label = ds.label;
    for (const SweepRecord& rec : ds.records) {
        if (rec.freq_hz >= f_lo && rec.freq_hz <= f_hi) {
            out.records.push_back(rec);
        }
    }
    if (out.records.empty()) {
        throw EmptyBandError("filter_band: no records in [" + std::to_string(f_lo) +
                             ", " + std::to_string(f_hi) + "] Hz");
    }
    return out;
}

PowerSamples to_power_samples(const Dataset& ds) {
    PowerSamples out;
    out.source_label = ds.label;
    out.values.reserve(ds.records.size());
    for (const SweepRecord& rec : ds.records) {
        const double p = received_power_from_s21({rec.s21_re, rec.s21_im}, ds.p_tx_linear);
        if (p > 0.0 && std::isfinite(p)) {
            out.values.push_back(p);
        } else {
            ++out.dropped_zero_records;
        }
    }
    if (out.values.empty()) {
        throw DegenerateDataError("to_power_samples: every record has zero magnitude");
    }
    return out;
}

ojson model_to_json(const MixtureModel& model) {
    ojson doc;
    doc["family"] = family_name(model.family());
    doc["components"] = ojson::array();
    for (const Component& c : model.components()) {
        ojson jc;
        jc["weight"] = c.weight;
        if (model.family() == Family::gaussian) {
            jc["mean"] = param1(c.params);
            jc["std"] = param2(c.params);
        } else {
            jc["shape"] = param1(c.params);
            jc["scale"] = param2(c.params);
        }
        doc["components"].push_back(std::move(jc));
    }
    return doc;
}

MixtureModel model_from_json(const ojson& doc) {
    try {
        const Family family = family_from_name(doc.at("family").get<std::string>());
        const ojson& jcomps = doc.at("components");
        if (!jcomps.is_array() || jcomps.empty()) {
            throw LoadError("model: components must be a non-empty array");
        }
        std::vector<Component> comps;
        comps.reserve(jcomps.size());
        for (const ojson& jc : jcomps) {
            const double weight = jc.at("weight").get<double>();
            double p1 = 0.0;
            double p2 = 0.0;
            if (family == Family::gaussian) {
                p1 = jc.at("mean").get<double>();
                p2 = jc.at("std").get<double>();
            } else {
                p1 = jc.at("shape").get<double>();
                p2 = jc.at("scale").get<double>();
            }
            comps.push_back(Component{weight, make_params(family, p1, p2)});
        }
        return MixtureModel(std::move(comps));
    } catch (const LoadError&) {
        throw;
    } catch (const std::exception& e) {
        // json access errors and mixture invariant violations both land here
        throw LoadError(std::string("model: ") + e.what());
    }
}

void write_model(const MixtureModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw DomainError("cannot write file: " + path.string());
    }
    out << model_to_json(model).dump(2) << "\n";
}

MixtureModel read_model(const std::filesystem::path& path) {
    std::ifstream in = open_or_throw(path);
    ojson doc;
    try {
        doc = ojson::parse(in);
    } catch (const std::exception& e) {
        throw LoadError("model file " + path.string() + ": " + e.what());
    }
    return model_from_json(doc);
}

std::vector<double> read_sample_file(const std::filesystem::path& path) {
    std::ifstream in = open_or_throw(path);
    std::vector<double> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (view.find_first_not_of(" \t\r") == std::string_view::npos ||
            view.front() == '#') {
            continue;
        }
        const auto fields = split_fields(view);
        if (fields.size() != 1) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": expected one value per line", line_no);
        }
        samples.push_back(parse_double_or_throw(fields[0], line_no, "sample"));
    }
    if (samples.empty()) {
        throw DomainError("sample file has no values: " + path.string());
    }
    return samples;
}

InputKind detect_input_kind(const std::filesystem::path& path) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    while (std::getline(in, line)) {
        std::string_view view(line);
        if (view.find_first_not_of(" \t\r") == std::string_view::npos ||
            view.front() == '#') {
            continue;
        }
        const auto fields = split_fields(view);
        double v = 0.0;
        bool numeric = !fields.empty();
        for (const auto f : fields) {
            numeric = numeric && parse_double(f, v);
        }
        if (numeric && fields.size() == 3) return InputKind::sweep;
        if (numeric && fields.size() == 1) return InputKind::samples;
        throw FormatError("cannot auto-detect input kind of " + path.string() +
                          " (first data row has " + std::to_string(fields.size()) +
                          " fields)");
    }
    throw DomainError("input file has no data rows: " + path.string());
}

}  // namespace mixchan
