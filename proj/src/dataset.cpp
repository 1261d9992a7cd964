#include "spectronet/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace spectronet {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, const std::string& context) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end) {
        throw DataError(context + ": cannot parse '" + s + "' as a number");
    }
    return v;
}

int parse_int(const std::string& s, const std::string& context) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw DataError(context + ": cannot parse '" + s + "' as an integer");
    }
    return v;
}

void format_double(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

} // namespace

std::vector<std::string> Dataset::target_ids() const {
    std::set<std::string> ids;
    for (const Spectrum& s : samples) ids.insert(s.target_id);
    return {ids.begin(), ids.end()};
}

std::map<std::string, std::vector<std::size_t>> Dataset::by_target() const {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        groups[samples[i].target_id].push_back(i);
    }
    return groups;
}

void Dataset::validate() const {
    if (sample_ids.size() != samples.size()) {
        throw UsageError("dataset: sample_ids/samples length mismatch");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i].validate();
        if (samples[i].wavelengths != grid) {
            throw DataError("dataset: sample '" + sample_ids[i] +
                            "' is not on the shared wavelength grid");
        }
    }
    auto groups = by_target();
    for (const auto& [target, label] : labels) {
        (void)label;
        if (groups.find(target) == groups.end()) {
            throw DataError("dataset: label for target '" + target +
                            "' has no samples");
        }
    }
}

SpectraTable read_spectra_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open spectra table '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("spectra table '" + path + "': empty file");
    }
    auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "wavelength") {
        throw DataError("spectra table '" + path +
                        "': header must start with 'wavelength' and name at "
                        "least one sample column");
    }
    SpectraTable t;
    t.ids.assign(header.begin() + 1, header.end());
    t.columns.resize(t.ids.size());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw DataError("spectra table '" + path + "' row " +
                            std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        }
        const std::string ctx = path + " row " + std::to_string(lineno);
        const double w = parse_double(fields[0], ctx);
        if (!t.grid.empty() && !(w > t.grid.back())) {
            throw DataError("spectra table '" + path + "' row " +
                            std::to_string(lineno) +
                            ": wavelength column not strictly increasing");
        }
        t.grid.push_back(w);
        for (std::size_t c = 0; c < t.ids.size(); ++c) {
            const double v = parse_double(fields[c + 1], ctx);
            if (!std::isfinite(v)) {
                throw DataError("spectra table '" + path + "' row " +
                                std::to_string(lineno) + ", sample '" +
                                t.ids[c] + "': non-finite value");
            }
            t.columns[c].push_back(v);
        }
    }
    if (t.grid.empty()) {
        throw DataError("spectra table '" + path + "': no data rows");
    }
    return t;
}

void write_spectra_table(
    const std::string& path, const std::vector<double>& grid,
    const std::vector<std::string>& ids,
    const std::vector<const std::vector<double>*>& columns) {
    if (ids.size() != columns.size()) {
        throw UsageError("write_spectra_table: ids/columns length mismatch");
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    std::string line = "wavelength";
    for (const auto& id : ids) {
        line += ',';
        line += id;
    }
    line += '\n';
    out << line;
    for (std::size_t r = 0; r < grid.size(); ++r) {
        line.clear();
        format_double(line, grid[r]);
        for (const auto* col : columns) {
            line += ',';
            format_double(line, (*col)[r]);
        }
        line += '\n';
        out << line;
    }
    if (!out) throw DataError("failed writing '" + path + "'");
}

Dataset load_dataset_files(const std::string& spectra_csv,
                           const std::string& manifest_csv) {
    SpectraTable t = read_spectra_table(spectra_csv);

    std::ifstream in(manifest_csv);
    if (!in) throw DataError("cannot open manifest '" + manifest_csv + "'");
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("manifest '" + manifest_csv + "': empty file");
    }
    auto header = split_csv_line(line);
    std::vector<std::string> expected = {"sample_id", "target_id",
                                         "location_id", "shot_index"};
    for (std::size_t i = 0; i < kNumOxides; ++i) {
        expected.push_back(kOxideNames[i]);
    }
    if (header != expected) {
        throw DataError(
            "manifest '" + manifest_csv +
            "': header must be sample_id,target_id,location_id,shot_index," +
            "SiO2,TiO2,Al2O3,FeOT,MgO,CaO,Na2O,K2O");
    }

    struct Row {
        std::string target;
        int location = 0;
        int shot = 0;
        std::optional<OxideVector> label;
    };
    std::map<std::string, Row> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != expected.size()) {
            throw DataError("manifest '" + manifest_csv + "' row " +
                            std::to_string(lineno) + ": expected " +
                            std::to_string(expected.size()) + " fields");
        }
        const std::string ctx = manifest_csv + " row " + std::to_string(lineno);
        Row row;
        row.target = fields[1];
        row.location = parse_int(fields[2], ctx);
        row.shot = parse_int(fields[3], ctx);
        const bool any_label = std::any_of(
            fields.begin() + 4, fields.end(),
            [](const std::string& f) { return !f.empty(); });
        if (any_label) {
            OxideVector label{};
            for (std::size_t i = 0; i < kNumOxides; ++i) {
                if (fields[4 + i].empty()) {
                    throw DataError(ctx + ": partial oxide label (all 8 "
                                          "values or none per row)");
                }
                label[i] = parse_double(fields[4 + i], ctx);
            }
            row.label = label;
        }
        if (!rows.emplace(fields[0], std::move(row)).second) {
            throw DataError(ctx + ": duplicate sample_id '" + fields[0] + "'");
        }
    }

    Dataset d;
    d.grid = t.grid;
    d.sample_ids = t.ids;
    d.samples.reserve(t.ids.size());
    for (std::size_t c = 0; c < t.ids.size(); ++c) {
        auto it = rows.find(t.ids[c]);
        if (it == rows.end()) {
            throw DataError("manifest '" + manifest_csv +
                            "': missing entry for sample '" + t.ids[c] + "'");
        }
        const Row& row = it->second;
        Spectrum s;
        s.wavelengths = t.grid;
        s.intensities = std::move(t.columns[c]);
        s.target_id = row.target;
        s.location_id = row.location;
        s.shot_index = row.shot;
        d.samples.push_back(std::move(s));
        if (row.label) {
            auto [lit, inserted] = d.labels.emplace(row.target, *row.label);
            if (!inserted && lit->second != *row.label) {
                throw DataError("manifest '" + manifest_csv +
                                "': conflicting labels for target '" +
                                row.target + "'");
            }
        }
    }
    for (const auto& [id, row] : rows) {
        (void)row;
        if (std::find(d.sample_ids.begin(), d.sample_ids.end(), id) ==
            d.sample_ids.end()) {
            throw DataError("manifest '" + manifest_csv + "': sample '" + id +
                            "' has no spectra column");
        }
    }
    d.validate();
    return d;
}

Dataset load_dataset(const std::string& dir, DatasetFormat format) {
    if (format != DatasetFormat::csv) {
        throw UsageError("load_dataset: unsupported format");
    }
    namespace fs = std::filesystem;
    return load_dataset_files((fs::path(dir) / "spectra.csv").string(),
                              (fs::path(dir) / "manifest.csv").string());
}

void save_dataset(const Dataset& d, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<const std::vector<double>*> cols;
    cols.reserve(d.samples.size());
    for (const Spectrum& s : d.samples) cols.push_back(&s.intensities);
    write_spectra_table((fs::path(dir) / "spectra.csv").string(), d.grid,
                        d.sample_ids, cols);

    std::ofstream out(fs::path(dir) / "manifest.csv");
    if (!out) throw DataError("cannot write manifest in '" + dir + "'");
    out << "sample_id,target_id,location_id,shot_index";
    for (const char* name : kOxideNames) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
        const Spectrum& s = d.samples[i];
        out << d.sample_ids[i] << ',' << s.target_id << ',' << s.location_id
            << ',' << s.shot_index;
        auto it = d.labels.find(s.target_id);
        if (it != d.labels.end()) {
            for (double v : it->second) {
                std::string field;
                format_double(field, v);
                out << ',' << field;
            }
        } else {
            for (std::size_t k = 0; k < kNumOxides; ++k) out << ',';
        }
        out << '\n';
    }
    if (!out) throw DataError("failed writing manifest in '" + dir + "'");
}

Dataset apply_mask(const Dataset& d, const WavelengthMask& m) {
    Dataset out;
    out.sample_ids = d.sample_ids;
    out.labels = d.labels;
    out.samples.reserve(d.samples.size());
    for (const Spectrum& s : d.samples) {
        out.samples.push_back(apply_mask(s, m));
    }
    out.grid = out.samples.empty() ? d.grid : out.samples.front().wavelengths;
    if (out.samples.empty()) {
        // Mask the bare grid so an empty dataset still round-trips.
        Spectrum g;
        g.wavelengths = d.grid;
        g.intensities.assign(d.grid.size(), 0.0);
        out.grid = apply_mask(g, m).wavelengths;
    }
    return out;
}

std::vector<Spectrum> group_shot_averages(const Dataset& d) {
    std::map<std::pair<std::string, int>, std::vector<Spectrum>> groups;
    for (const Spectrum& s : d.samples) {
        groups[{s.target_id, s.location_id}].push_back(s);
    }
    std::vector<Spectrum> out;
    out.reserve(groups.size());
    for (const auto& [key, members] : groups) {
        (void)key;
        out.push_back(shot_average(members));
    }
    return out;
}

void require_same_grid(const std::vector<double>& a,
                       const std::vector<double>& b,
                       const std::string& context) {
    if (a != b) {
        throw DataError(context + ": wavelength grids do not match (" +
                        std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + " bins)");
    }
}

} // namespace spectronet
