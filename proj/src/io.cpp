#include "tct/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "tct/errors.hpp"

namespace tct {

namespace {

constexpr char kMagic[4] = {'T', 'C', 'T', '1'};

void append_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

std::uint64_t read_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | p[i];
    }
    return v;
}

double read_f64_le(const unsigned char* p) {
    const std::uint64_t bits = read_u64_le(p);
    double d;
    std::memcpy(&d, &bits, sizeof(d));
    return d;
}

void append_f64_le(std::string& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    append_u64_le(out, bits);
}

std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

double parse_sample(const std::string& field, std::size_t line, std::size_t column) {
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(field, &consumed);
    } catch (const std::exception&) {
        throw IoError("csv: cannot parse '" + field + "' at line " + std::to_string(line) +
                      ", column " + std::to_string(column + 1));
    }
    if (consumed != field.size()) {
        throw IoError("csv: trailing characters in '" + field + "' at line " +
                      std::to_string(line));
    }
    if (!std::isfinite(value)) {
        throw IoError("csv: non-finite sample at line " + std::to_string(line) + ", column " +
                      std::to_string(column + 1));
    }
    return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(current);
            current.clear();
        } else if (ch != '\r') {
            current.push_back(ch);
        }
    }
    fields.push_back(current);
    return fields;
}

}  // namespace

CsvRecording read_csv_timeseries(const std::filesystem::path& path, double sampling_rate) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("csv: '" + path.string() + "' is empty");
    }
    const std::vector<std::string> names = split_csv_line(line);
    const std::size_t n_channels = names.size();
    if (n_channels == 0 || names[0].empty()) {
        throw IoError("csv: missing header row in '" + path.string() + "'");
    }

    std::vector<std::vector<double>> columns(n_channels);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != n_channels) {
            throw IoError("csv: line " + std::to_string(line_no) + " has " +
                          std::to_string(fields.size()) + " fields, expected " +
                          std::to_string(n_channels));
        }
        for (std::size_t c = 0; c < n_channels; ++c) {
            columns[c].push_back(parse_sample(fields[c], line_no, c));
        }
    }
    const std::size_t n_times = columns[0].size();
    if (n_times < 2) {
        throw IoError("csv: '" + path.string() + "' has fewer than 2 samples");
    }

    TimeSeriesEnsemble ensemble(1, n_channels, n_times, sampling_rate, 0);
    for (std::size_t c = 0; c < n_channels; ++c) {
        auto dst = ensemble.series(0, c);
        std::copy(columns[c].begin(), columns[c].end(), dst.begin());
    }
    return {std::move(ensemble), names};
}

TimeSeriesEnsemble read_tct(const std::filesystem::path& path, double sampling_rate) {
    const std::string bytes = read_file_bytes(path);
    if (bytes.size() < 4 + 3 * 8) {
        throw IoError("tct: '" + path.string() + "' too short for the header");
    }
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw IoError("tct: bad magic in '" + path.string() + "' (expected TCT1)");
    }
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + 4;
    const std::uint64_t R = read_u64_le(p);
    const std::uint64_t C = read_u64_le(p + 8);
    const std::uint64_t T = read_u64_le(p + 16);
    if (R == 0 || C == 0 || T == 0) {
        throw IoError("tct: zero dimension in '" + path.string() + "'");
    }
    constexpr std::uint64_t kMaxSamples = std::uint64_t{1} << 40;
    if (R > kMaxSamples || C > kMaxSamples || T > kMaxSamples ||
        R * C > kMaxSamples / T) {
        throw IoError("tct: implausible dimensions in '" + path.string() + "'");
    }
    const std::uint64_t n_samples = R * C * T;
    const std::uint64_t expected = 4 + 3 * 8 + n_samples * 8;
    if (bytes.size() != expected) {
        throw IoError("tct: payload size mismatch in '" + path.string() + "': " +
                      std::to_string(bytes.size()) + " bytes, expected " +
                      std::to_string(expected));
    }

    TimeSeriesEnsemble ensemble(R, C, T, sampling_rate, 0);
    const unsigned char* data = p + 24;
    auto flat = ensemble.raw();
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        const double v = read_f64_le(data + i * 8);
        if (!std::isfinite(v)) {
            throw IoError("tct: non-finite sample at flat index " + std::to_string(i) +
                          " in '" + path.string() + "'");
        }
        flat[i] = v;
    }
    return ensemble;
}

void write_tct(const std::filesystem::path& path, const TimeSeriesEnsemble& ensemble) {
    std::string out;
    out.reserve(4 + 3 * 8 + ensemble.raw().size() * 8);
    out.append(kMagic, 4);
    append_u64_le(out, ensemble.n_trials());
    append_u64_le(out, ensemble.n_channels());
    append_u64_le(out, ensemble.n_times());
    for (double v : ensemble.raw()) {
        append_f64_le(out, v);
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) {
        throw IoError("short write to '" + path.string() + "'");
    }
}

TimeSeriesEnsemble read_timeseries(const std::filesystem::path& path, InputFormat format,
                                   double sampling_rate) {
    if (format == InputFormat::csv) {
        return read_csv_timeseries(path, sampling_rate).ensemble;
    }
    return read_tct(path, sampling_rate);
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    // Shortest round-trippable decimal: try increasing precision.
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
        if (std::strtod(buf, nullptr) == value) break;
    }
    return buf;
}

void write_trace_csv(const std::filesystem::path& path, const CausalityTrace& trace,
                     double sampling_rate, std::size_t time_axis_offset) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    out << "time_index,time_seconds,value,boot_mean,boot_std\n";
    const bool has_boot = !trace.boot_mean.empty();
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        const double seconds =
            (static_cast<double>(trace.times[i]) - static_cast<double>(time_axis_offset)) /
            sampling_rate;
        out << trace.times[i] << ',' << format_double(seconds) << ','
            << format_double(trace.values[i]) << ',';
        if (has_boot) {
            out << format_double(trace.boot_mean[i]) << ',' << format_double(trace.boot_std[i]);
        } else {
            out << ',';
        }
        out << '\n';
    }
    if (!out) {
        throw IoError("short write to '" + path.string() + "'");
    }
}

}  // namespace tct
