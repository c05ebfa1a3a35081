#pragma once
#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace spacinglab {

/// 17-significant-digit decimal rendering: round-trips doubles exactly, so
/// CSV output is byte-deterministic.
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// FNV-1a 64-bit hash, used for config hashes and output checksums.
inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// RFC-4180 CSV with LF line endings. The first line is a comment-style
/// header carrying the config checksum; the second names the columns (with
/// units where applicable).
class CsvWriter {
  public:
    CsvWriter(std::string config_checksum, std::vector<std::string> columns)
        : columns_(std::move(columns)) {
        body_ += "# spacinglab config_checksum=" + config_checksum + "\n";
        append_row(columns_);
    }

    void add_row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_.size())
            throw std::invalid_argument("CsvWriter: cell count does not match header");
        append_row(cells);
    }

    const std::string& str() const { return body_; }

    void write(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("CsvWriter: cannot open " + path.string());
        out << body_;
    }

  private:
    static std::string quote(const std::string& cell) {
        if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
        std::string q = "\"";
        for (char c : cell) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + "\"";
    }

    void append_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) body_ += ',';
            body_ += quote(cells[i]);
        }
        body_ += '\n';
    }

    std::vector<std::string> columns_;
    std::string body_;
};

/// Minimal SVG scatter/line plot built only from already-serialized CSV data
/// columns, so plots never feed back into numeric results.
inline std::string svg_xy_plot(const std::vector<double>& x, const std::vector<double>& y_points,
                               const std::vector<double>& y_curve, const std::string& title) {
    const int w = 640, h = 420, margin = 50;
    double xmin = x.empty() ? 0.0 : x.front(), xmax = x.empty() ? 1.0 : x.front();
    double ymin = 0.0, ymax = 1.0;
    for (double v : x) {
        xmin = std::min(xmin, v);
        xmax = std::max(xmax, v);
    }
    for (const auto* col : {&y_points, &y_curve})
        for (double v : *col) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    auto px = [&](double v) { return margin + (v - xmin) / (xmax - xmin) * (w - 2 * margin); };
    auto py = [&](double v) { return h - margin - (v - ymin) / (ymax - ymin) * (h - 2 * margin); };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
                      "\" height=\"" + std::to_string(h) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + std::to_string(w / 2) + "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"monospace\" font-size=\"14\">" + title + "</text>\n";
    svg += "<line x1=\"" + std::to_string(margin) + "\" y1=\"" + std::to_string(h - margin) +
           "\" x2=\"" + std::to_string(w - margin) + "\" y2=\"" + std::to_string(h - margin) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + std::to_string(margin) + "\" y1=\"" + std::to_string(margin) +
           "\" x2=\"" + std::to_string(margin) + "\" y2=\"" + std::to_string(h - margin) +
           "\" stroke=\"black\"/>\n";
    if (!y_curve.empty()) {
        svg += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < x.size() && i < y_curve.size(); ++i)
            svg += format_g17(px(x[i])) + "," + format_g17(py(y_curve[i])) + " ";
        svg += "\"/>\n";
    }
    for (std::size_t i = 0; i < x.size() && i < y_points.size(); ++i)
        svg += "<circle cx=\"" + format_g17(px(x[i])) + "\" cy=\"" + format_g17(py(y_points[i])) +
               "\" r=\"3\" fill=\"crimson\"/>\n";
    svg += "</svg>\n";
    return svg;
}

/// Run directory layout: output_dir/<command>/<timestamp>-<confighash>/.
struct RunPaths {
    std::filesystem::path dir;
    std::filesystem::path config_json() const { return dir / "config.json"; }
    std::filesystem::path results_csv() const { return dir / "results.csv"; }
    std::filesystem::path plot_svg() const { return dir / "plot.svg"; }
    std::filesystem::path record_json() const { return dir / "record.json"; }
};

inline std::string utc_timestamp() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%S", &tm);
    return buf;
}

inline RunPaths make_run_dir(const std::filesystem::path& output_dir, const std::string& command,
                             const std::string& confighash) {
    RunPaths paths;
    paths.dir = output_dir / command / (utc_timestamp() + "-" + confighash);
    std::filesystem::create_directories(paths.dir);
    return paths;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_text: cannot open " + path.string());
    out << text;
}

} // namespace spacinglab
