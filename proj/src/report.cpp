#include "qclust/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "qclust/errors.hpp"
#include "qclust/text.hpp"

namespace qclust::harness {

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

double metric_of(const MetricsRow& r, Metric m) {
    switch (m) {
        case Metric::Silhouette: return r.silhouette;
        case Metric::DaviesBouldin: return r.davies_bouldin;
        case Metric::CalinskiHarabasz: return r.calinski_harabasz;
    }
    return 0.0;
}

const char* metric_title(Metric m) {
    switch (m) {
        case Metric::Silhouette: return "Silhouette Score vs. Quantum Depth";
        case Metric::DaviesBouldin: return "Davies-Bouldin Index vs. Quantum Depth";
        case Metric::CalinskiHarabasz: return "Calinski-Harabasz Index vs. Quantum Depth";
    }
    return "";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

int parse_int_cell(const std::string& cell, const std::filesystem::path& path, std::size_t line) {
    const auto v = text::parse_int(cell);
    if (!v) throw FormatError(path.string() + ":" + std::to_string(line) + ": bad integer '" + cell + "'");
    return static_cast<int>(*v);
}

double parse_double_cell(const std::string& cell, const std::filesystem::path& path, std::size_t line) {
    const auto t = text::trim(cell);
    if (t == "inf") return HUGE_VAL;
    if (t == "-inf") return -HUGE_VAL;
    if (t == "nan") return NAN;
    const auto v = text::parse_double(t);
    if (!v) throw FormatError(path.string() + ":" + std::to_string(line) + ": bad number '" + cell + "'");
    return *v;
}

std::string dash_or(int v) { return v == kNotApplicable ? "-" : std::to_string(v); }

const MetricsRow* best_of(const std::vector<const MetricsRow*>& rows) {
    const MetricsRow* best = nullptr;
    for (const auto* r : rows) {
        if (!best || r->silhouette > best->silhouette) best = r;
    }
    return best;
}

void table_row(std::ostringstream& md, const MetricsRow& r) {
    md << "| " << r.k << " | " << r.method << " | " << dash_or(r.depth) << " | " << dash_or(r.prototypes) << " | "
       << dash_or(r.epoch) << " | " << fmt("%.6f", r.silhouette) << " | " << fmt("%.6g", r.davies_bouldin)
       << " | " << fmt("%.6g", r.calinski_harabasz) << " | " << (r.degenerate ? "yes" : "no") << " |\n";
}

const char* kTableHeader =
    "| K | Method | Depth | Prototypes | Epoch | Silhouette | Davies-Bouldin | Calinski-Harabasz | Degenerate |\n"
    "|---|--------|-------|------------|-------|------------|----------------|-------------------|------------|\n";

}  // namespace

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
    out << kMetricsHeader << '\n';
    for (const auto& r : rows) {
        out << r.k << ',' << text::csv_escape(r.method) << ',' << r.depth << ',' << r.prototypes << ',' << r.epoch
            << ',' << r.seed << ',' << text::format_double(r.silhouette) << ','
            << text::format_double(r.davies_bouldin) << ',' << text::format_double(r.calinski_harabasz) << ','
            << (r.degenerate ? 1 : 0) << '\n';
    }
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open metrics file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty metrics file: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kMetricsHeader) throw FormatError("unexpected metrics header '" + line + "'");

    std::vector<MetricsRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const auto cells = text::split_csv_line(line);
        if (cells.size() != 10) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 10 cells");
        }
        MetricsRow r;
        r.k = parse_int_cell(cells[0], path, line_no);
        r.method = cells[1];
        r.depth = parse_int_cell(cells[2], path, line_no);
        r.prototypes = parse_int_cell(cells[3], path, line_no);
        r.epoch = parse_int_cell(cells[4], path, line_no);
        r.seed = parse_int_cell(cells[5], path, line_no);
        r.silhouette = parse_double_cell(cells[6], path, line_no);
        r.davies_bouldin = parse_double_cell(cells[7], path, line_no);
        r.calinski_harabasz = parse_double_cell(cells[8], path, line_no);
        r.degenerate = parse_int_cell(cells[9], path, line_no) != 0;
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_training_log(const std::filesystem::path& path, const std::vector<TrainingLogRow>& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write training log: " + path.string());
    out << "prototypes,depth,seed,epoch,batch,loss\n";
    for (const auto& l : log) {
        out << l.prototypes << ',' << l.depth << ',' << l.seed << ',' << l.epoch << ',' << l.batch << ','
            << text::format_double(l.loss) << '\n';
    }
}

std::string render_plot(const std::vector<MetricsRow>& rows, Metric metric) {
    constexpr double kWidth = 720, kHeight = 440;
    constexpr double kLeft = 80, kRight = 230, kTop = 40, kBottom = 60;
    const bool log_axis = metric == Metric::CalinskiHarabasz;
    auto yval = [&](double v) { return log_axis ? std::log10(std::max(v, 1e-12)) : v; };

    // method -> depth -> (sum, count); depth -1 collects depth-less rows
    std::map<std::string, std::map<int, std::pair<double, int>>> series;
    std::set<int> depths;
    for (const auto& r : rows) {
        const double v = metric_of(r, metric);
        if (!std::isfinite(v)) continue;
        auto& cell = series[r.method][r.depth < 0 ? -1 : r.depth];
        cell.first += yval(v);
        cell.second += 1;
        if (r.depth >= 0) depths.insert(r.depth);
    }
    if (depths.empty()) depths.insert(0);

    double ymin = HUGE_VAL, ymax = -HUGE_VAL;
    for (const auto& [m, pts] : series) {
        for (const auto& [d, acc] : pts) {
            const double y = acc.first / acc.second;
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (!std::isfinite(ymin)) ymin = 0.0, ymax = 1.0;
    if (ymax - ymin < 1e-9) ymin -= 0.5, ymax += 0.5;
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    const int dmin = *depths.begin(), dmax = *depths.rbegin();
    const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
    auto px = [&](int d) {
        return dmax == dmin ? kLeft + plot_w / 2 : kLeft + plot_w * (d - dmin) / static_cast<double>(dmax - dmin);
    };
    auto py = [&](double y) { return kTop + plot_h * (1.0 - (y - ymin) / (ymax - ymin)); };

    static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << metric_title(metric) << "</text>\n";
    svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int d : depths) {
        svg << "<line x1=\"" << fmt("%.2f", px(d)) << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << fmt("%.2f", px(d))
            << "\" y2=\"" << kTop + plot_h + 5 << "\" stroke=\"black\"/>\n";
        svg << "<text class=\"xtick\" x=\"" << fmt("%.2f", px(d)) << "\" y=\"" << kTop + plot_h + 20
            << "\" text-anchor=\"middle\">" << d << "</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
        const double y = ymin + (ymax - ymin) * i / 4.0;
        svg << "<text class=\"ytick\" x=\"" << kLeft - 6 << "\" y=\"" << fmt("%.2f", py(y) + 4)
            << "\" text-anchor=\"end\">" << fmt(log_axis ? "1e%.1f" : "%.3g", y) << "</text>\n";
    }
    svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15
        << "\" text-anchor=\"middle\">Quantum depth</text>\n";

    int color = 0;
    double legend_y = kTop + 10;
    for (const auto& [method, pts] : series) {
        const char* c = kColors[color++ % 8];
        std::ostringstream line;
        bool any_depth = false;
        for (const auto& [d, acc] : pts) {
            if (d < 0) continue;
            line << (any_depth ? " " : "") << fmt("%.2f", px(d)) << ',' << fmt("%.2f", py(acc.first / acc.second));
            any_depth = true;
        }
        if (any_depth) {
            svg << "<polyline class=\"series\" fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\""
                << line.str() << "\"/>\n";
            for (const auto& [d, acc] : pts) {
                if (d < 0) continue;
                svg << "<circle cx=\"" << fmt("%.2f", px(d)) << "\" cy=\"" << fmt("%.2f", py(acc.first / acc.second))
                    << "\" r=\"3\" fill=\"" << c << "\"/>\n";
            }
        }
        if (const auto it = pts.find(-1); it != pts.end()) {
            const double y = py(it->second.first / it->second.second);
            svg << "<line class=\"reference\" x1=\"" << kLeft << "\" y1=\"" << fmt("%.2f", y) << "\" x2=\""
                << kLeft + plot_w << "\" y2=\"" << fmt("%.2f", y) << "\" stroke=\"" << c
                << "\" stroke-width=\"2\" stroke-dasharray=\"6,4\"/>\n";
        }
        svg << "<rect x=\"" << kWidth - kRight + 12 << "\" y=\"" << legend_y - 9 << "\" width=\"12\" height=\"12\" fill=\""
            << c << "\"/>\n";
        svg << "<text class=\"legend\" x=\"" << kWidth - kRight + 30 << "\" y=\"" << legend_y << "\">"
            << xml_escape(method) << "</text>\n";
        legend_y += 18;
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string render_summary(const std::vector<MetricsRow>& input) {
    std::vector<MetricsRow> rows = input;
    sort_rows(rows);

    std::ostringstream md;
    md << "# Best clustering performance per K\n\n"
       << "Each line is the row with the highest silhouette among that method's rows for the given K; "
       << "Davies-Bouldin and Calinski-Harabasz come from the same row. QNN lines use the epoch with the "
       << "highest silhouette. Depth \"-\" marks classical features. Degenerate = a metric guard fired or the "
       << "row is in the collapsed-cluster regime (CH > 1e12 or DB < 1e-6).\n\n"
       << kTableHeader;

    static const std::vector<std::string> summary_methods = {method::kClassical, method::kWorst, method::kAverage,
                                                             method::kBest, method::kQnnBest};
    std::set<int> ks;
    for (const auto& r : rows) ks.insert(r.k);

    auto select = [&](int k, const std::string& m, int depth_filter) {
        std::vector<const MetricsRow*> picked;
        for (const auto& r : rows) {
            if (r.k == k && r.method == m && (depth_filter < -1 || r.depth == depth_filter)) picked.push_back(&r);
        }
        return best_of(picked);
    };

    for (int k : ks) {
        for (const auto& m : summary_methods) {
            if (const auto* r = select(k, m, -2)) table_row(md, *r);
        }
    }

    const bool has_depth1 = std::any_of(rows.begin(), rows.end(), [](const MetricsRow& r) { return r.depth == 1; });
    if (has_depth1) {
        md << "\n# Depth-1 comparison\n\n"
           << "Classical features against depth-1 random quantum features and depth-1 trained QNN features.\n\n"
           << kTableHeader;
        for (int k : ks) {
            if (const auto* r = select(k, method::kClassical, -1)) table_row(md, *r);
            for (const auto& m : {method::kWorst, method::kAverage, method::kBest, method::kQnnBest}) {
                if (const auto* r = select(k, m, 1)) table_row(md, *r);
            }
        }
    }
    return md.str();
}

ReportFiles report(std::vector<MetricsRow> rows, const std::filesystem::path& output_dir) {
    if (rows.empty()) throw ArgumentError("report needs at least one row");
    sort_rows(rows);

    std::error_code ec;
    std::filesystem::create_directories(output_dir, ec);
    if (ec || !std::filesystem::is_directory(output_dir)) {
        throw IoError("cannot create output directory: " + output_dir.string());
    }

    auto write = [](const std::filesystem::path& path, const std::string& content) {
        std::ofstream out(path, std::ios::binary);
        out << content;
        if (!out) throw IoError("cannot write " + path.string());
    };

    ReportFiles files;
    files.metrics_csv = output_dir / "metrics.csv";
    std::ostringstream csv;
    write_metrics_csv(csv, rows);
    write(files.metrics_csv, csv.str());

    const std::pair<Metric, const char*> plots[] = {{Metric::Silhouette, "silhouette.svg"},
                                                    {Metric::DaviesBouldin, "davies_bouldin.svg"},
                                                    {Metric::CalinskiHarabasz, "calinski_harabasz.svg"}};
    for (const auto& [metric, name] : plots) {
        files.plots.push_back(output_dir / name);
        write(files.plots.back(), render_plot(rows, metric));
    }

    files.summary = output_dir / "summary.md";
    write(files.summary, render_summary(rows));
    return files;
}

}  // namespace qclust::harness
