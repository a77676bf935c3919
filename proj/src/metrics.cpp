#include "trophic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace trophic {

MetricsSink::MetricsSink(const std::string& path, std::string experiment, std::string config_hash)
    : path_(path), experiment_(std::move(experiment)), config_hash_(std::move(config_hash)) {
    file_ = std::fopen(path.c_str(), "wb");
    if (!file_) throw std::runtime_error("MetricsSink: cannot open '" + path + "'");
}

MetricsSink::~MetricsSink() { close(); }

void MetricsSink::close() {
    if (file_) {
        std::fclose(file_);
        file_ = nullptr;
    }
}

void MetricsSink::record(std::uint64_t step, const std::string& metric, double value) {
    if (!file_) throw std::runtime_error("MetricsSink: sink is closed");
    nlohmann::json j{{"config", config_hash_}, {"experiment", experiment_}, {"metric", metric},
                     {"step", step}, {"value", value}};
    const std::string line = j.dump();
    std::fwrite(line.data(), 1, line.size(), file_);
    std::fputc('\n', file_);
    curves_[metric].emplace_back(step, value);
}

void MetricsSink::record_json(std::uint64_t step, const std::string& metric, nlohmann::json payload) {
    if (!file_) throw std::runtime_error("MetricsSink: sink is closed");
    nlohmann::json j{{"config", config_hash_}, {"experiment", experiment_}, {"metric", metric},
                     {"step", step}, {"value", std::move(payload)}};
    const std::string line = j.dump();
    std::fwrite(line.data(), 1, line.size(), file_);
    std::fputc('\n', file_);
}

void MetricsSink::write_curves_csv(const std::string& dir) const {
    for (const auto& [name, series] : curves_) {
        std::string fname = name;
        std::replace(fname.begin(), fname.end(), '/', '_');
        std::ofstream out(dir + "/" + fname + ".csv");
        if (!out) throw std::runtime_error("MetricsSink: cannot write CSV in '" + dir + "'");
        out << "step,value\n";
        for (const auto& [step, value] : series) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g", value);
            out << step << "," << buf << "\n";
        }
    }
}

std::vector<MetricRecord> read_metric_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_metric_file: cannot open '" + path + "'");
    std::vector<MetricRecord> out;
    std::string line;
    std::string hash;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        MetricRecord r;
        r.experiment = j.at("experiment").get<std::string>();
        r.step = j.at("step").get<std::uint64_t>();
        r.metric = j.at("metric").get<std::string>();
        r.config_hash = j.at("config").get<std::string>();
        if (j.at("value").is_number()) r.value = j.at("value").get<double>();
        if (hash.empty()) hash = r.config_hash;
        else if (hash != r.config_hash)
            throw std::runtime_error("read_metric_file: mixed config hashes in '" + path + "'");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<double> metric_values(const std::vector<MetricRecord>& records, const std::string& metric) {
    std::vector<double> out;
    for (const auto& r : records)
        if (r.metric == metric) out.push_back(r.value);
    return out;
}

void write_svg_line_chart(const std::string& path, const std::string& title,
                          const std::vector<std::pair<std::uint64_t, double>>& series) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_svg_line_chart: cannot open '" + path + "'");
    const int width = 800, height = 400, margin = 50;
    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    if (!series.empty()) {
        x_min = x_max = static_cast<double>(series.front().first);
        y_min = y_max = series.front().second;
        for (const auto& [s, v] : series) {
            x_min = std::min(x_min, static_cast<double>(s));
            x_max = std::max(x_max, static_cast<double>(s));
            y_min = std::min(y_min, v);
            y_max = std::max(y_max, v);
        }
    }
    if (x_max == x_min) x_max = x_min + 1;
    if (y_max == y_min) y_max = y_min + 1;
    auto px = [&](double x) { return margin + (x - x_min) / (x_max - x_min) * (width - 2 * margin); };
    auto py = [&](double y) { return height - margin - (y - y_min) / (y_max - y_min) * (height - 2 * margin); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
        << "</text>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
        << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << margin << "\" y=\"" << height - margin + 20 << "\" font-size=\"10\">" << x_min
        << "</text>\n";
    out << "<text x=\"" << width - margin << "\" y=\"" << height - margin + 20
        << "\" text-anchor=\"end\" font-size=\"10\">" << x_max << "</text>\n";
    out << "<text x=\"" << margin - 5 << "\" y=\"" << height - margin << "\" text-anchor=\"end\" font-size=\"10\">"
        << y_min << "</text>\n";
    out << "<text x=\"" << margin - 5 << "\" y=\"" << margin << "\" text-anchor=\"end\" font-size=\"10\">" << y_max
        << "</text>\n";
    out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (const auto& [s, v] : series) out << px(static_cast<double>(s)) << "," << py(v) << " ";
    out << "\"/>\n</svg>\n";
}

} // namespace trophic
