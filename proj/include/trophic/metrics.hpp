#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace trophic {

struct MetricRecord {
    std::string experiment;
    std::uint64_t step = 0;
    std::string metric;
    double value = 0.0;
    std::string config_hash;
};

/// Append-only JSON-lines sink. Every line carries the experiment id and the
/// config hash; readers reject files that mix hashes.
class MetricsSink {
public:
    MetricsSink(const std::string& path, std::string experiment, std::string config_hash);
    ~MetricsSink();

    void record(std::uint64_t step, const std::string& metric, double value);
    /// Structured records (structural events, episode logs, credit summaries).
    void record_json(std::uint64_t step, const std::string& metric, nlohmann::json payload);
    void close();

    /// One CSV (step,value) per scalar metric seen, written into dir.
    void write_curves_csv(const std::string& dir) const;

    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::string experiment_;
    std::string config_hash_;
    FILE* file_ = nullptr;
    std::map<std::string, std::vector<std::pair<std::uint64_t, double>>> curves_;
};

std::vector<MetricRecord> read_metric_file(const std::string& path);

/// Values of one metric in file order.
std::vector<double> metric_values(const std::vector<MetricRecord>& records, const std::string& metric);

/// Minimal static SVG line chart, one series.
void write_svg_line_chart(const std::string& path, const std::string& title,
                          const std::vector<std::pair<std::uint64_t, double>>& series);

} // namespace trophic
