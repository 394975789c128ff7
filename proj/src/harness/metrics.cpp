#include "imtl/harness/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "imtl/errors.hpp"

namespace imtl::harness {

double EpochRow::overall() const {
    return std::accumulate(eval_mae.begin(), eval_mae.end(), 0.0);
}

std::vector<std::size_t> MetricsLog::engagement_counts() const {
    std::vector<std::size_t> counts(task_names.size(), 0);
    for (const auto& r : rows) {
        if (r.task < counts.size()) ++counts[r.task];
    }
    return counts;
}

std::size_t MetricsLog::midpoint_index() const {
    if (rows.empty()) throw ConfigError("empty metrics log has no midpoint");
    return std::min(planned_epochs / 2, rows.size() - 1);
}

namespace {

void put(std::string& line, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, ",%.10g", v);
    line += buf;
}

}  // namespace

void write_metrics_csv(const MetricsLog& log, const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    std::fprintf(f, "%s\n", kMetricsFormat);
    std::fprintf(f, "# seed=%llu epochs=%zu\n", static_cast<unsigned long long>(log.seed), log.planned_epochs);
    std::string header = "epoch,task,task_name,train_mse,train_mae,energy,cumulative_energy,overall_eval_mae";
    for (const char* prefix : {"eval_mae_", "lp_", "ec_", "score_"}) {
        for (const auto& n : log.task_names) header += "," + std::string(prefix) + n;
    }
    header += ",warmup,explored,wall_ms\n";
    std::fputs(header.c_str(), f);
    for (const auto& r : log.rows) {
        std::string line = std::to_string(r.epoch) + "," + std::to_string(r.task) + "," +
                           (r.task < log.task_names.size() ? log.task_names[r.task] : std::string("?"));
        put(line, r.train_mse);
        put(line, r.train_mae);
        put(line, r.energy);
        put(line, r.cumulative_energy);
        put(line, r.overall());
        for (const auto* v : {&r.eval_mae, &r.lp, &r.ec, &r.score}) {
            for (double x : *v) put(line, x);
        }
        line += r.warmup ? ",1" : ",0";
        line += r.explored ? ",1" : ",0";
        put(line, r.wall_ms);
        line += "\n";
        std::fputs(line.c_str(), f);
    }
    if (log.aborted) std::fprintf(f, "# aborted at epoch %zu: %s\n", log.rows.size(), log.failure.c_str());
    if (std::fclose(f) != 0) throw IoError("error writing '" + path.string() + "'");
}

std::size_t CsvTable::column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw IoError("CSV has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(const std::string& name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
}

std::vector<double> CsvTable::numeric(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::string& cell = rows[r][c];
        double v = std::nan("");
        if (!cell.empty()) {
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size()) {
                throw IoError("column '" + name + "' row " + std::to_string(r + 1) + ": not a number '" + cell + "'");
            }
        }
        out.push_back(v);
    }
    return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    CsvTable t;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        const std::size_t start = pos;
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            t.comments.push_back(line);
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw IoError(path.string() + ": byte " + std::to_string(start) + ": row has " +
                          std::to_string(cells.size()) + " columns, expected " + std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(cells));
    }
    if (t.header.empty()) throw IoError(path.string() + ": byte " + std::to_string(text.size()) + ": missing header");
    return t;
}

std::vector<std::size_t> read_engagements(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    std::vector<std::size_t> out;
    for (double v : t.numeric("task")) {
        if (!(v >= 0.0) || v != std::floor(v)) throw IoError(path.string() + ": invalid task index");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

}  // namespace imtl::harness
