#include "imtl/env/dataset_io.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "imtl/errors.hpp"

namespace imtl::env {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
}

std::string read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

[[noreturn]] void fail_at(const std::filesystem::path& path, std::size_t offset, const std::string& what) {
    throw IoError(path.string() + ": byte " + std::to_string(offset) + ": " + what);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_size(std::string_view s, std::size_t& out) {
    s = trim(s);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

}  // namespace

void write_dataset(const Dataset& data, const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    const auto& sp = data.spec;
    std::fprintf(f, "%zu,%zu,%zu\n", sp.state_dim, sp.action_dim, sp.effect_dim);
    char buf[64];
    for (std::size_t r = 0; r < data.size(); ++r) {
        std::string line;
        auto put = [&](std::span<const double> row) {
            for (double v : row) {
                if (!line.empty()) line.push_back(',');
                std::snprintf(buf, sizeof buf, "%.17g", v);
                line += buf;
            }
        };
        put(data.states.row(r));
        put(data.actions.row(r));
        put(data.effects.row(r));
        line.push_back('\n');
        std::fwrite(line.data(), 1, line.size(), f);
    }
    if (std::fclose(f) != 0) throw IoError("error writing '" + path.string() + "'");
}

Dataset read_dataset(const std::filesystem::path& path, const std::optional<mtl::TaskSpec>& expected,
                     const std::string& name) {
    const std::string text = read_all(path);
    std::size_t pos = 0;
    bool have_header = false;
    Dataset d;
    std::vector<double> s, a, e;
    std::size_t rows = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        const std::string_view line = trim(std::string_view(text).substr(pos, end - pos));
        const std::size_t line_start = pos;
        pos = end + 1;
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split_fields(line);
        if (!have_header) {
            std::size_t dims[3];
            if (fields.size() != 3 || !parse_size(fields[0], dims[0]) || !parse_size(fields[1], dims[1]) ||
                !parse_size(fields[2], dims[2])) {
                fail_at(path, line_start, "expected header 'd_s,d_a,d_e'");
            }
            if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0) fail_at(path, line_start, "dimensions must be positive");
            if (expected && (expected->state_dim != dims[0] || expected->action_dim != dims[1] ||
                             expected->effect_dim != dims[2])) {
                fail_at(path, line_start,
                        "header " + std::to_string(dims[0]) + "," + std::to_string(dims[1]) + "," +
                            std::to_string(dims[2]) + " does not match task '" + expected->name + "' (" +
                            std::to_string(expected->state_dim) + "," + std::to_string(expected->action_dim) + "," +
                            std::to_string(expected->effect_dim) + ")");
            }
            d.spec = expected ? *expected : mtl::TaskSpec{name, dims[0], dims[1], dims[2]};
            if (!name.empty()) d.spec.name = name;
            have_header = true;
            continue;
        }
        const std::size_t width = d.spec.state_dim + d.spec.action_dim + d.spec.effect_dim;
        if (fields.size() != width) {
            fail_at(path, line_start,
                    "row has " + std::to_string(fields.size()) + " columns, expected " + std::to_string(width));
        }
        for (std::size_t c = 0; c < width; ++c) {
            double v = 0.0;
            if (!parse_double(fields[c], v)) {
                const auto col_offset = static_cast<std::size_t>(fields[c].data() - text.data());
                fail_at(path, col_offset, "invalid number '" + std::string(trim(fields[c])) + "'");
            }
            if (c < d.spec.state_dim) s.push_back(v);
            else if (c < d.spec.state_dim + d.spec.action_dim) a.push_back(v);
            else e.push_back(v);
        }
        ++rows;
    }
    if (!have_header) fail_at(path, text.size(), "missing header 'd_s,d_a,d_e'");
    d.states = nn::Matrix(rows, d.spec.state_dim, std::move(s));
    d.actions = nn::Matrix(rows, d.spec.action_dim, std::move(a));
    d.effects = nn::Matrix(rows, d.spec.effect_dim, std::move(e));
    return d;
}

std::string file_checksum(const std::filesystem::path& path) {
    const std::string text = read_all(path);
    std::uint64_t h = kFnvOffset;
    fnv_bytes(h, text.data(), text.size());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::uint64_t dataset_checksum(const Dataset& data) {
    std::uint64_t h = kFnvOffset;
    for (const nn::Matrix* m : {&data.states, &data.actions, &data.effects}) {
        for (double v : m->values()) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof bits);
            fnv_bytes(h, &bits, sizeof bits);
        }
    }
    return h;
}

}  // namespace imtl::env
