#include "imtl/cli/config_file.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "imtl/errors.hpp"

namespace imtl::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string where(const ConfigEntry& e) {
    return "[" + e.section + "] " + e.key + " (line " + std::to_string(e.line) + ")";
}

std::uint64_t to_u64(const ConfigEntry& e, const std::string& text) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size() || text.empty()) {
        throw ConfigError(where(e) + ": expected a non-negative integer, got '" + text + "'");
    }
    return v;
}

std::size_t to_size(const ConfigEntry& e) {
    return static_cast<std::size_t>(to_u64(e, e.value));
}

double to_double(const ConfigEntry& e) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (ec != std::errc() || p != e.value.data() + e.value.size() || e.value.empty()) {
        throw ConfigError(where(e) + ": expected a number, got '" + e.value + "'");
    }
    return v;
}

bool to_bool(const ConfigEntry& e) {
    std::string v = e.value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(where(e) + ": expected true or false, got '" + e.value + "'");
}

using Setter = std::function<void(harness::RunConfig&, const ConfigEntry&)>;

// Task references in [strategy] are resolved after [tasks] is known.
struct Deferred {
    std::optional<ConfigEntry> order;
    std::optional<ConfigEntry> task;
};

std::size_t task_index(const harness::RunConfig& c, const ConfigEntry& e, const std::string& name) {
    for (std::size_t i = 0; i < c.tasks.size(); ++i) {
        if (env::to_string(c.tasks[i]) == name) return i;
    }
    std::size_t idx = 0;
    const auto [p, ec] = std::from_chars(name.data(), name.data() + name.size(), idx);
    if (ec == std::errc() && p == name.data() + name.size() && idx < c.tasks.size()) return idx;
    throw ConfigError(where(e) + ": '" + name + "' is not one of the configured tasks");
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"run.epochs", [](auto& c, const auto& e) { c.epochs = to_size(e); }},
        {"run.batch", [](auto& c, const auto& e) { c.batch = to_size(e); }},
        {"run.learning_rate", [](auto& c, const auto& e) { c.learning_rate = to_double(e); }},
        {"run.weight_decay", [](auto& c, const auto& e) { c.weight_decay = to_double(e); }},
        {"run.seeds", [](auto& c, const auto& e) { c.seeds = parse_seed_list(e.value); }},
        {"run.data_seed", [](auto& c, const auto& e) { c.data_seed = to_u64(e, e.value); }},
        {"run.cache_size", [](auto& c, const auto& e) { c.cache_size = to_size(e); }},
        {"run.eval_batch", [](auto& c, const auto& e) { c.eval_batch = to_size(e); }},
        {"run.interactions", [](auto& c, const auto& e) { c.interactions = to_size(e); }},
        {"run.data_dir", [](auto& c, const auto& e) { c.data_dir = std::filesystem::path(e.value); }},
        {"run.threads", [](auto& c, const auto& e) { c.threads = to_size(e); }},
        {"run.label", [](auto& c, const auto& e) { c.label = e.value; }},
        {"strategy.kind", [](auto& c, const auto& e) { c.strategy.kind = arbitration::parse_strategy_kind(e.value); }},
        {"strategy.k", [](auto& c, const auto& e) { c.strategy.k = to_double(e); }},
        {"strategy.epsilon", [](auto& c, const auto& e) { c.strategy.epsilon = to_double(e); }},
        {"strategy.window", [](auto& c, const auto& e) { c.strategy.window = to_size(e); }},
        {"strategy.numeric_floor", [](auto& c, const auto& e) { c.strategy.numeric_floor = to_double(e); }},
        {"strategy.order", nullptr},
        {"strategy.task", nullptr},
        {"network.variant", [](auto& c, const auto& e) { c.variant = harness::parse_variant(e.value); }},
        {"network.tier", [](auto& c, const auto& e) { c.tier = mtl::parse_tier(e.value); }},
        {"network.attention", [](auto& c, const auto& e) { c.use_attention = to_bool(e); }},
        {"network.flag", [](auto& c, const auto& e) { c.use_flag = to_bool(e); }},
        {"tasks.list",
         [](auto& c, const auto& e) {
             c.tasks.clear();
             for (const auto& n : split_list(e.value)) c.tasks.push_back(env::parse_task_kind(n));
         }},
    };
    return table;
}

}  // namespace

std::vector<ConfigEntry> parse_config_text(const std::string& text, const std::string& origin) {
    std::vector<ConfigEntry> out;
    std::set<std::string> seen;
    std::string section;
    std::stringstream ss(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(ss, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(origin + ":" + std::to_string(line_no) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
        }
        ConfigEntry e{section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
        if (e.key.empty()) throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
        if (!seen.insert(e.section + "." + e.key).second) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + e.key + "'");
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<ConfigEntry> read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

harness::RunConfig apply_config(const std::vector<ConfigEntry>& entries, harness::RunConfig base) {
    const auto& table = setters();
    Deferred deferred;
    for (const auto& e : entries) {
        const std::string full = e.section + "." + e.key;
        auto it = table.find(full);
        if (it == table.end()) {
            if (e.section.empty()) throw ConfigError("key '" + e.key + "' appears outside a section");
            throw ConfigError("unknown config key '" + full + "' (line " + std::to_string(e.line) + ")");
        }
        if (full == "strategy.order") {
            deferred.order = e;
        } else if (full == "strategy.task") {
            deferred.task = e;
        } else {
            it->second(base, e);
        }
    }
    if (deferred.order) {
        base.strategy.order.clear();
        for (const auto& n : split_list(deferred.order->value)) {
            base.strategy.order.push_back(task_index(base, *deferred.order, n));
        }
    }
    if (deferred.task) base.strategy.single_task = task_index(base, *deferred.task, deferred.task->value);
    return base;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
    std::vector<std::uint64_t> out;
    for (const auto& item : split_list(s)) {
        const ConfigEntry e{"run", "seeds", item, 0};
        const auto dash = item.find('-');
        if (dash != std::string::npos && dash > 0) {
            const auto lo = to_u64(e, trim(item.substr(0, dash)));
            const auto hi = to_u64(e, trim(item.substr(dash + 1)));
            if (hi < lo || hi - lo > 100000) throw ConfigError("invalid seed range '" + item + "'");
            for (auto v = lo; v <= hi; ++v) out.push_back(v);
        } else {
            out.push_back(to_u64(e, item));
        }
    }
    if (out.empty()) throw ConfigError("empty seed list");
    return out;
}

harness::RunConfig load_run_config(const ConfigSources& sources) {
    harness::RunConfig c;
    if (sources.file) c = apply_config(read_config_file(*sources.file), c);
    if (sources.env_seed) {
        try {
            c.seeds = parse_seed_list(*sources.env_seed);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("IMTL_SEED: ") + e.what());
        }
    }
    if (sources.cli_seed) c.seeds = {*sources.cli_seed};
    if (c.label.empty()) c.label = harness::default_label(c);
    c.validate();
    return c;
}

std::vector<std::string> known_keys() {
    std::vector<std::string> out;
    for (const auto& [k, v] : setters()) out.push_back(k);
    return out;
}

}  // namespace imtl::cli
