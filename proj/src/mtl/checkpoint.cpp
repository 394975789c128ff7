#include "imtl/mtl/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "imtl/errors.hpp"

namespace imtl::mtl {

namespace {

constexpr char kMagic[8] = {'I', 'M', 'T', 'L', 'C', 'K', 'P', 'T'};

class Writer {
public:
    void u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
    const std::vector<char>& bytes() const { return bytes_; }

private:
    std::vector<char> bytes_;
};

class Reader {
public:
    Reader(std::vector<char> bytes, std::string path) : bytes_(std::move(bytes)), path_(std::move(path)) {}

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(bytes_[pos_++]);
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes_[pos_++])) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes_[pos_++])) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str(std::size_t n) {
        need(n);
        std::string s(bytes_.data() + pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t offset() const { return pos_; }
    [[noreturn]] void fail(const std::string& what) const {
        throw IoError(path_ + ": " + what + " at byte " + std::to_string(pos_));
    }

private:
    void need(std::size_t n) {
        if (pos_ + n > bytes_.size()) fail("truncated checkpoint");
    }
    std::vector<char> bytes_;
    std::string path_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, std::vector<MultiTaskModel>& models) {
    Writer w;
    w.raw(kMagic, sizeof kMagic);
    w.u32(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(models.size()));
    for (auto& model : models) {
        const NetworkSpec& n = model.network();
        w.u32(static_cast<std::uint32_t>(n.variant));
        w.u32(static_cast<std::uint32_t>(n.tier));
        for (std::size_t v : {n.state_dim, n.shared_hidden, n.shared_out, n.task_hidden, n.latent_dim,
                              n.action_dim, n.decoder_hidden, n.decoder_layers, n.heads}) {
            w.u64(v);
        }
        w.u8(n.use_attention ? 1 : 0);
        w.u8(n.use_flag ? 1 : 0);
        w.f64(n.width_scale);
        w.u32(static_cast<std::uint32_t>(model.task_count()));
        for (const auto& t : model.tasks()) {
            w.u32(static_cast<std::uint32_t>(t.name.size()));
            w.raw(t.name.data(), t.name.size());
            w.u64(t.state_dim);
            w.u64(t.action_dim);
            w.u64(t.effect_dim);
        }
        w.u64(model.parameter_count());
        for (const auto& p : model.parameters()) {
            for (double v : p.value) w.f64(v);
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<MultiTaskModel> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader r(std::move(bytes), path.string());
    if (r.str(8) != std::string(kMagic, 8)) r.fail("bad magic");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) r.fail("unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t count = r.u32();
    std::vector<MultiTaskModel> models;
    for (std::uint32_t k = 0; k < count; ++k) {
        NetworkSpec n;
        const std::uint32_t variant = r.u32();
        const std::uint32_t tier = r.u32();
        if (variant > 1 || tier > 3) r.fail("bad network header");
        n.variant = static_cast<Variant>(variant);
        n.tier = static_cast<Tier>(tier);
        for (std::size_t* field : {&n.state_dim, &n.shared_hidden, &n.shared_out, &n.task_hidden, &n.latent_dim,
                                   &n.action_dim, &n.decoder_hidden, &n.decoder_layers, &n.heads}) {
            *field = static_cast<std::size_t>(r.u64());
        }
        n.use_attention = r.u8() != 0;
        n.use_flag = r.u8() != 0;
        n.width_scale = r.f64();
        const std::uint32_t task_count = r.u32();
        if (task_count == 0 || task_count > 1024) r.fail("bad task count");
        std::vector<TaskSpec> tasks;
        for (std::uint32_t t = 0; t < task_count; ++t) {
            TaskSpec s;
            const std::uint32_t len = r.u32();
            if (len > 4096) r.fail("bad task name length");
            s.name = r.str(len);
            s.state_dim = static_cast<std::size_t>(r.u64());
            s.action_dim = static_cast<std::size_t>(r.u64());
            s.effect_dim = static_cast<std::size_t>(r.u64());
            tasks.push_back(std::move(s));
        }
        Rng rng(0, 0);
        MultiTaskModel model = [&] {
            try {
                return MultiTaskModel::build(tasks, n, rng);
            } catch (const ConfigError& e) {
                r.fail(std::string("inconsistent network header: ") + e.what());
            }
        }();
        const std::uint64_t params = r.u64();
        if (params != model.parameter_count()) r.fail("parameter count does not match header");
        for (auto& p : model.parameters()) {
            for (double& v : p.value) v = r.f64();
        }
        models.push_back(std::move(model));
    }
    if (r.offset() != std::filesystem::file_size(path)) r.fail("trailing bytes");
    return models;
}

}  // namespace imtl::mtl
