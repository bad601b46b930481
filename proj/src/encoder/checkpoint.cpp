#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "dgp/encoder.hpp"

namespace dgp {

namespace {

constexpr char kMagic[8] = {'D', 'G', 'P', 'C', 'K', 'P', 'T', '1'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(const std::string& in, std::size_t pos, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    return v;
}

const char* pooling_name(Pooling p) { return p == Pooling::Sum ? "sum" : "mean"; }

Pooling pooling_from(const std::string& s) {
    if (s == "sum") return Pooling::Sum;
    if (s == "mean") return Pooling::Mean;
    throw FormatError("unknown pooling '" + s + "'");
}

}  // namespace

const Tensor& Container::tensor(const std::string& name) const {
    for (const auto& t : tensors)
        if (t.name == name) return t.value;
    throw FormatError("container has no tensor '" + name + "'");
}

std::string serialize_container(const Container& c) {
    nlohmann::json meta = c.meta;
    meta["format_version"] = kCheckpointVersion;
    nlohmann::json manifest = nlohmann::json::array();
    for (const auto& t : c.tensors)
        manifest.push_back({{"name", t.name}, {"shape", {t.value.rows(), t.value.cols()}}});
    meta["tensors"] = std::move(manifest);
    const std::string text = meta.dump();

    std::string out(kMagic, sizeof(kMagic));
    put_u32(out, static_cast<std::uint32_t>(text.size()));
    out += text;
    for (const auto& t : c.tensors)
        for (double v : t.value.values()) put_f64(out, v);
    return out;
}

Container deserialize_container(const std::string& bytes) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
        throw FormatError("bad checkpoint magic");
    const std::size_t len = get_le(bytes, 8, 4);
    if (bytes.size() < 12 + len) throw FormatError("truncated checkpoint metadata");
    Container c;
    try {
        c.meta = nlohmann::json::parse(bytes.substr(12, len));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad checkpoint metadata: ") + e.what());
    }
    if (!c.meta.contains("format_version") || c.meta["format_version"] != kCheckpointVersion)
        throw FormatError("unsupported checkpoint version");
    std::size_t pos = 12 + len;
    for (const auto& entry : c.meta.at("tensors")) {
        const std::size_t rows = entry.at("shape").at(0);
        const std::size_t cols = entry.at("shape").at(1);
        if (bytes.size() < pos + 8 * rows * cols) throw FormatError("truncated checkpoint payload");
        Tensor t(rows, cols);
        for (std::size_t k = 0; k < t.size(); ++k, pos += 8)
            t[k] = std::bit_cast<double>(get_le(bytes, pos, 8));
        c.tensors.push_back({entry.at("name").get<std::string>(), std::move(t)});
    }
    if (pos != bytes.size()) throw FormatError("trailing bytes after checkpoint payload");
    c.meta.erase("tensors");
    c.meta.erase("format_version");
    return c;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i)
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return os.str();
}

std::string serialize_checkpoint(const EncoderCheckpoint& ckpt) {
    const GinArch& a = ckpt.encoder.arch;
    Container c;
    c.meta["kind"] = "encoder";
    c.meta["arch"] = {{"feature_dim", a.feature_dim},
                      {"layer_dims", a.layer_dims},
                      {"gin_hidden", a.gin_hidden},
                      {"proj_dim", a.proj_dim},
                      {"pooling", pooling_name(a.pooling)}};
    c.meta["pretrain"] = {{"method", ckpt.pretrain_method}, {"hyperparams", ckpt.hyperparams}};
    const auto& ps = ckpt.encoder.params;
    for (std::size_t i = 0; i < ps.size(); ++i) c.tensors.push_back({ps[i].name, ps[i].value});
    return serialize_container(c);
}

EncoderCheckpoint deserialize_checkpoint(const std::string& bytes) {
    Container c = deserialize_container(bytes);
    if (c.meta.value("kind", "") != "encoder") throw FormatError("not an encoder checkpoint");
    EncoderCheckpoint ckpt;
    GinArch arch;
    const auto& a = c.meta.at("arch");
    arch.feature_dim = a.at("feature_dim");
    arch.layer_dims = a.at("layer_dims").get<std::vector<std::size_t>>();
    arch.gin_hidden = a.at("gin_hidden");
    arch.proj_dim = a.at("proj_dim");
    arch.pooling = pooling_from(a.at("pooling"));

    // Build a template with the expected names and shapes, then fill it.
    Rng rng(0);
    ckpt.encoder = GinEncoder::create(arch, rng);
    auto& ps = ckpt.encoder.params;
    if (c.tensors.size() != ps.size()) throw FormatError("checkpoint tensor count mismatch");
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (c.tensors[i].name != ps[i].name)
            throw FormatError("unexpected tensor '" + c.tensors[i].name + "', wanted '" + ps[i].name + "'");
        if (!c.tensors[i].value.same_shape(ps[i].value))
            throw FormatError("shape mismatch for tensor '" + ps[i].name + "'");
        ps[i].value = std::move(c.tensors[i].value);
    }
    ckpt.pretrain_method = c.meta.at("pretrain").at("method");
    ckpt.hyperparams = c.meta.at("pretrain").at("hyperparams");
    return ckpt;
}

void save_checkpoint(const EncoderCheckpoint& ckpt, const std::filesystem::path& path) {
    write_file(path, serialize_checkpoint(ckpt));
}

EncoderCheckpoint load_checkpoint(const std::filesystem::path& path, std::size_t expected_feature_dim) {
    EncoderCheckpoint ckpt = deserialize_checkpoint(read_file(path));
    if (expected_feature_dim != 0 && ckpt.encoder.arch.feature_dim != expected_feature_dim) {
        throw FormatError("checkpoint feature dim " + std::to_string(ckpt.encoder.arch.feature_dim) +
                          " does not match dataset feature dim " + std::to_string(expected_feature_dim));
    }
    return ckpt;
}

std::string encoder_hash(const GinEncoder& enc) {
    std::string payload;
    for (std::size_t i = 0; i < enc.params.size(); ++i) {
        const Param& p = enc.params[i];
        payload += p.name;
        put_u32(payload, static_cast<std::uint32_t>(p.value.rows()));
        put_u32(payload, static_cast<std::uint32_t>(p.value.cols()));
        for (double v : p.value.values()) put_f64(payload, v);
    }
    return sha256_hex(payload);
}

}  // namespace dgp
