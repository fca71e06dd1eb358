#include "auricle/tensor_file.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "auricle/errors.hpp"

namespace auricle {
namespace {

constexpr char kMagic[4] = {'C', 'O', 'L', 'A'};

void append_u32(std::string& buf, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    buf.append(b, 4);
}

// Cursor over the loaded bytes; every failure reports where it happened.
struct Reader {
    const std::string& path;
    const std::vector<char>& buf;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("tensor file '" + path + "': " + what + " at offset " +
                         std::to_string(pos));
    }

    void need(std::size_t n, const char* what) {
        if (buf.size() - pos < n) {
            fail(std::string("truncated ") + what + " (need " + std::to_string(n) + " bytes, have " +
                 std::to_string(buf.size() - pos) + ")");
        }
    }

    std::uint32_t u32(const char* what) {
        need(4, what);
        const auto* p = reinterpret_cast<const unsigned char*>(buf.data() + pos);
        pos += 4;
        return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
               (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
    }

    std::string bytes(std::size_t n, const char* what) {
        need(n, what);
        std::string out(buf.data() + pos, n);
        pos += n;
        return out;
    }
};

}  // namespace

void save_tensor_file(const std::string& path, const TensorFile& file) {
    std::string buf;
    buf.append(kMagic, 4);
    append_u32(buf, kTensorFileVersion);
    append_u32(buf, static_cast<std::uint32_t>(file.config_text.size()));
    buf += file.config_text;
    append_u32(buf, static_cast<std::uint32_t>(file.tensors.size()));
    for (const auto& [name, tensor] : file.tensors) {
        append_u32(buf, static_cast<std::uint32_t>(name.size()));
        buf += name;
        append_u32(buf, static_cast<std::uint32_t>(tensor.rank()));
        for (std::int64_t d : tensor.shape()) append_u32(buf, static_cast<std::uint32_t>(d));
        const std::size_t off = buf.size();
        buf.resize(off + tensor.numel() * sizeof(float));
        // float32 is IEEE little-endian on every target we build for.
        std::memcpy(buf.data() + off, tensor.data(), tensor.numel() * sizeof(float));
    }

    const std::filesystem::path target(path);
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("tensor file: cannot open '" + tmp.string() + "' for writing");
        f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (!f) throw IoError("tensor file: short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        throw IoError("tensor file: cannot move '" + tmp.string() + "' into place: " + ec.message());
    }
}

TensorFile load_tensor_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw IoError("tensor file: cannot open '" + path + "' for reading");
    const std::streamsize size = f.tellg();
    f.seekg(0);
    std::vector<char> buf(static_cast<std::size_t>(size));
    if (size > 0 && !f.read(buf.data(), size)) {
        throw IoError("tensor file: read failed for '" + path + "'");
    }

    Reader r{path, buf};
    const std::string magic = r.bytes(4, "magic");
    if (std::memcmp(magic.data(), kMagic, 4) != 0) {
        r.pos = 0;
        r.fail("bad magic (not a checkpoint container)");
    }
    const std::uint32_t version = r.u32("version");
    if (version != kTensorFileVersion) {
        r.pos -= 4;
        r.fail("unsupported version " + std::to_string(version) + " (expected " +
               std::to_string(kTensorFileVersion) + ")");
    }

    TensorFile out;
    const std::uint32_t cfg_len = r.u32("config length");
    out.config_text = r.bytes(cfg_len, "config text");

    const std::uint32_t count = r.u32("tensor count");
    out.tensors.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t name_len = r.u32("tensor name length");
        std::string name = r.bytes(name_len, "tensor name");
        const std::uint32_t rank = r.u32("tensor rank");
        if (rank > 8) r.fail("implausible rank " + std::to_string(rank) + " for '" + name + "'");
        std::vector<std::int64_t> shape(rank);
        std::int64_t numel = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            shape[d] = static_cast<std::int64_t>(r.u32("tensor dims"));
            numel *= shape[d];
        }
        if (numel > std::numeric_limits<std::int64_t>::max() / 8) r.fail("tensor too large");
        Tensor t(shape);
        r.need(static_cast<std::size_t>(numel) * sizeof(float), "tensor data");
        std::memcpy(t.data(), buf.data() + r.pos, static_cast<std::size_t>(numel) * sizeof(float));
        r.pos += static_cast<std::size_t>(numel) * sizeof(float);
        out.tensors.emplace_back(std::move(name), std::move(t));
    }
    if (r.pos != buf.size()) {
        r.fail(std::to_string(buf.size() - r.pos) + " unexpected trailing bytes");
    }
    return out;
}

}  // namespace auricle
