#include "mahl/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>

namespace mahl {

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::filesystem::path path, std::vector<std::string> header)
    : path_(std::move(path)), columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += header[i];
    }
    buffer_ += '\n';
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
    if (cells.size() != columns_) throw MahlError("CSV row arity mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) buffer_ += ',';
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, std::string>)
                    buffer_ += v;
                else if constexpr (std::is_same_v<T, double>)
                    buffer_ += format_double(v);
                else if constexpr (std::is_same_v<T, bool>)
                    buffer_ += v ? "true" : "false";
                else
                    buffer_ += std::to_string(v);
            },
            cells[i]);
    }
    buffer_ += '\n';
}

void CsvWriter::close() {
    if (closed_) return;
    std::ofstream os(path_, std::ios::binary | std::ios::trunc);
    if (!os) throw MahlError("cannot write " + path_.string());
    os.write(buffer_.data(), std::streamsize(buffer_.size()));
    closed_ = true;
}

// ---------------------------------------------------------------------------
// SHA-256 (FIPS 180-4), compact implementation for the manifest hashes.
// ---------------------------------------------------------------------------

namespace {

struct Sha256 {
    std::uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                          0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    unsigned char block[64];
    std::size_t block_len = 0;
    std::uint64_t total = 0;

    static std::uint32_t rotr(std::uint32_t x, int n) {
        return (x >> n) | (x << (32 - n));
    }

    void compress(const unsigned char* p) {
        static const std::uint32_t k[64] = {
            0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
            0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
            0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
            0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
            0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
            0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
            0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
            0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
            0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
            0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
            0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i)
            w[i] = std::uint32_t(p[4 * i]) << 24 | std::uint32_t(p[4 * i + 1]) << 16 |
                   std::uint32_t(p[4 * i + 2]) << 8 | std::uint32_t(p[4 * i + 3]);
        for (int i = 16; i < 64; ++i) {
            const std::uint32_t s0 =
                rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            const std::uint32_t s1 =
                rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5],
                      g = h[6], hh = h[7];
        for (int i = 0; i < 64; ++i) {
            const std::uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            const std::uint32_t ch = (e & f) ^ (~e & g);
            const std::uint32_t t1 = hh + S1 + ch + k[i] + w[i];
            const std::uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            const std::uint32_t t2 = S0 + maj;
            hh = g;
            g = f;
            f = e;
            e = d + t1;
            d = c;
            c = b;
            b = a;
            a = t1 + t2;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
        h[5] += f;
        h[6] += g;
        h[7] += hh;
    }

    void update(const unsigned char* data, std::size_t len) {
        total += len;
        while (len) {
            const std::size_t take = std::min(len, std::size_t(64) - block_len);
            std::memcpy(block + block_len, data, take);
            block_len += take;
            data += take;
            len -= take;
            if (block_len == 64) {
                compress(block);
                block_len = 0;
            }
        }
    }

    std::string finish() {
        const std::uint64_t bits = total * 8;
        unsigned char pad = 0x80;
        update(&pad, 1);
        unsigned char zero = 0;
        while (block_len != 56) update(&zero, 1);
        unsigned char lenb[8];
        for (int i = 0; i < 8; ++i) lenb[i] = (unsigned char)(bits >> (56 - 8 * i));
        update(lenb, 8);
        static const char* hex = "0123456789abcdef";
        std::string out;
        out.reserve(64);
        for (std::uint32_t word : h)
            for (int i = 3; i >= 0; --i) {
                const unsigned char byte = (unsigned char)(word >> (8 * i));
                out += hex[byte >> 4];
                out += hex[byte & 0xf];
            }
        return out;
    }
};

} // namespace

std::string sha256_hex(std::span<const unsigned char> bytes) {
    Sha256 s;
    s.update(bytes.data(), bytes.size());
    return s.finish();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw MahlError("cannot hash " + path.string());
    Sha256 s;
    unsigned char buf[65536];
    while (is) {
        is.read(reinterpret_cast<char*>(buf), sizeof(buf));
        s.update(buf, std::size_t(is.gcount()));
    }
    return s.finish();
}

RunManifest::RunManifest(std::filesystem::path out_dir, std::string command)
    : dir_(std::move(out_dir)), command_(std::move(command)) {
    std::filesystem::create_directories(dir_);
}

void RunManifest::add_artifact(const std::filesystem::path& path) {
    artifacts_.push_back(path);
}

void RunManifest::add_timing(const std::string& name, double seconds) {
    timings_[name] = seconds;
}

void RunManifest::set_config(const json& resolved) { config_ = resolved; }

void RunManifest::write() {
    json manifest;
    manifest["command"] = command_;
    manifest["version"] = "mahl 1.0.0";
    if (!config_.is_null()) {
        write_json_file(dir_ / "resolved_config.json", config_);
        artifacts_.push_back(dir_ / "resolved_config.json");
    }
    json arts = json::array();
    std::sort(artifacts_.begin(), artifacts_.end());
    for (const auto& p : artifacts_) {
        arts.push_back({{"path", std::filesystem::relative(p, dir_).string()},
                        {"sha256", sha256_file(p)},
                        {"bytes", std::filesystem::file_size(p)}});
    }
    manifest["artifacts"] = arts;
    write_json_file(dir_ / "manifest.json", manifest);
    write_json_file(dir_ / "timings.json", timings_);
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw MahlError("cannot write " + path.string());
    os << j.dump(2) << "\n";
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read " + path.string());
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

} // namespace mahl
