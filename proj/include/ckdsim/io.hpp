#pragma once

// Output plumbing: LF-terminated UTF-8 text with shortest round-trip decimal
// formatting, a little-endian wavefunction checkpoint format, SHA-256 for the
// run manifest, and CSV helpers. Reruns with identical inputs produce
// byte-identical files (no timestamps anywhere).

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "ckdsim/duffing.hpp"
#include "ckdsim/wavefunction.hpp"

namespace ckd {

inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("short write to " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failure on " + path.string());
    return s;
}

inline void write_binary_file(const std::filesystem::path& path,
                              const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path.string());
}

// --- CSV ------------------------------------------------------------------

class Csv {
  public:
    explicit Csv(const std::vector<std::string>& columns) : ncols_(columns.size()) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) text_ += ',';
            text_ += columns[i];
        }
        text_ += '\n';
    }

    void row(const std::vector<double>& values) {
        if (values.size() != ncols_) throw IoError("csv row width mismatch");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) text_ += ',';
            text_ += format_double(values[i]);
        }
        text_ += '\n';
    }

    const std::string& text() const { return text_; }
    void save(const std::filesystem::path& path) const { write_text_file(path, text_); }

  private:
    std::size_t ncols_;
    std::string text_;
};

// --- SHA-256 ----------------------------------------------------------------

namespace detail {

struct Sha256 {
    std::array<std::uint32_t, 8> h{0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                                   0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
    std::array<std::uint8_t, 64> block{};
    std::uint64_t total = 0;
    std::size_t fill = 0;

    static std::uint32_t rotr(std::uint32_t x, unsigned n) { return (x >> n) | (x << (32 - n)); }

    void compress(const std::uint8_t* p) {
        static constexpr std::uint32_t k[64] = {
            0x428a2f98u, 0x71374491u, 0xb5c0fbcfu, 0xe9b5dba5u, 0x3956c25bu, 0x59f111f1u,
            0x923f82a4u, 0xab1c5ed5u, 0xd807aa98u, 0x12835b01u, 0x243185beu, 0x550c7dc3u,
            0x72be5d74u, 0x80deb1feu, 0x9bdc06a7u, 0xc19bf174u, 0xe49b69c1u, 0xefbe4786u,
            0x0fc19dc6u, 0x240ca1ccu, 0x2de92c6fu, 0x4a7484aau, 0x5cb0a9dcu, 0x76f988dau,
            0x983e5152u, 0xa831c66du, 0xb00327c8u, 0xbf597fc7u, 0xc6e00bf3u, 0xd5a79147u,
            0x06ca6351u, 0x14292967u, 0x27b70a85u, 0x2e1b2138u, 0x4d2c6dfcu, 0x53380d13u,
            0x650a7354u, 0x766a0abbu, 0x81c2c92eu, 0x92722c85u, 0xa2bfe8a1u, 0xa81a664bu,
            0xc24b8b70u, 0xc76c51a3u, 0xd192e819u, 0xd6990624u, 0xf40e3585u, 0x106aa070u,
            0x19a4c116u, 0x1e376c08u, 0x2748774cu, 0x34b0bcb5u, 0x391c0cb3u, 0x4ed8aa4au,
            0x5b9cca4fu, 0x682e6ff3u, 0x748f82eeu, 0x78a5636fu, 0x84c87814u, 0x8cc70208u,
            0x90befffau, 0xa4506cebu, 0xbef9a3f7u, 0xc67178f2u};
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
                   (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
        for (int i = 16; i < 64; ++i) {
            const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3];
        std::uint32_t e = h[4], f = h[5], g = h[6], hh = h[7];
        for (int i = 0; i < 64; ++i) {
            const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            const std::uint32_t ch = (e & f) ^ (~e & g);
            const std::uint32_t t1 = hh + s1 + ch + k[i] + w[i];
            const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            const std::uint32_t t2 = s0 + maj;
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

    void update(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        total += n;
        while (n > 0) {
            const std::size_t take = std::min(n, block.size() - fill);
            std::memcpy(block.data() + fill, p, take);
            fill += take;
            p += take;
            n -= take;
            if (fill == block.size()) {
                compress(block.data());
                fill = 0;
            }
        }
    }

    std::string hex() {
        const std::uint64_t bits = total * 8;
        const std::uint8_t pad = 0x80;
        update(&pad, 1);
        const std::uint8_t zero = 0;
        while (fill != 56) update(&zero, 1);
        std::uint8_t len[8];
        for (int i = 0; i < 8; ++i) len[i] = std::uint8_t(bits >> (56 - 8 * i));
        update(len, 8);
        static constexpr char digits[] = "0123456789abcdef";
        std::string out(64, '0');
        for (int i = 0; i < 8; ++i)
            for (int b = 0; b < 4; ++b) {
                const std::uint8_t byte = std::uint8_t(h[i] >> (24 - 8 * b));
                out[8 * i + 2 * b] = digits[byte >> 4];
                out[8 * i + 2 * b + 1] = digits[byte & 0xf];
            }
        return out;
    }
};

}  // namespace detail

inline std::string sha256_hex(const void* data, std::size_t n) {
    detail::Sha256 s;
    s.update(data, n);
    return s.hex();
}

inline std::string sha256_hex(std::string_view s) { return sha256_hex(s.data(), s.size()); }

// --- wavefunction checkpoints ----------------------------------------------

// Binary layout (little-endian): magic "CKDPSI1\n", u64 grid size, f64 x_min,
// f64 x_max, f64 t, u64 parameter fingerprint, then m (re, im) f64 pairs.
inline void write_wavefunction(const std::filesystem::path& path, const WaveFunction& w,
                               const DuffingParams& pr) {
    std::vector<std::uint8_t> buf;
    buf.reserve(48 + 16 * w.grid.m);
    auto put = [&buf](const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        buf.insert(buf.end(), b, b + n);
    };
    put("CKDPSI1\n", 8);
    const std::uint64_t m = w.grid.m;
    put(&m, 8);
    put(&w.grid.x_min, 8);
    put(&w.grid.x_max, 8);
    put(&w.t, 8);
    const std::uint64_t fp = params_fingerprint(pr);
    put(&fp, 8);
    for (const auto& a : w.amp) {
        const double re = a.real(), im = a.imag();
        put(&re, 8);
        put(&im, 8);
    }
    write_binary_file(path, buf);
}

inline WaveFunction read_wavefunction(const std::filesystem::path& path,
                                      const DuffingParams* expect_params = nullptr) {
    const std::string raw = read_text_file(path);
    if (raw.size() < 48 || raw.compare(0, 8, "CKDPSI1\n") != 0)
        throw IoError(path.string() + ": not a wavefunction checkpoint");
    auto get = [&raw](std::size_t off, void* p, std::size_t n) {
        std::memcpy(p, raw.data() + off, n);
    };
    std::uint64_t m = 0, fp = 0;
    double x_min = 0, x_max = 0, t = 0;
    get(8, &m, 8);
    get(16, &x_min, 8);
    get(24, &x_max, 8);
    get(32, &t, 8);
    get(40, &fp, 8);
    if (raw.size() != 48 + 16 * m) throw IoError(path.string() + ": truncated checkpoint");
    if (expect_params && fp != params_fingerprint(*expect_params))
        throw IoError(path.string() + ": checkpoint was produced with different parameters");
    WaveFunction w;
    w.grid = make_grid(x_min, x_max, m);
    w.t = t;
    w.amp.resize(m);
    for (std::uint64_t j = 0; j < m; ++j) {
        double re = 0, im = 0;
        get(48 + 16 * j, &re, 8);
        get(48 + 16 * j + 8, &im, 8);
        w.amp[j] = {re, im};
    }
    return w;
}

// --- manifest ---------------------------------------------------------------

struct ManifestEntry {
    std::string path;  // relative to the output directory
    std::string sha256;
    std::uint64_t bytes = 0;
};

inline ManifestEntry manifest_entry_for(const std::filesystem::path& dir,
                                        const std::string& rel) {
    const std::string data = read_text_file(dir / rel);
    return {rel, sha256_hex(data), data.size()};
}

// Written as JSON by the CLI layer (which owns the JSON dependency); the
// library side only collects entries.

}  // namespace ckd
