#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "encoder.hpp"
#include "errors.hpp"

namespace sclrank {

// Little-endian binary layout:
//   magic "SCLRANK\0", u32 version,
//   u64 hashed_dim, u64 hidden, u64 rep_dim, u64 max_tokens, u8 normalize_phi,
//   u64 init_seed, f64 init_scale,
//   u32 array count, then per array: u32 name length, name bytes,
//   u64 rows, u64 cols, rows * cols f64 values.

inline constexpr std::array<char, 8> checkpoint_magic{'S', 'C', 'L', 'R', 'A', 'N', 'K', '\0'};
inline constexpr std::uint32_t checkpoint_version = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little endian");

struct Checkpoint {
    EncoderConfig encoder;
    ModelParams params;
};

namespace detail {

template <typename T>
void put(std::ostream& out, T v)
{
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in, std::string const& what)
{
    char buf[sizeof(T)];
    if (!in.read(buf, sizeof(T))) {
        throw ParseError("<checkpoint>", 0, "truncated while reading " + what);
    }
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

} // namespace detail

inline void write_checkpoint(std::ostream& out, Checkpoint const& ck)
{
    out.write(checkpoint_magic.data(), checkpoint_magic.size());
    detail::put<std::uint32_t>(out, checkpoint_version);
    auto const& e = ck.encoder;
    detail::put<std::uint64_t>(out, e.hashed_dim);
    detail::put<std::uint64_t>(out, e.hidden);
    detail::put<std::uint64_t>(out, e.rep_dim);
    detail::put<std::uint64_t>(out, e.max_tokens);
    detail::put<std::uint8_t>(out, e.normalize_phi ? 1 : 0);
    detail::put<std::uint64_t>(out, e.init_seed);
    detail::put<double>(out, e.init_scale);

    auto const& p = ck.params;
    std::array<std::pair<std::size_t, std::size_t>, 6> const shapes{
        {{p.hashed_dim, p.hidden}, {1, p.hidden}, {p.hidden, p.rep_dim}, {1, p.rep_dim},
         {1, p.rep_dim}, {1, 1}}};
    auto arrays = p.arrays();
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(arrays.size()));
    for (std::size_t a = 0; a < arrays.size(); ++a) {
        std::string const name = ModelParams::array_names[a];
        detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        detail::put<std::uint64_t>(out, shapes[a].first);
        detail::put<std::uint64_t>(out, shapes[a].second);
        out.write(reinterpret_cast<char const*>(arrays[a].data()),
                  static_cast<std::streamsize>(arrays[a].size() * sizeof(double)));
    }
}

inline Checkpoint read_checkpoint(std::istream& in)
{
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != checkpoint_magic) {
        throw ParseError("<checkpoint>", 0, "not a model checkpoint");
    }
    auto const version = detail::get<std::uint32_t>(in, "version");
    if (version != checkpoint_version) {
        throw ParseError("<checkpoint>", 0, "unsupported version " + std::to_string(version));
    }
    Checkpoint ck;
    auto& e = ck.encoder;
    e.hashed_dim = detail::get<std::uint64_t>(in, "hashed_dim");
    e.hidden = detail::get<std::uint64_t>(in, "hidden");
    e.rep_dim = detail::get<std::uint64_t>(in, "rep_dim");
    e.max_tokens = detail::get<std::uint64_t>(in, "max_tokens");
    e.normalize_phi = detail::get<std::uint8_t>(in, "normalize_phi") != 0;
    e.init_seed = detail::get<std::uint64_t>(in, "init_seed");
    e.init_scale = detail::get<double>(in, "init_scale");
    e.validate();

    ck.params = ModelParams(e.hashed_dim, e.hidden, e.rep_dim);
    auto arrays = ck.params.arrays();
    if (detail::get<std::uint32_t>(in, "array count") != arrays.size()) {
        throw ParseError("<checkpoint>", 0, "unexpected number of arrays");
    }
    for (std::size_t a = 0; a < arrays.size(); ++a) {
        auto const len = detail::get<std::uint32_t>(in, "name length");
        std::string name(len, '\0');
        in.read(name.data(), len);
        if (name != ModelParams::array_names[a]) {
            throw ParseError("<checkpoint>", 0, "expected array '" +
                                                    std::string(ModelParams::array_names[a]) +
                                                    "', found '" + name + "'");
        }
        auto const rows = detail::get<std::uint64_t>(in, "rows");
        auto const cols = detail::get<std::uint64_t>(in, "cols");
        if (rows * cols != arrays[a].size()) {
            throw ParseError("<checkpoint>", 0, "array '" + name + "' has the wrong shape");
        }
        if (!in.read(reinterpret_cast<char*>(arrays[a].data()),
                     static_cast<std::streamsize>(arrays[a].size() * sizeof(double)))) {
            throw ParseError("<checkpoint>", 0, "truncated array '" + name + "'");
        }
    }
    return ck;
}

inline void save_checkpoint(std::filesystem::path const& path, Checkpoint const& ck)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_checkpoint(out, ck);
}

inline Checkpoint load_checkpoint(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), 0, "cannot open file");
    return read_checkpoint(in);
}

} // namespace sclrank
