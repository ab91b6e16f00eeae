#include "lagmcf/field_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "lagmcf/errors.hpp"

namespace lagmcf {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
T byteswap_if_big(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <class T>
void put(std::ostream& out, T v) {
  v = byteswap_if_big(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in, const char* what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw FormatError(std::string("LGF1: truncated header reading ") + what);
  }
  return byteswap_if_big(v);
}

}  // namespace

void write_lgf1(const ScalarField& field, std::ostream& out) {
  const auto& g = field.grid();
  out.write("LGF1", 4);
  put<std::uint32_t>(out, kLgfVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.ndim()));
  for (int d = 0; d < g.ndim(); ++d) {
    put<std::uint64_t>(out, g.npts(d));
    put<double>(out, g.spacing(d));
    put<double>(out, g.origin(d));
  }
  if constexpr (std::endian::native == std::endian::little) {
    const auto vals = field.values();
    out.write(reinterpret_cast<const char*>(vals.data()),
              static_cast<std::streamsize>(vals.size() * sizeof(double)));
  } else {
    for (double v : field.values()) put<double>(out, v);
  }
  if (!out) throw IoError("LGF1: write failed");
}

void write_lgf1(const ScalarField& field, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_lgf1(field, out);
}

ScalarField read_lgf1(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4)) throw FormatError("LGF1: file too short");
  if (std::memcmp(magic, "LGF1", 4) != 0) throw FormatError("LGF1: bad magic");
  const auto version = get<std::uint32_t>(in, "version");
  if (version != kLgfVersion) throw FormatError("LGF1: unsupported version " + std::to_string(version));
  const auto ndim = get<std::uint32_t>(in, "ndim");
  if (ndim < 1 || ndim > static_cast<std::uint32_t>(kMaxDim)) {
    throw FormatError("LGF1: ndim out of range: " + std::to_string(ndim));
  }
  std::array<std::size_t, kMaxDim> npts{};
  std::array<double, kMaxDim> spacing{};
  std::array<double, kMaxDim> origin{};
  for (std::uint32_t d = 0; d < ndim; ++d) {
    npts[d] = static_cast<std::size_t>(get<std::uint64_t>(in, "npts"));
    spacing[d] = get<double>(in, "spacing");
    origin[d] = get<double>(in, "origin");
  }
  GridSpec grid;
  try {
    grid = GridSpec({npts.data(), ndim}, {spacing.data(), ndim}, {origin.data(), ndim});
  } catch (const ValidationError& e) {
    throw FormatError(std::string("LGF1: invalid grid header: ") + e.what());
  }
  std::vector<double> values(grid.size());
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(values.size() * sizeof(double)))) {
    throw FormatError("LGF1: truncated payload");
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& v : values) v = byteswap_if_big(v);
  }
  return ScalarField(std::move(grid), std::move(values));
}

ScalarField read_lgf1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_lgf1(in);
}

}  // namespace lagmcf
