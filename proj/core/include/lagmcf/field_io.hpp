#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "lagmcf/grid.hpp"

namespace lagmcf {

/// "LGF1" binary field snapshot, all integers and floats little-endian:
///
///   bytes 0-3  magic "LGF1"
///   u32        version (1)
///   u32        ndim
///   per axis   u64 npts, f64 spacing, f64 origin
///   payload    f64 values, row-major, last axis fastest
inline constexpr std::uint32_t kLgfVersion = 1;

void write_lgf1(const ScalarField& field, std::ostream& out);
void write_lgf1(const ScalarField& field, const std::filesystem::path& path);

/// Throws FormatError on wrong magic/version or truncated payload, IoError
/// when the file cannot be opened.
ScalarField read_lgf1(std::istream& in);
ScalarField read_lgf1(const std::filesystem::path& path);

}  // namespace lagmcf
