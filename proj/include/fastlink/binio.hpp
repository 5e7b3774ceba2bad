#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "fastlink/common.hpp"

// Minimal helpers for the flat little-endian binary file formats used by
// model/dataset/evaluator serialization. Host is assumed little-endian.

namespace fastlink::binio {

inline void write_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void read_bytes(std::ifstream& in, void* p, std::size_t n, const std::string& what) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (in.gcount() != static_cast<std::streamsize>(n))
    throw IntegrityError("truncated file while reading " + what);
}

inline void write_magic(std::ofstream& out, const char (&magic)[9]) {
  write_bytes(out, magic, 8);
}

inline void check_magic(std::ifstream& in, const char (&magic)[9], const std::string& what) {
  char got[8];
  read_bytes(in, got, 8, what + " magic");
  for (int i = 0; i < 8; ++i)
    if (got[i] != magic[i]) throw IntegrityError("bad magic in " + what + " file");
}

inline void write_i32(std::ofstream& out, std::int32_t v) { write_bytes(out, &v, 4); }
inline std::int32_t read_i32(std::ifstream& in, const std::string& what) {
  std::int32_t v;
  read_bytes(in, &v, 4, what);
  return v;
}

inline void write_u8(std::ofstream& out, std::uint8_t v) { write_bytes(out, &v, 1); }
inline std::uint8_t read_u8(std::ifstream& in, const std::string& what) {
  std::uint8_t v;
  read_bytes(in, &v, 1, what);
  return v;
}

inline void write_f64s(std::ofstream& out, const std::vector<double>& v) {
  write_bytes(out, v.data(), v.size() * sizeof(double));
}

inline void read_f64s(std::ifstream& in, std::vector<double>& v, std::size_t count,
                      const std::string& what) {
  v.resize(count);
  read_bytes(in, v.data(), count * sizeof(double), what);
}

}  // namespace fastlink::binio
