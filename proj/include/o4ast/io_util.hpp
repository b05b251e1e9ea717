#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "error.hpp"

namespace o4ast {

// Little-endian scalar IO and a FNV-1a digest for artifact fingerprints.

inline void write_bytes(std::ostream& out, const void* p, size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
void write_scalar(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  write_bytes(out, &v, sizeof(T));
}

inline void read_bytes(std::istream& in, void* p, size_t n, const char* what) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in.gcount()) != n)
    raise(ErrorKind::Corruption,
          std::string("truncated file while reading ") + what + " at offset " +
              std::to_string(static_cast<long long>(in.tellg())));
}

template <typename T>
T read_scalar(std::istream& in, const char* what) {
  T v{};
  read_bytes(in, &v, sizeof(T), what);
  return v;
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_scalar<uint32_t>(out, static_cast<uint32_t>(s.size()));
  write_bytes(out, s.data(), s.size());
}

inline std::string read_string(std::istream& in, const char* what) {
  const uint32_t n = read_scalar<uint32_t>(in, what);
  if (n > (1u << 20)) raise(ErrorKind::Corruption, "implausible string length");
  std::string s(n, '\0');
  if (n) read_bytes(in, s.data(), n, what);
  return s;
}

struct Fnv1a64 {
  uint64_t state = 14695981039346656037ull;

  void update(const void* p, size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) {
      state ^= b[i];
      state *= 1099511628211ull;
    }
  }

  template <typename T>
  void update_scalar(T v) {
    update(&v, sizeof(T));
  }

  uint64_t digest() const { return state; }
};

inline uint64_t digest_bytes(const void* p, size_t n) {
  Fnv1a64 h;
  h.update(p, n);
  return h.digest();
}

inline uint64_t digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Io, "cannot open file: " + path);
  Fnv1a64 h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h.update(buf, static_cast<size_t>(in.gcount()));
  }
  return h.digest();
}

inline std::string hex_digest(uint64_t d) {
  static const char* k = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = k[d & 0xf];
    d >>= 4;
  }
  return s;
}

}  // namespace o4ast
