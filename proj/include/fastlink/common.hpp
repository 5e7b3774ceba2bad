#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace fastlink {

using cplx = std::complex<double>;

/// Invalid parameters or configuration (bad dims, unknown keys, M=0, ...).
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Corrupted or inconsistent data detected at runtime (bad permutation, NaN loss, ...).
class IntegrityError : public std::runtime_error {
  public:
    explicit IntegrityError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed external input; message names the byte offset where parsing failed.
class ParseError : public std::runtime_error {
  public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

template <typename T>
bool all_finite(const std::vector<T>& v) {
    for (const auto& x : v)
        if (!is_finite(x)) return false;
    return true;
}

}  // namespace fastlink
