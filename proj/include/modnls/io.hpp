#pragma once

// Field and trajectory files, JSON metadata, CSV dumps.
//
// Field file (little-endian):
//   int64 d, float64 L, int64 n, then n^d complex doubles (re, im) of grid
//   values in row-major order.
// Trajectory file:
//   int64 d, float64 L, int64 n, int64 samples, then per sample float64 t and
//   n^d complex doubles of DFT coefficients (fft_forward convention).

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "modnls/error.hpp"
#include "modnls/spectral.hpp"

namespace modnls {

namespace detail {

template <class T>
T to_le(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_le(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("truncated binary file");
  return to_le(v);
}

inline void put_complex(std::ostream& os, std::span<const cplx> data) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(cplx)));
  } else {
    for (const auto& c : data) {
      put(os, c.real());
      put(os, c.imag());
    }
  }
}

inline CVector get_complex(std::istream& is, std::size_t count) {
  CVector out(count);
  if constexpr (std::endian::native == std::endian::little) {
    is.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(count * sizeof(cplx)));
    if (!is) throw Error("truncated binary file");
  } else {
    for (auto& c : out) {
      const double re = get<double>(is);
      c = {re, get<double>(is)};
    }
  }
  return out;
}

inline void put_header(std::ostream& os, const GridSpec& g) {
  put<std::int64_t>(os, g.d);
  put<double>(os, g.L());
  put<std::int64_t>(os, g.n);
}

inline GridSpec get_header(std::istream& is) {
  const auto d = get<std::int64_t>(is);
  const double L = get<double>(is);
  const auto n = get<std::int64_t>(is);
  if (d < 1 || d > 3 || n < 1 || n > (1 << 20)) throw Error("corrupt field header");
  return make_grid(static_cast<int>(d), L, static_cast<int>(n));
}

inline std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  return os;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  return is;
}

}  // namespace detail

inline void write_field(std::ostream& os, const SpectralField& f) {
  detail::put_header(os, f.grid());
  detail::put_complex(os, f.values());
}

inline SpectralField read_field(std::istream& is) {
  const GridSpec g = detail::get_header(is);
  return SpectralField::from_values(g, detail::get_complex(is, g.size()));
}

inline void write_field(const std::string& path, const SpectralField& f) {
  auto os = detail::open_out(path, true);
  write_field(os, f);
}

inline SpectralField read_field(const std::string& path) {
  auto is = detail::open_in(path);
  return read_field(is);
}

inline void write_trajectory(std::ostream& os, const Trajectory& u) {
  detail::put_header(os, u.grid());
  detail::put<std::int64_t>(os, static_cast<std::int64_t>(u.size()));
  for (std::size_t j = 0; j < u.size(); ++j) {
    detail::put<double>(os, u.times()[j]);
    detail::put_complex(os, u[j].spectrum());
  }
}

inline Trajectory read_trajectory(std::istream& is) {
  const GridSpec g = detail::get_header(is);
  const auto count = detail::get<std::int64_t>(is);
  if (count < 1) throw Error("corrupt trajectory header");
  std::vector<double> times;
  std::vector<SpectralField> fields;
  for (std::int64_t j = 0; j < count; ++j) {
    times.push_back(detail::get<double>(is));
    fields.push_back(SpectralField::from_spectrum(g, detail::get_complex(is, g.size())));
  }
  return Trajectory(std::move(times), std::move(fields));
}

inline void write_trajectory(const std::string& path, const Trajectory& u) {
  auto os = detail::open_out(path, true);
  write_trajectory(os, u);
}

inline Trajectory read_trajectory(const std::string& path) {
  auto is = detail::open_in(path);
  return read_trajectory(is);
}

inline nlohmann::ordered_json grid_json(const GridSpec& g) {
  return {{"d", g.d}, {"L", g.L()}, {"M", g.M}, {"n", g.n}};
}

inline nlohmann::ordered_json field_metadata(const SpectralField& f) {
  nlohmann::ordered_json j = grid_json(f.grid());
  j["l2_norm"] = lp_norm(f, 2.0);
  j["linf_norm"] = lp_norm(f, kInf);
  return j;
}

/// Fixed-width decimal formatting so CSV/JSON output is reproducible.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// Writes x_0, ..., x_{d-1}, |f| per grid point.
inline void write_abs_csv(const std::string& path, const SpectralField& f) {
  auto os = detail::open_out(path, false);
  const GridSpec& g = f.grid();
  for (int a = 0; a < g.d; ++a) os << "x" << a << ",";
  os << "abs\n";
  std::vector<int> idx(static_cast<std::size_t>(g.d));
  const auto& v = f.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    g.unravel(i, idx);
    for (int a = 0; a < g.d; ++a) os << fmt(g.coordinate(idx[static_cast<std::size_t>(a)])) << ",";
    os << fmt(std::abs(v[i])) << "\n";
  }
}

/// Pretty JSON with a trailing newline.
inline void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  auto os = detail::open_out(path, false);
  os << j.dump(2) << "\n";
}

}  // namespace modnls
