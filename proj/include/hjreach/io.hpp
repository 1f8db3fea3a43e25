#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hjreach/format.hpp"
#include "hjreach/grid.hpp"
#include "hjreach/oracle.hpp"
#include "hjreach/solver.hpp"

namespace hjreach {

namespace detail {

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);  // binary keeps line endings stable
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

template <int D>
inline void write_coord_header(std::ofstream& out, const std::string& hash,
                               const std::string& value_column) {
  out << "# config=" << hash << "\n";
  for (int j = 0; j < D; ++j) out << "x" << (j + 1) << ",";
  out << value_column << "\n";
}

}  // namespace detail

template <int D>
inline void write_mask_csv(const std::filesystem::path& path, const Grid<D>& grid,
                           std::span<const std::uint8_t> mask, const std::string& hash) {
  auto out = detail::open_for_write(path);
  detail::write_coord_header<D>(out, hash, "reachable");
  for (long long x = 0; x < grid.x_node_count(); ++x) {
    const Vec<D> c = grid.x_coord(x);
    for (int j = 0; j < D; ++j) out << format_double(c[j]) << ",";
    out << int(mask[static_cast<std::size_t>(x)]) << "\n";
  }
}

template <int D>
inline void write_map_csv(const std::filesystem::path& path, const Grid<D>& grid,
                          std::span<const double> values, const std::string& hash) {
  auto out = detail::open_for_write(path);
  detail::write_coord_header<D>(out, hash, "value");
  for (long long x = 0; x < grid.x_node_count(); ++x) {
    const Vec<D> c = grid.x_coord(x);
    for (int j = 0; j < D; ++j) out << format_double(c[j]) << ",";
    out << format_double(values[static_cast<std::size_t>(x)]) << "\n";
  }
}

/// Value-field slice at fixed (mode, lock level), one row per x node.
template <int D>
inline void write_slice_csv(const std::filesystem::path& path, const Grid<D>& grid,
                            const ValueField& field, int q, int k, const std::string& hash) {
  write_map_csv(path, grid, field.row(q, k), hash);
}

inline void write_table_csv(const std::filesystem::path& path,
                            std::span<const ConvergenceRow> rows, const std::string& hash) {
  auto out = detail::open_for_write(path);
  out << "# config=" << hash << "\n";
  out << "x0,y0,dx,analytic,reached,autonomy,bracket_lo,bracket_hi,error,seconds,note\n";
  for (const auto& r : rows) {
    out << format_double(r.x0) << "," << format_double(r.y0) << "," << format_double(r.dx) << ","
        << format_double(r.analytic) << "," << (r.reached ? 1 : 0) << ","
        << format_double(r.autonomy_value) << "," << format_double(r.bracket_lo) << ","
        << format_double(r.bracket_hi) << "," << format_double(r.error) << ","
        << format_double(r.seconds) << "," << r.note << "\n";
  }
}

/// Aligned text table: instance, dx, error against the closed form, runtime.
inline std::string format_table_text(std::span<const ConvergenceRow> rows) {
  std::ostringstream out;
  out << std::left << std::setw(14) << "(x0,y0)" << std::setw(8) << "dx" << std::setw(12)
      << "error" << std::setw(12) << "runtime(s)" << "\n";
  for (const auto& r : rows) {
    std::ostringstream inst;
    inst << "(" << format_double(r.x0) << "," << format_double(r.y0) << ")";
    std::ostringstream err;
    if (r.reached) {
      err << std::fixed << std::setprecision(3) << r.error;
    } else {
      err << "n/a";
    }
    std::ostringstream sec;
    sec << std::fixed << std::setprecision(1) << r.seconds;
    out << std::left << std::setw(14) << inst.str() << std::setw(8) << format_double(r.dx)
        << std::setw(12) << err.str() << std::setw(12) << sec.str();
    if (!r.note.empty()) out << " " << r.note;
    out << "\n";
  }
  return out.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  auto out = detail::open_for_write(path);
  out << text;
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = detail::open_for_write(path);
  out << j.dump(2) << "\n";
}

/// File inventory for a run directory. Paths are listed sorted; an
/// interrupted run is marked so partial output is recognizable.
inline void write_manifest(const std::filesystem::path& dir, std::vector<std::string> files,
                           const std::string& hash, bool complete) {
  std::sort(files.begin(), files.end());
  auto out = detail::open_for_write(dir / "MANIFEST");
  out << "config " << hash << "\n";
  out << "status " << (complete ? "complete" : "INCOMPLETE") << "\n";
  for (const auto& f : files) out << f << "\n";
}

}  // namespace hjreach
