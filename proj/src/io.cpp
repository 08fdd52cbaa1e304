#include "logldp/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace logldp {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states[0].coeffs.size());
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",coeff_" << i;
  out << "\n";
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    out << format_double(traj.times[r]);
    for (double c : traj.states[r].coeffs) out << "," << format_double(c);
    out << "\n";
  }
}

void write_trajectory_bin(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  const std::int64_t n_modes =
      traj.states.empty() ? 0 : static_cast<std::int64_t>(traj.states[0].coeffs.size());
  const std::int64_t n_steps = traj.steps();
  const double L = traj.states.empty() ? 0.0 : traj.states[0].domain.L;
  const double dt = traj.times.size() > 1 ? traj.times[1] - traj.times[0] : 0.0;
  out.write(reinterpret_cast<const char*>(&n_modes), 8);
  out.write(reinterpret_cast<const char*>(&n_steps), 8);
  out.write(reinterpret_cast<const char*>(&L), 8);
  out.write(reinterpret_cast<const char*>(&dt), 8);
  for (const auto& st : traj.states)
    out.write(reinterpret_cast<const char*>(st.coeffs.data()),
              static_cast<std::streamsize>(st.coeffs.size() * 8));
}

Trajectory read_trajectory_bin(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::int64_t n_modes = 0, n_steps = 0;
  double L = 0.0, dt = 0.0;
  in.read(reinterpret_cast<char*>(&n_modes), 8);
  in.read(reinterpret_cast<char*>(&n_steps), 8);
  in.read(reinterpret_cast<char*>(&L), 8);
  in.read(reinterpret_cast<char*>(&dt), 8);
  if (!in || n_modes < 1 || n_steps < 0)
    throw std::runtime_error("corrupt trajectory file " + path.string());
  DomainConfig dom{L, static_cast<int>(n_modes), static_cast<int>(n_modes), 1};
  Trajectory traj;
  for (std::int64_t r = 0; r <= n_steps; ++r) {
    SpectralField u = SpectralField::zero(dom);
    in.read(reinterpret_cast<char*>(u.coeffs.data()),
            static_cast<std::streamsize>(u.coeffs.size() * 8));
    if (!in) throw std::runtime_error("truncated trajectory file " + path.string());
    traj.times.push_back(r * dt);
    traj.states.push_back(std::move(u));
  }
  return traj;
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

}  // namespace logldp
